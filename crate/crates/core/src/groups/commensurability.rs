#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Commensurability {
    Rational { p: u64, q: u64 },
    Independent,
}

/// Looks for a continued-fraction convergent `p/q` of `l1/l2` with
/// `q ≤ max_denominator` and `|l1/l2 − p/q| ≤ tol`. Non-positive or
/// non-finite lengths are reported as independent.
pub fn commensurability_test(l1: f64, l2: f64, tol: f64, max_denominator: u64) -> Commensurability {
    if !(l1 > 0.0 && l2 > 0.0 && l1.is_finite() && l2.is_finite()) {
        return Commensurability::Independent;
    }
    let r = l1 / l2;
    let (mut p0, mut q0, mut p1, mut q1) = (1u64, 0u64, r.floor() as u64, 1u64);
    let mut x = r;
    loop {
        if q1 > max_denominator {
            return Commensurability::Independent;
        }
        if (r - p1 as f64 / q1 as f64).abs() <= tol {
            let g = gcd(p1, q1);
            return Commensurability::Rational { p: p1 / g, q: q1 / g };
        }
        let frac = x - x.floor();
        if frac <= f64::EPSILON * x.max(1.0) {
            return Commensurability::Independent;
        }
        x = 1.0 / frac;
        let a = x.floor() as u64;
        let (p2, q2) = (a.saturating_mul(p1).saturating_add(p0), a.saturating_mul(q1).saturating_add(q0));
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::LN_2;

    #[test]
    fn examples() {
        assert_eq!(commensurability_test(LN_2, 3.0 * LN_2, 1e-9, 10_000), Commensurability::Rational { p: 1, q: 3 });
        assert_eq!(commensurability_test(1.0, 2f64.sqrt(), 1e-9, 10_000), Commensurability::Independent);
        assert_eq!(commensurability_test(1.7, 1.7, 1e-12, 10), Commensurability::Rational { p: 1, q: 1 });
    }

    #[test]
    fn larger_ratio() {
        assert_eq!(commensurability_test(22.0, 7.0, 1e-12, 100), Commensurability::Rational { p: 22, q: 7 });
    }
}
