//! Convergence bookkeeping shared by the zoom and flow engines.

use alloc::vec::Vec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Converged,
    Diverged,
    Inconclusive,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Converged => "converged",
            Verdict::Diverged => "diverged",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Sup-norm errors per index on a fixed grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub indices: Vec<usize>,
    pub errors: Vec<f64>,
    /// Least-squares per-index geometric ratio of the errors, if at least two
    /// positive errors were recorded.
    pub rate: Option<f64>,
    pub threshold: f64,
    pub verdict: Verdict,
}

/// Length of the trailing window inspected by the verdict.
pub const WINDOW: usize = 3;

impl ConvergenceReport {
    /// Converged iff the last error is at most `threshold` and the errors do
    /// not grow over the final window. Changes below `threshold · 1e-3` are
    /// treated as noise.
    pub fn new(indices: Vec<usize>, errors: Vec<f64>, threshold: f64) -> Self {
        let rate = geometric_rate(&indices, &errors);
        let verdict = verdict(&errors, threshold);
        Self { indices, errors, rate, threshold, verdict }
    }

    pub fn last_error(&self) -> Option<f64> {
        self.errors.last().copied()
    }

    pub fn is_converged(&self) -> bool {
        self.verdict == Verdict::Converged
    }
}

fn verdict(errors: &[f64], threshold: f64) -> Verdict {
    let Some(&last) = errors.last() else { return Verdict::Inconclusive };
    if !last.is_finite() {
        return Verdict::Diverged;
    }
    let tail = &errors[errors.len().saturating_sub(WINDOW)..];
    let floor = threshold * 1e-3;
    let decreasing = tail.windows(2).all(|p| p[1] <= p[0] || p[1] <= floor);
    let increasing = tail.len() >= 2 && tail.windows(2).all(|p| p[1] > p[0] && p[1] > floor);
    if last <= threshold && decreasing {
        Verdict::Converged
    } else if last > threshold && increasing {
        Verdict::Diverged
    } else {
        Verdict::Inconclusive
    }
}

/// `exp` of the least-squares slope of `ln e` against the index.
pub fn geometric_rate(indices: &[usize], errors: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = indices
        .iter()
        .zip(errors)
        .filter(|(_, e)| **e > 0.0 && e.is_finite())
        .map(|(i, e)| (*i as f64, e.ln()))
        .collect();
    slope(&pts).map(|s| s.exp())
}

/// Least-squares exponent `p` in `e ≈ C · xᵖ`.
pub fn power_exponent(xs: &[f64], errors: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(errors)
        .filter(|(x, e)| **x > 0.0 && **e > 0.0 && e.is_finite())
        .map(|(x, e)| (x.ln(), e.ln()))
        .collect();
    slope(&pts)
}

fn slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Positions where `values` attains a running minimum (ties within `slack`
/// count as records).
pub fn record_minima(values: &[f64], slack: f64) -> Vec<usize> {
    let mut best = f64::INFINITY;
    let mut out = Vec::new();
    for (i, v) in values.iter().enumerate() {
        if *v <= best + slack {
            out.push(i);
            best = best.min(*v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn halving_sequence() {
        let idx: Vec<usize> = (1..=10).collect();
        let errs: Vec<f64> = idx.iter().map(|n| 0.5f64.powi(*n as i32)).collect();
        let r = ConvergenceReport::new(idx, errs, 1e-2);
        assert!((r.rate.unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(r.verdict, Verdict::Converged);
    }

    #[test]
    fn growth_diverges() {
        let r = ConvergenceReport::new(vec![1, 2, 3], vec![1.0, 2.0, 4.0], 0.1);
        assert_eq!(r.verdict, Verdict::Diverged);
        let r = ConvergenceReport::new(vec![1, 2, 3], vec![1.0, 0.5, 0.7], 0.1);
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn noise_floor_counts_as_converged() {
        let r = ConvergenceReport::new(vec![1, 2, 3], vec![1e-16, 3e-16, 2e-16], 1e-6);
        assert_eq!(r.verdict, Verdict::Converged);
    }

    #[test]
    fn power_fit() {
        let xs = [1e2, 1e3, 1e4];
        let es = [1.0 / 1e2, 1.0 / 1e3, 1.0 / 1e4];
        assert!((power_exponent(&xs, &es).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn records() {
        assert_eq!(record_minima(&[3.0, 1.0, 2.0, 1.0, 0.5], 0.0), vec![0, 1, 3, 4]);
    }
}
