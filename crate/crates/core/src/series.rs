//! Convergence bookkeeping for non-negative series.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// The series terminated: every omitted term is provably zero.
    ConvergedExact,
    /// Heuristic convergence: the tail dropped below tolerance.
    Converged,
    Diverging,
    Inconclusive,
}

impl Status {
    pub fn is_converged(self) -> bool {
        matches!(self, Status::Converged | Status::ConvergedExact)
    }

    /// Combines the statuses of two ingredients of one result: the
    /// weakest one wins, and divergence dominates everything.
    pub fn and(self, other: Status) -> Status {
        use Status::*;
        match (self, other) {
            (Diverging, _) | (_, Diverging) => Diverging,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            (Converged, _) | (_, Converged) => Converged,
            _ => ConvergedExact,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::ConvergedExact => "converged_exact",
            Status::Converged => "converged",
            Status::Diverging => "diverging",
            Status::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub atol: f64,
    pub rtol: f64,
    /// Length of the trailing run of nondecreasing terms that flags divergence.
    pub window: usize,
    /// Partial sums must also exceed this before divergence is declared.
    pub blowup: f64,
    /// Consecutive decreasing terms below `rtol * sum` after which
    /// summation stops early.
    pub patience: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            atol: 1e-14,
            rtol: 1e-15,
            window: 8,
            blowup: 1e6,
            patience: 4,
        }
    }
}

/// A numeric series value with its convergence verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesEvaluation {
    pub value: f64,
    pub status: Status,
    pub terms_used: usize,
    pub last_term: f64,
    pub monotone_window: usize,
    /// Index of the first term larger than its predecessor, if any.
    pub first_increasing: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl SeriesEvaluation {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            status: Status::ConvergedExact,
            terms_used: 1,
            last_term: 0.0,
            monotone_window: 0,
            first_increasing: None,
            note: None,
        }
    }

    pub fn inconclusive(note: impl Into<String>) -> Self {
        Self {
            value: f64::NAN,
            status: Status::Inconclusive,
            terms_used: 0,
            last_term: f64::NAN,
            monotone_window: 0,
            first_increasing: None,
            note: Some(note.into()),
        }
    }

    pub fn diverging(note: impl Into<String>) -> Self {
        Self {
            value: f64::INFINITY,
            status: Status::Diverging,
            terms_used: 0,
            last_term: f64::INFINITY,
            monotone_window: 0,
            first_increasing: None,
            note: Some(note.into()),
        }
    }

    /// The finite value, if the series converged.
    pub fn finite(&self) -> Option<f64> {
        self.status.is_converged().then_some(self.value)
    }

    /// Applies `x -> x^(1/k)`, keeping the diagnostics.
    pub fn root(mut self, k: f64) -> Self {
        if self.value.is_finite() {
            self.value = self.value.powf(1.0 / k);
        }
        self
    }
}

/// A computed object (typically a jet) together with how trustworthy it is.
#[derive(Clone, Debug)]
pub struct Tracked<X> {
    pub value: X,
    pub status: Status,
    /// Size of the last retained series shell (0 when the series terminated).
    pub tail: f64,
    pub note: Option<String>,
}

impl<X> Tracked<X> {
    pub fn exact(value: X) -> Self {
        Self {
            value,
            status: Status::ConvergedExact,
            tail: 0.0,
            note: None,
        }
    }

    pub fn map<Y>(self, f: impl FnOnce(X) -> Y) -> Tracked<Y> {
        Tracked {
            value: f(self.value),
            status: self.status,
            tail: self.tail,
            note: self.note,
        }
    }
}

/// Running sum of non-negative terms with divergence/convergence tracking.
#[derive(Clone, Debug)]
pub struct Accumulator {
    tol: Tolerances,
    sum: f64,
    terms: usize,
    last: Option<f64>,
    last_ratio: Option<f64>,
    run: usize,
    ratio_run: usize,
    longest_run: usize,
    quiet: usize,
    first_increasing: Option<usize>,
    overflow: bool,
}

impl Accumulator {
    pub fn new(tol: Tolerances) -> Self {
        Self {
            tol,
            sum: 0.0,
            terms: 0,
            last: None,
            last_ratio: None,
            run: 0,
            ratio_run: 0,
            longest_run: 0,
            quiet: 0,
            first_increasing: None,
            overflow: false,
        }
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    /// Adds one term. Returns `false` once further terms are pointless:
    /// either the sum blew up or the tail has stayed negligible for
    /// `patience` consecutive decreasing terms.
    pub fn push(&mut self, term: f64) -> bool {
        debug_assert!(term >= 0.0 || term.is_nan());
        if !term.is_finite() {
            self.overflow = true;
            self.terms += 1;
            self.last = Some(f64::INFINITY);
            return false;
        }
        if let Some(prev) = self.last {
            // Ratio test: a convergent series like x^k/k! may rise for a
            // long stretch, but its ratios shrink; divergent ones do not.
            let ratio = (prev > 0.0).then(|| term / prev);
            match (ratio, self.last_ratio) {
                (Some(q), Some(q0)) if q >= q0 * (1.0 - 1e-12) => self.ratio_run += 1,
                _ => self.ratio_run = 0,
            }
            self.last_ratio = ratio;
            if term >= prev && term > 0.0 {
                self.run += 1;
                if term > prev && self.first_increasing.is_none() {
                    self.first_increasing = Some(self.terms);
                }
            } else {
                self.run = 0;
            }
            self.longest_run = self.longest_run.max(self.run);
            // Early stopping is purely relative so tiny sums keep their
            // precision; `atol` only enters the final verdict.
            let small = term <= self.tol.rtol * (self.sum + term);
            if term < prev && small {
                self.quiet += 1;
            } else if !small {
                self.quiet = 0;
            }
        }
        self.sum += term;
        self.terms += 1;
        self.last = Some(term);
        if !self.sum.is_finite() {
            self.overflow = true;
            return false;
        }
        if self.diverging() {
            return false;
        }
        self.quiet < self.tol.patience
    }

    fn threshold(&self, sum: f64) -> f64 {
        self.tol.atol.max(self.tol.rtol * sum)
    }

    /// Divergence needs the growth pattern; an overflow alone may just be
    /// a convergent series whose value exceeds the double range.
    fn diverging(&self) -> bool {
        self.run + 1 >= self.tol.window
            && self.ratio_run + 2 >= self.tol.window
            && self.sum > self.tol.blowup
    }

    /// Verdict for a series that may continue past the last pushed term.
    pub fn finish(&self) -> SeriesEvaluation {
        let last = self.last.unwrap_or(0.0);
        let status = if self.diverging() {
            Status::Diverging
        } else if self.overflow {
            Status::Inconclusive
        } else if self.quiet > 0 || last <= self.threshold(self.sum) || self.terms == 0 {
            Status::Converged
        } else {
            Status::Inconclusive
        };
        self.evaluation(status, last)
    }

    /// Verdict for a series known to have no further nonzero terms.
    pub fn finish_exact(&self) -> SeriesEvaluation {
        let last = self.last.unwrap_or(0.0);
        let status = if self.overflow {
            Status::Inconclusive
        } else {
            Status::ConvergedExact
        };
        self.evaluation(status, last)
    }

    fn evaluation(&self, status: Status, last: f64) -> SeriesEvaluation {
        SeriesEvaluation {
            value: if status == Status::Diverging {
                f64::INFINITY
            } else {
                self.sum
            },
            status,
            terms_used: self.terms,
            last_term: last,
            monotone_window: self.longest_run,
            first_increasing: self.first_increasing,
            note: (self.overflow && status != Status::Diverging).then(|| "partial sums exceed the double range".to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(terms: impl IntoIterator<Item = f64>) -> SeriesEvaluation {
        let mut acc = Accumulator::new(Tolerances::default());
        for t in terms {
            if !acc.push(t) {
                break;
            }
        }
        acc.finish()
    }

    #[test]
    fn exponential_series_converges() {
        let mut t = 1.0;
        let e = run((0..60).map(|k| {
            if k > 0 {
                t /= k as f64;
            }
            t
        }));
        assert_eq!(e.status, Status::Converged);
        assert!((e.value - std::f64::consts::E).abs() < 1e-14);
        assert!(e.terms_used < 60, "stopped early: {}", e.terms_used);
    }

    #[test]
    fn growing_terms_diverge() {
        let e = run((0..100).map(|k| 2f64.powi(k)));
        assert_eq!(e.status, Status::Diverging);
        assert_eq!(e.first_increasing, Some(1));
        assert!(e.finite().is_none());
    }

    #[test]
    fn small_nondecreasing_sums_are_not_divergent() {
        // Constant terms of size 1e-3 never pass the blow-up threshold.
        let e = run(std::iter::repeat(1e-3).take(50));
        assert_eq!(e.status, Status::Inconclusive);
    }

    #[test]
    fn long_rising_convergent_series_is_not_divergent() {
        // 30^k / k! rises until k = 30, far past the blow-up threshold.
        let mut t = 1.0;
        let e = run((0..200).map(|k| {
            if k > 0 {
                t *= 30.0 / k as f64;
            }
            t
        }));
        assert_eq!(e.status, Status::Converged);
        assert!((e.value / 30f64.exp() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn factorial_growth_diverges_before_overflow() {
        let mut t = 1.0;
        let e = run((0..100).map(|k| {
            if k > 0 {
                t *= (k as f64).sqrt();
            }
            t
        }));
        assert_eq!(e.status, Status::Diverging);
        assert!(e.terms_used < 40);
    }

    #[test]
    fn overflow_is_not_divergence() {
        // Two huge decreasing terms: convergent, but not representable.
        let e = run([f64::MAX, f64::MAX / 2.0]);
        assert_eq!(e.status, Status::Inconclusive);
        assert!(e.note.unwrap().contains("double range"));
    }

    #[test]
    fn status_combination() {
        use Status::*;
        assert_eq!(ConvergedExact.and(Converged), Converged);
        assert_eq!(Converged.and(Inconclusive), Inconclusive);
        assert_eq!(Inconclusive.and(Diverging), Diverging);
        assert_eq!(ConvergedExact.and(ConvergedExact), ConvergedExact);
    }
}
