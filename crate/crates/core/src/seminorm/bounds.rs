use serde::{Deserialize, Serialize};

use super::{check_branch, Cutoffs, Evaluator, SeminormParams};
use crate::error::{Error, Result};
use crate::jet::{Body, Jet, Provider};
use crate::multiindex::{enumerate_degree, MultiIndex};
use crate::scalar::{ln_factorial, Scalar};
use crate::series::{Accumulator, SeriesEvaluation, Status, Tolerances};

/// Constants with `h_{m,l,R,S}(f) <= c a^{|R|} b^{|S|}` for every `f` whose
/// coefficients obey `|a_{R,S}| <= c a^{|R|} b^{|S|}` (`R` holomorphic).
///
/// `c` is kept as a logarithm: it grows doubly exponentially in `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipBound {
    pub m: u32,
    pub l: u64,
    pub ln_c: f64,
    pub a: f64,
    pub b: f64,
}

impl MembershipBound {
    pub fn c(&self) -> f64 {
        self.ln_c.exp()
    }

    /// `c a^{|R|} b^{|S|}`.
    pub fn bound(&self, r_degree: u32, s_degree: u32) -> f64 {
        (self.ln_c + r_degree as f64 * self.a.ln() + s_degree as f64 * self.b.ln()).exp()
    }
}

/// Start `(c^2 e^{2 hbar b^2 n}, 2 hbar a^2, 2 hbar b^2)`, then along the
/// binary digits of `l`: even steps `(c^2 e^{n(1+b)^2}, (1+a)^2, (1+b)^2)`,
/// odd steps `(c^2 e^{n(1+a)^2}, (1+b)^2, (1+a)^2)`.
pub fn membership_bound(a: f64, b: f64, c: f64, m: u32, l: u64, hbar: f64, n: usize) -> Result<MembershipBound> {
    check_branch(m, l)?;
    if !(a >= 0.0 && b >= 0.0 && c > 0.0 && hbar >= 0.0) || n == 0 {
        return Err(Error::InvalidParameter("membership constants must be non-negative (c positive)".into()));
    }
    let n = n as f64;
    let mut ln_c = 2.0 * c.ln() + 2.0 * hbar * b * b * n;
    let (mut a, mut b) = (2.0 * hbar * a * a, 2.0 * hbar * b * b);
    for level in 1..=m {
        let odd = (l >> (m - level)) & 1 == 1;
        let (a1, b1) = ((1.0 + a).powi(2), (1.0 + b).powi(2));
        if odd {
            ln_c = 2.0 * ln_c + n * a1;
            (a, b) = (b1, a1);
        } else {
            ln_c = 2.0 * ln_c + n * b1;
            (a, b) = (a1, b1);
        }
    }
    Ok(MembershipBound { m, l, ln_c, a, b })
}

/// `c_m(x) = sum_{|N| <= n_max} x^{|N|} (N!)^{1/2^{m+2} - 1}` in `n` variables.
pub fn continuity_constant(x: f64, m: u32, n: usize, n_max: u32) -> Result<SeriesEvaluation> {
    if !(x >= 0.0) || n == 0 {
        return Err(Error::InvalidParameter("continuity constant needs x >= 0 and n >= 1".into()));
    }
    if x == 0.0 {
        return Ok(SeriesEvaluation::exact(1.0));
    }
    let q = 0.5f64.powi(m as i32 + 2) - 1.0;
    let mut acc = Accumulator::new(Tolerances::default());
    for d in 0..=n_max {
        let shell: f64 = enumerate_degree(n, d)
            .iter()
            .map(|nn| (q * nn.entries().iter().map(|&k| ln_factorial(k)).sum::<f64>() + d as f64 * x.ln()).exp())
            .sum();
        if !acc.push(shell) {
            break;
        }
    }
    Ok(acc.finish())
}

/// Outcome of summing `delta_0(f * conj f) = sum_r (2 hbar)^r / r! |a_r|^2`
/// for a holomorphic `f` of one variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub hbar: f64,
    pub status: Status,
    /// Partial sum; absent when diverging.
    pub value: Option<f64>,
    pub terms_used: usize,
    pub first_increasing: Option<usize>,
    /// `ln t_r` for every term read.
    pub log_terms: Vec<f64>,
}

fn ln_abs_coeff(f: &Jet<impl Scalar>, r: u32) -> Result<f64> {
    if let Body::Provider(Provider::PowerSeries1d(rule)) = f.body() {
        return Ok(rule.ln_abs_derivative(r));
    }
    let a = f.coeff_or_err(&MultiIndex::unit(1, 0).with_slot(0, r), &MultiIndex::zero(1))?;
    Ok(a.to_c64().norm().ln())
}

/// Terms are formed in the log domain so factorial growth never overflows
/// before the heuristic has spoken.
pub fn divergence_probe<T: Scalar>(f: &Jet<T>, hbar: f64, n_max: u32) -> Result<DivergenceReport> {
    if f.n() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: f.n(),
        });
    }
    if f.basepoint().iter().any(|z| !z.is_zero()) {
        return Err(Error::NonzeroBasepoint);
    }
    if !(hbar >= 0.0) {
        return Err(Error::InvalidParameter("hbar must be non-negative".into()));
    }
    let mut acc = Accumulator::new(Tolerances::default());
    let mut log_terms = Vec::new();
    // At hbar = 0 only r = 0 survives: the sum terminates.
    let last = if hbar == 0.0 { 0 } else { n_max };
    for r in 0..=last {
        let lt = if r == 0 {
            0.0
        } else {
            r as f64 * (2.0 * hbar).ln() - ln_factorial(r)
        } + 2.0 * ln_abs_coeff(f, r)?;
        log_terms.push(lt);
        if !acc.push(lt.exp()) {
            break;
        }
    }
    let e = if hbar == 0.0 { acc.finish_exact() } else { acc.finish() };
    Ok(DivergenceReport {
        hbar,
        status: e.status,
        value: (e.status != Status::Diverging).then_some(e.value),
        terms_used: e.terms_used,
        first_increasing: e.first_increasing,
        log_terms,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorTailPoint {
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "M")]
    pub m: u32,
    pub evaluation: SeriesEvaluation,
}

/// `||f - f^{(N,M)}||_{m,l,0,0}` for each requested `(N, M)`.
pub fn taylor_tail<T: Scalar>(
    f: &Jet<T>,
    m: u32,
    l: u64,
    orders: &[(u32, u32)],
    hbar: f64,
    cutoffs: &Cutoffs,
) -> Result<Vec<TaylorTailPoint>> {
    let params = SeminormParams::origin(f.n(), m, l)?;
    orders
        .iter()
        .map(|&(nn, mm)| {
            let rest = f.taylor_remainder(nn, mm);
            let evaluation = Evaluator::new(&rest)
                .with_hbar(hbar)
                .with_cutoffs(cutoffs.clone())
                .seminorm(&params)?;
            Ok(TaylorTailPoint { n: nn, m: mm, evaluation })
        })
        .collect()
}
