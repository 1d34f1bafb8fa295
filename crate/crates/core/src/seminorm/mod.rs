//! The recursive seminorm hierarchy `h_{m,l,R,S}` and the norms built from it.
//!
//! Everything here is a series of non-negative terms, summed shell by shell
//! in `|N|` with early stopping and the divergence heuristic of
//! [`Accumulator`].

mod bounds;
mod inequalities;

use rustc_hash::FxHashMap as HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::multiindex::{enumerate_degree, MultiIndex};
use crate::scalar::{RealScalar, Scalar};
use crate::series::{Accumulator, SeriesEvaluation, Status, Tolerances};

pub use bounds::{
    continuity_constant, divergence_probe, membership_bound, taylor_tail, DivergenceReport, MembershipBound,
    TaylorTailPoint,
};
pub use inequalities::{inequality_suite, printed_odd_monotonicity, star_continuity_rows, Grid, InequalityRow, Verdict};

/// `(-1)^{popcount(l)}`.
pub fn epsilon_sign(m: u32, l: u64) -> Result<i8> {
    check_branch(m, l)?;
    Ok(if l.count_ones() % 2 == 0 { 1 } else { -1 })
}

fn check_branch(m: u32, l: u64) -> Result<()> {
    if m >= 64 || l >> m != 0 {
        return Err(Error::BranchOutOfRange { m, l });
    }
    Ok(())
}

/// Maximal `|N|` per recursion level; the last entry repeats.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cutoffs(pub Vec<u32>);

impl Cutoffs {
    pub fn uniform(k: u32) -> Self {
        Self(vec![k])
    }

    pub fn at(&self, level: u32) -> u32 {
        self.0
            .get(level as usize)
            .or(self.0.last())
            .copied()
            .unwrap_or(40)
    }
}

impl Default for Cutoffs {
    fn default() -> Self {
        Self::uniform(40)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeminormParams {
    pub m: u32,
    pub l: u64,
    #[serde(rename = "R")]
    pub r: MultiIndex,
    #[serde(rename = "S")]
    pub s: MultiIndex,
}

impl SeminormParams {
    pub fn new(m: u32, l: u64, r: MultiIndex, s: MultiIndex) -> Result<Self> {
        check_branch(m, l)?;
        if r.dim() != s.dim() {
            return Err(Error::DimensionMismatch {
                expected: r.dim(),
                found: s.dim(),
            });
        }
        Ok(Self { m, l, r, s })
    }

    /// `R = S = 0`.
    pub fn origin(n: usize, m: u32, l: u64) -> Result<Self> {
        Self::new(m, l, MultiIndex::zero(n), MultiIndex::zero(n))
    }
}

type HKey = (u32, u64, MultiIndex, MultiIndex);
/// `(level, branch, swapped, I, M)`.
type TKey = (u32, u64, bool, MultiIndex, MultiIndex);

#[derive(Clone, Debug)]
struct Partial {
    value: f64,
    status: Status,
    /// Diagnostic of the first inner series that failed.
    note: Option<String>,
}

/// Memoizing evaluator of `h_{m,l,R,S}(f)` for one jet and one hbar.
///
/// The hbar used in the weights `(2 hbar)^{...}` is independent of the
/// hbar that provider jets use for their own coefficients, so a fixed
/// function can be measured at several hbar values.
pub struct Evaluator<'a, T: Scalar> {
    f: &'a Jet<T>,
    hbar: f64,
    cutoffs: Cutoffs,
    tol: Tolerances,
    degrees: Option<(u32, u32)>,
    /// The zero polynomial: every h vanishes exactly.
    vanishes: bool,
    coeffs: HashMap<(MultiIndex, MultiIndex), Option<Complex64>>,
    h_memo: HashMap<HKey, SeriesEvaluation>,
    t_memo: HashMap<TKey, Partial>,
}

impl<'a, T: Scalar> Evaluator<'a, T> {
    pub fn new(f: &'a Jet<T>) -> Self {
        Self {
            f,
            hbar: f.hbar().to_f64(),
            cutoffs: Cutoffs::default(),
            tol: Tolerances::default(),
            degrees: f.polynomial_degrees(),
            vanishes: f.table().is_some_and(|t| t.complete && t.coeffs.values().all(Scalar::is_zero)),
            coeffs: HashMap::default(),
            h_memo: HashMap::default(),
            t_memo: HashMap::default(),
        }
    }

    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = hbar;
        self.h_memo.clear();
        self.t_memo.clear();
        self
    }

    pub fn with_cutoffs(mut self, cutoffs: Cutoffs) -> Self {
        self.cutoffs = cutoffs;
        self.h_memo.clear();
        self.t_memo.clear();
        self
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self.h_memo.clear();
        self.t_memo.clear();
        self
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn n(&self) -> usize {
        self.f.n()
    }

    /// `h_{m,l,R,S}(f)`.
    pub fn h(&mut self, params: &SeminormParams) -> Result<SeriesEvaluation> {
        check_branch(params.m, params.l)?;
        for x in [&params.r, &params.s] {
            if x.dim() != self.n() {
                return Err(Error::DimensionMismatch {
                    expected: self.n(),
                    found: x.dim(),
                });
            }
        }
        if !(self.hbar >= 0.0) {
            return Err(Error::InvalidParameter("hbar must be non-negative".into()));
        }
        Ok(self.h_at(params.m, params.l, &params.r, &params.s))
    }

    /// `||f||_{m,l,R,S} = h^{1/2^{m+1}}`.
    pub fn seminorm(&mut self, params: &SeminormParams) -> Result<SeriesEvaluation> {
        let h = self.h(params)?;
        Ok(h.root(2f64.powi(params.m as i32 + 1)))
    }

    /// `||f||_{m,l} = ||f||_{m,l,0,0}`.
    pub fn norm_ml(&mut self, m: u32, l: u64) -> Result<SeriesEvaluation> {
        self.seminorm(&SeminormParams::origin(self.n(), m, l)?)
    }

    /// `||f||_m = max_l ||f||_{m,l}`, the weakest status over all branches.
    pub fn norm_m(&mut self, m: u32) -> Result<SeriesEvaluation> {
        check_branch(m, 0)?;
        let mut best: Option<SeriesEvaluation> = None;
        let mut status = Status::ConvergedExact;
        for l in 0..(1u64 << m) {
            let e = self.norm_ml(m, l)?;
            status = status.and(e.status);
            if best.as_ref().is_none_or(|b| e.value > b.value || e.value.is_nan()) {
                best = Some(e);
            }
        }
        let mut e = best.expect("at least one branch");
        e.status = status;
        if status == Status::Diverging {
            e.value = f64::INFINITY;
        }
        Ok(e)
    }

    fn coeff(&mut self, i: &MultiIndex, j: &MultiIndex) -> Option<Complex64> {
        let key = (i.clone(), j.clone());
        if let Some(c) = self.coeffs.get(&key) {
            return *c;
        }
        let c = self.f.coeff(i, j).map(|v| v.to_c64());
        self.coeffs.insert(key, c);
        c
    }

    fn h_at(&mut self, m: u32, l: u64, r: &MultiIndex, s: &MultiIndex) -> SeriesEvaluation {
        let key = (m, l, r.clone(), s.clone());
        if let Some(e) = self.h_memo.get(&key) {
            return e.clone();
        }
        if self.vanishes {
            return SeriesEvaluation::exact(0.0);
        }
        let e = if m == 0 { self.base(r, s) } else { self.level(m, l, r, s) };
        self.h_memo.insert(key, e.clone());
        e
    }

    fn base(&mut self, r: &MultiIndex, s: &MultiIndex) -> SeriesEvaluation {
        let n = self.n();
        let k = self.cutoffs.at(0);
        let two_h = 2.0 * self.hbar;
        // A polynomial's column a_{R, N+S} ends once |N+S| passes deg_zbar.
        let last = match self.degrees {
            Some((dz, dzb)) if r.degree() > dz || s.degree() > dzb => {
                return SeriesEvaluation::exact(0.0);
            }
            Some((_, dzb)) => Some(dzb - s.degree()),
            None => None,
        };
        let terminates = last.is_some_and(|t| t <= k);
        let prefactor = two_h.powi((r.degree() + s.degree()) as i32);
        let mut acc = Accumulator::new(self.tol);
        for d in 0..=last.map_or(k, |t| t.min(k)) {
            let mut shell = 0.0;
            for nn in enumerate_degree(n, d) {
                let j = nn.add(s);
                match self.coeff(r, &j) {
                    Some(a) => shell += a.norm_sqr() / nn.factorial_f64(),
                    None => {
                        return SeriesEvaluation::inconclusive(format!(
                            "level 0: coefficients end at degree {}",
                            self.f.available_degree().unwrap_or(0)
                        ))
                    }
                }
            }
            let go = acc.push(prefactor * two_h.powi(d as i32) * shell);
            if !go && !terminates {
                break;
            }
        }
        let mut e = if terminates { acc.finish_exact() } else { acc.finish() };
        annotate(&mut e, 0, k);
        e
    }

    /// `T(I, M) = sum_{J <= M} C(M,J) h_{level,branch}(I,J)`, or with the
    /// arguments of `h` swapped.
    fn transform(&mut self, level: u32, branch: u64, swapped: bool, i: &MultiIndex, m: &MultiIndex) -> Partial {
        let key = (level, branch, swapped, i.clone(), m.clone());
        if let Some(t) = self.t_memo.get(&key) {
            return t.clone();
        }
        let mut value = 0.0;
        let mut status = Status::ConvergedExact;
        let mut note = None;
        let (fixed_bound, free_bound) = self.support(level, swapped);
        let js = if i.degree() > fixed_bound { Vec::new() } else { lower_set_bounded(m, free_bound) };
        for j in js {
            let h = if swapped {
                self.h_at(level, branch, &j, i)
            } else {
                self.h_at(level, branch, i, &j)
            };
            status = status.and(h.status);
            if !h.status.is_converged() {
                value = h.value;
                note = h.note;
                break;
            }
            value += m.binomial_f64(&j) * h.value;
        }
        let t = Partial { value, status, note };
        self.t_memo.insert(key, t.clone());
        t
    }

    /// Degree bounds outside which `h_{level}` vanishes, as `(bound on the
    /// argument held fixed in a transform, bound on the summed argument)`.
    /// Only level 0 of a polynomial has finite support.
    fn support(&self, level: u32, swapped: bool) -> (u32, u32) {
        match (level, self.degrees) {
            (0, Some((dz, dzb))) if swapped => (dzb, dz),
            (0, Some((dz, dzb))) => (dz, dzb),
            _ => (u32::MAX, u32::MAX),
        }
    }

    fn level(&mut self, m: u32, l: u64, r: &MultiIndex, s: &MultiIndex) -> SeriesEvaluation {
        let n = self.n();
        let k = self.cutoffs.at(m);
        let (parent, odd) = (l / 2, l % 2 == 1);
        let (fixed_bound, _) = self.support(m - 1, odd);
        let lower_r: Vec<(MultiIndex, f64)> = lower_set_bounded(r, fixed_bound)
            .into_iter()
            .map(|i| {
                let c = r.binomial_f64(&i);
                (i, c)
            })
            .collect();
        let mut acc = Accumulator::new(self.tol);
        let mut inner = Status::ConvergedExact;
        let mut inner_note = None;
        'shells: for d in 0..=k {
            let mut shell = 0.0;
            for nn in enumerate_degree(n, d) {
                let ns = nn.add(s);
                let mut sum = 0.0;
                for (i, c) in &lower_r {
                    let t = self.transform(m - 1, parent, odd, i, &ns);
                    inner = inner.and(t.status);
                    if !t.status.is_converged() {
                        inner_note = t.note;
                        break 'shells;
                    }
                    sum += c * t.value;
                }
                shell += sum * sum / nn.factorial_f64();
            }
            if !acc.push(shell) {
                break;
            }
        }
        if !inner.is_converged() {
            let note = inner_note.unwrap_or_else(|| format!("level {}: inner series {inner}", m - 1));
            return match inner {
                Status::Diverging => SeriesEvaluation::diverging(note),
                _ => SeriesEvaluation::inconclusive(note),
            };
        }
        let mut e = acc.finish();
        // Levels >= 1 never terminate (the J = 0 terms are always present),
        // so the best possible verdict here is heuristic convergence.
        if e.status == Status::ConvergedExact {
            e.status = Status::Converged;
        }
        annotate(&mut e, m, k);
        e
    }
}

/// All `J <= m` with `|J| <= max_degree`.
fn lower_set_bounded(m: &MultiIndex, max_degree: u32) -> Vec<MultiIndex> {
    if max_degree >= m.degree() {
        return m.lower_set();
    }
    fn walk(bounds: &[u32], budget: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        match bounds.split_first() {
            None => out.push(MultiIndex::new(prefix.clone()).expect("nonempty")),
            Some((&b, rest)) => {
                for j in 0..=b.min(budget) {
                    prefix.push(j);
                    walk(rest, budget - j, prefix, out);
                    prefix.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(m.entries(), max_degree, &mut Vec::with_capacity(m.dim()), &mut out);
    out
}

fn annotate(e: &mut SeriesEvaluation, level: u32, cutoff: u32) {
    if e.note.is_none() {
        e.note = match e.status {
            Status::Inconclusive => Some(format!("level {level}: cutoff |N|={cutoff} reached before convergence")),
            Status::Diverging => Some(format!("level {level}: terms grow without bound")),
            _ => None,
        };
    }
}

/// `h_{0,0,R,S}(f)` with `|N| <= n_max`. Truncated tables must hold every
/// coefficient the sum reads.
pub fn h_base<T: Scalar>(f: &Jet<T>, r: &MultiIndex, s: &MultiIndex, hbar: f64, n_max: u32) -> Result<SeriesEvaluation> {
    if let Some(avail) = f.available_degree() {
        let need = r.degree() + s.degree() + n_max;
        if need > avail {
            return Err(Error::Truncation {
                degree: need,
                available: avail,
            });
        }
    }
    Evaluator::new(f)
        .with_hbar(hbar)
        .with_cutoffs(Cutoffs::uniform(n_max))
        .h(&SeminormParams::new(0, 0, r.clone(), s.clone())?)
}

/// `h_{m,l,R,S}(f)` at the given hbar.
pub fn h_recursive<T: Scalar>(f: &Jet<T>, params: &SeminormParams, hbar: f64, cutoffs: &Cutoffs) -> Result<SeriesEvaluation> {
    Evaluator::new(f).with_hbar(hbar).with_cutoffs(cutoffs.clone()).h(params)
}

/// `||f||_{m,l,R,S}` at the given hbar.
pub fn seminorm<T: Scalar>(f: &Jet<T>, params: &SeminormParams, hbar: f64, cutoffs: &Cutoffs) -> Result<SeriesEvaluation> {
    Evaluator::new(f).with_hbar(hbar).with_cutoffs(cutoffs.clone()).seminorm(params)
}

/// One row of a seminorm sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub m: u32,
    pub l: u64,
    #[serde(rename = "R")]
    pub r: MultiIndex,
    #[serde(rename = "S")]
    pub s: MultiIndex,
    pub hbar: f64,
    pub evaluation: SeriesEvaluation,
}

/// Seminorms over `m <= m_max`, all branches, `|R|,|S| <= deg_max`, for each
/// hbar. Rows come in grid order (hbar, m, l, R, S) whatever the schedule.
pub fn table<T: Scalar>(
    f: &Jet<T>,
    m_max: u32,
    deg_max: u32,
    hbars: &[f64],
    cutoffs: &Cutoffs,
) -> Result<Vec<TableRow>> {
    use rayon::prelude::*;
    let n = f.n();
    let idx = crate::multiindex::enumerate(n, deg_max);
    let per_hbar: Vec<Result<Vec<TableRow>>> = hbars
        .par_iter()
        .map(|&hbar| {
            let mut ev = Evaluator::new(f).with_hbar(hbar).with_cutoffs(cutoffs.clone());
            let mut rows = Vec::new();
            for m in 0..=m_max {
                for l in 0..(1u64 << m) {
                    for r in &idx {
                        for s in &idx {
                            let p = SeminormParams::new(m, l, r.clone(), s.clone())?;
                            rows.push(TableRow {
                                m,
                                l,
                                r: r.clone(),
                                s: s.clone(),
                                hbar,
                                evaluation: ev.seminorm(&p)?,
                            });
                        }
                    }
                }
            }
            Ok(rows)
        })
        .collect();
    let mut out = Vec::new();
    for rows in per_hbar {
        out.extend(rows?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{Provider, SeriesRule};

    type C = Complex64;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    fn poly(terms: &[(u32, u32, f64)]) -> Jet<C> {
        Jet::from_monomials(
            1,
            vec![C::new(0.0, 0.0)],
            0.5,
            terms.iter().map(|&(a, b, c)| (mi(&[a]), mi(&[b]), C::new(c, 0.0))),
        )
        .unwrap()
    }

    fn origin(m: u32, l: u64) -> SeminormParams {
        SeminormParams::origin(1, m, l).unwrap()
    }

    #[test]
    fn epsilon_examples() {
        assert_eq!(epsilon_sign(1, 0).unwrap(), 1);
        assert_eq!(epsilon_sign(1, 1).unwrap(), -1);
        assert_eq!(epsilon_sign(2, 3).unwrap(), 1);
        assert_eq!(epsilon_sign(2, 4).unwrap_err(), Error::BranchOutOfRange { m: 2, l: 4 });
    }

    #[test]
    fn base_examples() {
        let zbar = poly(&[(0, 1, 1.0)]);
        let e = h_base(&zbar, &mi(&[0]), &mi(&[0]), 0.5, 40).unwrap();
        assert_eq!((e.value, e.status), (1.0, Status::ConvergedExact));
        let z = poly(&[(1, 0, 1.0)]);
        let e = h_base(&z, &mi(&[0]), &mi(&[0]), 0.5, 40).unwrap();
        assert_eq!((e.value, e.status), (0.0, Status::ConvergedExact));
        for &b in &[0.5, 1.0, 2.0] {
            let f = Jet::exponential(1, vec![C::new(0.0, 0.0)], 0.5, vec![C::new(0.0, 0.0)], vec![C::new(b, 0.0)]).unwrap();
            let e = h_base(&f, &mi(&[0]), &mi(&[0]), 0.5, 40).unwrap();
            let expected = (2.0 * 0.5 * b * b as f64).exp();
            assert!((e.value - expected).abs() <= 1e-12 * expected, "{b}: {} vs {expected}", e.value);
            assert!(e.status.is_converged());
        }
    }

    #[test]
    fn truncated_tables_report_their_shortfall() {
        let f = poly(&[(0, 1, 1.0), (0, 3, 1.0)]).truncate(2);
        let err = h_base(&f, &mi(&[0]), &mi(&[0]), 0.5, 5).unwrap_err();
        assert_eq!(err, Error::Truncation { degree: 5, available: 2 });
        let e = h_recursive(&f, &origin(1, 0), 0.5, &Cutoffs::uniform(10)).unwrap();
        assert_eq!(e.status, Status::Inconclusive);
        assert!(e.note.unwrap().contains("level 0"));
    }

    #[test]
    fn seminorm_examples() {
        let zbar = poly(&[(0, 1, 1.0)]);
        assert_eq!(seminorm(&zbar, &origin(0, 0), 0.5, &Cutoffs::default()).unwrap().value, 1.0);
        let one = poly(&[(0, 0, 1.0)]);
        assert_eq!(seminorm(&one, &origin(0, 0), 0.5, &Cutoffs::default()).unwrap().value, 1.0);
        // h_{1,0,0,0}(1) = sum_N 1/N! = e.
        let e = h_recursive(&one, &origin(1, 0), 0.5, &Cutoffs::default()).unwrap();
        assert!((e.value - std::f64::consts::E).abs() < 1e-14);
        assert_eq!(e.status, Status::Converged);
    }

    #[test]
    fn constant_function_levels_by_brute_force() {
        // Independent oracle for f = 1, n = 1, R = S = 0: plain nested loops
        // over the defining sums, with h_0(I,J) = [I = J = 0].
        const K: usize = 60;
        let mut fact = [1.0f64; 2 * K + 2];
        for k in 1..fact.len() {
            fact[k] = fact[k - 1] * k as f64;
        }
        let binom = |n: usize, k: usize| fact[n] / (fact[k] * fact[n - k]);
        let h0 = |i: usize, j: usize| if i == 0 && j == 0 { 1.0 } else { 0.0 };
        // h1[l][x] = h_{1,l}(0, x) for even use and h_{1,l}(x, 0) for odd use.
        let h1 = |l: u64, r: usize, s: usize| -> f64 {
            (0..K)
                .map(|nn| {
                    let mut inner = 0.0;
                    for i in 0..=r {
                        for j in 0..=nn + s {
                            let h = if l == 0 { h0(i, j) } else { h0(j, i) };
                            inner += binom(r, i) * binom(nn + s, j) * h;
                        }
                    }
                    inner * inner / fact[nn]
                })
                .sum()
        };
        let table: Vec<[Vec<f64>; 2]> = (0..2u64)
            .map(|l| [(0..=K).map(|x| h1(l, 0, x)).collect(), (0..=K).map(|x| h1(l, x, 0)).collect()])
            .collect();
        let h2 = |l: u64| -> f64 {
            (0..K)
                .map(|nn| {
                    let mut inner = 0.0;
                    for j in 0..=nn {
                        let parent = &table[(l / 2) as usize];
                        inner += binom(nn, j) * if l % 2 == 0 { parent[0][j] } else { parent[1][j] };
                    }
                    inner * inner / fact[nn]
                })
                .sum()
        };
        let one = poly(&[(0, 0, 1.0)]);
        let mut ev = Evaluator::new(&one);
        for l in 0..4 {
            let e = ev.h(&origin(2, l)).unwrap();
            let oracle = h2(l);
            assert!((e.value - oracle).abs() <= 1e-12 * oracle, "l={l}: {} vs {oracle}", e.value);
            assert!(e.value >= 1.0);
        }
    }

    #[test]
    fn bounded_lower_sets() {
        let m = mi(&[2, 3]);
        assert_eq!(lower_set_bounded(&m, 10), m.lower_set());
        let b = lower_set_bounded(&m, 2);
        assert_eq!(b.len(), 6);
        assert!(b.iter().all(|j| j.leq(&m) && j.degree() <= 2));
    }

    #[test]
    fn zero_polynomial_is_exactly_zero() {
        let z = poly(&[]);
        let e = h_recursive(&z, &origin(2, 3), 0.5, &Cutoffs::default()).unwrap();
        assert_eq!((e.value, e.status), (0.0, Status::ConvergedExact));
    }

    #[test]
    fn homogeneity() {
        let f = poly(&[(1, 1, 0.5), (0, 2, -1.25), (1, 0, 2.0)]);
        let a = C::new(0.6, -1.7);
        let g = f.scale(&a);
        for m in 0..=2 {
            for l in 0..(1u64 << m) {
                let p = SeminormParams::new(m, l, mi(&[1]), mi(&[1])).unwrap();
                let x = seminorm(&f, &p, 0.5, &Cutoffs::default()).unwrap().value;
                let y = seminorm(&g, &p, 0.5, &Cutoffs::default()).unwrap().value;
                assert!((y - a.norm() * x).abs() <= 1e-12 * y);
            }
        }
    }

    #[test]
    fn badguy_diverges_at_level_one() {
        let f = Jet::<C>::from_provider(1, vec![C::new(0.0, 0.0)], 0.5, Provider::PowerSeries1d(SeriesRule::QuarticRootFactorial)).unwrap();
        let e = h_recursive(&f, &origin(1, 1), 0.5, &Cutoffs::default()).unwrap();
        assert_eq!(e.status, Status::Diverging);
        assert!(e.finite().is_none());
    }

    #[test]
    fn norm_m_is_the_branch_maximum() {
        let f = poly(&[(2, 0, 1.0), (0, 1, 0.5)]);
        let mut ev = Evaluator::new(&f);
        let all: Vec<f64> = (0..4).map(|l| ev.norm_ml(2, l).unwrap().value).collect();
        let max = ev.norm_m(2).unwrap().value;
        assert_eq!(max, all.iter().cloned().fold(f64::MIN, f64::max));
    }

    #[test]
    fn sweep_rows_follow_grid_order() {
        let f = poly(&[(0, 1, 1.0)]);
        let rows = table(&f, 1, 1, &[0.25, 0.5], &Cutoffs::default()).unwrap();
        // per hbar: m=0 one branch, m=1 two, times 2x2 (R,S).
        assert_eq!(rows.len(), 2 * (1 + 2) * 4);
        assert_eq!(rows[0].hbar, 0.25);
        assert_eq!(rows.last().unwrap().hbar, 0.5);
        assert_eq!((rows[4].m, rows[4].l), (1, 0));
    }
}
