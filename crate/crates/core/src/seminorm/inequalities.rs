use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{continuity_constant, epsilon_sign, Cutoffs, Evaluator, SeminormParams};
use crate::error::Result;
use crate::jet::Jet;
use crate::multiindex::{enumerate, MultiIndex};
use crate::series::SeriesEvaluation;
use crate::wick::closed_form_star;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Some ingredient did not converge; never counted as a pass.
    Unevaluable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityRow {
    pub name: String,
    pub params: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub verdict: Verdict,
}

/// Parameters of an inequality sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub m_max: u32,
    /// No row may read a seminorm above this level.
    pub level_cap: u32,
    /// `|R|, |S| <= deg_max`.
    pub deg_max: u32,
    /// Smaller hbar for the monotonicity rows (the jets carry the larger one).
    pub hbar_low: f64,
    pub cutoffs: Cutoffs,
    /// Relative slack: a row passes when `rhs - lhs >= -slack * rhs`.
    pub slack: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            m_max: 2,
            level_cap: 2,
            deg_max: 2,
            hbar_low: 0.25,
            cutoffs: Cutoffs::uniform(150),
            slack: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Q {
    v: f64,
    ok: bool,
}

impl Q {
    fn of(e: SeriesEvaluation) -> Self {
        Q {
            v: e.value,
            ok: e.status.is_converged() && e.value.is_finite(),
        }
    }

    fn known(v: f64) -> Self {
        Q { v, ok: v.is_finite() }
    }
}

impl std::ops::Mul for Q {
    type Output = Q;
    fn mul(self, o: Q) -> Q {
        Q {
            v: self.v * o.v,
            ok: self.ok && o.ok,
        }
    }
}

impl std::ops::Add for Q {
    type Output = Q;
    fn add(self, o: Q) -> Q {
        Q {
            v: self.v + o.v,
            ok: self.ok && o.ok,
        }
    }
}

fn row(name: &str, params: String, lhs: Q, rhs: Q, slack: f64, equality: bool) -> InequalityRow {
    let margin = rhs.v - lhs.v;
    let verdict = if !(lhs.ok && rhs.ok) {
        Verdict::Unevaluable
    } else {
        let tol = slack * rhs.v.abs();
        let holds = if equality { margin.abs() <= tol } else { margin >= -tol };
        if holds {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    };
    InequalityRow {
        name: name.to_string(),
        params,
        lhs: lhs.v,
        rhs: rhs.v,
        margin,
        verdict,
    }
}

fn sn(ev: &mut Evaluator<'_, Complex64>, m: u32, l: u64, r: &MultiIndex, s: &MultiIndex) -> Result<Q> {
    Ok(Q::of(ev.seminorm(&SeminormParams::new(m, l, r.clone(), s.clone())?)?))
}

fn label(m: u32, l: u64, r: &MultiIndex, s: &MultiIndex) -> String {
    format!("m={m} l={l} R={r} S={s}")
}

fn evaluator<'a>(f: &'a Jet<Complex64>, grid: &Grid) -> Evaluator<'a, Complex64> {
    Evaluator::new(f).with_cutoffs(grid.cutoffs.clone())
}

/// All seminorm estimates for `f` (and `g` where two functions enter), at
/// the hbar carried by the jets. Only rows whose every seminorm level is at
/// most `grid.level_cap` are produced.
///
/// Both jets must admit a closed-form pointwise and star product (two
/// polynomials or two exponentials).
pub fn inequality_suite(f: &Jet<Complex64>, g: &Jet<Complex64>, grid: &Grid) -> Result<Vec<InequalityRow>> {
    let n = f.n();
    let hbar = *f.hbar();
    let cap = grid.level_cap;
    let top = grid.m_max.min(cap);
    let idx = enumerate(n, grid.deg_max);
    let zero = MultiIndex::zero(n);
    let scalar = Complex64::new(0.6, -1.7);
    let one_c = Complex64::new(1.0, 0.0);

    let sum = Jet::linear(&one_c, f, &one_c, g)?;
    let scaled = f.scale(&scalar);
    let one = Jet::constant(n, f.basepoint().to_vec(), hbar, one_c)?;
    let fbar = f.conjugate();
    let prod = closed_form_star(f, g, Complex64::new(0.0, 0.0))?;
    let star = closed_form_star(&fbar, g, Complex64::new(hbar, 0.0))?;
    let mut dirs = Vec::new();
    for i in enumerate(n, 1) {
        for j in enumerate(n, 1) {
            if i.is_zero() && j.is_zero() {
                continue;
            }
            let d = f.derivative(&i, &j);
            dirs.push((i.clone(), j.clone(), d));
        }
    }

    let mut ef = evaluator(f, grid);
    let mut eg = evaluator(g, grid);
    let mut esum = evaluator(&sum, grid);
    let mut escaled = evaluator(&scaled, grid);
    let mut eone = evaluator(&one, grid);
    let mut efbar = evaluator(&fbar, grid);
    let mut eprod = evaluator(&prod, grid);
    let mut estar = evaluator(&star, grid);
    let mut elow = evaluator(f, grid).with_hbar(grid.hbar_low);
    let mut edirs: Vec<_> = dirs.iter().map(|(i, j, d)| (i, j, evaluator(d, grid))).collect();

    let slack = grid.slack;
    let mut rows = Vec::new();
    let a00 = f.coeff(&zero, &zero).map_or(f64::NAN, |c| c.norm());
    rows.push(row("delta_continuity", String::new(), Q::known(a00), sn(&mut ef, 0, 0, &zero, &zero)?, slack, false));

    for m in 0..=top {
        for l in 0..(1u64 << m) {
            let eps = epsilon_sign(m, l)?;
            for r in &idx {
                for s in &idx {
                    let p = label(m, l, r, s);
                    let nf = sn(&mut ef, m, l, r, s)?;
                    let ng = sn(&mut eg, m, l, r, s)?;
                    rows.push(row("homogeneity", p.clone(), sn(&mut escaled, m, l, r, s)?, Q::known(scalar.norm()) * nf, slack, true));
                    rows.push(row("triangle", p.clone(), sn(&mut esum, m, l, r, s)?, nf + ng, slack, false));
                    rows.push(row("hbar_monotone", format!("{p} hbar'={}", grid.hbar_low), sn(&mut elow, m, l, r, s)?, nf, slack, false));
                    for (i, j, ed) in edirs.iter_mut() {
                        let w = Q::known((2.0 * hbar).sqrt().powi((i.degree() + j.degree()) as i32));
                        let lhs = w * sn(ed, m, l, r, s)?;
                        let rhs = if eps > 0 {
                            sn(&mut ef, m, l, &r.add(i), &s.add(j))?
                        } else {
                            sn(&mut ef, m, l, &r.add(j), &s.add(i))?
                        };
                        rows.push(row("derivative", format!("{p} I={i} J={j} eps={eps}"), lhs, rhs, slack, m == 0));
                    }
                    if m + 1 <= cap {
                        let shifted = (1u64 << m) + l;
                        rows.push(row(
                            "pointwise_product",
                            p.clone(),
                            sn(&mut eprod, m, l, r, s)?,
                            sn(&mut ef, m + 1, l, r, s)? * sn(&mut eg, m + 1, l, r, s)?,
                            slack,
                            false,
                        ));
                        rows.push(row(
                            "star_product",
                            p.clone(),
                            sn(&mut estar, m, l, r, s)?,
                            sn(&mut ef, m + 1, shifted, r, s)? * sn(&mut eg, m + 1, l, r, s)?,
                            slack,
                            false,
                        ));
                        rows.push(row(
                            "conjugation",
                            p.clone(),
                            sn(&mut efbar, m, l, r, s)?,
                            sn(&mut eone, m + 1, l, r, s)? * sn(&mut ef, m + 1, shifted, r, s)?,
                            slack,
                            false,
                        ));
                    }
                    if m >= 1 && l < (1u64 << (m - 1)) {
                        // The lower level's branch l feeds the upper branches 2l and 2l+1.
                        rows.push(row("monotone_even", p.clone(), sn(&mut ef, m - 1, l, r, s)?, sn(&mut ef, m, 2 * l, r, s)?, slack, false));
                        rows.push(row(
                            "monotone_odd",
                            p.clone(),
                            sn(&mut ef, m - 1, l, s, r)?,
                            sn(&mut ef, m, 2 * l + 1, r, s)?,
                            slack,
                            false,
                        ));
                    }
                    if m + 2 <= cap {
                        let w = Q::known(
                            r.factorial_f64().powf(0.5f64.powi(m as i32 + 3)) * s.factorial_f64().powf(0.5f64.powi(m as i32 + 2)),
                        );
                        rows.push(row("absorb_both", p.clone(), nf, w * sn(&mut ef, m + 2, 4 * l + 1, &zero, &zero)?, slack, false));
                    }
                }
                if m + 1 <= cap {
                    let e = 0.5f64.powi(m as i32 + 2);
                    let w = Q::known(r.factorial_f64().powf(e));
                    // r plays the role of S in the first bound and of R in the second.
                    rows.push(row(
                        "absorb_s",
                        label(m, l, &zero, r),
                        sn(&mut ef, m, l, &zero, r)?,
                        w * sn(&mut ef, m + 1, 2 * l, &zero, &zero)?,
                        slack,
                        false,
                    ));
                    rows.push(row(
                        "absorb_r",
                        label(m, l, r, &zero),
                        sn(&mut ef, m, l, r, &zero)?,
                        w * sn(&mut ef, m + 1, 2 * l + 1, &zero, &zero)?,
                        slack,
                        false,
                    ));
                }
            }
        }
    }
    if cap >= 1 {
        let n11 = sn(&mut ef, 1, 1, &zero, &zero)?;
        for r in &idx {
            for s in &idx {
                let a = f.coeff(r, s).map_or(f64::NAN, |c| c.norm());
                let w = r.factorial_f64().powf(0.25) * s.factorial_f64().sqrt()
                    / (2.0 * hbar).sqrt().powi((r.degree() + s.degree()) as i32);
                rows.push(row("taylor_coefficient", format!("R={r} S={s}"), Q::known(a), Q::known(w) * n11, slack, false));
            }
        }
    }
    Ok(rows)
}

/// `||f *_alpha g||_{m,l,0,0} <= c_m(|alpha|/hbar) ||f||_{m+2,2l+1,0,0} ||g||_{m+2,2l,0,0}`.
pub fn star_continuity_rows(
    f: &Jet<Complex64>,
    g: &Jet<Complex64>,
    alphas: &[Complex64],
    m: u32,
    l: u64,
    grid: &Grid,
) -> Result<Vec<InequalityRow>> {
    let n = f.n();
    let hbar = *f.hbar();
    let zero = MultiIndex::zero(n);
    let mut ef = evaluator(f, grid);
    let mut eg = evaluator(g, grid);
    let rhs_norms = sn(&mut ef, m + 2, 2 * l + 1, &zero, &zero)? * sn(&mut eg, m + 2, 2 * l, &zero, &zero)?;
    let mut rows = Vec::new();
    for &alpha in alphas {
        let prod = closed_form_star(f, g, alpha)?;
        let lhs = sn(&mut evaluator(&prod, grid), m, l, &zero, &zero)?;
        let c = Q::of(continuity_constant(alpha.norm() / hbar, m, n, 400)?);
        rows.push(row(
            "star_continuity",
            format!("m={m} l={l} alpha={}", alpha),
            lhs,
            c * rhs_norms,
            grid.slack,
            false,
        ));
    }
    Ok(rows)
}

/// The odd half of the level-monotonicity statement read literally,
/// `||f||_{m-1,l,R,S} <= ||f||_{m,2l+1,R,S}`. It can fail (e.g. for
/// `f = zbar^3`, `R = 0`, `S = (2)`); the suite checks the form with `R` and
/// `S` exchanged on the left instead.
pub fn printed_odd_monotonicity(
    f: &Jet<Complex64>,
    m: u32,
    l: u64,
    r: &MultiIndex,
    s: &MultiIndex,
    grid: &Grid,
) -> Result<InequalityRow> {
    let mut ef = evaluator(f, grid);
    Ok(row(
        "monotone_odd_literal",
        label(m, l, r, s),
        sn(&mut ef, m - 1, l, r, s)?,
        sn(&mut ef, m, 2 * l + 1, r, s)?,
        grid.slack,
        false,
    ))
}
