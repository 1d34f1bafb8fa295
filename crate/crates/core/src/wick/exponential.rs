use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::{Jet, Provider, TranslationMode};
use crate::multiindex::MultiIndex;
use crate::scalar::{RealScalar, Scalar};
use crate::series::Tracked;
use crate::wick::heisenberg::HeisenbergElement;
use crate::wick::product::{max_deviation, star_power, wick_star};

fn to_c64s<T: Scalar>(v: &[T]) -> Vec<Complex64> {
    v.iter().map(Scalar::to_c64).collect()
}

/// `u_{(w,c)} = e^{-ic/2hbar} e_{conj(w)/2hbar, -w/2hbar}`.
pub fn unitary_u<T: Scalar>(g: &HeisenbergElement<T>, hbar: &T::Real, p: Vec<T>) -> Result<Jet<T>> {
    let h = hbar.to_f64();
    if h <= 0.0 {
        return Err(Error::InvalidParameter("hbar must be positive".into()));
    }
    let w = to_c64s(&g.w);
    let c = g.c.to_f64();
    let provider = Provider::Exponential {
        prefactor: Complex64::new(0.0, -c / (2.0 * h)).exp(),
        abar: w.iter().map(|x| x.conj() / (2.0 * h)).collect(),
        beta: w.iter().map(|x| -x / (2.0 * h)).collect(),
    };
    Jet::from_provider(g.n(), p, hbar.clone(), provider)
}

/// `J_{(w,c)} = -ic/2hbar + (conj(w).z - w.zbar)/2hbar`, expanded around `p`.
pub fn generator_j<T: Scalar>(g: &HeisenbergElement<T>, hbar: &T::Real, p: Vec<T>) -> Result<Jet<T>> {
    let n = g.n();
    if p.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.len(),
        });
    }
    let inv = (hbar.clone() + hbar.clone()).recip();
    let zero = MultiIndex::zero(n);
    // Value at p: -ic/2hbar + (conj(w).p - w.conj(p))/2hbar.
    let mut constant = -(T::i().scale(&g.c));
    for (w, q) in g.w.iter().zip(&p) {
        constant = constant + w.conj() * q.clone() - w.clone() * q.conj();
    }
    let mut terms = vec![(zero.clone(), zero.clone(), constant.scale(&inv))];
    for (k, w) in g.w.iter().enumerate() {
        let e = MultiIndex::unit(n, k);
        terms.push((e.clone(), zero.clone(), w.conj().scale(&inv)));
        terms.push((zero.clone(), e, (-w.clone()).scale(&inv)));
    }
    Jet::from_monomials(n, p, hbar.clone(), terms)
}

/// `sum_l k!/(l!(k-2l)!) (-conj(w).w/4hbar)^l J_w^{k-2l}` with pointwise powers.
pub fn jw_power_closed_form<T: Scalar>(w: &[T], k: u32, hbar: &T::Real, p: Vec<T>) -> Result<Jet<T>> {
    let g = HeisenbergElement::new(w.to_vec(), T::Real::zero())?;
    let j = generator_j(&g, hbar, p.clone())?;
    let n = w.len();
    let norm2 = w.iter().fold(T::Real::zero(), |acc, x| acc + x.abs_sqr());
    let four_hbar = hbar.clone() + hbar.clone() + hbar.clone() + hbar.clone();
    let q = T::from_real(-(norm2 * four_hbar.recip()));
    let mut powers = vec![Jet::constant(n, p.clone(), hbar.clone(), T::one())?];
    for _ in 0..k {
        let next = Jet::pointwise_mul(powers.last().expect("nonempty"), &j, None)?.value;
        powers.push(next);
    }
    let mut acc = Jet::zero(n, p, hbar.clone())?;
    for l in 0..=k / 2 {
        let coef = crate::scalar::factorial(k)
            / (crate::scalar::factorial(l) * crate::scalar::factorial(k - 2 * l));
        let c = T::from_biguint(&coef) * q.powu(l);
        acc = Jet::linear(&T::one(), &acc, &c, &powers[(k - 2 * l) as usize])?;
    }
    Ok(acc)
}

/// Which sign `s` makes `J^{*k} = J J^{*(k-1)} + s (k-1) (conj(w).w/2hbar) J^{*(k-2)}`
/// hold exactly for all `2 <= k <= k_max`, judged against brute-force powers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecursionCheck {
    pub minus_holds: bool,
    pub plus_holds: bool,
    pub k_max: u32,
}

pub fn power_recursion_sign<T: Scalar>(w: &[T], hbar: &T::Real, k_max: u32) -> Result<RecursionCheck> {
    let n = w.len();
    let p = vec![T::zero(); n];
    let g = HeisenbergElement::new(w.to_vec(), T::Real::zero())?;
    let j = generator_j(&g, hbar, p)?;
    let alpha = T::from_real(hbar.clone());
    let norm2 = w.iter().fold(T::Real::zero(), |acc, x| acc + x.abs_sqr());
    let q = T::from_real(norm2 * (hbar.clone() + hbar.clone()).recip());
    let mut powers = vec![star_power(&j, 0, &alpha, None, None)?.value, j.clone()];
    for k in 2..=k_max {
        let next = wick_star(&powers[(k - 1) as usize], &j, &alpha, None, None)?.value;
        powers.push(next);
    }
    let (mut minus, mut plus) = (true, true);
    for k in 2..=k_max {
        let prod = Jet::pointwise_mul(&j, &powers[(k - 1) as usize], None)?.value;
        let corr = powers[(k - 2) as usize].scale(&(q.clone() * T::from_u64(u64::from(k - 1))));
        let with_minus = Jet::linear(&T::one(), &prod, &-T::one(), &corr)?;
        let with_plus = Jet::linear(&T::one(), &prod, &T::one(), &corr)?;
        let target = powers[k as usize].table();
        minus &= with_minus.table() == target;
        plus &= with_plus.table() == target;
    }
    Ok(RecursionCheck {
        minus_holds: minus,
        plus_holds: plus,
        k_max,
    })
}

/// Partial sum of the star exponential of `t J_g` and its deviation from
/// the closed form `u_{(tw, tc)}`.
#[derive(Clone, Debug)]
pub struct StarExpPartial<T: Scalar> {
    pub jet: Jet<T>,
    /// Largest coefficient deviation from `u_{(tw,tc)}` over `|I|+|J| <= d_out`.
    pub deviation: f64,
}

pub fn star_exp_partial<T: Scalar>(
    g: &HeisenbergElement<T>,
    t: &T::Real,
    terms: u32,
    hbar: &T::Real,
    p: Vec<T>,
    d_out: u32,
) -> Result<StarExpPartial<T>> {
    if terms == 0 {
        return Err(Error::InvalidParameter("at least one term is required".into()));
    }
    let n = g.n();
    let j = generator_j(g, hbar, p.clone())?;
    let alpha = T::from_real(hbar.clone());
    let tt = T::from_real(t.clone());
    let mut power = Jet::constant(n, p.clone(), hbar.clone(), T::one())?;
    let mut weight = T::one();
    let mut acc = power.clone();
    for k in 1..terms {
        power = wick_star(&power, &j, &alpha, None, None)?.value;
        weight = (weight * tt.clone()).div_biguint(&num_bigint::BigUint::from(k));
        acc = Jet::linear(&T::one(), &acc, &weight, &power)?;
    }
    let target = unitary_u(&g.scaled(t), hbar, p)?;
    let deviation = max_deviation(&acc, &target, d_out)?;
    Ok(StarExpPartial { jet: acc, deviation })
}

/// `u_w * f * u_{-w}` through the star product. The inner factor
/// `f * u_{-w}` terminates when `f` is polynomial in `z`; the outer
/// product is cut at `n_cut`.
pub fn adjoint_translation<T: Scalar>(f: &Jet<T>, w: &[T], d_out: u32, n_cut: u32) -> Result<Tracked<Jet<T>>> {
    let n = f.n();
    let p = f.basepoint().to_vec();
    let hbar = f.hbar().clone();
    let g = HeisenbergElement::new(w.to_vec(), T::Real::zero())?;
    let u = unitary_u(&g, &hbar, p.clone())?;
    let u_inv = unitary_u(&g.inverse(), &hbar, p)?;
    let alpha = T::from_real(hbar);
    let inner = wick_star(f, &u_inv, &alpha, Some(d_out + n_cut), Some(n_cut))?;
    let outer = wick_star(&u, &inner.value, &alpha, Some(d_out), Some(n_cut))?;
    debug_assert_eq!(outer.value.n(), n);
    Ok(Tracked {
        status: inner.status.and(outer.status),
        tail: inner.tail.max(outer.tail),
        note: outer.note.or(inner.note),
        value: outer.value,
    })
}

/// The pull-back `f(. + w)` at the same base point, i.e. translation in
/// both slots: `tau_w taubar_{conj(w)} f`.
pub fn translated<T: Scalar>(f: &Jet<T>, w: &[T], d_out: u32, k_cut: u32) -> Result<Tracked<Jet<T>>> {
    let wbar: Vec<T> = w.iter().map(Scalar::conj).collect();
    let a = f.translate(w, TranslationMode::Holomorphic, d_out + k_cut, k_cut)?;
    let b = a.value.translate(&wbar, TranslationMode::Antiholomorphic, d_out, k_cut)?;
    Ok(Tracked {
        status: a.status.and(b.status),
        tail: a.tail.max(b.tail),
        note: b.note.or(a.note),
        value: b.value,
    })
}

/// Closed form of `e_{abar,beta} *_alpha e_{gbar,delta}` (plus prefactors):
/// `e^{2 alpha abar.delta + hbar abar.beta + hbar gbar.delta - hbar (abar+gbar).(beta+delta)} e_{abar+gbar, beta+delta}`.
pub fn exponential_product(f: &Provider, g: &Provider, alpha: Complex64, hbar: f64) -> Option<Provider> {
    match (f, g) {
        (
            Provider::Exponential {
                prefactor: k1,
                abar: a,
                beta: b,
            },
            Provider::Exponential {
                prefactor: k2,
                abar: c,
                beta: d,
            },
        ) => {
            let dot = |x: &[Complex64], y: &[Complex64]| -> Complex64 { x.iter().zip(y).map(|(p, q)| p * q).sum() };
            let ac: Vec<Complex64> = a.iter().zip(c).map(|(x, y)| x + y).collect();
            let bd: Vec<Complex64> = b.iter().zip(d).map(|(x, y)| x + y).collect();
            let expo = 2.0 * alpha * dot(a, d) + hbar * dot(a, b) + hbar * dot(c, d) - hbar * dot(&ac, &bd);
            Some(Provider::Exponential {
                prefactor: k1 * k2 * expo.exp(),
                abar: ac,
                beta: bd,
            })
        }
        _ => None,
    }
}

/// `f *_alpha g` for pairs that admit an exact answer: two polynomials, or
/// two members of the exponential family.
pub fn closed_form_star(f: &Jet<Complex64>, g: &Jet<Complex64>, alpha: Complex64) -> Result<Jet<Complex64>> {
    if f.is_polynomial() && g.is_polynomial() {
        if let (Some(_), Some(_)) = (f.table(), g.table()) {
            return Ok(wick_star(f, g, &alpha, None, None)?.value);
        }
    }
    match (f.provider(), g.provider()) {
        (Some(p), Some(q)) => {
            if f.n() != g.n() {
                return Err(Error::DimensionMismatch {
                    expected: f.n(),
                    found: g.n(),
                });
            }
            if f.basepoint() != g.basepoint() || f.hbar() != g.hbar() {
                return Err(Error::IncompatibleJets);
            }
            let r = exponential_product(p, q, alpha, *f.hbar())
                .ok_or_else(|| Error::InvalidParameter("no closed form for this pair".into()))?;
            Jet::from_provider(f.n(), f.basepoint().to_vec(), *f.hbar(), r)
        }
        _ => Err(Error::InvalidParameter("no closed form for this pair".into())),
    }
}
