//! Truncated Bargmann-Fock space: vectors are anti-holomorphic polynomials
//! `psi = sum_R c_R zbar^R` with `|R| <= D`, operators are matrices of the
//! representation `pi(f) Psi_g = Psi_{f * g}` in the orthonormal basis
//! `e_R = zbar^R / sqrt((2 hbar)^{|R|} R!)`.
//!
//! Truncated spaces are not invariant under `pi(f)`. Every operator records
//! an interior margin `d`: columns with `|K| <= D - d` are complete, and
//! identities are only asserted there.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::multiindex::{enumerate, MultiIndex};
use crate::scalar::{RealScalar, Scalar};
use crate::wick::{adjoint_translation, generator_j, unitary_u, HeisenbergElement};

type C = Complex64;

/// Basis indices `|R| <= d` in the canonical (graded) order.
pub fn basis(n: usize, d: u32) -> Vec<MultiIndex> {
    enumerate(n, d)
}

fn positions(basis: &[MultiIndex]) -> HashMap<&MultiIndex, usize> {
    basis.iter().enumerate().map(|(k, r)| (r, k)).collect()
}

/// `sqrt((2 hbar)^{|R|} R!)`, the norm of the monomial `zbar^R`.
fn monomial_norm(r: &MultiIndex, hbar: f64) -> f64 {
    ((2.0 * hbar).powi(r.degree() as i32) * r.factorial_f64()).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockVector<T: Scalar> {
    n: usize,
    hbar: T::Real,
    d: u32,
    /// Monomial coefficients `c_R`, in [`basis`] order.
    coeffs: Vec<T>,
}

impl<T: Scalar> FockVector<T> {
    pub fn from_monomials(n: usize, hbar: T::Real, d: u32, coeffs: Vec<T>) -> Result<Self> {
        let len = basis(n, d).len();
        if coeffs.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: coeffs.len(),
            });
        }
        Ok(Self { n, hbar, d, coeffs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hbar(&self) -> &T::Real {
        &self.hbar
    }

    pub fn cutoff(&self) -> u32 {
        self.d
    }

    pub fn monomial_coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Orthonormal components `phi_R = sqrt((2 hbar)^{|R|} R!) c_R`.
    pub fn components(&self) -> Vec<C> {
        let h = self.hbar.to_f64();
        basis(self.n, self.d)
            .iter()
            .zip(&self.coeffs)
            .map(|(r, c)| c.to_c64() * monomial_norm(r, h))
            .collect()
    }

    pub fn norm_sqr(&self) -> T::Real {
        bf_inner(self, self).expect("same space").re()
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        if self.d != other.d || self.hbar != other.hbar {
            return Err(Error::CutoffMismatch);
        }
        Ok(())
    }
}

impl FockVector<C> {
    pub fn from_components(n: usize, hbar: f64, d: u32, components: &[C]) -> Result<Self> {
        let b = basis(n, d);
        if components.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: b.len(),
                found: components.len(),
            });
        }
        let coeffs = b.iter().zip(components).map(|(r, phi)| phi / monomial_norm(r, hbar)).collect();
        Ok(Self { n, hbar, d, coeffs })
    }

    /// The basis vector `e_R`.
    pub fn basis_vector(n: usize, hbar: f64, d: u32, r: &MultiIndex) -> Result<Self> {
        let b = basis(n, d);
        let k = b.iter().position(|x| x == r).ok_or(Error::CutoffMismatch)?;
        let mut coeffs = vec![C::new(0.0, 0.0); b.len()];
        coeffs[k] = C::new(1.0 / monomial_norm(r, hbar), 0.0);
        Ok(Self { n, hbar, d, coeffs })
    }

    pub fn vacuum(n: usize, hbar: f64, d: u32) -> Self {
        let mut coeffs = vec![C::new(0.0, 0.0); basis(n, d).len()];
        coeffs[0] = C::new(1.0, 0.0);
        Self { n, hbar, d, coeffs }
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().max(0.0).sqrt()
    }

    fn to_dvector(&self) -> DVector<C> {
        DVector::from_vec(self.components())
    }
}

/// `<phi, psi> = sum_R conj(c_R) d_R (2 hbar)^{|R|} R!`, exact in exact mode.
pub fn bf_inner<T: Scalar>(phi: &FockVector<T>, psi: &FockVector<T>) -> Result<T> {
    phi.same_space(psi)?;
    let two_hbar = T::from_real(phi.hbar.clone() + phi.hbar.clone());
    let mut acc = T::zero();
    for ((r, a), b) in basis(phi.n, phi.d).iter().zip(&phi.coeffs).zip(&psi.coeffs) {
        if a.is_zero() || b.is_zero() {
            continue;
        }
        let w = two_hbar.powu(r.degree()) * T::from_biguint(&r.factorial());
        acc = acc + a.conj() * b.clone() * w;
    }
    Ok(acc)
}

/// `Psi_f`: the anti-holomorphic part `c_J = a_{0,J}/J!` of a jet at 0.
pub fn psi_projection<T: Scalar>(f: &Jet<T>, d: u32) -> Result<FockVector<T>> {
    if f.basepoint().iter().any(|p| !p.is_zero()) {
        return Err(Error::NonzeroBasepoint);
    }
    let n = f.n();
    let zero = MultiIndex::zero(n);
    let coeffs = basis(n, d)
        .iter()
        .map(|j| Ok(f.coeff_or_err(&zero, j)?.div_biguint(&j.factorial())))
        .collect::<Result<Vec<T>>>()?;
    Ok(FockVector {
        n,
        hbar: f.hbar().clone(),
        d,
        coeffs,
    })
}

/// Matrix of `pi(f)` on the monomial basis `zbar^K` (no square roots, so
/// exact in exact mode). Column `K` holds the coefficients of `pi(f) zbar^K`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialOperator<T: Scalar> {
    pub n: usize,
    pub hbar: T::Real,
    pub d: u32,
    pub interior_margin: u32,
    dim: usize,
    entries: Vec<T>,
}

impl<T: Scalar> MonomialOperator<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.entries[row * self.dim + col]
    }

    /// Indices of the columns that are complete (`|K| <= D - margin`).
    pub fn interior_columns(&self) -> Vec<usize> {
        interior(self.n, self.d, self.interior_margin)
    }

    /// Matrix product; the margins add.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n || self.d != other.d || self.hbar != other.hbar {
            return Err(Error::CutoffMismatch);
        }
        let dim = self.dim;
        let mut entries = vec![T::zero(); dim * dim];
        for r in 0..dim {
            for k in 0..dim {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..dim {
                    let b = other.get(k, c);
                    if !b.is_zero() {
                        let slot = &mut entries[r * dim + c];
                        *slot = slot.clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        Ok(Self {
            n: self.n,
            hbar: self.hbar.clone(),
            d: self.d,
            interior_margin: (self.interior_margin + other.interior_margin).min(self.d + 1),
            dim,
            entries,
        })
    }

    /// Whether both operators agree on the columns interior to both.
    pub fn interior_eq(&self, other: &Self) -> bool {
        let cols = interior(self.n, self.d, self.interior_margin.max(other.interior_margin));
        (0..self.dim).all(|r| cols.iter().all(|&c| self.get(r, c) == other.get(r, c)))
    }

    pub fn apply(&self, v: &FockVector<T>) -> Result<FockVector<T>> {
        if v.n != self.n || v.d != self.d || v.hbar != self.hbar {
            return Err(Error::CutoffMismatch);
        }
        let coeffs = (0..self.dim)
            .map(|r| {
                (0..self.dim).fold(T::zero(), |acc, c| {
                    let (a, b) = (self.get(r, c), &v.coeffs[c]);
                    if a.is_zero() || b.is_zero() {
                        acc
                    } else {
                        acc + a.clone() * b.clone()
                    }
                })
            })
            .collect();
        Ok(FockVector { coeffs, ..v.clone() })
    }
}

fn interior(n: usize, d: u32, margin: u32) -> Vec<usize> {
    if margin > d {
        return Vec::new();
    }
    basis(n, d)
        .iter()
        .enumerate()
        .filter(|(_, r)| r.degree() + margin <= d)
        .map(|(k, _)| k)
        .collect()
}

/// `pi(f) zbar^K = sum_{N<=K} (2hbar)^{|N|} C(K,N) sum_J a_{N,J}/J! zbar^{J+K-N}`,
/// truncated to `|J+K-N| <= D`.
pub fn pi_monomial<T: Scalar>(f: &Jet<T>, d: u32) -> Result<MonomialOperator<T>> {
    if f.basepoint().iter().any(|p| !p.is_zero()) {
        return Err(Error::NonzeroBasepoint);
    }
    let n = f.n();
    let b = basis(n, d);
    let pos = positions(&b);
    let dim = b.len();
    let two_hbar = T::from_real(f.hbar().clone() + f.hbar().clone());
    let mut entries = vec![T::zero(); dim * dim];
    let mut add = |row: usize, col: usize, v: T| {
        let slot = &mut entries[row * dim + col];
        *slot = slot.clone() + v;
    };
    let margin = match f.polynomial_degrees() {
        Some((_, dzb)) => {
            for ((nn, j), a) in f.terms() {
                let scale = two_hbar.powu(nn.degree()) * a.div_biguint(&j.factorial());
                for (col, k) in b.iter().enumerate() {
                    let Some(rest) = k.checked_sub(nn) else { continue };
                    if let Some(&row) = pos.get(&j.add(&rest)) {
                        add(row, col, scale.clone() * T::from_biguint(&k.binomial(nn)));
                    }
                }
            }
            dzb.min(d + 1)
        }
        None => {
            let mut cache: HashMap<(usize, usize), T> = HashMap::new();
            for (col, k) in b.iter().enumerate() {
                for nn in k.lower_set() {
                    let rest = k.checked_sub(&nn).expect("lower set");
                    let weight = two_hbar.powu(nn.degree()) * T::from_biguint(&k.binomial(&nn));
                    let ni = pos[&nn];
                    for j in enumerate(n, d - rest.degree()) {
                        let ji = pos[&j];
                        let a = match cache.get(&(ni, ji)) {
                            Some(a) => a.clone(),
                            None => {
                                let a = f.coeff_or_err(&nn, &j)?.div_biguint(&j.factorial());
                                cache.insert((ni, ji), a.clone());
                                a
                            }
                        };
                        if !a.is_zero() {
                            add(pos[&j.add(&rest)], col, weight.clone() * a);
                        }
                    }
                }
            }
            // Placeholder; replaced by the measured margin below.
            d + 1
        }
    };
    let mut op = MonomialOperator {
        n,
        hbar: f.hbar().clone(),
        d,
        interior_margin: margin,
        dim,
        entries,
    };
    if !f.is_polynomial() {
        op.interior_margin = measured_margin(&orthonormal(&op));
    }
    Ok(op)
}

/// Boundary entries below this (relative to the column size) count as
/// negligible truncation. Products of two such columns lose only about the
/// square of it.
const BOUNDARY_TOL: f64 = 1e-9;

/// For operators that raise degree without bound: the smallest margin such
/// that every column with `|K| <= D - margin` has negligible entries in the
/// top two shells.
fn measured_margin(m: &FockOperator) -> u32 {
    let b = basis(m.n, m.d);
    let edge: Vec<usize> = (0..b.len()).filter(|&r| b[r].degree() + 1 >= m.d).collect();
    let mut good_up_to: Option<u32> = None;
    for deg in 0..=m.d {
        let ok = b.iter().enumerate().filter(|(_, k)| k.degree() == deg).all(|(c, _)| {
            let col = m.matrix.column(c);
            let scale = col.iter().map(|x| x.norm()).fold(1.0, f64::max);
            edge.iter().all(|&r| col[r].norm() <= BOUNDARY_TOL * scale)
        });
        if !ok {
            break;
        }
        good_up_to = Some(deg);
    }
    match good_up_to {
        Some(k) => m.d - k,
        None => m.d + 1,
    }
}

/// `M_{LK} = Mtilde_{LK} sqrt(w_L / w_K)` with `w_R = (2hbar)^{|R|} R!`.
fn orthonormal<T: Scalar>(m: &MonomialOperator<T>) -> FockOperator {
    let h = m.hbar.to_f64();
    let norms: Vec<f64> = basis(m.n, m.d).iter().map(|r| monomial_norm(r, h)).collect();
    let matrix = DMatrix::from_fn(m.dim, m.dim, |r, c| m.get(r, c).to_c64() * (norms[r] / norms[c]));
    FockOperator {
        n: m.n,
        hbar: h,
        d: m.d,
        interior_margin: m.interior_margin,
        matrix,
    }
}

/// A truncated operator in the orthonormal basis `e_R`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    pub n: usize,
    pub hbar: f64,
    pub d: u32,
    pub interior_margin: u32,
    pub matrix: DMatrix<C>,
}

impl FockOperator {
    pub fn identity(n: usize, hbar: f64, d: u32) -> Self {
        let dim = basis(n, d).len();
        Self {
            n,
            hbar,
            d,
            interior_margin: 0,
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn interior_columns(&self) -> Vec<usize> {
        interior(self.n, self.d, self.interior_margin)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.d != other.d || self.hbar != other.hbar {
            return Err(Error::CutoffMismatch);
        }
        Ok(())
    }

    fn with(&self, matrix: DMatrix<C>, interior_margin: u32) -> Self {
        Self {
            matrix,
            interior_margin: interior_margin.min(self.d + 1),
            ..self.clone()
        }
    }

    pub fn adjoint(&self) -> Self {
        self.with(self.matrix.adjoint(), self.interior_margin)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.with(&self.matrix * &other.matrix, self.interior_margin + other.interior_margin))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.with(&self.matrix + &other.matrix, self.interior_margin.max(other.interior_margin)))
    }

    pub fn scale(&self, s: C) -> Self {
        self.with(&self.matrix * s, self.interior_margin)
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let ab = self.mul(other)?;
        let ba = other.mul(self)?;
        ab.add(&ba.scale(C::new(-1.0, 0.0)))
    }

    pub fn apply(&self, v: &FockVector<C>) -> Result<FockVector<C>> {
        if v.n != self.n || v.d != self.d || v.hbar != self.hbar {
            return Err(Error::CutoffMismatch);
        }
        let out = &self.matrix * v.to_dvector();
        FockVector::from_components(self.n, self.hbar, self.d, out.as_slice())
    }

    /// Largest entry difference over rows and columns with degree at most
    /// `max_degree`.
    pub fn block_deviation(&self, other: &Self, max_degree: u32) -> Result<f64> {
        self.check(other)?;
        let idx = interior(self.n, self.d, self.d.saturating_sub(max_degree));
        let mut dev = 0.0f64;
        for &r in &idx {
            for &c in &idx {
                dev = dev.max((self.matrix[(r, c)] - other.matrix[(r, c)]).norm());
            }
        }
        Ok(dev)
    }

    /// Largest entry difference over all rows of the columns interior to
    /// both operators.
    pub fn interior_deviation(&self, other: &Self) -> Result<f64> {
        self.column_deviation(other, self.interior_margin.max(other.interior_margin))
    }

    /// Largest entry difference over all rows of the columns with
    /// `|K| <= D - margin`.
    pub fn column_deviation(&self, other: &Self, margin: u32) -> Result<f64> {
        self.check(other)?;
        let cols = interior(self.n, self.d, margin);
        let mut dev = 0.0f64;
        for &c in &cols {
            for r in 0..self.dim() {
                dev = dev.max((self.matrix[(r, c)] - other.matrix[(r, c)]).norm());
            }
        }
        Ok(dev)
    }
}

/// `<e_L, pi(f) e_K>` for `|L|, |K| <= D`.
pub fn pi_matrix<T: Scalar>(f: &Jet<T>, d: u32) -> Result<FockOperator> {
    Ok(orthonormal(&pi_monomial(f, d)?))
}

#[derive(Clone, Debug)]
pub struct Ladder {
    pub a: Vec<FockOperator>,
    pub a_dag: Vec<FockOperator>,
    pub q: Vec<FockOperator>,
    pub p: Vec<FockOperator>,
}

/// `a_i = pi(z^i)`, `a_i^dag = pi(zbar^i)`, `Q = (a + a^dag)/2`,
/// `P = (a - a^dag)/2i`.
pub fn ladder_ops(n: usize, hbar: f64, d: u32) -> Result<Ladder> {
    if d == 0 {
        return Err(Error::InvalidParameter("ladder operators need D >= 1".into()));
    }
    let origin = vec![C::new(0.0, 0.0); n];
    let coordinate = |k, anti| -> Result<FockOperator> { pi_matrix(&Jet::coordinate(n, origin.clone(), hbar, k, anti)?, d) };
    let a = (0..n).map(|k| coordinate(k, false)).collect::<Result<Vec<_>>>()?;
    let a_dag = (0..n).map(|k| coordinate(k, true)).collect::<Result<Vec<_>>>()?;
    let q = a
        .iter()
        .zip(&a_dag)
        .map(|(x, y)| Ok(x.add(y)?.scale(C::new(0.5, 0.0))))
        .collect::<Result<Vec<_>>>()?;
    let p = a
        .iter()
        .zip(&a_dag)
        .map(|(x, y)| Ok(x.add(&y.scale(C::new(-1.0, 0.0)))?.scale(C::new(0.0, -0.5))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ladder { a, a_dag, q, p })
}

fn check_hbar(hbar: f64) -> Result<()> {
    if hbar > 0.0 && hbar.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter("hbar must be positive".into()))
    }
}

/// `U_{(w,c)} = pi(u_{(w,c)})`.
pub fn unitary_u_matrix(g: &HeisenbergElement<C>, hbar: f64, d: u32) -> Result<FockOperator> {
    check_hbar(hbar)?;
    pi_matrix(&unitary_u(g, &hbar, vec![C::new(0.0, 0.0); g.n()])?, d)
}

/// `psi -> e^{-ic/2hbar + kappa |w|^2/hbar} e^{-w.zbar/2hbar} psi(zbar + conj(w))`,
/// the explicit form of `U_{(w,c)}` with the Gaussian exponent left free.
pub fn unitary_closed_form(g: &HeisenbergElement<C>, hbar: f64, d: u32, kappa: f64) -> Result<FockOperator> {
    check_hbar(hbar)?;
    let n = g.n();
    let b = basis(n, d);
    let pos = positions(&b);
    let dim = b.len();
    let w2: f64 = g.w.iter().map(|x| x.norm_sqr()).sum();
    let pref = C::new(kappa * w2 / hbar, -g.c / (2.0 * hbar)).exp();
    let shift: Vec<C> = g.w.iter().map(|x| x.conj()).collect();
    let gauss: Vec<C> = g.w.iter().map(|x| -x / (2.0 * hbar)).collect();
    let mut m = vec![C::new(0.0, 0.0); dim * dim];
    for (col, k) in b.iter().enumerate() {
        for i in k.lower_set() {
            let rest = k.checked_sub(&i).expect("lower set");
            let a = rest.monomial(&shift) * k.binomial_f64(&i);
            for j in enumerate(n, d - i.degree()) {
                let v = a * j.monomial(&gauss) / j.factorial_f64();
                m[pos[&i.add(&j)] * dim + col] += pref * v;
            }
        }
    }
    let op = MonomialOperator {
        n,
        hbar,
        d,
        interior_margin: d + 1,
        dim,
        entries: m,
    };
    let mut out = orthonormal(&op);
    out.interior_margin = measured_margin(&out);
    Ok(out)
}

/// Printed versus pipeline-derived Gaussian exponent `kappa` in a closed form
/// `e^{... + kappa |w|^2/hbar}`.
#[derive(Clone, Debug, Serialize)]
pub struct PrefactorReport {
    pub printed_exponent: f64,
    /// Read off the pipeline result; `None` when `w = 0`.
    pub pipeline_exponent: Option<f64>,
    pub printed_deviation: f64,
    pub pipeline_deviation: f64,
}

fn fitted_exponent(vacuum_amplitude: C, w: &[C], hbar: f64) -> Option<f64> {
    let w2: f64 = w.iter().map(|x| x.norm_sqr()).sum();
    (w2 > 0.0).then(|| hbar * vacuum_amplitude.norm().ln() / w2)
}

/// Compares `U_{(w,c)}` with its explicit form at the printed exponent
/// `-1/2` and at the exponent the pipeline actually produces.
pub fn unitary_prefactor_check(g: &HeisenbergElement<C>, hbar: f64, d: u32) -> Result<PrefactorReport> {
    const PRINTED: f64 = -0.5;
    let u = unitary_u_matrix(g, hbar, d)?;
    let fitted = fitted_exponent(u.matrix[(0, 0)], &g.w, hbar);
    let printed = unitary_closed_form(g, hbar, d, PRINTED)?;
    let pipeline = unitary_closed_form(g, hbar, d, fitted.unwrap_or(PRINTED))?;
    Ok(PrefactorReport {
        printed_exponent: PRINTED,
        pipeline_exponent: fitted,
        printed_deviation: u.interior_deviation(&printed)?,
        pipeline_deviation: u.interior_deviation(&pipeline)?,
    })
}

#[derive(Clone, Debug)]
pub struct CoherentState {
    pub vector: FockVector<C>,
    pub prefactor: PrefactorReport,
}

/// `psi_{(w,c)} = U_{(w,c)}^{-1} psi_1`, compared with the explicit
/// `e^{ic/2hbar + kappa |w|^2/hbar} e^{w.zbar/2hbar}` (printed `kappa = 1/4`).
pub fn coherent_vector(g: &HeisenbergElement<C>, hbar: f64, d: u32) -> Result<CoherentState> {
    const PRINTED: f64 = 0.25;
    let u_inv = unitary_u_matrix(&g.inverse(), hbar, d)?;
    let components: Vec<C> = u_inv.matrix.column(0).iter().copied().collect();
    let vector = FockVector::from_components(g.n(), hbar, d, &components)?;
    let fitted = fitted_exponent(components[0], &g.w, hbar);
    let closed = |kappa: f64| {
        let w2: f64 = g.w.iter().map(|x| x.norm_sqr()).sum();
        let pref = C::new(kappa * w2 / hbar, g.c / (2.0 * hbar)).exp();
        let profile: Vec<C> = g.w.iter().map(|x| x / (2.0 * hbar)).collect();
        basis(g.n(), d)
            .iter()
            .zip(&components)
            .map(|(j, phi)| {
                let c = pref * j.monomial(&profile) / j.factorial_f64();
                (c * monomial_norm(j, hbar) - phi).norm()
            })
            .fold(0.0, f64::max)
    };
    let prefactor = PrefactorReport {
        printed_exponent: PRINTED,
        pipeline_exponent: fitted,
        printed_deviation: closed(PRINTED),
        pipeline_deviation: closed(fitted.unwrap_or(PRINTED)),
    };
    Ok(CoherentState { vector, prefactor })
}

/// `<psi, pi(f) psi>`.
pub fn expectation(f: &Jet<C>, psi: &FockVector<C>) -> Result<C> {
    if f.hbar().to_f64() != psi.hbar {
        return Err(Error::CutoffMismatch);
    }
    let image = pi_matrix(f, psi.d)?.apply(psi)?;
    bf_inner(psi, &image)
}

#[derive(Clone, Debug, Serialize)]
pub struct CovarianceReport {
    /// Largest entry of `pi(u_w * f * u_{-w}) U_g - U_g pi(f)` on the block
    /// where both truncated products are exact.
    pub deviation: f64,
    /// The same with `c = 0`.
    pub deviation_translation_only: f64,
    pub row_degree: u32,
    pub column_degree: u32,
}

/// Series cut for the outer product in the adjoint translation.
const ADJOINT_CUT: u32 = 60;

/// Covariance `pi(u_w * f * u_{-w}) = U_g pi(f) U_g^{-1}`, checked in the
/// intertwined form `pi(f_w) U_g = U_g pi(f)`. For a polynomial `f` both
/// truncated products are exact on rows `|L| <= D - deg_z f` and columns
/// `|K| <= D - deg_zbar f`, whatever the tails of `U_g`; the conjugated form
/// would instead stack three truncation margins.
pub fn covariance_check(f: &Jet<C>, g: &HeisenbergElement<C>, d: u32) -> Result<CovarianceReport> {
    let Some((dz, dzb)) = f.polynomial_degrees() else {
        return Err(Error::InvalidParameter("covariance check needs a polynomial".into()));
    };
    let hbar = f.hbar().to_f64();
    let degree = dz + dzb;
    let moved = adjoint_translation(f, &g.w, degree, ADJOINT_CUT)?;
    // Translation preserves the degree; the truncated table is the whole
    // polynomial.
    let moved = Jet::from_table(
        f.n(),
        f.basepoint().to_vec(),
        hbar,
        degree,
        true,
        moved.value.terms().map(|(k, v)| (k.clone(), *v)),
    )?;
    let (row_degree, column_degree) = (d.saturating_sub(dz), d.saturating_sub(dzb));
    let p_moved = pi_matrix(&moved, d)?;
    let pf = pi_matrix(f, d)?;
    let deviation = |g: &HeisenbergElement<C>| -> Result<f64> {
        let u = unitary_u_matrix(g, hbar, d)?;
        let lhs = p_moved.mul(&u)?;
        let rhs = u.mul(&pf)?;
        let b = basis(f.n(), d);
        let mut dev = 0.0f64;
        for (c, _) in b.iter().enumerate().filter(|(_, k)| k.degree() <= column_degree) {
            for (r, _) in b.iter().enumerate().filter(|(_, l)| l.degree() <= row_degree) {
                dev = dev.max((lhs.matrix[(r, c)] - rhs.matrix[(r, c)]).norm());
            }
        }
        Ok(dev)
    };
    Ok(CovarianceReport {
        deviation: deviation(g)?,
        deviation_translation_only: deviation(&HeisenbergElement::new(g.w.clone(), 0.0)?)?,
        row_degree,
        column_degree,
    })
}

/// Errors `|| sum_{r<k} pi(J_g)^r e_0 / r! - U_g e_0 ||` for `k = 1..=terms`.
///
/// With `g = (-ip, 0)` this is the series for `exp(i p.Q/hbar)`, with
/// `g = (q, 0)` the one for `exp(i q.P/hbar)`.
pub fn exp_series_errors(g: &HeisenbergElement<C>, hbar: f64, d: u32, terms: u32) -> Result<Vec<f64>> {
    check_hbar(hbar)?;
    let n = g.n();
    let x = pi_matrix(&generator_j(g, &hbar, vec![C::new(0.0, 0.0); n])?, d)?;
    let target = unitary_u_matrix(g, hbar, d)?.matrix.column(0).into_owned();
    let mut power = FockVector::vacuum(n, hbar, d).to_dvector();
    let mut sum = DVector::zeros(power.len());
    let mut errors = Vec::with_capacity(terms as usize);
    for r in 0..terms {
        if r > 0 {
            power = (&x.matrix * &power) / C::new(r as f64, 0.0);
        }
        sum += &power;
        errors.push((&sum - &target).norm());
    }
    Ok(errors)
}

/// `w` with `U_{(w,0)} = exp(i p.Q/hbar)`.
pub fn position_translation(p: &[f64]) -> Result<HeisenbergElement<C>> {
    HeisenbergElement::new(p.iter().map(|&x| C::new(0.0, -x)).collect(), 0.0)
}

/// `w` with `U_{(w,0)} = exp(i q.P/hbar)`.
pub fn momentum_translation(q: &[f64]) -> Result<HeisenbergElement<C>> {
    HeisenbergElement::new(q.iter().map(|&x| C::new(x, 0.0)).collect(), 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{complex_ratio, ExactComplex};
    use crate::wick::wick_star;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    fn poly(n: usize, hbar: f64, terms: &[(&[u32], &[u32], C)]) -> Jet<C> {
        Jet::from_monomials(
            n,
            vec![c(0.0, 0.0); n],
            hbar,
            terms.iter().map(|(i, j, v)| (mi(i), mi(j), *v)),
        )
        .unwrap()
    }

    #[test]
    fn projection_examples() {
        let one = poly(1, 0.5, &[(&[0], &[0], c(1.0, 0.0))]);
        let v = psi_projection(&one, 5).unwrap();
        assert_eq!(v.components()[0], c(1.0, 0.0));
        assert!(v.components()[1..].iter().all(|x| x.norm() == 0.0));

        let z = poly(1, 0.5, &[(&[1], &[0], c(1.0, 0.0))]);
        assert!(psi_projection(&z, 5).unwrap().components().iter().all(|x| x.norm() == 0.0));

        let zbar = poly(1, 0.5, &[(&[0], &[1], c(1.0, 0.0))]);
        assert!((psi_projection(&zbar, 5).unwrap().components()[1] - 1.0).norm() < 1e-15);

        let moved = Jet::from_monomials(1, vec![c(1.0, 0.0)], 0.5, [(mi(&[0]), mi(&[0]), c(1.0, 0.0))]).unwrap();
        assert_eq!(psi_projection(&moved, 3), Err(Error::NonzeroBasepoint));
    }

    #[test]
    fn basis_is_orthonormal() {
        let b = basis(2, 3);
        for r in &b {
            for s in &b {
                let er = FockVector::basis_vector(2, 0.5, 3, r).unwrap();
                let es = FockVector::basis_vector(2, 0.5, 3, s).unwrap();
                let ip = bf_inner(&er, &es).unwrap();
                let expected = if r == s { 1.0 } else { 0.0 };
                assert!((ip - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn inner_product_rejects_mismatched_cutoffs() {
        let a = FockVector::vacuum(1, 0.5, 3);
        let b = FockVector::vacuum(1, 0.5, 4);
        assert_eq!(bf_inner(&a, &b), Err(Error::CutoffMismatch));
    }

    #[test]
    fn gns_isometry_is_exact() {
        type Q = ExactComplex;
        let hbar = num_rational::BigRational::from_ratio(1, 3);
        let zero = vec![Q::zero(); 2];
        let f = Jet::<Q>::from_monomials(
            2,
            zero.clone(),
            hbar.clone(),
            [
                (mi(&[0, 0]), mi(&[1, 0]), complex_ratio(2, -1, 3)),
                (mi(&[1, 0]), mi(&[0, 2]), complex_ratio(1, 1, 1)),
                (mi(&[0, 0]), mi(&[0, 0]), complex_ratio(-1, 0, 2)),
            ],
        )
        .unwrap();
        let g = Jet::<Q>::from_monomials(
            2,
            zero,
            hbar.clone(),
            [
                (mi(&[0, 0]), mi(&[1, 1]), complex_ratio(3, 0, 1)),
                (mi(&[0, 1]), mi(&[0, 0]), complex_ratio(0, 5, 7)),
                (mi(&[0, 0]), mi(&[1, 0]), complex_ratio(1, 0, 1)),
            ],
        )
        .unwrap();
        let lhs = bf_inner(&psi_projection(&f, 4).unwrap(), &psi_projection(&g, 4).unwrap()).unwrap();
        let alpha = Q::from_real(hbar);
        let rhs = wick_star(&f.conjugate(), &g, &alpha, None, None).unwrap().value.delta();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn annihilator_lowers() {
        let ladder = ladder_ops(1, 0.5, 6).unwrap();
        // <e_0, a e_1> = sqrt(2 hbar) = 1 at hbar = 1/2.
        assert!((ladder.a[0].matrix[(0, 1)] - 1.0).norm() < 1e-15);
        let one = poly(1, 0.5, &[(&[0], &[0], c(1.0, 0.0))]);
        let id = pi_matrix(&one, 6).unwrap();
        assert_eq!(id.matrix, DMatrix::identity(7, 7));
        let r = 4;
        assert!((ladder.a[0].matrix[(r - 1, r)] - (r as f64).sqrt()).norm() < 1e-14);
    }

    #[test]
    fn canonical_commutation_on_the_interior() {
        let hbar = 0.7;
        let ladder = ladder_ops(2, hbar, 5).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let comm = ladder.a[i].commutator(&ladder.a_dag[j]).unwrap();
                let expected = if i == j { 2.0 * hbar } else { 0.0 };
                let id = FockOperator::identity(2, hbar, 5).scale(c(expected, 0.0));
                assert!(comm.interior_deviation(&id).unwrap() < 1e-13);
            }
        }
        for k in 0..2 {
            let q = &ladder.q[k];
            assert!(q.block_deviation(&q.adjoint(), 4).unwrap() < 1e-15);
            let p = &ladder.p[k];
            assert!(p.block_deviation(&p.adjoint(), 4).unwrap() < 1e-15);
        }
    }

    #[test]
    fn representation_property_is_exact() {
        type Q = ExactComplex;
        let hbar = num_rational::BigRational::from_ratio(1, 2);
        let zero = vec![Q::zero(); 1];
        let f = Jet::<Q>::from_monomials(
            1,
            zero.clone(),
            hbar.clone(),
            [
                (mi(&[1]), mi(&[1]), complex_ratio(1, 2, 3)),
                (mi(&[2]), mi(&[0]), complex_ratio(-1, 0, 1)),
                (mi(&[0]), mi(&[1]), complex_ratio(0, 1, 1)),
            ],
        )
        .unwrap();
        let g = Jet::<Q>::from_monomials(
            1,
            zero,
            hbar.clone(),
            [(mi(&[0]), mi(&[2]), complex_ratio(2, 0, 1)), (mi(&[1]), mi(&[0]), complex_ratio(1, -1, 5))],
        )
        .unwrap();
        let fg = wick_star(&f, &g, &Q::from_real(hbar), None, None).unwrap().value;
        let d = 8;
        let lhs = pi_monomial(&fg, d).unwrap();
        let rhs = pi_monomial(&f, d).unwrap().mul(&pi_monomial(&g, d).unwrap()).unwrap();
        assert!(!rhs.interior_columns().is_empty());
        assert!(lhs.interior_eq(&rhs));
        // pi(f) Psi_g = Psi_{f*g}.
        let image = pi_monomial(&f, d).unwrap().apply(&psi_projection(&g, d).unwrap()).unwrap();
        let direct = psi_projection(&fg, d).unwrap();
        let head = basis(1, d).iter().filter(|r| r.degree() <= d - 1).count();
        assert_eq!(image.monomial_coeffs()[..head], direct.monomial_coeffs()[..head]);
    }

    #[test]
    fn number_operator_diagonal() {
        let nop = poly(1, 0.5, &[(&[1], &[1], c(1.0, 0.0))]);
        let m = pi_matrix(&nop, 6).unwrap();
        for r in 0..6 {
            assert!((m.matrix[(r, r)] - r as f64).norm() < 1e-14);
        }
    }

    #[test]
    fn conjugation_is_the_adjoint() {
        let f = poly(1, 0.5, &[(&[1], &[2], c(1.0, -2.0)), (&[0], &[1], c(0.5, 0.0)), (&[2], &[0], c(0.0, 3.0))]);
        let pf = pi_matrix(&f, 10).unwrap();
        let pfbar = pi_matrix(&f.conjugate(), 10).unwrap();
        let block = 10 - 2 * 2;
        assert!(pfbar.block_deviation(&pf.adjoint(), block).unwrap() < 1e-12);
    }

    #[test]
    fn central_unitaries_are_phases() {
        let g = HeisenbergElement::new(vec![c(0.0, 0.0)], 0.8).unwrap();
        let u = unitary_u_matrix(&g, 0.5, 6).unwrap();
        let expected = FockOperator::identity(1, 0.5, 6).scale(c(0.0, -0.8).exp());
        assert!(u.interior_deviation(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn unitaries_are_unitary_and_multiply() {
        let hbar = 0.5;
        let d = 30;
        let g1 = HeisenbergElement::new(vec![c(0.6, -0.3)], 0.4).unwrap();
        let g2 = HeisenbergElement::new(vec![c(-0.2, 0.5)], -1.1).unwrap();
        let u1 = unitary_u_matrix(&g1, hbar, d).unwrap();
        let u2 = unitary_u_matrix(&g2, hbar, d).unwrap();
        // Columns with |K| <= D - margin have negligible mass beyond D, so
        // products are accurate on them even though the margins add.
        let margin = u1.interior_margin.max(u2.interior_margin);
        assert!(margin < d, "margin {margin}");
        let gram = u1.adjoint().mul(&u1).unwrap();
        let id = FockOperator::identity(1, hbar, d);
        assert!(gram.column_deviation(&id, margin).unwrap() < 1e-8);
        let u12 = unitary_u_matrix(&g1.mul(&g2).unwrap(), hbar, d).unwrap();
        let prod = u1.mul(&u2).unwrap();
        assert!(prod.column_deviation(&u12, margin).unwrap() < 1e-8);
    }

    #[test]
    fn unitary_matches_star_exponential_of_generator() {
        let hbar = 0.5;
        let d = 25;
        let g = HeisenbergElement::new(vec![c(0.8, 0.4)], 0.3).unwrap();
        let t = 0.3;
        let x = pi_matrix(&generator_j(&g, &hbar, vec![c(0.0, 0.0)]).unwrap(), d).unwrap();
        let mut term = FockOperator::identity(1, hbar, d);
        let mut sum = term.clone();
        for k in 1..30 {
            term = term.mul(&x).unwrap().scale(c(t / k as f64, 0.0));
            sum = sum.add(&term).unwrap();
        }
        let u = unitary_u_matrix(&g.scaled(&t), hbar, d).unwrap();
        assert!(sum.block_deviation(&u, 10).unwrap() < 1e-8);
    }

    #[test]
    fn printed_unitary_prefactor_is_off() {
        let g = HeisenbergElement::new(vec![c(0.7, -0.2)], 0.5).unwrap();
        let report = unitary_prefactor_check(&g, 0.5, 25).unwrap();
        assert!((report.pipeline_exponent.unwrap() + 0.25).abs() < 1e-12);
        assert!(report.pipeline_deviation < 1e-12);
        assert!(report.printed_deviation > 1e-2);
    }

    #[test]
    fn coherent_states() {
        let hbar = 0.5;
        let vac = coherent_vector(&HeisenbergElement::identity(1), hbar, 10).unwrap();
        assert_eq!(vac.vector.components()[0], c(1.0, 0.0));
        assert_eq!(vac.prefactor.pipeline_exponent, None);

        let g = HeisenbergElement::new(vec![c(0.4, 0.5)], 0.2).unwrap();
        let state = coherent_vector(&g, hbar, 25).unwrap();
        assert!((state.vector.norm() - 1.0).abs() < 1e-8);
        assert!((state.prefactor.pipeline_exponent.unwrap() + 0.25).abs() < 1e-12);
        assert!(state.prefactor.pipeline_deviation < 1e-12);
        assert!(state.prefactor.printed_deviation > 1e-2);
        // Monomial profile (w/2hbar)^J / J!.
        let cs = state.vector.monomial_coeffs();
        let ratio = cs[3] / cs[2];
        assert!((ratio - g.w[0] / (2.0 * hbar) / 3.0).norm() < 1e-12);
    }

    #[test]
    fn coherent_expectations_evaluate() {
        let hbar = 0.5;
        let w = c(0.6, -0.7);
        let state = coherent_vector(&HeisenbergElement::new(vec![w], 0.9).unwrap(), hbar, 30).unwrap();
        let zzbar = poly(1, hbar, &[(&[1], &[1], c(1.0, 0.0))]);
        let e = expectation(&zzbar, &state.vector).unwrap();
        assert!((e - w.norm_sqr()).norm() < 1e-6);
        let vac = FockVector::vacuum(1, hbar, 12);
        for k in 1..4u32 {
            let f = poly(1, hbar, &[(&[k], &[k], c(1.0, 0.0))]);
            assert!(expectation(&f, &vac).unwrap().norm() < 1e-15);
        }
        let one = poly(1, hbar, &[(&[0], &[0], c(1.0, 0.0))]);
        assert!((expectation(&one, &state.vector).unwrap() - state.vector.norm_sqr()).norm() < 1e-15);
    }

    #[test]
    fn covariance() {
        let z = poly(1, 0.5, &[(&[1], &[0], c(1.0, 0.0))]);
        let g = HeisenbergElement::new(vec![c(1.0, 0.0)], 0.0).unwrap();
        let report = covariance_check(&z, &g, 25).unwrap();
        assert!(report.deviation < 1e-8, "{report:?}");
        assert_eq!((report.row_degree, report.column_degree), (24, 25));

        let central = HeisenbergElement::new(vec![c(0.0, 0.0)], 1.3).unwrap();
        let report = covariance_check(&z, &central, 25).unwrap();
        assert_eq!(report.deviation, 0.0);

        let zzbar = poly(1, 0.5, &[(&[1], &[1], c(1.0, 0.0))]);
        let g = HeisenbergElement::new(vec![c(0.5, -0.6)], 0.7).unwrap();
        let report = covariance_check(&zzbar, &g, 25).unwrap();
        assert!(report.deviation < 1e-6, "{report:?}");
        assert!(report.deviation_translation_only < 1e-6);
    }

    #[test]
    fn position_and_momentum_exponentials_converge() {
        let hbar = 0.5;
        let d = 30;
        let ladder = ladder_ops(1, hbar, d).unwrap();
        let g = position_translation(&[0.7]).unwrap();
        let x = pi_matrix(&generator_j(&g, &hbar, vec![c(0.0, 0.0)]).unwrap(), d).unwrap();
        let ipq = ladder.q[0].scale(c(0.0, 0.7 / hbar));
        assert!(x.interior_deviation(&ipq).unwrap() < 1e-14);
        let h = momentum_translation(&[-0.4]).unwrap();
        let y = pi_matrix(&generator_j(&h, &hbar, vec![c(0.0, 0.0)]).unwrap(), d).unwrap();
        let iqp = ladder.p[0].scale(c(0.0, -0.4 / hbar));
        assert!(y.interior_deviation(&iqp).unwrap() < 1e-14);

        for g in [g, h] {
            let errors = exp_series_errors(&g, hbar, d, 25).unwrap();
            assert!(errors.windows(2).skip(3).all(|w| w[1] <= w[0]));
            assert!(*errors.last().unwrap() < 1e-12);
        }
    }

    #[test]
    fn nonzero_polynomials_act_nontrivially() {
        let f = poly(2, 0.5, &[(&[2, 1], &[0, 1], c(0.0, 1.0))]);
        let m = pi_matrix(&f, 8).unwrap();
        assert!(m.matrix.iter().any(|x| x.norm() > 0.0));
    }
}
