//! Taylor jets at a base point, stored as derivative values
//! `a_{I,J} = d^{|I|+|J|} f / dz^I dzbar^J (p)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::multiindex::{enumerate, enumerate_degree, factorial_f64, MultiIndex};
use crate::scalar::{RealScalar, Scalar};
use crate::series::{Status, Tracked};

/// `(I, J)`: holomorphic and anti-holomorphic derivative orders.
pub type Key = (MultiIndex, MultiIndex);

/// Closed-form coefficient rules. Parameters are always double precision;
/// exact-mode jets convert each coefficient on the way out.
#[derive(Clone)]
pub enum Provider {
    /// Monomial coefficients of a polynomial in `z - p`, `zbar - pbar`.
    Polynomial(BTreeMap<Key, Complex64>),
    /// `prefactor * e^{hbar abar.beta} e^{abar.z + beta.zbar}`.
    Exponential {
        prefactor: Complex64,
        abar: Vec<Complex64>,
        beta: Vec<Complex64>,
    },
    /// `f(z) = sum_r a_r z^r` in one variable around 0.
    PowerSeries1d(SeriesRule),
    /// Coefficients with `|I| <= n` and `|J| <= m` removed.
    TaylorRemainder {
        inner: Box<Provider>,
        n: u32,
        m: u32,
    },
    Derivative {
        inner: Box<Provider>,
        i: MultiIndex,
        j: MultiIndex,
    },
    Conjugate(Box<Provider>),
    /// Pull-back along `z -> sqrt(alpha) z`; the inner rule is read at
    /// `alpha * hbar`.
    Rescaled {
        inner: Box<Provider>,
        sqrt_alpha: f64,
    },
    Combination(Vec<(Complex64, Provider)>),
    Custom(CustomRule),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SeriesRule {
    /// `a_r = (r!)^{-1/4}`: entire, but outside the algebra for every hbar > 0.
    QuarticRootFactorial,
    /// `a_r = 1/r!`, i.e. `e^z`.
    InverseFactorial,
    /// Explicit finitely many coefficients.
    Coefficients(Vec<Complex64>),
}

impl SeriesRule {
    /// `ln |r! a_r|` (for the quartic-root rule, without overflow).
    pub fn ln_abs_derivative(&self, r: u32) -> f64 {
        match self {
            SeriesRule::QuarticRootFactorial => 0.75 * crate::scalar::ln_factorial(r),
            SeriesRule::InverseFactorial => 0.0,
            SeriesRule::Coefficients(c) => match c.get(r as usize) {
                Some(a) if a.norm() > 0.0 => crate::scalar::ln_factorial(r) + a.norm().ln(),
                _ => f64::NEG_INFINITY,
            },
        }
    }

    /// The derivative value `r! a_r`.
    pub fn derivative(&self, r: u32) -> Complex64 {
        match self {
            SeriesRule::QuarticRootFactorial => Complex64::new(self.ln_abs_derivative(r).exp(), 0.0),
            SeriesRule::InverseFactorial => Complex64::new(1.0, 0.0),
            SeriesRule::Coefficients(c) => c
                .get(r as usize)
                .map_or(Complex64::new(0.0, 0.0), |a| a * factorial_f64(r)),
        }
    }
}

type Rule = dyn Fn(&MultiIndex, &MultiIndex) -> Complex64 + Send + Sync;

/// User-supplied coefficient rule `(I, J) -> a_{I,J}`.
#[derive(Clone)]
pub struct CustomRule {
    pub name: String,
    pub rule: Arc<Rule>,
}

impl fmt::Debug for Provider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provider::Polynomial(t) => write!(f, "Polynomial({} terms)", t.len()),
            Provider::Exponential {
                prefactor,
                abar,
                beta,
            } => write!(f, "Exponential({prefactor}, {abar:?}, {beta:?})"),
            Provider::PowerSeries1d(r) => write!(f, "PowerSeries1d({r:?})"),
            Provider::TaylorRemainder { inner, n, m } => {
                write!(f, "TaylorRemainder({inner:?}, {n}, {m})")
            }
            Provider::Derivative { inner, i, j } => write!(f, "Derivative({inner:?}, {i:?}, {j:?})"),
            Provider::Conjugate(inner) => write!(f, "Conjugate({inner:?})"),
            Provider::Rescaled { inner, sqrt_alpha } => write!(f, "Rescaled({inner:?}, {sqrt_alpha})"),
            Provider::Combination(parts) => write!(f, "Combination({} parts)", parts.len()),
            Provider::Custom(c) => write!(f, "Custom({})", c.name),
        }
    }
}

fn cpow(base: &[Complex64], k: &MultiIndex) -> Complex64 {
    base.iter()
        .zip(k.entries())
        .fold(Complex64::new(1.0, 0.0), |acc, (b, &e)| acc * b.powu(e))
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Provider {
    pub fn exponential(abar: Vec<Complex64>, beta: Vec<Complex64>) -> Self {
        Provider::Exponential {
            prefactor: Complex64::new(1.0, 0.0),
            abar,
            beta,
        }
    }

    /// `a_{I,J}` at base point `p` for the given hbar.
    pub fn coeff(&self, i: &MultiIndex, j: &MultiIndex, p: &[Complex64], hbar: f64) -> Complex64 {
        let zero = Complex64::new(0.0, 0.0);
        match self {
            Provider::Polynomial(terms) => {
                // d^I d^J of a polynomial centred at p, evaluated at p.
                match terms.get(&(i.clone(), j.clone())) {
                    Some(c) => c * i.factorial_f64() * j.factorial_f64(),
                    None => zero,
                }
            }
            Provider::Exponential {
                prefactor,
                abar,
                beta,
            } => {
                let pbar: Vec<Complex64> = p.iter().map(|z| z.conj()).collect();
                let expo = hbar * dot(abar, beta) + dot(abar, p) + dot(beta, &pbar);
                prefactor * expo.exp() * cpow(abar, i) * cpow(beta, j)
            }
            Provider::PowerSeries1d(rule) => {
                if j.is_zero() {
                    rule.derivative(i.entries()[0])
                } else {
                    zero
                }
            }
            Provider::TaylorRemainder { inner, n, m } => {
                if i.degree() > *n || j.degree() > *m {
                    inner.coeff(i, j, p, hbar)
                } else {
                    zero
                }
            }
            Provider::Derivative { inner, i: di, j: dj } => inner.coeff(&i.add(di), &j.add(dj), p, hbar),
            Provider::Conjugate(inner) => inner.coeff(j, i, p, hbar).conj(),
            Provider::Rescaled { inner, sqrt_alpha } => {
                let alpha = sqrt_alpha * sqrt_alpha;
                inner.coeff(i, j, p, alpha * hbar) * sqrt_alpha.powi((i.degree() + j.degree()) as i32)
            }
            Provider::Combination(parts) => parts
                .iter()
                .map(|(c, q)| c * q.coeff(i, j, p, hbar))
                .sum(),
            Provider::Custom(c) => (c.rule)(i, j),
        }
    }

    /// Total degree bound in the holomorphic and anti-holomorphic slots,
    /// when the rule is a polynomial.
    fn polynomial_degrees(&self) -> Option<(u32, u32)> {
        match self {
            Provider::Polynomial(t) => Some(t.keys().fold((0, 0), |(a, b), (i, j)| {
                (a.max(i.degree()), b.max(j.degree()))
            })),
            Provider::PowerSeries1d(SeriesRule::Coefficients(c)) => {
                Some((c.len().saturating_sub(1) as u32, 0))
            }
            _ => None,
        }
    }
}

/// Sparse table of derivative values, complete (beyond `degree` everything
/// vanishes: a polynomial) or truncated (beyond `degree` is unknown).
#[derive(Clone, Debug, PartialEq)]
pub struct Table<T> {
    pub degree: u32,
    pub complete: bool,
    pub coeffs: BTreeMap<Key, T>,
}

#[derive(Clone, Debug)]
pub enum Body<T> {
    Table(Table<T>),
    Provider(Provider),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TranslationMode {
    /// `tau_a f = sum_K a^K/K! d_z^K f`.
    Holomorphic,
    /// `taubar_a f = sum_K a^K/K! d_zbar^K f`.
    Antiholomorphic,
}

/// Result of evaluating a truncated Taylor polynomial.
#[derive(Clone, Debug)]
pub struct Evaluation<T> {
    pub value: T,
    pub status: Status,
    /// Modulus of the outermost retained shell.
    pub last_increment: f64,
}

#[derive(Clone, Debug)]
pub struct Jet<T: Scalar> {
    n: usize,
    p: Vec<T>,
    hbar: T::Real,
    body: Body<T>,
}

impl<T: Scalar> Jet<T> {
    fn check_header(n: usize, p: &[T], hbar: &T::Real) -> Result<()> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.len(),
            });
        }
        if !hbar.is_positive() && *hbar != T::Real::zero() {
            return Err(Error::InvalidParameter("hbar must be non-negative".into()));
        }
        Ok(())
    }

    /// A jet from derivative values, dropping explicit zeros.
    pub fn from_table(
        n: usize,
        p: Vec<T>,
        hbar: T::Real,
        degree: u32,
        complete: bool,
        coeffs: impl IntoIterator<Item = (Key, T)>,
    ) -> Result<Self> {
        Self::check_header(n, &p, &hbar)?;
        let mut map = BTreeMap::new();
        for ((i, j), v) in coeffs {
            if i.dim() != n || j.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: i.dim().max(j.dim()),
                });
            }
            if i.degree() + j.degree() > degree {
                if complete && !v.is_zero() {
                    return Err(Error::InvalidParameter(format!(
                        "coefficient {i:?},{j:?} beyond declared degree {degree}"
                    )));
                }
                continue;
            }
            if !v.is_zero() {
                map.insert((i, j), v);
            }
        }
        Ok(Self {
            n,
            p,
            hbar,
            body: Body::Table(Table {
                degree,
                complete,
                coeffs: map,
            }),
        })
    }

    /// A polynomial from monomial coefficients of `(z-p)^I (zbar-pbar)^J`.
    pub fn from_monomials(
        n: usize,
        p: Vec<T>,
        hbar: T::Real,
        terms: impl IntoIterator<Item = (MultiIndex, MultiIndex, T)>,
    ) -> Result<Self> {
        let mut acc: BTreeMap<Key, T> = BTreeMap::new();
        for (i, j, c) in terms {
            let entry = acc.entry((i, j)).or_insert_with(T::zero);
            *entry = entry.clone() + c;
        }
        Self::from_monomial_map(n, p, hbar, acc)
    }

    fn from_monomial_map(n: usize, p: Vec<T>, hbar: T::Real, terms: BTreeMap<Key, T>) -> Result<Self> {
        let degree = terms
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((i, j), _)| i.degree() + j.degree())
            .max()
            .unwrap_or(0);
        let coeffs: Vec<(Key, T)> = terms
            .into_iter()
            .map(|((i, j), c)| {
                let scale = i.factorial() * j.factorial();
                let v = c * T::from_biguint(&scale);
                ((i, j), v)
            })
            .collect();
        Self::from_table(n, p, hbar, degree, true, coeffs)
    }

    pub fn from_provider(n: usize, p: Vec<T>, hbar: T::Real, provider: Provider) -> Result<Self> {
        Self::check_header(n, &p, &hbar)?;
        match &provider {
            Provider::Exponential { abar, beta, .. } if abar.len() != n || beta.len() != n => {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: abar.len().min(beta.len()),
                })
            }
            Provider::PowerSeries1d(_) => {
                if n != 1 {
                    return Err(Error::DimensionMismatch { expected: 1, found: n });
                }
                if !p[0].is_zero() {
                    return Err(Error::NonzeroBasepoint);
                }
            }
            _ => {}
        }
        Ok(Self {
            n,
            p,
            hbar,
            body: Body::Provider(provider),
        })
    }

    pub fn constant(n: usize, p: Vec<T>, hbar: T::Real, value: T) -> Result<Self> {
        let zero = MultiIndex::zero(n);
        Self::from_table(n, p, hbar, 0, true, [((zero.clone(), zero), value)])
    }

    pub fn zero(n: usize, p: Vec<T>, hbar: T::Real) -> Result<Self> {
        Self::from_table(n, p, hbar, 0, true, [])
    }

    /// The coordinate function `z_k` (or `zbar_k`), centred at `p`
    /// (so its value at `p` is `p_k`, resp. `conj(p_k)`).
    pub fn coordinate(n: usize, p: Vec<T>, hbar: T::Real, k: usize, antiholomorphic: bool) -> Result<Self> {
        Self::check_header(n, &p, &hbar)?;
        if k >= n {
            return Err(Error::InvalidParameter(format!("coordinate {k} out of range for n = {n}")));
        }
        let zero = MultiIndex::zero(n);
        let unit = MultiIndex::unit(n, k);
        let value = if antiholomorphic { p[k].conj() } else { p[k].clone() };
        let lin = if antiholomorphic {
            (zero.clone(), unit)
        } else {
            (unit, zero.clone())
        };
        Self::from_table(n, p, hbar, 1, true, [(lin, T::one()), ((zero.clone(), zero), value)])
    }

    /// `e_{abar,beta}` with `e^{hbar abar.beta}` normalisation.
    pub fn exponential(n: usize, p: Vec<T>, hbar: T::Real, abar: Vec<Complex64>, beta: Vec<Complex64>) -> Result<Self> {
        Self::from_provider(n, p, hbar, Provider::exponential(abar, beta))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basepoint(&self) -> &[T] {
        &self.p
    }

    pub fn basepoint_c64(&self) -> Vec<Complex64> {
        self.p.iter().map(Scalar::to_c64).collect()
    }

    pub fn hbar(&self) -> &T::Real {
        &self.hbar
    }

    pub fn body(&self) -> &Body<T> {
        &self.body
    }

    pub fn provider(&self) -> Option<&Provider> {
        match &self.body {
            Body::Provider(p) => Some(p),
            Body::Table(_) => None,
        }
    }

    pub fn table(&self) -> Option<&Table<T>> {
        match &self.body {
            Body::Table(t) => Some(t),
            Body::Provider(_) => None,
        }
    }

    pub fn with_hbar(&self, hbar: T::Real) -> Self {
        Self {
            hbar,
            ..self.clone()
        }
    }

    /// True when every coefficient outside a finite set vanishes.
    pub fn is_polynomial(&self) -> bool {
        self.polynomial_degrees().is_some()
    }

    /// `(deg_z, deg_zbar)` for polynomials: the largest `|I|` and `|J|`
    /// among nonzero coefficients.
    pub fn polynomial_degrees(&self) -> Option<(u32, u32)> {
        match &self.body {
            Body::Table(t) if t.complete => Some(t.coeffs.keys().fold((0, 0), |(a, b), (i, j)| {
                (a.max(i.degree()), b.max(j.degree()))
            })),
            Body::Table(_) => None,
            Body::Provider(p) => p.polynomial_degrees(),
        }
    }

    /// Largest total degree with known coefficients (`None`: unbounded).
    pub fn available_degree(&self) -> Option<u32> {
        match &self.body {
            Body::Table(t) if !t.complete => Some(t.degree),
            _ => None,
        }
    }

    /// `a_{I,J}`, or `None` beyond the degree of a truncated table.
    pub fn coeff(&self, i: &MultiIndex, j: &MultiIndex) -> Option<T> {
        match &self.body {
            Body::Table(t) => {
                if let Some(v) = t.coeffs.get(&(i.clone(), j.clone())) {
                    Some(v.clone())
                } else if t.complete || i.degree() + j.degree() <= t.degree {
                    Some(T::zero())
                } else {
                    None
                }
            }
            Body::Provider(p) => {
                let c = p.coeff(i, j, &self.basepoint_c64(), self.hbar.to_f64());
                Some(T::from_c64(c))
            }
        }
    }

    pub fn coeff_or_err(&self, i: &MultiIndex, j: &MultiIndex) -> Result<T> {
        self.coeff(i, j).ok_or(Error::Truncation {
            degree: i.degree() + j.degree(),
            available: self.available_degree().unwrap_or(0),
        })
    }

    /// Nonzero table entries (empty for providers).
    pub fn terms(&self) -> impl Iterator<Item = (&Key, &T)> {
        self.table().into_iter().flat_map(|t| t.coeffs.iter())
    }

    fn same_header(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        if self.p != other.p || self.hbar != other.hbar {
            return Err(Error::IncompatibleJets);
        }
        Ok(())
    }

    fn with_body(&self, body: Body<T>) -> Self {
        Self {
            n: self.n,
            p: self.p.clone(),
            hbar: self.hbar.clone(),
            body,
        }
    }

    fn polynomial_jet(&self, monomials: BTreeMap<Key, T>) -> Self {
        Self::from_monomial_map(self.n, self.p.clone(), self.hbar.clone(), monomials)
            .expect("header already validated")
    }

    /// Monomial coefficients `a_{I,J} / (I! J!)` of a complete table.
    pub fn monomials(&self) -> Option<BTreeMap<Key, T>> {
        let t = self.table().filter(|t| t.complete)?;
        Some(
            t.coeffs
                .iter()
                .map(|((i, j), v)| ((i.clone(), j.clone()), v.div_biguint(&(i.factorial() * j.factorial()))))
                .collect(),
        )
    }

    /// The provider form of a jet, for mixing with closed-form rules.
    /// Fails for truncated tables.
    pub fn to_provider(&self) -> Result<Provider> {
        match &self.body {
            Body::Provider(p) => Ok(p.clone()),
            Body::Table(t) if t.complete => Ok(Provider::Polynomial(
                self.monomials()
                    .unwrap_or_default()
                    .into_iter()
                    .map(|(k, v)| (k, v.to_c64()))
                    .collect(),
            )),
            Body::Table(t) => Err(Error::Truncation {
                degree: t.degree + 1,
                available: t.degree,
            }),
        }
    }

    /// Table of all coefficients with `|I|+|J| <= degree`.
    pub fn materialize(&self, degree: u32) -> Result<Self> {
        if let Body::Table(t) = &self.body {
            if t.complete {
                if degree >= t.degree {
                    return Ok(self.clone());
                }
            } else if degree > t.degree {
                return Err(Error::Truncation {
                    degree,
                    available: t.degree,
                });
            }
        }
        let mut coeffs = Vec::new();
        for total in 0..=degree {
            for di in 0..=total {
                for i in enumerate_degree(self.n, di) {
                    for j in enumerate_degree(self.n, total - di) {
                        let v = self.coeff_or_err(&i, &j)?;
                        coeffs.push(((i.clone(), j), v));
                    }
                }
            }
        }
        Self::from_table(self.n, self.p.clone(), self.hbar.clone(), degree, false, coeffs)
    }

    /// `a f + b g`.
    pub fn linear(a: &T, f: &Self, b: &T, g: &Self) -> Result<Self> {
        f.same_header(g)?;
        match (&f.body, &g.body) {
            (Body::Table(tf), Body::Table(tg)) => {
                let complete = tf.complete && tg.complete;
                let degree = match (tf.complete, tg.complete) {
                    (true, true) => tf.degree.max(tg.degree),
                    (false, false) => tf.degree.min(tg.degree),
                    (false, true) => tf.degree,
                    (true, false) => tg.degree,
                };
                let mut map: BTreeMap<Key, T> = BTreeMap::new();
                for (k, v) in &tf.coeffs {
                    map.insert(k.clone(), a.clone() * v.clone());
                }
                for (k, v) in &tg.coeffs {
                    let e = map.entry(k.clone()).or_insert_with(T::zero);
                    *e = e.clone() + b.clone() * v.clone();
                }
                Self::from_table(f.n, f.p.clone(), f.hbar.clone(), degree, complete, map)
            }
            _ => {
                let parts = vec![(a.to_c64(), f.to_provider()?), (b.to_c64(), g.to_provider()?)];
                Ok(f.with_body(Body::Provider(Provider::Combination(parts))))
            }
        }
    }

    pub fn scale(&self, a: &T) -> Self {
        match &self.body {
            Body::Table(t) => {
                let coeffs = t.coeffs.iter().map(|(k, v)| (k.clone(), a.clone() * v.clone()));
                Self::from_table(self.n, self.p.clone(), self.hbar.clone(), t.degree, t.complete, coeffs)
                    .expect("header already validated")
            }
            Body::Provider(p) => self.with_body(Body::Provider(scaled_provider(a.to_c64(), p))),
        }
    }

    /// Pointwise complex conjugate: `b_{I,J} = conj(a_{J,I})`.
    pub fn conjugate(&self) -> Self {
        match &self.body {
            Body::Table(t) => {
                let coeffs = t
                    .coeffs
                    .iter()
                    .map(|((i, j), v)| ((j.clone(), i.clone()), v.conj()));
                Self::from_table(self.n, self.p.clone(), self.hbar.clone(), t.degree, t.complete, coeffs)
                    .expect("header already validated")
            }
            Body::Provider(p) => {
                let q = match p {
                    Provider::Exponential {
                        prefactor,
                        abar,
                        beta,
                    } => Provider::Exponential {
                        prefactor: prefactor.conj(),
                        abar: beta.iter().map(|c| c.conj()).collect(),
                        beta: abar.iter().map(|c| c.conj()).collect(),
                    },
                    Provider::Conjugate(inner) => (**inner).clone(),
                    other => Provider::Conjugate(Box::new(other.clone())),
                };
                self.with_body(Body::Provider(q))
            }
        }
    }

    /// `d^{|I|+|J|} f / dz^I dzbar^J`: `b_{K,L} = a_{K+I, L+J}`.
    pub fn derivative(&self, i: &MultiIndex, j: &MultiIndex) -> Self {
        match &self.body {
            Body::Table(t) => {
                let shift = i.degree() + j.degree();
                let coeffs = t.coeffs.iter().filter_map(|((k, l), v)| {
                    Some(((k.checked_sub(i)?, l.checked_sub(j)?), v.clone()))
                });
                // A truncated table shifted past its degree keeps no information;
                // it degenerates to an empty degree-0 table.
                let degree = t.degree.saturating_sub(shift);
                Self::from_table(self.n, self.p.clone(), self.hbar.clone(), degree, t.complete, coeffs)
                    .expect("header already validated")
            }
            Body::Provider(p) => {
                let q = match p {
                    Provider::Exponential {
                        prefactor,
                        abar,
                        beta,
                    } => Provider::Exponential {
                        prefactor: prefactor * cpow(abar, i) * cpow(beta, j),
                        abar: abar.clone(),
                        beta: beta.clone(),
                    },
                    Provider::Derivative { inner, i: a, j: b } => Provider::Derivative {
                        inner: inner.clone(),
                        i: a.add(i),
                        j: b.add(j),
                    },
                    other => Provider::Derivative {
                        inner: Box::new(other.clone()),
                        i: i.clone(),
                        j: j.clone(),
                    },
                };
                self.with_body(Body::Provider(q))
            }
        }
    }

    /// Pointwise product. Exact and complete for two polynomials (`d_out`
    /// then only truncates); otherwise a table up to `d_out` via the
    /// Leibniz rule, reduced and flagged when inputs run out.
    pub fn pointwise_mul(f: &Self, g: &Self, d_out: Option<u32>) -> Result<Tracked<Self>> {
        f.same_header(g)?;
        if let (Some(mf), Some(mg)) = (f.monomials(), g.monomials()) {
            let mut out: BTreeMap<Key, T> = BTreeMap::new();
            for ((a, b), x) in &mf {
                for ((c, d), y) in &mg {
                    let key = (a.add(c), b.add(d));
                    let e = out.entry(key).or_insert_with(T::zero);
                    *e = e.clone() + x.clone() * y.clone();
                }
            }
            let jet = f.polynomial_jet(out);
            return Ok(Tracked::exact(match d_out {
                Some(d) => jet.truncate(d),
                None => jet,
            }));
        }
        let requested = d_out.ok_or_else(|| {
            Error::InvalidParameter("an output degree is required for non-polynomial jets".into())
        })?;
        let available = match (f.available_degree(), g.available_degree()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let degree = available.map_or(requested, |a| a.min(requested));
        let fa = Dense::new(f, degree)?;
        let ga = Dense::new(g, degree)?;
        let mut coeffs = Vec::new();
        for (i, j) in keys_up_to(f.n, degree) {
            let v = leibniz(&i, &j, |a, b| fa.get(a, b), |a, b| ga.get(a, b));
            coeffs.push(((i, j), v));
        }
        let jet = Self::from_table(f.n, f.p.clone(), f.hbar.clone(), degree, false, coeffs)?;
        Ok(if degree < requested {
            Tracked {
                value: jet,
                status: Status::Inconclusive,
                tail: f64::NAN,
                note: Some(format!("output truncated to degree {degree} (requested {requested})")),
            }
        } else {
            Tracked::exact(jet)
        })
    }

    /// Drops every coefficient of total degree above `d`.
    pub fn truncate(&self, d: u32) -> Self {
        match &self.body {
            Body::Table(t) if t.complete && t.degree <= d => self.clone(),
            Body::Table(t) => {
                let coeffs = t
                    .coeffs
                    .iter()
                    .filter(|((i, j), _)| i.degree() + j.degree() <= d)
                    .map(|(k, v)| (k.clone(), v.clone()));
                Self::from_table(self.n, self.p.clone(), self.hbar.clone(), d.min(t.degree), false, coeffs)
                    .expect("header already validated")
            }
            Body::Provider(_) => self.materialize(d).expect("providers have every coefficient"),
        }
    }

    /// `{f, g} = (2/i) sum_k (df/dz_k dg/dzbar_k - df/dzbar_k dg/dz_k)`.
    pub fn poisson(f: &Self, g: &Self, d_out: Option<u32>) -> Result<Tracked<Self>> {
        f.same_header(g)?;
        let n = f.n;
        let zero = MultiIndex::zero(n);
        // 2/i = -2i
        let two_over_i = -(T::i() + T::i());
        let mut acc: Option<Tracked<Self>> = None;
        for k in 0..n {
            let e = MultiIndex::unit(n, k);
            let fz = f.derivative(&e, &zero);
            let fzb = f.derivative(&zero, &e);
            let gz = g.derivative(&e, &zero);
            let gzb = g.derivative(&zero, &e);
            let left = Self::pointwise_mul(&fz, &gzb, d_out)?;
            let right = Self::pointwise_mul(&fzb, &gz, d_out)?;
            let term = Self::linear(&T::one(), &left.value, &-T::one(), &right.value)?;
            let status = left.status.and(right.status);
            acc = Some(match acc {
                None => Tracked {
                    value: term,
                    status,
                    tail: 0.0,
                    note: None,
                },
                Some(prev) => Tracked {
                    value: Self::linear(&T::one(), &prev.value, &T::one(), &term)?,
                    status: prev.status.and(status),
                    tail: 0.0,
                    note: None,
                },
            });
        }
        let acc = acc.expect("n >= 1");
        Ok(acc.map(|j| j.scale(&two_over_i)))
    }

    /// `f^{(N,M)}(q) = sum_{|I|<=N, |J|<=M} a_{I,J}/(I!J!) (q-p)^I conj(q-p)^J`.
    pub fn evaluate(&self, q: &[T], n_max: u32, m_max: u32) -> Result<Evaluation<T>> {
        if q.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: q.len(),
            });
        }
        if let Some(d) = self.available_degree() {
            if n_max + m_max > d {
                return Err(Error::Truncation {
                    degree: n_max + m_max,
                    available: d,
                });
            }
        }
        let d: Vec<T> = q.iter().zip(&self.p).map(|(a, b)| a.clone() - b.clone()).collect();
        let dbar: Vec<T> = d.iter().map(Scalar::conj).collect();
        let mut value = T::zero();
        let mut last = 0.0f64;
        let add = |i: &MultiIndex, j: &MultiIndex, a: T| -> T {
            a.div_biguint(&(i.factorial() * j.factorial())) * i.monomial(&d) * j.monomial(&dbar)
        };
        match (&self.body, self.polynomial_degrees()) {
            (Body::Table(t), _) => {
                for ((i, j), a) in &t.coeffs {
                    if i.degree() <= n_max && j.degree() <= m_max {
                        let term = add(i, j, a.clone());
                        if i.degree() == n_max || j.degree() == m_max {
                            last += term.to_c64().norm();
                        }
                        value = value + term;
                    }
                }
            }
            (Body::Provider(_), _) => {
                for i in enumerate(self.n, n_max) {
                    for j in enumerate(self.n, m_max) {
                        let a = self.coeff_or_err(&i, &j)?;
                        if a.is_zero() {
                            continue;
                        }
                        let term = add(&i, &j, a);
                        if i.degree() == n_max || j.degree() == m_max {
                            last += term.to_c64().norm();
                        }
                        value = value + term;
                    }
                }
            }
        }
        let status = match self.polynomial_degrees() {
            Some((dz, dzb)) if dz <= n_max && dzb <= m_max => Status::ConvergedExact,
            _ if last == 0.0 => Status::Converged,
            _ => {
                let scale = value.to_c64().norm();
                if last <= 1e-14 * scale.max(1.0) {
                    Status::Converged
                } else {
                    Status::Inconclusive
                }
            }
        };
        Ok(Evaluation {
            value,
            status,
            last_increment: last,
        })
    }

    /// `delta_p(f) = a_{0,0}`.
    pub fn delta(&self) -> T {
        let z = MultiIndex::zero(self.n);
        self.coeff(&z, &z).unwrap_or_else(T::zero)
    }

    /// Translation in one slot: polynomials exactly, exponentials in closed
    /// form, anything else as a series cut at `k_cut` with a status.
    pub fn translate(&self, shift: &[T], mode: TranslationMode, d_out: u32, k_cut: u32) -> Result<Tracked<Self>> {
        if shift.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: shift.len(),
            });
        }
        if let Some(m) = self.monomials() {
            let mut out: BTreeMap<Key, T> = BTreeMap::new();
            for ((i, j), c) in m {
                let slot = match mode {
                    TranslationMode::Holomorphic => &i,
                    TranslationMode::Antiholomorphic => &j,
                };
                for k in slot.lower_set() {
                    let rest = slot.checked_sub(&k).expect("k in lower set");
                    let coef = c.clone() * T::from_biguint(&slot.binomial(&k)) * k.monomial(shift);
                    let key = match mode {
                        TranslationMode::Holomorphic => (rest, j.clone()),
                        TranslationMode::Antiholomorphic => (i.clone(), rest),
                    };
                    let e = out.entry(key).or_insert_with(T::zero);
                    *e = e.clone() + coef;
                }
            }
            return Ok(Tracked::exact(self.polynomial_jet(out)));
        }
        if let Some(Provider::Exponential {
            prefactor,
            abar,
            beta,
        }) = self.provider()
        {
            let s: Vec<Complex64> = shift.iter().map(Scalar::to_c64).collect();
            let factor = match mode {
                TranslationMode::Holomorphic => dot(&s, abar).exp(),
                TranslationMode::Antiholomorphic => dot(&s, beta).exp(),
            };
            let q = Provider::Exponential {
                prefactor: prefactor * factor,
                abar: abar.clone(),
                beta: beta.clone(),
            };
            return Ok(Tracked::exact(self.with_body(Body::Provider(q))));
        }
        self.translate_series(shift, mode, d_out, k_cut)
    }

    /// `b_{I,J} = sum_{|K|<=k_cut} shift^K/K! a_{I+K,J}` (or in the J slot).
    pub fn translate_series(&self, shift: &[T], mode: TranslationMode, d_out: u32, k_cut: u32) -> Result<Tracked<Self>> {
        let need = d_out + k_cut;
        let dense = Dense::new(self, need)?;
        let ks = enumerate(self.n, k_cut);
        let weights: Vec<T> = ks
            .iter()
            .map(|k| k.monomial(shift).div_biguint(&k.factorial()))
            .collect();
        let mut coeffs = Vec::new();
        let mut tail = 0.0f64;
        for (i, j) in keys_up_to(self.n, d_out) {
            let mut v = T::zero();
            for (k, w) in ks.iter().zip(&weights) {
                let a = match mode {
                    TranslationMode::Holomorphic => dense.get(&i.add(k), &j),
                    TranslationMode::Antiholomorphic => dense.get(&i, &j.add(k)),
                };
                let term = w.clone() * a;
                if k.degree() == k_cut {
                    tail = tail.max(term.to_c64().norm());
                }
                v = v + term;
            }
            coeffs.push(((i, j), v));
        }
        let jet = Self::from_table(self.n, self.p.clone(), self.hbar.clone(), d_out, false, coeffs)?;
        let status = if tail <= 1e-14 {
            Status::Converged
        } else {
            Status::Inconclusive
        };
        Ok(Tracked {
            value: jet,
            status,
            tail,
            note: None,
        })
    }

    /// The remainder `f - f^{(N,M)}` of the truncated Taylor polynomial.
    pub fn taylor_remainder(&self, n_max: u32, m_max: u32) -> Self {
        match &self.body {
            Body::Table(t) => {
                let coeffs = t
                    .coeffs
                    .iter()
                    .filter(|((i, j), _)| i.degree() > n_max || j.degree() > m_max)
                    .map(|(k, v)| (k.clone(), v.clone()));
                Self::from_table(self.n, self.p.clone(), self.hbar.clone(), t.degree, t.complete, coeffs)
                    .expect("header already validated")
            }
            Body::Provider(p) => self.with_body(Body::Provider(Provider::TaylorRemainder {
                inner: Box::new(p.clone()),
                n: n_max,
                m: m_max,
            })),
        }
    }

    /// Same coefficients in another scalar field (via double precision for
    /// providers; tables convert entrywise through `Complex64`).
    pub fn convert<U: Scalar>(&self) -> Result<Jet<U>> {
        let p: Vec<U> = self.p.iter().map(|z| U::from_c64(z.to_c64())).collect();
        let hbar = U::Real::from_f64(self.hbar.to_f64())
            .ok_or_else(|| Error::InvalidParameter("hbar is not representable".into()))?;
        match &self.body {
            Body::Table(t) => Jet::from_table(
                self.n,
                p,
                hbar,
                t.degree,
                t.complete,
                t.coeffs.iter().map(|(k, v)| (k.clone(), U::from_c64(v.to_c64()))),
            ),
            Body::Provider(q) => Jet::from_provider(self.n, p, hbar, q.clone()),
        }
    }
}

fn scaled_provider(a: Complex64, p: &Provider) -> Provider {
    match p {
        Provider::Exponential {
            prefactor,
            abar,
            beta,
        } => Provider::Exponential {
            prefactor: a * prefactor,
            abar: abar.clone(),
            beta: beta.clone(),
        },
        other => Provider::Combination(vec![(a, other.clone())]),
    }
}

/// All `(I, J)` with `|I| + |J| <= d`, ordered by total degree.
pub fn keys_up_to(n: usize, d: u32) -> Vec<Key> {
    let mut out = Vec::new();
    for total in 0..=d {
        for di in 0..=total {
            for i in enumerate_degree(n, di) {
                for j in enumerate_degree(n, total - di) {
                    out.push((i.clone(), j));
                }
            }
        }
    }
    out
}

/// `sum_{A<=I, B<=J} C(I,A) C(J,B) x_{A,B} y_{I-A,J-B}`.
pub fn leibniz<T: Scalar>(
    i: &MultiIndex,
    j: &MultiIndex,
    x: impl Fn(&MultiIndex, &MultiIndex) -> T,
    y: impl Fn(&MultiIndex, &MultiIndex) -> T,
) -> T {
    let mut acc = T::zero();
    let bs = j.lower_set();
    for a in i.lower_set() {
        let ia = i.checked_sub(&a).expect("lower set");
        let ca = i.binomial(&a);
        for b in &bs {
            let xa = x(&a, b);
            if xa.is_zero() {
                continue;
            }
            let yb = y(&ia, &j.checked_sub(b).expect("lower set"));
            if yb.is_zero() {
                continue;
            }
            let c = &ca * j.binomial(b);
            acc = acc + T::from_biguint(&c) * xa * yb;
        }
    }
    acc
}

/// Coefficients of a jet up to a fixed degree, read once.
pub(crate) struct Dense<T> {
    degree: u32,
    complete: bool,
    map: HashMap<Key, T>,
}

impl<T: Scalar> Dense<T> {
    pub(crate) fn new(jet: &Jet<T>, degree: u32) -> Result<Self> {
        if let Some(t) = jet.table() {
            if !t.complete && degree > t.degree {
                return Err(Error::Truncation {
                    degree,
                    available: t.degree,
                });
            }
            return Ok(Self {
                degree,
                complete: t.complete,
                map: t.coeffs.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
            });
        }
        let mut map = HashMap::new();
        for (i, j) in keys_up_to(jet.n(), degree) {
            let v = jet.coeff_or_err(&i, &j)?;
            if !v.is_zero() {
                map.insert((i, j), v);
            }
        }
        Ok(Self {
            degree,
            complete: false,
            map,
        })
    }

    pub(crate) fn get(&self, i: &MultiIndex, j: &MultiIndex) -> T {
        debug_assert!(self.complete || i.degree() + j.degree() <= self.degree);
        self.map
            .get(&(i.clone(), j.clone()))
            .cloned()
            .unwrap_or_else(T::zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{complex_ratio, ratio, ExactComplex};
    use num_rational::BigRational;

    type E = ExactComplex;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    fn half() -> BigRational {
        BigRational::from_ratio(1, 2)
    }

    fn poly(terms: &[(u32, u32, i64)]) -> Jet<E> {
        Jet::from_monomials(
            1,
            vec![E::zero()],
            half(),
            terms.iter().map(|&(a, b, c)| (mi(&[a]), mi(&[b]), ratio::<E>(c, 1))),
        )
        .unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn coordinate_slot_is_checked() {
        let f = Jet::<E>::coordinate(2, vec![E::zero(); 2], half(), 1, true).unwrap();
        assert_eq!(f.coeff(&mi(&[0, 0]), &mi(&[0, 1])), Some(E::one()));
        assert!(matches!(
            Jet::<E>::coordinate(1, vec![E::zero()], half(), 1, false),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn monomials_become_derivative_values() {
        let z = poly(&[(1, 0, 1)]);
        assert_eq!(z.coeff(&mi(&[1]), &mi(&[0])), Some(E::one()));
        assert_eq!(z.coeff(&mi(&[0]), &mi(&[0])), Some(E::zero()));
        let zz = poly(&[(2, 0, 1)]);
        assert_eq!(zz.coeff(&mi(&[2]), &mi(&[0])), Some(ratio(2, 1)));
        let zzb = poly(&[(1, 1, 1)]);
        assert_eq!(zzb.coeff(&mi(&[1]), &mi(&[1])), Some(E::one()));
        assert_eq!(zzb.polynomial_degrees(), Some((1, 1)));
    }

    #[test]
    fn zero_dimension_rejected() {
        let err = Jet::<E>::from_table(0, vec![], half(), 0, true, []).unwrap_err();
        assert_eq!(err, Error::ZeroDimension);
    }

    #[test]
    fn materialize_exponential_and_quartic_series() {
        let e = Jet::<Complex64>::exponential(1, vec![c(0.0, 0.0)], 0.5, vec![c(0.0, 0.0)], vec![c(1.0, 0.0)])
            .unwrap();
        let t = e.materialize(2).unwrap();
        for k in 0..=2 {
            assert!((t.coeff(&mi(&[0]), &mi(&[k])).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        }
        assert_eq!(t.coeff(&mi(&[1]), &mi(&[0])).unwrap(), c(0.0, 0.0));

        let bad = Jet::<Complex64>::from_provider(
            1,
            vec![c(0.0, 0.0)],
            0.5,
            Provider::PowerSeries1d(SeriesRule::QuarticRootFactorial),
        )
        .unwrap()
        .materialize(2)
        .unwrap();
        assert!((bad.coeff(&mi(&[1]), &mi(&[0])).unwrap().re - 1.0).abs() < 1e-15);
        assert!((bad.coeff(&mi(&[2]), &mi(&[0])).unwrap().re - 2f64.powf(0.75)).abs() < 1e-14);
        assert_eq!(bad.coeff(&mi(&[1]), &mi(&[1])).unwrap(), c(0.0, 0.0));
        // Beyond the materialised degree nothing is known.
        assert_eq!(bad.coeff(&mi(&[3]), &mi(&[0])), None);

        let p = poly(&[(1, 1, 3), (0, 2, 1)]);
        assert_eq!(p.materialize(5).unwrap().table(), p.table());
    }

    #[test]
    fn linear_combinations() {
        let z = poly(&[(1, 0, 1)]);
        let zb = poly(&[(0, 1, 1)]);
        let s = Jet::linear(&E::one(), &z, &E::one(), &zb).unwrap();
        assert_eq!(s.coeff(&mi(&[1]), &mi(&[0])), Some(E::one()));
        assert_eq!(s.coeff(&mi(&[0]), &mi(&[1])), Some(E::one()));
        let zero = Jet::linear(&E::zero(), &z, &E::zero(), &zb).unwrap();
        assert_eq!(zero.terms().count(), 0);
        let zzb = poly(&[(1, 1, 1)]);
        let d = Jet::linear(&ratio(2, 1), &zzb, &ratio(-1, 1), &zzb).unwrap();
        assert_eq!(d.table(), zzb.table());

        let other = Jet::from_monomials(1, vec![E::one()], half(), [(mi(&[1]), mi(&[0]), E::one())]).unwrap();
        assert_eq!(Jet::linear(&E::one(), &z, &E::one(), &other).unwrap_err(), Error::IncompatibleJets);
    }

    #[test]
    fn conjugation() {
        let z = poly(&[(1, 0, 1)]);
        assert_eq!(z.conjugate().coeff(&mi(&[0]), &mi(&[1])), Some(E::one()));
        let i1 = Jet::constant(1, vec![E::zero()], half(), E::i()).unwrap();
        assert_eq!(i1.conjugate().delta(), -E::i());

        let (a, b) = (c(0.3, -0.2), c(-0.1, 0.7));
        let p = vec![c(0.2, 0.1)];
        let e = Jet::<Complex64>::exponential(1, p.clone(), 0.5, vec![a], vec![b]).unwrap();
        // conj(e_{abar,beta}) = e_{conj(beta), alpha} with alpha = conj(abar).
        let expected = Jet::<Complex64>::exponential(1, p, 0.5, vec![b.conj()], vec![a.conj()]).unwrap();
        for (i, j) in keys_up_to(1, 4) {
            let x = e.conjugate().coeff(&i, &j).unwrap();
            let y = expected.coeff(&i, &j).unwrap();
            assert!((x - y).norm() < 1e-14 * (1.0 + y.norm()));
        }
    }

    #[test]
    fn derivatives() {
        let z = poly(&[(1, 0, 1)]);
        let dz = z.derivative(&mi(&[1]), &mi(&[0]));
        assert_eq!(dz.delta(), E::one());
        assert_eq!(dz.terms().count(), 1);
        let dzb = z.derivative(&mi(&[0]), &mi(&[1]));
        assert_eq!(dzb.terms().count(), 0);

        let (a, b) = (c(0.4, 0.1), c(-0.3, 0.2));
        let e = Jet::<Complex64>::exponential(1, vec![c(0.1, 0.0)], 0.5, vec![a], vec![b]).unwrap();
        let de = e.derivative(&mi(&[1]), &mi(&[0]));
        for (i, j) in keys_up_to(1, 3) {
            let x = de.coeff(&i, &j).unwrap();
            let y = a * e.coeff(&i, &j).unwrap();
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn pointwise_products() {
        let z = poly(&[(1, 0, 1)]);
        let zb = poly(&[(0, 1, 1)]);
        let p = Jet::pointwise_mul(&z, &zb, None).unwrap();
        assert_eq!(p.status, Status::ConvergedExact);
        assert_eq!(p.value.coeff(&mi(&[1]), &mi(&[1])), Some(E::one()));
        let zz = Jet::pointwise_mul(&z, &z, None).unwrap().value;
        assert_eq!(zz.coeff(&mi(&[2]), &mi(&[0])), Some(ratio(2, 1)));

        // e_{0,b} e_{0,d} has coefficients (b+d)^J up to the constant factors.
        let (b, d) = (c(0.5, -0.25), c(-0.75, 0.5));
        let eb = Jet::<Complex64>::exponential(1, vec![c(0.0, 0.0)], 0.5, vec![c(0.0, 0.0)], vec![b]).unwrap();
        let ed = Jet::<Complex64>::exponential(1, vec![c(0.0, 0.0)], 0.5, vec![c(0.0, 0.0)], vec![d]).unwrap();
        let prod = Jet::pointwise_mul(&eb, &ed, Some(4)).unwrap();
        assert_eq!(prod.status, Status::ConvergedExact);
        for k in 0..=4 {
            let got = prod.value.coeff(&mi(&[0]), &mi(&[k])).unwrap();
            assert!((got - (b + d).powu(k)).norm() < 1e-14);
        }

        let trunc = poly(&[(1, 0, 1), (2, 0, 1)]).truncate(1);
        let t = Jet::pointwise_mul(&trunc, &trunc, Some(3)).unwrap();
        assert_eq!(t.status, Status::Inconclusive);
        assert_eq!(t.value.available_degree(), Some(1));
    }

    #[test]
    fn poisson_brackets() {
        let z = poly(&[(1, 0, 1)]);
        let zb = poly(&[(0, 1, 1)]);
        let pb = Jet::poisson(&z, &zb, None).unwrap().value;
        assert_eq!(pb.delta(), complex_ratio(0, -2, 1));
        assert_eq!(pb.terms().count(), 1);
        let f = poly(&[(2, 1, 3), (0, 1, -2), (1, 1, 1)]);
        assert_eq!(Jet::poisson(&f, &f, None).unwrap().value.terms().count(), 0);
    }

    #[test]
    fn poisson_matches_finite_differences() {
        // {z zbar, z} at a test point, against central differences of the
        // evaluated functions, with d/dz = (d/dx - i d/dy)/2.
        let f = poly(&[(1, 1, 1)]).convert::<Complex64>().unwrap();
        let g = poly(&[(1, 0, 1)]).convert::<Complex64>().unwrap();
        let q = c(0.7, -0.3);
        let pb = Jet::poisson(&f, &g, None).unwrap().value;
        let exact = pb.evaluate(&[q], 5, 5).unwrap().value;

        let eval = |h: &Jet<Complex64>, w: Complex64| h.evaluate(&[w], 5, 5).unwrap().value;
        let step = 1e-5;
        let d = |h: &Jet<Complex64>, w: Complex64| {
            let dx = (eval(h, w + step) - eval(h, w - step)) / (2.0 * step);
            let dy = (eval(h, w + c(0.0, step)) - eval(h, w - c(0.0, step))) / (2.0 * step);
            ((dx - c(0.0, 1.0) * dy) / 2.0, (dx + c(0.0, 1.0) * dy) / 2.0)
        };
        let (fz, fzb) = d(&f, q);
        let (gz, gzb) = d(&g, q);
        let fd = c(0.0, -2.0) * (fz * gzb - fzb * gz);
        assert!((fd - exact).norm() < 1e-8, "{fd} vs {exact}");
    }

    #[test]
    fn evaluation() {
        let z = poly(&[(1, 0, 1)]);
        let q: E = complex_ratio(3, 1, 1);
        let v = z.evaluate(&[q.clone()], 1, 0).unwrap();
        assert_eq!(v.value, q);
        assert_eq!(v.status, Status::ConvergedExact);
        let zb = poly(&[(0, 1, 1)]);
        assert_eq!(zb.delta(), E::zero());

        let e = Jet::<Complex64>::exponential(1, vec![c(0.0, 0.0)], 0.5, vec![c(0.0, 0.0)], vec![c(1.0, 0.0)])
            .unwrap();
        // zbar = 1 at q = 1.
        let v = e.evaluate(&[c(1.0, 0.0)], 0, 20).unwrap();
        assert!((v.value - c(std::f64::consts::E, 0.0)).norm() < 1e-12);

        let t = poly(&[(1, 0, 1), (1, 1, 1)]).truncate(1);
        assert!(matches!(t.evaluate(&[q], 1, 1), Err(Error::Truncation { .. })));
    }

    #[test]
    fn translations() {
        let z = poly(&[(1, 0, 1)]);
        let a: E = complex_ratio(2, -1, 3);
        let t = z.translate(&[a.clone()], TranslationMode::Holomorphic, 4, 0).unwrap().value;
        assert_eq!(t.delta(), a);
        assert_eq!(t.coeff(&mi(&[1]), &mi(&[0])), Some(E::one()));
        let tb = z.translate(&[a.clone()], TranslationMode::Antiholomorphic, 4, 0).unwrap().value;
        assert_eq!(tb.table(), z.table());

        // Closed form for exponentials against the truncated series.
        let (ab, b) = (c(0.3, 0.2), c(-0.4, 0.1));
        let e = Jet::<Complex64>::exponential(1, vec![c(0.0, 0.0)], 0.5, vec![ab], vec![b]).unwrap();
        let s = [c(0.5, -0.5)];
        let closed = e.translate(&s, TranslationMode::Holomorphic, 4, 0).unwrap().value;
        let series = e.translate_series(&s, TranslationMode::Holomorphic, 4, 30).unwrap();
        assert_eq!(series.status, Status::Converged);
        for (i, j) in keys_up_to(1, 4) {
            let x = closed.coeff(&i, &j).unwrap();
            let y = series.value.coeff(&i, &j).unwrap();
            assert!((x - y).norm() < 1e-12 * (1.0 + x.norm()));
            let z = e.coeff(&i, &j).unwrap() * (s[0] * ab).exp();
            assert!((x - z).norm() < 1e-14);
        }
    }

    #[test]
    fn taylor_remainder_drops_low_orders() {
        let f = poly(&[(1, 0, 1), (2, 3, 1), (0, 1, 5)]);
        let r = f.taylor_remainder(1, 1);
        assert_eq!(r.terms().count(), 1);
        assert!(r.coeff(&mi(&[2]), &mi(&[3])).is_some_and(|v| !v.is_zero()));
    }
}
