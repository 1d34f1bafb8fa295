use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::jet::{keys_up_to, leibniz, Dense, Jet, Key};
use crate::multiindex::{enumerate, enumerate_degree, MultiIndex};
use crate::scalar::Scalar;
use crate::series::{Status, Tracked};

/// Components `C_0, C_1, ...` of the formal product, `C_r` multiplying `lambda^r`.
#[derive(Clone, Debug)]
pub struct GradedJet<T: Scalar> {
    pub components: Vec<Jet<T>>,
}

impl<T: Scalar> GradedJet<T> {
    pub fn component(&self, r: usize) -> Option<&Jet<T>> {
        self.components.get(r)
    }
}

/// `f *_alpha g` on monomial coefficients, restricted to the shells
/// `|N| in shells` (all shells when `None`). Exact in exact mode.
fn sparse_product<T: Scalar>(
    f: &BTreeMap<Key, T>,
    g: &BTreeMap<Key, T>,
    two_alpha: &T,
    shell: Option<u32>,
) -> BTreeMap<Key, T> {
    let mut out: BTreeMap<Key, T> = BTreeMap::new();
    for ((a, b), x) in f {
        for ((c, d), y) in g {
            let xy = x.clone() * y.clone();
            // d_z^N z^A = A!/(A-N)! z^{A-N}, d_zbar^N zbar^D likewise.
            let bound: Vec<u32> = a.entries().iter().zip(d.entries()).map(|(p, q)| *p.min(q)).collect();
            let bound = MultiIndex::new(bound).expect("n >= 1");
            for nn in bound.lower_set() {
                let k = nn.degree();
                if shell.is_some_and(|s| s != k) {
                    continue;
                }
                let weight = a.binomial(&nn) * d.binomial(&nn) * nn.factorial();
                let coef = xy.clone() * two_alpha.powu(k) * T::from_biguint(&weight);
                let key = (
                    a.checked_sub(&nn).expect("N <= A").add(c),
                    b.add(&d.checked_sub(&nn).expect("N <= D")),
                );
                let e = out.entry(key).or_insert_with(T::zero);
                *e = e.clone() + coef;
            }
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn compatible<T: Scalar>(f: &Jet<T>, g: &Jet<T>) -> Result<()> {
    if f.n() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            found: g.n(),
        });
    }
    if f.basepoint() != g.basepoint() || f.hbar() != g.hbar() {
        return Err(Error::IncompatibleJets);
    }
    Ok(())
}

/// The cut beyond which every term of the product vanishes identically,
/// when one factor is polynomial in the relevant slot.
pub fn terminating_cut<T: Scalar>(f: &Jet<T>, g: &Jet<T>) -> Option<u32> {
    let a = f.polynomial_degrees().map(|(dz, _)| dz);
    let b = g.polynomial_degrees().map(|(_, dzb)| dzb);
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

/// Wick product
/// `c_{I,J} = sum_{|N|<=N_cut} (2 alpha)^{|N|}/N! sum_{A<=I,B<=J} C(I,A) C(J,B) a_{A+N,B} b_{I-A,J-B+N}`.
///
/// Two polynomials multiply exactly and completely (`d_out` then only
/// truncates). Otherwise `d_out` is required; `n_cut` defaults to the
/// terminating cut when one factor is polynomial in the relevant slot.
pub fn wick_star<T: Scalar>(
    f: &Jet<T>,
    g: &Jet<T>,
    alpha: &T,
    d_out: Option<u32>,
    n_cut: Option<u32>,
) -> Result<Tracked<Jet<T>>> {
    compatible(f, g)?;
    let two_alpha = alpha.clone() + alpha.clone();
    if let (Some(mf), Some(mg)) = (f.monomials(), g.monomials()) {
        let out = sparse_product(&mf, &mg, &two_alpha, None);
        let jet = Jet::from_monomials(
            f.n(),
            f.basepoint().to_vec(),
            f.hbar().clone(),
            out.into_iter().map(|((i, j), v)| (i, j, v)),
        )?;
        return Ok(Tracked::exact(match d_out {
            Some(d) => jet.truncate(d),
            None => jet,
        }));
    }
    let d_out = d_out.ok_or_else(|| {
        Error::InvalidParameter("an output degree is required unless both factors are polynomials".into())
    })?;
    let terminating = terminating_cut(f, g);
    let n_cut = match (n_cut, terminating) {
        (Some(c), Some(t)) => c.min(t),
        (Some(c), None) => c,
        (None, Some(t)) => t,
        (None, None) => {
            return Err(Error::InvalidParameter(
                "a series cut is required for two non-polynomial factors".into(),
            ))
        }
    };
    let exact = terminating.is_some_and(|t| n_cut >= t);
    dense_product(f, g, &two_alpha, d_out, 0..=n_cut, exact)
}

fn dense_product<T: Scalar>(
    f: &Jet<T>,
    g: &Jet<T>,
    two_alpha: &T,
    d_out: u32,
    shells: std::ops::RangeInclusive<u32>,
    exact: bool,
) -> Result<Tracked<Jet<T>>> {
    let n = f.n();
    let top = *shells.end();
    let need = d_out + top;
    let fa = Dense::new(f, need)?;
    let ga = Dense::new(g, need)?;
    let keys = keys_up_to(n, d_out);
    let mut values = vec![T::zero(); keys.len()];
    let mut tail = 0.0f64;
    for k in shells {
        let weight_k = two_alpha.powu(k);
        for nn in enumerate_degree(n, k) {
            let w = weight_k.div_biguint(&nn.factorial());
            for ((i, j), slot) in keys.iter().zip(values.iter_mut()) {
                let v = leibniz(
                    i,
                    j,
                    |a, b| fa.get(&a.add(&nn), b),
                    |c, d| ga.get(c, &d.add(&nn)),
                );
                if v.is_zero() {
                    continue;
                }
                let term = w.clone() * v;
                if k == top {
                    tail = tail.max(term.to_c64().norm());
                }
                *slot = slot.clone() + term;
            }
        }
    }
    let scale = values.iter().map(|v| v.to_c64().norm()).fold(0.0, f64::max);
    let jet = Jet::from_table(
        n,
        f.basepoint().to_vec(),
        f.hbar().clone(),
        d_out,
        false,
        keys.into_iter().zip(values),
    )?;
    let (status, tail) = if exact {
        (Status::ConvergedExact, 0.0)
    } else if tail <= 1e-14 * scale.max(1.0) {
        (Status::Converged, tail)
    } else {
        (Status::Inconclusive, tail)
    };
    Ok(Tracked {
        value: jet,
        status,
        tail,
        note: (status == Status::Inconclusive)
            .then(|| format!("last shell |N|={top} still contributes {tail:e}")),
    })
}

/// `C_r(f,g) = sum_{|N|=r} 2^r/N! (d_z^N f)(d_zbar^N g)` for `r <= r_max`.
pub fn wick_star_graded<T: Scalar>(f: &Jet<T>, g: &Jet<T>, r_max: u32, d_out: Option<u32>) -> Result<GradedJet<T>> {
    compatible(f, g)?;
    let two = T::from_u64(2);
    let mut components = Vec::with_capacity(r_max as usize + 1);
    for r in 0..=r_max {
        let jet = if let (Some(mf), Some(mg)) = (f.monomials(), g.monomials()) {
            let out = sparse_product(&mf, &mg, &two, Some(r));
            let jet = Jet::from_monomials(
                f.n(),
                f.basepoint().to_vec(),
                f.hbar().clone(),
                out.into_iter().map(|((i, j), v)| (i, j, v)),
            )?;
            match d_out {
                Some(d) => jet.truncate(d),
                None => jet,
            }
        } else {
            let d = d_out.ok_or_else(|| {
                Error::InvalidParameter("an output degree is required for non-polynomial jets".into())
            })?;
            dense_product(f, g, &two, d, r..=r, true)?.value
        };
        components.push(jet);
    }
    Ok(GradedJet { components })
}

/// `f^{*k}` as the left fold `(..((f * f) * f) ..)`; `k = 0` gives 1.
pub fn star_power<T: Scalar>(
    f: &Jet<T>,
    k: u32,
    alpha: &T,
    d_out: Option<u32>,
    n_cut: Option<u32>,
) -> Result<Tracked<Jet<T>>> {
    let mut acc = Tracked::exact(Jet::constant(f.n(), f.basepoint().to_vec(), f.hbar().clone(), T::one())?);
    for _ in 0..k {
        let next = wick_star(&acc.value, f, alpha, d_out, n_cut)?;
        acc = Tracked {
            status: acc.status.and(next.status),
            tail: acc.tail.max(next.tail),
            note: next.note.or(acc.note),
            value: next.value,
        };
    }
    Ok(acc)
}

/// All `(I, J)` keys where two jets differ by more than `tol`, with the
/// maximal deviation. Both jets are read up to total degree `d`.
pub fn max_deviation<T: Scalar>(f: &Jet<T>, g: &Jet<T>, d: u32) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in enumerate(f.n(), d) {
        for j in enumerate(f.n(), d - i.degree()) {
            let a = f.coeff_or_err(&i, &j)?.to_c64();
            let b = g.coeff_or_err(&i, &j)?.to_c64();
            worst = worst.max((a - b).norm());
        }
    }
    Ok(worst)
}

/// As [`max_deviation`], relative to `1 + |reference coefficient|`.
pub fn max_relative_deviation<T: Scalar>(f: &Jet<T>, reference: &Jet<T>, d: u32) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in enumerate(f.n(), d) {
        for j in enumerate(f.n(), d - i.degree()) {
            let a = f.coeff_or_err(&i, &j)?.to_c64();
            let b = reference.coeff_or_err(&i, &j)?.to_c64();
            worst = worst.max((a - b).norm() / (1.0 + b.norm()));
        }
    }
    Ok(worst)
}
