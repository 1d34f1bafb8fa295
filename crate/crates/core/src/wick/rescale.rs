
use crate::error::{Error, Result};
use crate::jet::{Body, Jet, Provider};
use crate::scalar::{RealScalar, Scalar};

/// Pull-back along `z -> sqrt(alpha) z` at base point 0:
/// `b_{I,J} = alpha^{(|I|+|J|)/2} a_{I,J}`.
///
/// The input carries `alpha * hbar`, the output `hbar`, so that
/// `R(f *_{alpha hbar} g) = R f *_hbar R g`. Exact mode needs `alpha` to be
/// a rational square.
pub fn rescale<T: Scalar>(f: &Jet<T>, alpha: &T::Real) -> Result<Jet<T>> {
    if !alpha.is_positive() {
        return Err(Error::InvalidParameter("rescaling factor must be positive".into()));
    }
    if f.basepoint().iter().any(|z| !z.is_zero()) {
        return Err(Error::NonzeroBasepoint);
    }
    let s = alpha
        .sqrt()
        .ok_or_else(|| Error::InvalidParameter("rescaling factor has no exact square root".into()))?;
    let hbar = f.hbar().clone() * alpha.recip();
    let p = f.basepoint().to_vec();
    match f.body() {
        Body::Table(t) => {
            let coeffs = t.coeffs.iter().map(|((i, j), v)| {
                let k = i.degree() + j.degree();
                ((i.clone(), j.clone()), v.clone() * T::from_real(s.clone()).powu(k))
            });
            Jet::from_table(f.n(), p, hbar, t.degree, t.complete, coeffs)
        }
        Body::Provider(q) => {
            let sf = s.to_f64();
            let provider = match q {
                Provider::Exponential {
                    prefactor,
                    abar,
                    beta,
                } => Provider::Exponential {
                    prefactor: *prefactor,
                    abar: abar.iter().map(|a| a * sf).collect(),
                    beta: beta.iter().map(|b| b * sf).collect(),
                },
                other => Provider::Rescaled {
                    inner: Box::new(other.clone()),
                    sqrt_alpha: sf,
                },
            };
            Jet::from_provider(f.n(), p, hbar, provider)
        }
    }
}
