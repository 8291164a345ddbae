use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{annihilation, working_dim, FockOperator, GUARD_FRACTION};
use crate::bell::{DetectorModel, MeasurementSetting};
use crate::error::{Error, Result};
use crate::gaussian::OrderParameter;

/// Generator of `S(ξ) = exp[½(ξ a² − ξ a†²)]` for real `ξ`.
fn squeeze_generator(xi: f64, m: usize) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(m, m);
    for n in 0..m.saturating_sub(2) {
        let c = 0.5 * xi * (((n + 1) * (n + 2)) as f64).sqrt();
        g[(n, n + 2)] = c;
        g[(n + 2, n)] = -c;
    }
    g
}

/// Generator of `D(t) = exp[t(a† − a)]` for real `t`.
fn displacement_generator(t: f64, m: usize) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(m, m);
    for n in 0..m.saturating_sub(1) {
        let c = t * ((n + 1) as f64).sqrt();
        g[(n + 1, n)] = c;
        g[(n, n + 1)] = -c;
    }
    g
}

fn guard_start(m: usize) -> usize {
    ((1.0 - GUARD_FRACTION) * m as f64).floor() as usize
}

/// `S(ξ)` for real `ξ`, exponentiated in the working basis and truncated.
pub fn squeeze_operator(xi: f64, n: usize) -> FockOperator {
    let m = working_dim(n);
    let s = squeeze_generator(xi, m).exp();
    FockOperator::from_real(n, 1, &s.view((0, 0), (n, n)).into_owned())
}

/// `D(α) = exp(α a† − α* a)`, built as `R(φ) D(|α|) R(φ)†` with
/// `R(φ) = e^{iφ n̂}` so only a real generator is exponentiated.
pub fn displacement_operator(alpha: Complex64, n: usize) -> FockOperator {
    let m = working_dim(n);
    let d = displacement_generator(alpha.norm(), m).exp();
    let phi = alpha.arg();
    let entries = DMatrix::from_fn(n, n, |i, j| {
        Complex64::from_polar(1.0, phi * (i as f64 - j as f64)) * d[(i, j)]
    });
    FockOperator::new(n, 1, entries)
}

/// Thermal state with quadrature variance `nu`: `p_k = (1 − x) x^k`,
/// `x = (ν − 1)/(ν + 1)`.
pub fn thermal_fock(nu: f64, n: usize) -> Result<FockOperator> {
    if !(nu >= 1.0 && nu.is_finite()) {
        return Err(Error::UnphysicalSpec(format!("thermal variance {nu} must be >= 1")));
    }
    let x = (nu - 1.0) / (nu + 1.0);
    let diag = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new((1.0 - x) * x.powi(i as i32), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(FockOperator::new(n, 1, diag))
}

/// Position and momentum quadratures `x = a + a†`, `p = i(a† − a)`.
pub fn quadrature_operators(n: usize) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let a = annihilation(n).map(|v| Complex64::new(v, 0.0));
    let ad = a.adjoint();
    let x = &a + &ad;
    let p = (&ad - &a) * Complex64::new(0.0, 1.0);
    (x, p)
}

/// Photon-number weights of the lossy parity-like observable:
/// `f(n) = Σ_k C(n,k) η^k (1−η)^{n−k} c^k` with `c = (s+1)/(s−1)`.
///
/// The binomial sum is evaluated term by term (Pascal recursion over `n`),
/// not through its closed form, so it checks the efficiency substitution.
pub fn lossy_weights(s: OrderParameter, det: DetectorModel, m: usize) -> Vec<f64> {
    let s = s.value();
    let c = (s + 1.0) / (s - 1.0);
    let eta = det.eta();
    let mut binom = vec![0.0; m + 1];
    binom[0] = 1.0;
    let mut out = Vec::with_capacity(m);
    for n in 0..m {
        if n > 0 {
            for k in (1..=n).rev() {
                binom[k] = eta * binom[k - 1] + (1.0 - eta) * binom[k];
            }
            binom[0] *= 1.0 - eta;
        }
        let mut ck = 1.0;
        let mut f = 0.0;
        for &b in binom.iter().take(n + 1) {
            f += b * ck;
            ck *= c;
        }
        out.push(f);
    }
    out
}

/// `Π(u; α; s)` truncated to `cutoff` levels, with the guard-band weight of
/// each column of the underlying unitary.
#[derive(Debug, Clone)]
pub struct PiOperator {
    pub op: FockOperator,
    /// Weight that `D(α)† U |j⟩` puts into the guard band, per `j`.
    pub column_leakage: Vec<f64>,
}

/// The measurement operator for one party:
/// `Π = U† D(α) f(n̂) D(α)† U`, where `U` rescales the `x` variance by `u`
/// (`U = S(−½ ln u)`) and `f` are [`lossy_weights`].
pub fn pi_operator(
    setting: &MeasurementSetting,
    s: OrderParameter,
    det: DetectorModel,
    cutoff: usize,
) -> Result<PiOperator> {
    setting.validate()?;
    let m = working_dim(cutoff);
    let u = squeeze_generator(-0.5 * setting.u.ln(), m).exp();
    let dr = displacement_generator(setting.alpha.norm(), m).exp();
    let phi = setting.alpha.arg();

    // W = D(|α|)ᵀ R(φ)† U, restricted to the first `cutoff` columns. The
    // outer phase of D(α)† commutes with f(n̂) and drops out.
    let u_cols = u.columns(0, cutoff);
    let (cos_rows, sin_rows): (Vec<f64>, Vec<f64>) =
        (0..m).map(|k| ((phi * k as f64).cos(), (phi * k as f64).sin())).unzip();
    let ru_re = DMatrix::from_fn(m, cutoff, |k, j| cos_rows[k] * u_cols[(k, j)]);
    let ru_im = DMatrix::from_fn(m, cutoff, |k, j| -sin_rows[k] * u_cols[(k, j)]);
    let drt = dr.transpose();
    let w_re = &drt * ru_re;
    let w_im = &drt * ru_im;

    let g = guard_start(m);
    let column_leakage = (0..cutoff)
        .map(|j| (g..m).map(|k| w_re[(k, j)].powi(2) + w_im[(k, j)].powi(2)).sum())
        .collect();

    let f = lossy_weights(s, det, m);
    let fw_re = DMatrix::from_fn(m, cutoff, |k, j| f[k] * w_re[(k, j)]);
    let fw_im = DMatrix::from_fn(m, cutoff, |k, j| f[k] * w_im[(k, j)]);
    // Π = W† F W = (Wr − iWi)ᵀ F (Wr + iWi)
    let re = w_re.transpose() * &fw_re + w_im.transpose() * &fw_im;
    let im = w_re.transpose() * &fw_im - w_im.transpose() * &fw_re;
    let entries = DMatrix::from_fn(cutoff, cutoff, |i, j| Complex64::new(re[(i, j)], im[(i, j)]));
    Ok(PiOperator { op: FockOperator::new(cutoff, 1, entries), column_leakage })
}
