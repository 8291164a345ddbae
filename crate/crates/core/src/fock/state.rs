use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{quadrature_operators, FockOperator, TRACE_BUDGET};
use crate::error::{Error, Result};
use crate::gaussian::{Party, TmstsSpec};
use crate::linalg::Mat4;

/// Largest cutoff for which [`TwoModeState::to_dense`] will build the full
/// matrix.
const DENSE_LIMIT: usize = 40;

/// One pure member of the ensemble: `Σ_l amps[l] |offset_a + l, offset_b + l⟩`.
#[derive(Debug, Clone)]
pub struct Component {
    pub weight: f64,
    pub offset_a: usize,
    pub offset_b: usize,
    pub amps: Vec<f64>,
}

/// Two-mode density matrix `Σ_c w_c |ψ_c⟩⟨ψ_c|` truncated to `cutoff` levels
/// per mode.
#[derive(Debug, Clone)]
pub struct TwoModeState {
    cutoff: usize,
    components: Vec<Component>,
    trace_deficit: f64,
}

impl TwoModeState {
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// `1 − Tr ρ`: probability lost to the truncation.
    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    pub fn trace(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * c.amps.iter().map(|a| a * a).sum::<f64>())
            .sum()
    }

    fn check_budget(self) -> Result<Self> {
        if self.trace_deficit > TRACE_BUDGET {
            return Err(Error::NotConverged(format!(
                "cutoff {} leaves trace deficit {:e}",
                self.cutoff, self.trace_deficit
            )));
        }
        Ok(self)
    }

    /// `Tr[ρ (A ⊗ B)]` for single-mode operators of size `cutoff`.
    pub fn expect_product(&self, a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
        assert_eq!(a.nrows(), self.cutoff);
        assert_eq!(b.nrows(), self.cutoff);
        let mut total = Complex64::new(0.0, 0.0);
        for c in &self.components {
            let (oa, ob) = (c.offset_a, c.offset_b);
            let mut acc = Complex64::new(0.0, 0.0);
            for (lp, &ap) in c.amps.iter().enumerate() {
                let col_a = a.column(oa + lp);
                let col_b = b.column(ob + lp);
                let mut inner = Complex64::new(0.0, 0.0);
                for (l, &al) in c.amps.iter().enumerate() {
                    inner += al * col_a[oa + l] * col_b[ob + l];
                }
                acc += ap * inner;
            }
            total += c.weight * acc;
        }
        total
    }

    /// Photon-number distribution of one mode. The reduced states are
    /// diagonal because every component has a fixed photon difference.
    pub fn reduced_diagonal(&self, party: Party) -> Vec<f64> {
        let mut p = vec![0.0; self.cutoff];
        for c in &self.components {
            let off = match party {
                Party::A => c.offset_a,
                Party::B => c.offset_b,
            };
            for (l, a) in c.amps.iter().enumerate() {
                p[off + l] += c.weight * a * a;
            }
        }
        p
    }

    /// `Tr[ρ_party X]` for a single-mode operator `X`.
    pub fn expect_single(&self, party: Party, x: &DMatrix<Complex64>) -> Complex64 {
        self.reduced_diagonal(party).iter().enumerate().map(|(n, p)| *p * x[(n, n)]).sum()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        let mut bands: BTreeMap<(usize, usize), Vec<&Component>> = BTreeMap::new();
        for c in &self.components {
            bands.entry((c.offset_a, c.offset_b)).or_default().push(c);
        }
        let mut total = 0.0;
        for members in bands.values() {
            for x in members {
                for y in members {
                    let overlap: f64 = x.amps.iter().zip(&y.amps).map(|(a, b)| a * b).sum();
                    total += x.weight * y.weight * overlap * overlap;
                }
            }
        }
        total
    }

    /// Covariance matrix in `(x_a, p_a, x_b, p_b)` order, from Fock-basis
    /// moments.
    pub fn covariance(&self) -> Mat4 {
        let n = self.cutoff;
        // Build the quadratures two levels larger so their products are
        // exact on the retained block.
        let (xw, pw) = quadrature_operators(n + 2);
        let trunc = |m: DMatrix<Complex64>| m.view((0, 0), (n, n)).into_owned();
        let x = trunc(xw.clone());
        let p = trunc(pw.clone());
        let xx = trunc(&xw * &xw);
        let pp = trunc(&pw * &pw);
        let sym = trunc((&xw * &pw + &pw * &xw) * Complex64::new(0.5, 0.0));

        let single = [&x, &p];
        let mean = |party: Party, k: usize| self.expect_single(party, single[k]).re;
        let means = [mean(Party::A, 0), mean(Party::A, 1), mean(Party::B, 0), mean(Party::B, 1)];
        let local = |party: Party| {
            [
                [self.expect_single(party, &xx).re, self.expect_single(party, &sym).re],
                [self.expect_single(party, &sym).re, self.expect_single(party, &pp).re],
            ]
        };
        let (la, lb) = (local(Party::A), local(Party::B));
        let mut sigma = [[0.0; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                sigma[i][j] = la[i][j] - means[i] * means[j];
                sigma[i + 2][j + 2] = lb[i][j] - means[i + 2] * means[j + 2];
                let cross = self.expect_product(single[i], single[j]).re - means[i] * means[j + 2];
                sigma[i][j + 2] = cross;
                sigma[j + 2][i] = cross;
            }
        }
        sigma
    }

    /// The full `N²×N²` density matrix. Declines above a cutoff of 40.
    pub fn to_dense(&self) -> Result<FockOperator> {
        let n = self.cutoff;
        if n > DENSE_LIMIT {
            return Err(Error::InvalidParameter(format!(
                "dense two-mode matrix limited to cutoff {DENSE_LIMIT}, got {n}"
            )));
        }
        let mut rho = DMatrix::<f64>::zeros(n * n, n * n);
        for c in &self.components {
            let idx = |l: usize| (c.offset_a + l) * n + c.offset_b + l;
            for (i, ai) in c.amps.iter().enumerate() {
                for (j, aj) in c.amps.iter().enumerate() {
                    rho[(idx(i), idx(j))] += c.weight * ai * aj;
                }
            }
        }
        Ok(FockOperator::from_real(n, 2, &rho))
    }
}

/// Two-mode squeezed vacuum from its Schmidt form
/// `sech r Σ_n tanhⁿ r |n, n⟩`.
pub fn tmsv_fock(r: f64, cutoff: usize) -> Result<TwoModeState> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::UnphysicalSpec(format!("r = {r} must be finite and >= 0")));
    }
    let t = r.tanh();
    let amps = (0..cutoff).map(|k| t.powi(k as i32) / r.cosh()).collect();
    TwoModeState {
        cutoff,
        components: vec![Component { weight: 1.0, offset_a: 0, offset_b: 0, amps }],
        trace_deficit: t.powi(2 * cutoff as i32),
    }
    .check_budget()
}

/// Generator of `S₂(r) = exp[r(a†b† − ab)]` on the band `|d + l, l⟩`.
fn band_generator(r: f64, d: usize, len: usize) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(len, len);
    for l in 0..len.saturating_sub(1) {
        let c = r * (((d + l + 1) * (l + 1)) as f64).sqrt();
        g[(l + 1, l)] = c;
        g[(l, l + 1)] = -c;
    }
    g
}

fn thermal_weights(nu: f64, cutoff: usize) -> Vec<f64> {
    let x = (nu - 1.0) / (nu + 1.0);
    let mut out = Vec::new();
    let mut p = 1.0 - x;
    for _ in 0..cutoff {
        out.push(p);
        p *= x;
        if p == 0.0 {
            break;
        }
    }
    out
}

/// Pairs whose product weight falls below this are dropped; the loss shows
/// up in the trace deficit.
const PAIR_WEIGHT_FLOOR: f64 = 1e-20;

/// `S₂(r)(ρ_th(ν₁) ⊗ ρ_th(ν₂))S₂(r)†`, with `S₂` exponentiated separately on
/// each photon-difference band.
pub fn tmsts_fock(spec: TmstsSpec, cutoff: usize) -> Result<TwoModeState> {
    spec.validate()?;
    let pa = thermal_weights(spec.nu1, cutoff);
    let pb = thermal_weights(spec.nu2, cutoff);
    // Thermal level pairs (j, k, weight) grouped by photon difference j − k.
    let mut pairs: BTreeMap<i64, Vec<(usize, usize, f64)>> = BTreeMap::new();
    for (j, wa) in pa.iter().enumerate() {
        for (k, wb) in pb.iter().enumerate() {
            let w = wa * wb;
            if w >= PAIR_WEIGHT_FLOOR {
                pairs.entry(j as i64 - k as i64).or_default().push((j, k, w));
            }
        }
    }
    let band_len = cutoff + 40;
    let bands: Vec<_> = pairs.into_iter().collect();
    let components: Vec<Component> = bands
        .par_iter()
        .map(|(d, members)| {
            let ad = d.unsigned_abs() as usize;
            let u = band_generator(spec.r, ad, band_len).exp();
            let keep = cutoff.saturating_sub(ad);
            members
                .iter()
                .map(|&(j, k, w)| {
                    let (offset_a, offset_b, l0) = if *d >= 0 { (ad, 0, k) } else { (0, ad, j) };
                    let amps = (0..keep).map(|l| u[(l, l0)]).collect();
                    Component { weight: w, offset_a, offset_b, amps }
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let mut state = TwoModeState { cutoff, components, trace_deficit: 0.0 };
    state.trace_deficit = (1.0 - state.trace()).max(0.0);
    state.check_budget()
}
