//! Zero-mean two-mode Gaussian states and their squeezing-extended
//! quasi-probability distributions.
//!
//! Quadrature convention: the vacuum has covariance `I₄`, and a phase-space
//! point `(α, β)` maps to `X = [2 Re α, 2 Im α, 2 Re β, 2 Im β]`. With this
//! choice the vacuum Wigner function is `(2/π)² exp(−2(|α|² + |β|²))`.
//!
//! A distribution at order `s ≤ 0` after local squeezing `S` is the Wigner
//! Gaussian with covariance `S σ Sᵀ + |s| I`; the squeezing acts on the state
//! first and the `|s|` smoothing is added afterwards, so for `s ≠ 0` this is
//! not a change of phase-space variables.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat2, Mat4};

/// Tolerance on the smallest symplectic eigenvalue (uncertainty relation).
pub const PHYSICALITY_TOL: f64 = 1e-10;

/// Covariance matrix of a zero-mean two-mode Gaussian state, ordered
/// `(x_A, p_A, x_B, p_B)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceMatrix4 {
    entries: Mat4,
}

impl CovarianceMatrix4 {
    /// Validates symmetry, positive definiteness and the uncertainty relation.
    pub fn new(entries: Mat4) -> Result<Self> {
        if entries.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite covariance entry".into()));
        }
        for i in 0..4 {
            for j in i + 1..4 {
                let diff = (entries[i][j] - entries[j][i]).abs();
                if diff != 0.0 {
                    return Err(Error::NotSymmetric { row: i, col: j, diff });
                }
            }
        }
        let cov = Self { entries };
        if !cov.is_positive_definite() {
            return Err(Error::NotPositiveDefinite);
        }
        if !cov.satisfies_uncertainty() {
            return Err(Error::Unphysical(cov.symplectic_eigenvalues().0));
        }
        Ok(cov)
    }

    /// Skips every validity check. Intended for tests that need unphysical
    /// or degenerate matrices.
    pub fn new_unchecked(entries: Mat4) -> Self {
        Self { entries }
    }

    /// Standard form with blocks `p I`, `q I` and couplings `diag(m, n)`.
    pub fn standard_form(p: f64, q: f64, m: f64, n: f64) -> Result<Self> {
        Self::new([
            [p, 0.0, m, 0.0],
            [0.0, p, 0.0, n],
            [m, 0.0, q, 0.0],
            [0.0, n, 0.0, q],
        ])
    }

    pub fn vacuum() -> Self {
        Self { entries: linalg::IDENTITY4 }
    }

    pub fn entries(&self) -> &Mat4 {
        &self.entries
    }

    pub fn det(&self) -> f64 {
        linalg::det4(&self.entries)
    }

    /// 2×2 diagonal block belonging to one party.
    pub fn block(&self, party: Party) -> Mat2 {
        let o = party.offset();
        [
            [self.entries[o][o], self.entries[o][o + 1]],
            [self.entries[o + 1][o], self.entries[o + 1][o + 1]],
        ]
    }

    fn seralian(&self) -> f64 {
        linalg::det2(&self.block(Party::A))
            + linalg::det2(&self.block(Party::B))
            + 2.0 * linalg::det2(&self.coupling())
    }

    /// `ν₋ ≥ 1` and `ν₊ ≥ 1`, tested as `det σ ≥ 1` and
    /// `(1 − ν₋²)(1 − ν₊²) = 1 − Δ + det σ ≥ 0`. Working with the invariants
    /// directly avoids the square root of a near-zero discriminant, which
    /// loses half the digits when the two eigenvalues are close (pure
    /// states).
    fn satisfies_uncertainty(&self) -> bool {
        let delta = self.seralian();
        let det = self.det();
        let tol = PHYSICALITY_TOL * delta.abs().max(1.0);
        det >= 1.0 - tol && 1.0 - delta + det >= -tol
    }

    fn coupling(&self) -> Mat2 {
        [
            [self.entries[0][2], self.entries[0][3]],
            [self.entries[1][2], self.entries[1][3]],
        ]
    }

    fn is_positive_definite(&self) -> bool {
        // Sylvester: all leading principal minors positive.
        let m = &self.entries;
        let d1 = m[0][0];
        let d2 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let d3 = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        d1 > 0.0 && d2 > 0.0 && d3 > 0.0 && self.det() > 0.0
    }

    /// `(ν₋, ν₊)`, the moduli of the eigenvalues of `iΩσ`, from the two-mode
    /// invariants `Δ = det A + det B + 2 det C` and `det σ`.
    pub fn symplectic_eigenvalues(&self) -> (f64, f64) {
        let delta = self.seralian();
        let det = self.det();
        let disc = (delta * delta - 4.0 * det).max(0.0).sqrt();
        let plus_sq = (delta + disc) / 2.0;
        // ν₋² ν₊² = det σ avoids the cancellation in (Δ − √…)/2.
        let minus_sq = if plus_sq > 0.0 { det / plus_sq } else { 0.0 };
        (minus_sq.max(0.0).sqrt(), plus_sq.max(0.0).sqrt())
    }

    pub fn is_physical(&self) -> bool {
        self.is_positive_definite() && self.satisfies_uncertainty()
    }

    /// Covariance after a symplectic (or any linear) map `S`: `S σ Sᵀ`.
    pub fn transformed(&self, s: &Mat4) -> Mat4 {
        linalg::congruence4(s, &self.entries)
    }
}

/// Two-mode squeezed thermal state generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TmstsSpec {
    pub nu1: f64,
    pub nu2: f64,
    pub r: f64,
}

impl TmstsSpec {
    pub fn new(nu1: f64, nu2: f64, r: f64) -> Result<Self> {
        let spec = Self { nu1, nu2, r };
        spec.validate()?;
        Ok(spec)
    }

    pub fn tmsv(r: f64) -> Result<Self> {
        Self::new(1.0, 1.0, r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu1.is_finite() && self.nu2.is_finite() && self.r.is_finite()) {
            return Err(Error::UnphysicalSpec("non-finite parameter".into()));
        }
        if self.nu1 < 1.0 || self.nu2 < 1.0 {
            return Err(Error::UnphysicalSpec(format!(
                "thermal parameters must be >= 1 (nu1 = {}, nu2 = {})",
                self.nu1, self.nu2
            )));
        }
        if self.r < 0.0 {
            return Err(Error::UnphysicalSpec(format!("r = {} must be >= 0", self.r)));
        }
        Ok(())
    }

    /// Standard-form coefficients `(p, q, m, n)`.
    pub fn coefficients(&self) -> (f64, f64, f64, f64) {
        let ch2 = self.r.cosh().powi(2);
        let sh2 = self.r.sinh().powi(2);
        let p = self.nu1 * ch2 + self.nu2 * sh2;
        let q = self.nu1 * sh2 + self.nu2 * ch2;
        let m = (self.nu1 + self.nu2) * (2.0 * self.r).sinh() / 2.0;
        (p, q, m, -m)
    }
}

pub fn make_tmsts(spec: TmstsSpec) -> Result<CovarianceMatrix4> {
    spec.validate()?;
    let (p, q, m, n) = spec.coefficients();
    CovarianceMatrix4::standard_form(p, q, m, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    A,
    B,
}

impl Party {
    fn offset(self) -> usize {
        match self {
            Party::A => 0,
            Party::B => 2,
        }
    }
}

/// Displacements for Alice (`alpha`) and Bob (`beta`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhasePoint {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl PhasePoint {
    pub fn new(alpha: Complex64, beta: Complex64) -> Self {
        Self { alpha, beta }
    }

    pub fn origin() -> Self {
        Self::default()
    }

    pub fn quadratures(&self) -> [f64; 4] {
        [
            2.0 * self.alpha.re,
            2.0 * self.alpha.im,
            2.0 * self.beta.re,
            2.0 * self.beta.im,
        ]
    }

    fn validate(&self) -> Result<()> {
        let finite = |z: Complex64| z.re.is_finite() && z.im.is_finite();
        if finite(self.alpha) && finite(self.beta) {
            Ok(())
        } else {
            Err(Error::InvalidParameter("non-finite displacement".into()))
        }
    }
}

/// Local compression factors `u = e^{2ξ_a}` and `v = e^{2ξ_b}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalSqueeze {
    pub u: f64,
    pub v: f64,
}

impl LocalSqueeze {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        check_compression("u", u)?;
        check_compression("v", v)?;
        Ok(Self { u, v })
    }

    pub fn identity() -> Self {
        Self { u: 1.0, v: 1.0 }
    }

    /// From squeezing parameters `ξ_a`, `ξ_b`.
    pub fn from_xi(xi_a: f64, xi_b: f64) -> Result<Self> {
        Self::new((2.0 * xi_a).exp(), (2.0 * xi_b).exp())
    }

    fn diagonal(&self) -> [f64; 4] {
        let (su, sv) = (self.u.sqrt(), self.v.sqrt());
        [su, 1.0 / su, sv, 1.0 / sv]
    }
}

pub(crate) fn check_compression(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "compression factor {name} = {value} must be positive and finite"
        )))
    }
}

/// Order parameter `s ≤ 0` (0: Wigner, −1: Husimi Q).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct OrderParameter(f64);

impl OrderParameter {
    pub const WIGNER: Self = Self(0.0);
    pub const HUSIMI: Self = Self(-1.0);

    pub fn new(s: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::InvalidParameter(format!("order parameter s = {s}")));
        }
        if s > 0.0 {
            return Err(Error::PositiveOrder(s));
        }
        Ok(Self(s))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Smoothing variance `|s|` added to the covariance.
    pub fn smoothing(self) -> f64 {
        self.0.abs()
    }
}

impl TryFrom<f64> for OrderParameter {
    type Error = Error;
    fn try_from(s: f64) -> Result<Self> {
        Self::new(s)
    }
}

impl From<OrderParameter> for f64 {
    fn from(s: OrderParameter) -> f64 {
        s.0
    }
}

/// `S_uv = diag(√u, 1/√u, √v, 1/√v)`.
pub fn symplectic_squeeze(sq: LocalSqueeze) -> Result<Mat4> {
    check_compression("u", sq.u)?;
    check_compression("v", sq.v)?;
    let d = sq.diagonal();
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        m[i][i] = d[i];
    }
    Ok(m)
}

/// Local phase-space rotations, one 2×2 block per party.
pub fn symplectic_rotation(theta_a: f64, theta_b: f64) -> Mat4 {
    let (sa, ca) = theta_a.sin_cos();
    let (sb, cb) = theta_b.sin_cos();
    [
        [ca, -sa, 0.0, 0.0],
        [sa, ca, 0.0, 0.0],
        [0.0, 0.0, cb, -sb],
        [0.0, 0.0, sb, cb],
    ]
}

/// Gaussian `(4/π²) det(M)^{-1/2} exp(−½ Xᵀ M⁻¹ X)` for an already smoothed
/// covariance `M`.
fn gaussian4(m: &Mat4, x: &[f64; 4]) -> Result<f64> {
    let (inv, det) = linalg::inv4(m).ok_or(Error::IllConditioned(f64::INFINITY))?;
    if det <= 0.0 {
        return Err(Error::IllConditioned(f64::INFINITY));
    }
    let cond = linalg::condition4(m, &inv);
    if cond > linalg::CONDITION_LIMIT {
        return Err(Error::IllConditioned(cond));
    }
    let norm = 4.0 / (PI * PI * det.sqrt());
    Ok(norm * (-0.5 * linalg::quad_form4(&inv, x)).exp())
}

/// Two-mode SEQPD `W(u; v; α; β; s)`.
pub fn seqpd_two_mode(
    sigma: &CovarianceMatrix4,
    sq: LocalSqueeze,
    pt: PhasePoint,
    s: OrderParameter,
) -> Result<f64> {
    pt.validate()?;
    let smoothed = smoothed_covariance(sigma, sq, s)?;
    gaussian4(&smoothed, &pt.quadratures())
}

/// `σ_Es = S_uv σ S_uvᵀ + |s| I₄`.
pub fn smoothed_covariance(
    sigma: &CovarianceMatrix4,
    sq: LocalSqueeze,
    s: OrderParameter,
) -> Result<Mat4> {
    check_compression("u", sq.u)?;
    check_compression("v", sq.v)?;
    let squeezed = linalg::diag_congruence4(&sq.diagonal(), sigma.entries());
    Ok(linalg::add_scaled_identity4(&squeezed, s.smoothing()))
}

/// Two-mode SEQPD with an arbitrary local symplectic map in place of the
/// diagonal squeezer.
pub fn seqpd_two_mode_with(
    sigma: &CovarianceMatrix4,
    transform: &Mat4,
    pt: PhasePoint,
    s: OrderParameter,
) -> Result<f64> {
    pt.validate()?;
    let smoothed = linalg::add_scaled_identity4(&sigma.transformed(transform), s.smoothing());
    gaussian4(&smoothed, &pt.quadratures())
}

/// Single-mode SEQPD of one party's reduced state.
pub fn seqpd_single_mode(
    sigma: &CovarianceMatrix4,
    party: Party,
    u: f64,
    alpha: Complex64,
    s: OrderParameter,
) -> Result<f64> {
    check_compression("u", u)?;
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(Error::InvalidParameter("non-finite displacement".into()));
    }
    let block = sigma.block(party);
    let (su, isu) = (u.sqrt(), 1.0 / u.sqrt());
    let d = [su, isu];
    let t = s.smoothing();
    let m: Mat2 = [
        [block[0][0] * d[0] * d[0] + t, block[0][1] * d[0] * d[1]],
        [block[1][0] * d[1] * d[0], block[1][1] * d[1] * d[1] + t],
    ];
    let inv = linalg::inv2(&m).ok_or(Error::IllConditioned(f64::INFINITY))?;
    let det = linalg::det2(&m);
    if det <= 0.0 {
        return Err(Error::IllConditioned(f64::INFINITY));
    }
    let cond = linalg::condition2(&m, &inv);
    if cond > linalg::CONDITION_LIMIT {
        return Err(Error::IllConditioned(cond));
    }
    let x = [2.0 * alpha.re, 2.0 * alpha.im];
    Ok(2.0 / (PI * det.sqrt()) * (-0.5 * linalg::quad_form2(&inv, &x)).exp())
}

/// SEQPD at the phase-space origin: `4 / (π² √det σ_uvs)`.
pub fn seqpd_origin(sigma: &CovarianceMatrix4, sq: LocalSqueeze, s: OrderParameter) -> Result<f64> {
    let smoothed = smoothed_covariance(sigma, sq, s)?;
    origin_value(&smoothed)
}

pub(crate) fn origin_value(smoothed: &Mat4) -> Result<f64> {
    let det = linalg::det4(smoothed);
    if det <= 0.0 || !det.is_finite() {
        return Err(Error::IllConditioned(f64::INFINITY));
    }
    Ok(4.0 / (PI * PI * det.sqrt()))
}

/// Global purity `μ = 1/√det σ`.
pub fn purity(sigma: &CovarianceMatrix4) -> f64 {
    1.0 / sigma.det().sqrt()
}
