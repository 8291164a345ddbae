//! Generalized CHSH functional for local squeezing + displacement settings.
//!
//! Each party measures `O = (1−s) Π + s` (for `−1 ≤ s ≤ 0`) or `O = 2Π − 1`
//! (for `s < −1`), where `Π` has eigenvalues `((s+1)/(s−1))ⁿ` on squeezed
//! displaced number states. Expectations of `Π` are converted from SEQPD
//! values through `⟨Π⟩ = π(1−s′)/2 · W(s′)` and
//! `⟨Π_A ⊗ Π_B⟩ = π²(1−s′)²/4 · W(s′)`.
//!
//! A detector of efficiency `η` turns the outcome weights `cⁿ` into
//! `(1 − η + ηc)ⁿ`, which are exactly the weights of order
//! `s′ = −(1 − s − η)/η`. The lossy measurement is therefore `Π(s′)`, and the
//! outcome assignment (the `s` in the coefficients of `O`) is unchanged.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{
    self, check_compression, CovarianceMatrix4, LocalSqueeze, OrderParameter, Party, PhasePoint,
};
use crate::linalg;

/// One party's local operation: compression factor and displacement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub u: f64,
    pub alpha: Complex64,
}

impl MeasurementSetting {
    pub fn new(u: f64, alpha: Complex64) -> Result<Self> {
        let setting = Self { u, alpha };
        setting.validate()?;
        Ok(setting)
    }

    pub fn real(u: f64, alpha: f64) -> Result<Self> {
        Self::new(u, Complex64::new(alpha, 0.0))
    }

    pub fn validate(&self) -> Result<()> {
        check_compression("u", self.u)?;
        if !(self.alpha.re.is_finite() && self.alpha.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite displacement".into()));
        }
        Ok(())
    }
}

/// The four CHSH settings: `a`, `a′` for Alice, `b`, `b′` for Bob.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettingsQuad {
    pub a: MeasurementSetting,
    pub a_prime: MeasurementSetting,
    pub b: MeasurementSetting,
    pub b_prime: MeasurementSetting,
}

impl SettingsQuad {
    pub fn new(
        a: MeasurementSetting,
        a_prime: MeasurementSetting,
        b: MeasurementSetting,
        b_prime: MeasurementSetting,
    ) -> Self {
        Self { a, a_prime, b, b_prime }
    }

    /// Settings with every displacement zero.
    pub fn squeeze_only(u: f64, u_prime: f64, v: f64, v_prime: f64) -> Result<Self> {
        Ok(Self {
            a: MeasurementSetting::real(u, 0.0)?,
            a_prime: MeasurementSetting::real(u_prime, 0.0)?,
            b: MeasurementSetting::real(v, 0.0)?,
            b_prime: MeasurementSetting::real(v_prime, 0.0)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.a.validate()?;
        self.a_prime.validate()?;
        self.b.validate()?;
        self.b_prime.validate()
    }

    /// Exchange Alice's and Bob's settings.
    pub fn swapped(&self) -> Self {
        Self {
            a: self.b,
            a_prime: self.b_prime,
            b: self.a,
            b_prime: self.a_prime,
        }
    }
}

/// Common detector efficiency for both parties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct DetectorModel {
    eta: f64,
}

impl DetectorModel {
    pub const PERFECT: Self = Self { eta: 1.0 };

    pub fn new(eta: f64) -> Result<Self> {
        if eta > 0.0 && eta <= 1.0 {
            Ok(Self { eta })
        } else {
            Err(Error::InvalidParameter(format!(
                "detector efficiency eta = {eta} must lie in (0, 1]"
            )))
        }
    }

    pub fn eta(self) -> f64 {
        self.eta
    }
}

impl TryFrom<f64> for DetectorModel {
    type Error = Error;
    fn try_from(eta: f64) -> Result<Self> {
        Self::new(eta)
    }
}

impl From<DetectorModel> for f64 {
    fn from(d: DetectorModel) -> f64 {
        d.eta
    }
}

/// `s′ = −(1 − s − η)/η`; exactly `s` at `η = 1`.
pub fn efficiency_map(s: OrderParameter, det: DetectorModel) -> OrderParameter {
    let eta = det.eta();
    if eta == 1.0 {
        return s;
    }
    let mapped = -(1.0 - s.value() - eta) / eta;
    OrderParameter::new(mapped).expect("s' <= s <= 0 for eta in (0, 1]")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `−1 ≤ s ≤ 0`: `O = (1−s)Π + s`.
    HighS,
    /// `s < −1`: `O = 2Π − 1`.
    LowS,
}

impl Branch {
    pub fn for_order(s: OrderParameter) -> Self {
        if s.value() >= -1.0 {
            Branch::HighS
        } else {
            Branch::LowS
        }
    }
}

/// SEQPD values entering one CHSH evaluation, all at order `s′`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellTerms {
    /// `W(χ_a,χ_b)`, `W(χ_a,χ_b′)`, `W(χ_a′,χ_b)`, `W(χ_a′,χ_b′)`.
    pub joint: [f64; 4],
    pub single_a: f64,
    pub single_b: f64,
    /// The CHSH combination before taking the absolute value.
    pub signed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellResult {
    pub value: f64,
    pub branch: Branch,
    pub s_prime: f64,
    pub terms: BellTerms,
}

impl BellTerms {
    /// `𝒞 = W(a,b) + W(a,b′) + W(a′,b) − W(a′,b′)`.
    pub fn combination(&self) -> f64 {
        self.joint[0] + self.joint[1] + self.joint[2] - self.joint[3]
    }
}

/// Assemble `B` from expectation values of the projector-like operators.
///
/// `joint_pi` holds `⟨Π_A⊗Π_B⟩` in the same order as [`BellTerms::joint`];
/// `pi_a`, `pi_b` are `⟨Π_A(χ_a)⟩`, `⟨Π_B(χ_b)⟩`. Shared with the Fock oracle.
pub fn combine_expectations(s: OrderParameter, joint_pi: [f64; 4], pi_a: f64, pi_b: f64) -> f64 {
    let c = joint_pi[0] + joint_pi[1] + joint_pi[2] - joint_pi[3];
    match Branch::for_order(s) {
        Branch::HighS => {
            let s = s.value();
            let k = 1.0 - s;
            k * k * c + 2.0 * s * k * (pi_a + pi_b) + 2.0 * s * s
        }
        Branch::LowS => 4.0 * c - 4.0 * (pi_a + pi_b) + 2.0,
    }
}

fn result_from_terms(
    s: OrderParameter,
    s_prime: OrderParameter,
    joint: [f64; 4],
    single_a: f64,
    single_b: f64,
) -> BellResult {
    let k = PI * (1.0 - s_prime.value()) / 2.0;
    let kk = k * k;
    let joint_pi = joint.map(|w| kk * w);
    let signed = combine_expectations(s, joint_pi, k * single_a, k * single_b);
    BellResult {
        value: signed.abs(),
        branch: Branch::for_order(s),
        s_prime: s_prime.value(),
        terms: BellTerms { joint, single_a, single_b, signed },
    }
}

/// `B_CHSH` for arbitrary squeezing and displacement settings.
pub fn chsh_value(
    sigma: &CovarianceMatrix4,
    q: &SettingsQuad,
    s: OrderParameter,
    det: DetectorModel,
) -> Result<BellResult> {
    q.validate()?;
    let sp = efficiency_map(s, det);
    let pair = |x: &MeasurementSetting, y: &MeasurementSetting| {
        gaussian::seqpd_two_mode(
            sigma,
            LocalSqueeze { u: x.u, v: y.u },
            PhasePoint::new(x.alpha, y.alpha),
            sp,
        )
    };
    let joint = [
        pair(&q.a, &q.b)?,
        pair(&q.a, &q.b_prime)?,
        pair(&q.a_prime, &q.b)?,
        pair(&q.a_prime, &q.b_prime)?,
    ];
    let single_a = gaussian::seqpd_single_mode(sigma, Party::A, q.a.u, q.a.alpha, sp)?;
    let single_b = gaussian::seqpd_single_mode(sigma, Party::B, q.b.u, q.b.alpha, sp)?;
    Ok(result_from_terms(s, sp, joint, single_a, single_b))
}

/// Squeezing-only settings (all displacements zero): every SEQPD sits at the
/// origin and reduces to a determinant.
pub fn chsh_squeeze_only(
    sigma: &CovarianceMatrix4,
    u: f64,
    u_prime: f64,
    v: f64,
    v_prime: f64,
    s: OrderParameter,
    det: DetectorModel,
) -> Result<BellResult> {
    for (name, x) in [("u", u), ("u'", u_prime), ("v", v), ("v'", v_prime)] {
        check_compression(name, x)?;
    }
    let sp = efficiency_map(s, det);
    let origin = |x: f64, y: f64| gaussian::seqpd_origin(sigma, LocalSqueeze { u: x, v: y }, sp);
    let joint = [origin(u, v)?, origin(u, v_prime)?, origin(u_prime, v)?, origin(u_prime, v_prime)?];
    let t = sp.smoothing();
    let single = |block: [[f64; 2]; 2], x: f64| -> Result<f64> {
        // diag(√x, 1/√x) A diag(√x, 1/√x) + |s′| I; for A = pI this is
        // (px + |s′|)(p/x + |s′|).
        let m = [
            [block[0][0] * x + t, block[0][1]],
            [block[1][0], block[1][1] / x + t],
        ];
        let d = linalg::det2(&m);
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::IllConditioned(f64::INFINITY));
        }
        Ok(2.0 / (PI * d.sqrt()))
    };
    let single_a = single(sigma.block(Party::A), u)?;
    let single_b = single(sigma.block(Party::B), v)?;
    Ok(result_from_terms(s, sp, joint, single_a, single_b))
}
