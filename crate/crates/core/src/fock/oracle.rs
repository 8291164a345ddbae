use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    pi_operator, tmsts_fock, tmsv_fock, PiOperator, TwoModeState, CONVERGENCE_TOL,
    DEFAULT_TWO_MODE_CUTOFF, MAX_CUTOFF, MAX_NU, MAX_R,
};
use crate::bell::{combine_expectations, efficiency_map, DetectorModel, MeasurementSetting, SettingsQuad};
use crate::error::{Error, Result};
use crate::gaussian::{
    make_tmsts, seqpd_single_mode, seqpd_two_mode, LocalSqueeze, OrderParameter, Party, PhasePoint,
    TmstsSpec,
};

/// An expectation value that survived a cutoff doubling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Converged {
    pub value: f64,
    /// Cutoff of the reported value.
    pub cutoff: usize,
    /// `|value(N) − value(N/2)|`.
    pub change: f64,
    /// Guard-band weight of the measurement unitaries, averaged over the
    /// state's photon-number distribution; the larger party is reported.
    pub leakage: f64,
}

/// Fock-space evaluator for one TMSTS, caching the state at each cutoff.
#[derive(Debug)]
pub struct Oracle {
    spec: TmstsSpec,
    states: Mutex<BTreeMap<usize, Arc<TwoModeState>>>,
}

impl Oracle {
    /// Declines states outside `ν ≤ 1.5`, `r ≤ 1.2`, where the required
    /// cutoff grows past what the oracle can verify.
    pub fn new(spec: TmstsSpec) -> Result<Self> {
        spec.validate()?;
        if spec.nu1 > MAX_NU || spec.nu2 > MAX_NU || spec.r > MAX_R {
            return Err(Error::OutsideEnvelope(format!(
                "oracle covers nu <= {MAX_NU} and r <= {MAX_R}; got nu1 = {}, nu2 = {}, r = {}",
                spec.nu1, spec.nu2, spec.r
            )));
        }
        Ok(Self { spec, states: Mutex::new(BTreeMap::new()) })
    }

    pub fn spec(&self) -> TmstsSpec {
        self.spec
    }

    /// The state at cutoff `n`, built on first use.
    pub fn state(&self, n: usize) -> Result<Arc<TwoModeState>> {
        if let Some(s) = self.states.lock().unwrap().get(&n) {
            return Ok(s.clone());
        }
        let built = if self.spec.nu1 == 1.0 && self.spec.nu2 == 1.0 {
            tmsv_fock(self.spec.r, n)?
        } else {
            tmsts_fock(self.spec, n)?
        };
        let built = Arc::new(built);
        self.states.lock().unwrap().insert(n, built.clone());
        Ok(built)
    }

    /// Smallest cutoff in the doubling ladder whose trace deficit is within
    /// budget.
    fn first_cutoff(&self) -> Result<usize> {
        let mut n = DEFAULT_TWO_MODE_CUTOFF;
        loop {
            match self.state(n) {
                Ok(_) => return Ok(n),
                Err(Error::NotConverged(_)) if 2 * n <= MAX_CUTOFF => n *= 2,
                Err(e) => return Err(e),
            }
        }
    }

    fn converge<F>(&self, eval: F) -> Result<Converged>
    where
        F: Fn(&TwoModeState) -> Result<(f64, f64)>,
    {
        let mut n = self.first_cutoff()?;
        let (mut prev, _) = eval(&*self.state(n)?)?;
        while 2 * n <= MAX_CUTOFF {
            n *= 2;
            let (value, leakage) = eval(&*self.state(n)?)?;
            let change = (value - prev).abs();
            if change < CONVERGENCE_TOL {
                return Ok(Converged { value, cutoff: n, change, leakage });
            }
            prev = value;
        }
        Err(Error::NotConverged(format!(
            "expectation still changing at cutoff {n} (limit {MAX_CUTOFF})"
        )))
    }

    /// `Tr[ρ Π_A(a) ⊗ Π_B(b)]`.
    pub fn pi_joint(
        &self,
        a: &MeasurementSetting,
        b: &MeasurementSetting,
        s: OrderParameter,
        det: DetectorModel,
    ) -> Result<Converged> {
        self.converge(|st| {
            let n = st.cutoff();
            let pa = pi_operator(a, s, det, n)?;
            let pb = pi_operator(b, s, det, n)?;
            let v = st.expect_product(pa.op.entries(), pb.op.entries()).re;
            let leak = weighted_leakage(st, Party::A, &pa).max(weighted_leakage(st, Party::B, &pb));
            Ok((v, leak))
        })
    }

    /// `Tr[ρ_party Π(x)]`.
    pub fn pi_single(
        &self,
        party: Party,
        x: &MeasurementSetting,
        s: OrderParameter,
        det: DetectorModel,
    ) -> Result<Converged> {
        self.converge(|st| {
            let pi = pi_operator(x, s, det, st.cutoff())?;
            Ok((st.expect_single(party, pi.op.entries()).re, weighted_leakage(st, party, &pi)))
        })
    }

    /// `B_CHSH` assembled from Fock-space expectations.
    pub fn chsh(&self, q: &SettingsQuad, s: OrderParameter, det: DetectorModel) -> Result<f64> {
        let j = |x: &MeasurementSetting, y: &MeasurementSetting| -> Result<f64> {
            Ok(self.pi_joint(x, y, s, det)?.value)
        };
        let joint = [j(&q.a, &q.b)?, j(&q.a, &q.b_prime)?, j(&q.a_prime, &q.b)?, j(&q.a_prime, &q.b_prime)?];
        let pa = self.pi_single(Party::A, &q.a, s, det)?.value;
        let pb = self.pi_single(Party::B, &q.b, s, det)?.value;
        Ok(combine_expectations(s, joint, pa, pb).abs())
    }
}

fn weighted_leakage(st: &TwoModeState, party: Party, pi: &PiOperator) -> f64 {
    st.reduced_diagonal(party).iter().zip(&pi.column_leakage).map(|(p, l)| p * l).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    Joint,
    SingleA,
    SingleB,
}

/// One oracle-versus-closed-form comparison. Values are expectations of the
/// measurement operators, i.e. SEQPDs times `(π(1−s′)/2)^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCase {
    pub state: TmstsSpec,
    pub kind: CaseKind,
    pub a: MeasurementSetting,
    pub b: MeasurementSetting,
    pub s: f64,
    pub eta: f64,
    pub oracle: f64,
    pub closed_form: f64,
    pub abs_error: f64,
    pub cutoff: usize,
    pub leakage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub max_abs_error: f64,
    /// Largest cutoff any case needed.
    pub cutoff_used: usize,
    pub max_leakage: f64,
    pub cases: Vec<OracleCase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteOptions {
    pub cases: usize,
    pub seed: u64,
    pub orders: Vec<f64>,
    pub eta: f64,
    /// Compressions are drawn log-uniformly from `[1/max, max]`.
    pub max_compression: f64,
    /// Displacements are drawn uniformly from the disc of this radius.
    pub max_displacement: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            cases: 200,
            seed: 0,
            orders: vec![0.0, -0.5, -1.0],
            eta: 1.0,
            max_compression: 4.0,
            max_displacement: 1.0,
        }
    }
}

struct Draw {
    state: usize,
    kind: CaseKind,
    a: MeasurementSetting,
    b: MeasurementSetting,
    s: OrderParameter,
}

fn draw_cases(n_states: usize, opts: &SuiteOptions) -> Result<Vec<Draw>> {
    if opts.orders.is_empty() {
        return Err(Error::InvalidParameter("no order parameters to test".into()));
    }
    if !(opts.max_compression >= 1.0 && opts.max_displacement >= 0.0) {
        return Err(Error::InvalidParameter("invalid sampling ranges".into()));
    }
    let orders = opts
        .orders
        .iter()
        .map(|&s| OrderParameter::new(s))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let ln_max = opts.max_compression.ln();
    let setting = |rng: &mut ChaCha8Rng| -> Result<MeasurementSetting> {
        let u = rng.gen_range(-ln_max..=ln_max).exp();
        let radius = opts.max_displacement * rng.gen::<f64>().sqrt();
        let phase = rng.gen_range(0.0..2.0 * PI);
        MeasurementSetting::new(u, Complex64::from_polar(radius, phase))
    };
    (0..opts.cases)
        .map(|i| {
            let kind = match i % 4 {
                1 => CaseKind::SingleA,
                3 => CaseKind::SingleB,
                _ => CaseKind::Joint,
            };
            let a = setting(&mut rng)?;
            let b = setting(&mut rng)?;
            let s = orders[rng.gen_range(0..orders.len())];
            Ok(Draw { state: i % n_states, kind, a, b, s })
        })
        .collect()
}

/// Randomized comparison of the closed-form SEQPDs against Fock-space
/// traces. States cycle through `states`; settings and orders are drawn from
/// `opts.seed`.
pub fn equivalence_suite(states: &[TmstsSpec], opts: &SuiteOptions) -> Result<OracleReport> {
    if states.is_empty() {
        return Err(Error::InvalidParameter("no states to test".into()));
    }
    let det = DetectorModel::new(opts.eta)?;
    let oracles = states.iter().map(|&s| Oracle::new(s)).collect::<Result<Vec<_>>>()?;
    let sigmas = states.iter().map(|&s| make_tmsts(s)).collect::<Result<Vec<_>>>()?;
    let draws = draw_cases(states.len(), opts)?;

    let cases = draws
        .par_iter()
        .map(|d| -> Result<OracleCase> {
            let oracle = &oracles[d.state];
            let sigma = &sigmas[d.state];
            let sp = efficiency_map(d.s, det);
            let k = PI * (1.0 - sp.value()) / 2.0;
            let (got, closed) = match d.kind {
                CaseKind::Joint => {
                    let w = seqpd_two_mode(
                        sigma,
                        LocalSqueeze::new(d.a.u, d.b.u)?,
                        PhasePoint::new(d.a.alpha, d.b.alpha),
                        sp,
                    )?;
                    (oracle.pi_joint(&d.a, &d.b, d.s, det)?, k * k * w)
                }
                CaseKind::SingleA => {
                    let w = seqpd_single_mode(sigma, Party::A, d.a.u, d.a.alpha, sp)?;
                    (oracle.pi_single(Party::A, &d.a, d.s, det)?, k * w)
                }
                CaseKind::SingleB => {
                    let w = seqpd_single_mode(sigma, Party::B, d.b.u, d.b.alpha, sp)?;
                    (oracle.pi_single(Party::B, &d.b, d.s, det)?, k * w)
                }
            };
            Ok(OracleCase {
                state: oracle.spec(),
                kind: d.kind,
                a: d.a,
                b: d.b,
                s: d.s.value(),
                eta: det.eta(),
                oracle: got.value,
                closed_form: closed,
                abs_error: (got.value - closed).abs(),
                cutoff: got.cutoff,
                leakage: got.leakage,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(OracleReport {
        max_abs_error: cases.iter().map(|c| c.abs_error).fold(0.0, f64::max),
        cutoff_used: cases.iter().map(|c| c.cutoff).max().unwrap_or(0),
        max_leakage: cases.iter().map(|c| c.leakage).fold(0.0, f64::max),
        cases,
    })
}
