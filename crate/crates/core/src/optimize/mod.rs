//! Multi-start simplex maximization of the CHSH functional and sweeps over
//! the state squeezing `r` or the detector efficiency `η`.
//!
//! Each scheme fixes a subset of the twelve setting coordinates (see
//! [`scheme::layout`]); compressions are searched as `ln u`. Restart points
//! come from a Halton sequence with a seeded random shift, so a run is fully
//! determined by the configuration. Restarts run in parallel and are merged
//! in start order.

pub mod scheme;
pub mod simplex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::{chsh_value, DetectorModel, SettingsQuad};
use crate::error::{Error, Result};
use crate::gaussian::{make_tmsts, CovarianceMatrix4, OrderParameter, TmstsSpec};

pub use scheme::{layout, params_from_settings, settings_from_params, FreeMask, Scheme, SchemeTag, PARAM_COUNT};
use simplex::{SimplexOptions, SimplexResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Simplex iterations per restart (the polishing passes get the same
    /// budget each).
    pub max_iterations: usize,
    pub x_tolerance: f64,
    pub f_tolerance: f64,
    pub seed: u64,
    /// Half-width of the search box for each real displacement component.
    pub displacement_box: f64,
    /// Half-width of the search box for `ln u`.
    pub log_compression_box: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iterations: 400,
            x_tolerance: 1e-8,
            f_tolerance: 1e-10,
            seed: 0,
            displacement_box: 3.0,
            log_compression_box: 2.0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("optimizer {name} = {v} must be positive")))
            }
        };
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("optimizer restarts must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("optimizer max_iterations must be positive".into()));
        }
        positive("x_tolerance", self.x_tolerance)?;
        positive("f_tolerance", self.f_tolerance)?;
        positive("displacement_box", self.displacement_box)?;
        positive("log_compression_box", self.log_compression_box)
    }

    fn half_width(&self, coord: usize) -> f64 {
        if coord >= layout::LN_U {
            self.log_compression_box
        } else {
            self.displacement_box
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub best_value: f64,
    pub best_settings: SettingsQuad,
    pub scheme: Scheme,
    /// Restarts whose final simplex met both tolerances.
    pub restarts_converged: usize,
    /// Restarts actually run, warm starts included.
    pub restarts: usize,
    pub evaluations: usize,
}

/// Extra simplex passes restarted from the incumbent after the first
/// converges; Nelder–Mead often stalls on a collapsed simplex.
const POLISH_PASSES: usize = 3;
const INITIAL_STEP: f64 = 0.1;

const PRIMES: [u32; PARAM_COUNT] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut factor = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % b) as f64 * factor;
        index /= b;
        factor *= inv;
    }
    out
}

/// Every other cold start is drawn from the box shrunk by this factor about
/// the origin, where optima with small displacements and mild compressions
/// live; lossy optima there have narrow basins.
const INNER_BOX: f64 = 0.25;

/// Cold-start points inside the box of the free coordinates.
fn cold_starts(free: &[usize], cfg: &OptimizerConfig) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let shift: Vec<f64> = free.iter().map(|_| rng.gen::<f64>()).collect();
    (0..cfg.restarts)
        .map(|i| {
            let scale = if i % 2 == 1 { INNER_BOX } else { 1.0 };
            free.iter()
                .enumerate()
                .map(|(k, &coord)| {
                    let h = (radical_inverse(i as u64 / 2 + 1, PRIMES[k]) + shift[k]).fract();
                    let w = scale * cfg.half_width(coord);
                    -w + 2.0 * w * h
                })
                .collect()
        })
        .collect()
}

struct Problem<'a> {
    sigma: &'a CovarianceMatrix4,
    free: Vec<usize>,
    s: OrderParameter,
    det: DetectorModel,
}

impl Problem<'_> {
    fn full(&self, x: &[f64]) -> [f64; PARAM_COUNT] {
        let mut p = [0.0; PARAM_COUNT];
        for (&coord, &v) in self.free.iter().zip(x) {
            p[coord] = v;
        }
        p
    }

    fn value(&self, x: &[f64]) -> f64 {
        let q = settings_from_params(&self.full(x));
        chsh_value(self.sigma, &q, self.s, self.det).map_or(f64::NAN, |b| b.value)
    }

    fn run(&self, start: &[f64], lo: &[f64], hi: &[f64], cfg: &OptimizerConfig) -> SimplexResult {
        let opts = SimplexOptions {
            max_iterations: cfg.max_iterations,
            x_tolerance: cfg.x_tolerance,
            f_tolerance: cfg.f_tolerance,
            initial_step: INITIAL_STEP,
        };
        let objective = |x: &[f64]| -self.value(x);
        let mut best = simplex::minimize(objective, start, lo, hi, &opts);
        let mut evaluations = best.evaluations;
        let polish = SimplexOptions { initial_step: INITIAL_STEP * 0.1, ..opts };
        for _ in 0..POLISH_PASSES {
            let next = simplex::minimize(objective, &best.x, lo, hi, &polish);
            evaluations += next.evaluations;
            let improvement = best.f - next.f;
            let converged = next.converged;
            if next.f <= best.f {
                best = SimplexResult { evaluations, ..next };
            }
            if improvement <= cfg.f_tolerance && converged {
                break;
            }
        }
        best.evaluations = evaluations;
        best
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Maximize `B_CHSH` over the free settings of `scheme`.
pub fn maximize_chsh(
    sigma: &CovarianceMatrix4,
    scheme: Scheme,
    s: OrderParameter,
    det: DetectorModel,
    cfg: &OptimizerConfig,
) -> Result<OptResult> {
    maximize_chsh_from(sigma, scheme, s, det, cfg, &[])
}

/// As [`maximize_chsh`], with `warm` settings added to the restart pool
/// (projected onto the scheme and the search box).
pub fn maximize_chsh_from(
    sigma: &CovarianceMatrix4,
    scheme: Scheme,
    s: OrderParameter,
    det: DetectorModel,
    cfg: &OptimizerConfig,
    warm: &[SettingsQuad],
) -> Result<OptResult> {
    cfg.validate()?;
    let free = scheme.free_indices();
    let problem = Problem { sigma, free, s, det };
    // Surface evaluator errors (bad state, bad s) before searching.
    chsh_value(sigma, &settings_from_params(&[0.0; PARAM_COUNT]), s, det)?;

    let lo: Vec<f64> = problem.free.iter().map(|&c| -cfg.half_width(c)).collect();
    let hi: Vec<f64> = problem.free.iter().map(|&c| cfg.half_width(c)).collect();

    let mut starts: Vec<Vec<f64>> = warm
        .iter()
        .map(|q| {
            let p = params_from_settings(q);
            problem
                .free
                .iter()
                .zip(lo.iter().zip(&hi))
                .map(|(&c, (&l, &h))| if p[c].is_finite() { p[c].clamp(l, h) } else { 0.0 })
                .collect()
        })
        .collect();
    starts.extend(cold_starts(&problem.free, cfg));

    let runs: Vec<SimplexResult> = starts
        .par_iter()
        .map(|x0| problem.run(x0, &lo, &hi, cfg))
        .collect();

    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    let restarts_converged = runs.iter().filter(|r| r.converged).count();
    let best = runs
        .iter()
        .filter(|r| r.f.is_finite())
        .min_by(|a, b| a.f.total_cmp(&b.f).then_with(|| lexicographic(&a.x, &b.x)))
        .ok_or_else(|| Error::NotConverged("every restart produced a non-finite objective".into()))?;

    let best_settings = settings_from_params(&problem.full(&best.x));
    let best_value = chsh_value(sigma, &best_settings, s, det)?.value;
    Ok(OptResult {
        best_value,
        best_settings,
        scheme,
        restarts_converged,
        restarts: runs.len(),
        evaluations,
    })
}

/// One grid point of a sweep. A failed point keeps its error so callers can
/// still emit a row for it.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub r: f64,
    pub eta: f64,
    pub outcome: Result<OptResult>,
}

impl SweepPoint {
    pub fn best_value(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|o| o.best_value)
    }
}

fn check_ascending(name: &str, grid: &[f64]) -> Result<()> {
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("{name} grid has non-finite entries")));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(format!("{name} grid must be sorted ascending")));
    }
    Ok(())
}

/// Sequential sweep over the state squeezing `r` of a TMSTS; each point's
/// restart pool includes the previous point's optimum.
pub fn sweep_r(
    nu1: f64,
    nu2: f64,
    r_grid: &[f64],
    scheme: Scheme,
    s: OrderParameter,
    det: DetectorModel,
    cfg: &OptimizerConfig,
) -> Result<Vec<SweepPoint>> {
    check_ascending("r", r_grid)?;
    cfg.validate()?;
    let mut out = Vec::with_capacity(r_grid.len());
    let mut warm: Option<SettingsQuad> = None;
    for &r in r_grid {
        let outcome = TmstsSpec::new(nu1, nu2, r)
            .and_then(make_tmsts)
            .and_then(|sigma| maximize_chsh_from(&sigma, scheme, s, det, cfg, warm.as_slice()));
        if let Ok(res) = &outcome {
            warm = Some(res.best_settings);
        }
        out.push(SweepPoint { r, eta: det.eta(), outcome });
    }
    Ok(out)
}

/// Sequential sweep over the detector efficiency for a fixed state.
pub fn sweep_eta(
    sigma: &CovarianceMatrix4,
    r: f64,
    eta_grid: &[f64],
    scheme: Scheme,
    s: OrderParameter,
    cfg: &OptimizerConfig,
) -> Result<Vec<SweepPoint>> {
    check_ascending("eta", eta_grid)?;
    cfg.validate()?;
    let mut out = Vec::with_capacity(eta_grid.len());
    let mut warm: Option<SettingsQuad> = None;
    for &eta in eta_grid {
        let outcome = DetectorModel::new(eta)
            .and_then(|det| maximize_chsh_from(sigma, scheme, s, det, cfg, warm.as_slice()));
        if let Ok(res) = &outcome {
            warm = Some(res.best_settings);
        }
        out.push(SweepPoint { r, eta, outcome });
    }
    Ok(out)
}

/// Smallest efficiency in `[eta_lo, eta_hi]` at which the best value over
/// an `r` sweep exceeds 2, located by bisection to `tolerance`.
///
/// Returns `None` when even `eta_hi` shows no violation.
#[allow(clippy::too_many_arguments)]
pub fn efficiency_threshold(
    nu1: f64,
    nu2: f64,
    r_grid: &[f64],
    scheme: Scheme,
    s: OrderParameter,
    cfg: &OptimizerConfig,
    (eta_lo, eta_hi): (f64, f64),
    tolerance: f64,
) -> Result<Option<f64>> {
    let violates = |eta: f64| -> Result<bool> {
        let det = DetectorModel::new(eta)?;
        let points = sweep_r(nu1, nu2, r_grid, scheme, s, det, cfg)?;
        let best = points
            .iter()
            .map(|p| p.outcome.as_ref().map(|o| o.best_value).map_err(Clone::clone))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(best > 2.0)
    };
    if !violates(eta_hi)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (eta_lo, eta_hi);
    if violates(lo)? {
        return Ok(Some(lo));
    }
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if violates(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmsv(r: f64) -> CovarianceMatrix4 {
        make_tmsts(TmstsSpec::tmsv(r).unwrap()).unwrap()
    }

    fn quick() -> OptimizerConfig {
        OptimizerConfig { restarts: 8, ..OptimizerConfig::default() }
    }

    #[test]
    fn radical_inverse_values() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - 7.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn cold_starts_fill_box() {
        let cfg = OptimizerConfig::default();
        let free = Scheme::new(SchemeTag::FullDispSqueeze).free_indices();
        let starts = cold_starts(&free, &cfg);
        assert_eq!(starts.len(), cfg.restarts);
        for x in &starts {
            for (k, &c) in free.iter().enumerate() {
                assert!(x[k].abs() <= cfg.half_width(c));
            }
        }
        assert_eq!(starts, cold_starts(&free, &cfg));
        let other = OptimizerConfig { seed: 7, ..cfg.clone() };
        assert_ne!(starts, cold_starts(&free, &other));
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        let bad = OptimizerConfig { restarts: 0, ..OptimizerConfig::default() };
        assert!(bad.validate().is_err());
        let bad = OptimizerConfig { x_tolerance: -1.0, ..OptimizerConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn fixed_coordinates_are_exact() {
        let res = maximize_chsh(
            &tmsv(0.9),
            Scheme::new(SchemeTag::SingleSqueeze),
            OrderParameter::HUSIMI,
            DetectorModel::PERFECT,
            &quick(),
        )
        .unwrap();
        let q = res.best_settings;
        assert_eq!(q.a.u, 1.0);
        assert_eq!(q.b.u, 1.0);
        for st in [q.a, q.a_prime, q.b, q.b_prime] {
            assert_eq!(st.alpha.re, 0.0);
            assert_eq!(st.alpha.im, 0.0);
        }
        assert!(res.scheme.admits(&q));
        assert!(res.best_value > 2.1);
    }

    #[test]
    fn result_value_matches_reevaluation() {
        let sigma = tmsv(0.6);
        let res = maximize_chsh(
            &sigma,
            Scheme::new(SchemeTag::DisplacementOnly),
            OrderParameter::HUSIMI,
            DetectorModel::PERFECT,
            &quick(),
        )
        .unwrap();
        let again = chsh_value(&sigma, &res.best_settings, OrderParameter::HUSIMI, DetectorModel::PERFECT)
            .unwrap();
        assert!((res.best_value - again.value).abs() < 1e-10);
        assert_eq!(res.restarts, 8);
        assert!(res.evaluations > 0);
    }

    #[test]
    fn warm_start_never_hurts() {
        let sigma = tmsv(0.75);
        let cfg = OptimizerConfig { restarts: 2, ..OptimizerConfig::default() };
        let scheme = Scheme::new(SchemeTag::DisplacementOnly);
        let warm = settings_from_params(&[-0.15, 0.52, 0.15, -0.52, 0., 0., 0., 0., 0., 0., 0., 0.]);
        let reference = chsh_value(&sigma, &warm, OrderParameter::HUSIMI, DetectorModel::PERFECT).unwrap();
        let res = maximize_chsh_from(&sigma, scheme, OrderParameter::HUSIMI, DetectorModel::PERFECT, &cfg, &[warm])
            .unwrap();
        assert!(res.best_value >= reference.value - 1e-12);
        assert_eq!(res.restarts, 3);
    }

    #[test]
    fn sweep_rejects_unsorted_grid() {
        let err = sweep_r(
            1.0,
            1.0,
            &[0.5, 0.3],
            Scheme::new(SchemeTag::SqueezeOnly),
            OrderParameter::HUSIMI,
            DetectorModel::PERFECT,
            &quick(),
        );
        assert!(err.is_err());
    }

    #[test]
    fn sweep_keeps_failed_points() {
        let points = sweep_r(
            0.5,
            1.0,
            &[0.2],
            Scheme::new(SchemeTag::SqueezeOnly),
            OrderParameter::HUSIMI,
            DetectorModel::PERFECT,
            &quick(),
        )
        .unwrap();
        assert_eq!(points.len(), 1);
        assert!(points[0].outcome.is_err());
    }

    #[test]
    fn evaluator_errors_propagate() {
        let sigma = CovarianceMatrix4::new_unchecked([[0.0; 4]; 4]);
        let res = maximize_chsh(
            &sigma,
            Scheme::new(SchemeTag::SqueezeOnly),
            OrderParameter::WIGNER,
            DetectorModel::PERFECT,
            &quick(),
        );
        assert!(matches!(res, Err(Error::IllConditioned(_))));
    }
}
