//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Pass criterion numbers as arguments to run a
//! subset: `cargo test -p seqpd --test acceptance -- 3 7`.

use std::f64::consts::{PI, SQRT_2};
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seqpd::fock::{equivalence_suite, Oracle, SuiteOptions};
use seqpd::linalg::{congruence4, Mat4};
use seqpd::optimize::{efficiency_threshold, maximize_chsh_from};
use seqpd::{
    chsh_squeeze_only, chsh_value, make_tmsts, maximize_chsh, purity, seqpd_origin,
    seqpd_single_mode, seqpd_two_mode, sweep_r, symplectic_rotation, CovarianceMatrix4,
    DetectorModel, LocalSqueeze, MeasurementSetting, OptResult, OptimizerConfig, OrderParameter,
    Party, PhasePoint, Scheme, SchemeTag, SettingsQuad, TmstsSpec,
};

struct Outcome {
    pass: bool,
    detail: String,
}

#[derive(Default)]
struct Checks {
    failed: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, note: String) {
        if ok {
            self.notes.push(note);
        } else {
            self.failed.push(note);
        }
    }

    fn within(&mut self, name: &str, got: f64, want: f64, tol: f64) {
        self.check((got - want).abs() <= tol, format!("{name} = {got:.4} (want {want:.4} ± {tol})"));
    }

    fn finish(self) -> Outcome {
        let pass = self.failed.is_empty();
        let mut parts: Vec<String> = self.failed.iter().map(|f| format!("FAILED {f}")).collect();
        parts.extend(self.notes);
        Outcome { pass, detail: parts.join("; ") }
    }
}

fn tmsv(r: f64) -> CovarianceMatrix4 {
    make_tmsts(TmstsSpec::tmsv(r).unwrap()).unwrap()
}

fn setting(u: f64, alpha: f64) -> MeasurementSetting {
    MeasurementSetting::real(u, alpha).unwrap()
}

fn quoted(alpha: f64, alpha_p: f64, u: f64, u_p: f64) -> SettingsQuad {
    // α = −β, α′ = −β′, u = v, u′ = v′.
    SettingsQuad {
        a: setting(u, alpha),
        a_prime: setting(u_p, alpha_p),
        b: setting(u, -alpha),
        b_prime: setting(u_p, -alpha_p),
    }
}

fn husimi() -> OrderParameter {
    OrderParameter::HUSIMI
}

fn optimize(sigma: &CovarianceMatrix4, tag: SchemeTag, det: DetectorModel) -> OptResult {
    maximize_chsh(sigma, Scheme::new(tag), husimi(), det, &OptimizerConfig::default()).unwrap()
}

/// `max(x, 1/x)`: compressions are only defined up to this symmetry.
fn fold(x: f64) -> f64 {
    x.max(1.0 / x)
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|k| lo + step * k as f64).collect()
}

fn c1_full_scheme() -> Outcome {
    let mut c = Checks::default();
    let sigma = tmsv(0.75);
    let res = optimize(&sigma, SchemeTag::FullDispSqueeze, DetectorModel::PERFECT);
    c.within("B_max", res.best_value, 2.55, 0.02);
    let at_quoted = chsh_value(&sigma, &quoted(-0.17, 0.62, 0.97, 1.65), husimi(), DetectorModel::PERFECT)
        .unwrap()
        .value;
    c.within("B at quoted settings", at_quoted, res.best_value, 0.03);
    c.finish()
}

fn c2_displacement_only() -> Outcome {
    let mut c = Checks::default();
    let res = optimize(&tmsv(0.74), SchemeTag::DisplacementOnly, DetectorModel::PERFECT);
    c.within("B_max", res.best_value, 2.45, 0.02);
    c.finish()
}

fn c3_bw() -> Outcome {
    let mut c = Checks::default();
    let res = optimize(&tmsv(0.70), SchemeTag::BWDisplacement, DetectorModel::PERFECT);
    c.within("B_max", res.best_value, 2.28, 0.02);
    let q = res.best_settings;
    c.within("|alpha'|", q.a_prime.alpha.norm(), 0.86, 0.03);
    c.within("|beta'|", q.b_prime.alpha.norm(), 0.86, 0.03);
    c.finish()
}

fn c4_squeeze_only() -> Outcome {
    let mut c = Checks::default();
    let res = optimize(&tmsv(0.98), SchemeTag::SqueezeOnly, DetectorModel::PERFECT);
    c.within("B_max", res.best_value, 2.21, 0.02);
    let q = res.best_settings;
    let mut folded = [fold(q.a.u), fold(q.a_prime.u)];
    folded.sort_by(f64::total_cmp);
    c.within("smaller compression", folded[0], 1.41, 0.07);
    c.within("larger compression", folded[1], 3.67, 0.18);
    c.within("u·v", q.a.u * q.b.u, 1.0, 0.05);
    c.within("u'·v'", q.a_prime.u * q.b_prime.u, 1.0, 0.05);
    c.finish()
}

fn c5_single_squeeze() -> Outcome {
    let mut c = Checks::default();
    let res = optimize(&tmsv(0.93), SchemeTag::SingleSqueeze, DetectorModel::PERFECT);
    c.within("B_max", res.best_value, 2.13, 0.02);
    let q = res.best_settings;
    c.within("compression", fold(q.a_prime.u), 3.2, 0.15);
    c.within("u'·v'", q.a_prime.u * q.b_prime.u, 1.0, 0.05);
    c.finish()
}

fn random_state(rng: &mut ChaCha8Rng) -> CovarianceMatrix4 {
    let spec = TmstsSpec::new(rng.gen_range(1.0..3.0), rng.gen_range(1.0..3.0), rng.gen_range(0.0..2.0)).unwrap();
    let base = make_tmsts(spec).unwrap();
    let rot = symplectic_rotation(rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
    CovarianceMatrix4::new(symmetrized(&congruence4(&rot, base.entries()))).unwrap()
}

fn symmetrized(m: &Mat4) -> Mat4 {
    let mut out = *m;
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = 0.5 * (m[i][j] + m[j][i]);
        }
    }
    out
}

fn c6_parity_purity() -> Outcome {
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let compression = |rng: &mut ChaCha8Rng| rng.gen_range(-5f64.ln()..5f64.ln()).exp();
    let mut worst_mixed = 0.0f64;
    for _ in 0..1000 {
        let sigma = random_state(&mut rng);
        let us = [0; 4].map(|_| compression(&mut rng));
        let b = chsh_squeeze_only(&sigma, us[0], us[1], us[2], us[3], OrderParameter::WIGNER, DetectorModel::PERFECT)
            .unwrap()
            .value;
        worst_mixed = worst_mixed.max((b - 2.0 * purity(&sigma)).abs());
    }
    c.check(worst_mixed <= 1e-12, format!("max |B − 2μ| over 1000 states = {worst_mixed:.1e} (tol 1e-12)"));
    let mut worst_pure = 0.0f64;
    for k in 0..=40 {
        let sigma = tmsv(0.05 * k as f64);
        let us = [0; 4].map(|_| compression(&mut rng));
        let b = chsh_squeeze_only(&sigma, us[0], us[1], us[2], us[3], OrderParameter::WIGNER, DetectorModel::PERFECT)
            .unwrap()
            .value;
        worst_pure = worst_pure.max((b - 2.0).abs());
    }
    c.check(worst_pure <= 1e-12, format!("max |B − 2| over pure TMSV r ≤ 2 = {worst_pure:.1e} (tol 1e-12)"));
    c.finish()
}

fn c7_mixed_threshold() -> Outcome {
    let mut c = Checks::default();
    let r_grid = grid(0.40, 2.0, 0.05);
    let scheme = Scheme::new(SchemeTag::FullDispSqueeze);
    let points = sweep_r(1.2, 1.2, &r_grid, scheme, husimi(), DetectorModel::PERFECT, &OptimizerConfig::default())
        .unwrap();
    let values: Vec<(f64, f64)> = points.iter().map(|p| (p.r, p.best_value().unwrap_or(f64::NAN))).collect();
    let first = values.iter().position(|&(_, b)| b > 2.0);
    match first {
        Some(k) if k > 0 => {
            // Below threshold B sits on the trivial plateau at 2, so bisect
            // rather than interpolate.
            let warm = points[k].outcome.as_ref().unwrap().best_settings;
            let (mut lo, mut hi) = (values[k - 1].0, values[k].0);
            while hi - lo > 1e-4 {
                let mid = 0.5 * (lo + hi);
                let sigma = make_tmsts(TmstsSpec::new(1.2, 1.2, mid).unwrap()).unwrap();
                let b = maximize_chsh_from(&sigma, scheme, husimi(), DetectorModel::PERFECT, &OptimizerConfig::default(), &[warm])
                    .unwrap()
                    .best_value;
                if b > 2.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            c.check((0.45..=0.60).contains(&hi), format!("B crosses 2 at r = {hi:.4} (want [0.45, 0.60])"));
        }
        _ => c.check(false, format!("no crossing found on grid: {values:?}")),
    }
    let below: Vec<f64> = values
        .iter()
        .filter(|&&(r, b)| r >= 0.6 - 1e-9 && (b.is_nan() || b <= 2.0))
        .map(|&(r, _)| r)
        .collect();
    c.check(below.is_empty(), format!("B > 2 for all r in [0.6, 2.0] (violations at {below:?})"));
    let peak = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    c.notes.push(format!("peak B = {peak:.4}"));
    c.finish()
}

fn c8_efficiency() -> Outcome {
    let mut c = Checks::default();
    let sigma = tmsv(0.4);
    let det = DetectorModel::new(0.67).unwrap();
    let witness = chsh_value(&sigma, &quoted(-0.13, 0.62, 1.05, 1.65), husimi(), det).unwrap().value;
    c.check(witness > 2.0, format!("full-scheme witness B = {witness:.4} (want > 2)"));
    let disp = optimize(&sigma, SchemeTag::DisplacementOnly, det).best_value;
    c.check(disp <= 2.0, format!("displacement-only optimum B = {disp:.4} (want <= 2)"));
    let full = optimize(&sigma, SchemeTag::FullDispSqueeze, det).best_value;
    c.notes.push(format!("full-scheme optimum B = {full:.4}"));
    c.finish()
}

fn c9_squeeze_only_loss() -> Outcome {
    let mut c = Checks::default();
    let r_grid = grid(0.9, 1.5, 0.05);
    let scheme = Scheme::new(SchemeTag::SqueezeOnly);
    let cfg = OptimizerConfig::default();
    let best_at = |eta: f64| {
        sweep_r(1.0, 1.0, &r_grid, scheme, husimi(), DetectorModel::new(eta).unwrap(), &cfg)
            .unwrap()
            .iter()
            .map(|p| p.best_value().unwrap_or(f64::NAN))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let hi = best_at(0.89);
    c.check(hi > 2.0, format!("eta = 0.89: max B = {hi:.4} (want > 2)"));
    let lo = best_at(0.85);
    c.check(lo <= 2.0, format!("eta = 0.85: max B = {lo:.4} (want <= 2)"));
    match efficiency_threshold(1.0, 1.0, &r_grid, scheme, husimi(), &cfg, (0.85, 0.90), 1e-3).unwrap() {
        Some(t) => c.check((0.87..=0.90).contains(&t), format!("threshold eta = {t:.4} (want [0.87, 0.90])")),
        None => c.check(false, "no violation up to eta = 0.90".into()),
    }
    c.finish()
}

fn c10_oracle() -> Outcome {
    let mut c = Checks::default();
    let states = [
        TmstsSpec::tmsv(0.3).unwrap(),
        TmstsSpec::tmsv(0.75).unwrap(),
        TmstsSpec::tmsv(1.2).unwrap(),
        TmstsSpec::new(1.2, 1.2, 0.8).unwrap(),
        TmstsSpec::new(1.5, 1.1, 0.5).unwrap(),
        TmstsSpec::new(1.5, 1.5, 1.2).unwrap(),
    ];
    let rep = equivalence_suite(&states, &SuiteOptions::default()).unwrap();
    c.check(
        rep.cases.len() == 200 && rep.max_abs_error < 1e-6,
        format!("{} cases, max |oracle − closed form| = {:.1e} (tol 1e-6)", rep.cases.len(), rep.max_abs_error),
    );
    c.check(rep.max_leakage < 1e-8, format!("max guard-band leakage = {:.1e} (tol 1e-8)", rep.max_leakage));
    let spec = TmstsSpec::tmsv(0.75).unwrap();
    let q = quoted(-0.17, 0.62, 0.97, 1.65);
    let fock = Oracle::new(spec).unwrap().chsh(&q, husimi(), DetectorModel::PERFECT).unwrap();
    let closed = chsh_value(&make_tmsts(spec).unwrap(), &q, husimi(), DetectorModel::PERFECT).unwrap().value;
    c.check(
        (fock - closed).abs() < 1e-6,
        format!("B from Fock traces {fock:.9} vs closed form {closed:.9}"),
    );
    c.finish()
}

fn random_quad(rng: &mut ChaCha8Rng) -> SettingsQuad {
    let mut one = || {
        let u = rng.gen_range(-5f64.ln()..5f64.ln()).exp();
        let alpha = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        MeasurementSetting::new(u, alpha).unwrap()
    };
    SettingsQuad { a: one(), a_prime: one(), b: one(), b_prime: one() }
}

/// Largest gap between the single-mode `W_s` and a midpoint-rule
/// convolution of `W_0` with a Gaussian of variance `|s|` per quadrature.
fn convolution_error(sigma: &CovarianceMatrix4, u: f64, s: f64) -> f64 {
    let (h, half) = (0.02, 4.0);
    let n = (2.0 * half / h) as usize;
    let pts: Vec<f64> = (0..n).map(|k| -half + (k as f64 + 0.5) * h).collect();
    let wigner: Vec<f64> = pts
        .iter()
        .flat_map(|&y| pts.iter().map(move |&x| (x, y)))
        .map(|(x, y)| seqpd_single_mode(sigma, Party::A, u, Complex64::new(x, y), OrderParameter::WIGNER).unwrap())
        .collect();
    let t = -s;
    let mut worst = 0.0f64;
    for &(ax, ay) in &[(0.0, 0.0), (0.3, -0.2), (-0.5, 0.4), (0.8, 0.1)] {
        let mut acc = 0.0;
        for (iy, &y) in pts.iter().enumerate() {
            for (ix, &x) in pts.iter().enumerate() {
                // Kernel in α coordinates: quadrature offsets are 2Δα.
                let (dx, dy) = (2.0 * (ax - x), 2.0 * (ay - y));
                let k = 4.0 * (-(dx * dx + dy * dy) / (2.0 * t)).exp() / (2.0 * PI * t);
                acc += wigner[iy * n + ix] * k * h * h;
            }
        }
        let direct = seqpd_single_mode(sigma, Party::A, u, Complex64::new(ax, ay), OrderParameter::new(s).unwrap()).unwrap();
        worst = worst.max((acc - direct).abs());
    }
    worst
}

fn c11_structure() -> Outcome {
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let mut max_b = 0.0f64;
    for _ in 0..100_000 {
        let sigma = random_state(&mut rng);
        let q = random_quad(&mut rng);
        let s = OrderParameter::new(rng.gen_range(-3.0..=0.0)).unwrap();
        let det = DetectorModel::new(rng.gen_range(0.5..=1.0)).unwrap();
        max_b = max_b.max(chsh_value(&sigma, &q, s, det).unwrap().value);
    }
    c.check(max_b <= 2.0 * SQRT_2 + 1e-6, format!("max B over 1e5 random evaluations = {max_b:.4} (bound 2√2)"));

    let mut worst_identity = 0.0f64;
    let mut worst_rotation = 0.0f64;
    for _ in 0..1000 {
        let sigma = random_state(&mut rng);
        let (u, v) = (rng.gen_range(0.2..5.0), rng.gen_range(0.2..5.0));
        let alpha = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let beta = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let q = OrderParameter::WIGNER;
        let lhs = seqpd_two_mode(&sigma, LocalSqueeze::new(u, v).unwrap(), PhasePoint::new(alpha, beta), q).unwrap();
        // At s = 0 squeezing the state equals evaluating at the inversely
        // squeezed point.
        let back = |z: Complex64, w: f64| Complex64::new(z.re / w.sqrt(), z.im * w.sqrt());
        let rhs = seqpd_two_mode(&sigma, LocalSqueeze::identity(), PhasePoint::new(back(alpha, u), back(beta, v)), q)
            .unwrap();
        worst_identity = worst_identity.max((lhs - rhs).abs());

        let s = OrderParameter::new(rng.gen_range(-2.0..=0.0)).unwrap();
        let rot = symplectic_rotation(rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
        let rotated = CovarianceMatrix4::new(symmetrized(&congruence4(&rot, sigma.entries()))).unwrap();
        let id = LocalSqueeze::identity();
        let d = (seqpd_origin(&sigma, id, s).unwrap() - seqpd_origin(&rotated, id, s).unwrap()).abs();
        worst_rotation = worst_rotation.max(d);
    }
    c.check(worst_identity <= 1e-12, format!("s=0 squeezing identity max error {worst_identity:.1e} (tol 1e-12)"));
    c.check(worst_rotation <= 1e-12, format!("origin rotation invariance max error {worst_rotation:.1e} (tol 1e-12)"));

    let conv = convolution_error(&make_tmsts(TmstsSpec::new(1.3, 1.1, 0.5).unwrap()).unwrap(), 1.7, -0.6);
    c.check(conv <= 1e-4, format!("convolution identity max error {conv:.1e} (tol 1e-4)"));

    let cfg = OptimizerConfig { seed: 42, ..OptimizerConfig::default() };
    let scheme = Scheme::new(SchemeTag::FullDispSqueeze);
    let run = || {
        let r = maximize_chsh(&tmsv(0.75), scheme, husimi(), DetectorModel::PERFECT, &cfg).unwrap();
        serde_json::to_string(&r).unwrap()
    };
    let (first, second) = (run(), run());
    c.check(first == second, format!("optimizer repeat byte-identical ({} bytes)", first.len()));
    c.finish()
}

type Criterion = (u32, &'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 11] = [
    (1, "full-scheme optimum at r = 0.75", c1_full_scheme),
    (2, "displacement-only optimum at r = 0.74", c2_displacement_only),
    (3, "BW optimum at r = 0.70", c3_bw),
    (4, "squeeze-only optimum at r = 0.98", c4_squeeze_only),
    (5, "single-squeeze optimum at r = 0.93", c5_single_squeeze),
    (6, "parity equals twice the purity at s = 0", c6_parity_purity),
    (7, "mixed-state threshold for nu = 1.2", c7_mixed_threshold),
    (8, "efficiency tolerance at eta = 0.67", c8_efficiency),
    (9, "squeeze-only with detector loss", c9_squeeze_only_loss),
    (10, "Fock-space oracle equivalence", c10_oracle),
    (11, "structural properties", c11_structure),
];

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    let started = Instant::now();
    for (id, name, run) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let out = run();
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        if !out.pass {
            failures += 1;
        }
        println!("acceptance {id:>2} {verdict} {name} [{:.1}s]: {}", t.elapsed().as_secs_f64(), out.detail);
    }
    println!("acceptance: {failures} failing, {:.1}s total", started.elapsed().as_secs_f64());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
