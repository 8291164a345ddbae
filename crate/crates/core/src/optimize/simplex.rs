//! Box-constrained Nelder–Mead minimizer.
//!
//! Trial points are projected onto the box before evaluation, so every
//! vertex stays feasible. Non-finite objective values rank as worst.

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    pub x_tolerance: f64,
    pub f_tolerance: f64,
    /// Initial edge length per coordinate, as a fraction of the box width.
    pub initial_step: f64,
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

struct Boxed<'a> {
    lo: &'a [f64],
    hi: &'a [f64],
}

impl Boxed<'_> {
    fn project(&self, x: &mut [f64]) {
        for ((v, &l), &h) in x.iter_mut().zip(self.lo).zip(self.hi) {
            *v = v.clamp(l, h);
        }
    }
}

fn rank(f: f64) -> f64 {
    if f.is_nan() {
        f64::INFINITY
    } else {
        f
    }
}

pub fn minimize<F>(mut objective: F, x0: &[f64], lo: &[f64], hi: &[f64], opts: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    assert_eq!(lo.len(), dim);
    assert_eq!(hi.len(), dim);
    let bounds = Boxed { lo, hi };
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        rank(objective(x))
    };

    let mut start = x0.to_vec();
    bounds.project(&mut start);
    if dim == 0 {
        let f = eval(&start);
        return SimplexResult { x: start, f, iterations: 0, evaluations: 1, converged: true };
    }

    let mut points: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    points.push(start.clone());
    for k in 0..dim {
        let mut p = start.clone();
        let step = opts.initial_step * (hi[k] - lo[k]);
        p[k] = if p[k] + step <= hi[k] { p[k] + step } else { p[k] - step };
        bounds.project(&mut p);
        points.push(p);
    }
    let mut values: Vec<f64> = points.iter().map(|p| eval(p)).collect();

    let mut iterations = 0;
    let mut converged = false;
    let mut order: Vec<usize> = (0..=dim).collect();
    while iterations < opts.max_iterations {
        // Stable sort on value, then index, keeps runs reproducible.
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        let f_spread = values[worst] - values[best];
        let x_spread = points
            .iter()
            .flat_map(|p| p.iter().zip(&points[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        if f_spread.is_finite() && f_spread <= opts.f_tolerance && x_spread <= opts.x_tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; dim];
        for &i in order.iter().take(dim) {
            for (c, v) in centroid.iter_mut().zip(&points[i]) {
                *c += v;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= dim as f64);

        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&points[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect();
            bounds.project(&mut p);
            p
        };

        let reflected = along(REFLECT);
        let f_r = eval(&reflected);
        if f_r < values[best] {
            let expanded = along(EXPAND);
            let f_e = eval(&expanded);
            if f_e < f_r {
                points[worst] = expanded;
                values[worst] = f_e;
            } else {
                points[worst] = reflected;
                values[worst] = f_r;
            }
            continue;
        }
        if f_r < values[second_worst] {
            points[worst] = reflected;
            values[worst] = f_r;
            continue;
        }
        let (candidate, f_c) = if f_r < values[worst] {
            let p = along(CONTRACT * REFLECT);
            let f = eval(&p);
            (p, f)
        } else {
            let p = along(-CONTRACT);
            let f = eval(&p);
            (p, f)
        };
        if f_c < values[worst].min(f_r) {
            points[worst] = candidate;
            values[worst] = f_c;
            continue;
        }
        let anchor = points[best].clone();
        for &i in order.iter().skip(1) {
            for (v, a) in points[i].iter_mut().zip(&anchor) {
                *v = a + SHRINK * (*v - a);
            }
            values[i] = eval(&points[i]);
        }
    }

    let best = (0..=dim)
        .min_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)))
        .unwrap();
    SimplexResult {
        x: points[best].clone(),
        f: values[best],
        iterations,
        evaluations,
        converged,
    }
}
