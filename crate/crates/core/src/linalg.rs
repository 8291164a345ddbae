//! Closed-form kernels for the 2×2 and 4×4 real matrices used by the
//! Gaussian evaluator.
//!
//! Inverses go through the adjugate. The 4×4 determinant uses elimination
//! with partial pivoting instead of the Laplace expansion: for covariance
//! matrices of strongly squeezed states the expansion cancels terms of size
//! `‖σ‖⁴` down to `det σ ≈ 1` and keeps only ~6 digits, while elimination
//! keeps ~13.

pub type Mat2 = [[f64; 2]; 2];
pub type Mat4 = [[f64; 4]; 4];

pub const IDENTITY4: Mat4 = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

/// Condition estimates above this are reported as ill-conditioned.
pub const CONDITION_LIMIT: f64 = 1e10;

pub fn det2(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn inv2(m: &Mat2) -> Option<Mat2> {
    let det = det2(m);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let r = 1.0 / det;
    Some([[m[1][1] * r, -m[0][1] * r], [-m[1][0] * r, m[0][0] * r]])
}

/// The twelve 2×2 minors a 4×4 Laplace expansion needs: six from the top
/// two rows and six from the bottom two.
struct Minors {
    s: [f64; 6],
    c: [f64; 6],
}

fn minors(m: &Mat4) -> Minors {
    let s = [
        m[0][0] * m[1][1] - m[1][0] * m[0][1],
        m[0][0] * m[1][2] - m[1][0] * m[0][2],
        m[0][0] * m[1][3] - m[1][0] * m[0][3],
        m[0][1] * m[1][2] - m[1][1] * m[0][2],
        m[0][1] * m[1][3] - m[1][1] * m[0][3],
        m[0][2] * m[1][3] - m[1][2] * m[0][3],
    ];
    let c = [
        m[2][0] * m[3][1] - m[3][0] * m[2][1],
        m[2][0] * m[3][2] - m[3][0] * m[2][2],
        m[2][0] * m[3][3] - m[3][0] * m[2][3],
        m[2][1] * m[3][2] - m[3][1] * m[2][2],
        m[2][1] * m[3][3] - m[3][1] * m[2][3],
        m[2][2] * m[3][3] - m[3][2] * m[2][3],
    ];
    Minors { s, c }
}

fn det_from_minors(k: &Minors) -> f64 {
    let (s, c) = (&k.s, &k.c);
    s[0] * c[5] - s[1] * c[4] + s[2] * c[3] + s[3] * c[2] - s[4] * c[1] + s[5] * c[0]
}

/// Laplace expansion over 2×2 minors; exact for small integers, used for
/// cross-checks.
pub fn det4_laplace(m: &Mat4) -> f64 {
    det_from_minors(&minors(m))
}

pub fn det4(m: &Mat4) -> f64 {
    let mut a = *m;
    let mut det = 1.0;
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()).then(j.cmp(&i)))
            .unwrap();
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for row in col + 1..4 {
            let f = a[row][col] / p;
            for k in col + 1..4 {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    det
}

/// Inverse and determinant in one pass. `None` when the determinant is zero
/// or not finite.
pub fn inv4(m: &Mat4) -> Option<(Mat4, f64)> {
    let k = minors(m);
    let det = det4(m);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let (s, c) = (&k.s, &k.c);
    let r = 1.0 / det;
    let inv = [
        [
            (m[1][1] * c[5] - m[1][2] * c[4] + m[1][3] * c[3]) * r,
            (-m[0][1] * c[5] + m[0][2] * c[4] - m[0][3] * c[3]) * r,
            (m[3][1] * s[5] - m[3][2] * s[4] + m[3][3] * s[3]) * r,
            (-m[2][1] * s[5] + m[2][2] * s[4] - m[2][3] * s[3]) * r,
        ],
        [
            (-m[1][0] * c[5] + m[1][2] * c[2] - m[1][3] * c[1]) * r,
            (m[0][0] * c[5] - m[0][2] * c[2] + m[0][3] * c[1]) * r,
            (-m[3][0] * s[5] + m[3][2] * s[2] - m[3][3] * s[1]) * r,
            (m[2][0] * s[5] - m[2][2] * s[2] + m[2][3] * s[1]) * r,
        ],
        [
            (m[1][0] * c[4] - m[1][1] * c[2] + m[1][3] * c[0]) * r,
            (-m[0][0] * c[4] + m[0][1] * c[2] - m[0][3] * c[0]) * r,
            (m[3][0] * s[4] - m[3][1] * s[2] + m[3][3] * s[0]) * r,
            (-m[2][0] * s[4] + m[2][1] * s[2] - m[2][3] * s[0]) * r,
        ],
        [
            (-m[1][0] * c[3] + m[1][1] * c[1] - m[1][2] * c[0]) * r,
            (m[0][0] * c[3] - m[0][1] * c[1] + m[0][2] * c[0]) * r,
            (-m[3][0] * s[3] + m[3][1] * s[1] - m[3][2] * s[0]) * r,
            (m[2][0] * s[3] - m[2][1] * s[1] + m[2][2] * s[0]) * r,
        ],
    ];
    Some((inv, det))
}

pub fn mul4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn transpose4(a: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[j][i] = *v;
        }
    }
    out
}

/// `S σ Sᵀ` for a general 4×4 `S`.
pub fn congruence4(s: &Mat4, sigma: &Mat4) -> Mat4 {
    mul4(&mul4(s, sigma), &transpose4(s))
}

/// `D σ D` for `D = diag(d)`.
pub fn diag_congruence4(d: &[f64; 4], sigma: &Mat4) -> Mat4 {
    let mut out = *sigma;
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v *= d[i] * d[j];
        }
    }
    out
}

pub fn add_scaled_identity4(m: &Mat4, t: f64) -> Mat4 {
    let mut out = *m;
    for (i, row) in out.iter_mut().enumerate() {
        row[i] += t;
    }
    out
}

pub fn quad_form4(m: &Mat4, x: &[f64; 4]) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            acc += x[i] * m[i][j] * x[j];
        }
    }
    acc
}

pub fn quad_form2(m: &Mat2, x: &[f64; 2]) -> f64 {
    x[0] * (m[0][0] * x[0] + m[0][1] * x[1]) + x[1] * (m[1][0] * x[0] + m[1][1] * x[1])
}

fn frobenius4(m: &Mat4) -> f64 {
    m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

fn frobenius2(m: &Mat2) -> f64 {
    m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

/// Frobenius-norm condition estimate `‖M‖_F ‖M⁻¹‖_F`; an upper bound on the
/// 2-norm condition number.
pub fn condition4(m: &Mat4, inv: &Mat4) -> f64 {
    frobenius4(m) * frobenius4(inv)
}

pub fn condition2(m: &Mat2, inv: &Mat2) -> f64 {
    frobenius2(m) * frobenius2(inv)
}
