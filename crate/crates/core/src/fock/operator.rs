use nalgebra::DMatrix;
use num_complex::Complex64;

/// Dense operator on one mode (`N×N`) or two modes (`N²×N²`, index
/// `i·N + k` for `|i⟩_a |k⟩_b`).
#[derive(Debug, Clone)]
pub struct FockOperator {
    cutoff: usize,
    modes: usize,
    entries: DMatrix<Complex64>,
}

impl FockOperator {
    pub fn new(cutoff: usize, modes: usize, entries: DMatrix<Complex64>) -> Self {
        let dim = cutoff.pow(modes as u32);
        assert!(modes == 1 || modes == 2, "one or two modes");
        assert_eq!(entries.shape(), (dim, dim), "entries do not match cutoff");
        Self { cutoff, modes, entries }
    }

    pub fn from_real(cutoff: usize, modes: usize, entries: &DMatrix<f64>) -> Self {
        Self::new(cutoff, modes, entries.map(|v| Complex64::new(v, 0.0)))
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// `max |X − X†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.entries + self.entries.adjoint()).map(|z| z * 0.5);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `max |(X†X − I)_{ij}|` over the leading `k×k` block. Truncation makes
    /// the last rows leak, so only the leading block is meaningful.
    pub fn unitarity_error(&self, k: usize) -> f64 {
        let k = k.min(self.dim());
        let cols = self.entries.columns(0, k);
        let g = cols.adjoint() * cols;
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - want).norm());
            }
        }
        worst
    }

    /// `Tr(ρ X)` with `self` as `ρ`.
    pub fn expect(&self, x: &FockOperator) -> Complex64 {
        assert_eq!(self.dim(), x.dim());
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.entries[(i, j)] * x.entries[(j, i)];
            }
        }
        acc
    }

    /// `A ⊗ B` for two single-mode operators with the same cutoff.
    pub fn kron(a: &FockOperator, b: &FockOperator) -> FockOperator {
        assert!(a.modes == 1 && b.modes == 1 && a.cutoff == b.cutoff);
        FockOperator::new(a.cutoff, 2, a.entries.kronecker(&b.entries))
    }
}

/// Annihilation operator `a` truncated to `n` levels.
pub fn annihilation(n: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = (k as f64).sqrt();
    }
    a
}
