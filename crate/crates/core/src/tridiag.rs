//! Real symmetric tridiagonal matrices and their eigendecomposition.
//!
//! The eigensolver is the implicit QL iteration with shifts (the tql2 routine
//! of Bowdler, Martin, Reinsch and Wilkinson), specialised to input that is
//! already tridiagonal so no Householder reduction is needed. Eigenvectors are
//! accumulated as contiguous rows, which keeps the Givens updates cache
//! friendly and lets the propagator reuse one workspace for every time step.

use crate::error::{Error, Result};

/// Iteration cap per eigenvalue. tql2 typically needs 1-3 sweeps.
const MAX_SWEEPS: usize = 60;

/// A real symmetric tridiagonal matrix stored as its diagonal and first
/// off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    /// `off[i]` couples rows `i` and `i + 1`, so it must have one entry fewer
    /// than `diag`.
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        if off.len() + 1 != diag.len() {
            return Err(Error::InvalidArgument(format!(
                "off-diagonal has {} entries, expected {}",
                off.len(),
                diag.len() - 1
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be positive");
        Self {
            diag: vec![0.0; n],
            off: vec![0.0; n - 1],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off_diag(&self) -> &[f64] {
        &self.off
    }

    pub(crate) fn diag_mut(&mut self) -> &mut [f64] {
        &mut self.diag
    }

    pub(crate) fn off_diag_mut(&mut self) -> &mut [f64] {
        &mut self.off
    }

    /// Entry `(i, j)`; zero outside the tridiagonal band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let n = self.dim();
        assert!(i < n && j < n, "index ({i}, {j}) out of bounds for {n}x{n}");
        match i.abs_diff(j) {
            0 => self.diag[i],
            1 => self.off[i.min(j)],
            _ => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        let d: f64 = self.diag.iter().map(|x| x * x).sum();
        let o: f64 = self.off.iter().map(|x| x * x).sum();
        (d + 2.0 * o).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.diag.iter().chain(&self.off).all(|x| x.is_finite())
    }

    /// `y = H x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(x.len(), n, "vector length mismatch");
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.off[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Full eigendecomposition with eigenvalues sorted ascending.
    pub fn eigen(&self) -> Result<TridiagEigen> {
        let mut eig = TridiagEigen::new(self.dim());
        eig.compute(self)?;
        Ok(eig)
    }
}

/// Eigenvalues and orthonormal eigenvectors of a [`SymTridiagonal`].
///
/// Also usable as a reusable workspace: [`TridiagEigen::compute`] overwrites
/// the previous decomposition without reallocating.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    n: usize,
    values: Vec<f64>,
    // row i holds eigenvector i
    vectors: Vec<f64>,
    work: Vec<f64>,
}

impl TridiagEigen {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            values: vec![0.0; n],
            vectors: vec![0.0; n * n],
            work: vec![0.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Eigenvalues in ascending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvector belonging to `values()[k]`.
    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.n..(k + 1) * self.n]
    }

    pub fn compute(&mut self, h: &SymTridiagonal) -> Result<()> {
        let n = h.dim();
        if n != self.n {
            return Err(Error::InvalidArgument(format!(
                "workspace dimension {} does not match matrix dimension {n}",
                self.n
            )));
        }
        if !h.is_finite() {
            return Err(Error::NonFinite);
        }

        let d = &mut self.values;
        let e = &mut self.work;
        let z = &mut self.vectors;
        d.copy_from_slice(&h.diag);
        e[..n - 1].copy_from_slice(&h.off);
        e[n - 1] = 0.0;
        z.fill(0.0);
        for i in 0..n {
            z[i * n + i] = 1.0;
        }

        let eps = f64::EPSILON;
        let mut f = 0.0;
        let mut tst1: f64 = 0.0;
        for l in 0..n {
            // look for a negligible off-diagonal element to split the matrix
            tst1 = tst1.max(d[l].abs() + e[l].abs());
            let mut m = l;
            while m < n - 1 && e[m].abs() > eps * tst1 {
                m += 1;
            }

            if m > l {
                let mut sweeps = 0;
                loop {
                    sweeps += 1;
                    if sweeps > MAX_SWEEPS {
                        return Err(Error::NoConvergence {
                            index: l,
                            iterations: MAX_SWEEPS,
                        });
                    }

                    // implicit shift from the leading 2x2 block
                    let mut g = d[l];
                    let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                    let mut r = p.hypot(1.0);
                    if p < 0.0 {
                        r = -r;
                    }
                    d[l] = e[l] / (p + r);
                    d[l + 1] = e[l] * (p + r);
                    let dl1 = d[l + 1];
                    let mut hh = g - d[l];
                    for di in d.iter_mut().take(n).skip(l + 2) {
                        *di -= hh;
                    }
                    f += hh;

                    p = d[m];
                    let mut c = 1.0;
                    let mut c2 = c;
                    let mut c3 = c;
                    let el1 = e[l + 1];
                    let mut s = 0.0;
                    let mut s2 = 0.0;
                    for i in (l..m).rev() {
                        c3 = c2;
                        c2 = c;
                        s2 = s;
                        g = c * e[i];
                        hh = c * p;
                        r = p.hypot(e[i]);
                        e[i + 1] = s * r;
                        s = e[i] / r;
                        c = p / r;
                        p = c * d[i] - s * g;
                        d[i + 1] = hh + s * (c * g + s * d[i]);

                        let (lo, hi) = z.split_at_mut((i + 1) * n);
                        let zi = &mut lo[i * n..];
                        let zi1 = &mut hi[..n];
                        for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                            let t = *b;
                            *b = s * *a + c * t;
                            *a = c * *a - s * t;
                        }
                    }
                    p = -s * s2 * c3 * el1 * e[l] / dl1;
                    e[l] = s * p;
                    d[l] = c * p;

                    if e[l].abs() <= eps * tst1 {
                        break;
                    }
                }
            }
            d[l] += f;
            e[l] = 0.0;
        }

        // selection sort, carrying eigenvector rows along
        for i in 0..n.saturating_sub(1) {
            let mut k = i;
            for j in i + 1..n {
                if d[j] < d[k] {
                    k = j;
                }
            }
            if k != i {
                d.swap(i, k);
                for c in 0..n {
                    z.swap(i * n + c, k * n + c);
                }
            }
        }
        Ok(())
    }
}
