//! Small dense complex matrix kernel.
//!
//! Everything in this crate lives in dimension 2, 3, 4 or 8, so the kernel
//! favours simplicity and numerical robustness over performance: row-major
//! storage, naive products, and a cyclic Jacobi eigensolver for Hermitian
//! matrices.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance used when validating Hermitian/symmetric structure.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Off-diagonal Frobenius norm at which the Jacobi sweep stops.
const JACOBI_TOL: f64 = 1e-13;

const MAX_SWEEPS: usize = 100;

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Build from rows of (re, im) pairs; panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        ComplexMatrix {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn mul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn add(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, factor: C64) -> ComplexMatrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= factor;
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> ComplexMatrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = a.conj();
        }
        out
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from M = M\u{2020}, with its location.
    pub fn hermitian_deviation(&self) -> Option<(usize, usize, f64)> {
        if !self.is_square() {
            return None;
        }
        let mut worst = (0, 0, 0.0);
        for r in 0..self.rows {
            for c in r..self.cols {
                let d = (self[(r, c)] - self[(c, r)].conj()).norm();
                if d > worst.2 {
                    worst = (r, c, d);
                }
            }
        }
        Some(worst)
    }

    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let (row, col, deviation) = self.hermitian_deviation().expect("square matrix");
        if deviation > tol {
            return Err(Error::NotHermitian {
                row,
                col,
                deviation,
            });
        }
        Ok(())
    }

    /// Max deviation of U U† from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let product = self.mul(&self.adjoint());
        product.max_abs_diff(&ComplexMatrix::identity(self.rows))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product, (a ⊗ b)[(i·rows_b + k), (j·cols_b + l)] = a[i,j]·b[k,l].
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// The identity and the three Pauli matrices, with σ₃|0⟩ = +|0⟩.
pub fn pauli(j: usize) -> ComplexMatrix {
    let z = |re: f64, im: f64| C64::new(re, im);
    let rows = match j {
        0 => [[z(1.0, 0.0), z(0.0, 0.0)], [z(0.0, 0.0), z(1.0, 0.0)]],
        1 => [[z(0.0, 0.0), z(1.0, 0.0)], [z(1.0, 0.0), z(0.0, 0.0)]],
        2 => [[z(0.0, 0.0), z(0.0, -1.0)], [z(0.0, 1.0), z(0.0, 0.0)]],
        3 => [[z(1.0, 0.0), z(0.0, 0.0)], [z(0.0, 0.0), z(-1.0, 0.0)]],
        _ => panic!("Pauli index {j} out of range"),
    };
    ComplexMatrix::from_rows(&[rows[0].to_vec(), rows[1].to_vec()])
}

/// The four fixed 2×2 generators σ₀..σ₃.
pub struct PauliBasis {
    pub sigma: [ComplexMatrix; 4],
}

impl PauliBasis {
    pub fn standard() -> Self {
        PauliBasis {
            sigma: [pauli(0), pauli(1), pauli(2), pauli(3)],
        }
    }
}

/// Eigendecomposition of a Hermitian matrix: descending eigenvalues and the
/// matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigensystem {
    /// V diag(values) V†, for round-trip checks.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let mut d = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            d[(i, i)] = C64::new(self.values[i], 0.0);
        }
        self.vectors.mul(&d).mul(&self.vectors.adjoint())
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                sum += a[(r, c)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// Cyclic Jacobi eigensolver for Hermitian matrices of dimension ≤ 8.
///
/// Each rotation annihilates one off-diagonal entry a_pq via the 2×2 unitary
///
/// ```text
///   U = | c          -s·e^{iφ} |        φ = arg(a_pq),
///       | s·e^{-iφ}   c        |        t = s/c a root of t² - 2τt - 1,
///                                       τ = (a_qq - a_pp) / (2|a_pq|),
/// ```
///
/// applied as A ← U† A U on the (p,q) plane. Sweeps repeat until the
/// off-diagonal norm drops below 1e-13.
pub fn hermitian_eigensystem(m: &ComplexMatrix) -> Result<Eigensystem> {
    m.check_hermitian(HERMITICITY_TOL)?;
    let n = m.rows();
    let mut a = m.clone();
    // symmetrize away the sub-tolerance asymmetry so the iteration sees an
    // exactly Hermitian matrix
    for r in 0..n {
        for c in 0..n {
            if r < c {
                let avg = (a[(r, c)] + a[(c, r)].conj()) * 0.5;
                a[(r, c)] = avg;
                a[(c, r)] = avg.conj();
            } else if r == c {
                a[(r, c)] = C64::new(a[(r, c)].re, 0.0);
            }
        }
    }
    let mut v = ComplexMatrix::identity(n);

    let mut sweeps = 0;
    while off_diagonal_norm(&a) > JACOBI_TOL {
        sweeps += 1;
        if sweeps > MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off: off_diagonal_norm(&a),
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let beta = a[(p, q)];
                let beta_abs = beta.norm();
                if beta_abs < JACOBI_TOL / (n as f64 * 10.0) {
                    continue;
                }
                let phase = beta / beta_abs;
                let alpha = a[(p, p)].re;
                let gamma = a[(q, q)].re;
                let tau = (gamma - alpha) / (2.0 * beta_abs);
                // smaller-magnitude root of t² - 2τt - 1 = 0
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sp = phase * s; // s·e^{iφ}
                let spc = sp.conj(); // s·e^{-iφ}

                // columns: A ← A U and V ← V U
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * c + aiq * spc;
                    a[(i, q)] = aiq * c - aip * sp;
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c + viq * spc;
                    v[(i, q)] = viq * c - vip * sp;
                }
                // rows: A ← U† A
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * c + aqj * sp;
                    a[(q, j)] = aqj * c - apj * spc;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).unwrap());
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(Eigensystem { values, vectors })
}

/// Eigenvalues of a symmetric 3×3 real matrix, descending.
///
/// Dedicated real Jacobi sweep. Closed-form cubic solutions lose half their
/// digits at multiple roots, which the S = T Tᵀ matrices here hit exactly
/// (Bell pairs, product pairs); Jacobi stays at machine precision there. The
/// implementation is independent of the complex solver so the two can be
/// cross-checked.
pub fn real_symmetric3_eigenvalues(s: &[[f64; 3]; 3]) -> Result<[f64; 3]> {
    for r in 0..3 {
        for c in (r + 1)..3 {
            let deviation = (s[r][c] - s[c][r]).abs();
            if deviation > HERMITICITY_TOL {
                return Err(Error::NotSymmetric {
                    row: r,
                    col: c,
                    deviation,
                });
            }
        }
    }

    let mut a = *s;
    // symmetrize sub-tolerance asymmetry
    for r in 0..3 {
        for c in (r + 1)..3 {
            let avg = 0.5 * (a[r][c] + a[c][r]);
            a[r][c] = avg;
            a[c][r] = avg;
        }
    }

    let off = |a: &[[f64; 3]; 3]| -> f64 {
        (2.0 * (a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2])).sqrt()
    };
    let mut sweeps = 0;
    while off(&a) > JACOBI_TOL {
        sweeps += 1;
        if sweeps > MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off: off(&a),
            });
        }
        for p in 0..3 {
            for q in (p + 1)..3 {
                let apq = a[p][q];
                if apq.abs() < JACOBI_TOL / 30.0 {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s_ = t * c;
                for i in 0..3 {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = c * aip - s_ * aiq;
                    a[i][q] = s_ * aip + c * aiq;
                }
                for i in 0..3 {
                    let api = a[p][i];
                    let aqi = a[q][i];
                    a[p][i] = c * api - s_ * aqi;
                    a[q][i] = s_ * api + c * aqi;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
            }
        }
    }

    let mut eig = [a[0][0], a[1][1], a[2][2]];
    eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(eig)
}

/// Clamp the near-zero negatives that PSD constructs pick up from rounding;
/// anything below -1e-9 is a genuine violation.
pub fn clamp_psd_eigenvalue(lambda: f64) -> Result<f64> {
    if lambda < -1e-9 {
        Err(Error::NegativeEigenvalue { value: lambda })
    } else {
        Ok(lambda.max(0.0))
    }
}
