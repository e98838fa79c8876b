use crate::scalar::{ordered_sum, Scalar};

use super::LinalgError;

/// Dense symmetric matrix storing only the upper triangle (packed by rows).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseSymMatrix<T> {
    n: usize,
    upper: Vec<T>,
}

impl<T: Scalar> DenseSymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            upper: vec![T::zero(); n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds from the entries on and above the diagonal of a square row-major array.
    pub fn from_upper(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate().skip(i) {
                m.set(i, j, v);
            }
        }
        m
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        assert!(j < self.n, "index ({i}, {j}) outside {}x{}", self.n, self.n);
        i * self.n - i * (i + 1) / 2 + j
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.upper[self.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let k = self.index(i, j);
        self.upper[k] = v;
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| ordered_sum((0..self.n).map(|j| self.get(i, j) * x[j])))
            .collect()
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[T]) -> T {
        ordered_sum(self.mul_vec(x).iter().zip(x).map(|(&a, &b)| a * b))
    }

    pub fn frobenius_norm(&self) -> T {
        let mut s = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.get(i, j);
                s += v * v;
            }
        }
        s.sqrt()
    }

    /// All eigenvalues (ascending) by cyclic Jacobi.
    pub fn eigenvalues(&self) -> Result<Vec<T>, LinalgError> {
        let mut a = self.to_full();
        let mut v = identity_full(self.n);
        jacobi(&mut a, &mut v, self.n)?;
        let mut ev: Vec<T> = (0..self.n).map(|i| a[i * self.n + i]).collect();
        ev.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
        Ok(ev)
    }

    fn to_full(&self) -> Vec<T> {
        let n = self.n;
        let mut a = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = self.get(i, j);
            }
        }
        a
    }
}

fn identity_full<T: Scalar>(n: usize) -> Vec<T> {
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    v
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi on the full symmetric array `a`, accumulating rotations in `v`.
fn jacobi<T: Scalar>(a: &mut [T], v: &mut [T], n: usize) -> Result<(), LinalgError> {
    let total: T = a.iter().map(|&x| x * x).sum::<T>().sqrt();
    if total == T::zero() {
        return Ok(());
    }
    let target = T::epsilon() * total;
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= target {
            return Ok(());
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (apq + apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = T::zero();
                a[q * n + p] = T::zero();
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(LinalgError::NoConvergence { sweeps: MAX_SWEEPS })
}

/// Largest eigenpair of `A x = λ B x`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralizedEigen<T> {
    pub value: T,
    /// Normalized so that `xᵀ B x = 1`; the largest-magnitude component is positive.
    pub vector: Vec<T>,
    /// `‖A x − λ B x‖₂`.
    pub residual: T,
}

/// Largest eigenvalue of `A x = λ B x` with `B = diag(b)`, `b > 0`.
///
/// Reduces to the standard problem for `B^{-1/2} A B^{-1/2}`, solved by cyclic
/// Jacobi. The residual `‖Ax − λBx‖₂ ≤ 1e-10·‖A‖_F·‖x‖_B` is checked before
/// returning.
pub fn max_generalized_eig<T: Scalar>(
    a: &DenseSymMatrix<T>,
    b: &[T],
) -> Result<GeneralizedEigen<T>, LinalgError> {
    let n = a.dim();
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    for (i, &w) in b.iter().enumerate() {
        if !(w > T::zero()) {
            return Err(LinalgError::NonPositiveWeight {
                index: i,
                value: w.to_f64_lossy(),
            });
        }
    }
    if n == 0 {
        return Err(LinalgError::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }
    let inv_sqrt: Vec<T> = b.iter().map(|w| T::one() / w.sqrt()).collect();
    let mut c = a.to_full();
    if c.iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    for i in 0..n {
        for j in 0..n {
            c[i * n + j] = c[i * n + j] * inv_sqrt[i] * inv_sqrt[j];
        }
    }
    let mut v = identity_full(n);
    jacobi(&mut c, &mut v, n)?;
    let mut k = 0;
    for i in 1..n {
        if c[i * n + i] > c[k * n + k] {
            k = i;
        }
    }
    let value = c[k * n + k];
    let mut x: Vec<T> = (0..n).map(|i| v[i * n + k] * inv_sqrt[i]).collect();
    let bnorm = ordered_sum(x.iter().zip(b).map(|(&xi, &w)| w * xi * xi)).sqrt();
    let mut lead = 0;
    for i in 1..n {
        if x[i].abs() > x[lead].abs() {
            lead = i;
        }
    }
    let scale = if x[lead] < T::zero() { -bnorm } else { bnorm };
    for xi in &mut x {
        *xi /= scale;
    }

    let ax = a.mul_vec(&x);
    let residual = ordered_sum(
        ax.iter()
            .zip(&x)
            .zip(b)
            .map(|((&axi, &xi), &w)| (axi - value * w * xi) * (axi - value * w * xi)),
    )
    .sqrt();
    let bound = T::residual_tol() * a.frobenius_norm();
    if !(residual <= bound) {
        return Err(LinalgError::ResidualTooLarge {
            residual: residual.to_f64_lossy(),
            bound: bound.to_f64_lossy(),
        });
    }
    Ok(GeneralizedEigen {
        value,
        vector: x,
        residual,
    })
}
