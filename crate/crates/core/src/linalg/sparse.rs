//! Symmetric sparse matrices and a direct sparse LU factorization.
//!
//! The factorization eliminates columns in reverse Cuthill-McKee order (rows
//! with many more entries than average are pushed to the end). Two pivoting
//! modes are supported: symmetric diagonal pivoting for SPD systems, which
//! doubles as a positive-definiteness test, and threshold partial pivoting for
//! symmetric indefinite (saddle point) systems.

use std::collections::{BTreeMap, VecDeque};

use crate::scalar::{norm2, ordered_sum, Scalar};

use super::LinalgError;

/// Square sparse matrix holding both triangles of a symmetric pattern (CSR).
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

/// Accumulates symmetric entries; duplicates are summed in insertion order.
#[derive(Clone, Debug)]
pub struct SymTripletBuilder<T> {
    n: usize,
    entries: BTreeMap<(usize, usize), T>,
}

impl<T: Scalar> SymTripletBuilder<T> {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: BTreeMap::new(),
        }
    }

    /// Adds `v` at `(i, j)` and, off the diagonal, at `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        assert!(
            i < self.n && j < self.n,
            "entry ({i}, {j}) outside {}x{}",
            self.n,
            self.n
        );
        *self.entries.entry((i, j)).or_insert_with(T::zero) += v;
        if i != j {
            *self.entries.entry((j, i)).or_insert_with(T::zero) += v;
        }
    }

    pub fn build(self) -> SparseSymMatrix<T> {
        let mut row_ptr = vec![0; self.n + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals = Vec::with_capacity(self.entries.len());
        for (&(i, j), &v) in &self.entries {
            row_ptr[i + 1] += 1;
            cols.push(j);
            vals.push(v);
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseSymMatrix {
            n: self.n,
            row_ptr,
            cols,
            vals,
        }
    }
}

impl<T: Scalar> SparseSymMatrix<T> {
    /// Builds from a dense row-major square array; exact zeros are dropped.
    ///
    /// Fails if the array is not square or not exactly symmetric.
    pub fn from_dense(rows: &[Vec<T>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        let mut b = SymTripletBuilder::new(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(LinalgError::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if rows[j][i] != v {
                    return Err(LinalgError::NotSymmetric { row: i, col: j });
                }
                if j >= i && v != T::zero() {
                    b.add(i, j, v);
                }
            }
        }
        Ok(b.build())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Entries `(col, value)` of row `i`, sorted by column.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| ordered_sum(self.row(i).map(|(j, v)| v * x[j])))
            .collect()
    }

    pub fn frobenius_norm(&self) -> T {
        norm2(&self.vals)
    }

    pub fn max_abs(&self) -> T {
        self.vals.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Copy with row and column `k` of every listed index removed.
    pub fn without(&self, removed: &[usize]) -> Self {
        let mut keep = vec![true; self.n];
        for &k in removed {
            keep[k] = false;
        }
        let mut map = vec![usize::MAX; self.n];
        let mut m = 0;
        for i in 0..self.n {
            if keep[i] {
                map[i] = m;
                m += 1;
            }
        }
        let mut b = SymTripletBuilder::new(m);
        for i in 0..self.n {
            if !keep[i] {
                continue;
            }
            for (j, v) in self.row(i) {
                if keep[j] && j >= i {
                    b.add(map[i], map[j], v);
                }
            }
        }
        b.build()
    }

    fn check_symmetric(&self) -> Result<(), LinalgError> {
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                if !v.is_finite() {
                    return Err(LinalgError::NonFinite);
                }
                if self.get(j, i) != v {
                    return Err(LinalgError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(())
    }
}

/// Fill-reducing symmetric ordering: reverse Cuthill-McKee on the graph with
/// "dense" nodes (degree above `max(16, 8 sqrt n)`) removed and appended last.
pub fn rcm_ordering<T: Scalar>(a: &SparseSymMatrix<T>) -> Vec<usize> {
    let n = a.dim();
    let dense_cut = 16usize.max((8.0 * (n as f64).sqrt()) as usize);
    let degree: Vec<usize> = (0..n)
        .map(|i| a.row(i).filter(|&(j, _)| j != i).count())
        .collect();
    let dense: Vec<bool> = degree.iter().map(|&d| d > dense_cut).collect();
    let neighbours = |i: usize| {
        let mut nb: Vec<usize> = a
            .row(i)
            .map(|(j, _)| j)
            .filter(|&j| j != i && !dense[j])
            .collect();
        nb.sort_by_key(|&j| (degree[j], j));
        nb
    };

    let bfs_levels = |root: usize, seen: &mut Vec<bool>| -> Vec<Vec<usize>> {
        let mut levels = vec![vec![root]];
        seen[root] = true;
        loop {
            let mut next = Vec::new();
            for &v in levels.last().unwrap() {
                for w in neighbours(v) {
                    if !seen[w] {
                        seen[w] = true;
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            levels.push(next);
        }
        levels
    };

    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    for start in 0..n {
        if placed[start] || dense[start] {
            continue;
        }
        // pseudo-peripheral root
        let mut root = start;
        let mut depth = 0;
        for _ in 0..8 {
            let mut seen = placed.clone();
            let levels = bfs_levels(root, &mut seen);
            if levels.len() <= depth {
                break;
            }
            depth = levels.len();
            root = *levels
                .last()
                .unwrap()
                .iter()
                .min_by_key(|&&v| (degree[v], v))
                .unwrap();
        }
        let mut queue = VecDeque::from([root]);
        placed[root] = true;
        let mut component = Vec::new();
        while let Some(v) = queue.pop_front() {
            component.push(v);
            for w in neighbours(v) {
                if !placed[w] {
                    placed[w] = true;
                    queue.push_back(w);
                }
            }
        }
        order.extend(component);
    }
    order.reverse();
    order.extend((0..n).filter(|&i| dense[i]));
    order
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pivoting {
    /// Pivot on the diagonal in the symmetric order; every pivot must be positive.
    Diagonal,
    /// Threshold partial pivoting within the current column.
    Partial,
}

/// Sparse LU factors `P A Q = L U` kept in elimination order.
#[derive(Clone, Debug)]
struct SparseLu<T> {
    n: usize,
    /// Elimination step -> original column (unknown).
    col_perm: Vec<usize>,
    /// Elimination step -> original row (equation) used as pivot.
    pivot_rows: Vec<usize>,
    /// Multipliers applied at each step: `(original row, l)`.
    lower: Vec<Vec<(usize, T)>>,
    /// Pivot rows in step coordinates; the first entry is the pivot.
    upper: Vec<Vec<(usize, T)>>,
}

const THRESHOLD: f64 = 0.1;

impl<T: Scalar> SparseLu<T> {
    fn factor(a: &SparseSymMatrix<T>, mode: Pivoting) -> Result<Self, LinalgError> {
        let n = a.dim();
        let col_perm = rcm_ordering(a);
        let mut pos = vec![0; n];
        for (k, &c) in col_perm.iter().enumerate() {
            pos[c] = k;
        }
        // Rows are kept under their original index; columns in step coordinates.
        let mut rows: Vec<Vec<(usize, T)>> = (0..n)
            .map(|i| {
                let mut r: Vec<(usize, T)> = a.row(i).map(|(j, v)| (pos[j], v)).collect();
                r.sort_by_key(|e| e.0);
                r
            })
            .collect();
        let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, r) in rows.iter().enumerate() {
            for &(j, _) in r {
                col_rows[j].push(i);
            }
        }
        let mut active = vec![true; n];
        let mut scale = a.max_abs();
        let pivot_tol = T::epsilon().powf(T::lit(0.75));

        let mut pivot_rows = Vec::with_capacity(n);
        let mut lower = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        for k in 0..n {
            let cands: Vec<usize> = std::mem::take(&mut col_rows[k])
                .into_iter()
                .filter(|&i| active[i] && rows[i].first().is_some_and(|e| e.0 == k))
                .collect();
            let value = |i: usize| rows[i][0].1;
            let p = match mode {
                Pivoting::Diagonal => {
                    let diag = col_perm[k];
                    let v = if cands.contains(&diag) {
                        value(diag)
                    } else {
                        T::zero()
                    };
                    if !(v > pivot_tol * scale) {
                        return Err(LinalgError::NotPositiveDefinite {
                            index: diag,
                            pivot: v.to_f64_lossy(),
                        });
                    }
                    diag
                }
                Pivoting::Partial => {
                    let max = cands
                        .iter()
                        .map(|&i| value(i).abs())
                        .fold(T::zero(), T::max);
                    if !(max > pivot_tol * scale) {
                        return Err(LinalgError::Singular {
                            index: col_perm[k],
                            pivot: max.to_f64_lossy(),
                        });
                    }
                    let cut = max * T::lit(THRESHOLD);
                    *cands
                        .iter()
                        .filter(|&&i| value(i).abs() >= cut)
                        .min_by_key(|&&i| (rows[i].len(), i != col_perm[k], i))
                        .expect("at least the maximal candidate qualifies")
                }
            };
            let pivot_row = std::mem::take(&mut rows[p]);
            active[p] = false;
            let piv = pivot_row[0].1;
            scale = scale.max(piv.abs());

            let mut mults = Vec::with_capacity(cands.len().saturating_sub(1));
            for &i in &cands {
                if i == p {
                    continue;
                }
                let l = rows[i][0].1 / piv;
                let old = std::mem::take(&mut rows[i]);
                let mut merged = Vec::with_capacity(old.len() + pivot_row.len());
                let (mut x, mut y) = (1, 1);
                while x < old.len() || y < pivot_row.len() {
                    let cx = old.get(x).map_or(usize::MAX, |e| e.0);
                    let cy = pivot_row.get(y).map_or(usize::MAX, |e| e.0);
                    if cx < cy {
                        merged.push(old[x]);
                        x += 1;
                    } else if cy < cx {
                        merged.push((cy, -l * pivot_row[y].1));
                        col_rows[cy].push(i);
                        y += 1;
                    } else {
                        merged.push((cx, old[x].1 - l * pivot_row[y].1));
                        x += 1;
                        y += 1;
                    }
                }
                rows[i] = merged;
                mults.push((i, l));
            }
            pivot_rows.push(p);
            lower.push(mults);
            upper.push(pivot_row);
        }
        Ok(SparseLu {
            n,
            col_perm,
            pivot_rows,
            lower,
            upper,
        })
    }

    fn solve(&self, rhs: &[T]) -> Vec<T> {
        let mut y = rhs.to_vec();
        for (k, mults) in self.lower.iter().enumerate() {
            let yp = y[self.pivot_rows[k]];
            for &(i, l) in mults {
                y[i] -= l * yp;
            }
        }
        let mut z = vec![T::zero(); self.n];
        for k in (0..self.n).rev() {
            let row = &self.upper[k];
            let s = ordered_sum(row[1..].iter().map(|&(j, u)| u * z[j]));
            z[k] = (y[self.pivot_rows[k]] - s) / row[0].1;
        }
        let mut x = vec![T::zero(); self.n];
        for (k, &c) in self.col_perm.iter().enumerate() {
            x[c] = z[k];
        }
        x
    }

    fn fill(&self) -> usize {
        self.upper.iter().map(Vec::len).sum::<usize>()
            + self.lower.iter().map(Vec::len).sum::<usize>()
    }
}

/// Residual contract `‖Sx − b‖₂ ≤ tol·(‖S‖_F‖x‖₂ + ‖b‖₂)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub residual_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-10,
        }
    }
}

/// A factorization checked against the residual contract on every solve.
#[derive(Clone, Debug)]
pub struct Factorization<T> {
    matrix: SparseSymMatrix<T>,
    lu: SparseLu<T>,
    frobenius: T,
    tol: T,
}

impl<T: Scalar> Factorization<T> {
    /// Factors an SPD matrix; fails with [`LinalgError::NotPositiveDefinite`] otherwise.
    pub fn spd(a: &SparseSymMatrix<T>, opts: SolverOptions) -> Result<Self, LinalgError> {
        Self::new(a, Pivoting::Diagonal, opts)
    }

    /// Factors a nonsingular symmetric (possibly indefinite) matrix.
    pub fn indefinite(a: &SparseSymMatrix<T>, opts: SolverOptions) -> Result<Self, LinalgError> {
        Self::new(a, Pivoting::Partial, opts)
    }

    fn new(
        a: &SparseSymMatrix<T>,
        mode: Pivoting,
        opts: SolverOptions,
    ) -> Result<Self, LinalgError> {
        a.check_symmetric()?;
        let lu = SparseLu::factor(a, mode)?;
        let tol = T::lit(opts.residual_tol).max(T::residual_tol());
        Ok(Self {
            matrix: a.clone(),
            lu,
            frobenius: a.frobenius_norm(),
            tol,
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.n
    }

    /// Stored entries in the factors.
    pub fn fill(&self) -> usize {
        self.lu.fill()
    }

    pub fn matrix(&self) -> &SparseSymMatrix<T> {
        &self.matrix
    }

    /// Solves with one step of iterative refinement and checks the residual.
    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>, LinalgError> {
        if rhs.len() != self.lu.n {
            return Err(LinalgError::DimensionMismatch {
                expected: self.lu.n,
                found: rhs.len(),
            });
        }
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        let mut x = self.lu.solve(rhs);
        let r = self.residual(&x, rhs);
        let dx = self.lu.solve(&r);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += *di;
        }
        let r = self.residual(&x, rhs);
        let res = norm2(&r);
        let bound = self.tol * (self.frobenius * norm2(&x) + norm2(rhs));
        if !(res <= bound) {
            return Err(LinalgError::ResidualTooLarge {
                residual: res.to_f64_lossy(),
                bound: bound.to_f64_lossy(),
            });
        }
        Ok(x)
    }

    fn residual(&self, x: &[T], rhs: &[T]) -> Vec<T> {
        let ax = self.matrix.mul_vec(x);
        rhs.iter().zip(ax).map(|(&b, v)| b - v).collect()
    }
}

/// One-shot SPD solve.
pub fn solve_spd<T: Scalar>(a: &SparseSymMatrix<T>, rhs: &[T]) -> Result<Vec<T>, LinalgError> {
    Factorization::spd(a, SolverOptions::default())?.solve(rhs)
}

/// One-shot symmetric indefinite solve.
pub fn solve_sym_indefinite<T: Scalar>(
    a: &SparseSymMatrix<T>,
    rhs: &[T],
) -> Result<Vec<T>, LinalgError> {
    Factorization::indefinite(a, SolverOptions::default())?.solve(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn dense(rows: &[&[f64]]) -> SparseSymMatrix<f64> {
        SparseSymMatrix::from_dense(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identity_and_diagonal() {
        let i = dense(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let b = [3.0, -1.0, 2.5];
        assert_eq!(solve_spd(&i, &b).unwrap(), b.to_vec());
        let d = dense(&[&[2.0, 0.0], &[0.0, 4.0]]);
        assert_eq!(solve_spd(&d, &[2.0, 8.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn antidiagonal_needs_pivoting() {
        let a = dense(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(
            solve_sym_indefinite(&a, &[1.0, 2.0]).unwrap(),
            vec![2.0, 1.0]
        );
        assert!(matches!(
            solve_spd(&a, &[1.0, 2.0]),
            Err(LinalgError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn small_saddle_point_by_substitution() {
        // [[I, Bᵀ], [B, 0]] with B = [1 1]: x1 + y = 1, x2 + y = 2, x1 + x2 = 0
        let a = dense(&[&[1.0, 0.0, 1.0], &[0.0, 1.0, 1.0], &[1.0, 1.0, 0.0]]);
        let x = solve_sym_indefinite(&a, &[1.0, 2.0, 0.0]).unwrap();
        // y = 3/2, x1 = -1/2, x2 = 1/2
        assert_relative_eq!(x[0], -0.5, epsilon = 1e-15);
        assert_relative_eq!(x[1], 0.5, epsilon = 1e-15);
        assert_relative_eq!(x[2], 1.5, epsilon = 1e-15);
    }

    #[test]
    fn singular_matrix_reports_unknown() {
        let a = dense(&[&[1.0, 1.0], &[1.0, 1.0]]);
        match solve_sym_indefinite(&a, &[1.0, 1.0]) {
            Err(LinalgError::Singular { index, .. }) => assert!(index < 2),
            other => panic!("expected singular, got {other:?}"),
        }
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let rows = vec![vec![1.0, 2.0], vec![3.0, 1.0]];
        assert!(matches!(
            SparseSymMatrix::<f64>::from_dense(&rows),
            Err(LinalgError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let f = Factorization::spd(&dense(&[&[1.0]]), SolverOptions::default()).unwrap();
        assert!(matches!(
            f.solve(&[1.0, 2.0]),
            Err(LinalgError::DimensionMismatch {
                expected: 1,
                found: 2
            })
        ));
    }

    #[test]
    fn rcm_is_a_permutation_with_dense_rows_last() {
        // arrow matrix: node 0 coupled to everything
        let n = 400;
        let mut b = SymTripletBuilder::new(n);
        for i in 0..n {
            b.add(i, i, 4.0);
            if i + 1 < n {
                b.add(i, i + 1, -1.0);
            }
            if i > 0 {
                b.add(0, i, 0.01);
            }
        }
        let a = b.build();
        let order = rcm_ordering(&a);
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(sorted, (0..n).collect::<Vec<_>>());
        assert_eq!(*order.last().unwrap(), 0);
        let x = solve_spd(&a, &vec![1.0; n]).unwrap();
        let r: Vec<f64> = a.mul_vec(&x).iter().map(|v| v - 1.0).collect();
        assert!(norm2(&r) < 1e-12);
    }

    fn random_sym(n: usize, seed: &[f64], shift: f64) -> SparseSymMatrix<f64> {
        let mut b = SymTripletBuilder::new(n);
        let mut k = 0;
        for i in 0..n {
            b.add(i, i, shift);
            for j in i + 1..n {
                let v = seed[k % seed.len()];
                k += 1;
                if (i * 7 + j * 3) % 4 == 0 {
                    b.add(i, j, v);
                }
            }
        }
        b.build()
    }

    proptest! {
        #[test]
        fn indefinite_solve_meets_residual_contract(
            seed in prop::collection::vec(-1.0f64..1.0, 20..40),
            rhs in prop::collection::vec(-10.0f64..10.0, 12),
        ) {
            let a = random_sym(12, &seed, 0.0);
            match solve_sym_indefinite(&a, &rhs) {
                Ok(x) => {
                    let r: Vec<f64> = a.mul_vec(&x).iter().zip(&rhs).map(|(v, b)| v - b).collect();
                    prop_assert!(norm2(&r) <= 1e-10 * (a.frobenius_norm() * norm2(&x) + norm2(&rhs)));
                }
                Err(LinalgError::Singular { .. }) | Err(LinalgError::ResidualTooLarge { .. }) => {}
                Err(e) => prop_assert!(false, "unexpected error {e}"),
            }
        }

        #[test]
        fn diagonally_dominant_is_spd(
            seed in prop::collection::vec(-1.0f64..1.0, 20..40),
            rhs in prop::collection::vec(-10.0f64..10.0, 15),
        ) {
            let a = random_sym(15, &seed, 16.0);
            let x = solve_spd(&a, &rhs).unwrap();
            let y = solve_sym_indefinite(&a, &rhs).unwrap();
            for (p, q) in x.iter().zip(&y) {
                prop_assert!((p - q).abs() <= 1e-12 * (1.0 + p.abs()));
            }
        }
    }
}
