use std::fmt;

use serde::Serialize;

use super::field::PrimeField;
use crate::error::{Error, Result};

/// Dense row-major matrix over a prime field. The modulus is not stored;
/// every operation takes the [`PrimeField`] it runs in.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

/// Result of row reduction: the nonzero rows of the reduced row-echelon form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: FMatrix,
    pub rank: usize,
    pub pivot_cols: Vec<usize>,
}

impl FMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = FMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from rows, reducing every entry into the field.
    pub fn from_rows(field: &PrimeField, rows: &[Vec<u64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        Self::from_rows_with_cols(field, rows, cols)
    }

    /// Like [`FMatrix::from_rows`], but fixes the column count so that empty
    /// row lists still carry their width.
    pub fn from_rows_with_cols(field: &PrimeField, rows: &[Vec<u64>], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::input(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend(r.iter().map(|&x| field.reduce(x)));
        }
        Ok(FMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Builds a matrix whose entries must already lie in `[0, p)`.
    pub fn from_reduced_rows(field: &PrimeField, rows: &[Vec<u64>], cols: usize) -> Result<Self> {
        let p = field.modulus();
        for (i, r) in rows.iter().enumerate() {
            if let Some(j) = r.iter().position(|&x| x >= p) {
                return Err(Error::input(format!(
                    "entry ({i},{j}) = {} is not reduced modulo {p}",
                    r[j]
                )));
            }
        }
        Self::from_rows_with_cols(field, rows, cols)
    }

    pub fn from_row_vec(row: Vec<u64>) -> Self {
        FMatrix {
            rows: 1,
            cols: row.len(),
            data: row,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn push_row(&mut self, row: &[u64]) {
        assert_eq!(row.len(), self.cols, "row width mismatch");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &FMatrix) -> Result<FMatrix> {
        if self.cols != other.cols {
            return Err(Error::input(format!(
                "vstack: {} vs {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(FMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &FMatrix) -> Result<FMatrix> {
        if self.rows != other.rows {
            return Err(Error::input(format!(
                "hstack: {} vs {} rows",
                self.rows, other.rows
            )));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(FMatrix {
            rows: self.rows,
            cols,
            data,
        })
    }

    pub fn transpose(&self) -> FMatrix {
        let mut t = FMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn mul(&self, field: &PrimeField, other: &FMatrix) -> Result<FMatrix> {
        if self.cols != other.rows {
            return Err(Error::input(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = FMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = field.add(out.get(i, j), field.mul(a, other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product `self · v`.
    pub fn mul_vec(&self, field: &PrimeField, v: &[u64]) -> Result<Vec<u64>> {
        if v.len() != self.cols {
            return Err(Error::input(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(0, |acc, (&a, &b)| field.add(acc, field.mul(a, b)))
            })
            .collect())
    }

    /// Row vector times matrix, `c · self`.
    pub fn left_mul_vec(&self, field: &PrimeField, c: &[u64]) -> Result<Vec<u64>> {
        if c.len() != self.rows {
            return Err(Error::input(format!(
                "coefficient row of length {} against {} rows",
                c.len(),
                self.rows
            )));
        }
        let mut out = vec![0; self.cols];
        for (r, &coef) in c.iter().enumerate() {
            if coef == 0 {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(self.row(r)) {
                *o = field.add(*o, field.mul(coef, x));
            }
        }
        Ok(out)
    }

    pub fn sub(&self, field: &PrimeField, other: &FMatrix) -> Result<FMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::input("matrix difference with mismatched shapes"));
        }
        Ok(FMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| field.sub(a, b))
                .collect(),
        })
    }

    /// Gauss-Jordan elimination. Zero rows are dropped from the returned
    /// matrix, so `matrix.rows() == rank`.
    pub fn rref(&self, field: &PrimeField) -> Rref {
        let mut m = self.clone();
        let mut pivot_cols = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(piv) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            m.swap_rows(r, piv);
            let inv = field.inv(m.get(r, c)).expect("nonzero pivot");
            for j in c..m.cols {
                let v = field.mul(m.get(r, j), inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c);
                if f == 0 {
                    continue;
                }
                for j in c..m.cols {
                    let v = field.sub(m.get(i, j), field.mul(f, m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivot_cols.push(c);
            r += 1;
        }
        m.data.truncate(r * m.cols);
        m.rows = r;
        Rref {
            matrix: m,
            rank: r,
            pivot_cols,
        }
    }

    pub fn rank(&self, field: &PrimeField) -> usize {
        self.rref(field).rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

impl fmt::Debug for FMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.row_vecs()).finish()
    }
}

impl Serialize for FMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.row_vecs().serialize(s)
    }
}

/// Finds `c` with `c · m = target`, or `None` when `target` is outside the
/// row space of `m`. Free variables are set to zero.
pub fn solve_left(field: &PrimeField, target: &[u64], m: &FMatrix) -> Result<Option<Vec<u64>>> {
    if target.len() != m.cols() {
        return Err(Error::input(format!(
            "target of length {} against {} columns",
            target.len(),
            m.cols()
        )));
    }
    // c · m = t  <=>  m^T c^T = t^T; reduce [m^T | t^T].
    let aug = m
        .transpose()
        .hstack(&FMatrix::from_row_vec(target.to_vec()).transpose())?;
    let red = aug.rref(field);
    let unknowns = m.rows();
    if red.pivot_cols.last() == Some(&unknowns) {
        return Ok(None);
    }
    let mut c = vec![0; unknowns];
    for (i, &pc) in red.pivot_cols.iter().enumerate() {
        c[pc] = red.matrix.get(i, unknowns);
    }
    Ok(Some(c))
}

/// The d × (d−1) Cauchy matrix with entry (i, j) = 1 / (x_i − y_j).
pub fn cauchy_matrix(field: &PrimeField, xs: &[u64], ys: &[u64]) -> Result<FMatrix> {
    let p = field.modulus();
    if let Some(&v) = xs.iter().chain(ys).find(|&&v| v >= p) {
        return Err(Error::input(format!(
            "Cauchy parameter {v} is not an element of F_{p}"
        )));
    }
    let mut seen = std::collections::BTreeSet::new();
    for &v in xs.iter().chain(ys) {
        if !seen.insert(v) {
            return Err(Error::input(format!(
                "Cauchy parameters must be pairwise distinct across xs and ys; {v} repeats"
            )));
        }
    }
    let mut m = FMatrix::zeros(xs.len(), ys.len());
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            let inv = field.inv(field.sub(x, y)).expect("distinct parameters");
            m.set(i, j, inv);
        }
    }
    Ok(m)
}

/// Default parameters xs = (0, …, d−1), ys = (d, …, 2d−2). Needs p ≥ 2d−1.
pub fn default_cauchy_params(d: usize) -> (Vec<u64>, Vec<u64>) {
    let xs = (0..d as u64).collect();
    let ys = (d as u64..(2 * d - 1) as u64).collect();
    (xs, ys)
}

pub fn default_cauchy_matrix(field: &PrimeField, d: usize) -> Result<FMatrix> {
    if d < 2 {
        return Err(Error::input("Cauchy matrix needs d >= 2"));
    }
    if field.modulus() < (2 * d - 1) as u64 {
        return Err(Error::input(format!(
            "a {d}x{} Cauchy matrix needs {} distinct field elements but p = {}",
            d - 1,
            2 * d - 1,
            field.modulus()
        )));
    }
    let (xs, ys) = default_cauchy_params(d);
    cauchy_matrix(field, &xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn m(field: &PrimeField, rows: &[&[u64]]) -> FMatrix {
        let rows: Vec<Vec<u64>> = rows.iter().map(|r| r.to_vec()).collect();
        FMatrix::from_rows(field, &rows).unwrap()
    }

    /// Leibniz expansion; independent of elimination.
    fn det_leibniz(field: &PrimeField, a: &FMatrix) -> u64 {
        let n = a.rows();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut total = 0;
        permute(field, a, &mut perm, 0, &mut total);
        total
    }

    fn permute(field: &PrimeField, a: &FMatrix, perm: &mut Vec<usize>, k: usize, total: &mut u64) {
        let n = perm.len();
        if k == n {
            let mut inversions = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if perm[i] > perm[j] {
                        inversions += 1;
                    }
                }
            }
            let prod = (0..n).fold(1, |acc, i| field.mul(acc, a.get(i, perm[i])));
            *total = if inversions % 2 == 0 {
                field.add(*total, prod)
            } else {
                field.sub(*total, prod)
            };
            return;
        }
        for i in k..n {
            perm.swap(k, i);
            permute(field, a, perm, k + 1, total);
            perm.swap(k, i);
        }
    }

    fn submatrix(a: &FMatrix, rows: &[usize], cols: &[usize]) -> FMatrix {
        let mut s = FMatrix::zeros(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                s.set(i, j, a.get(r, c));
            }
        }
        s
    }

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                go(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        go(0, n, k, &mut cur, &mut out);
        out
    }

    #[test]
    fn rref_dependent_rows() {
        let f5 = f(5);
        let r = m(&f5, &[&[1, 2], &[2, 4]]).rref(&f5);
        assert_eq!(r.rank, 1);
        assert_eq!(r.matrix, m(&f5, &[&[1, 2]]));
        assert_eq!(r.pivot_cols, vec![0]);
    }

    #[test]
    fn rref_identity() {
        let f5 = f(5);
        let r = FMatrix::identity(3).rref(&f5);
        assert_eq!(r.rank, 3);
        assert_eq!(r.matrix, FMatrix::identity(3));
    }

    #[test]
    fn rref_rank_matches_minor_oracle() {
        let f5 = f(5);
        let a = m(&f5, &[&[3, 1], &[2, 3], &[4, 2]]);
        // Oracle: rank 2 iff some 2x2 minor is nonzero.
        let oracle_rank = if subsets(3, 2)
            .iter()
            .any(|rows| det_leibniz(&f5, &submatrix(&a, rows, &[0, 1])) != 0)
        {
            2
        } else {
            1
        };
        assert_eq!(oracle_rank, 2);
        assert_eq!(a.rank(&f5), oracle_rank);
    }

    #[test]
    fn solve_left_examples() {
        let f5 = f(5);
        let id = FMatrix::identity(3);
        assert_eq!(
            solve_left(&f5, &[1, 2, 3], &id).unwrap(),
            Some(vec![1, 2, 3])
        );
        let a = m(&f5, &[&[1, 1]]);
        assert_eq!(solve_left(&f5, &[2, 2], &a).unwrap(), Some(vec![2]));
        // (1,3) is not a multiple of (1,2) mod 5: enumerate c·(1,2).
        let b = m(&f5, &[&[1, 2]]);
        assert!((0..5).all(|c| [c, (2 * c) % 5] != [1, 3]));
        assert_eq!(solve_left(&f5, &[1, 3], &b).unwrap(), None);
        assert!(solve_left(&f5, &[1], &b).is_err());
    }

    #[test]
    fn cauchy_examples() {
        let f5 = f(5);
        let c = cauchy_matrix(&f5, &[0, 1, 2], &[3, 4]).unwrap();
        assert_eq!(c, m(&f5, &[&[3, 1], &[2, 3], &[4, 2]]));
        // Oracle: every 1x1 and 2x2 minor is nonzero by direct determinant.
        for k in 1..=2 {
            for rows in subsets(3, k) {
                for cols in subsets(2, k) {
                    assert_ne!(det_leibniz(&f5, &submatrix(&c, &rows, &cols)), 0);
                }
            }
        }
        let f3 = f(3);
        let c = cauchy_matrix(&f3, &[0, 1], &[2]).unwrap();
        assert_eq!(c, m(&f3, &[&[1], &[2]]));
        assert_eq!(f3.mul(c.get(0, 0), f3.sub(0, 2)), 1);
        assert_eq!(f3.mul(c.get(1, 0), f3.sub(1, 2)), 1);
        assert!(cauchy_matrix(&f5, &[0, 0, 2], &[3, 4]).is_err());
        assert!(cauchy_matrix(&f5, &[0, 1, 2], &[2, 4]).is_err());
    }

    #[test]
    fn default_cauchy_needs_2d_minus_1_elements() {
        assert!(default_cauchy_matrix(&f(5), 3).is_ok());
        assert!(default_cauchy_matrix(&f(7), 5).is_err());
        assert!(default_cauchy_matrix(&f(11), 5).is_ok());
    }

    #[test]
    fn cauchy_square_submatrices_invertible_up_to_d7() {
        for d in 2..=7usize {
            let field = f(crate::linalg::next_prime(2 * d as u64 - 1));
            let c = default_cauchy_matrix(&field, d).unwrap();
            for k in 1..d {
                for rows in subsets(d, k) {
                    for cols in subsets(d - 1, k) {
                        let sub = submatrix(&c, &rows, &cols);
                        assert_ne!(
                            det_leibniz(&field, &sub),
                            0,
                            "d={d} rows={rows:?} cols={cols:?}"
                        );
                    }
                }
            }
        }
    }

    fn arb_matrix() -> impl Strategy<Value = (u64, Vec<Vec<u64>>)> {
        (
            prop::sample::select(vec![2u64, 3, 5, 7]),
            1usize..5,
            1usize..5,
        )
            .prop_flat_map(|(p, r, c)| {
                (
                    Just(p),
                    prop::collection::vec(prop::collection::vec(0..p, c), r),
                )
            })
    }

    proptest! {
        #[test]
        fn rref_preserves_row_space((p, rows) in arb_matrix()) {
            let field = f(p);
            let a = FMatrix::from_rows(&field, &rows).unwrap();
            let red = a.rref(&field);
            prop_assert_eq!(red.matrix.rows(), red.rank);
            prop_assert!((0..red.rank).all(|i| red.matrix.row(i).iter().any(|&x| x != 0)));
            for r in 0..a.rows() {
                let c = solve_left(&field, a.row(r), &red.matrix).unwrap();
                prop_assert!(c.is_some());
            }
            // and back: every rref row lies in the original row space
            for r in 0..red.rank {
                prop_assert!(solve_left(&field, red.matrix.row(r), &a).unwrap().is_some());
            }
        }

        #[test]
        fn solve_left_is_exact((p, rows) in arb_matrix(), seed in any::<u64>()) {
            let field = f(p);
            let a = FMatrix::from_rows(&field, &rows).unwrap();
            let target: Vec<u64> = (0..a.cols()).map(|j| (seed >> (j * 3)) % p).collect();
            match solve_left(&field, &target, &a).unwrap() {
                Some(c) => prop_assert_eq!(a.left_mul_vec(&field, &c).unwrap(), target),
                None => {
                    let stacked = a.vstack(&FMatrix::from_row_vec(target)).unwrap();
                    prop_assert_eq!(stacked.rank(&field), a.rank(&field) + 1);
                }
            }
        }
    }
}
