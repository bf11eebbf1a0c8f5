//! Exact integer matrices: Hermite normal form, fraction-free determinants
//! and lattice membership. No floating point anywhere.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// Dense matrix of arbitrary-precision integers, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> IntMatrix {
        assert!(rows > 0 && cols > 0, "dimensions must be positive");
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> IntMatrix {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Result<IntMatrix> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::Unsupported("matrix dimensions must be positive".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Unsupported("ragged matrix rows".into()));
        }
        let data = rows.iter().flat_map(|r| r.iter().cloned().map(Into::into)).collect();
        Ok(IntMatrix { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::ArityMismatch { expected: self.cols, got: other.rows });
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = BigInt::zero();
                for k in 0..self.cols {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -self.get(r, j).clone();
            self.set(r, j, v);
        }
    }

    /// `self[dst] -= q * self[src]`
    fn subtract_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = self.get(dst, j) - q * self.get(src, j);
            self.set(dst, j, v);
        }
    }

    /// Row-style Hermite normal form `H = E * self` with `E` unimodular.
    ///
    /// Pivots are chosen as the smallest nonzero entry in absolute value and
    /// swapped to the top; the result is upper echelon with positive pivots
    /// and entries above each pivot reduced into `[0, pivot)`. Returns
    /// `(H, E, sign)` where `sign = det(E) ∈ {+1, -1}`.
    pub fn hermite_with_transform(&self) -> (IntMatrix, IntMatrix, i8) {
        let mut h = self.clone();
        let mut e = IntMatrix::identity(self.rows);
        let mut sign = 1i8;
        let mut pivot_row = 0usize;
        for col in 0..self.cols {
            if pivot_row == self.rows {
                break;
            }
            loop {
                // smallest |entry| among rows >= pivot_row in this column
                let mut best: Option<usize> = None;
                for i in pivot_row..self.rows {
                    if !h.get(i, col).is_zero()
                        && best.is_none_or(|b| h.get(i, col).abs() < h.get(b, col).abs())
                    {
                        best = Some(i);
                    }
                }
                let Some(best) = best else { break };
                if best != pivot_row {
                    h.swap_rows(best, pivot_row);
                    e.swap_rows(best, pivot_row);
                    sign = -sign;
                }
                let mut any_left = false;
                for i in pivot_row + 1..self.rows {
                    if !h.get(i, col).is_zero() {
                        let q = h.get(i, col) / h.get(pivot_row, col);
                        h.subtract_row(i, pivot_row, &q);
                        e.subtract_row(i, pivot_row, &q);
                        if !h.get(i, col).is_zero() {
                            any_left = true;
                        }
                    }
                }
                if !any_left {
                    break;
                }
            }
            if h.get(pivot_row, col).is_zero() {
                continue;
            }
            if h.get(pivot_row, col).is_negative() {
                h.negate_row(pivot_row);
                e.negate_row(pivot_row);
                sign = -sign;
            }
            // reduce entries above the pivot
            for i in 0..pivot_row {
                let q = h.get(i, col).div_floor(h.get(pivot_row, col));
                h.subtract_row(i, pivot_row, &q);
                e.subtract_row(i, pivot_row, &q);
            }
            pivot_row += 1;
        }
        (h, e, sign)
    }

    /// Hermite normal form alone.
    pub fn hermite_normal_form(&self) -> IntMatrix {
        self.hermite_with_transform().0
    }

    /// Determinant by fraction-free Bareiss elimination.
    pub fn bareiss_determinant(&self) -> Result<BigInt> {
        if self.rows != self.cols {
            return Err(Error::Unsupported("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut sign = 1i8;
        let mut prev = BigInt::one();
        for k in 0..n {
            if m.get(k, k).is_zero() {
                let swap = (k + 1..n).find(|&i| !m.get(i, k).is_zero());
                match swap {
                    Some(i) => {
                        m.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (m.get(i, j) * m.get(k, k) - m.get(i, k) * m.get(k, j)) / &prev;
                    m.set(i, j, v);
                }
                m.set(i, k, BigInt::zero());
            }
            prev = m.get(k, k).clone();
        }
        let det = m.get(n - 1, n - 1).clone();
        Ok(if sign < 0 { -det } else { det })
    }

    /// Hermite form plus the determinant computed two independent ways
    /// (signed pivot product and Bareiss). A disagreement is a hard failure.
    pub fn hnf_and_det(&self) -> Result<(IntMatrix, BigInt)> {
        if self.rows != self.cols {
            return Err(Error::Unsupported("determinant of a non-square matrix".into()));
        }
        let (h, _, sign) = self.hermite_with_transform();
        let mut prod = BigInt::one();
        for i in 0..self.rows {
            prod *= h.get(i, i);
        }
        // sign = det(E) and H = E*A, so det(A) = det(H) / det(E) = sign * det(H)
        let via_hnf = if sign < 0 { -prod } else { prod };
        let via_bareiss = self.bareiss_determinant()?;
        if via_hnf != via_bareiss {
            return Err(Error::DeterminantMismatch {
                hnf: via_hnf.to_string(),
                bareiss: via_bareiss.to_string(),
            });
        }
        Ok((h, via_bareiss))
    }

    /// Solves `x * self = rhs` over the integers (x a row vector), i.e. tests
    /// membership of `rhs` in the row lattice and returns coordinates.
    pub fn solve_left(&self, rhs: &[BigInt]) -> Result<Option<Vec<BigInt>>> {
        if rhs.len() != self.cols {
            return Err(Error::ArityMismatch { expected: self.cols, got: rhs.len() });
        }
        let (h, e, _) = self.hermite_with_transform();
        let mut residual: Vec<BigInt> = rhs.to_vec();
        let mut coeffs = vec![BigInt::zero(); self.rows];
        for i in 0..h.rows {
            let pivot_col = (0..h.cols).find(|&j| !h.get(i, j).is_zero());
            let Some(p) = pivot_col else { break };
            // columns left of the pivot must already be cleared
            if residual[..p].iter().any(|v| !v.is_zero()) {
                return Ok(None);
            }
            let pivot = h.get(i, p);
            if (&residual[p] % pivot).is_zero() {
                let c = &residual[p] / pivot;
                if !c.is_zero() {
                    for j in 0..h.cols {
                        residual[j] -= &c * h.get(i, j);
                    }
                }
                coeffs[i] = c;
            } else {
                return Ok(None);
            }
        }
        if residual.iter().any(|v| !v.is_zero()) {
            return Ok(None);
        }
        // x = coeffs * E
        let mut x = vec![BigInt::zero(); self.rows];
        for (i, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (xj, ej) in x.iter_mut().zip((0..e.cols).map(|j| e.get(i, j))) {
                *xj += c * ej;
            }
        }
        Ok(Some(x))
    }

    /// Integer inverse, defined exactly when `|det| = 1`.
    pub fn inverse_unimodular(&self) -> Result<Option<IntMatrix>> {
        if self.rows != self.cols {
            return Err(Error::Unsupported("inverse of a non-square matrix".into()));
        }
        let (h, e, _) = self.hermite_with_transform();
        if h != IntMatrix::identity(self.rows) {
            return Ok(None);
        }
        Ok(Some(e))
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// Integer solvability of `X * A = B` with machine arithmetic; `None` means
/// the computation overflowed and the caller should retry with `IntMatrix`.
/// `A` is `r x c`, `B` is `n x c`, one solution row per row of `B`.
pub fn solvable_left_i128(a: &[Vec<i128>], b: &[Vec<i128>]) -> Option<bool> {
    let rows = a.len();
    if rows == 0 {
        return Some(b.iter().all(|r| r.iter().all(|&v| v == 0)));
    }
    let cols = a[0].len();
    let mut h: Vec<Vec<i128>> = a.to_vec();
    let mut pivot_row = 0usize;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for col in 0..cols {
        if pivot_row == rows {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for i in pivot_row..rows {
                if h[i][col] != 0
                    && best.is_none_or(|bst: usize| h[i][col].abs() < h[bst][col].abs())
                {
                    best = Some(i);
                }
            }
            let Some(best) = best else { break };
            h.swap(best, pivot_row);
            let mut any_left = false;
            for i in pivot_row + 1..rows {
                if h[i][col] != 0 {
                    let q = h[i][col] / h[pivot_row][col];
                    for j in 0..cols {
                        let prod = q.checked_mul(h[pivot_row][j])?;
                        h[i][j] = h[i][j].checked_sub(prod)?;
                    }
                    if h[i][col] != 0 {
                        any_left = true;
                    }
                }
            }
            if !any_left {
                break;
            }
        }
        if h[pivot_row][col] != 0 {
            pivots.push((pivot_row, col));
            pivot_row += 1;
        }
    }
    for target in b {
        let mut residual = target.clone();
        for &(i, p) in &pivots {
            if residual[..p].iter().any(|&v| v != 0) {
                return Some(false);
            }
            let pivot = h[i][p];
            if residual[p] % pivot != 0 {
                return Some(false);
            }
            let c = residual[p] / pivot;
            if c != 0 {
                for j in 0..cols {
                    let prod = c.checked_mul(h[i][j])?;
                    residual[j] = residual[j].checked_sub(prod)?;
                }
            }
        }
        if residual.iter().any(|&v| v != 0) {
            return Some(false);
        }
    }
    Some(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn determinants_small() {
        let (_, d) = m(&[vec![1, 1], vec![0, 1]]).hnf_and_det().unwrap();
        assert_eq!(d, BigInt::from(1));
        let (_, d) = m(&[vec![2, 0], vec![0, 1]]).hnf_and_det().unwrap();
        assert_eq!(d, BigInt::from(2));
        let (_, d) = m(&[vec![0, 1], vec![1, 0]]).hnf_and_det().unwrap();
        assert_eq!(d, BigInt::from(-1));
        let (_, d) = m(&[vec![2, 4], vec![1, 2]]).hnf_and_det().unwrap();
        assert_eq!(d, BigInt::from(0));
    }

    #[test]
    fn hermite_shape() {
        let h = m(&[vec![4, 6], vec![2, 2]]).hermite_normal_form();
        // pivots positive, entries above reduced
        assert_eq!(h, m(&[vec![2, 0], vec![0, 2]]));
    }

    #[test]
    fn unimodular_inverse_round_trip() {
        let a = m(&[vec![1, 1, 0], vec![0, 1, 2], vec![0, 0, 1]]);
        let inv = a.inverse_unimodular().unwrap().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), IntMatrix::identity(3));
        assert_eq!(inv.mul(&a).unwrap(), IntMatrix::identity(3));
        let b = m(&[vec![2, 0], vec![0, 1]]);
        assert!(b.inverse_unimodular().unwrap().is_none());
    }

    #[test]
    fn solve_left_examples() {
        // x * [[2,0],[0,3]] = [4, -3]  =>  x = [2, -1]
        let a = m(&[vec![2, 0], vec![0, 3]]);
        let rhs = vec![BigInt::from(4), BigInt::from(-3)];
        let x = a.solve_left(&rhs).unwrap().unwrap();
        assert_eq!(x, vec![BigInt::from(2), BigInt::from(-1)]);
        // no integer solution
        let rhs = vec![BigInt::from(1), BigInt::from(0)];
        assert!(a.solve_left(&rhs).unwrap().is_none());
        // singular but solvable
        let a = m(&[vec![1, 1], vec![2, 2]]);
        let rhs = vec![BigInt::from(3), BigInt::from(3)];
        assert!(a.solve_left(&rhs).unwrap().is_some());
    }

    #[test]
    fn i128_solver_agrees_with_bigint() {
        let cases: Vec<(Vec<Vec<i128>>, Vec<i128>)> = vec![
            (vec![vec![2, 0], vec![0, 3]], vec![4, -3]),
            (vec![vec![2, 0], vec![0, 3]], vec![1, 0]),
            (vec![vec![1, 1], vec![2, 2]], vec![3, 3]),
            (vec![vec![1, 1], vec![2, 2]], vec![3, 4]),
            (vec![vec![0, 0], vec![0, 0]], vec![0, 0]),
            (vec![vec![0, 0], vec![0, 0]], vec![1, 0]),
            (vec![vec![3, 6, 9], vec![0, 2, 4]], vec![3, 8, 13]),
        ];
        for (a, rhs) in cases {
            let fast = solvable_left_i128(&a, &[rhs.clone()]).unwrap();
            let big = IntMatrix::from_rows(
                &a.iter()
                    .map(|r| r.iter().map(|&v| BigInt::from(v)).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            let slow = big
                .solve_left(&rhs.iter().map(|&v| BigInt::from(v)).collect::<Vec<_>>())
                .unwrap()
                .is_some();
            assert_eq!(fast, slow, "disagreement on {a:?} {rhs:?}");
        }
    }

    #[test]
    fn random_elementary_products_are_unimodular() {
        // deterministic pseudo-random walk over elementary row operations
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rng = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for n in 2..=4 {
            for _ in 0..20 {
                let mut a = IntMatrix::identity(n);
                for _ in 0..10 {
                    let i = (rng() % n as u64) as usize;
                    let mut j = (rng() % n as u64) as usize;
                    if i == j {
                        j = (j + 1) % n;
                    }
                    match rng() % 3 {
                        0 => {
                            let mut t = IntMatrix::identity(n);
                            t.set(i, j, BigInt::from(if rng() % 2 == 0 { 1 } else { -1 }));
                            a = a.mul(&t).unwrap();
                        }
                        1 => {
                            let mut t = IntMatrix::identity(n);
                            t.set(i, i, BigInt::zero());
                            t.set(j, j, BigInt::zero());
                            t.set(i, j, BigInt::one());
                            t.set(j, i, BigInt::one());
                            a = a.mul(&t).unwrap();
                        }
                        _ => {
                            let mut t = IntMatrix::identity(n);
                            t.set(i, i, BigInt::from(-1));
                            a = a.mul(&t).unwrap();
                        }
                    }
                }
                let (_, d) = a.hnf_and_det().unwrap();
                assert_eq!(d.abs(), BigInt::one());
            }
        }
    }
}
