//! Dense square matrices and pivoted LU factorization.
//!
//! Determinants are consumed as `(sign, log|det|)` pairs: the likelihood
//! path needs log-determinants that stay finite at ~1600 variables, and the
//! semiring-query gadgets need the sign of genuinely negative determinants.

use alloc::vec::Vec;

use crate::math;

/// Row-major dense square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: alloc::vec![0.0; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.n + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.n..(r + 1) * self.n]
    }
}

/// Sign and log-magnitude of a determinant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedLogDet {
    /// -1, 0, or +1.
    pub sign: i8,
    /// `ln |det|`; meaningless when `sign == 0`.
    pub log_abs: f64,
}

impl SignedLogDet {
    pub fn zero() -> Self {
        SignedLogDet { sign: 0, log_abs: f64::NEG_INFINITY }
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
pub struct LuFactors {
    lu: Matrix,
    /// Row permutation applied to the input; `perm[i]` is the source row.
    perm: Vec<usize>,
    /// Parity of the permutation: +1 or -1.
    perm_sign: i8,
    singular: bool,
}

impl LuFactors {
    /// Factors `a`, consuming a copy. Singular inputs are detected by an
    /// exactly zero pivot column.
    pub fn factor(a: &Matrix) -> Self {
        let n = a.n;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut perm_sign = 1i8;
        let mut singular = false;

        for col in 0..n {
            // partial pivot: largest magnitude in the column at or below the diagonal
            let mut pivot_row = col;
            let mut pivot_mag = lu.at(col, col).abs();
            for r in col + 1..n {
                let mag = lu.at(r, col).abs();
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = r;
                }
            }
            if pivot_mag == 0.0 {
                singular = true;
                continue;
            }
            if pivot_row != col {
                for c in 0..n {
                    let tmp = lu.at(col, c);
                    *lu.at_mut(col, c) = lu.at(pivot_row, c);
                    *lu.at_mut(pivot_row, c) = tmp;
                }
                perm.swap(col, pivot_row);
                perm_sign = -perm_sign;
            }
            let inv_pivot = 1.0 / lu.at(col, col);
            for r in col + 1..n {
                let factor = lu.at(r, col) * inv_pivot;
                *lu.at_mut(r, col) = factor;
                if factor != 0.0 {
                    for c in col + 1..n {
                        let sub = factor * lu.at(col, c);
                        *lu.at_mut(r, c) -= sub;
                    }
                }
            }
        }

        LuFactors { lu, perm, perm_sign, singular }
    }

    /// Determinant as sign and log-magnitude: the permutation sign times the
    /// signs of the pivots, and the sum of `ln |pivot|`.
    pub fn signed_log_det(&self) -> SignedLogDet {
        if self.singular {
            return SignedLogDet::zero();
        }
        let mut sign = self.perm_sign;
        let mut log_abs = 0.0;
        for i in 0..self.lu.n {
            let p = self.lu.at(i, i);
            if p == 0.0 {
                return SignedLogDet::zero();
            }
            if p < 0.0 {
                sign = -sign;
            }
            log_abs += math::ln(p.abs());
        }
        SignedLogDet { sign, log_abs }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Solves `A x = b`, writing into `x`.
    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        let n = self.lu.n;
        debug_assert!(!self.singular);
        for i in 0..n {
            x[i] = b[self.perm[i]];
        }
        // forward substitution with unit lower triangle
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu.at(i, j) * x[j];
            }
            x[i] = acc;
        }
        // back substitution
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu.at(i, j) * x[j];
            }
            x[i] = acc / self.lu.at(i, i);
        }
    }

    /// Full inverse, or `None` when singular.
    pub fn inverse(&self) -> Option<Matrix> {
        if self.singular {
            return None;
        }
        let n = self.lu.n;
        let mut inv = Matrix::zeros(n);
        let mut b = alloc::vec![0.0; n];
        let mut x = alloc::vec![0.0; n];
        for col in 0..n {
            b.iter_mut().for_each(|v| *v = 0.0);
            b[col] = 1.0;
            self.solve_into(&b, &mut x);
            for row in 0..n {
                *inv.at_mut(row, col) = x[row];
            }
        }
        Some(inv)
    }
}

/// Convenience wrapper: determinant of `a` as sign and log-magnitude.
pub fn signed_log_det(a: &Matrix) -> SignedLogDet {
    LuFactors::factor(a).signed_log_det()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_rows(rows: &[&[f64]]) -> Matrix {
        let n = rows.len();
        let mut m = Matrix::zeros(n);
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                *m.at_mut(r, c) = v;
            }
        }
        m
    }

    #[test]
    fn det_of_known_matrices() {
        let m = from_rows(&[&[2.0, 0.0], &[0.0, 3.0]]);
        let d = signed_log_det(&m);
        assert_eq!(d.sign, 1);
        assert!((d.log_abs - 6.0f64.ln()).abs() < 1e-14);

        // swap two rows: determinant flips sign
        let m = from_rows(&[&[0.0, 3.0], &[2.0, 0.0]]);
        let d = signed_log_det(&m);
        assert_eq!(d.sign, -1);
        assert!((d.log_abs - 6.0f64.ln()).abs() < 1e-14);

        let m = from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert_eq!(signed_log_det(&m).sign, 0);
    }

    #[test]
    fn solve_and_inverse_roundtrip() {
        let m = from_rows(&[&[4.0, 1.0, 0.0], &[1.0, 3.0, 1.0], &[0.0, 1.0, 2.0]]);
        let lu = LuFactors::factor(&m);
        let b = [1.0, -2.0, 0.5];
        let mut x = [0.0; 3];
        lu.solve_into(&b, &mut x);
        for r in 0..3 {
            let ax: f64 = (0..3).map(|c| m.at(r, c) * x[c]).sum();
            assert!((ax - b[r]).abs() < 1e-12);
        }
        let inv = lu.inverse().unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let id: f64 = (0..3).map(|k| m.at(r, k) * inv.at(k, c)).sum();
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((id - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let m = from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let lu = LuFactors::factor(&m);
        assert!(!lu.is_singular());
        let d = lu.signed_log_det();
        assert_eq!(d.sign, -1);
        assert!(d.log_abs.abs() < 1e-15);
    }
}
