//! Small dense linear algebra for the d×d blocks of the acceleration formula
//! (d ≤ 8 in every system here) and the determinants behind the Levi-Civita
//! features. Hand-rolled: the scalar type must admit dual numbers, and the
//! matrices are tiny.

use crate::error::{Error, Result};
use crate::real::{BaseFloat, Real};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<B> {
    n: usize,
    data: Vec<B>,
}

impl<B: BaseFloat> SquareMatrix<B> {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix { n, data: vec![B::ZERO; n * n] }
    }

    pub fn from_rows(rows: Vec<Vec<B>>) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n);
            data.extend(row);
        }
        SquareMatrix { n, data }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> B {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: B) {
        self.data[i * self.n + j] = v;
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// y = A x
    pub fn matvec(&self, x: &[B]) -> Vec<B> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let mut acc = B::ZERO;
                for j in 0..self.n {
                    acc += self.get(i, j) * x[j];
                }
                acc
            })
            .collect()
    }

    /// y = Aᵀ x
    pub fn matvec_transpose(&self, x: &[B]) -> Vec<B> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![B::ZERO; self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                y[j] += self.get(i, j) * x[i];
            }
        }
        y
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> B {
        let mut best = B::ZERO;
        for j in 0..self.n {
            let mut s = B::ZERO;
            for i in 0..self.n {
                s += self.get(i, j).abs();
            }
            best = best.max(s);
        }
        best
    }

    pub fn max_abs(&self) -> B {
        let mut best = B::ZERO;
        for v in &self.data {
            best = best.max(v.abs());
        }
        best
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// LU factorization with partial pivoting: P A = L U.
pub struct LuFactors<B> {
    n: usize,
    lu: Vec<B>,
    perm: Vec<usize>,
}

impl<B: BaseFloat> LuFactors<B> {
    /// Factor `a`; a hard zero pivot reports a singular matrix.
    pub fn factor(a: &SquareMatrix<B>) -> Result<Self> {
        let n = a.n;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in (k + 1)..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > B::ZERO) {
                return Err(Error::SingularHessian { rcond: 0.0 });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                for j in (k + 1)..n {
                    let u = lu[k * n + j];
                    lu[i * n + j] = lu[i * n + j] - f * u;
                }
            }
        }
        Ok(LuFactors { n, lu, perm })
    }

    /// Solve A x = b.
    pub fn solve(&self, b: &[B]) -> Vec<B> {
        let n = self.n;
        assert_eq!(b.len(), n);
        // Forward substitution on P b with unit-diagonal L.
        let mut x: Vec<B> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                let l = self.lu[i * n + j];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        // Back substitution with U.
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let u = self.lu[i * n + j];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] = x[i] / self.lu[i * n + i];
        }
        x
    }

    /// Solve Aᵀ x = b using the same factors: Aᵀ = Uᵀ Lᵀ Pᵀ... i.e. solve
    /// Uᵀ z = b, Lᵀ w = z, then x = Pᵀ w.
    pub fn solve_transpose(&self, b: &[B]) -> Vec<B> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut z = b.to_vec();
        // Uᵀ is lower triangular.
        for i in 0..n {
            for j in 0..i {
                let u = self.lu[j * n + i];
                let zj = z[j];
                z[i] -= u * zj;
            }
            z[i] = z[i] / self.lu[i * n + i];
        }
        // Lᵀ is unit upper triangular.
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let l = self.lu[j * n + i];
                let zj = z[j];
                z[i] -= l * zj;
            }
        }
        // Undo the row permutation: x[perm[i]] = w[i].
        let mut x = vec![B::ZERO; n];
        for i in 0..n {
            x[self.perm[i]] = z[i];
        }
        x
    }

    /// Reciprocal condition number in the 1-norm, computed exactly from the
    /// inverse (n ≤ 8, so n extra solves are cheap).
    pub fn rcond(&self, a_norm1: B) -> f64 {
        let n = self.n;
        let mut inv_norm = B::ZERO;
        let mut e = vec![B::ZERO; n];
        for j in 0..n {
            e[j] = B::ONE;
            let col = self.solve(&e);
            e[j] = B::ZERO;
            let mut s = B::ZERO;
            for v in &col {
                s += v.abs();
            }
            inv_norm = inv_norm.max(s);
        }
        let denom = (a_norm1 * inv_norm).to_f64();
        if denom > 0.0 && denom.is_finite() {
            1.0 / denom
        } else {
            0.0
        }
    }
}

/// Determinant of the matrix whose rows are `rows`, by Gaussian elimination
/// with partial pivoting on the primal magnitude. Works on dual scalars, so
/// Levi-Civita features stay differentiable. Singular input gives exactly 0.
pub fn det_rows<S: Real>(rows: &[&[S]]) -> S {
    let n = rows.len();
    debug_assert!(rows.iter().all(|r| r.len() == n));
    let mut m: Vec<S> = Vec::with_capacity(n * n);
    for r in rows {
        m.extend_from_slice(r);
    }
    let mut det = S::one();
    for k in 0..n {
        let mut p = k;
        let mut best = m[k * n + k].primal().abs();
        for i in (k + 1)..n {
            let v = m[i * n + k].primal().abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if !(best > S::Base::ZERO) {
            return S::zero();
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let pivot = m[k * n + k];
        det = det * pivot;
        let pivot_inv = pivot.recip();
        for i in (k + 1)..n {
            let f = m[i * n + k] * pivot_inv;
            for j in (k + 1)..n {
                let u = m[k * n + j];
                let v = m[i * n + j];
                m[i * n + j] = v - f * u;
            }
        }
    }
    det
}

/// Gradient of `det_rows` with respect to every entry: the cofactor matrix,
/// each cofactor evaluated as a (n-1)×(n-1) determinant.
pub fn det_rows_gradient<S: Real>(rows: &[&[S]]) -> Vec<Vec<S>> {
    let n = rows.len();
    let mut grad = vec![vec![S::zero(); n]; n];
    if n == 1 {
        grad[0][0] = S::one();
        return grad;
    }
    let mut minor: Vec<Vec<S>> = vec![vec![S::zero(); n - 1]; n - 1];
    for i in 0..n {
        for j in 0..n {
            let mut mi = 0;
            for r in 0..n {
                if r == i {
                    continue;
                }
                let mut mj = 0;
                for c in 0..n {
                    if c == j {
                        continue;
                    }
                    minor[mi][mj] = rows[r][c];
                    mj += 1;
                }
                mi += 1;
            }
            let refs: Vec<&[S]> = minor.iter().map(|r| r.as_slice()).collect();
            let m = det_rows(&refs);
            grad[i][j] = if (i + j) % 2 == 0 { m } else { -m };
        }
    }
    grad
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat3() -> SquareMatrix<f64> {
        SquareMatrix::from_rows(vec![
            vec![2.0, 1.0, -1.0],
            vec![-3.0, -1.0, 2.0],
            vec![-2.0, 1.0, 2.0],
        ])
    }

    #[test]
    fn lu_solves_known_system() {
        let a = mat3();
        let lu = LuFactors::factor(&a).unwrap();
        // Classic system with solution (2, 3, -1).
        let x = lu.solve(&[8.0, -11.0, -3.0]);
        assert!((x[0] - 2.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
        assert!((x[2] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn transpose_solve_matches_transposed_factorization() {
        let a = mat3();
        let lu = LuFactors::factor(&a).unwrap();
        let lut = LuFactors::factor(&a.transpose()).unwrap();
        let b = [1.0, -2.0, 0.5];
        let x1 = lu.solve_transpose(&b);
        let x2 = lut.solve(&b);
        for k in 0..3 {
            assert!((x1[k] - x2[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = SquareMatrix::from_rows(vec![
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 6.0],
            vec![0.0, 1.0, 1.0],
        ]);
        assert!(LuFactors::factor(&a).is_err());
    }

    #[test]
    fn rcond_identity_is_one() {
        let mut a = SquareMatrix::zeros(4);
        for i in 0..4 {
            a.set(i, i, 1.0);
        }
        let lu = LuFactors::factor(&a).unwrap();
        assert!((lu.rcond(a.norm1()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn det_matches_cofactor_expansion() {
        let rows: Vec<Vec<f64>> = vec![
            vec![1.0, 2.0, 0.5, -1.0],
            vec![0.0, 3.0, 1.0, 2.0],
            vec![4.0, -1.0, 2.0, 0.0],
            vec![1.0, 1.0, 1.0, 1.0],
        ];
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let d = det_rows(&refs);
        // Laplace expansion along the first row, minors by hand-checked 3x3s.
        let minor = |skip_col: usize| -> f64 {
            let sub: Vec<Vec<f64>> = rows[1..]
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(c, _)| *c != skip_col)
                        .map(|(_, v)| *v)
                        .collect()
                })
                .collect();
            let s: Vec<&[f64]> = sub.iter().map(|r| r.as_slice()).collect();
            det_rows(&s)
        };
        let expect = 1.0 * minor(0) - 2.0 * minor(1) + 0.5 * minor(2) - (-1.0) * minor(3);
        assert!((d - expect).abs() < 1e-12);
    }

    #[test]
    fn det_of_identity_rows_is_one() {
        let e: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let refs: Vec<&[f64]> = e.iter().map(|r| r.as_slice()).collect();
        assert_eq!(det_rows(&refs), 1.0);
    }

    #[test]
    fn det_gradient_matches_finite_differences() {
        let rows: Vec<Vec<f64>> = vec![
            vec![1.0, 2.0, 0.5],
            vec![0.3, 3.0, 1.0],
            vec![4.0, -1.0, 2.0],
        ];
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let grad = det_rows_gradient(&refs);
        let h = 1e-6;
        for i in 0..3 {
            for j in 0..3 {
                let mut plus = rows.clone();
                let mut minus = rows.clone();
                plus[i][j] += h;
                minus[i][j] -= h;
                let rp: Vec<&[f64]> = plus.iter().map(|r| r.as_slice()).collect();
                let rm: Vec<&[f64]> = minus.iter().map(|r| r.as_slice()).collect();
                let fd = (det_rows(&rp) - det_rows(&rm)) / (2.0 * h);
                assert!(
                    (grad[i][j] - fd).abs() < 1e-6,
                    "entry ({i},{j}): {} vs {}",
                    grad[i][j],
                    fd
                );
            }
        }
    }
}
