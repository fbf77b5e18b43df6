use crate::Real;

/// LU factorisation with partial pivoting of a row-major square matrix.
#[derive(Debug, Clone)]
pub struct DenseLu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Real> DenseLu<T> {
    /// Factorises `a` (row-major, `n * n`). Returns `None` when a pivot
    /// falls below `rel_tol` times the largest entry of `a`.
    pub fn new(n: usize, a: &[T], rel_tol: T) -> Option<Self> {
        assert_eq!(a.len(), n * n);
        let mut lu = a.to_vec();
        let scale = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if scale == T::zero() && n > 0 {
            return None;
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (mut piv, mut amax) = (k, lu[k * n + k].abs());
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > amax {
                    amax = v;
                    piv = i;
                }
            }
            if amax <= rel_tol * scale {
                return None;
            }
            if piv != k {
                for j in 0..n {
                    lu.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        let u = lu[k * n + j];
                        lu[i * n + j] -= f * u;
                    }
                }
            }
        }
        Some(Self { n, lu, perm })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }
}

/// Solves a small dense system; `None` if numerically singular.
pub fn solve_dense<T: Real>(n: usize, a: &[T], b: &[T]) -> Option<Vec<T>> {
    DenseLu::new(n, a, T::epsilon() * T::lit(64.0)).map(|lu| lu.solve(b))
}

/// Eigenvalues `(min, max)` of the symmetric matrix `[[a, b], [b, c]]`.
pub fn sym2_eigenvalues<T: Real>(a: T, b: T, c: T) -> (T, T) {
    let half = T::lit(0.5);
    let mean = (a + c) * half;
    let r = (((a - c) * half).powi(2) + b * b).sqrt();
    (mean - r, mean + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_with_pivoting() {
        let a = [0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let x = [1.0, -2.0, 0.5];
        let b: Vec<f64> = (0..3).map(|i| (0..3).map(|j| a[i * 3 + j] * x[j]).sum()).collect();
        let s = solve_dense(3, &a, &b).unwrap();
        for i in 0..3 {
            assert!((s[i] - x[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn detects_singular() {
        let a = [1.0, 2.0, 2.0, 4.0];
        assert!(solve_dense(2, &a, &[1.0, 2.0]).is_none());
    }

    #[test]
    fn eigenvalues_of_diagonal_and_rotated() {
        let (lo, hi) = sym2_eigenvalues(1.0, 0.0, 100.0);
        assert_eq!((lo, hi), (1.0, 100.0));
        let (lo, hi) = sym2_eigenvalues(2.0f64, 1.0, 2.0);
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 3.0).abs() < 1e-15);
    }
}
