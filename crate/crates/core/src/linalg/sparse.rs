//! Compressed sparse column storage and a left-looking sparse LU with
//! threshold partial pivoting (Gilbert–Peierls).

use crate::linalg::ordering::nested_dissection;
use crate::Real;

const NONE: usize = usize::MAX;

/// Coordinate-format builder; duplicate entries are summed.
#[derive(Debug, Clone, Default)]
pub struct TripletMatrix<T> {
    pub nrows: usize,
    pub ncols: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> TripletMatrix<T> {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            rows: Vec::new(),
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn push(&mut self, r: usize, c: usize, v: T) {
        debug_assert!(r < self.nrows && c < self.ncols);
        if v != T::zero() {
            self.rows.push(r);
            self.cols.push(c);
            self.vals.push(v);
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn to_csc(&self) -> CscMatrix<T> {
        let mut count = vec![0usize; self.ncols + 1];
        for &c in &self.cols {
            count[c + 1] += 1;
        }
        for c in 0..self.ncols {
            count[c + 1] += count[c];
        }
        let mut next = count.clone();
        let mut ri = vec![0usize; self.nnz()];
        let mut vx = vec![T::zero(); self.nnz()];
        for k in 0..self.nnz() {
            let c = self.cols[k];
            ri[next[c]] = self.rows[k];
            vx[next[c]] = self.vals[k];
            next[c] += 1;
        }
        // sort rows inside each column and merge duplicates
        let mut colptr = vec![0usize; self.ncols + 1];
        let mut rowind = Vec::with_capacity(ri.len());
        let mut values = Vec::with_capacity(ri.len());
        let mut buf: Vec<(usize, T)> = Vec::new();
        for c in 0..self.ncols {
            buf.clear();
            buf.extend((count[c]..count[c + 1]).map(|p| (ri[p], vx[p])));
            buf.sort_unstable_by_key(|e| e.0);
            for &(r, v) in &buf {
                if rowind.len() > colptr[c] && *rowind.last().unwrap() == r {
                    *values.last_mut().unwrap() += v;
                } else {
                    rowind.push(r);
                    values.push(v);
                }
            }
            colptr[c + 1] = rowind.len();
        }
        CscMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            colptr,
            rowind,
            values,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CscMatrix<T> {
    pub nrows: usize,
    pub ncols: usize,
    pub colptr: Vec<usize>,
    pub rowind: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Real> CscMatrix<T> {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        (self.colptr[c]..self.colptr[c + 1]).map(move |p| (self.rowind[p], self.values[p]))
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        for c in 0..self.ncols {
            let xc = x[c];
            if xc != T::zero() {
                for (r, v) in self.column(c) {
                    y[r] += v * xc;
                }
            }
        }
        y
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Entry lookup by binary search (rows sorted within columns).
    pub fn get(&self, r: usize, c: usize) -> T {
        let rows = &self.rowind[self.colptr[c]..self.colptr[c + 1]];
        match rows.binary_search(&r) {
            Ok(k) => self.values[self.colptr[c] + k],
            Err(_) => T::zero(),
        }
    }

    /// Largest |A - Aᵀ| entry; zero for symmetric matrices.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for c in 0..self.ncols {
            for (r, v) in self.column(c) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }

    /// Row-major dense copy (small systems only).
    pub fn to_dense(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.nrows * self.ncols];
        for c in 0..self.ncols {
            for (r, v) in self.column(c) {
                d[r * self.ncols + c] += v;
            }
        }
        d
    }

    fn symmetric_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.ncols];
        for c in 0..self.ncols {
            for (r, _) in self.column(c) {
                if r != c {
                    adj[c].push(r);
                    adj[r].push(c);
                }
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }
}

/// `P A Q = L U` with unit lower triangular `L`.
#[derive(Debug, Clone)]
pub struct SparseLu<T> {
    n: usize,
    l: CscMatrix<T>,
    u: CscMatrix<T>,
    pinv: Vec<usize>,
    q: Vec<usize>,
}

impl<T: Real> SparseLu<T> {
    /// Factorises a square matrix with a nested-dissection column order.
    /// `pivot_tol` in (0, 1] is the diagonal preference threshold; `sing_tol`
    /// is the relative pivot magnitude below which the matrix is declared
    /// singular. On failure returns the offending elimination step.
    pub fn factor(a: &CscMatrix<T>, pivot_tol: T, sing_tol: T) -> Result<Self, usize> {
        assert_eq!(a.nrows, a.ncols);
        let n = a.ncols;
        let q = nested_dissection(&a.symmetric_adjacency());
        let scale = a.max_abs();

        let mut lp = vec![0usize; n + 1];
        let mut li: Vec<usize> = Vec::with_capacity(4 * a.nnz() + n);
        let mut lx: Vec<T> = Vec::with_capacity(4 * a.nnz() + n);
        let mut up = vec![0usize; n + 1];
        let mut ui: Vec<usize> = Vec::with_capacity(4 * a.nnz() + n);
        let mut ux: Vec<T> = Vec::with_capacity(4 * a.nnz() + n);

        let mut pinv = vec![NONE; n];
        let mut x = vec![T::zero(); n];
        let mut xi = vec![0usize; n];
        let mut mark = vec![NONE; n];
        // dfs stack of (node, next child position)
        let mut stack: Vec<(usize, usize)> = Vec::new();

        for k in 0..n {
            lp[k] = li.len();
            up[k] = ui.len();
            let col = q[k];

            // symbolic: reach of column `col` in the graph of L
            let mut top = n;
            for p in a.colptr[col]..a.colptr[col + 1] {
                let r = a.rowind[p];
                if mark[r] == k {
                    continue;
                }
                mark[r] = k;
                stack.push((r, 0));
                while let Some(&mut (j, ref mut pos)) = stack.last_mut() {
                    let jcol = pinv[j];
                    let mut pushed = false;
                    if jcol != NONE {
                        let (s, e) = (lp[jcol] + 1, lp[jcol + 1]);
                        while s + *pos < e {
                            let i = li[s + *pos];
                            *pos += 1;
                            if mark[i] != k {
                                mark[i] = k;
                                stack.push((i, 0));
                                pushed = true;
                                break;
                            }
                        }
                    }
                    if !pushed {
                        stack.pop();
                        top -= 1;
                        xi[top] = j;
                    }
                }
            }
            // numeric: sparse triangular solve
            for p in a.colptr[col]..a.colptr[col + 1] {
                x[a.rowind[p]] = a.values[p];
            }
            for px in top..n {
                let j = xi[px];
                let jcol = pinv[j];
                if jcol == NONE {
                    continue;
                }
                let xj = x[j];
                if xj == T::zero() {
                    continue;
                }
                for p in lp[jcol] + 1..lp[jcol + 1] {
                    x[li[p]] -= lx[p] * xj;
                }
            }
            // pivot selection
            let mut ipiv = NONE;
            let mut amax = T::zero();
            for px in top..n {
                let i = xi[px];
                if pinv[i] == NONE {
                    if x[i].abs() > amax || ipiv == NONE {
                        amax = x[i].abs();
                        ipiv = i;
                    }
                } else {
                    ui.push(pinv[i]);
                    ux.push(x[i]);
                }
            }
            if ipiv == NONE || amax <= sing_tol * scale || !amax.is_finite() {
                return Err(k);
            }
            if pinv[col] == NONE && x[col].abs() >= amax * pivot_tol {
                ipiv = col;
            }
            let pivot = x[ipiv];
            ui.push(k);
            ux.push(pivot);
            pinv[ipiv] = k;
            li.push(ipiv);
            lx.push(T::one());
            for px in top..n {
                let i = xi[px];
                if pinv[i] == NONE {
                    li.push(i);
                    lx.push(x[i] / pivot);
                }
                x[i] = T::zero();
            }
        }
        lp[n] = li.len();
        up[n] = ui.len();
        for r in li.iter_mut() {
            *r = pinv[*r];
        }
        Ok(Self {
            n,
            l: CscMatrix {
                nrows: n,
                ncols: n,
                colptr: lp,
                rowind: li,
                values: lx,
            },
            u: CscMatrix {
                nrows: n,
                ncols: n,
                colptr: up,
                rowind: ui,
                values: ux,
            },
            pinv,
            q,
        })
    }

    pub fn fill(&self) -> usize {
        self.l.nnz() + self.u.nnz()
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut y = vec![T::zero(); n];
        for i in 0..n {
            y[self.pinv[i]] = b[i];
        }
        // L y = Pb (unit diagonal stored first in each column)
        for j in 0..n {
            let yj = y[j];
            if yj != T::zero() {
                for p in self.l.colptr[j] + 1..self.l.colptr[j + 1] {
                    y[self.l.rowind[p]] -= self.l.values[p] * yj;
                }
            }
        }
        // U z = y (diagonal stored last in each column)
        for j in (0..n).rev() {
            let end = self.u.colptr[j + 1] - 1;
            y[j] /= self.u.values[end];
            let yj = y[j];
            if yj != T::zero() {
                for p in self.u.colptr[j]..end {
                    y[self.u.rowind[p]] -= self.u.values[p] * yj;
                }
            }
        }
        let mut x = vec![T::zero(); n];
        for k in 0..n {
            x[self.q[k]] = y[k];
        }
        x
    }
}
