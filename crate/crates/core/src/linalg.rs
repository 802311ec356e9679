//! Small linear-algebra kernels: tridiagonal and banded solves, dense
//! Gaussian elimination for tiny systems, and a symmetric tridiagonal
//! eigensolver (Sturm bisection + inverse iteration).

use crate::error::{Error, Result};
use crate::real::Real;

/// Thomas algorithm. Intended for diagonally dominant / SPD systems; no pivoting.
pub fn solve_tridiagonal<T: Real>(
    lower: &[T],
    diag: &[T],
    upper: &[T],
    rhs: &[T],
) -> Result<Vec<T>> {
    let n = diag.len();
    debug_assert!(lower.len() + 1 == n && upper.len() + 1 == n && rhs.len() == n);
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    let mut denom = diag[0];
    if denom == T::zero() {
        return Err(Error::Singular(0));
    }
    if n > 1 {
        c[0] = upper[0] / denom;
    }
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i - 1] * c[i - 1];
        if denom == T::zero() {
            return Err(Error::Singular(i));
        }
        if i + 1 < n {
            c[i] = upper[i] / denom;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] = d[i] - c[i] * d[i + 1];
    }
    Ok(d)
}

/// Square band matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Debug, Clone)]
pub struct BandedMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    // row-major, each row holds columns i-kl ..= i+ku+kl (room for pivoting fill-in)
    data: Vec<T>,
}

impl<T: Real> BandedMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            data: vec![T::zero(); n * (2 * kl + ku + 1)],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    fn width(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width() + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if j + self.kl < i || j > i + self.ku {
            T::zero()
        } else {
            self.data[self.idx(i, j)]
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: T) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "({i},{j}) outside band"
        );
        let k = self.idx(i, j);
        self.data[k] = self.data[k] + v;
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.data[self.idx(i, j)] * x[j]).sum()
            })
            .collect()
    }

    /// LU factorization with partial pivoting.
    pub fn factor(mut self) -> Result<BandedLu<T>> {
        let n = self.n;
        let span = self.kl + self.ku;
        let mut piv = vec![0; n];
        for j in 0..n {
            let last_row = (j + self.kl).min(n - 1);
            let mut p = j;
            let mut best = self.data[self.idx(j, j)].abs();
            for r in j + 1..=last_row {
                let v = self.data[self.idx(r, j)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == T::zero() || !best.is_finite() {
                return Err(Error::Singular(j));
            }
            piv[j] = p;
            let last_col = (j + span).min(n - 1);
            if p != j {
                for c in j..=last_col {
                    let (a, b) = (self.idx(j, c), self.idx(p, c));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(j, j)];
            for r in j + 1..=last_row {
                let k = self.idx(r, j);
                let m = self.data[k] / pivot;
                self.data[k] = m;
                if m != T::zero() {
                    for c in j + 1..=last_col {
                        let (t, s) = (self.idx(r, c), self.idx(j, c));
                        self.data[t] = self.data[t] - m * self.data[s];
                    }
                }
            }
        }
        Ok(BandedLu { lu: self, piv })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu<T> {
    lu: BandedMatrix<T>,
    piv: Vec<usize>,
}

impl<T: Real> BandedLu<T> {
    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let a = &self.lu;
        let n = a.n;
        let span = a.kl + a.ku;
        let mut b = rhs.to_vec();
        for j in 0..n {
            b.swap(j, self.piv[j]);
            let bj = b[j];
            for r in j + 1..=(j + a.kl).min(n - 1) {
                b[r] = b[r] - a.data[a.idx(r, j)] * bj;
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for c in i + 1..=(i + span).min(n - 1) {
                s = s - a.data[a.idx(i, c)] * b[c];
            }
            b[i] = s / a.data[a.idx(i, i)];
        }
        b
    }
}

/// Gaussian elimination with partial pivoting on a small dense system
/// (`a` is row-major `m × m`).
pub fn solve_dense<T: Real>(mut a: Vec<T>, mut b: Vec<T>) -> Result<Vec<T>> {
    let m = b.len();
    debug_assert_eq!(a.len(), m * m);
    for j in 0..m {
        let p = (j..m)
            .max_by(|&x, &y| a[x * m + j].abs().partial_cmp(&a[y * m + j].abs()).unwrap())
            .unwrap();
        if a[p * m + j] == T::zero() {
            return Err(Error::Singular(j));
        }
        if p != j {
            for c in 0..m {
                a.swap(j * m + c, p * m + c);
            }
            b.swap(j, p);
        }
        for r in j + 1..m {
            let f = a[r * m + j] / a[j * m + j];
            for c in j..m {
                a[r * m + c] = a[r * m + c] - f * a[j * m + c];
            }
            b[r] = b[r] - f * b[j];
        }
    }
    for i in (0..m).rev() {
        let s = (i + 1..m).fold(b[i], |s, c| s - a[i * m + c] * b[c]);
        b[i] = s / a[i * m + i];
    }
    Ok(b)
}

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct SymTridiagonal<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
}

impl<T: Real> SymTridiagonal<T> {
    pub fn new(diag: Vec<T>, off: Vec<T>) -> Self {
        assert_eq!(off.len() + 1, diag.len());
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: T) -> usize {
        let tiny = T::min_positive_value().sqrt();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0..self.len() {
            if i > 0 {
                let e = self.off[i - 1];
                q = self.diag[i] - x - e * e / q;
            }
            if q == T::zero() {
                q = -tiny;
            }
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (T, T) {
        let n = self.len();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let mut r = T::zero();
            if i > 0 {
                r = r + self.off[i - 1].abs();
            }
            if i + 1 < n {
                r = r + self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// `k`-th smallest eigenvalue (0-based) by Sturm bisection.
    pub fn eigenvalue(&self, k: usize) -> T {
        assert!(k < self.len());
        let (mut lo, mut hi) = self.gershgorin();
        let eps = T::epsilon();
        for _ in 0..400 {
            let mid = T::c(0.5) * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= T::c(4.0) * eps * (lo.abs().max(hi.abs()).max(T::min_positive_value())) {
                break;
            }
        }
        T::c(0.5) * (lo + hi)
    }

    /// Unit eigenvector for an (accurately known) eigenvalue.
    pub fn eigenvector(&self, lambda: T) -> Result<Vec<T>> {
        let n = self.len();
        let shift = lambda + T::c(64.0) * T::epsilon() * lambda.abs().max(T::one());
        let mut m = BandedMatrix::zeros(n, 1, 1);
        for i in 0..n {
            m.add(i, i, self.diag[i] - shift);
            if i + 1 < n {
                m.add(i, i + 1, self.off[i]);
                m.add(i + 1, i, self.off[i]);
            }
        }
        let lu = m.factor()?;
        let mut x: Vec<T> = (0..n)
            .map(|i| T::one() + T::c(1e-3) * T::from_usize_lossy(i % 7))
            .collect();
        for _ in 0..4 {
            x = lu.solve(&x);
            let norm = x.iter().map(|&v| v * v).sum::<T>().sqrt();
            if !(norm.is_finite() && norm > T::zero()) {
                return Err(Error::NonFinite("inverse iteration"));
            }
            for v in &mut x {
                *v = *v / norm;
            }
        }
        Ok(x)
    }
}

/// Eigenvalues of a small dense symmetric matrix (cyclic Jacobi), ascending.
pub fn symmetric_eigenvalues<T: Real>(mut a: Vec<T>, m: usize) -> Vec<T> {
    debug_assert_eq!(a.len(), m * m);
    for _sweep in 0..100 {
        let off: T = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * m + j] * a[i * m + j])
            .sum();
        let diag: T = (0..m).map(|i| a[i * m + i] * a[i * m + i]).sum();
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q * m + q] - a[p * m + p]) / (T::c(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..m {
                    let (akp, akq) = (a[k * m + p], a[k * m + q]);
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (a[p * m + k], a[q * m + k]);
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<T> = (0..m).map(|i| a[i * m + i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}
