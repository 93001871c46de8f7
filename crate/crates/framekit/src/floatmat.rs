//! Small dense `f64` matrices for the quantum-side numerics: matrix
//! exponentials and logarithms of symplectic maps and covariance bookkeeping.
//! Problem sizes here are at most 8x8, so plain dense algorithms are enough.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, PartialEq)]
pub struct FMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FMat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = FMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = FMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn omega(n_pairs: usize) -> Self {
        let n = n_pairs;
        FMat::from_fn(2 * n, 2 * n, |i, j| {
            if i < n && j == i + n {
                1.0
            } else if i >= n && j + n == i {
                -1.0
            } else {
                0.0
            }
        })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn transpose(&self) -> FMat {
        FMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> FMat {
        FMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * s)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    /// Largest absolute entry of the difference.
    pub fn max_abs_diff(&self, other: &FMat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |a, (x, y)| a.max((x - y).abs()))
    }

    /// Induced 1-norm (max column sum), used for scaling decisions.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Option<FMat> {
        assert!(self.rows == self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = FMat::identity(n);
        for c in 0..n {
            let (pr, pv) = (c..n)
                .map(|i| (i, a[(i, c)].abs()))
                .max_by(|x, y| x.1.total_cmp(&y.1))?;
            if pv < 1e-300 {
                return None;
            }
            for j in 0..n {
                a.data.swap(c * n + j, pr * n + j);
                inv.data.swap(c * n + j, pr * n + j);
            }
            let d = a[(c, c)];
            for j in 0..n {
                a[(c, j)] /= d;
                inv[(c, j)] /= d;
            }
            for i in 0..n {
                if i != c {
                    let f = a[(i, c)];
                    if f != 0.0 {
                        for j in 0..n {
                            let (ac, ic) = (a[(c, j)], inv[(c, j)]);
                            a[(i, j)] -= f * ac;
                            inv[(i, j)] -= f * ic;
                        }
                    }
                }
            }
        }
        Some(inv)
    }

    /// Matrix exponential by scaling and squaring with a Taylor series.
    pub fn expm(&self) -> FMat {
        assert!(self.rows == self.cols);
        let n = self.rows;
        let norm = self.norm_one();
        let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
        let a = self.scale(0.5f64.powi(s as i32));
        let mut term = FMat::identity(n);
        let mut sum = FMat::identity(n);
        for k in 1..40 {
            term = (&term * &a).scale(1.0 / k as f64);
            sum = &sum + &term;
            if term.max_abs() < 1e-18 {
                break;
            }
        }
        let mut r = sum;
        for _ in 0..s {
            r = &r * &r;
        }
        r
    }

    /// Principal square root via the Denman-Beavers iteration. Fails (None)
    /// when the iteration does not converge, e.g. for eigenvalues on the
    /// closed negative real axis.
    pub fn sqrtm(&self) -> Option<FMat> {
        assert!(self.rows == self.cols);
        let n = self.rows;
        let mut y = self.clone();
        let mut z = FMat::identity(n);
        for _ in 0..100 {
            let y_inv = y.inverse()?;
            let z_inv = z.inverse()?;
            let y_next = (&y + &z_inv).scale(0.5);
            let z_next = (&z + &y_inv).scale(0.5);
            let delta = y.max_abs_diff(&y_next);
            y = y_next;
            z = z_next;
            if delta < 1e-15 {
                let residual = (&y * &y).max_abs_diff(self);
                return (residual < 1e-9).then_some(y);
            }
        }
        None
    }

    /// Principal matrix logarithm by inverse scaling and squaring: take
    /// square roots until close to the identity, then use the Gregory series
    /// log(M) = 2 atanh((M-I)(M+I)^-1).
    pub fn logm(&self) -> Option<FMat> {
        assert!(self.rows == self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut k = 0u32;
        while (&a - &FMat::identity(n)).norm_one() > 0.3 {
            a = a.sqrtm()?;
            k += 1;
            if k > 60 {
                return None;
            }
        }
        let num = &a - &FMat::identity(n);
        let den_inv = (&a + &FMat::identity(n)).inverse()?;
        let x = &num * &den_inv;
        let x2 = &x * &x;
        let mut term = x.clone();
        let mut sum = FMat::zeros(n, n);
        for m in 0..60 {
            sum = &sum + &term.scale(1.0 / (2 * m + 1) as f64);
            term = &term * &x2;
            if term.max_abs() < 1e-18 {
                break;
            }
        }
        let log = sum.scale(2.0 * 2f64.powi(k as i32));
        let check = log.expm().max_abs_diff(self);
        (check < 1e-8).then_some(log)
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
    pub fn sym_eigenvalues(&self) -> Vec<f64> {
        assert!(self.rows == self.cols);
        let n = self.rows;
        let mut a = self.clone();
        for _sweep in 0..100 {
            let mut off = 0.0f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    off = off.max(a[(i, j)].abs());
                }
            }
            if off < 1e-14 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[(k, p)], a[(k, q)]);
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
        eig.sort_by(f64::total_cmp);
        eig
    }

    /// Checks `M^T Omega M = Omega` within `tol`. Returns the largest
    /// deviation on failure.
    pub fn symplectic_defect(&self) -> f64 {
        assert!(self.rows == self.cols && self.rows % 2 == 0);
        let omega = FMat::omega(self.rows / 2);
        (&(&self.transpose() * &omega) * self).max_abs_diff(&omega)
    }
}

impl std::ops::Index<(usize, usize)> for FMat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for FMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &FMat {
    type Output = FMat;
    fn mul(self, rhs: &FMat) -> FMat {
        assert_eq!(self.cols, rhs.rows);
        let mut out = FMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &FMat {
    type Output = FMat;
    fn add(self, rhs: &FMat) -> FMat {
        FMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + rhs[(i, j)])
    }
}

impl Sub for &FMat {
    type Output = FMat;
    fn sub(self, rhs: &FMat) -> FMat {
        FMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - rhs[(i, j)])
    }
}

impl Neg for &FMat {
    type Output = FMat;
    fn neg(self) -> FMat {
        self.scale(-1.0)
    }
}

impl std::fmt::Debug for FMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "FMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> =
                (0..self.cols).map(|j| format!("{:+.6e}", self[(i, j)])).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_log_roundtrip() {
        // A Hamiltonian generator: K = Omega * Q with symmetric Q.
        let q = FMat::from_fn(4, 4, |i, j| if i == j { 1.0 + i as f64 * 0.3 } else { 0.1 });
        let k = &FMat::omega(2) * &q;
        let m = k.expm();
        let back = m.logm().expect("log should exist");
        assert!(back.max_abs_diff(&k) < 1e-9, "{:?}", back.max_abs_diff(&k));
    }

    #[test]
    fn log_rejects_negative_spectrum() {
        let mut m = FMat::identity(2);
        m[(0, 0)] = -1.0;
        m[(1, 1)] = -1.0;
        assert!(m.logm().is_none());
    }

    #[test]
    fn jacobi_eigenvalues() {
        let a = FMat::from_fn(3, 3, |i, j| if i == j { (i + 1) as f64 } else { 0.5 });
        let eig = a.sym_eigenvalues();
        // Trace and determinant-like sanity checks.
        let tr: f64 = eig.iter().sum();
        assert!((tr - 6.0).abs() < 1e-10);
        assert!(eig.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn symplectic_defect_detects_squeeze() {
        let mut m = FMat::identity(2);
        m[(0, 0)] = 2.0;
        m[(1, 1)] = 0.5;
        assert!(m.symplectic_defect() < 1e-15);
        m[(1, 1)] = 2.0;
        assert!(m.symplectic_defect() > 1.0);
    }
}
