//! Small dense and banded linear algebra kernels.
//!
//! Everything here is sized for this crate's needs: 4x4 characteristic
//! determinants, pentadiagonal operators from the clamped fourth-order
//! stencils, and bracketed scalar root finding.

/// Determinant of a 4x4 matrix by LU with partial pivoting.
pub fn det4(m: &[[f64; 4]; 4]) -> f64 {
    let mut a = *m;
    let mut det = 1.0;
    for k in 0..4 {
        let mut p = k;
        for i in k + 1..4 {
            if a[i][k].abs() > a[p][k].abs() {
                p = i;
            }
        }
        if a[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..4 {
            let f = a[i][k] / a[k][k];
            for j in k..4 {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    det
}

/// Determinant of a 4x4 matrix after scaling each row by its max-abs entry.
///
/// Returns `(det_of_scaled, log_scale)` with
/// `det = det_of_scaled * exp(log_scale)`. The scale factors are positive, so
/// the sign of the true determinant is the sign of `det_of_scaled`; the log
/// form keeps exponentially large entries (e.g. `exp(omega4)`) representable.
pub fn det4_row_scaled(m: &[[f64; 4]; 4]) -> (f64, f64) {
    let mut a = *m;
    let mut log_scale = 0.0;
    for row in a.iter_mut() {
        let mx = row.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if mx > 0.0 {
            for v in row.iter_mut() {
                *v /= mx;
            }
            log_scale += mx.ln();
        }
    }
    (det4(&a), log_scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SingularMatrix;

impl std::fmt::Display for SingularMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "singular banded matrix")
    }
}
impl std::error::Error for SingularMatrix {}

/// Banded matrix with lower bandwidth `kl` and upper bandwidth `ku`, stored
/// LAPACK-style with room for the pivoting fill (upper bandwidth grows to
/// `ku + kl` during factorization).
pub struct Banded {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    /// entry (i, j) lives at `ab[off + i - j + j * ldab]`
    ab: Vec<f64>,
    off: usize,
    ldab: usize,
}

impl Banded {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Banded { n, kl, ku, ab: vec![0.0; ldab * n], off: kl + ku, ldab }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(self.off + i >= j && self.off + i - j < self.ldab);
        self.off + i - j + j * self.ldab
    }

    /// True if (i, j) is inside the widened (fill-capable) band.
    #[inline]
    fn in_wide_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && self.off + i >= j && self.off + i - j < self.ldab
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(j + self.kl >= i && i + self.ku >= j, "({i},{j}) outside band");
        let s = self.slot(i, j);
        self.ab[s] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.ab[s] += v;
    }

    /// Entry within the declared band; zero outside it.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || i + self.ku < j {
            return 0.0;
        }
        self.ab[self.slot(i, j)]
    }

    #[inline]
    fn get_wide(&self, i: usize, j: usize) -> f64 {
        if !self.in_wide_band(i, j) {
            return 0.0;
        }
        self.ab[self.slot(i, j)]
    }

    #[inline]
    fn set_wide(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(self.in_wide_band(i, j));
        let s = self.slot(i, j);
        self.ab[s] = v;
    }

    /// Matrix-vector product (declared band only; call before factoring).
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut acc = 0.0;
            for j in lo..=hi {
                acc += self.get(i, j) * x[j];
            }
            y[i] = acc;
        }
    }

    /// LU factorization with partial pivoting.
    pub fn factor(mut self) -> Result<BandedLu, SingularMatrix> {
        let n = self.n;
        let kl = self.kl;
        let ku_wide = self.ku + kl;
        let mut ipiv = vec![0usize; n];
        for k in 0..n {
            let hi = (k + kl).min(n - 1);
            let mut p = k;
            let mut pmax = self.get_wide(k, k).abs();
            for i in k + 1..=hi {
                let v = self.get_wide(i, k).abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            if pmax == 0.0 {
                return Err(SingularMatrix);
            }
            ipiv[k] = p;
            if p != k {
                let jhi = (k + ku_wide).min(n - 1);
                for j in k..=jhi {
                    let a = self.get_wide(k, j);
                    let b = self.get_wide(p, j);
                    self.set_wide(k, j, b);
                    self.set_wide(p, j, a);
                }
            }
            let piv = self.get_wide(k, k);
            for i in k + 1..=hi {
                let f = self.get_wide(i, k) / piv;
                self.set_wide(i, k, f);
                if f != 0.0 {
                    let jhi = (k + ku_wide).min(n - 1);
                    for j in k + 1..=jhi {
                        let v = self.get_wide(i, j) - f * self.get_wide(k, j);
                        self.set_wide(i, j, v);
                    }
                }
            }
        }
        Ok(BandedLu { b: self, ku_wide, ipiv })
    }
}

/// Factored banded matrix; multipliers in the lower band, U in the widened
/// upper band.
pub struct BandedLu {
    b: Banded,
    ku_wide: usize,
    ipiv: Vec<usize>,
}

impl BandedLu {
    /// Solve `A x = rhs` in place.
    pub fn solve(&self, rhs: &mut [f64]) {
        let n = self.b.n;
        for k in 0..n {
            let p = self.ipiv[k];
            if p != k {
                rhs.swap(p, k);
            }
            let hi = (k + self.b.kl).min(n - 1);
            for i in k + 1..=hi {
                rhs[i] -= self.b.get_wide(i, k) * rhs[k];
            }
        }
        for k in (0..n).rev() {
            let hi = (k + self.ku_wide).min(n - 1);
            let mut acc = rhs[k];
            for j in k + 1..=hi {
                acc -= self.b.get_wide(k, j) * rhs[j];
            }
            rhs[k] = acc / self.b.get_wide(k, k);
        }
    }
}

/// Bisect `f` on a sign-change bracket `[lo, hi]` to absolute tolerance `tol`.
///
/// Returns the midpoint of the final bracket. Panics if the bracket does not
/// change sign (callers establish the bracket by scanning).
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    let fhi = f(hi);
    assert!(
        flo == 0.0 || fhi == 0.0 || (flo < 0.0) != (fhi < 0.0),
        "bisect: no sign change on [{lo}, {hi}]"
    );
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Scan `f` on `n` uniform samples of `[lo, hi]` and return all sign-change
/// brackets `(x_i, x_{i+1})`.
pub fn sign_change_brackets<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 2);
    let mut out = Vec::new();
    let h = (hi - lo) / (n - 1) as f64;
    let mut x_prev = lo;
    let mut f_prev = f(lo);
    for i in 1..n {
        let x = lo + i as f64 * h;
        let fx = f(x);
        if f_prev == 0.0 {
            out.push((x_prev, x_prev));
        } else if fx != 0.0 && (fx < 0.0) != (f_prev < 0.0) {
            out.push((x_prev, x));
        }
        x_prev = x;
        f_prev = fx;
    }
    if f_prev == 0.0 {
        out.push((x_prev, x_prev));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det4_matches_cofactor_expansion() {
        let m = [
            [2.0, -1.0, 3.5, 0.25],
            [0.0, 4.0, -2.0, 1.0],
            [7.0, 0.5, -1.25, 2.0],
            [-3.0, 1.5, 0.0, 5.0],
        ];
        fn det3(a: [[f64; 3]; 3]) -> f64 {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
        let mut cof = 0.0;
        for j in 0..4 {
            let mut sub = [[0.0; 3]; 3];
            for (ri, row) in m.iter().enumerate().skip(1) {
                let mut cj = 0;
                for (ci, &v) in row.iter().enumerate() {
                    if ci != j {
                        sub[ri - 1][cj] = v;
                        cj += 1;
                    }
                }
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            cof += sign * m[0][j] * det3(sub);
        }
        assert!((det4(&m) - cof).abs() < 1e-12 * cof.abs().max(1.0));
    }

    #[test]
    fn row_scaling_preserves_sign_and_value() {
        let m = [
            [1e8, -2e8, 3.0, 0.0],
            [0.5, 4.0, -2.0, 1.0],
            [7.0, 0.5, -1.25, 2e6],
            [-3.0, 1.5, 0.0, 5.0],
        ];
        let d = det4(&m);
        let (ds, ls) = det4_row_scaled(&m);
        assert_eq!(d < 0.0, ds < 0.0);
        assert!(((ds * ls.exp() - d) / d).abs() < 1e-12);
    }

    #[test]
    fn banded_solves_pentadiagonal_system() {
        let n = 40;
        let mut a = Banded::new(n, 2, 2);
        for i in 0..n {
            a.set(i, i, 6.0 + i as f64 * 0.01);
            if i + 1 < n {
                a.set(i, i + 1, -4.0);
                a.set(i + 1, i, -4.0);
            }
            if i + 2 < n {
                a.set(i, i + 2, 1.0);
                a.set(i + 2, i, 1.0);
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = vec![0.0; n];
        a.matvec(&x_true, &mut b);
        let lu = a.factor().unwrap();
        lu.solve(&mut b);
        for i in 0..n {
            assert!((b[i] - x_true[i]).abs() < 1e-10, "i={i}");
        }
    }

    #[test]
    fn banded_pivoting_handles_weak_diagonal() {
        let n = 6;
        let mut a = Banded::new(n, 2, 2);
        for i in 0..n {
            a.set(i, i, if i == 2 { 0.0 } else { 3.0 });
            if i + 1 < n {
                a.set(i, i + 1, 1.0);
                a.set(i + 1, i, 2.0);
            }
            if i + 2 < n {
                a.set(i, i + 2, 0.5);
                a.set(i + 2, i, 0.25);
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let mut b = vec![0.0; n];
        a.matvec(&x_true, &mut b);
        let lu = a.factor().unwrap();
        lu.solve(&mut b);
        for i in 0..n {
            assert!((b[i] - x_true[i]).abs() < 1e-10, "i={i} got {}", b[i]);
        }
    }

    #[test]
    fn bisect_finds_cubic_root() {
        let f = |x: f64| x * x * x - 2.0;
        let r = bisect(f, 0.0, 2.0, 1e-14);
        assert!((r - 2.0f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn scan_collects_all_roots_of_sine() {
        let br = sign_change_brackets(|x: f64| x.sin(), 0.1, 9.9, 2000);
        assert_eq!(br.len(), 3); // pi, 2pi, 3pi
    }
}
