//! Fixed-size complex matrices (m <= 3): closed-form eigenvalues and the
//! Hermitian Lyapunov solve.

use alloc::vec::Vec;

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Real parts above this are treated as unstable in admissibility verdicts.
pub const HURWITZ_MARGIN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolMatrix {
    m: usize,
    a: [[Complex64; 3]; 3],
}

impl SymbolMatrix {
    /// # Panics
    ///
    /// Unless `1 <= m <= 3`.
    pub fn zeros(m: usize) -> Self {
        assert!((1..=3).contains(&m), "symbol matrices are 1x1 to 3x3");
        SymbolMatrix { m, a: [[ZERO; 3]; 3] }
    }

    pub fn from_rows<const M: usize>(rows: [[Complex64; M]; M]) -> Self {
        let mut s = Self::zeros(M);
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                s.a[i][j] = *v;
            }
        }
        s
    }

    pub fn from_real_rows<const M: usize>(rows: [[f64; M]; M]) -> Self {
        let mut s = Self::zeros(M);
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                s.a[i][j] = Complex64::new(*v, 0.0);
            }
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        assert!(i < self.m && j < self.m);
        self.a[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(i < self.m && j < self.m);
        self.a[i][j] = v;
    }

    pub fn adjoint(&self) -> Self {
        let mut out = *self;
        for i in 0..self.m {
            for j in 0..self.m {
                out.a[i][j] = self.a[j][i].conj();
            }
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.m, rhs.m);
        let mut out = Self::zeros(self.m);
        for i in 0..self.m {
            for j in 0..self.m {
                let mut acc = ZERO;
                for k in 0..self.m {
                    acc += self.a[i][k] * rhs.a[k][j];
                }
                out.a[i][j] = acc;
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.m, rhs.m);
        let mut out = *self;
        for i in 0..self.m {
            for j in 0..self.m {
                out.a[i][j] += rhs.a[i][j];
            }
        }
        out
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        let mut n = 0.0_f64;
        for i in 0..self.m {
            for j in 0..self.m {
                n = n.max(self.a[i][j].norm());
            }
        }
        n
    }

    pub fn is_real(&self) -> bool {
        (0..self.m).all(|i| (0..self.m).all(|j| self.a[i][j].im == 0.0))
    }

    /// Coefficients `c` of the monic characteristic polynomial
    /// `lambda^m + c[m-1] lambda^(m-1) + ... + c[0]`.
    pub fn char_poly(&self) -> Vec<Complex64> {
        let a = &self.a;
        match self.m {
            1 => alloc::vec![-a[0][0]],
            2 => alloc::vec![a[0][0] * a[1][1] - a[0][1] * a[1][0], -(a[0][0] + a[1][1])],
            _ => {
                let tr = a[0][0] + a[1][1] + a[2][2];
                let minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0]
                    + a[1][1] * a[2][2]
                    - a[1][2] * a[2][1];
                let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                    - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
                alloc::vec![-det, minors, -tr]
            }
        }
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let a = &self.a;
        match self.m {
            1 => alloc::vec![a[0][0]],
            2 => {
                let half = (a[0][0] + a[1][1]) * 0.5;
                let diff = (a[0][0] - a[1][1]) * 0.5;
                let s = (diff * diff + a[0][1] * a[1][0]).sqrt();
                alloc::vec![half + s, half - s]
            }
            _ => {
                let c = self.char_poly();
                cubic_roots(c[2], c[1], c[0]).to_vec()
            }
        }
    }

    /// The eigenvalue with the largest real part.
    pub fn rightmost_eigenvalue(&self) -> Complex64 {
        self.eigenvalues()
            .into_iter()
            .fold(Complex64::new(f64::NEG_INFINITY, 0.0), |best, l| {
                if l.re > best.re {
                    l
                } else {
                    best
                }
            })
    }
}

/// Roots of `x^3 + p2 x^2 + p1 x + p0` by Cardano, then polished by Newton.
pub fn cubic_roots(p2: Complex64, p1: Complex64, p0: Complex64) -> [Complex64; 3] {
    let shift = p2 / 3.0;
    let p = p1 - p2 * shift;
    let q = p2 * p2 * p2 * (2.0 / 27.0) - p2 * p1 / 3.0 + p0;
    let disc = (q * q * 0.25 + p * p * p / 27.0).sqrt();
    let w1 = -q * 0.5 + disc;
    let w2 = -q * 0.5 - disc;
    let w = if w1.norm() >= w2.norm() { w1 } else { w2 };
    let omega = Complex64::new(-0.5, libm::sqrt(0.75));
    let mut roots = [ZERO; 3];
    if w.norm() == 0.0 {
        roots = [-shift; 3];
    } else {
        let u = w.cbrt();
        let mut rot = Complex64::new(1.0, 0.0);
        for r in roots.iter_mut() {
            let uk = u * rot;
            *r = uk - p / (uk * 3.0) - shift;
            rot *= omega;
        }
    }
    let eval = |x: Complex64| ((x + p2) * x + p1) * x + p0;
    let deriv = |x: Complex64| (x * 3.0 + p2 * 2.0) * x + p1;
    for r in roots.iter_mut() {
        for _ in 0..4 {
            let f = eval(*r);
            let df = deriv(*r);
            if f.norm() == 0.0 || df.norm() == 0.0 {
                break;
            }
            let next = *r - f / df;
            if eval(next).norm() < f.norm() {
                *r = next;
            } else {
                break;
            }
        }
    }
    roots
}

/// Solves `A^H P + P A = -Q` for Hermitian `Q`, returning Hermitian `P`.
///
/// The `m^2` real parameters of `P` (diagonal plus real and imaginary parts
/// above it) are found from one dense real system. Returns `None` when that
/// system is singular, i.e. when `A` has eigenvalues with `l_i + conj(l_j) = 0`.
pub fn solve_lyapunov(a: &SymbolMatrix, q: &SymbolMatrix) -> Option<SymbolMatrix> {
    let m = a.m;
    let n = m * m;
    let ah = a.adjoint();
    let mut mat = [[0.0_f64; 9]; 9];
    for k in 0..n {
        let e = hermitian_basis(m, k);
        let image = ah.mul(&e).add(&e.mul(a));
        let col = hermitian_coords(&image);
        for (r, v) in col.iter().take(n).enumerate() {
            mat[r][k] = *v;
        }
    }
    let mut rhs = hermitian_coords(q);
    for v in rhs.iter_mut() {
        *v = -*v;
    }
    let x = gauss_solve(&mut mat, &mut rhs, n)?;
    let mut p = SymbolMatrix::zeros(m);
    for (k, v) in x.iter().take(n).enumerate() {
        let e = hermitian_basis(m, k);
        for i in 0..m {
            for j in 0..m {
                p.a[i][j] += e.a[i][j] * *v;
            }
        }
    }
    Some(p)
}

// Parameter order: diagonal entries first, then (re, im) of each (i < j).
fn hermitian_basis(m: usize, k: usize) -> SymbolMatrix {
    let mut e = SymbolMatrix::zeros(m);
    if k < m {
        e.a[k][k] = Complex64::new(1.0, 0.0);
        return e;
    }
    let (i, j, imag) = off_diagonal_slot(m, k);
    if imag {
        e.a[i][j] = Complex64::new(0.0, 1.0);
        e.a[j][i] = Complex64::new(0.0, -1.0);
    } else {
        e.a[i][j] = Complex64::new(1.0, 0.0);
        e.a[j][i] = Complex64::new(1.0, 0.0);
    }
    e
}

fn off_diagonal_slot(m: usize, k: usize) -> (usize, usize, bool) {
    let mut idx = m;
    for i in 0..m {
        for j in (i + 1)..m {
            if k == idx {
                return (i, j, false);
            }
            if k == idx + 1 {
                return (i, j, true);
            }
            idx += 2;
        }
    }
    unreachable!("parameter index out of range")
}

fn hermitian_coords(h: &SymbolMatrix) -> [f64; 9] {
    let m = h.m;
    let mut out = [0.0; 9];
    for (i, slot) in out.iter_mut().enumerate().take(m) {
        *slot = h.a[i][i].re;
    }
    let mut idx = m;
    for i in 0..m {
        for j in (i + 1)..m {
            out[idx] = h.a[i][j].re;
            out[idx + 1] = h.a[i][j].im;
            idx += 2;
        }
    }
    out
}

fn gauss_solve(mat: &mut [[f64; 9]; 9], rhs: &mut [f64; 9], n: usize) -> Option<[f64; 9]> {
    let scale = mat
        .iter()
        .take(n)
        .flat_map(|r| r.iter().take(n))
        .fold(0.0_f64, |s, v| s.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| mat[x][col].abs().total_cmp(&mat[y][col].abs()))
            .unwrap();
        if mat[pivot][col].abs() <= scale * 1e-300_f64.max(f64::EPSILON * 1e-6) {
            return None;
        }
        mat.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in (col + 1)..n {
            let factor = mat[r][col] / mat[col][col];
            if factor != 0.0 {
                for c in col..n {
                    mat[r][c] -= factor * mat[col][c];
                }
                rhs[r] -= factor * rhs[col];
            }
        }
    }
    let mut x = [0.0; 9];
    for r in (0..n).rev() {
        let mut acc = rhs[r];
        for c in (r + 1)..n {
            acc -= mat[r][c] * x[c];
        }
        x[r] = acc / mat[r][r];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn residual(a: &SymbolMatrix, p: &SymbolMatrix, q: &SymbolMatrix) -> f64 {
        a.adjoint().mul(p).add(&p.mul(a)).add(q).max_norm()
    }

    #[test]
    fn cubic_of_known_roots() {
        // (x+1)(x+2)(x+3) = x^3 + 6x^2 + 11x + 6
        let mut r = cubic_roots(c(6.0, 0.0), c(11.0, 0.0), c(6.0, 0.0));
        r.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (got, want) in r.iter().zip([-3.0, -2.0, -1.0]) {
            assert!((got - c(want, 0.0)).norm() < 1e-12);
        }
        // triple root at -1
        for root in cubic_roots(c(3.0, 0.0), c(3.0, 0.0), c(1.0, 0.0)) {
            assert!((root - c(-1.0, 0.0)).norm() < 1e-5);
        }
        // x^3 + x = x (x - i)(x + i)
        let r = cubic_roots(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        for root in r {
            assert!(root.re.abs() < 1e-14);
        }
    }

    #[test]
    fn eigenvalues_of_companion() {
        let a = SymbolMatrix::from_real_rows([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-6.0, -11.0, -6.0]]);
        let mut ev = a.eigenvalues();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((ev[0] - c(-3.0, 0.0)).norm() < 1e-12);
        assert!((a.rightmost_eigenvalue() - c(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn scalar_lyapunov() {
        let a = SymbolMatrix::from_real_rows([[-4.0]]);
        let q = SymbolMatrix::from_real_rows([[1.0]]);
        let p = solve_lyapunov(&a, &q).unwrap();
        assert!((p.get(0, 0).re - 0.125).abs() < 1e-15);
    }

    #[test]
    fn vehicular_static_hand_case() {
        // [[0,1],[f,g]] with f = g = -1, output on x
        let a = SymbolMatrix::from_real_rows([[0.0, 1.0], [-1.0, -1.0]]);
        let q = SymbolMatrix::from_real_rows([[1.0, 0.0], [0.0, 0.0]]);
        let p = solve_lyapunov(&a, &q).unwrap();
        assert!((p.get(1, 1).re - 0.5).abs() < 1e-14);
        assert!(residual(&a, &p, &q) < 1e-14);
    }

    #[test]
    fn complex_three_by_three() {
        let a = SymbolMatrix::from_rows([
            [c(-1.0, 0.3), c(0.2, -0.1), c(0.0, 0.5)],
            [c(0.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0)],
            [c(1.0, 0.0), c(-0.5, 0.2), c(-1.5, -0.4)],
        ]);
        assert!(a.rightmost_eigenvalue().re < 0.0);
        let q = SymbolMatrix::from_real_rows([[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]]);
        let p = solve_lyapunov(&a, &q).unwrap();
        assert!(residual(&a, &p, &q) < 1e-13);
        for i in 0..3 {
            for j in 0..3 {
                assert!((p.get(i, j) - p.get(j, i).conj()).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn singular_when_marginal() {
        let a = SymbolMatrix::from_real_rows([[0.0, 1.0], [-1.0, 0.0]]);
        let q = SymbolMatrix::from_real_rows([[1.0, 0.0], [0.0, 0.0]]);
        assert!(solve_lyapunov(&a, &q).is_none());
    }
}
