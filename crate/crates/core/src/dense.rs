//! Real-space oracle: the whole closed loop as one dense matrix.

use alloc::vec::Vec;

use nalgebra::{DMatrix, Schur};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::lattice::LocalArray;
use crate::models::{ModelKind, ModelSpec, Role};

/// Largest state dimension the dense oracle will take on.
pub const DENSE_BUDGET: usize = 4000;

enum Block<'a> {
    Zero,
    Identity,
    Conv(&'a LocalArray),
}

impl Block<'_> {
    fn sum(&self) -> f64 {
        match self {
            Block::Zero => 0.0,
            Block::Identity => 1.0,
            Block::Conv(a) => a.sum(),
        }
    }
}

fn layout(model: &ModelSpec) -> Vec<Vec<Block<'_>>> {
    use Block::*;
    let arr = |r| Conv(model.array(r));
    match model.kind() {
        ModelKind::ConsensusStatic => alloc::vec![alloc::vec![arr(Role::F)]],
        ModelKind::ConsensusDynamic => {
            alloc::vec![
                alloc::vec![arr(Role::A), arr(Role::B)],
                alloc::vec![Identity, arr(Role::F)]
            ]
        }
        ModelKind::VehicularStatic => {
            alloc::vec![alloc::vec![Zero, Identity], alloc::vec![arr(Role::F), arr(Role::G)]]
        }
        ModelKind::VehicularDynamic => alloc::vec![
            alloc::vec![arr(Role::A), arr(Role::B), arr(Role::C)],
            alloc::vec![Zero, Zero, Identity],
            alloc::vec![Identity, arr(Role::F), arr(Role::G)],
        ],
    }
}

/// Per-site variance from one dense Lyapunov solve on `Z_L^d`.
///
/// The spatial-average mode of every block is marginal (or unobservable)
/// and would make the Lyapunov operator singular. Subtracting
/// `(S + I) (x) J/N`, where `S` holds the block row sums, moves those modes
/// to `-1` without touching the zero-mean subspace, which is all the
/// deviation-from-average output sees.
pub fn brute_force_variance(model: &ModelSpec, l: usize) -> Result<f64> {
    if l < model.min_lattice() {
        return Err(Error::LatticeTooSmall {
            l,
            q: model.support_radius(),
            min: model.min_lattice(),
        });
    }
    let d = model.dim();
    let n = l.pow(d as u32);
    let m = model.kind().state_dim();
    let size = m * n;
    if size > DENSE_BUDGET {
        return Err(Error::BudgetExceeded {
            size,
            budget: DENSE_BUDGET,
        });
    }
    let blocks = layout(model);
    let mut a = DMatrix::<f64>::zeros(size, size);
    let mut unit = alloc::vec![0.0; n];
    for (bi, row) in blocks.iter().enumerate() {
        for (bj, block) in row.iter().enumerate() {
            match block {
                Block::Zero => {}
                Block::Identity => {
                    for k in 0..n {
                        a[(bi * n + k, bj * n + k)] = 1.0;
                    }
                }
                Block::Conv(arr) => {
                    for j in 0..n {
                        unit[j] = 1.0;
                        let col = arr.circular_convolve(&unit, l)?;
                        unit[j] = 0.0;
                        for (k, v) in col.into_iter().enumerate() {
                            a[(bi * n + k, bj * n + j)] = v;
                        }
                    }
                }
            }
            let shift = (block.sum() + if bi == bj { 1.0 } else { 0.0 }) / n as f64;
            if shift != 0.0 {
                for r in 0..n {
                    for c in 0..n {
                        a[(bi * n + r, bj * n + c)] -= shift;
                    }
                }
            }
        }
    }
    // Q = C^T H C with H = I - J/N on the position block
    let p0 = model.kind().position_index() * n;
    let mut q = DMatrix::<f64>::zeros(size, size);
    for r in 0..n {
        for c in 0..n {
            q[(p0 + r, p0 + c)] = if r == c { 1.0 } else { 0.0 } - 1.0 / n as f64;
        }
    }
    let x = solve_lyapunov(a, &q)?;
    let w0 = (m - 1) * n;
    let trace: f64 = (0..n).map(|k| x[(w0 + k, w0 + k)]).sum();
    let per_coordinate = if model.kind().is_vehicular() { d as f64 } else { 1.0 };
    Ok(per_coordinate * trace / n as f64)
}

/// Solves `A^T X + X A + Q = 0` by Bartels-Stewart on the real Schur form.
///
/// The QR iteration can stall on the highly structured closed-loop
/// matrices: with a deflation tolerance of one ulp it often never settles.
/// Looser tolerances are tried in turn, then the same problem in a random
/// orthogonal basis, which is mathematically equivalent. A tolerance of a
/// thousand ulps still leaves the solution far more accurate than 1e-8.
pub(crate) fn solve_lyapunov(a: DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let max_iter = 30 * n.max(10);
    let ladder = [4.0, 64.0, 1024.0].map(|k| k * f64::EPSILON);
    for eps in ladder {
        if let Some(schur) = Schur::try_new(a.clone(), eps, max_iter) {
            return solve_schur(a.amax(), schur.unpack(), q);
        }
    }
    for seed in 1..=4u64 {
        let w = random_orthogonal(n, seed);
        let rotated = w.transpose() * &a * &w;
        if let Some(schur) = Schur::try_new(rotated, ladder[1], max_iter) {
            let y = solve_schur(a.amax(), schur.unpack(), &(w.transpose() * q * &w))?;
            return Ok(&w * y * w.transpose());
        }
    }
    Err(Error::SchurNonConvergence)
}

fn random_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    g.qr().q()
}

fn solve_schur(amax: f64, (u, mut t): (DMatrix<f64>, DMatrix<f64>), q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = t.nrows();
    let scale = amax.max(1.0);

    // block boundaries of the quasi-triangular factor
    let mut starts = Vec::new();
    let mut i = 0;
    while i < n {
        starts.push(i);
        if i + 1 < n && t[(i + 1, i)].abs() > f64::EPSILON * (t[(i, i)].abs() + t[(i + 1, i + 1)].abs()) {
            i += 2;
        } else {
            if i + 1 < n {
                t[(i + 1, i)] = 0.0;
            }
            i += 1;
        }
    }
    starts.push(n);

    for w in starts.windows(2) {
        let (s, e) = (w[0], w[1]);
        let re = if e - s == 1 {
            t[(s, s)]
        } else {
            0.5 * (t[(s, s)] + t[(s + 1, s + 1)]) + {
                // real-eigenvalue 2x2 blocks can appear before standardization
                let half = 0.5 * (t[(s, s)] - t[(s + 1, s + 1)]);
                let disc = half * half + t[(s, s + 1)] * t[(s + 1, s)];
                if disc > 0.0 {
                    libm::sqrt(disc)
                } else {
                    0.0
                }
            }
        };
        if re >= -1e-12 * scale {
            return Err(Error::DenseUnstable { real_part: re });
        }
    }

    let r = -(u.transpose() * q * &u);
    let mut y = DMatrix::<f64>::zeros(n, n);
    let nb = starts.len() - 1;
    for jb in 0..nb {
        let (j0, j1) = (starts[jb], starts[jb + 1]);
        for ib in 0..nb {
            let (i0, i1) = (starts[ib], starts[ib + 1]);
            let (p, w) = (i1 - i0, j1 - j0);
            let mut rhs = [0.0; 4];
            for rr in 0..p {
                for cc in 0..w {
                    let (gi, gj) = (i0 + rr, j0 + cc);
                    let mut acc = r[(gi, gj)];
                    for k in 0..i0 {
                        acc -= t[(k, gi)] * y[(k, gj)];
                    }
                    for k in 0..j0 {
                        acc -= y[(gi, k)] * t[(k, gj)];
                    }
                    rhs[rr * w + cc] = acc;
                }
            }
            // T_II^T Y + Y T_JJ = rhs, unknowns ordered (row, col)
            let dim = p * w;
            let mut mat = [[0.0; 4]; 4];
            for rr in 0..p {
                for cc in 0..w {
                    let eq = rr * w + cc;
                    for r2 in 0..p {
                        mat[eq][r2 * w + cc] += t[(i0 + r2, i0 + rr)];
                    }
                    for c2 in 0..w {
                        mat[eq][rr * w + c2] += t[(j0 + c2, j0 + cc)];
                    }
                }
            }
            let sol = solve_small(&mut mat, &mut rhs, dim).ok_or(Error::DenseUnstable { real_part: 0.0 })?;
            for rr in 0..p {
                for cc in 0..w {
                    y[(i0 + rr, j0 + cc)] = sol[rr * w + cc];
                }
            }
        }
    }
    Ok(&u * y * u.transpose())
}

fn solve_small(mat: &mut [[f64; 4]; 4], rhs: &mut [f64; 4], n: usize) -> Option<[f64; 4]> {
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| mat[x][col].abs().total_cmp(&mat[y][col].abs()))?;
        if mat[pivot][col] == 0.0 {
            return None;
        }
        mat.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in (col + 1)..n {
            let f = mat[r][col] / mat[col][col];
            for c in col..n {
                mat[r][c] -= f * mat[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 4];
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

    #[test]
    fn lyapunov_residual() {
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                -2.0, 1.0, 0.0, 0.3, //
                -1.0, -1.0, 0.5, 0.0, //
                0.0, 0.2, -3.0, 2.0, //
                0.1, 0.0, -2.0, -1.0,
            ],
        );
        let q = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(alloc::vec![1.0, 0.0, 2.0, 0.5]));
        let x = solve_lyapunov(a.clone(), &q).unwrap();
        let res = a.transpose() * &x + &x * &a + &q;
        assert!(res.amax() < 1e-13);
        assert!((&x - x.transpose()).amax() < 1e-13);
    }

    #[test]
    fn rejects_unstable() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, -1.0]);
        let q = DMatrix::identity(2, 2);
        assert!(matches!(solve_lyapunov(a, &q), Err(Error::DenseUnstable { .. })));
    }
}
