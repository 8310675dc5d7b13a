//! Brute-force oracles shared by the integration tests.
//!
//! Everything here is deliberately naive and independent of the library's
//! solvers: plain Gaussian elimination and exhaustive vertex enumeration.
#![allow(dead_code)]

use cds_core::rng::SimRng;
use nalgebra::{DMatrix, DVector};

/// Calls `f` with every `k`-subset of `0..n` in lexicographic order.
pub fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    'outer: loop {
        f(&idx);
        let mut i = k;
        while i > 0 {
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                continue 'outer;
            }
        }
        return;
    }
}

/// Solves a square system by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[row][c] -= f * a[col][c];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Minimum of `cᵀz` over `l ≤ A z ≤ u, z ≥ 0` by enumerating every basic
/// solution (m active constraints out of all sign and row-side constraints).
pub fn lp_vertex_min(c: &[f64], a: &DMatrix<f64>, l: &[f64], u: &[f64]) -> Option<(f64, Vec<f64>)> {
    let (k, m) = a.shape();
    // constraints g·z >= h
    let mut cons: Vec<(Vec<f64>, f64)> = Vec::new();
    for j in 0..m {
        let mut g = vec![0.0; m];
        g[j] = 1.0;
        cons.push((g, 0.0));
    }
    for i in 0..k {
        let row: Vec<f64> = (0..m).map(|j| a[(i, j)]).collect();
        cons.push((row.clone(), l[i]));
        cons.push((row.iter().map(|v| -v).collect(), -u[i]));
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for_each_combination(cons.len(), m, |active| {
        let mat: Vec<Vec<f64>> = active.iter().map(|&i| cons[i].0.clone()).collect();
        let rhs: Vec<f64> = active.iter().map(|&i| cons[i].1).collect();
        let Some(z) = gauss_solve(mat, rhs) else { return };
        let feasible = cons.iter().all(|(g, h)| {
            let v: f64 = g.iter().zip(&z).map(|(a, b)| a * b).sum();
            v >= h - 1e-9 * (1.0 + h.abs())
        });
        if feasible {
            let obj: f64 = c.iter().zip(&z).map(|(a, b)| a * b).sum();
            if best.as_ref().map_or(true, |(o, _)| obj < *o) {
                best = Some((obj, z));
            }
        }
    });
    best
}

/// Minimum ℓ₁ norm over `{β : c − b ≤ Gβ ≤ c + b}`.
///
/// Vertices of the split LP with `u_j v_j = 0` are the points of this
/// polyhedron fixed by `p` active constraints drawn from the row sides and
/// the coordinate planes `β_j = 0`, so the minimum over those points equals
/// the LP optimum.
pub fn ds_vertex_min(g: &DMatrix<f64>, c: &DVector<f64>, b: &DVector<f64>) -> Option<(f64, Vec<f64>)> {
    let p = g.ncols();
    let k = g.nrows();
    let mut eqs: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..k {
        let row: Vec<f64> = (0..p).map(|j| g[(i, j)]).collect();
        eqs.push((row.clone(), c[i] - b[i]));
        eqs.push((row, c[i] + b[i]));
    }
    for j in 0..p {
        let mut e = vec![0.0; p];
        e[j] = 1.0;
        eqs.push((e, 0.0));
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for_each_combination(eqs.len(), p, |active| {
        let mat: Vec<Vec<f64>> = active.iter().map(|&i| eqs[i].0.clone()).collect();
        let rhs: Vec<f64> = active.iter().map(|&i| eqs[i].1).collect();
        let Some(beta) = gauss_solve(mat, rhs) else { return };
        let ok = (0..k).all(|i| {
            let v: f64 = (0..p).map(|j| g[(i, j)] * beta[j]).sum();
            v >= c[i] - b[i] - 1e-9 && v <= c[i] + b[i] + 1e-9
        });
        if ok {
            let l1: f64 = beta.iter().map(|v| v.abs()).sum();
            if best.as_ref().map_or(true, |(o, _)| l1 < *o) {
                best = Some((l1, beta));
            }
        }
    });
    best
}

pub fn gaussian_matrix(rng: &mut SimRng, n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| rng.normal())
}

/// `n⁻¹ x_jᵀ (y − Xβ)` by explicit double loop.
pub fn naive_residual_correlations(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> Vec<f64> {
    let (n, p) = x.shape();
    let mut r = vec![0.0; n];
    for i in 0..n {
        let mut fit = 0.0;
        for j in 0..p {
            fit += x[(i, j)] * beta[j];
        }
        r[i] = y[i] - fit;
    }
    (0..p)
        .map(|j| (0..n).map(|i| x[(i, j)] * r[i]).sum::<f64>() / n as f64)
        .collect()
}

/// Random bounded, feasible LP with `m` variables and `k` rows.
///
/// Feasibility comes from a planted point `z0 ≥ 0`; boundedness from a final
/// row bounding `Σ z`. Roughly one row in ten is an equality.
pub fn random_lp(rng: &mut SimRng, m: usize, k: usize) -> (DVector<f64>, DMatrix<f64>, DVector<f64>, DVector<f64>) {
    assert!(k >= 1);
    let z0 = DVector::from_fn(m, |_, _| rng.uniform());
    let mut a = DMatrix::from_fn(k, m, |_, _| rng.normal());
    for j in 0..m {
        a[(k - 1, j)] = 1.0;
    }
    let act = &a * &z0;
    let mut l = DVector::zeros(k);
    let mut u = DVector::zeros(k);
    for i in 0..k - 1 {
        if rng.uniform() < 0.1 {
            l[i] = act[i];
            u[i] = act[i];
        } else {
            l[i] = act[i] - rng.uniform();
            u[i] = act[i] + rng.uniform();
        }
    }
    l[k - 1] = 0.0;
    u[k - 1] = 2.0 * m as f64;
    let c = DVector::from_fn(m, |_, _| rng.uniform_range(-1.0, 1.0));
    (c, a, l, u)
}
