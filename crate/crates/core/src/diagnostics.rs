//! Design diagnostics: restricted isometry and orthogonality constants, the
//! uniform uncertainty check, a restricted-eigenvalue probe and false signs.
//!
//! All Gram quantities use `n⁻¹XᵀX` on the design as given.
//!
//! Eigenvalues of a principal submatrix interlace those of the full matrix,
//! so the extreme deviations over `|T| ≤ s` are attained at `|T| = s`;
//! likewise the largest singular value of a cross block can only grow when
//! either index set grows. Only maximal subsets are enumerated.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::types::DesignMatrix;

pub const DEFAULT_ENUMERATION_BUDGET: u128 = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UupReport {
    pub s: usize,
    pub delta_s: f64,
    pub theta_s_2s: f64,
    pub uup_holds: bool,
    pub subsets_examined: u128,
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Calls `f` with every `k`-subset of `items` in lexicographic order.
fn for_each_subset(items: &[usize], k: usize, f: &mut impl FnMut(&[usize])) {
    let n = items.len();
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut chosen: Vec<usize> = idx.iter().map(|&i| items[i]).collect();
    loop {
        f(&chosen);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < n - k + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
        for j in i..k {
            chosen[j] = items[idx[j]];
        }
    }
}

fn full_gram(x: &DesignMatrix) -> DMatrix<f64> {
    x.values().tr_mul(x.values()) / x.n() as f64
}

fn check_s(x: &DesignMatrix, s: usize) -> Result<()> {
    if s == 0 || s > x.p() {
        return Err(Error::InvalidArgument(format!("s must lie in 1..={}, got {s}", x.p())));
    }
    Ok(())
}

fn block(g: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |a, b| g[(rows[a], cols[b])])
}

fn delta_from_gram(g: &DMatrix<f64>, s: usize) -> f64 {
    let all: Vec<usize> = (0..g.ncols()).collect();
    let mut worst: f64 = 0.0;
    for_each_subset(&all, s, &mut |t| {
        let ev = block(g, t, t).symmetric_eigen().eigenvalues;
        worst = worst.max(ev.max() - 1.0).max(1.0 - ev.min());
    });
    worst
}

/// `δ_s = max_{|T| ≤ s} max(λ_max(G_TT) − 1, 1 − λ_min(G_TT))`.
pub fn restricted_isometry_constant(x: &DesignMatrix, s: usize) -> Result<f64> {
    restricted_isometry_constant_with_budget(x, s, DEFAULT_ENUMERATION_BUDGET)
}

pub fn restricted_isometry_constant_with_budget(x: &DesignMatrix, s: usize, budget: u128) -> Result<f64> {
    check_s(x, s)?;
    let needed = binomial(x.p(), s);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(delta_from_gram(&full_gram(x), s))
}

/// Sizes `(t, m)` of the maximal disjoint pairs `|T| = t ≤ s`, `|T'| = m ≤ 2s`.
///
/// `(t, m)` is dominated by `(t + 1, m)` whenever `t + 1 + m ≤ p`.
fn theta_shapes(p: usize, s: usize) -> Vec<(usize, usize)> {
    (1..=s)
        .filter_map(|t| {
            let m = (2 * s).min(p.saturating_sub(t));
            (m > 0 && (t == s || t + 1 + m > p)).then_some((t, m))
        })
        .collect()
}

fn theta_count(p: usize, s: usize) -> u128 {
    theta_shapes(p, s).iter().map(|&(t, m)| binomial(p, t) * binomial(p - t, m)).sum()
}

fn theta_from_gram(g: &DMatrix<f64>, s: usize) -> f64 {
    let p = g.ncols();
    let all: Vec<usize> = (0..p).collect();
    let mut worst: f64 = 0.0;
    for (t, m) in theta_shapes(p, s) {
        for_each_subset(&all, t, &mut |tt| {
            let rest: Vec<usize> = all.iter().copied().filter(|j| !tt.contains(j)).collect();
            for_each_subset(&rest, m, &mut |tp| {
                let sv = block(g, tt, tp).singular_values();
                worst = worst.max(sv.max());
            });
        });
    }
    worst
}

/// `θ_{s,2s}`: largest singular value of `G_{TT'}` over disjoint `|T| ≤ s`, `|T'| ≤ 2s`.
pub fn restricted_orthogonality_constant(x: &DesignMatrix, s: usize) -> Result<f64> {
    restricted_orthogonality_constant_with_budget(x, s, DEFAULT_ENUMERATION_BUDGET)
}

pub fn restricted_orthogonality_constant_with_budget(x: &DesignMatrix, s: usize, budget: u128) -> Result<f64> {
    check_s(x, s)?;
    let needed = theta_count(x.p(), s);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(theta_from_gram(&full_gram(x), s))
}

/// Both constants and the check `δ_s + θ_{s,2s} < 1`.
pub fn uup_report(x: &DesignMatrix, s: usize, budget: u128) -> Result<UupReport> {
    check_s(x, s)?;
    let needed = binomial(x.p(), s) + theta_count(x.p(), s);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let g = full_gram(x);
    let delta_s = delta_from_gram(&g, s);
    let theta_s_2s = theta_from_gram(&g, s);
    Ok(UupReport {
        s,
        delta_s,
        theta_s_2s,
        uup_holds: delta_s + theta_s_2s < 1.0,
        subsets_examined: needed,
    })
}

/// Monte-Carlo probe of the restricted-eigenvalue constant: the smallest
/// observed `‖n^{-1/2}Xδ‖₂ / max(‖δ₁‖₂, ‖δ₁'‖₂)` over sampled cone directions.
///
/// `δ₁` holds the first `s` coordinates and `δ₁'` the `m` largest entries of
/// the rest in magnitude. Directions put a Gaussian vector on the first
/// block and Dirichlet-weighted, randomly signed mass `u‖δ₁‖₁` on the rest,
/// `u` uniform on `(0, 1]`. The result is an upper bound on the true
/// constant, not a certificate.
pub fn restricted_eigenvalue_probe(x: &DesignMatrix, s: usize, m: usize, samples: usize, seed: u64) -> Result<f64> {
    check_s(x, s)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("probe needs at least one sample".into()));
    }
    let p = x.p();
    let n = x.n() as f64;
    let mut rng = SimRng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    let mut delta = DVector::zeros(p);
    for _ in 0..samples {
        for j in 0..s {
            delta[j] = rng.normal();
        }
        let l1: f64 = (0..s).map(|j| delta[j].abs()).sum();
        if p > s {
            let mass = rng.uniform() * l1;
            let mut total = 0.0;
            for j in s..p {
                let e = -rng.uniform().ln();
                let sign = if rng.uniform() <= 0.5 { 1.0 } else { -1.0 };
                delta[j] = sign * e;
                total += e;
            }
            for j in s..p {
                delta[j] *= mass / total;
            }
        }
        let head = (0..s).map(|j| delta[j] * delta[j]).sum::<f64>().sqrt();
        let mut tail: Vec<f64> = (s..p).map(|j| delta[j].abs()).collect();
        tail.sort_by(|a, b| b.total_cmp(a));
        let top = tail.iter().take(m).map(|v| v * v).sum::<f64>().sqrt();
        let denom = head.max(top);
        if denom == 0.0 {
            continue;
        }
        let fit = (x.values() * &delta).norm() / n.sqrt();
        best = best.min(fit / denom);
    }
    Ok(best)
}

/// `|{j : sgn(β̂_j) ≠ sgn(β₀_j)}|` with `sgn(0) = 0`.
pub fn false_sign_count(beta_hat: &DVector<f64>, beta0: &DVector<f64>) -> Result<usize> {
    if beta_hat.len() != beta0.len() {
        return Err(Error::DimensionMismatch {
            what: "coefficient vectors",
            expected: beta0.len(),
            got: beta_hat.len(),
        });
    }
    let sgn = |v: f64| (v > 0.0) as i8 - (v < 0.0) as i8;
    Ok(beta_hat.iter().zip(beta0.iter()).filter(|(a, b)| sgn(**a) != sgn(**b)).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scaled_identity(p: usize) -> DesignMatrix {
        DesignMatrix::new(DMatrix::identity(p, p)).unwrap().rescale_columns().unwrap()
    }

    #[test]
    fn orthogonal_design_constants_vanish() {
        let x = scaled_identity(5);
        for s in 1..=5 {
            assert!(restricted_isometry_constant(&x, s).unwrap() < 1e-12);
        }
        for s in 1..=2 {
            assert!(restricted_orthogonality_constant(&x, s).unwrap() < 1e-12);
        }
        let r = uup_report(&x, 2, DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert!(r.uup_holds);
    }

    #[test]
    fn hand_built_two_column_grams() {
        // 4×3 design; each 2×2 Gram [[a, c], [c, b]] has eigenvalues
        // (a + b)/2 ± √(((a − b)/2)² + c²)
        let x = DesignMatrix::from_row_slice(4, 3, &[1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, -1.0])
            .unwrap();
        let g = full_gram(&x);
        let mut expect: f64 = 0.0;
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let (a, b, c) = (g[(i, i)], g[(j, j)], g[(i, j)]);
            let mid = (a + b) / 2.0;
            let rad = (((a - b) / 2.0).powi(2) + c * c).sqrt();
            expect = expect.max(mid + rad - 1.0).max(1.0 - (mid - rad));
        }
        let got = restricted_isometry_constant(&x, 2).unwrap();
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn theta_s1_is_largest_row_norm_of_cross_blocks() {
        let mut rng = SimRng::seed_from_u64(3);
        let x = DesignMatrix::new(DMatrix::from_fn(10, 4, |_, _| rng.normal())).unwrap().rescale_columns().unwrap();
        let g = full_gram(&x);
        // s = 1: T = {j}, T' = two other columns; σ_max of a 1×2 block is its norm
        let mut expect: f64 = 0.0;
        for j in 0..4 {
            for k in 0..4 {
                for l in k + 1..4 {
                    if k != j && l != j {
                        expect = expect.max((g[(j, k)].powi(2) + g[(j, l)].powi(2)).sqrt());
                    }
                }
            }
        }
        let got = restricted_orthogonality_constant(&x, 1).unwrap();
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn theta_shapes_cover_small_p() {
        assert_eq!(theta_shapes(8, 2), vec![(2, 4)]);
        // p < 3s: smaller T can pair with a larger T'
        assert_eq!(theta_shapes(5, 2), vec![(1, 4), (2, 3)]);
        assert_eq!(theta_shapes(3, 2), vec![(1, 2), (2, 1)]);
    }

    #[test]
    fn budget_is_enforced() {
        let x = scaled_identity(30);
        let err = restricted_isometry_constant_with_budget(&x, 10, 1000);
        assert!(matches!(err, Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn duplicated_columns_break_uup() {
        let mut rng = SimRng::seed_from_u64(5);
        let mut raw = DMatrix::from_fn(20, 4, |_, _| rng.normal());
        let c0 = raw.column(0).into_owned();
        raw.set_column(1, &c0);
        let x = DesignMatrix::new(raw).unwrap().rescale_columns().unwrap();
        let r = uup_report(&x, 2, DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert!(r.delta_s >= 1.0 - 1e-12);
        assert!(!r.uup_holds);
    }

    #[test]
    fn probe_on_orthogonal_design() {
        let x = scaled_identity(12);
        let k = restricted_eigenvalue_probe(&x, 3, 3, 2000, 1).unwrap();
        assert!(k >= 1.0 - 1e-8);
        assert!(restricted_eigenvalue_probe(&x, 3, 3, 0, 1).is_err());
    }

    #[test]
    fn false_signs() {
        let b0 = DVector::from_vec(vec![0.5, 0.2, 0.0]);
        assert_eq!(false_sign_count(&b0, &b0).unwrap(), 0);
        assert_eq!(false_sign_count(&(-&b0), &b0).unwrap(), 2);
        let bh = DVector::from_vec(vec![0.5, 0.0, -0.1]);
        assert_eq!(false_sign_count(&bh, &b0).unwrap(), 2);
        assert!(false_sign_count(&DVector::zeros(2), &b0).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(1000, 3), 166_167_000);
        assert_eq!(binomial(3, 4), 0);
    }
}
