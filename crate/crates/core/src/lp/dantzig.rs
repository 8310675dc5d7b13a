use nalgebra::{DMatrix, DVector};

use super::LpProblem;
use crate::error::{Error, Result};
use crate::types::DesignMatrix;

/// LP form of `min ‖β‖₁  s.t.  |n⁻¹ Xᵀ(y − Xβ)| ≤ b` componentwise.
///
/// Variables are `z = (u, v)` with `β = u − v`; rows are the two-sided
/// constraints `n⁻¹Xᵀy − b ≤ n⁻¹XᵀX (u − v) ≤ n⁻¹Xᵀy + b`.
pub fn dantzig_lp_reformulation(x: &DesignMatrix, y: &DVector<f64>, b: &DVector<f64>) -> Result<LpProblem> {
    if y.len() != x.n() {
        return Err(Error::DimensionMismatch {
            what: "response length",
            expected: x.n(),
            got: y.len(),
        });
    }
    if b.len() != x.p() {
        return Err(Error::DimensionMismatch {
            what: "bound vector length",
            expected: x.p(),
            got: b.len(),
        });
    }
    if !x.is_column_scaled() {
        return Err(Error::InvalidArgument(
            "Dantzig reformulation needs a column-scaled design".into(),
        ));
    }
    let all: Vec<usize> = (0..x.p()).collect();
    let gram = x.gram_block(&all, &all);
    let xty = x.correlations(y);
    restricted_dantzig_lp(&gram, &xty, b)
}

/// LP for a Dantzig problem given its Gram block `G` (rows × vars), the
/// matching correlations `n⁻¹X_rowsᵀy` and the row bounds.
pub fn restricted_dantzig_lp(gram: &DMatrix<f64>, xty: &DVector<f64>, b: &DVector<f64>) -> Result<LpProblem> {
    let (k, p) = gram.shape();
    if xty.len() != k || b.len() != k {
        return Err(Error::DimensionMismatch {
            what: "restricted Dantzig rows",
            expected: k,
            got: xty.len().min(b.len()),
        });
    }
    if b.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::InvalidArgument("Dantzig bounds must be nonnegative".into()));
    }
    let mut a = DMatrix::zeros(k, 2 * p);
    a.view_mut((0, 0), (k, p)).copy_from(gram);
    a.view_mut((0, p), (k, p)).copy_from(&(-gram));
    LpProblem::new(DVector::from_element(2 * p, 1.0), a, xty - b, xty + b)
}

/// Maps split variables back to `β = u − v`.
///
/// Applies the cancellation `t = min(u_j, v_j)` first, which leaves `β`
/// unchanged and restores the minimal-ℓ₁ representation.
pub fn split_to_beta(z: &DVector<f64>) -> DVector<f64> {
    let p = z.len() / 2;
    DVector::from_iterator(
        p,
        (0..p).map(|j| {
            let (u, v) = (z[j], z[p + j]);
            let t = u.min(v);
            (u - t) - (v - t)
        }),
    )
}
