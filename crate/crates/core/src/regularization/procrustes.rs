use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Orthogonal Procrustes solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Procrustes {
    /// Orthogonal `d x d` matrix minimizing `||source W - target||_F`.
    pub w: DMatrix<f64>,
    /// True when `source^T target` is numerically rank deficient, in which
    /// case `w` is one of several minimizers.
    pub rank_deficient: bool,
}

/// Solves `min_{W orthogonal} ||source W - target||_F` through the SVD of
/// `source^T target`. Reflections are allowed.
pub fn orthogonal_procrustes(source: &DMatrix<f64>, target: &DMatrix<f64>) -> Result<Procrustes> {
    if source.shape() != target.shape() {
        return Err(Error::Dimension(format!(
            "procrustes inputs are {:?} and {:?}",
            source.shape(),
            target.shape()
        )));
    }
    if source.nrows() == 0 {
        return Err(Error::Dimension("procrustes needs at least one row pair".into()));
    }
    let m = source.transpose() * target;
    let svd = m.svd(true, true);
    let s = &svd.singular_values;
    let top = s.max();
    let rank_deficient = top == 0.0 || s.min() <= 1e-10 * top;
    if rank_deficient {
        log::warn!("procrustes cross-product is rank deficient; the alignment is not unique");
    }
    let w = svd.u.expect("u requested") * svd.v_t.expect("v_t requested");
    Ok(Procrustes { w, rank_deficient })
}

/// Aligns `source_points` by the rotation taking `source_centers` closest to
/// `target_centers`.
pub fn procrustes_align(
    source_centers: &DMatrix<f64>,
    target_centers: &DMatrix<f64>,
    source_points: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let sol = orthogonal_procrustes(source_centers, target_centers)?;
    if source_points.ncols() != sol.w.nrows() {
        return Err(Error::Dimension("points and centers differ in dimension".into()));
    }
    Ok(source_points * sol.w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_when_already_aligned() {
        let c = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 2.0, 1.0, 1.0]);
        let sol = orthogonal_procrustes(&c, &c).unwrap();
        assert!((sol.w - DMatrix::identity(2, 2)).abs().max() < 1e-12);
        assert!(!sol.rank_deficient);
    }

    #[test]
    fn recovers_reflection() {
        let c = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, -0.3, 2.0, 1.0, 1.0]);
        let refl = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0]));
        let t = &c * &refl;
        let pts = DMatrix::from_row_slice(2, 2, &[0.2, 0.4, -1.0, 3.0]);
        let out = procrustes_align(&c, &t, &pts).unwrap();
        assert!((out - pts * refl).abs().max() < 1e-12);
    }

    #[test]
    fn single_pair_is_flagged() {
        let c = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        assert!(orthogonal_procrustes(&c, &c).unwrap().rank_deficient);
    }

    #[test]
    fn shape_mismatch() {
        assert!(orthogonal_procrustes(&DMatrix::zeros(2, 2), &DMatrix::zeros(3, 2)).is_err());
    }
}
