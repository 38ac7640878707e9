//! Principal component analysis via a cyclic Jacobi eigensolver.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{MlError, Result};

const JACOBI_SWEEPS: usize = 100;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Sorted in descending order.
    pub eigenvalues: Vec<f64>,
    /// `components[i]` is the unit eigenvector for `eigenvalues[i]`.
    pub components: Vec<Vec<f64>>,
    pub explained_variance_ratio: Vec<f64>,
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Project centered rows onto the first `dims` components.
    pub fn project(&self, x: ArrayView2<f64>, dims: usize) -> Result<Array2<f64>> {
        let d = self.dim();
        if dims == 0 || dims > d {
            return Err(MlError::Config(format!(
                "projection dimension {dims} outside 1..={d}"
            )));
        }
        if x.ncols() != d {
            return Err(MlError::Dimension {
                expected: d,
                actual: x.ncols(),
            });
        }
        let centered = &x - &Array1::from(self.mean.clone());
        Ok(centered.dot(&self.basis(dims).t()))
    }

    /// Map projected coordinates back to the input space.
    pub fn reconstruct(&self, z: ArrayView2<f64>) -> Result<Array2<f64>> {
        let dims = z.ncols();
        if dims == 0 || dims > self.dim() {
            return Err(MlError::Config(format!(
                "projection dimension {dims} outside 1..={}",
                self.dim()
            )));
        }
        Ok(z.dot(&self.basis(dims)) + &Array1::from(self.mean.clone()))
    }

    fn basis(&self, dims: usize) -> Array2<f64> {
        let d = self.dim();
        Array2::from_shape_fn((dims, d), |(i, j)| self.components[i][j])
    }
}

/// Sample covariance (divisor `n - 1`) of the rows of `x`.
pub fn covariance(x: ArrayView2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = x.nrows();
    if n < 2 {
        return Err(MlError::TooFewRows { needed: 2, got: n });
    }
    let mean = x.mean_axis(Axis(0)).expect("non-empty");
    let centered = &x - &mean;
    let cov = centered.t().dot(&centered) / (n as f64 - 1.0);
    Ok((mean, cov))
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues and the matrix whose columns are eigenvectors,
/// unsorted.
pub fn symmetric_eigen(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = Array2::<f64>::eye(n);
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _ in 0..JACOBI_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[[i, j]].powi(2))
            .sum();
        if off.sqrt() <= f64::EPSILON * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[[i, i]]).collect(), v)
}

pub fn pca_fit(x: ArrayView2<f64>) -> Result<PcaModel> {
    let (mean, cov) = covariance(x)?;
    let (values, vectors) = symmetric_eigen(&cov);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let components = order
        .iter()
        .map(|&i| {
            let mut c = vectors.column(i).to_vec();
            // Fix the sign so the largest-magnitude entry is positive.
            let lead = c
                .iter()
                .copied()
                .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            if lead < 0.0 {
                c.iter_mut().for_each(|x| *x = -*x);
            }
            c
        })
        .collect();
    let total: f64 = eigenvalues.iter().sum();
    let explained_variance_ratio = if total > 0.0 {
        eigenvalues.iter().map(|l| l / total).collect()
    } else {
        vec![0.0; eigenvalues.len()]
    };
    Ok(PcaModel {
        mean: mean.to_vec(),
        eigenvalues,
        components,
        explained_variance_ratio,
    })
}

pub fn pca_project(m: &PcaModel, x: ArrayView2<f64>, dims: usize) -> Result<Array2<f64>> {
    m.project(x, dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn line_has_one_component() {
        let x = array![[0.0, 0.0], [1.0, 2.0], [2.0, 4.0], [-3.0, -6.0]];
        let m = pca_fit(x.view()).unwrap();
        assert!((m.explained_variance_ratio[0] - 1.0).abs() < 1e-12);
        assert!(m.explained_variance_ratio[1].abs() < 1e-12);
        let c = &m.components[0];
        assert!((c[1] / c[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_row_rejected() {
        let x = array![[1.0, 2.0]];
        assert!(matches!(
            pca_fit(x.view()),
            Err(MlError::TooFewRows { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn mean_projects_to_zero_and_full_projection_is_lossless() {
        let x = array![
            [1.0, 2.0, 0.5],
            [0.0, -1.0, 3.0],
            [2.0, 2.0, 2.0],
            [-1.0, 0.0, 1.0],
            [4.0, 1.0, -2.0]
        ];
        let m = pca_fit(x.view()).unwrap();
        let mean = Array2::from_shape_vec((1, 3), m.mean.clone()).unwrap();
        let z = m.project(mean.view(), 2).unwrap();
        assert!(z.iter().all(|v| v.abs() < 1e-12));
        let full = m.project(x.view(), 3).unwrap();
        let back = m.reconstruct(full.view()).unwrap();
        assert!((&back - &x).iter().all(|v| v.abs() < 1e-9));
        assert!(m.project(x.view(), 4).is_err());
        assert!((m.explained_variance_ratio.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
