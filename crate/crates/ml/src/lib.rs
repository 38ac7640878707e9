//! Classical machine learning on quiver datasets: PCA, a polynomial-kernel
//! SVM with explicit polynomial expansion, a dense neural network, and
//! classification metrics.

pub mod error;
pub mod expansion;
pub mod metrics;
pub mod mlp;
pub mod pca;
pub mod svm;

use mutacyc_core::LabeledDataset;
use ndarray::Array2;

pub use error::{MlError, Result};
pub use expansion::{svm_expand, PolynomialExpansion};
pub use metrics::{confusion, ConfusionMatrix};
pub use mlp::{mlp_train, Activation, MlpConfig, MlpModel, TrainData};
pub use pca::{pca_fit, pca_project, PcaModel};
pub use svm::{kernel_poly, svm_train, ClassWeights, SvmConfig, SvmModel};

/// Features as an `n x dim` matrix.
pub fn feature_matrix(ds: &LabeledDataset) -> Array2<f64> {
    Array2::from_shape_vec((ds.len(), ds.dim()), ds.features_f64()).expect("row-major data")
}

/// Labels as class indices.
pub fn class_indices(ds: &LabeledDataset) -> Vec<usize> {
    ds.labels().iter().map(|&l| l as usize).collect()
}
