//! PCA projection and one-vs-one SVM classification of CSI vectors.

mod eigen;
pub mod metrics;
pub mod model;
pub mod pca;
pub mod svm;

pub use eigen::symmetric_eigen;
pub use metrics::{evaluate_accuracy, silhouette_score, AccuracyReport};
pub use model::ModelBundle;
pub use pca::PcaModel;
pub use svm::{svm_predict, svm_train, BinaryMachine, Kernel, Point, SvmModel, SvmParams};
