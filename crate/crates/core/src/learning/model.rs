use serde::{Deserialize, Serialize};

use super::pca::PcaModel;
use super::svm::SvmModel;
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Trained PCA + SVM pair, exchanged as versioned JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format_version: u32,
    pub pca: PcaModel,
    pub svm: SvmModel,
}

impl ModelBundle {
    pub fn new(pca: PcaModel, svm: SvmModel) -> Self {
        ModelBundle {
            format_version: MODEL_FORMAT_VERSION,
            pca,
            svm,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let bundle: ModelBundle = serde_json::from_str(text)?;
        if bundle.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                bundle.format_version
            )));
        }
        Ok(bundle)
    }
}
