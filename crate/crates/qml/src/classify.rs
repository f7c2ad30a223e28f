//! Classifier abstractions shared by the attack machinery.
//!
//! Attacks need two capabilities: predicting a label for a raw image and
//! (for the attack source only) differentiating the loss with respect to
//! pixels. [`PreparedQvc`] runs a quantum classifier behind any of the
//! state-preparation pipelines, so the same trained model can be
//! evaluated on exactly encoded states or on the states an approximate
//! circuit actually prepares.

use serde::{Deserialize, Serialize};

use crate::error::{QmlError, QmlResult};
use crate::qvc::{input_gradient, QvcModel};
use crate::surrogate::{surrogate_gradient, SurrogateModel};
use qprep_core::encoding::{amplitude_encode, EncodingMode, Image};
use qprep_core::Statevector;
use qprep_methods::{gasp_prepare, mps_prepare, variational_prepare};
use qprep_methods::{GaspConfig, MpsConfig, VariationalConfig};

/// Anything that labels raw images.
pub trait ImageClassifier: Sync {
    fn name(&self) -> &str;
    fn predict_image(&self, image: &Image) -> QmlResult<usize>;
}

/// A classifier whose loss is differentiable in the input pixels —
/// the requirement for serving as a gradient-attack source.
pub trait DifferentiableClassifier: ImageClassifier {
    /// Gradient of −log p(label | image) with respect to raw pixels.
    fn input_loss_gradient(&self, image: &Image, label: usize) -> QmlResult<Vec<f64>>;
}

impl ImageClassifier for SurrogateModel {
    fn name(&self) -> &str {
        "surrogate"
    }

    fn predict_image(&self, image: &Image) -> QmlResult<usize> {
        self.predict(image.pixels())
    }
}

impl DifferentiableClassifier for SurrogateModel {
    fn input_loss_gradient(&self, image: &Image, label: usize) -> QmlResult<Vec<f64>> {
        surrogate_gradient(self, image, label)
    }
}

/// How a [`PreparedQvc`] turns an encoded target into the state the
/// classifier actually sees.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Preparation {
    /// Use the encoded state directly (ideal preparation).
    Exact,
    Mps(MpsConfig),
    Variational(VariationalConfig),
    Gasp(GaspConfig),
}

/// A quantum classifier evaluated behind a state-preparation pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreparedQvc {
    pub name: String,
    pub model: QvcModel,
    pub mode: EncodingMode,
    pub preparation: Preparation,
}

impl PreparedQvc {
    pub fn exact(name: impl Into<String>, model: QvcModel, mode: EncodingMode) -> Self {
        Self {
            name: name.into(),
            model,
            mode,
            preparation: Preparation::Exact,
        }
    }

    /// The state handed to the classifier for `image`: the exact encoding
    /// or whatever the configured preparation circuit reaches.
    pub fn prepare_state(&self, image: &Image) -> QmlResult<Statevector> {
        let target = amplitude_encode(image, self.mode)?;
        Ok(match &self.preparation {
            Preparation::Exact => target,
            Preparation::Mps(config) => mps_prepare(&target, config)?.0.simulate()?,
            Preparation::Variational(config) => variational_prepare(&target, config)?.0.simulate()?,
            Preparation::Gasp(config) => gasp_prepare(&target, config)?.0.simulate()?,
        })
    }
}

impl ImageClassifier for PreparedQvc {
    fn name(&self) -> &str {
        &self.name
    }

    fn predict_image(&self, image: &Image) -> QmlResult<usize> {
        self.model.predict(&self.prepare_state(image)?)
    }
}

impl DifferentiableClassifier for PreparedQvc {
    fn input_loss_gradient(&self, image: &Image, label: usize) -> QmlResult<Vec<f64>> {
        match self.preparation {
            // Only the exact pipeline is analytically differentiable; the
            // preparation searches are not.
            Preparation::Exact => input_gradient(&self.model, image, label, self.mode),
            _ => Err(QmlError::NoInputGradient(self.name.clone())),
        }
    }
}
