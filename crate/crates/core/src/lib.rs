//! Axiomatic and learned invariant signatures of planar curves.

pub mod curve;
pub mod data;
pub mod error;
pub mod eval;
pub mod invariants;
pub mod net;
pub mod numfmt;
pub mod scalar;
pub mod siamese;
pub mod svg;

pub use curve::{ArcLengthProfile, EuclideanTransform, PlanarCurve};
pub use error::{Error, Result};
pub use invariants::{Signature, SignatureMethod};
pub use net::{Architecture, Model};
pub use scalar::Real;
pub use siamese::{Hyperparameters, PairConfig, PairLabel, TrainingPair};

/// Double-precision curve, the default for every pipeline.
pub type Curve64 = PlanarCurve<f64>;
/// Single-precision curve.
pub type Curve32 = PlanarCurve<f32>;
/// Double-precision model.
pub type Model64 = Model<f64>;
/// Single-precision model.
pub type Model32 = Model<f32>;
/// Double-precision signature.
pub type Signature64 = Signature<f64>;
