pub mod blaschke;
pub mod charts;
pub mod error;
pub mod frames;
pub mod jets;
pub mod linalg;
pub mod scalar;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
pub use jets::{JetFn, JetOp, MultiJet};
pub use scalar::Scalar;

pub type Rational = num_rational::BigRational;

pub type Jet64 = MultiJet<f64>;
pub type Jet32 = MultiJet<f32>;
pub type JetQ = MultiJet<Rational>;

pub type Blaschke64 = blaschke::BlaschkeData<f64>;
pub type BlaschkeQ = blaschke::BlaschkeData<Rational>;
