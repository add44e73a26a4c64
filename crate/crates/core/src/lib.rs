//! Exact verification of the specialization behaviour of motivic Hodge-Chern
//! and Hirzebruch classes on closed-form degenerations.

pub mod cli;
pub mod genus;
pub mod kgroup;
pub mod laurent;
pub mod motivic;
pub mod nearby;
pub mod report;
pub mod ring;
pub mod scalar;
pub mod scenario;
pub mod verify;

pub use kgroup::{GysinTable, KClass, KPresentation};
pub use laurent::{Laurent, LaurentError, Localized};
pub use motivic::{MotivicClass, TwistRule};
pub use nearby::SNCScenario;
pub use ring::{GradedClass, PowerSeries, RingPresentation};
pub use scalar::{Coefficient, Scalar};
pub use scenario::{parse_scenario, ScenarioFile};
pub use verify::{check_theorem, VerificationReport};

/// Exact rationals used throughout the verifier.
pub type Rational = num_rational::BigRational;
/// `Q[y, y^-1]`.
pub type LaurentPoly = Laurent<Rational>;
/// `Q[y, y^-1, (1+y)^-1]`.
pub type LocalizedPoly = Localized<Rational>;
