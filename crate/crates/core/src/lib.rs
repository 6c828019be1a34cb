pub mod asymptotics;
pub mod error;
pub mod fit;
pub mod functionals;
pub mod group;
pub mod orlicz;
pub mod quadrature;

pub use error::{Error, Result};
pub use functionals::{EnergyBreakdown, Field, ScalarField, Smoothness};
pub use group::{CarnotGroup, GaugeKind, GroupPoint, HomogeneousGauge, HorizontalRotation};
pub use orlicz::{OrliczFamily, OrliczFunction};
pub use quadrature::{IntegralValue, QuadratureSpec};
