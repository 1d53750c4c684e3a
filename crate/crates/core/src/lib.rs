//! Coupled thermo-hydro-chemo-mechanical simulation of methane-hydrate
//! bearing sand samples.
//!
//! The model is split into three blocks that are iterated to a joint fixed
//! point inside every implicit Euler step:
//!
//! * [`transport`] solves the CH4, H2O and hydrate mass balances and the
//!   energy balance with a fully upwinded two-point flux finite volume
//!   scheme (unknowns `P_g`, `S_w`, `S_h`, `T` per cell),
//! * [`geomech`] solves quasi-static axisymmetric poro-elasticity with a
//!   hydrate-dependent composite stiffness on bilinear quadrilaterals,
//! * [`coupling`] closes the sand mass balance for the total porosity and
//!   runs the block Gauss–Seidel loop and the time loop.
//!
//! Total porosity is the only quantity handed from the mechanics back to
//! the flow: all structure-dependent hydraulic properties are products of a
//! porosity factor and a hydrate-saturation factor.

pub mod constitutive;
pub mod coupling;
pub mod dual;
pub mod error;
pub mod geomech;
pub mod grid;
pub mod kinetics;
pub mod numerics;
pub mod output;
pub mod scenario;
pub mod state;
pub mod transport;

pub use constitutive::{MaterialDb, Regime};
pub use coupling::{CouplingConfig, RunArtifacts, SimState, Simulation, StepReport, TimeSeriesRow};
pub use error::{Error, Result};
pub use grid::AxiGrid;
pub use kinetics::{KineticParams, KineticSource};
pub use output::OutputSelection;
pub use scenario::ScenarioConfig;
pub use state::{FieldSnapshot, PrimaryState};
