//! P1 finite elements on a structured triangulation of the unit square.

mod assembly;
mod coefficients;
mod mesh;
mod space;

pub use assembly::{assemble_mass, assemble_mass_full, assemble_stiffness};
pub use coefficients::{ProblemCoefficients, ScalarField, TimeSignal};
pub use mesh::{Mesh, Point};
pub use space::{FemSpace, FieldVector};
