pub mod cli;
pub mod error;
pub mod invariant;
pub mod observables;
pub mod oracle;
pub mod profiles;
pub mod quadrature;
mod stencil;
pub mod wavepacket;

pub use error::{Error, Result};
