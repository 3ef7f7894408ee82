//! Nonautonomous difference equations u_{t+1} = F_t(u_t) and their general solution φ(t;τ,u).

mod error;
mod interval;
mod metadata;
mod model;
mod process;
mod state;

pub use error::{Error, Result};
pub use interval::DiscreteInterval;
pub use metadata::{constant, Metadata, SemilinearParams, Sequence};
pub use model::{ModelSpec, Rhs};
pub use process::{evolve, orbit, step, verify_periodicity, verify_process_property, Trajectory};
pub use state::{sup_dist, sup_norm, Domain, StateVector};

/// Fixed-width scientific formatting with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        // keep "-0" out of exported payloads
        return format!("{:.16e}", 0.0_f64);
    }
    format!("{v:.16e}")
}
