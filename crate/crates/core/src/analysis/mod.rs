//! Checks of the testable identities and Monte-Carlo diagnostics for the
//! concentration events behind the regret analysis.

mod concentration;
mod decomposition;
mod gaps;
mod scaling;
pub mod verify;
mod widths;

pub use concentration::{
    concentration_floor, concentration_rate, ConcentrationConfig, ConcentrationRow,
};
pub use decomposition::{reward_decomposition, RewardDecomposition};
pub use gaps::{gap_table, GapTable};
pub use scaling::scaling_curve;
pub use widths::{confidence_widths, width_g, ConfidenceWidths};
