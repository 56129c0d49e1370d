//! Data model: random Gaussian designs, sparse signals, responses and the
//! SNR regime taxonomy.

pub mod dataset;
pub mod design;
pub mod regime;
pub mod rng;
pub mod signal;

pub use dataset::{gen_response, Dataset, DatasetShape};
pub use design::{gen_design, gen_design_with_budget, DesignMatrix};
pub use regime::{classify_regime, RegimeLabel, SnrRegime};
pub use rng::{combine_ids, RngStream};
pub use signal::{gen_signal, gen_signal_with, ParamSpace, SignPattern, SignalVector};
