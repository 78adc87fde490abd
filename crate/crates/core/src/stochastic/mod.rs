//! Event rates, firing probabilities and the induced Markov chain.

pub mod dmc;
pub mod export;
pub mod rates;
pub mod simulate;
pub mod transient;

pub use dmc::{build_dmc, Dmc, DmcEdge, Limits};
pub use rates::{event_rate, event_rate_product, firing_probabilities, RatePolicy, StochasticConfig, WeightedEvent};
pub use simulate::{simulate, Observer, Trace, TraceStep};
pub use transient::{transient_distribution, TransientError};
