//! Nested Petri nets whose tokens are object nets, with an algebra for
//! rewriting those tokens at run time.
//!
//! The main pieces:
//!
//! - [`object_net`] and [`algebra`]: object nets and the operators on them
//!   (parallel, rated XOR, rate update, choice fixing).
//! - [`system`] and [`marking`]: the system net and nested markings.
//! - [`engine`]: enabled events, modes and firing.
//! - [`stochastic`]: rates, firing probabilities, the reachable Markov chain,
//!   transient analysis and simulation.
//! - [`mape`]: rates derived from transformation complexity.
//! - [`model`]: the `.hornet` text format; [`bundled`] has two small models.
//! - [`scenario::bos`]: two adaptive agents playing Battle of the Sexes.
//!
//! ```
//! use hornet_core::{bundled, engine::enabled_events};
//!
//! let m = bundled::load("fig2").unwrap();
//! let evs = enabled_events(&m.system, &m.marking, &Default::default()).unwrap();
//! assert_eq!(evs.len(), 3);
//! ```

pub mod algebra;
pub mod bundled;
pub mod engine;
pub mod ids;
pub mod mape;
pub mod marking;
pub mod model;
pub mod multiset;
pub mod object_net;
pub mod rate;
pub mod scenario;
pub mod stochastic;
pub mod system;

pub use algebra::{AlgebraError, Binding, Guard, GuardError, NetTerm, Var};
pub use engine::{EnabledEvent, EngineConfig, EngineError, Event, Mode};
pub use ids::{Channel, KindName, ObjPlaceId, ObjTransId, PlaceId, TransitionId, VarName};
pub use mape::{MapeConfig, MapeError};
pub use marking::{Addend, NestedMarking};
pub use model::{parse_model, print_model, Model, ModelError};
pub use multiset::{CountOverflow, Multiset};
pub use object_net::{Kind, NetError, NetRef, ObjectNet};
pub use rate::{Arith, Prob, Rate, RateError, Rational};
pub use scenario::bos::{BosError, BosParams};
pub use stochastic::{Dmc, Limits, StochasticConfig, TransientError};
pub use system::{SysTransition, SystemError, SystemNet};

/// Any error raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Mape(#[from] MapeError),
    #[error(transparent)]
    Transient(#[from] TransientError),
    #[error(transparent)]
    Bos(#[from] BosError),
}
