//! The `.hornet` text format.
//!
//! A model is a sequence of sections. Lines starting with `#` are comments.
//!
//! ```text
//! kind WFN                        # a kind: place universe, spare slots, channels
//!   places i1 u v f1 i2 s f2
//!   fresh 4
//!   channels c
//! end
//!
//! objectnet N1 : WFN              # an object net constant
//!   trans a : i1 -> u rate 5 label c
//!   trans b : 2*u -> v + f1       # multisets: `0`, `p`, `2*p + q`
//!   place spare                   # places without arcs
//! end
//!
//! net N3 = N1 || N2               # a constant defined by a term
//!
//! system
//!   place p q : WFN
//!   var x y : WFN
//!   trans t
//!     in p : x                    # input inscription, `x + y` for several
//!     in q : y
//!     out r : x || y
//!     guard rateOf(x, a) > 1 and not rateOf(y, d) = 2
//!     sync x : c                  # one (term, channel) pair per line
//!     rate 2                      # or `rate mape`
//!   end
//! end
//!
//! marking
//!   p[N1, v] + q[N2, s]           # `0` is the empty object marking
//! end
//!
//! options
//!   gamma 0.5                     # required by `rate mape`
//!   pseudo_rate 1
//!   arith exact                   # or float
//!   mode_cap 10000
//!   split uniform
//! end
//! ```
//!
//! Terms: variables, constants, `(t)`, `t1 || t2`, `t1 XOR[r1,r2] t2`
//! (binds tighter than `||`), `xor(t1, t2, r1, r2)`, `updRate(t, trans, d)`,
//! `fixChoice(t, trans)`. Numbers are decimals, optionally written as a
//! fraction `n/d`. The `marking` section must follow `system`.

mod lexer;
mod parser;
mod printer;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use sha2::{Digest, Sha256};

use crate::engine::EngineConfig;
use crate::ids::TransitionId;
use crate::mape::{apply_mape_rates, MapeConfig, MapeError};
use crate::marking::NestedMarking;
use crate::object_net::NetRef;
use crate::rate::{Arith, Rate, Rational};
use crate::stochastic::StochasticConfig;
use crate::system::SystemNet;

pub use parser::parse_model;
pub use printer::print_model;

/// A parse or validation error, located when possible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelError {
    pub line: Option<usize>,
    pub col: Option<usize>,
    pub message: String,
}

impl ModelError {
    pub fn at(line: usize, col: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            col: Some(col),
            message: message.into(),
        }
    }

    pub fn general(message: impl Into<String>) -> Self {
        Self {
            line: None,
            col: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.col) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ModelError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelOptions {
    pub gamma: Option<Rational>,
    pub pseudo_rate: Rate,
    pub arith: Arith,
    pub mode_cap: usize,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            gamma: None,
            pseudo_rate: Rate::one(),
            arith: Arith::Exact,
            mode_cap: crate::engine::DEFAULT_MODE_CAP,
        }
    }
}

/// A parsed model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub system: SystemNet,
    pub marking: NestedMarking,
    pub options: ModelOptions,
    /// Named object-net constants.
    pub nets: BTreeMap<String, NetRef>,
    /// Transitions declared with `rate mape`.
    pub mape: BTreeSet<TransitionId>,
}

impl Model {
    pub fn stochastic_config(&self) -> StochasticConfig {
        StochasticConfig {
            arith: self.options.arith,
            engine: EngineConfig {
                mode_cap: self.options.mode_cap,
            },
            ..StochasticConfig::default()
        }
    }

    /// Replaces every system rate by its MAPE rate under `gamma`.
    pub fn with_mape_gamma(&self, gamma: Rational) -> Result<Model, MapeError> {
        let cfg = MapeConfig::new(gamma.clone())?;
        Ok(Model {
            system: apply_mape_rates(&self.system, &cfg)?,
            options: ModelOptions {
                gamma: Some(gamma),
                ..self.options.clone()
            },
            mape: self.system.transitions().keys().cloned().collect(),
            ..self.clone()
        })
    }

    /// Net digest to constant name, first name in order when several agree.
    pub fn net_names(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for (name, net) in &self.nets {
            out.entry(net.digest_hex()).or_insert_with(|| name.clone());
        }
        out
    }

    /// Deterministic encoding of everything that affects behaviour.
    pub fn canonical_encoding(&self) -> String {
        let sys = &self.system;
        let mut out = String::new();
        for k in sys.kinds().values() {
            let places: Vec<&str> = k.places.iter().map(|p| p.as_str()).collect();
            let chans: Vec<&str> = k.channels.iter().map(|c| c.as_str()).collect();
            out.push_str(&format!(
                "kind {} [{}] fresh {} [{}]\n",
                k.name,
                places.join(","),
                k.fresh,
                chans.join(",")
            ));
        }
        for (p, k) in sys.places() {
            out.push_str(&format!("place {p} : {k}\n"));
        }
        for (t, tr) in sys.transitions() {
            out.push_str(&format!("trans {t} rate {}\n", tr.rate.value()));
            for (label, side) in [("in", &tr.pre), ("out", &tr.post)] {
                for (p, terms) in side {
                    let mut enc: Vec<String> = terms.iter().map(|e| e.canonical_encoding()).collect();
                    enc.sort();
                    out.push_str(&format!("  {label} {p} : {}\n", enc.join(" + ")));
                }
            }
            out.push_str(&format!("  guard {}\n", tr.guard));
            let mut sync: Vec<String> = tr
                .sync
                .iter()
                .map(|(e, c)| format!("{}:{c}", e.canonical_encoding()))
                .collect();
            sync.sort();
            out.push_str(&format!("  sync {}\n", sync.join(" + ")));
        }
        out.push_str(&format!("pseudo {}\n", sys.pseudo_rate().value()));
        out.push_str(&format!(
            "options {} {} {:?}\n",
            self.options.arith,
            self.options.mode_cap,
            self.options.gamma.as_ref().map(|g| g.to_string())
        ));
        let mape: Vec<&str> = self.mape.iter().map(|t| t.as_str()).collect();
        out.push_str(&format!("mape {}\n", mape.join(",")));
        out.push_str("marking\n");
        out.push_str(&self.marking.canonical_encoding());
        out
    }

    pub fn digest_hex(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_encoding().as_bytes()))
    }
}
