//! Small models shipped with the library.

use crate::model::{parse_model, Model};

pub const FIG2: &str = include_str!("../models/fig2.hornet");
pub const FIG3: &str = include_str!("../models/fig3.hornet");

/// Names accepted by [`load`].
pub const NAMES: [&str; 2] = ["fig2", "fig3"];

pub fn source(name: &str) -> Option<&'static str> {
    match name {
        "fig2" => Some(FIG2),
        "fig3" => Some(FIG3),
        _ => None,
    }
}

pub fn load(name: &str) -> Option<Model> {
    source(name).map(|s| parse_model(s).expect("bundled model parses"))
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_parse() {
        for n in super::NAMES {
            assert!(super::load(n).is_some());
        }
    }
}
