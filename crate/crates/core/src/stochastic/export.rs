//! DMC and trace exporters.
//!
//! JSON layout:
//!
//! ```text
//! { "states": [<marking>...], "digests": [<sha256 hex>...], "initial": 0,
//!   "truncated": false,
//!   "edges": [{"from": 0, "to": 1, "event": "...", "p_num": "1", "p_den": "6"}] }
//! ```
//!
//! Numerators and denominators are decimal strings so that large exact
//! values survive. Float chains give the exact binary fraction of each f64.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::object_net::NetRef;

use super::dmc::Dmc;
use super::rates::WeightedEvent;
use super::simulate::Trace;

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn to_dot(dmc: &Dmc) -> String {
    to_dot_named(dmc, &BTreeMap::new())
}

/// DOT with state labels naming nets by `names` (net digest to name) where
/// possible.
pub fn to_dot_named(dmc: &Dmc, names: &BTreeMap<String, String>) -> String {
    let name_of = |n: &NetRef| {
        names
            .get(&n.digest_hex())
            .cloned()
            .unwrap_or_else(|| n.display().to_string())
    };
    let mut out = String::from("digraph dmc {\n  node [shape=box];\n");
    for (i, s) in dmc.states.iter().enumerate() {
        let extra = if i == dmc.initial() { ", peripheries=2" } else { "" };
        out.push_str(&format!(
            "  s{i} [label=\"{}\"{extra}];\n",
            dot_escape(&s.render(&name_of))
        ));
    }
    for e in &dmc.edges {
        out.push_str(&format!(
            "  s{} -> s{} [label=\"{} : {}\"];\n",
            e.from,
            e.to,
            dot_escape(&e.event.to_string()),
            e.probability
        ));
    }
    out.push_str("}\n");
    out
}

#[derive(Serialize)]
struct JsonEdge {
    from: usize,
    to: usize,
    event: String,
    p_num: String,
    p_den: String,
}

#[derive(Serialize)]
struct JsonDmc {
    states: Vec<String>,
    digests: Vec<String>,
    initial: usize,
    truncated: bool,
    edges: Vec<JsonEdge>,
}

pub fn to_json(dmc: &Dmc) -> String {
    let doc = JsonDmc {
        states: dmc.states.iter().map(|s| s.to_string()).collect(),
        digests: dmc.states.iter().map(|s| s.digest_hex()).collect(),
        initial: dmc.initial(),
        truncated: dmc.truncated,
        edges: dmc
            .edges
            .iter()
            .map(|e| {
                let (p_num, p_den) = e.probability.numer_denom();
                JsonEdge {
                    from: e.from,
                    to: e.to,
                    event: e.event.to_string(),
                    p_num,
                    p_den,
                }
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("plain data serialises");
    s.push('\n');
    s
}

fn write_csv(header: Vec<String>, rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 input")
}

/// `event,rate,probability,modes`, one row per enabled event.
pub fn events_csv(events: &[WeightedEvent]) -> String {
    write_csv(
        ["event", "rate", "probability", "modes"].map(String::from).to_vec(),
        events.iter().map(|w| {
            vec![
                w.event.to_string(),
                w.rate.to_string(),
                w.probability.to_string(),
                w.modes.len().to_string(),
            ]
        }),
    )
}

/// `step,event,probability,<observer columns>`.
pub fn trace_csv(trace: &Trace) -> String {
    let mut header = vec!["step".to_string(), "event".to_string(), "probability".to_string()];
    header.extend(trace.columns.iter().cloned());
    write_csv(
        header,
        trace.steps.iter().map(|s| {
            let mut row = vec![
                s.step.to_string(),
                s.event.clone(),
                s.probability.as_ref().map(|p| p.to_string()).unwrap_or_default(),
            ];
            row.extend(s.observed.iter().cloned());
            row
        }),
    )
}

/// `step,<observer columns>`.
pub fn observations_csv(trace: &Trace) -> String {
    let mut header = vec!["step".to_string()];
    header.extend(trace.columns.iter().cloned());
    write_csv(
        header,
        trace.steps.iter().map(|s| {
            let mut row = vec![s.step.to_string()];
            row.extend(s.observed.iter().cloned());
            row
        }),
    )
}
