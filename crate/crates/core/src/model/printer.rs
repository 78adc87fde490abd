use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt::Write;

use super::Model;
use crate::algebra::NetTerm;
use crate::object_net::{NetRef, Origin};

/// Renders a model in the text format.
///
/// Every net, including ones produced by operators, becomes an explicit
/// `objectnet` block, so parsing the output gives a model with the same
/// digest. Custom operators have no concrete syntax and do not round-trip.
pub fn print_model(m: &Model) -> String {
    let names = NetNames::collect(m);
    let mut out = String::new();
    let sys = &m.system;

    for k in sys.kinds().values() {
        let _ = writeln!(out, "kind {}", k.name);
        if !k.places.is_empty() {
            let ps: Vec<&str> = k.places.iter().map(|p| p.as_str()).collect();
            let _ = writeln!(out, "  places {}", ps.join(" "));
        }
        let _ = writeln!(out, "  fresh {}", k.fresh);
        if !k.channels.is_empty() {
            let cs: Vec<&str> = k.channels.iter().map(|c| c.as_str()).collect();
            let _ = writeln!(out, "  channels {}", cs.join(" "));
        }
        out.push_str("end\n\n");
    }

    for (name, net) in &names.order {
        let _ = writeln!(out, "objectnet {name} : {}", net.kind_name());
        let ps: Vec<&str> = net.places().iter().map(|p| p.as_str()).collect();
        if !ps.is_empty() {
            let _ = writeln!(out, "  place {}", ps.join(" "));
        }
        for (t, tr) in net.transitions() {
            let _ = write!(out, "  trans {t} : {} -> {} rate {}", tr.pre, tr.post, tr.rate);
            if let Some(c) = &tr.label {
                let _ = write!(out, " label {c}");
            }
            out.push('\n');
        }
        out.push_str("end\n\n");
    }

    out.push_str("system\n");
    let mut by_kind: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (p, k) in sys.places() {
        by_kind.entry(k.to_string()).or_default().push(p.to_string());
    }
    for (k, ps) in &by_kind {
        let _ = writeln!(out, "  place {} : {k}", ps.join(" "));
    }
    let mut vars: BTreeMap<String, String> = BTreeMap::new();
    for tr in sys.transitions().values() {
        for (_, e) in tr.inputs() {
            if let Some(v) = e.as_var() {
                vars.insert(v.name.to_string(), v.kind.to_string());
            }
        }
    }
    let mut vars_by_kind: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (v, k) in &vars {
        vars_by_kind.entry(k).or_default().push(v);
    }
    for (k, vs) in &vars_by_kind {
        let _ = writeln!(out, "  var {} : {k}", vs.join(" "));
    }
    let render = |e: &NetTerm| e.render(&|n| names.name(n));
    for (t, tr) in sys.transitions() {
        let _ = writeln!(out, "  trans {t}");
        for (label, side) in [("in", &tr.pre), ("out", &tr.post)] {
            for (p, terms) in side {
                let ts: Vec<String> = terms.iter().map(render).collect();
                let _ = writeln!(out, "    {label} {p} : {}", ts.join(" + "));
            }
        }
        if tr.guard != Default::default() {
            let _ = writeln!(out, "    guard {}", tr.guard);
        }
        for (e, c) in &tr.sync {
            let _ = writeln!(out, "    sync {} : {c}", render(e));
        }
        if m.mape.contains(t) {
            out.push_str("    rate mape\n");
        } else {
            let _ = writeln!(out, "    rate {}", tr.rate);
        }
        out.push_str("  end\n");
    }
    out.push_str("end\n\n");

    out.push_str("marking\n");
    for (a, n) in m.marking.iter() {
        let mult = if n > 1 { format!("{n}*") } else { String::new() };
        let _ = writeln!(out, "  + {mult}{}[{}, {}]", a.place, names.name(&a.net), a.marking);
    }
    out.push_str("end\n\n");

    let o = &m.options;
    out.push_str("options\n");
    if let Some(g) = &o.gamma {
        let _ = writeln!(out, "  gamma {}", crate::rate::format_rational(g));
    }
    let _ = writeln!(out, "  pseudo_rate {}", o.pseudo_rate);
    let _ = writeln!(out, "  arith {}", o.arith);
    let _ = writeln!(out, "  mode_cap {}", o.mode_cap);
    out.push_str("  split uniform\nend\n");
    // a leading `+` before the first addend is not valid syntax
    out.replacen("marking\n  + ", "marking\n  ", 1)
}

struct NetNames {
    by_digest: BTreeMap<String, String>,
    order: Vec<(String, NetRef)>,
}

impl NetNames {
    fn collect(m: &Model) -> Self {
        let mut s = NetNames {
            by_digest: BTreeMap::new(),
            order: Vec::new(),
        };
        for (name, net) in &m.nets {
            s.by_digest.entry(net.digest_hex()).or_insert_with(|| name.clone());
            s.order.push((name.clone(), net.clone()));
        }
        let mut extra = Vec::new();
        for tr in m.system.transitions().values() {
            for e in tr
                .pre
                .values()
                .chain(tr.post.values())
                .flatten()
                .chain(tr.sync.iter().map(|(e, _)| e))
            {
                constants(e, &mut extra);
            }
        }
        extra.extend(m.marking.iter().map(|(a, _)| a.net.clone()));
        for net in extra {
            let d = net.digest_hex();
            if let Entry::Vacant(slot) = s.by_digest.entry(d) {
                let name = match net.origin() {
                    Origin::Name(n) if is_ident(n) && !m.nets.contains_key(&**n) => n.to_string(),
                    _ => format!("net_{}", &slot.key()[..12]),
                };
                slot.insert(name.clone());
                s.order.push((name, net));
            }
        }
        s
    }

    fn name(&self, n: &NetRef) -> String {
        self.by_digest[&n.digest_hex()].clone()
    }
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn constants(e: &NetTerm, out: &mut Vec<NetRef>) {
    match e {
        NetTerm::Var(_) => {}
        NetTerm::Const(n) => out.push(n.clone()),
        NetTerm::Parallel(a, b) | NetTerm::Xor { left: a, right: b, .. } => {
            constants(a, out);
            constants(b, out);
        }
        NetTerm::UpdateRate { net, .. } | NetTerm::FixChoice { net, .. } => constants(net, out),
        NetTerm::Custom { args, .. } => args.iter().for_each(|a| constants(a, out)),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_model;
    use super::*;
    use crate::scenario::bos::{build_bos_model, BosParams};
    use crate::system::SystemNet;

    #[test]
    fn bos_round_trip() {
        let (system, marking) = build_bos_model(&BosParams::default()).unwrap();
        let m = Model {
            system,
            marking,
            options: Default::default(),
            nets: BTreeMap::new(),
            mape: Default::default(),
        };
        let text = print_model(&m);
        let back = parse_model(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        assert_eq!(back.digest_hex(), m.digest_hex());
        assert_eq!(print_model(&back), text);
    }

    #[test]
    fn mape_round_trip() {
        let (system, marking) = build_bos_model(&BosParams::default()).unwrap();
        let m = Model {
            system: SystemNet::clone(&system),
            marking,
            options: Default::default(),
            nets: BTreeMap::new(),
            mape: Default::default(),
        }
        .with_mape_gamma(crate::rate::ratio(1, 2))
        .unwrap();
        let text = print_model(&m);
        assert!(text.contains("rate mape"));
        let back = parse_model(&text).unwrap();
        assert_eq!(back.digest_hex(), m.digest_hex());
    }
}
