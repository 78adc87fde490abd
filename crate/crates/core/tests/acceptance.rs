//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use hornet_core::engine::{enabled_events, fire, EngineConfig, Event};
use hornet_core::rate::{ratio, rational_to_f64};
use hornet_core::scenario::bos::{build_bos_model, run_bos, BosParams, Structure};
use hornet_core::stochastic::export::{observations_csv, to_dot, to_json, trace_csv};
use hornet_core::stochastic::{build_dmc, firing_probabilities, simulate, Dmc, Limits, StochasticConfig};
use hornet_core::*;

/// Float rows must sum to one within this bound.
const FLOAT_ROW_TOL: f64 = 1e-12;
/// Per-event band in binomial standard deviations.
const SIGMA_BAND: f64 = 3.0;
/// Chi-square critical value, 3 degrees of freedom, alpha = 0.001.
const CHI2_CRIT_DF3: f64 = 16.266;
const SIM_RUNS: u64 = 100_000;
const BOS_SEEDS: u64 = 50;
const BOS_STEPS: usize = 200;
/// Share of BoS runs in which prA0 must end above its start.
const BOS_RISE_SHARE: f64 = 0.9;
const ORACLE_MODELS: usize = 25;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn exact(cfg_arith: Arith) -> StochasticConfig {
    StochasticConfig::with_arith(cfg_arith)
}

fn probs_by_name(m: &Model) -> BTreeMap<String, (Event, Rational)> {
    firing_probabilities(&m.system, &m.marking, &exact(Arith::Exact))
        .unwrap()
        .into_iter()
        .map(|w| {
            let p = w.probability.as_exact().unwrap().clone();
            (w.event.to_string(), (w.event, p))
        })
        .collect()
}

fn theta_has(ev: &Event, t: &str) -> bool {
    ev.theta().values().any(|ts| ts.count(&ObjTransId::new(t)) > 0)
}

fn c1_worked_example() -> Outcome {
    let m = bundled::load("fig3").unwrap();
    let probs = probs_by_name(&m);
    let want = [
        ("a^{x->N}[N->r]", ratio(1, 6)),
        ("a^{x->N}[N->s]", ratio(7, 30)),
        ("b^{x->N}[N->r]", ratio(1, 4)),
        ("b^{x->N}[N->s]", ratio(7, 20)),
    ];
    check(probs.len() == 4, || {
        format!("expected 4 events, got {:?}", probs.keys())
    })?;
    for (name, p) in &want {
        let got = probs.get(*name).map(|(_, q)| q.clone());
        check(got.as_ref() == Some(p), || format!("Pr({name}) = {got:?}, want {p}"))?;
    }
    let pa: Rational = probs
        .values()
        .filter(|(e, _)| e.system_transition().unwrap().as_str() == "a")
        .map(|(_, p)| p.clone())
        .sum();
    let pr: Rational = probs
        .values()
        .filter(|(e, _)| theta_has(e, "r"))
        .map(|(_, p)| p.clone())
        .sum();
    check(pa == ratio(2, 5), || format!("Pr(a-events) = {pa}"))?;
    check(pr == ratio(5, 12), || format!("Pr(r-events) = {pr}"))?;
    Ok("Pr(a[N->r]) = 1/6, Pr(a) = 2/5, Pr(r) = 5/12".into())
}

fn c2_fig2_semantics() -> Outcome {
    let m = bundled::load("fig2").unwrap();
    let evs = enabled_events(&m.system, &m.marking, &EngineConfig::default()).unwrap();
    let names: Vec<String> = evs.iter().map(|e| e.event.to_string()).collect();
    let want = ["t^{x->N1, y->N2}[]", "id_{p,N1}[N1->c]", "id_{q,N2}[N2->e]"];
    let got: BTreeSet<&str> = names.iter().map(String::as_str).collect();
    check(got == BTreeSet::from(want), || format!("events {names:?}"))?;
    let after = |name: &str| {
        let e = evs.iter().find(|e| e.event.to_string() == name).unwrap();
        check(e.modes.len() == 1, || format!("{name} has {} modes", e.modes.len()))?;
        Ok::<_, String>(fire(&m.marking, &e.event, &e.modes[0]).unwrap().to_string())
    };
    let t1 = after(want[0])?;
    check(t1 == "r[(N1 || N2), s + v]", || format!("theta1 gives {t1}"))?;
    let t2 = after(want[2])?;
    check(t2 == "p[N1, v] + q[N2, f2]", || format!("theta2 gives {t2}"))?;
    Ok(format!("3 events; {t1}; {t2}"))
}

fn c3_oracle() -> Outcome {
    let (mut live, mut compared) = (0usize, 0usize);
    for seed in 0..1000u64 {
        let (sys, mut mu) = common::random_model(seed);
        let first_live = !common::engine_view(&sys, &mu).is_empty();
        for _ in 0..4 {
            let got = common::engine_view(&sys, &mu);
            let want = common::oracle(&sys, &mu);
            compared += 1;
            check(got == want, || format!("seed {seed}: engine and oracle differ at {mu}"))?;
            let Some((ev, modes)) = got.iter().next() else { break };
            mu = fire(&mu, ev, modes.iter().next().unwrap()).unwrap();
        }
        if first_live {
            live += 1;
            if live == ORACLE_MODELS {
                break;
            }
        }
    }
    check(live == ORACLE_MODELS, || format!("only {live} live models"))?;
    Ok(format!("{live} models, {compared} markings agree"))
}

fn row_check(name: &str, dmc: &Dmc) -> Result<usize, String> {
    let mut rows = 0;
    for (s, sum) in dmc.row_sums().iter().enumerate() {
        if !dmc.expanded[s] || dmc.outgoing(s).next().is_none() {
            continue;
        }
        rows += 1;
        match sum.as_exact() {
            Some(q) => check(*q == ratio(1, 1), || format!("{name}: row {s} sums to {q}"))?,
            None => {
                let d = (sum.to_f64() - 1.0).abs();
                check(d < FLOAT_ROW_TOL, || format!("{name}: row {s} off by {d:e}"))?
            }
        }
    }
    Ok(rows)
}

fn c4_rows() -> Outcome {
    let mut models: Vec<(String, SystemNet, NestedMarking)> = Vec::new();
    for n in bundled::NAMES {
        let m = bundled::load(n).unwrap();
        models.push((n.to_string(), m.system, m.marking));
    }
    let (bos, bos0) = build_bos_model(&BosParams::default()).unwrap();
    models.push(("bos".into(), bos, bos0));
    for seed in 0..20 {
        let (s, m) = common::random_model(seed);
        models.push((format!("random{seed}"), s, m));
    }
    let limits = Limits {
        max_states: 2000,
        max_depth: Some(12),
    };
    let mut rows = 0;
    for arith in [Arith::Exact, Arith::Float] {
        for (name, sys, mu) in &models {
            let dmc = build_dmc(sys, mu, limits, &exact(arith), false).map_err(|e| e.to_string())?;
            rows += row_check(name, &dmc)?;
        }
    }
    Ok(format!("{} models, {rows} rows (exact and float)", models.len()))
}

fn c5_simulation() -> Outcome {
    let m = bundled::load("fig3").unwrap();
    let cfg = m.stochastic_config();
    let expected = [
        ("a^{x->N}[N->r]", 1.0 / 6.0),
        ("a^{x->N}[N->s]", 7.0 / 30.0),
        ("b^{x->N}[N->r]", 1.0 / 4.0),
        ("b^{x->N}[N->s]", 7.0 / 20.0),
    ];
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for seed in 0..SIM_RUNS {
        let tr = simulate(&m.system, &m.marking, seed, 1, &cfg, None).unwrap();
        *counts.entry(tr.steps[1].event.clone()).or_default() += 1;
    }
    let n = SIM_RUNS as f64;
    let mut chi2 = 0.0;
    let mut freqs = Vec::new();
    for (name, p) in expected {
        let c = *counts.get(name).unwrap_or(&0) as f64;
        let sd = (n * p * (1.0 - p)).sqrt();
        check((c - n * p).abs() <= SIGMA_BAND * sd, || {
            format!("{name}: {c} vs {:.1} (sd {sd:.1})", n * p)
        })?;
        chi2 += (c - n * p).powi(2) / (n * p);
        freqs.push(format!("{:.4}", c / n));
    }
    check(counts.len() == 4, || format!("unexpected events {:?}", counts.keys()))?;
    check(chi2 < CHI2_CRIT_DF3, || format!("chi2 = {chi2:.3}"))?;
    Ok(format!("freqs [{}], chi2 = {chi2:.3}", freqs.join(", ")))
}

fn edge_set(dmc: &Dmc) -> BTreeSet<(usize, usize, String)> {
    dmc.edges.iter().map(|e| (e.from, e.to, e.event.to_string())).collect()
}

fn c6_mape() -> Outcome {
    let (sys, mu0) = build_bos_model(&BosParams::default()).unwrap();
    for (t, tr) in sys.transitions() {
        let want = if t.as_str().starts_with("play_") || t.as_str() == "reset" {
            Some(ratio(1, 1))
        } else if t.as_str().starts_with("adapt_") {
            Some(ratio(1, 2))
        } else {
            None
        };
        if let Some(w) = want {
            check(*tr.rate.value() == w, || format!("rate({t}) = {}", tr.rate))?;
        }
    }
    let limits = Limits {
        max_states: 5000,
        max_depth: Some(10),
    };
    let cfg = StochasticConfig::default();
    let base = build_dmc(&sys, &mu0, limits, &cfg, false).map_err(|e| e.to_string())?;
    let base_edges = edge_set(&base);
    for g in [ratio(1, 4), ratio(3, 4), ratio(1, 1)] {
        let p = BosParams {
            gamma: g.clone(),
            ..BosParams::default()
        };
        let (s2, m2) = build_bos_model(&p).unwrap();
        let d = build_dmc(&s2, &m2, limits, &cfg, false).map_err(|e| e.to_string())?;
        check(edge_set(&d) == base_edges, || format!("edge set changes at gamma {g}"))?;
    }
    Ok(format!(
        "play 1, adapt 0.5; {} edges identical for gamma 1/4, 1/2, 3/4, 1",
        base_edges.len()
    ))
}

fn rate_of(net: &ObjectNet, t: &str) -> Rational {
    net.rate(&ObjTransId::new(t)).unwrap().value().clone()
}

/// Expected change of the rates of a0 and b0 until the token first reaches
/// `done`, by exact recursion over the chain.
fn increments(dmc: &Dmc, s: usize, base: &(Rational, Rational)) -> Result<(Rational, Rational), String> {
    let mu = &dmc.states[s];
    if let Some((a, _)) = mu.iter().find(|(a, _)| a.place.as_str() == "done") {
        return Ok((rate_of(&a.net, "a0") - &base.0, rate_of(&a.net, "b0") - &base.1));
    }
    check(dmc.expanded[s], || format!("state {s} not expanded"))?;
    let mut acc = (ratio(0, 1), ratio(0, 1));
    for e in dmc.outgoing(s) {
        let p = e.probability.as_exact().unwrap().clone();
        let (da, db) = increments(dmc, e.to, base)?;
        acc.0 += &p * da;
        acc.1 += &p * db;
    }
    Ok(acc)
}

fn c7_bos() -> Outcome {
    let params = BosParams::default();
    // (a)
    let (sys, mu0) = build_bos_model(&params).unwrap();
    let dmc = build_dmc(
        &sys,
        &mu0,
        Limits {
            max_states: 10_000,
            max_depth: Some(8),
        },
        &StochasticConfig::default(),
        false,
    )
    .map_err(|e| e.to_string())?;
    let net0 = mu0.iter().next().unwrap().0.net.clone();
    let base = (rate_of(&net0, "a0"), rate_of(&net0, "b0"));
    let (da, db) = increments(&dmc, dmc.initial(), &base)?;
    // independent figure: payoff times the product of branch probabilities
    let pa0 = ratio(70, 100);
    let pa1 = ratio(55, 100);
    let want_a = ratio(3, 1) * &pa0 * &pa1;
    let want_b = ratio(1, 1) * (ratio(1, 1) - &pa0) * (ratio(1, 1) - &pa1);
    check(da == want_a && db == want_b, || {
        format!("increments {da}, {db}; want {want_a}, {want_b}")
    })?;
    check(da > db, || "a0 does not drift faster".into())?;

    // (b) and (c)
    let cfg = StochasticConfig::default();
    let p = BosParams {
        horizon: BOS_STEPS,
        ..params
    };
    let (mut rose, mut crossed, mut fixed) = (0u64, 0u64, 0u64);
    for seed in 0..BOS_SEEDS {
        let (trace, obs) = run_bos(&p, seed, &cfg).map_err(|e| e.to_string())?;
        let s = &obs.samples;
        if s.last().unwrap().0.pr_a0 > s[0].0.pr_a0 {
            rose += 1;
        }
        if let Some(i) = s
            .iter()
            .position(|(x, _)| x.structure == Structure::Xor && x.pr_a0 > ratio(4, 5))
        {
            crossed += 1;
            check(s[i..].iter().any(|(_, en)| *en), || {
                format!("seed {seed}: adapt never enabled after step {i}")
            })?;
        }
        for (k, st) in trace.steps.iter().enumerate() {
            if st.event.starts_with("adapt_a0") {
                fixed += 1;
                let (x, _) = &s[k];
                check(x.pr_a0 == ratio(1, 1) && x.structure == Structure::FixedA, || {
                    format!("seed {seed}: prA0 = {} after adapt", rational_to_f64(&x.pr_a0))
                })?;
            }
        }
    }
    let share = rose as f64 / BOS_SEEDS as f64;
    check(share >= BOS_RISE_SHARE, || {
        format!("prA0 rose in {rose}/{BOS_SEEDS} runs")
    })?;
    check(crossed > 0 && fixed > 0, || {
        format!("crossed {crossed}, fixed {fixed}: nothing to check")
    })?;
    Ok(format!(
        "E[d rate(a0)] = {da} > E[d rate(b0)] = {db}; rose {rose}/{BOS_SEEDS}; crossed 0.8 in {crossed}, adapt_a0 fired {fixed} times, all prA0 = 1"
    ))
}

fn c8_determinism() -> Outcome {
    let m = bundled::load("fig3").unwrap();
    let cfg = m.stochastic_config();
    let run = || trace_csv(&simulate(&m.system, &m.marking, 1, 1, &cfg, None).unwrap());
    check(run() == run(), || "fig3 traces differ".into())?;
    let p = BosParams::default();
    let bos = || {
        let (t, _) = run_bos(&p, 7, &StochasticConfig::default()).unwrap();
        format!("{}{}", trace_csv(&t), observations_csv(&t))
    };
    check(bos() == bos(), || "BoS traces differ".into())?;
    let g = bundled::load("fig2").unwrap();
    let export = |par: bool| {
        let d = build_dmc(&g.system, &g.marking, Limits::default(), &g.stochastic_config(), par).unwrap();
        format!("{}{}", to_dot(&d), to_json(&d))
    };
    let a = export(false);
    check(a == export(false) && a == export(true), || "DMC exports differ".into())?;
    Ok("traces and DOT/JSON exports byte-identical (incl. parallel build)".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        (
            "1 worked example probabilities",
            Duration::from_secs(1),
            c1_worked_example,
        ),
        (
            "2 two-net composition semantics",
            Duration::from_secs(1),
            c2_fig2_semantics,
        ),
        ("3 engine vs brute-force oracle", Duration::from_secs(60), c3_oracle),
        ("4 DMC rows sum to one", Duration::from_secs(60), c4_rows),
        ("5 simulation frequencies", Duration::from_secs(30), c5_simulation),
        (
            "6 MAPE rates and structural invariance",
            Duration::from_secs(60),
            c6_mape,
        ),
        ("7 BoS drift and adaptation", Duration::from_secs(120), c7_bos),
        ("8 determinism", Duration::from_secs(60), c8_determinism),
    ];
    let mut failed = 0;
    for (name, limit, f) in criteria {
        let t = Instant::now();
        let res = f();
        let el = t.elapsed();
        let res = res.and_then(|d| {
            if el <= limit {
                Ok(d)
            } else {
                Err(format!("{d}; took {el:.2?}, limit {limit:?}"))
            }
        });
        match res {
            Ok(d) => println!("criterion {name}: PASS ({el:.2?}) {d}"),
            Err(e) => {
                failed += 1;
                println!("criterion {name}: FAIL ({el:.2?}) {e}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
