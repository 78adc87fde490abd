use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::lexer::{tokenize, Tok, Token};
use super::{Model, ModelError, ModelOptions};
use crate::algebra::{ArithOp, Binding, CmpOp, Expr, Guard, NetTerm};
use crate::ids::{Channel, KindName, ObjPlaceId, ObjTransId, PlaceId, TransitionId};
use crate::mape::{apply_mape_rates_to, MapeConfig};
use crate::marking::{Addend, NestedMarking};
use crate::multiset::Multiset;
use crate::object_net::{Kind, NetRef, ObjTransition, ObjectNet, Origin};
use crate::rate::{parse_rational, Arith, Rate, Rational};
use crate::system::{SysTransition, SystemNet};

type Res<T> = Result<T, ModelError>;

/// Parses a model file.
pub fn parse_model(text: &str) -> Res<Model> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        kinds: BTreeMap::new(),
        nets: BTreeMap::new(),
        places: BTreeMap::new(),
        vars: BTreeMap::new(),
        transitions: BTreeMap::new(),
        mape: BTreeSet::new(),
        marking: None,
        options: ModelOptions::default(),
        saw_system: false,
    };
    p.file()?;
    p.finish()
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    kinds: BTreeMap<KindName, Arc<Kind>>,
    nets: BTreeMap<String, NetRef>,
    places: BTreeMap<PlaceId, KindName>,
    vars: BTreeMap<String, KindName>,
    transitions: BTreeMap<TransitionId, SysTransition>,
    mape: BTreeSet<TransitionId>,
    marking: Option<NestedMarking>,
    options: ModelOptions,
    saw_system: bool,
}

/// Which names a term may mention.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Scope {
    Constants,
    System,
}

const ARITH_FOLLOW: [&str; 9] = ["+", "-", "*", "/", "<", "<=", "=", ">=", ">"];

impl Parser {
    fn tok(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek(&self) -> &Tok {
        &self.tok().tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tok().clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> ModelError {
        let t = self.tok();
        ModelError::at(t.line, t.col, msg)
    }

    fn err_at(t: &Token, msg: impl Into<String>) -> ModelError {
        ModelError::at(t.line, t.col, msg)
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Newline => "end of line".into(),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of file".into(),
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Res<Token> {
        if self.is_punct(p) {
            Ok(self.bump())
        } else {
            Err(self.err(format!("expected `{p}`, found {}", Self::describe(self.peek()))))
        }
    }

    fn ident(&mut self, what: &str) -> Res<(String, Token)> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.bump())),
            other => Err(self.err(format!("expected {what}, found {}", Self::describe(&other)))),
        }
    }

    fn skip_newlines(&mut self) {
        while matches!(self.peek(), Tok::Newline) {
            self.bump();
        }
    }

    fn end_of_line(&mut self) -> Res<()> {
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            other => Err(self.err(format!("expected end of line, found {}", Self::describe(other)))),
        }
    }

    fn uint(&mut self, what: &str) -> Res<u64> {
        match self.peek().clone() {
            Tok::Number(s) => {
                let t = self.bump();
                s.parse()
                    .map_err(|_| Self::err_at(&t, format!("expected {what}, found `{s}`")))
            }
            other => Err(self.err(format!("expected {what}, found {}", Self::describe(&other)))),
        }
    }

    /// A number, optionally negative, with `n/d` folded when written without spaces.
    fn number(&mut self) -> Res<Rational> {
        let neg = self.eat_punct("-");
        let start = self.tok().clone();
        let Tok::Number(text) = start.tok.clone() else {
            return Err(self.err(format!("expected a number, found {}", Self::describe(self.peek()))));
        };
        self.bump();
        let mut value = parse_rational(&text).map_err(|e| Self::err_at(&start, e.to_string()))?;
        if let (Tok::Punct("/"), Tok::Number(den)) = (self.peek().clone(), self.peek_at(1).clone()) {
            let slash = self.tok().clone();
            let den_tok = self.toks[self.pos + 1].clone();
            let adjacent = slash.line == start.line
                && slash.col == start.col + text.len()
                && den_tok.line == slash.line
                && den_tok.col == slash.col + 1;
            if adjacent {
                self.bump();
                self.bump();
                let d = parse_rational(&den).map_err(|e| Self::err_at(&den_tok, e.to_string()))?;
                if d == Rational::from_integer(0.into()) {
                    return Err(Self::err_at(&den_tok, "division by zero in literal"));
                }
                value /= d;
            }
        }
        Ok(if neg { -value } else { value })
    }

    fn rate(&mut self) -> Res<Rate> {
        let t = self.tok().clone();
        let v = self.number()?;
        Rate::new(v).map_err(|e| Self::err_at(&t, e.to_string()))
    }

    // ---- file structure ----

    fn file(&mut self) -> Res<()> {
        loop {
            self.skip_newlines();
            if matches!(self.peek(), Tok::Eof) {
                return Ok(());
            }
            let (kw, t) = self.ident("a section keyword")?;
            match kw.as_str() {
                "kind" => self.kind_section()?,
                "objectnet" => self.objectnet_section()?,
                "net" => self.net_def()?,
                "system" => {
                    if self.saw_system {
                        return Err(Self::err_at(&t, "duplicate system section"));
                    }
                    self.saw_system = true;
                    self.system_section()?
                }
                "marking" => {
                    if !self.saw_system {
                        return Err(Self::err_at(&t, "the marking section must follow the system section"));
                    }
                    if self.marking.is_some() {
                        return Err(Self::err_at(&t, "duplicate marking section"));
                    }
                    self.marking_section()?
                }
                "options" => self.options_section()?,
                other => {
                    return Err(Self::err_at(
                        &t,
                        format!(
                            "unknown section `{other}` (expected kind, objectnet, net, system, marking or options)"
                        ),
                    ))
                }
            }
        }
    }

    fn kind_section(&mut self) -> Res<()> {
        let (name, t) = self.ident("a kind name")?;
        self.end_of_line()?;
        let mut places = Vec::new();
        let mut fresh = 0usize;
        let mut channels = Vec::new();
        loop {
            self.skip_newlines();
            let (kw, kt) = self.ident("`places`, `fresh`, `channels` or `end`")?;
            match kw.as_str() {
                "end" => break,
                "places" => {
                    while let Tok::Ident(p) = self.peek().clone() {
                        self.bump();
                        places.push(ObjPlaceId::new(p));
                    }
                }
                "fresh" => fresh = self.uint("a slot count")? as usize,
                "channels" => {
                    while let Tok::Ident(c) = self.peek().clone() {
                        self.bump();
                        channels.push(Channel::new(c));
                    }
                }
                other => return Err(Self::err_at(&kt, format!("unexpected `{other}` in kind section"))),
            }
            self.end_of_line()?;
        }
        self.end_of_line()?;
        let kind = KindName::new(&name);
        if self.kinds.contains_key(&kind) {
            return Err(Self::err_at(&t, format!("duplicate kind `{name}`")));
        }
        self.kinds
            .insert(kind, Arc::new(Kind::new(name.as_str(), places, fresh, channels)));
        Ok(())
    }

    fn lookup_kind(&self, name: &str, t: &Token) -> Res<Arc<Kind>> {
        self.kinds
            .get(name)
            .cloned()
            .ok_or_else(|| Self::err_at(t, format!("unknown kind `{name}`")))
    }

    fn define_net(&mut self, name: String, t: &Token, net: NetRef) -> Res<()> {
        if self.nets.contains_key(&name) {
            return Err(Self::err_at(t, format!("duplicate net `{name}`")));
        }
        self.nets.insert(name, net);
        Ok(())
    }

    fn place_multiset(&mut self, stop: &[&str]) -> Res<Multiset<ObjPlaceId>> {
        let mut ms = Multiset::new();
        if matches!(self.peek(), Tok::Number(n) if n == "0") && !self.is_punct_at(1, "*") {
            self.bump();
            return Ok(ms);
        }
        if matches!(self.peek(), Tok::Newline | Tok::Eof) || stop.iter().any(|s| self.is_punct(s)) {
            return Ok(ms);
        }
        loop {
            let mut n = 1;
            if matches!(self.peek(), Tok::Number(_)) {
                n = self.uint("a multiplicity")?;
                self.expect_punct("*")?;
            }
            let (p, t) = self.ident("a place name")?;
            ms.insert(ObjPlaceId::new(p), n)
                .map_err(|_| Self::err_at(&t, "multiplicity overflow"))?;
            if !self.eat_punct("+") {
                return Ok(ms);
            }
        }
    }

    fn is_punct_at(&self, k: usize, p: &str) -> bool {
        matches!(self.peek_at(k), Tok::Punct(q) if *q == p)
    }

    fn objectnet_section(&mut self) -> Res<()> {
        let (name, t) = self.ident("a net name")?;
        self.expect_punct(":")?;
        let (kname, kt) = self.ident("a kind name")?;
        let kind = self.lookup_kind(&kname, &kt)?;
        self.end_of_line()?;
        let mut b = ObjectNet::builder(kind).origin(Origin::name(&name));
        let mut seen = BTreeSet::new();
        loop {
            self.skip_newlines();
            let (kw, kwt) = self.ident("`trans`, `place` or `end`")?;
            match kw.as_str() {
                "end" => break,
                "place" => {
                    while let Tok::Ident(p) = self.peek().clone() {
                        self.bump();
                        b = b.place(p);
                    }
                }
                "trans" => {
                    let (tname, tt) = self.ident("a transition name")?;
                    if !seen.insert(tname.clone()) {
                        return Err(Self::err_at(
                            &tt,
                            format!("duplicate transition `{tname}` in net `{name}`"),
                        ));
                    }
                    self.expect_punct(":")?;
                    let pre = self.place_multiset(&["->"])?;
                    self.expect_punct("->")?;
                    let post = self.place_multiset(&[])?;
                    let mut rate = Rate::one();
                    let mut label = None;
                    loop {
                        if self.is_kw("rate") {
                            self.bump();
                            rate = self.rate()?;
                        } else if self.is_kw("label") {
                            self.bump();
                            let (c, _) = self.ident("a channel name")?;
                            label = Some(Channel::new(c));
                        } else {
                            break;
                        }
                    }
                    b = b.transition(tname, ObjTransition { pre, post, rate, label });
                }
                other => return Err(Self::err_at(&kwt, format!("unexpected `{other}` in objectnet section"))),
            }
            self.end_of_line()?;
        }
        self.end_of_line()?;
        let net = b.build().map_err(|e| Self::err_at(&t, format!("net `{name}`: {e}")))?;
        self.define_net(name, &t, Arc::new(net))
    }

    fn net_def(&mut self) -> Res<()> {
        let (name, t) = self.ident("a net name")?;
        self.expect_punct("=")?;
        let term = self.term(Scope::Constants)?;
        self.end_of_line()?;
        let net = term
            .eval(&Binding::new())
            .map_err(|e| Self::err_at(&t, format!("net `{name}`: {e}")))?;
        let named = net.with_origin(Origin::name(&name));
        self.define_net(name, &t, Arc::new(named))
    }

    fn system_section(&mut self) -> Res<()> {
        self.end_of_line()?;
        loop {
            self.skip_newlines();
            let (kw, kwt) = self.ident("`place`, `var`, `trans` or `end`")?;
            match kw.as_str() {
                "end" => break,
                "place" | "var" => {
                    let mut names = Vec::new();
                    while let Tok::Ident(n) = self.peek().clone() {
                        names.push((n, self.bump()));
                    }
                    if names.is_empty() {
                        return Err(self.err(format!("expected a {kw} name")));
                    }
                    self.expect_punct(":")?;
                    let (kname, kt) = self.ident("a kind name")?;
                    self.lookup_kind(&kname, &kt)?;
                    for (n, nt) in names {
                        let dup = if kw == "place" {
                            self.places.insert(PlaceId::new(&n), KindName::new(&kname)).is_some()
                        } else {
                            if self.nets.contains_key(&n) {
                                return Err(Self::err_at(&nt, format!("variable `{n}` shadows a net constant")));
                            }
                            self.vars.insert(n.clone(), KindName::new(&kname)).is_some()
                        };
                        if dup {
                            return Err(Self::err_at(&nt, format!("duplicate {kw} `{n}`")));
                        }
                    }
                }
                "trans" => {
                    self.transition_block()?;
                    continue;
                }
                other => return Err(Self::err_at(&kwt, format!("unexpected `{other}` in system section"))),
            }
            self.end_of_line()?;
        }
        self.end_of_line()
    }

    fn system_place(&self, name: &str, t: &Token) -> Res<KindName> {
        self.places
            .get(name)
            .cloned()
            .ok_or_else(|| Self::err_at(t, format!("unknown place `{name}`")))
    }

    fn transition_block(&mut self) -> Res<()> {
        let (name, t) = self.ident("a transition name")?;
        self.end_of_line()?;
        let tid = TransitionId::new(&name);
        if self.transitions.contains_key(&tid) {
            return Err(Self::err_at(&t, format!("duplicate transition `{name}`")));
        }
        let mut tr = SysTransition::new();
        let mut guard: Option<Guard> = None;
        let mut used: Vec<(String, Token)> = Vec::new();
        loop {
            self.skip_newlines();
            let (kw, kwt) = self.ident("`in`, `out`, `guard`, `sync`, `rate` or `end`")?;
            match kw.as_str() {
                "end" => break,
                "in" | "out" => {
                    let (p, pt) = self.ident("a place name")?;
                    let pkind = self.system_place(&p, &pt)?;
                    self.expect_punct(":")?;
                    loop {
                        let mut n = 1;
                        if matches!(self.peek(), Tok::Number(_)) && self.is_punct_at(1, "*") {
                            n = self.uint("a multiplicity")?;
                            self.bump();
                        }
                        let at = self.tok().clone();
                        let term = self.term(Scope::System)?;
                        let k = term.kind().map_err(|e| Self::err_at(&at, e.to_string()))?;
                        if k != pkind {
                            return Err(Self::err_at(
                                &at,
                                format!("term `{term}` has kind `{k}` but place `{p}` holds `{pkind}`"),
                            ));
                        }
                        if kw == "in" && term.as_var().is_none() {
                            return Err(Self::err_at(&at, "input inscriptions must be variables"));
                        }
                        if kw == "out" {
                            for v in term.vars() {
                                used.push((v.name.to_string(), at.clone()));
                            }
                        }
                        for _ in 0..n {
                            tr = if kw == "in" {
                                tr.input(p.as_str(), term.clone())
                            } else {
                                tr.output(p.as_str(), term.clone())
                            };
                        }
                        if !self.eat_punct("+") {
                            break;
                        }
                    }
                }
                "guard" => {
                    let at = self.tok().clone();
                    let g = self.guard()?;
                    for v in g.vars() {
                        used.push((v.to_string(), at.clone()));
                    }
                    guard = Some(match guard {
                        None => g,
                        Some(prev) => Guard::and(prev, g),
                    });
                }
                "sync" => {
                    let at = self.tok().clone();
                    let term = self.term(Scope::System)?;
                    self.expect_punct(":")?;
                    let (c, _) = self.ident("a channel name")?;
                    for v in term.vars() {
                        used.push((v.name.to_string(), at.clone()));
                    }
                    tr = tr.sync(term, c.as_str());
                }
                "rate" => {
                    if self.is_kw("mape") {
                        self.bump();
                        self.mape.insert(tid.clone());
                    } else {
                        tr = tr.rate(self.rate()?);
                    }
                }
                other => {
                    return Err(Self::err_at(
                        &kwt,
                        format!("unexpected `{other}` in transition `{name}`"),
                    ))
                }
            }
            self.end_of_line()?;
        }
        self.end_of_line()?;
        if let Some(g) = guard {
            tr = tr.guard(g);
        }
        let bound: BTreeSet<String> = tr.input_vars().into_iter().map(|v| v.name.to_string()).collect();
        if let Some((v, at)) = used.iter().find(|(v, _)| !bound.contains(v)) {
            return Err(Self::err_at(
                at,
                format!("variable `{v}` is not bound by an input of `{name}`"),
            ));
        }
        self.transitions.insert(tid, tr);
        Ok(())
    }

    fn marking_section(&mut self) -> Res<()> {
        self.end_of_line()?;
        let mut items = Vec::new();
        loop {
            self.skip_newlines();
            if self.is_kw("end") {
                self.bump();
                break;
            }
            if matches!(self.peek(), Tok::Number(n) if n == "0") && !self.is_punct_at(1, "*") {
                self.bump();
            } else {
                let mut n = 1;
                if matches!(self.peek(), Tok::Number(_)) {
                    n = self.uint("a multiplicity")?;
                    self.expect_punct("*")?;
                }
                let (p, pt) = self.ident("a place name")?;
                let pkind = self.system_place(&p, &pt)?;
                self.expect_punct("[")?;
                let at = self.tok().clone();
                let term = self.term(Scope::Constants)?;
                let net = term
                    .eval(&Binding::new())
                    .map_err(|e| Self::err_at(&at, e.to_string()))?;
                if net.kind_name() != &pkind {
                    return Err(Self::err_at(
                        &at,
                        format!("net of kind `{}` on place `{p}` of kind `{pkind}`", net.kind_name()),
                    ));
                }
                self.expect_punct(",")?;
                let mt = self.tok().clone();
                let ms = self.place_multiset(&["]"])?;
                if let Some(q) = ms.support().find(|q| !net.places().contains(*q)) {
                    return Err(Self::err_at(
                        &mt,
                        format!("`{q}` is not a place of `{}`", net.display()),
                    ));
                }
                self.expect_punct("]")?;
                for _ in 0..n {
                    items.push(Addend::new(p.as_str(), net.clone(), ms.clone()));
                }
            }
            self.skip_newlines();
            if !self.eat_punct("+") && !self.is_kw("end") {
                return Err(self.err(format!("expected `+` or `end`, found {}", Self::describe(self.peek()))));
            }
        }
        self.end_of_line()?;
        self.marking = Some(NestedMarking::from_addends(items).map_err(|_| self.err("multiplicity overflow"))?);
        Ok(())
    }

    fn options_section(&mut self) -> Res<()> {
        self.end_of_line()?;
        loop {
            self.skip_newlines();
            let (kw, kwt) = self.ident("an option name or `end`")?;
            match kw.as_str() {
                "end" => break,
                "gamma" => {
                    let t = self.tok().clone();
                    let g = self.number()?;
                    MapeConfig::new(g.clone()).map_err(|e| Self::err_at(&t, e.to_string()))?;
                    self.options.gamma = Some(g);
                }
                "pseudo_rate" => self.options.pseudo_rate = self.rate()?,
                "arith" => {
                    let (a, at) = self.ident("`exact` or `float`")?;
                    self.options.arith = a.parse::<Arith>().map_err(|e| Self::err_at(&at, e.to_string()))?;
                }
                "mode_cap" => {
                    let t = self.tok().clone();
                    let n = self.uint("a mode cap")?;
                    if n == 0 {
                        return Err(Self::err_at(&t, "mode_cap must be positive"));
                    }
                    self.options.mode_cap = n as usize;
                }
                "split" => {
                    let (s, st) = self.ident("a split policy")?;
                    if s != "uniform" {
                        return Err(Self::err_at(
                            &st,
                            format!("unknown split policy `{s}` (only `uniform`)"),
                        ));
                    }
                }
                other => return Err(Self::err_at(&kwt, format!("unknown option `{other}`"))),
            }
            self.end_of_line()?;
        }
        self.end_of_line()
    }

    fn finish(self) -> Res<Model> {
        if !self.saw_system {
            return Err(ModelError::general("no system section"));
        }
        let mut b = SystemNet::builder().pseudo_rate(self.options.pseudo_rate.clone());
        for k in self.kinds.values() {
            b = b.kind(k.clone());
        }
        for (p, k) in &self.places {
            b = b.place(p.clone(), k.clone());
        }
        for (t, tr) in &self.transitions {
            b = b.transition(t.clone(), tr.clone());
        }
        let mut system = b.build().map_err(|e| ModelError::general(e.to_string()))?;
        if !self.mape.is_empty() {
            let gamma = self
                .options
                .gamma
                .clone()
                .ok_or_else(|| ModelError::general("`rate mape` needs `gamma` in the options section"))?;
            let cfg = MapeConfig::new(gamma).map_err(|e| ModelError::general(e.to_string()))?;
            system = apply_mape_rates_to(&system, &cfg, &self.mape).map_err(|e| ModelError::general(e.to_string()))?;
        }
        let marking = self.marking.unwrap_or_default();
        system
            .check_marking(&marking)
            .map_err(|e| ModelError::general(e.to_string()))?;
        Ok(Model {
            system,
            marking,
            options: self.options,
            nets: self.nets,
            mape: self.mape,
        })
    }

    // ---- terms ----

    fn term(&mut self, scope: Scope) -> Res<NetTerm> {
        let mut acc = self.xor_term(scope)?;
        while self.eat_punct("||") {
            let rhs = self.xor_term(scope)?;
            acc = NetTerm::parallel(acc, rhs);
        }
        Ok(acc)
    }

    fn xor_term(&mut self, scope: Scope) -> Res<NetTerm> {
        let mut acc = self.primary_term(scope)?;
        while self.is_kw("XOR") {
            self.bump();
            self.expect_punct("[")?;
            let r1 = self.rate()?;
            self.expect_punct(",")?;
            let r2 = self.rate()?;
            self.expect_punct("]")?;
            let rhs = self.primary_term(scope)?;
            acc = NetTerm::xor(acc, rhs, r1, r2);
        }
        Ok(acc)
    }

    fn primary_term(&mut self, scope: Scope) -> Res<NetTerm> {
        if self.eat_punct("(") {
            let t = self.term(scope)?;
            self.expect_punct(")")?;
            return Ok(t);
        }
        let (name, t) = self.ident("a net term")?;
        if self.is_punct("(") {
            match name.as_str() {
                "xor" => {
                    self.bump();
                    let a = self.term(scope)?;
                    self.expect_punct(",")?;
                    let b = self.term(scope)?;
                    self.expect_punct(",")?;
                    let r1 = self.rate()?;
                    self.expect_punct(",")?;
                    let r2 = self.rate()?;
                    self.expect_punct(")")?;
                    return Ok(NetTerm::xor(a, b, r1, r2));
                }
                "updRate" => {
                    self.bump();
                    let a = self.term(scope)?;
                    self.expect_punct(",")?;
                    let (tr, _) = self.ident("an object transition")?;
                    self.expect_punct(",")?;
                    let d = self.number()?;
                    self.expect_punct(")")?;
                    return Ok(NetTerm::update_rate(a, ObjTransId::new(tr), d));
                }
                "fixChoice" => {
                    self.bump();
                    let a = self.term(scope)?;
                    self.expect_punct(",")?;
                    let (tr, _) = self.ident("an object transition")?;
                    self.expect_punct(")")?;
                    return Ok(NetTerm::fix_choice(a, ObjTransId::new(tr)));
                }
                _ => return Err(Self::err_at(&t, format!("unknown operator `{name}`"))),
            }
        }
        if scope == Scope::System {
            if let Some(k) = self.vars.get(&name) {
                return Ok(NetTerm::var(name.as_str(), k.clone()));
            }
        }
        match self.nets.get(&name) {
            Some(n) => Ok(NetTerm::constant(n.clone())),
            None if scope == Scope::System => Err(Self::err_at(&t, format!("unknown variable or net `{name}`"))),
            None => Err(Self::err_at(&t, format!("unknown net `{name}`"))),
        }
    }

    // ---- guards ----

    fn guard(&mut self) -> Res<Guard> {
        let mut acc = self.guard_and()?;
        while self.is_kw("or") {
            self.bump();
            let rhs = self.guard_and()?;
            acc = Guard::or(acc, rhs);
        }
        Ok(acc)
    }

    fn guard_and(&mut self) -> Res<Guard> {
        let mut acc = self.guard_unary()?;
        while self.is_kw("and") {
            self.bump();
            let rhs = self.guard_unary()?;
            acc = Guard::and(acc, rhs);
        }
        Ok(acc)
    }

    fn guard_unary(&mut self) -> Res<Guard> {
        if self.is_kw("not") {
            self.bump();
            return Ok(Guard::negate(self.guard_unary()?));
        }
        if self.is_kw("true") {
            self.bump();
            return Ok(Guard::True);
        }
        if self.is_punct("(") {
            // either a parenthesised guard or the start of an arithmetic operand
            let save = self.pos;
            self.bump();
            if let Ok(g) = self.guard() {
                if self.eat_punct(")") && !ARITH_FOLLOW.iter().any(|p| self.is_punct(p)) {
                    return Ok(g);
                }
            }
            self.pos = save;
        }
        let a = self.expr()?;
        let op = match self.peek() {
            Tok::Punct("<") => CmpOp::Lt,
            Tok::Punct("<=") => CmpOp::Le,
            Tok::Punct("=") => CmpOp::Eq,
            Tok::Punct(">=") => CmpOp::Ge,
            Tok::Punct(">") => CmpOp::Gt,
            other => return Err(self.err(format!("expected a comparison, found {}", Self::describe(other)))),
        };
        self.bump();
        let b = self.expr()?;
        Ok(Guard::cmp(op, a, b))
    }

    fn expr(&mut self) -> Res<Expr> {
        let mut acc = self.expr_mul()?;
        loop {
            let op = if self.is_punct("+") {
                ArithOp::Add
            } else if self.is_punct("-") {
                ArithOp::Sub
            } else {
                return Ok(acc);
            };
            self.bump();
            let rhs = self.expr_mul()?;
            acc = Expr::bin(op, acc, rhs);
        }
    }

    fn expr_mul(&mut self) -> Res<Expr> {
        let mut acc = self.factor()?;
        loop {
            let op = if self.is_punct("*") {
                ArithOp::Mul
            } else if self.is_punct("/") {
                ArithOp::Div
            } else {
                return Ok(acc);
            };
            self.bump();
            let rhs = self.factor()?;
            acc = Expr::bin(op, acc, rhs);
        }
    }

    fn factor(&mut self) -> Res<Expr> {
        if self.is_punct("-") {
            if matches!(self.peek_at(1), Tok::Number(_)) {
                return Ok(Expr::lit(self.number()?));
            }
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        if matches!(self.peek(), Tok::Number(_)) {
            return Ok(Expr::lit(self.number()?));
        }
        if self.eat_punct("(") {
            let e = self.expr()?;
            self.expect_punct(")")?;
            return Ok(e);
        }
        let (name, t) = self.ident("an arithmetic operand")?;
        if name != "rateOf" {
            return Err(Self::err_at(
                &t,
                format!("unexpected `{name}` in guard (expected rateOf, a number or `(`)"),
            ));
        }
        self.expect_punct("(")?;
        let (var, vt) = self.ident("a variable")?;
        if !self.vars.contains_key(&var) {
            return Err(Self::err_at(&vt, format!("unknown variable `{var}`")));
        }
        self.expect_punct(",")?;
        let (tr, _) = self.ident("an object transition")?;
        self.expect_punct(")")?;
        Ok(Expr::rate_of(var.as_str(), tr.as_str()))
    }
}
