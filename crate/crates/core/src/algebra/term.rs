use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::ids::{KindName, ObjTransId, VarName};
use crate::object_net::{NetRef, ObjectNet};
use crate::rate::{format_rational, Rate, Rational};

use super::{ops, AlgebraError};

/// A typed term variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: VarName,
    pub kind: KindName,
}

impl Var {
    pub fn new(name: impl Into<VarName>, kind: impl Into<KindName>) -> Self {
        Self {
            name: name.into(),
            kind: kind.into(),
        }
    }
}

type Semantics = dyn Fn(&[NetRef]) -> Result<ObjectNet, AlgebraError> + Send + Sync;

/// A user-supplied operator with its signature and interpretation.
pub struct OpDef {
    pub name: String,
    pub arg_kinds: Vec<KindName>,
    pub result_kind: KindName,
    pub semantics: Box<Semantics>,
}

impl OpDef {
    pub fn new(
        name: impl Into<String>,
        arg_kinds: Vec<KindName>,
        result_kind: KindName,
        semantics: impl Fn(&[NetRef]) -> Result<ObjectNet, AlgebraError> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            arg_kinds,
            result_kind,
            semantics: Box::new(semantics),
        }
    }
}

impl fmt::Debug for OpDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OpDef")
            .field("name", &self.name)
            .field("arg_kinds", &self.arg_kinds)
            .field("result_kind", &self.result_kind)
            .finish_non_exhaustive()
    }
}

impl PartialEq for OpDef {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.arg_kinds == other.arg_kinds && self.result_kind == other.result_kind
    }
}

impl Eq for OpDef {}

/// A term over object nets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NetTerm {
    Var(Var),
    Const(NetRef),
    /// AND composition of two workflow nets.
    Parallel(Box<NetTerm>, Box<NetTerm>),
    /// Rated XOR choice between two workflow nets.
    Xor {
        left: Box<NetTerm>,
        right: Box<NetTerm>,
        left_rate: Rate,
        right_rate: Rate,
    },
    /// Adds `delta` to the rate of one transition.
    UpdateRate {
        net: Box<NetTerm>,
        transition: ObjTransId,
        delta: Rational,
    },
    /// Resolves the XOR block containing `keep` in favour of `keep`.
    FixChoice {
        net: Box<NetTerm>,
        keep: ObjTransId,
    },
    Custom {
        op: Arc<OpDef>,
        args: Vec<NetTerm>,
    },
}

impl NetTerm {
    pub fn var(name: impl Into<VarName>, kind: impl Into<KindName>) -> Self {
        NetTerm::Var(Var::new(name, kind))
    }

    pub fn constant(net: NetRef) -> Self {
        NetTerm::Const(net)
    }

    pub fn parallel(a: NetTerm, b: NetTerm) -> Self {
        NetTerm::Parallel(Box::new(a), Box::new(b))
    }

    pub fn xor(a: NetTerm, b: NetTerm, left_rate: Rate, right_rate: Rate) -> Self {
        NetTerm::Xor {
            left: Box::new(a),
            right: Box::new(b),
            left_rate,
            right_rate,
        }
    }

    pub fn update_rate(net: NetTerm, transition: impl Into<ObjTransId>, delta: Rational) -> Self {
        NetTerm::UpdateRate {
            net: Box::new(net),
            transition: transition.into(),
            delta,
        }
    }

    pub fn fix_choice(net: NetTerm, keep: impl Into<ObjTransId>) -> Self {
        NetTerm::FixChoice {
            net: Box::new(net),
            keep: keep.into(),
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            NetTerm::Var(v) => Some(v),
            _ => None,
        }
    }

    fn children(&self) -> Vec<&NetTerm> {
        match self {
            NetTerm::Var(_) | NetTerm::Const(_) => vec![],
            NetTerm::Parallel(a, b) => vec![a, b],
            NetTerm::Xor { left, right, .. } => vec![left, right],
            NetTerm::UpdateRate { net, .. } | NetTerm::FixChoice { net, .. } => vec![net],
            NetTerm::Custom { args, .. } => args.iter().collect(),
        }
    }

    /// Number of operator applications; variables and constants count 0.
    pub fn op_count(&self) -> usize {
        let own = usize::from(!matches!(self, NetTerm::Var(_) | NetTerm::Const(_)));
        own + self.children().into_iter().map(NetTerm::op_count).sum::<usize>()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        if let NetTerm::Var(v) = self {
            out.insert(v.clone());
        }
        for c in self.children() {
            c.collect_vars(out);
        }
    }

    /// The kind of the term, checking operator signatures on the way.
    pub fn kind(&self) -> Result<KindName, AlgebraError> {
        match self {
            NetTerm::Var(v) => Ok(v.kind.clone()),
            NetTerm::Const(n) => Ok(n.kind_name().clone()),
            NetTerm::Parallel(a, b) | NetTerm::Xor { left: a, right: b, .. } => {
                let ka = a.kind()?;
                let kb = b.kind()?;
                if ka != kb {
                    return Err(AlgebraError::KindMismatch {
                        expected: ka,
                        found: kb,
                    });
                }
                Ok(ka)
            }
            NetTerm::UpdateRate { net, .. } | NetTerm::FixChoice { net, .. } => net.kind(),
            NetTerm::Custom { op, args } => {
                if args.len() != op.arg_kinds.len() {
                    return Err(AlgebraError::Arity {
                        op: op.name.clone(),
                        expected: op.arg_kinds.len(),
                        found: args.len(),
                    });
                }
                for (arg, expected) in args.iter().zip(&op.arg_kinds) {
                    let found = arg.kind()?;
                    if &found != expected {
                        return Err(AlgebraError::KindMismatch {
                            expected: expected.clone(),
                            found,
                        });
                    }
                }
                Ok(op.result_kind.clone())
            }
        }
    }

    /// Evaluates the term under `alpha`.
    pub fn eval(&self, alpha: &Binding) -> Result<NetRef, AlgebraError> {
        match self {
            NetTerm::Var(v) => {
                let net = alpha
                    .get(&v.name)
                    .ok_or_else(|| AlgebraError::UnboundVariable(v.name.clone()))?;
                if net.kind_name() != &v.kind {
                    return Err(AlgebraError::KindMismatch {
                        expected: v.kind.clone(),
                        found: net.kind_name().clone(),
                    });
                }
                Ok(net.clone())
            }
            NetTerm::Const(n) => Ok(n.clone()),
            NetTerm::Parallel(a, b) => Ok(Arc::new(ops::parallel(&*a.eval(alpha)?, &*b.eval(alpha)?)?)),
            NetTerm::Xor {
                left,
                right,
                left_rate,
                right_rate,
            } => Ok(Arc::new(ops::xor(
                &*left.eval(alpha)?,
                &*right.eval(alpha)?,
                left_rate,
                right_rate,
            )?)),
            NetTerm::UpdateRate { net, transition, delta } => {
                Ok(Arc::new(ops::update_rate(&*net.eval(alpha)?, transition, delta)?))
            }
            NetTerm::FixChoice { net, keep } => Ok(Arc::new(ops::fix_choice(&*net.eval(alpha)?, keep)?)),
            NetTerm::Custom { op, args } => {
                self.kind()?;
                let values = args.iter().map(|a| a.eval(alpha)).collect::<Result<Vec<_>, _>>()?;
                let out = (op.semantics)(&values)?;
                if out.kind_name() != &op.result_kind {
                    return Err(AlgebraError::KindMismatch {
                        expected: op.result_kind.clone(),
                        found: out.kind_name().clone(),
                    });
                }
                Ok(Arc::new(out))
            }
        }
    }

    /// Prints the term, naming constants through `name_of`.
    pub fn render(&self, name_of: &dyn Fn(&NetRef) -> String) -> String {
        match self {
            NetTerm::Var(v) => v.name.to_string(),
            NetTerm::Const(n) => name_of(n),
            NetTerm::Parallel(a, b) => format!("({} || {})", a.render(name_of), b.render(name_of)),
            NetTerm::Xor {
                left,
                right,
                left_rate,
                right_rate,
            } => format!(
                "({} XOR[{left_rate},{right_rate}] {})",
                left.render(name_of),
                right.render(name_of)
            ),
            NetTerm::UpdateRate { net, transition, delta } => format!(
                "updRate({}, {transition}, {})",
                net.render(name_of),
                format_rational(delta)
            ),
            NetTerm::FixChoice { net, keep } => format!("fixChoice({}, {keep})", net.render(name_of)),
            NetTerm::Custom { op, args } => {
                let args: Vec<String> = args.iter().map(|a| a.render(name_of)).collect();
                format!("{}({})", op.name, args.join(", "))
            }
        }
    }

    /// Structural encoding with constants by digest.
    pub fn canonical_encoding(&self) -> String {
        match self {
            NetTerm::Const(n) => format!("#{}", n.digest_hex()),
            _ => self.render(&|n| format!("#{}", n.digest_hex())),
        }
    }
}

impl fmt::Display for NetTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&|n| n.display().to_string()))
    }
}

/// A variable assignment `α`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Binding(BTreeMap<VarName, NetRef>);

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: impl Into<VarName>, net: NetRef) -> Self {
        self.0.insert(var.into(), net);
        self
    }

    pub fn insert(&mut self, var: VarName, net: NetRef) {
        self.0.insert(var, net);
    }

    pub fn get(&self, var: &VarName) -> Option<&NetRef> {
        self.0.get(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarName, &NetRef)> + '_ {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Binding {
    /// `{x->N1, y->N2}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, n)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}->{}", n.display())?;
        }
        f.write_str("}")
    }
}
