//! First-order formulas over variables `x1, x2, ...`.
//!
//! Same representation discipline as the DL layer: hash-consed DAG nodes,
//! pointer equality, process-lifetime intern table. Formulas produced by
//! this crate follow the convention that bound variable indices increase
//! left to right and no index is bound twice; evaluation does not depend
//! on it.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

/// A variable `x{index}`; indices start at 1.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// Panics if `index` is zero; variables are numbered from `x1`.
    pub fn new(index: u32) -> Self {
        assert!(index >= 1, "variable indices start at 1");
        Var(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A node of an FO formula. Obtain nodes via [`FoFormula::node`].
#[derive(Debug)]
pub enum FoNode {
    Top,
    /// `xᵢ != xⱼ`.
    Neq(Var, Var),
    /// A relation applied to variables, e.g. `dog(x1)` or `sniffs(x1,x2)`.
    RelAtom(String, Vec<Var>),
    Not(FoFormula),
    And(FoFormula, FoFormula),
    /// `Exists(v, body)`: `ex v . body`.
    Exists(Var, FoFormula),
}

/// A hash-consed FO formula; `==` is node identity.
#[derive(Clone)]
pub struct FoFormula(Arc<FoNode>);

#[derive(PartialEq, Eq, Hash)]
enum Key {
    Top,
    Neq(u32, u32),
    RelAtom(String, Vec<u32>),
    Not(usize),
    And(usize, usize),
    Exists(u32, usize),
}

fn intern(key: Key, make: impl FnOnce() -> FoNode) -> FoFormula {
    static TABLE: OnceLock<Mutex<HashMap<Key, FoFormula>>> = OnceLock::new();
    let mut table = TABLE
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|poison| poison.into_inner());
    table
        .entry(key)
        .or_insert_with(|| FoFormula(Arc::new(make())))
        .clone()
}

impl FoFormula {
    pub fn top() -> Self {
        intern(Key::Top, || FoNode::Top)
    }

    pub fn neq(lhs: Var, rhs: Var) -> Self {
        intern(Key::Neq(lhs.index(), rhs.index()), || FoNode::Neq(lhs, rhs))
    }

    pub fn rel_atom(name: impl Into<String>, vars: impl Into<Vec<Var>>) -> Self {
        let (name, vars) = (name.into(), vars.into());
        let key = Key::RelAtom(name.clone(), vars.iter().map(|v| v.index()).collect());
        intern(key, || FoNode::RelAtom(name, vars))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: FoFormula) -> Self {
        intern(Key::Not(inner.addr()), || FoNode::Not(inner))
    }

    pub fn and(lhs: FoFormula, rhs: FoFormula) -> Self {
        intern(Key::And(lhs.addr(), rhs.addr()), || FoNode::And(lhs, rhs))
    }

    pub fn exists(var: Var, body: FoFormula) -> Self {
        intern(Key::Exists(var.index(), body.addr()), || {
            FoNode::Exists(var, body)
        })
    }

    /// Left-folded conjunction; empty is `T`, a singleton is itself.
    pub fn and_all(conjuncts: impl IntoIterator<Item = FoFormula>) -> Self {
        let mut it = conjuncts.into_iter();
        match it.next() {
            None => FoFormula::top(),
            Some(first) => it.fold(first, FoFormula::and),
        }
    }

    pub fn node(&self) -> &FoNode {
        &self.0
    }

    pub(crate) fn addr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    /// Variables occurring free, i.e. not below an `Exists` binding them.
    pub fn free_vars(&self) -> std::collections::BTreeSet<Var> {
        fn go(
            phi: &FoFormula,
            bound: &mut Vec<Var>,
            acc: &mut std::collections::BTreeSet<Var>,
        ) {
            match phi.node() {
                FoNode::Top => {}
                FoNode::Neq(a, b) => {
                    for v in [a, b] {
                        if !bound.contains(v) {
                            acc.insert(*v);
                        }
                    }
                }
                FoNode::RelAtom(_, vars) => {
                    for v in vars {
                        if !bound.contains(v) {
                            acc.insert(*v);
                        }
                    }
                }
                FoNode::Not(i) => go(i, bound, acc),
                FoNode::And(l, r) => {
                    go(l, bound, acc);
                    go(r, bound, acc);
                }
                FoNode::Exists(v, body) => {
                    bound.push(*v);
                    go(body, bound, acc);
                    bound.pop();
                }
            }
        }
        let mut acc = std::collections::BTreeSet::new();
        go(self, &mut Vec::new(), &mut acc);
        acc
    }

    pub fn dag_size(&self) -> usize {
        let mut seen = HashMap::new();
        let mut stack = vec![self.clone()];
        while let Some(f) = stack.pop() {
            if seen.insert(f.addr(), ()).is_some() {
                continue;
            }
            match f.node() {
                FoNode::Top | FoNode::Neq(..) | FoNode::RelAtom(..) => {}
                FoNode::Not(i) | FoNode::Exists(_, i) => stack.push(i.clone()),
                FoNode::And(l, r) => {
                    stack.push(l.clone());
                    stack.push(r.clone());
                }
            }
        }
        seen.len()
    }

    pub fn tree_size(&self) -> u128 {
        fn go(f: &FoFormula, memo: &mut HashMap<usize, u128>) -> u128 {
            if let Some(&v) = memo.get(&f.addr()) {
                return v;
            }
            let v = match f.node() {
                FoNode::Top | FoNode::Neq(..) | FoNode::RelAtom(..) => 1,
                FoNode::Not(i) | FoNode::Exists(_, i) => 1u128.saturating_add(go(i, memo)),
                FoNode::And(l, r) => 1u128
                    .saturating_add(go(l, memo))
                    .saturating_add(go(r, memo)),
            };
            memo.insert(f.addr(), v);
            v
        }
        go(self, &mut HashMap::new())
    }

    /// The conjuncts along the left spine, in rendering order.
    pub fn conjuncts(&self) -> Vec<FoFormula> {
        let mut spine = Vec::new();
        let mut cur = self.clone();
        while let FoNode::And(lhs, rhs) = cur.node() {
            spine.push(rhs.clone());
            cur = lhs.clone();
        }
        spine.push(cur);
        spine.reverse();
        spine
    }
}

impl PartialEq for FoFormula {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for FoFormula {}

impl Hash for FoFormula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.addr().hash(state);
    }
}

impl fmt::Debug for FoFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

// Rendering mirrors the DL layer: `&` left-associative, `!` tightest,
// `ex v .` extends maximally right, so a non-final conjunct whose rendering
// ends in a quantifier body gets parenthesized.

fn extends_right(phi: &FoFormula) -> bool {
    match phi.node() {
        FoNode::Exists(..) => true,
        FoNode::Not(inner) => extends_right(inner),
        _ => false,
    }
}

fn write_conj(phi: &FoFormula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let conjuncts = phi.conjuncts();
    let last = conjuncts.len() - 1;
    for (i, c) in conjuncts.iter().enumerate() {
        if i > 0 {
            out.write_str(" & ")?;
        }
        let needs_parens =
            matches!(c.node(), FoNode::And(..)) || (i < last && extends_right(c));
        if needs_parens {
            out.write_str("(")?;
            write_conj(c, out)?;
            out.write_str(")")?;
        } else {
            write_unary(c, out)?;
        }
    }
    Ok(())
}

fn write_unary(phi: &FoFormula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match phi.node() {
        FoNode::Top => out.write_str("T"),
        FoNode::Neq(a, b) => write!(out, "{a} != {b}"),
        FoNode::RelAtom(name, vars) => {
            write!(out, "{name}(")?;
            for (i, v) in vars.iter().enumerate() {
                if i > 0 {
                    out.write_str(",")?;
                }
                write!(out, "{v}")?;
            }
            out.write_str(")")
        }
        FoNode::Not(inner) => {
            out.write_str("!")?;
            if matches!(inner.node(), FoNode::And(..)) {
                out.write_str("(")?;
                write_conj(inner, out)?;
                out.write_str(")")
            } else {
                write_unary(inner, out)
            }
        }
        FoNode::Exists(var, body) => {
            write!(out, "ex {var} . ")?;
            write_conj(body, out)
        }
        FoNode::And(..) => {
            out.write_str("(")?;
            write_conj(phi, out)?;
            out.write_str(")")
        }
    }
}

impl fmt::Display for FoFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_conj(self, f)
    }
}
