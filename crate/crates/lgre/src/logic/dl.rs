//! Variable-free (description-logic style) formulas.
//!
//! Formulas are hash-consed DAGs: structurally equal subformulas share one
//! node, so `==` on `DlFormula` is pointer equality and is sound. The
//! intern table lives for the whole process; formulas are never freed.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

/// A node of a DL formula. Obtain nodes via [`DlFormula::node`].
#[derive(Debug)]
pub enum DlNode {
    Top,
    /// A unary relation name.
    Atom(String),
    Not(DlFormula),
    And(DlFormula, DlFormula),
    /// `Exists(r, body)`: some `r`-successor satisfies `body`.
    Exists(String, DlFormula),
}

/// A hash-consed DL formula. Cloning is cheap; equality is node identity,
/// which coincides with structural equality.
#[derive(Clone)]
pub struct DlFormula(Arc<DlNode>);

/// Intern key: children are identified by their (canonical) node address.
#[derive(PartialEq, Eq, Hash)]
enum Key {
    Top,
    Atom(String),
    Not(usize),
    And(usize, usize),
    Exists(String, usize),
}

fn intern(key: Key, make: impl FnOnce() -> DlNode) -> DlFormula {
    static TABLE: OnceLock<Mutex<HashMap<Key, DlFormula>>> = OnceLock::new();
    let mut table = TABLE
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|poison| poison.into_inner());
    table
        .entry(key)
        .or_insert_with(|| DlFormula(Arc::new(make())))
        .clone()
}

impl DlFormula {
    pub fn top() -> Self {
        intern(Key::Top, || DlNode::Top)
    }

    pub fn atom(name: impl Into<String>) -> Self {
        let name = name.into();
        intern(Key::Atom(name.clone()), || DlNode::Atom(name))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: DlFormula) -> Self {
        intern(Key::Not(inner.addr()), || DlNode::Not(inner))
    }

    pub fn and(lhs: DlFormula, rhs: DlFormula) -> Self {
        intern(Key::And(lhs.addr(), rhs.addr()), || DlNode::And(lhs, rhs))
    }

    pub fn exists(relation: impl Into<String>, body: DlFormula) -> Self {
        let relation = relation.into();
        intern(Key::Exists(relation.clone(), body.addr()), || {
            DlNode::Exists(relation, body)
        })
    }

    /// Left-folded conjunction; the empty conjunction is `T` and a
    /// singleton is the formula itself. No simplification is performed.
    pub fn and_all(conjuncts: impl IntoIterator<Item = DlFormula>) -> Self {
        let mut it = conjuncts.into_iter();
        match it.next() {
            None => DlFormula::top(),
            Some(first) => it.fold(first, DlFormula::and),
        }
    }

    pub fn node(&self) -> &DlNode {
        &self.0
    }

    /// Stable node address; usable as a memo key because interned nodes are
    /// never freed.
    pub(crate) fn addr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    /// The conjuncts along the left spine, in rendering order. A formula
    /// that is not an `And` is its own single conjunct.
    pub fn conjuncts(&self) -> Vec<DlFormula> {
        let mut spine = Vec::new();
        let mut cur = self.clone();
        while let DlNode::And(lhs, rhs) = cur.node() {
            spine.push(rhs.clone());
            cur = lhs.clone();
        }
        spine.push(cur);
        spine.reverse();
        spine
    }

    pub fn has_conjunct(&self, phi: &DlFormula) -> bool {
        self.conjuncts().iter().any(|c| c == phi)
    }

    /// Number of distinct nodes in the DAG.
    pub fn dag_size(&self) -> usize {
        let mut seen = HashMap::new();
        let mut stack = vec![self.clone()];
        while let Some(f) = stack.pop() {
            if seen.insert(f.addr(), ()).is_some() {
                continue;
            }
            match f.node() {
                DlNode::Top | DlNode::Atom(_) => {}
                DlNode::Not(i) | DlNode::Exists(_, i) => stack.push(i.clone()),
                DlNode::And(l, r) => {
                    stack.push(l.clone());
                    stack.push(r.clone());
                }
            }
        }
        seen.len()
    }

    /// Node count of the fully expanded syntax tree, computed arithmetically
    /// over the DAG (saturating; the count is exponential in the worst case).
    pub fn tree_size(&self) -> u128 {
        fn go(f: &DlFormula, memo: &mut HashMap<usize, u128>) -> u128 {
            if let Some(&v) = memo.get(&f.addr()) {
                return v;
            }
            let v = match f.node() {
                DlNode::Top | DlNode::Atom(_) => 1,
                DlNode::Not(i) | DlNode::Exists(_, i) => 1u128.saturating_add(go(i, memo)),
                DlNode::And(l, r) => 1u128
                    .saturating_add(go(l, memo))
                    .saturating_add(go(r, memo)),
            };
            memo.insert(f.addr(), v);
            v
        }
        go(self, &mut HashMap::new())
    }
}

impl PartialEq for DlFormula {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for DlFormula {}

impl Hash for DlFormula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.addr().hash(state);
    }
}

impl fmt::Debug for DlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

// Rendering. The canonical form is parseable back to the identical DAG:
// `&` is left-associative, `!` binds tightest, and `some r .` extends as
// far right as possible. A conjunct other than the last must therefore be
// parenthesized when its rendering would swallow the rest of the line.

/// True if the rendering of `phi` ends in an open quantifier body.
fn extends_right(phi: &DlFormula) -> bool {
    match phi.node() {
        DlNode::Exists(..) => true,
        DlNode::Not(inner) => extends_right(inner),
        _ => false,
    }
}

fn write_conj(phi: &DlFormula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let conjuncts = phi.conjuncts();
    let last = conjuncts.len() - 1;
    for (i, c) in conjuncts.iter().enumerate() {
        if i > 0 {
            out.write_str(" & ")?;
        }
        let needs_parens =
            matches!(c.node(), DlNode::And(..)) || (i < last && extends_right(c));
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

fn write_unary(phi: &DlFormula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match phi.node() {
        DlNode::Top => out.write_str("T"),
        DlNode::Atom(name) => out.write_str(name),
        DlNode::Not(inner) => {
            out.write_str("!")?;
            if matches!(inner.node(), DlNode::And(..)) {
                out.write_str("(")?;
                write_conj(inner, out)?;
                out.write_str(")")
            } else {
                write_unary(inner, out)
            }
        }
        DlNode::Exists(relation, body) => {
            write!(out, "some {relation} . ")?;
            write_conj(body, out)
        }
        DlNode::And(..) => {
            // Unreachable from write_conj, which parenthesizes And elements.
            out.write_str("(")?;
            write_conj(phi, out)?;
            out.write_str(")")
        }
    }
}

impl fmt::Display for DlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_conj(self, f)
    }
}
