//! Extension evaluation.
//!
//! DL formulas evaluate to element sets, memoized per DAG node so shared
//! subformulas cost one pass regardless of tree size. FO formulas evaluate
//! to n-tuple sets by the textbook extension table: `T` is the full n-ary
//! product, negation complements it, conjunction intersects, and `ex`
//! evaluates its body at arity n+1 and projects. Bound variables are
//! resolved to tuple positions; the AST is never rewritten.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use thiserror::Error;

use super::dl::{DlFormula, DlNode};
use super::fo::{FoFormula, FoNode, Var};
use crate::model::{ElementId, RelationalModel};

/// The extension of an FO formula at some arity.
pub type TupleSet = BTreeSet<Vec<ElementId>>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("no {} relation `{name}` in the model", arity_word(*arity))]
    UndeclaredRelation { name: String, arity: usize },
    #[error("free variable x{index} exceeds the evaluation arity {arity}")]
    FreeVariable { index: u32, arity: u32 },
}

fn arity_word(arity: usize) -> String {
    match arity {
        1 => "unary".into(),
        2 => "binary".into(),
        n => format!("{n}-ary"),
    }
}

/// Evaluates DL formulas against one model, caching per-node extensions.
/// Reuse one evaluator when querying many formulas that share structure.
pub struct DlEvaluator<'m> {
    model: &'m RelationalModel,
    all: Arc<BTreeSet<ElementId>>,
    memo: HashMap<usize, Arc<BTreeSet<ElementId>>>,
}

impl<'m> DlEvaluator<'m> {
    pub fn new(model: &'m RelationalModel) -> Self {
        DlEvaluator {
            model,
            all: Arc::new(model.domain().cloned().collect()),
            memo: HashMap::new(),
        }
    }

    pub fn eval(&mut self, phi: &DlFormula) -> Result<Arc<BTreeSet<ElementId>>, EvalError> {
        if let Some(cached) = self.memo.get(&phi.addr()) {
            return Ok(cached.clone());
        }
        let result: Arc<BTreeSet<ElementId>> = match phi.node() {
            DlNode::Top => self.all.clone(),
            DlNode::Atom(name) => Arc::new(
                self.model
                    .unary_members(name)
                    .ok_or_else(|| EvalError::UndeclaredRelation {
                        name: name.clone(),
                        arity: 1,
                    })?
                    .clone(),
            ),
            DlNode::Not(inner) => {
                let inner = self.eval(inner)?;
                Arc::new(self.all.difference(&inner).cloned().collect())
            }
            DlNode::And(lhs, rhs) => {
                let lhs = self.eval(lhs)?;
                let rhs = self.eval(rhs)?;
                Arc::new(lhs.intersection(&rhs).cloned().collect())
            }
            DlNode::Exists(relation, body) => {
                if !self.model.has_binary(relation) {
                    return Err(EvalError::UndeclaredRelation {
                        name: relation.clone(),
                        arity: 2,
                    });
                }
                let body = self.eval(body)?;
                let mut holds = BTreeSet::new();
                for witness in body.iter() {
                    holds.extend(
                        self.model
                            .predecessors(witness.as_str(), relation)
                            .cloned(),
                    );
                }
                Arc::new(holds)
            }
        };
        self.memo.insert(phi.addr(), result.clone());
        Ok(result)
    }
}

/// One-shot DL evaluation; see [`DlEvaluator`] for amortized use.
pub fn eval_dl(
    phi: &DlFormula,
    model: &RelationalModel,
) -> Result<BTreeSet<ElementId>, EvalError> {
    DlEvaluator::new(model).eval(phi).map(|s| (*s).clone())
}

/// Evaluates an FO formula to its n-ary extension. Free variables `xi`
/// refer to tuple position i and must satisfy i <= arity.
pub fn eval_fo(
    phi: &FoFormula,
    model: &RelationalModel,
    arity: u32,
) -> Result<TupleSet, EvalError> {
    let mut subst = BTreeMap::new();
    go(phi, model, arity, &mut subst)
}

/// `subst` maps bound variable indices to tuple positions; free variables
/// resolve to their own index.
fn go(
    phi: &FoFormula,
    model: &RelationalModel,
    n: u32,
    subst: &mut BTreeMap<u32, u32>,
) -> Result<TupleSet, EvalError> {
    let pos = |v: Var, subst: &BTreeMap<u32, u32>| -> Result<usize, EvalError> {
        let p = match subst.get(&v.index()) {
            Some(&p) => p,
            None if v.index() <= n => v.index(),
            None => {
                return Err(EvalError::FreeVariable {
                    index: v.index(),
                    arity: n,
                })
            }
        };
        Ok((p - 1) as usize)
    };

    match phi.node() {
        FoNode::Top => Ok(all_tuples(model, n)),
        FoNode::Neq(a, b) => {
            let (pa, pb) = (pos(*a, subst)?, pos(*b, subst)?);
            Ok(all_tuples(model, n)
                .into_iter()
                .filter(|t| t[pa] != t[pb])
                .collect())
        }
        FoNode::RelAtom(name, vars) => match vars.as_slice() {
            [v] if model.has_unary(name) => {
                let p = pos(*v, subst)?;
                let members = model.unary_members(name).expect("checked");
                Ok(all_tuples(model, n)
                    .into_iter()
                    .filter(|t| members.contains(&t[p]))
                    .collect())
            }
            [v, w] if model.has_binary(name) => {
                let (pv, pw) = (pos(*v, subst)?, pos(*w, subst)?);
                Ok(all_tuples(model, n)
                    .into_iter()
                    .filter(|t| model.binary_holds(name, t[pv].as_str(), t[pw].as_str()))
                    .collect())
            }
            _ => Err(EvalError::UndeclaredRelation {
                name: name.clone(),
                arity: vars.len(),
            }),
        },
        FoNode::Not(inner) => {
            let inner = go(inner, model, n, subst)?;
            Ok(all_tuples(model, n)
                .into_iter()
                .filter(|t| !inner.contains(t))
                .collect())
        }
        FoNode::And(lhs, rhs) => {
            let lhs = go(lhs, model, n, subst)?;
            let rhs = go(rhs, model, n, subst)?;
            Ok(lhs.intersection(&rhs).cloned().collect())
        }
        FoNode::Exists(var, body) => {
            let saved = subst.insert(var.index(), n + 1);
            let extended = go(body, model, n + 1, subst);
            match saved {
                Some(old) => subst.insert(var.index(), old),
                None => subst.remove(&var.index()),
            };
            Ok(extended?
                .into_iter()
                .map(|mut t| {
                    t.truncate(n as usize);
                    t
                })
                .collect())
        }
    }
}

/// The full n-ary product of the domain.
fn all_tuples(model: &RelationalModel, n: u32) -> TupleSet {
    let mut tuples: Vec<Vec<ElementId>> = vec![Vec::new()];
    for _ in 0..n {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                model.domain().map(move |e| {
                    let mut next = t.clone();
                    next.push(e.clone());
                    next
                })
            })
            .collect();
    }
    tuples.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene() -> RelationalModel {
        RelationalModel::from_text(include_str!("../../tests/data/scene-s.lgre")).unwrap()
    }

    fn names(set: &BTreeSet<ElementId>) -> Vec<&str> {
        set.iter().map(|e| e.as_str()).collect()
    }

    fn x(i: u32) -> Var {
        Var::new(i)
    }

    #[test]
    fn dl_examples_on_the_scene() {
        let m = scene();
        let concept = super::super::parse_dl("dog & small & some sniffs . dog").unwrap();
        assert_eq!(names(&eval_dl(&concept, &m).unwrap()), ["b"]);

        let top = DlFormula::top();
        assert_eq!(names(&eval_dl(&top, &m).unwrap()), ["a", "b", "c", "d", "e"]);

        let cat_small = super::super::parse_dl("cat & small").unwrap();
        assert_eq!(names(&eval_dl(&cat_small, &m).unwrap()), ["c"]);

        let neg = super::super::parse_dl("dog & !small").unwrap();
        assert_eq!(names(&eval_dl(&neg, &m).unwrap()), ["a"]);
    }

    #[test]
    fn dl_undeclared_names_error() {
        let m = scene();
        assert_eq!(
            eval_dl(&DlFormula::atom("bird"), &m).unwrap_err(),
            EvalError::UndeclaredRelation {
                name: "bird".into(),
                arity: 1
            }
        );
        assert!(matches!(
            eval_dl(&DlFormula::exists("chases", DlFormula::top()), &m).unwrap_err(),
            EvalError::UndeclaredRelation { arity: 2, .. }
        ));
    }

    #[test]
    fn dl_memoization_handles_exponential_trees() {
        // Stage k of the doubling chain holds at i iff an ascending chain of
        // k edges starts at i, so each stage drops the largest survivor.
        let m = RelationalModel::linear_order_model(6).unwrap();
        let mut f = DlFormula::top();
        for _ in 0..3 {
            f = DlFormula::and(f.clone(), DlFormula::exists("r", f.clone()));
        }
        assert_eq!(names(&eval_dl(&f, &m).unwrap()), ["1", "2", "3"]);

        // Fifty stages have a 2^50-node tree; only memoization makes this
        // terminate promptly. The extension is long since empty.
        for _ in 3..50 {
            f = DlFormula::and(f.clone(), DlFormula::exists("r", f.clone()));
        }
        assert!(eval_dl(&f, &m).unwrap().is_empty());
    }

    #[test]
    fn fo_table_1_examples() {
        let m = scene();
        let another_dog = FoFormula::and(
            FoFormula::rel_atom("dog", [x(1)]),
            FoFormula::exists(
                x(2),
                FoFormula::and_all([
                    FoFormula::neq(x(1), x(2)),
                    FoFormula::rel_atom("dog", [x(2)]),
                    FoFormula::rel_atom("sniffs", [x(1), x(2)]),
                ]),
            ),
        );
        let ext = eval_fo(&another_dog, &m, 1).unwrap();
        assert_eq!(ext, TupleSet::from([vec![ElementId::new("b")]]));

        let sniffed_by_small_cat = FoFormula::and(
            FoFormula::rel_atom("dog", [x(1)]),
            FoFormula::exists(
                x(2),
                FoFormula::and_all([
                    FoFormula::rel_atom("cat", [x(2)]),
                    FoFormula::rel_atom("small", [x(2)]),
                    FoFormula::rel_atom("sniffs", [x(2), x(1)]),
                ]),
            ),
        );
        let ext = eval_fo(&sniffed_by_small_cat, &m, 1).unwrap();
        assert_eq!(ext, TupleSet::from([vec![ElementId::new("b")]]));
    }

    #[test]
    fn fo_neq_is_off_diagonal() {
        let m = scene();
        let ext = eval_fo(&FoFormula::neq(x(1), x(2)), &m, 2).unwrap();
        assert_eq!(ext.len(), 5 * 5 - 5);
        assert!(!ext.contains(&vec![ElementId::new("a"), ElementId::new("a")]));
    }

    #[test]
    fn fo_exists_projects() {
        let m = scene();
        let phi = FoFormula::exists(
            x(2),
            FoFormula::and(
                FoFormula::rel_atom("sniffs", [x(1), x(2)]),
                FoFormula::rel_atom("cat", [x(2)]),
            ),
        );
        let ext = eval_fo(&phi, &m, 1).unwrap();
        assert_eq!(ext, TupleSet::from([vec![ElementId::new("d")]]));
    }

    #[test]
    fn fo_semantics_laws_spot_check() {
        let m = scene();
        let phi = FoFormula::rel_atom("dog", [x(1)]);
        let all = eval_fo(&FoFormula::top(), &m, 1).unwrap();
        let pos = eval_fo(&phi, &m, 1).unwrap();
        let neg = eval_fo(&FoFormula::not(phi.clone()), &m, 1).unwrap();
        assert_eq!(pos.union(&neg).count(), all.len());
        assert!(pos.intersection(&neg).next().is_none());

        let psi = FoFormula::rel_atom("small", [x(1)]);
        let both = eval_fo(&FoFormula::and(phi.clone(), psi.clone()), &m, 1).unwrap();
        let expect: TupleSet = eval_fo(&phi, &m, 1)
            .unwrap()
            .intersection(&eval_fo(&psi, &m, 1).unwrap())
            .cloned()
            .collect();
        assert_eq!(both, expect);
    }

    #[test]
    fn fo_errors() {
        let m = scene();
        assert_eq!(
            eval_fo(&FoFormula::rel_atom("dog", [x(2)]), &m, 1).unwrap_err(),
            EvalError::FreeVariable { index: 2, arity: 1 }
        );
        assert!(matches!(
            eval_fo(&FoFormula::rel_atom("sniffs", [x(1)]), &m, 1).unwrap_err(),
            EvalError::UndeclaredRelation { arity: 1, .. }
        ));
        // Positions are resolved before any filtering, so the error shows
        // even when the relation is empty elsewhere in the formula.
        let phi = FoFormula::and(
            FoFormula::rel_atom("dog", [x(1)]),
            FoFormula::neq(x(1), x(3)),
        );
        assert!(eval_fo(&phi, &m, 1).is_err());
    }
}
