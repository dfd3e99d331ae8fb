//! Formula representation and semantics: two hash-consed layers (a
//! variable-free DL layer and an FO layer), parsing, printing, fragment
//! checks, the standard translation between them, and extension
//! evaluation against relational models.

mod dl;
mod eval;
mod fo;
mod parse;
mod translate;

pub use dl::{DlFormula, DlNode};
pub use eval::{eval_dl, eval_fo, DlEvaluator, EvalError, TupleSet};
pub use fo::{FoFormula, FoNode, Var};
pub use parse::{parse_dl, parse_fo, parse_formula, FormulaLayer, ParseFormulaError};
pub use translate::st_translation;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::model::{ElementId, RelationalModel};

/// The five target logics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Language {
    Fol,
    Epfol,
    Alc,
    El,
    Elan,
}

impl Language {
    pub const ALL: [Language; 5] = [
        Language::Fol,
        Language::Epfol,
        Language::Alc,
        Language::El,
        Language::Elan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Language::Fol => "fol",
            Language::Epfol => "epfol",
            Language::Alc => "alc",
            Language::El => "el",
            Language::Elan => "elan",
        }
    }

    /// The defining properties of this logic's simulations.
    pub fn properties(self) -> &'static [SimProperty] {
        use SimProperty::*;
        match self {
            Language::Fol => &[AtomLeft, AtomRight, Zig, Zag, InjLeft, InjRight],
            Language::Epfol => &[AtomLeft, Zig, InjLeft],
            Language::Alc => &[AtomLeft, AtomRight, Zig, Zag],
            Language::El => &[AtomLeft, Zig],
            Language::Elan => &[AtomLeft, AtomRight, Zig],
        }
    }

    /// Logics whose formulas live in the DL layer and whose simulator sets
    /// are computed by refinement (the others go through graph search or
    /// brute-force matching).
    pub fn is_dl(self) -> bool {
        matches!(self, Language::Alc | Language::El | Language::Elan)
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Language {
    type Err = UnknownLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Language::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownLanguage(s.to_string()))
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown logic `{0}` (expected one of fol, epfol, alc, el, elan)")]
pub struct UnknownLanguage(pub String);

/// Closure properties a relation between two models may satisfy; each logic
/// is characterized by a fixed subset of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SimProperty {
    /// Unary relations of the left element carry over to the right.
    AtomLeft,
    /// Unary relations of the right element carry back to the left.
    AtomRight,
    /// Left successors are matched by right successors.
    Zig,
    /// Right successors are matched by left successors.
    Zag,
    /// The relation is a total injective function on the left model.
    InjLeft,
    /// The inverse is a total injective function on the right model.
    InjRight,
}

impl fmt::Display for SimProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SimProperty::AtomLeft => "atom-L",
            SimProperty::AtomRight => "atom-R",
            SimProperty::Zig => "zig",
            SimProperty::Zag => "zag",
            SimProperty::InjLeft => "inj-L",
            SimProperty::InjRight => "inj-R",
        };
        f.write_str(s)
    }
}

/// A formula of either layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    Dl(DlFormula),
    Fo(FoFormula),
}

impl Formula {
    pub fn dag_size(&self) -> usize {
        match self {
            Formula::Dl(phi) => phi.dag_size(),
            Formula::Fo(phi) => phi.dag_size(),
        }
    }

    pub fn tree_size(&self) -> u128 {
        match self {
            Formula::Dl(phi) => phi.tree_size(),
            Formula::Fo(phi) => phi.tree_size(),
        }
    }

    /// The set of elements satisfying the formula: DL formulas directly,
    /// FO formulas at arity 1 (so `x1` must be the only free variable).
    pub fn extension(&self, model: &RelationalModel) -> Result<BTreeSet<ElementId>, EvalError> {
        match self {
            Formula::Dl(phi) => eval_dl(phi, model),
            Formula::Fo(phi) => {
                let tuples = eval_fo(phi, model, 1)?;
                Ok(tuples.into_iter().map(|mut t| t.remove(0)).collect())
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Dl(phi) => phi.fmt(f),
            Formula::Fo(phi) => phi.fmt(f),
        }
    }
}

impl From<DlFormula> for Formula {
    fn from(phi: DlFormula) -> Self {
        Formula::Dl(phi)
    }
}

impl From<FoFormula> for Formula {
    fn from(phi: FoFormula) -> Self {
        Formula::Fo(phi)
    }
}

/// Whether `phi` lies in the fragment generated for `lang`.
///
/// DL-layer formulas: EL forbids negation entirely, ELAN allows it only
/// directly on unary atoms, ALC allows anything; a DL formula counts as
/// EPFOL or FOL when its standard translation does. FO-layer formulas:
/// EPFOL forbids negation (inequality atoms are fine), FOL allows
/// anything; FO syntax never lies in the DL fragments.
pub fn in_fragment(phi: &Formula, lang: Language) -> bool {
    match (phi, lang) {
        (Formula::Dl(d), Language::El) => dl_negation_free(d),
        (Formula::Dl(d), Language::Elan) => dl_negates_only_atoms(d),
        (Formula::Dl(_), Language::Alc) => true,
        (Formula::Dl(d), Language::Epfol) => dl_negation_free(d),
        (Formula::Dl(_), Language::Fol) => true,
        (Formula::Fo(_), Language::El | Language::Elan | Language::Alc) => false,
        (Formula::Fo(f), Language::Epfol) => fo_negation_free(f),
        (Formula::Fo(_), Language::Fol) => true,
    }
}

// The fragment checks walk the DAG with a visited set: shared nodes are
// checked once, so heavily shared formulas stay cheap.

fn dl_check(phi: &DlFormula, ok: &impl Fn(&DlNode) -> bool) -> bool {
    fn go(phi: &DlFormula, ok: &impl Fn(&DlNode) -> bool, seen: &mut HashSet<usize>) -> bool {
        if !seen.insert(phi.addr()) {
            return true;
        }
        if !ok(phi.node()) {
            return false;
        }
        match phi.node() {
            DlNode::Top | DlNode::Atom(_) => true,
            DlNode::Not(i) | DlNode::Exists(_, i) => go(i, ok, seen),
            DlNode::And(l, r) => go(l, ok, seen) && go(r, ok, seen),
        }
    }
    go(phi, ok, &mut HashSet::new())
}

fn dl_negation_free(phi: &DlFormula) -> bool {
    dl_check(phi, &|n| !matches!(n, DlNode::Not(_)))
}

fn dl_negates_only_atoms(phi: &DlFormula) -> bool {
    dl_check(phi, &|n| match n {
        DlNode::Not(inner) => matches!(inner.node(), DlNode::Atom(_)),
        _ => true,
    })
}

fn fo_negation_free(phi: &FoFormula) -> bool {
    fn go(phi: &FoFormula, seen: &mut HashSet<usize>) -> bool {
        if !seen.insert(phi.addr()) {
            return true;
        }
        match phi.node() {
            FoNode::Not(_) => false,
            FoNode::Top | FoNode::Neq(..) | FoNode::RelAtom(..) => true,
            FoNode::Exists(_, i) => go(i, seen),
            FoNode::And(l, r) => go(l, seen) && go(r, seen),
        }
    }
    go(phi, &mut HashSet::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn property_sets_per_language() {
        use SimProperty::*;
        assert_eq!(Language::Fol.properties().len(), 6);
        assert_eq!(Language::Epfol.properties(), [AtomLeft, Zig, InjLeft]);
        assert_eq!(Language::Alc.properties(), [AtomLeft, AtomRight, Zig, Zag]);
        assert_eq!(Language::El.properties(), [AtomLeft, Zig]);
        assert_eq!(Language::Elan.properties(), [AtomLeft, AtomRight, Zig]);
    }

    #[test]
    fn language_round_trips_through_names() {
        for lang in Language::ALL {
            assert_eq!(lang.name().parse::<Language>().unwrap(), lang);
        }
        assert!("owl".parse::<Language>().is_err());
    }

    #[test]
    fn fragment_checks() {
        let dog = DlFormula::atom("dog");
        let el_ok = Formula::Dl(DlFormula::and(
            dog.clone(),
            DlFormula::exists("sniffs", DlFormula::top()),
        ));
        assert!(in_fragment(&el_ok, Language::El));
        assert!(in_fragment(&el_ok, Language::Elan));
        assert!(in_fragment(&el_ok, Language::Epfol));

        let neg_atom = Formula::Dl(DlFormula::not(DlFormula::atom("small")));
        assert!(!in_fragment(&neg_atom, Language::El));
        assert!(in_fragment(&neg_atom, Language::Elan));
        assert!(!in_fragment(&neg_atom, Language::Epfol));

        let neg_exists = Formula::Dl(DlFormula::not(DlFormula::exists(
            "sniffs",
            DlFormula::top(),
        )));
        assert!(!in_fragment(&neg_exists, Language::Elan));
        assert!(in_fragment(&neg_exists, Language::Alc));
        assert!(in_fragment(&neg_exists, Language::Fol));

        let x1 = Var::new(1);
        let fo_pos = Formula::Fo(FoFormula::and(
            FoFormula::rel_atom("dog", [x1]),
            FoFormula::neq(x1, Var::new(2)),
        ));
        assert!(in_fragment(&fo_pos, Language::Epfol));
        assert!(!in_fragment(&fo_pos, Language::El));

        let fo_neg = Formula::Fo(FoFormula::not(FoFormula::rel_atom("dog", [x1])));
        assert!(!in_fragment(&fo_neg, Language::Epfol));
        assert!(in_fragment(&fo_neg, Language::Fol));
    }

    #[test]
    fn fragment_check_handles_shared_dags() {
        // Doubling chain: exponential tree, linear DAG; must stay fast.
        let mut f = DlFormula::top();
        for _ in 0..60 {
            f = DlFormula::and(f.clone(), DlFormula::exists("r", f.clone()));
        }
        assert!(in_fragment(&Formula::Dl(f), Language::El));
    }
}
