//! Standard translation from the DL layer to the FO layer.

use super::dl::{DlFormula, DlNode};
use super::fo::{FoFormula, Var};

/// Translates `phi` into first-order logic with free variable `x{start}`.
///
/// The five clauses are the usual ones; `some r . body` becomes
/// `ex xj . r(xi, xj) & st(body)` with `xj` fresh. Fresh indices are
/// threaded left to right through the whole formula, so no index is bound
/// twice even when conjuncts each introduce quantifiers. Because each
/// occurrence of a shared subformula needs its own bound variables, the
/// translation walks the syntax tree, not the DAG.
pub fn st_translation(phi: &DlFormula, start: u32) -> FoFormula {
    let mut next = start + 1;
    go(phi, start, &mut next)
}

fn go(phi: &DlFormula, current: u32, next: &mut u32) -> FoFormula {
    match phi.node() {
        DlNode::Top => FoFormula::top(),
        DlNode::Atom(name) => FoFormula::rel_atom(name.clone(), [Var::new(current)]),
        DlNode::Not(inner) => FoFormula::not(go(inner, current, next)),
        DlNode::And(lhs, rhs) => {
            let lhs = go(lhs, current, next);
            let rhs = go(rhs, current, next);
            FoFormula::and(lhs, rhs)
        }
        DlNode::Exists(relation, body) => {
            let fresh = Var::new(*next);
            *next += 1;
            let edge = FoFormula::rel_atom(relation.clone(), [Var::new(current), fresh]);
            let body = go(body, fresh.index(), next);
            FoFormula::exists(fresh, FoFormula::and(edge, body))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{eval_dl, eval_fo, parse_dl, parse_fo};
    use crate::model::RelationalModel;

    #[test]
    fn st_clause_examples() {
        let phi = parse_dl("some sniffs . dog").unwrap();
        let expected = parse_fo("ex x2 . sniffs(x1,x2) & dog(x2)").unwrap();
        assert_eq!(st_translation(&phi, 1), expected);

        assert_eq!(st_translation(&DlFormula::top(), 1), FoFormula::top());
        assert_eq!(st_translation(&DlFormula::top(), 7), FoFormula::top());

        let neg = parse_dl("!dog").unwrap();
        assert_eq!(st_translation(&neg, 1), parse_fo("!dog(x1)").unwrap());
    }

    #[test]
    fn fresh_variables_thread_across_conjuncts() {
        // Both conjuncts quantify; the second must not reuse x2.
        let phi = parse_dl("(some sniffs . T) & some sniffs . dog").unwrap();
        let expected =
            parse_fo("(ex x2 . sniffs(x1,x2) & T) & ex x3 . sniffs(x1,x3) & dog(x3)").unwrap();
        assert_eq!(st_translation(&phi, 1), expected);

        let free = st_translation(&phi, 1).free_vars();
        assert_eq!(free, [Var::new(1)].into());
    }

    #[test]
    fn start_index_offsets_everything() {
        let phi = parse_dl("some sniffs . cat").unwrap();
        let expected = parse_fo("ex x4 . sniffs(x3,x4) & cat(x4)").unwrap();
        assert_eq!(st_translation(&phi, 3), expected);
    }

    #[test]
    fn translation_preserves_extensions() {
        let m =
            RelationalModel::from_text(include_str!("../../tests/data/scene-s.lgre")).unwrap();
        for text in [
            "T",
            "dog",
            "dog & small & some sniffs . dog",
            "!(cat & small)",
            "some sniffs . some sniffs . dog",
            "(some sniffs . cat) & !small",
            "!some sniffs . !dog",
        ] {
            let phi = parse_dl(text).unwrap();
            let direct = eval_dl(&phi, &m).unwrap();
            let translated: Vec<_> = eval_fo(&st_translation(&phi, 1), &m, 1)
                .unwrap()
                .into_iter()
                .map(|mut t| t.remove(0))
                .collect();
            assert_eq!(direct.into_iter().collect::<Vec<_>>(), translated, "{text}");
        }
    }
}
