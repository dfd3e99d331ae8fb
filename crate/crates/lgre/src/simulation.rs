//! Simulations between finite relational models.
//!
//! Each logic is characterized by a set of closure properties
//! ([`Language::properties`]). For EL, ELAN and ALC the maximal simulation
//! is computed by fixpoint refinement: start from the pairs allowed by the
//! atom clauses and repeatedly delete pairs whose zig (and, for ALC, zag)
//! obligations cannot be met. The injective logics have no known
//! polynomial algorithm, so EPFOL pairs are decided by backtracking search
//! for an injective homomorphism on the reachable substructure and FOL
//! pairs by isomorphism search, both behind a domain-size cap.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::logic::{Language, SimProperty};
use crate::model::{ElementId, RelationalModel};

/// Tuning knobs for simulation queries.
#[derive(Clone, Debug)]
pub struct SimOptions {
    /// Maximum combined domain size for the EPFOL/FOL brute-force search.
    pub brute_force_cap: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            brute_force_cap: 12,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error(
        "combined domain size {size} exceeds the brute-force cap {cap} \
         required for {lang} simulations"
    )]
    CapExceeded {
        size: usize,
        cap: usize,
        lang: Language,
    },
    #[error("unknown element `{0}`")]
    UnknownElement(String),
}

/// One failed property clause, with the elements that witness the failure.
#[derive(Clone, Debug)]
pub struct Violation {
    pub property: SimProperty,
    pub witnesses: Vec<ElementId>,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.property, self.message)
    }
}

/// A set of pairs (u, v), u from `source` and v from `target`, read as
/// "u is simulated by v".
#[derive(Clone, Debug)]
pub struct SimulationRelation {
    language: Language,
    source: RelationalModel,
    target: RelationalModel,
    pairs: BTreeSet<(ElementId, ElementId)>,
}

impl SimulationRelation {
    pub fn language(&self) -> Language {
        self.language
    }

    pub fn source(&self) -> &RelationalModel {
        &self.source
    }

    pub fn target(&self) -> &RelationalModel {
        &self.target
    }

    pub fn pairs(&self) -> &BTreeSet<(ElementId, ElementId)> {
        &self.pairs
    }

    pub fn contains(&self, u: &str, v: &str) -> bool {
        self.pairs
            .iter()
            .any(|(a, b)| a.as_str() == u && b.as_str() == v)
    }

    /// Everything simulating `u`: `{v | (u, v) ∈ pairs}`.
    pub fn simulators_of(&self, u: &str) -> BTreeSet<ElementId> {
        self.pairs
            .iter()
            .filter(|(a, _)| a.as_str() == u)
            .map(|(_, b)| b.clone())
            .collect()
    }
}

/// Checks each named property clause against `pairs` and reports every
/// failure. An empty result means the relation satisfies all of `props`.
pub fn check_properties(
    pairs: &BTreeSet<(ElementId, ElementId)>,
    m1: &RelationalModel,
    m2: &RelationalModel,
    props: &[SimProperty],
) -> Vec<Violation> {
    let mut violations = Vec::new();
    for &prop in props {
        match prop {
            SimProperty::AtomLeft => {
                for (u, v) in pairs {
                    for p in m1.unary_names() {
                        if m1.unary_holds(p, u.as_str()) && !m2.unary_holds(p, v.as_str()) {
                            violations.push(Violation {
                                property: prop,
                                witnesses: vec![u.clone(), v.clone()],
                                message: format!("`{u}` is in `{p}` but `{v}` is not"),
                            });
                        }
                    }
                }
            }
            SimProperty::AtomRight => {
                for (u, v) in pairs {
                    for p in m2.unary_names() {
                        if m2.unary_holds(p, v.as_str()) && !m1.unary_holds(p, u.as_str()) {
                            violations.push(Violation {
                                property: prop,
                                witnesses: vec![u.clone(), v.clone()],
                                message: format!("`{v}` is in `{p}` but `{u}` is not"),
                            });
                        }
                    }
                }
            }
            SimProperty::Zig => {
                for (u, v) in pairs {
                    for r in m1.binary_names() {
                        for u2 in m1.successors(u.as_str(), r) {
                            let matched = m2
                                .successors(v.as_str(), r)
                                .any(|v2| pairs.contains(&(u2.clone(), v2.clone())));
                            if !matched {
                                violations.push(Violation {
                                    property: prop,
                                    witnesses: vec![u.clone(), v.clone(), u2.clone()],
                                    message: format!(
                                        "`{u}` reaches `{u2}` via `{r}` but no related \
                                         successor of `{v}` covers it"
                                    ),
                                });
                            }
                        }
                    }
                }
            }
            SimProperty::Zag => {
                for (u, v) in pairs {
                    for r in m2.binary_names() {
                        for v2 in m2.successors(v.as_str(), r) {
                            let matched = m1
                                .successors(u.as_str(), r)
                                .any(|u2| pairs.contains(&(u2.clone(), v2.clone())));
                            if !matched {
                                violations.push(Violation {
                                    property: prop,
                                    witnesses: vec![u.clone(), v.clone(), v2.clone()],
                                    message: format!(
                                        "`{v}` reaches `{v2}` via `{r}` but no related \
                                         successor of `{u}` covers it"
                                    ),
                                });
                            }
                        }
                    }
                }
            }
            SimProperty::InjLeft => {
                violations.extend(injectivity_violations(pairs, m1, prop, false));
            }
            SimProperty::InjRight => {
                let flipped: BTreeSet<(ElementId, ElementId)> =
                    pairs.iter().map(|(u, v)| (v.clone(), u.clone())).collect();
                violations.extend(injectivity_violations(&flipped, m2, prop, true));
            }
        }
    }
    violations
}

/// inj-L reads "the relation is a total injective function on `m`"; inj-R
/// is the same of the inverse. `pairs` here is already oriented so its
/// first components should form the function's domain.
fn injectivity_violations(
    pairs: &BTreeSet<(ElementId, ElementId)>,
    m: &RelationalModel,
    prop: SimProperty,
    flipped: bool,
) -> Vec<Violation> {
    let side = if flipped { "target" } else { "source" };
    let mut violations = Vec::new();
    for e in m.domain() {
        let images: Vec<&ElementId> = pairs
            .iter()
            .filter(|(u, _)| u == e)
            .map(|(_, v)| v)
            .collect();
        match images.len() {
            0 => violations.push(Violation {
                property: prop,
                witnesses: vec![e.clone()],
                message: format!("{side} element `{e}` is not related to anything"),
            }),
            1 => {}
            _ => violations.push(Violation {
                property: prop,
                witnesses: images.iter().map(|v| (*v).clone()).collect(),
                message: format!("{side} element `{e}` is related to more than one element"),
            }),
        }
    }
    let mut seen: BTreeSet<&ElementId> = BTreeSet::new();
    for (u, v) in pairs {
        if !seen.insert(v) {
            violations.push(Violation {
                property: prop,
                witnesses: vec![u.clone(), v.clone()],
                message: format!("two elements share the image `{v}`"),
            });
        }
    }
    violations
}

/// The union of all simulations between `m1` and `m2` for the logic's
/// property set. For EPFOL and FOL the relation contains (u, v) iff a
/// witnessing injective homomorphism (resp. isomorphism) maps u to v; such
/// unions need not satisfy the injectivity clauses themselves.
pub fn maximal_simulation(
    m1: &RelationalModel,
    m2: &RelationalModel,
    lang: Language,
    opts: &SimOptions,
) -> Result<SimulationRelation, SimError> {
    let pairs = match lang {
        Language::El | Language::Elan | Language::Alc => {
            refinement_pairs(m1, m2, lang.properties())
        }
        Language::Epfol | Language::Fol => {
            let size = m1.domain_len() + m2.domain_len();
            if size > opts.brute_force_cap {
                return Err(SimError::CapExceeded {
                    size,
                    cap: opts.brute_force_cap,
                    lang,
                });
            }
            let mut pairs = BTreeSet::new();
            for u in m1.domain() {
                for v in m2.domain() {
                    let related = match lang {
                        Language::Epfol => epfol_pair(m1, u, m2, v),
                        _ => fol_pair(m1, u, m2, v),
                    };
                    if related {
                        pairs.insert((u.clone(), v.clone()));
                    }
                }
            }
            pairs
        }
    };
    Ok(SimulationRelation {
        language: lang,
        source: m1.clone(),
        target: m2.clone(),
        pairs,
    })
}

/// `simset(v) = {u | v is simulated by u}`.
pub fn simulator_set(
    m: &RelationalModel,
    v: &str,
    lang: Language,
    opts: &SimOptions,
) -> Result<BTreeSet<ElementId>, SimError> {
    if !m.contains_element(v) {
        return Err(SimError::UnknownElement(v.to_string()));
    }
    Ok(maximal_simulation(m, m, lang, opts)?.simulators_of(v))
}

/// True iff u is simulated by v, i.e. iff every formula of the logic true
/// at u also holds at v.
pub fn similarity_query(
    m1: &RelationalModel,
    u: &str,
    m2: &RelationalModel,
    v: &str,
    lang: Language,
    opts: &SimOptions,
) -> Result<bool, SimError> {
    let u = m1
        .element(u)
        .ok_or_else(|| SimError::UnknownElement(u.to_string()))?;
    let v = m2
        .element(v)
        .ok_or_else(|| SimError::UnknownElement(v.to_string()))?;
    match lang {
        Language::El | Language::Elan | Language::Alc => {
            Ok(refinement_pairs(m1, m2, lang.properties()).contains(&(u.clone(), v.clone())))
        }
        Language::Epfol | Language::Fol => {
            let size = m1.domain_len() + m2.domain_len();
            if size > opts.brute_force_cap {
                return Err(SimError::CapExceeded {
                    size,
                    cap: opts.brute_force_cap,
                    lang,
                });
            }
            Ok(match lang {
                Language::Epfol => epfol_pair(m1, u, m2, v),
                _ => fol_pair(m1, u, m2, v),
            })
        }
    }
}

/// Fixpoint refinement for the non-injective property sets. Starts from
/// the pairs satisfying the atom clauses and removes zig/zag failures in
/// simultaneous rounds until stable; the result is the unique maximal
/// relation satisfying the clauses.
pub(crate) fn refinement_pairs(
    m1: &RelationalModel,
    m2: &RelationalModel,
    props: &[SimProperty],
) -> BTreeSet<(ElementId, ElementId)> {
    let atom_right = props.contains(&SimProperty::AtomRight);
    let zag = props.contains(&SimProperty::Zag);

    let mut pairs: BTreeSet<(ElementId, ElementId)> = BTreeSet::new();
    for u in m1.domain() {
        let pu = m1.unary_profile(u.as_str());
        for v in m2.domain() {
            let pv = m2.unary_profile(v.as_str());
            let ok = if atom_right {
                pu == pv
            } else {
                pu.is_subset(&pv)
            };
            if ok {
                pairs.insert((u.clone(), v.clone()));
            }
        }
    }

    let round_bound = m1.domain_len() * m2.domain_len() + 1;
    let mut rounds = 0usize;
    loop {
        rounds += 1;
        debug_assert!(
            rounds <= round_bound,
            "refinement must converge within |domain1|*|domain2|+1 rounds"
        );
        let doomed: Vec<(ElementId, ElementId)> = pairs
            .iter()
            .filter(|(u, v)| {
                let zig_fails = m1.binary_names().any(|r| {
                    m1.successors(u.as_str(), r).any(|u2| {
                        !m2.successors(v.as_str(), r)
                            .any(|v2| pairs.contains(&(u2.clone(), v2.clone())))
                    })
                });
                let zag_fails = zag
                    && m2.binary_names().any(|r| {
                        m2.successors(v.as_str(), r).any(|v2| {
                            !m1.successors(u.as_str(), r)
                                .any(|u2| pairs.contains(&(u2.clone(), v2.clone())))
                        })
                    });
                zig_fails || zag_fails
            })
            .cloned()
            .collect();
        if doomed.is_empty() {
            return pairs;
        }
        for pair in doomed {
            pairs.remove(&pair);
        }
    }
}

/// Elements reachable from `from` along any binary relation, in
/// breadth-first order starting with `from` itself.
fn reachable(m: &RelationalModel, from: &ElementId) -> Vec<ElementId> {
    let mut order = vec![from.clone()];
    let mut seen: BTreeSet<ElementId> = order.iter().cloned().collect();
    let mut head = 0;
    while head < order.len() {
        let current = order[head].clone();
        head += 1;
        for r in m.binary_names() {
            for next in m.successors(current.as_str(), r) {
                if seen.insert(next.clone()) {
                    order.push(next.clone());
                }
            }
        }
    }
    order
}

/// Is there an injective homomorphism from the substructure of `m1`
/// reachable from `u` into `m2`, sending u to v? Homomorphism means unary
/// relations carry over (atom-L) and every edge is preserved.
pub(crate) fn epfol_pair(
    m1: &RelationalModel,
    u: &ElementId,
    m2: &RelationalModel,
    v: &ElementId,
) -> bool {
    let order = reachable(m1, u);
    let mut map: Vec<(ElementId, ElementId)> = Vec::with_capacity(order.len());

    fn edges_preserved(
        m1: &RelationalModel,
        m2: &RelationalModel,
        map: &[(ElementId, ElementId)],
        x: &ElementId,
        c: &ElementId,
    ) -> bool {
        for r in m1.binary_names() {
            if m1.binary_holds(r, x.as_str(), x.as_str())
                && !m2.binary_holds(r, c.as_str(), c.as_str())
            {
                return false;
            }
            for (y, fy) in map {
                if m1.binary_holds(r, x.as_str(), y.as_str())
                    && !m2.binary_holds(r, c.as_str(), fy.as_str())
                {
                    return false;
                }
                if m1.binary_holds(r, y.as_str(), x.as_str())
                    && !m2.binary_holds(r, fy.as_str(), c.as_str())
                {
                    return false;
                }
            }
        }
        true
    }

    fn assign(
        m1: &RelationalModel,
        m2: &RelationalModel,
        order: &[ElementId],
        map: &mut Vec<(ElementId, ElementId)>,
        root_image: &ElementId,
    ) -> bool {
        let idx = map.len();
        if idx == order.len() {
            return true;
        }
        let x = &order[idx];
        let profile = m1.unary_profile(x.as_str());
        let candidates: Vec<ElementId> = if idx == 0 {
            vec![root_image.clone()]
        } else {
            m2.domain().cloned().collect()
        };
        for c in candidates {
            if map.iter().any(|(_, used)| *used == c) {
                continue;
            }
            if !profile.is_subset(&m2.unary_profile(c.as_str())) {
                continue;
            }
            if !edges_preserved(m1, m2, map, x, &c) {
                continue;
            }
            map.push((x.clone(), c));
            if assign(m1, m2, order, map, root_image) {
                return true;
            }
            map.pop();
        }
        false
    }

    assign(m1, m2, &order, &mut map, v)
}

/// Is there an isomorphism between `m1` and `m2` sending u to v? Both
/// unary profiles and edges must match exactly, in both directions.
pub(crate) fn fol_pair(
    m1: &RelationalModel,
    u: &ElementId,
    m2: &RelationalModel,
    v: &ElementId,
) -> bool {
    if m1.domain_len() != m2.domain_len() {
        return false;
    }
    let relations: BTreeSet<&str> = m1.binary_names().chain(m2.binary_names()).collect();
    let mut order: Vec<ElementId> = vec![u.clone()];
    order.extend(m1.domain().filter(|e| *e != u).cloned());
    let mut map: Vec<(ElementId, ElementId)> = Vec::with_capacity(order.len());

    fn edges_match(
        m1: &RelationalModel,
        m2: &RelationalModel,
        relations: &BTreeSet<&str>,
        map: &[(ElementId, ElementId)],
        x: &ElementId,
        c: &ElementId,
    ) -> bool {
        for r in relations {
            if m1.binary_holds(r, x.as_str(), x.as_str())
                != m2.binary_holds(r, c.as_str(), c.as_str())
            {
                return false;
            }
            for (y, fy) in map {
                if m1.binary_holds(r, x.as_str(), y.as_str())
                    != m2.binary_holds(r, c.as_str(), fy.as_str())
                {
                    return false;
                }
                if m1.binary_holds(r, y.as_str(), x.as_str())
                    != m2.binary_holds(r, fy.as_str(), c.as_str())
                {
                    return false;
                }
            }
        }
        true
    }

    fn assign(
        m1: &RelationalModel,
        m2: &RelationalModel,
        relations: &BTreeSet<&str>,
        order: &[ElementId],
        map: &mut Vec<(ElementId, ElementId)>,
        root_image: &ElementId,
    ) -> bool {
        let idx = map.len();
        if idx == order.len() {
            return true;
        }
        let x = &order[idx];
        let profile = m1.unary_profile(x.as_str());
        let candidates: Vec<ElementId> = if idx == 0 {
            vec![root_image.clone()]
        } else {
            m2.domain().cloned().collect()
        };
        for c in candidates {
            if map.iter().any(|(_, used)| *used == c) {
                continue;
            }
            if profile != m2.unary_profile(c.as_str()) {
                continue;
            }
            if !edges_match(m1, m2, relations, map, x, &c) {
                continue;
            }
            map.push((x.clone(), c));
            if assign(m1, m2, relations, order, map, root_image) {
                return true;
            }
            map.pop();
        }
        false
    }

    assign(m1, m2, &relations, &order, &mut map, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene() -> RelationalModel {
        RelationalModel::from_text(include_str!("../tests/data/scene-s.lgre")).unwrap()
    }

    fn identity(m: &RelationalModel) -> BTreeSet<(ElementId, ElementId)> {
        m.domain().map(|e| (e.clone(), e.clone())).collect()
    }

    fn pair(u: &str, v: &str) -> (ElementId, ElementId) {
        (ElementId::new(u), ElementId::new(v))
    }

    fn names(set: &BTreeSet<ElementId>) -> Vec<&str> {
        set.iter().map(|e| e.as_str()).collect()
    }

    #[test]
    fn check_properties_on_scene_pairs() {
        let m = scene();
        let mut rel = identity(&m);
        rel.insert(pair("a", "b"));

        assert!(check_properties(&rel, &m, &m, Language::El.properties()).is_empty());

        let violations = check_properties(&rel, &m, &m, Language::Elan.properties());
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].property, SimProperty::AtomRight);
        assert!(violations[0].message.contains("small"), "{}", violations[0]);

        // The reverse direction already fails atom-L.
        let mut bad = identity(&m);
        bad.insert(pair("b", "a"));
        let violations = check_properties(&bad, &m, &m, Language::El.properties());
        assert!(violations
            .iter()
            .any(|v| v.property == SimProperty::AtomLeft));
    }

    #[test]
    fn check_properties_vacuous_and_injective() {
        let m = scene();
        let empty = BTreeSet::new();
        assert!(check_properties(&empty, &m, &m, Language::Alc.properties()).is_empty());

        // The identity is an isomorphism, so all six clauses pass.
        assert!(check_properties(&identity(&m), &m, &m, Language::Fol.properties()).is_empty());

        // A single pair is far from total: four source elements and four
        // target elements are unrelated.
        let single: BTreeSet<_> = [pair("a", "b")].into();
        let violations = check_properties(&single, &m, &m, &[SimProperty::InjLeft]);
        assert_eq!(violations.len(), 4);
        let violations = check_properties(&single, &m, &m, &[SimProperty::InjRight]);
        assert_eq!(violations.len(), 4);

        // Two sources sharing an image break injectivity.
        let shared: BTreeSet<_> = identity(&m)
            .into_iter()
            .map(|(u, v)| if u.as_str() == "b" { (u, ElementId::new("a")) } else { (u, v) })
            .collect();
        let violations = check_properties(&shared, &m, &m, &[SimProperty::InjLeft]);
        assert!(violations
            .iter()
            .any(|v| v.message.contains("share the image")));
    }

    #[test]
    fn maximal_el_simulation_on_scene() {
        let m = scene();
        let sim = maximal_simulation(&m, &m, Language::El, &SimOptions::default()).unwrap();
        assert!(sim.contains("a", "b"));
        assert!(!sim.contains("b", "a"));
        for e in m.domain() {
            assert!(sim.contains(e.as_str(), e.as_str()));
        }
        // (a,b) is the only non-reflexive pair on the scene.
        assert_eq!(sim.pairs().len(), 6);

        let violations = check_properties(sim.pairs(), &m, &m, Language::El.properties());
        assert!(violations.is_empty());
    }

    #[test]
    fn maximality_of_refinement_on_scene() {
        let m = scene();
        for lang in [Language::El, Language::Elan, Language::Alc] {
            let sim = maximal_simulation(&m, &m, lang, &SimOptions::default()).unwrap();
            for u in m.domain() {
                for v in m.domain() {
                    let p = (u.clone(), v.clone());
                    if sim.pairs().contains(&p) {
                        continue;
                    }
                    let mut extended = sim.pairs().clone();
                    extended.insert(p);
                    assert!(
                        !check_properties(&extended, &m, &m, lang.properties()).is_empty(),
                        "adding ({u},{v}) should violate a {lang} clause"
                    );
                }
            }
        }
    }

    #[test]
    fn simulator_sets_on_scene() {
        let m = scene();
        let opts = SimOptions::default();
        assert_eq!(
            names(&simulator_set(&m, "a", Language::El, &opts).unwrap()),
            ["a", "b"]
        );
        for v in ["b", "c", "d", "e"] {
            assert_eq!(
                names(&simulator_set(&m, v, Language::El, &opts).unwrap()),
                [v]
            );
        }
        assert_eq!(
            names(&simulator_set(&m, "a", Language::Elan, &opts).unwrap()),
            ["a"]
        );
        assert!(matches!(
            simulator_set(&m, "z", Language::El, &opts),
            Err(SimError::UnknownElement(_))
        ));
    }

    #[test]
    fn fol_simulation_is_identity_on_scene() {
        let m = scene();
        let sim = maximal_simulation(&m, &m, Language::Fol, &SimOptions::default()).unwrap();
        assert_eq!(*sim.pairs(), identity(&m));

        let epfol = maximal_simulation(&m, &m, Language::Epfol, &SimOptions::default()).unwrap();
        assert_eq!(*epfol.pairs(), identity(&m));
    }

    #[test]
    fn epfol_is_weaker_than_fol() {
        // v has an outgoing edge that u lacks; an isolated u still maps
        // into v's reachable part, but no isomorphism exists.
        let m = RelationalModel::from_text("domain: u v w\nbinary r: (v,w)\n").unwrap();
        let opts = SimOptions::default();
        assert!(similarity_query(&m, "u", &m, "v", Language::Epfol, &opts).unwrap());
        assert!(!similarity_query(&m, "u", &m, "v", Language::Fol, &opts).unwrap());
        // Homomorphisms preserve edges, so v does not map onto edgeless u.
        assert!(!similarity_query(&m, "v", &m, "u", Language::Epfol, &opts).unwrap());
    }

    #[test]
    fn expressiveness_is_monotone_on_scene() {
        let m = scene();
        let opts = SimOptions::default();
        let get = |lang| {
            maximal_simulation(&m, &m, lang, &opts)
                .unwrap()
                .pairs()
                .clone()
        };
        let (fol, epfol, el) = (get(Language::Fol), get(Language::Epfol), get(Language::El));
        let (alc, elan) = (get(Language::Alc), get(Language::Elan));
        assert!(fol.is_subset(&epfol));
        assert!(epfol.is_subset(&el));
        assert!(alc.is_subset(&elan));
        assert!(elan.is_subset(&el));
    }

    #[test]
    fn similarity_queries_on_scene() {
        let m = scene();
        let opts = SimOptions::default();
        assert!(similarity_query(&m, "a", &m, "b", Language::El, &opts).unwrap());
        assert!(!similarity_query(&m, "d", &m, "e", Language::El, &opts).unwrap());
        for lang in Language::ALL {
            assert!(similarity_query(&m, "c", &m, "c", lang, &opts).unwrap());
        }
        assert!(matches!(
            similarity_query(&m, "a", &m, "z", Language::El, &opts),
            Err(SimError::UnknownElement(_))
        ));
    }

    #[test]
    fn simulations_across_distinct_models() {
        let m = scene();
        // The depth-2 unraveling's root still simulates d in EL: trees
        // embed back into the model they unravel.
        let (tree, root) = m.unravel("d", 2).unwrap();
        assert!(
            similarity_query(&tree, root.as_str(), &m, "d", Language::El, &SimOptions::default())
                .unwrap()
        );
        // The converse fails: d's infinite back-and-forth cannot be
        // matched by a depth-bounded tree.
        assert!(
            !similarity_query(&m, "d", &tree, root.as_str(), Language::El, &SimOptions::default())
                .unwrap()
        );
    }

    #[test]
    fn brute_force_cap_is_enforced() {
        let m = RelationalModel::linear_order_model(7).unwrap();
        let err = maximal_simulation(&m, &m, Language::Epfol, &SimOptions::default()).unwrap_err();
        assert_eq!(
            err,
            SimError::CapExceeded {
                size: 14,
                cap: 12,
                lang: Language::Epfol
            }
        );
        // The refinement logics have no cap.
        assert!(maximal_simulation(&m, &m, Language::El, &SimOptions::default()).is_ok());

        let relaxed = SimOptions {
            brute_force_cap: 14,
        };
        assert!(maximal_simulation(&m, &m, Language::Fol, &relaxed).is_ok());
    }

    #[test]
    fn refinement_cascades_on_linear_orders() {
        // With no unary relations every pair starts related; zig then peels
        // one diagonal per round: u is EL-simulated by v iff v's ascending
        // chain is at least as long, i.e. v <= u.
        let m = RelationalModel::linear_order_model(5).unwrap();
        let sim = maximal_simulation(&m, &m, Language::El, &SimOptions::default()).unwrap();
        for u in 1..=5u32 {
            for v in 1..=5u32 {
                assert_eq!(
                    sim.contains(&u.to_string(), &v.to_string()),
                    v <= u,
                    "({u},{v})"
                );
            }
        }
    }
}
