//! Simulator-set referring-expression generation for EL and ELAN.
//!
//! One refinement engine computes, for every element v at once, the
//! simulator set S(v) and a tagged formula F(v). S(v) starts as everything
//! the atom clauses allow and shrinks by guarded steps: a step picks
//! (u, v, w, r) with (u,v) in r, w in S(u) and no r-successor of w left in
//! S(v), removes w from S(u), and records the reason by conjoining
//! `some r . F(v)` onto F(u). At the fixpoint, the extension of F(v) is
//! exactly S(v), so v has a referring expression iff S(v) = {v}, and then
//! F(v) is one.
//!
//! The step order is deliberately pluggable ([`Scheduler`]): the same
//! fixpoint is reached under any valid order, but the tagged formulas can
//! differ drastically in expanded size. Two scripted schedules over the
//! linear-order family reproduce the extremes: one doubles F(1) every
//! round (exponential tree, small DAG), one keeps it quadratic. The
//! default fifo scheduler drives refinement from a queue of exhausted
//! successor counters and its operation count stays within a constant
//! factor of |domain| * |interpretation|.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::logic::{DlEvaluator, DlFormula, EvalError, Language};
use crate::model::{ElementId, ModelError, RelationalModel};

#[derive(Debug, Error)]
pub enum GreError {
    #[error("the simulator-set method supports el and elan, not {0}")]
    UnsupportedLanguage(Language),
    #[error("invalid schedule choice (u={u}, v={v}, w={w}, r={relation}): {reason}")]
    InvalidChoice {
        u: ElementId,
        v: ElementId,
        w: ElementId,
        relation: String,
        reason: String,
    },
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("the state has no tagged formulas; it came from compute_similarity")]
    FormulasMissing,
    #[error("the target set must not be empty")]
    EmptyTargetSet,
    #[error("loop invariant broken after step {step}: {detail}")]
    InvariantBroken { step: usize, detail: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// How the engine picks the next guarded step.
#[derive(Clone, Debug)]
pub enum Scheduler {
    /// Queue-driven refinement over successor counters (the default).
    Fifo,
    /// Rescan all candidates in sorted order until a full pass is clean.
    Naive,
    /// Scripted worst case for linear orders: every element learns each
    /// distinction separately, so F(1) doubles per round.
    AdversarialExponential,
    /// Scripted benign order for linear orders: chains are refined bottom-up
    /// with a fixed witness, keeping F(1) quadratic in n.
    Quadratic,
    /// An explicit list of steps; each must satisfy the guard. After the
    /// script runs out, refinement continues to the fixpoint.
    Script(Vec<ScheduleChoice>),
}

/// One requested refinement step: remove `w` from S(`u`), justified by the
/// edge (`u`,`v`) in `relation`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleChoice {
    pub u: ElementId,
    pub v: ElementId,
    pub w: ElementId,
    pub relation: String,
}

/// A performed refinement step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementStep {
    pub removed: ElementId,
    pub from: ElementId,
    pub witness: ElementId,
    pub relation: String,
}

impl fmt::Display for RefinementStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "remove {} from S({}) because {},{}",
            self.removed, self.from, self.relation, self.witness
        )
    }
}

/// The S and F maps of a (terminated) run, together with the model they
/// were computed over. Similarity-only runs leave the formula map empty.
#[derive(Clone, Debug)]
pub struct SimulationState {
    model: RelationalModel,
    s: BTreeMap<ElementId, BTreeSet<ElementId>>,
    f: BTreeMap<ElementId, DlFormula>,
}

impl SimulationState {
    pub fn model(&self) -> &RelationalModel {
        &self.model
    }

    pub fn simulator_sets(&self) -> &BTreeMap<ElementId, BTreeSet<ElementId>> {
        &self.s
    }

    pub fn simulator_set(&self, v: &str) -> Option<&BTreeSet<ElementId>> {
        self.s.get(v)
    }

    pub fn formulas(&self) -> &BTreeMap<ElementId, DlFormula> {
        &self.f
    }

    pub fn formula(&self, v: &str) -> Option<&DlFormula> {
        self.f.get(v)
    }
}

/// Result of a refinement run: final state, the steps in order, and a
/// count of basic refinement operations (membership probes, counter
/// updates, queue traffic) for complexity measurements.
#[derive(Clone, Debug)]
pub struct GreRun {
    pub state: SimulationState,
    pub steps: Vec<RefinementStep>,
    pub ops: u64,
}

#[derive(Clone, Debug, Default)]
pub struct GreOptions {
    /// Re-check the loop invariant (extension of F(u) inside S(u), u in
    /// extension of F(u)) after every step. Quadratic in the model size
    /// per step; meant for small models and debugging.
    pub check_invariants: bool,
}

/// Sizes of F(1) after running on the linear order with n elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlowupReport {
    pub n: usize,
    pub dag_size: usize,
    pub tree_size: u128,
    pub removals: usize,
    pub ops: u64,
}

/// Computes the simulator sets only; the returned state has no formulas.
pub fn compute_similarity(
    model: &RelationalModel,
    lang: Language,
    sched: &Scheduler,
) -> Result<GreRun, GreError> {
    run(model, lang, sched, false, &GreOptions::default())
}

/// Computes simulator sets and tagged formulas.
pub fn compute_gre(
    model: &RelationalModel,
    lang: Language,
    sched: &Scheduler,
) -> Result<GreRun, GreError> {
    run(model, lang, sched, true, &GreOptions::default())
}

/// [`compute_gre`] with options.
pub fn compute_gre_with(
    model: &RelationalModel,
    lang: Language,
    sched: &Scheduler,
    opts: &GreOptions,
) -> Result<GreRun, GreError> {
    run(model, lang, sched, true, opts)
}

/// The referring expression for `target`, or `None` if it has none (its
/// simulator set is not the singleton).
pub fn re_for(state: &SimulationState, target: &str) -> Result<Option<DlFormula>, GreError> {
    let simulators = state
        .simulator_set(target)
        .ok_or_else(|| GreError::UnknownElement(target.to_string()))?;
    if state.f.is_empty() {
        return Err(GreError::FormulasMissing);
    }
    if simulators.len() == 1 && simulators.contains(target) {
        Ok(Some(state.f[target].clone()))
    } else {
        Ok(None)
    }
}

/// A formula for a target set: some member's tagged formula whose extension
/// is exactly the set. Sound (any returned formula is verified against the
/// model) but only the members' own formulas are tried.
pub fn re_for_set(
    state: &SimulationState,
    targets: &BTreeSet<ElementId>,
) -> Result<Option<DlFormula>, GreError> {
    if targets.is_empty() {
        return Err(GreError::EmptyTargetSet);
    }
    if state.f.is_empty() {
        return Err(GreError::FormulasMissing);
    }
    for v in targets {
        if !state.s.contains_key(v) {
            return Err(GreError::UnknownElement(v.to_string()));
        }
    }
    let mut evaluator = DlEvaluator::new(&state.model);
    for v in targets {
        let phi = &state.f[v];
        if *evaluator.eval(phi)? == *targets {
            return Ok(Some(phi.clone()));
        }
    }
    Ok(None)
}

/// Runs the engine on the linear order with `n` elements and reports the
/// sizes of F(1).
pub fn measure_blowup(n: usize, sched: &Scheduler) -> Result<BlowupReport, GreError> {
    if n < 2 {
        return Err(GreError::Model(ModelError::InvalidParameter(
            "blowup measurements need n >= 2".into(),
        )));
    }
    let model = RelationalModel::linear_order_model(n)?;
    let run = compute_gre(&model, Language::El, sched)?;
    let f1 = run.state.formula("1").expect("1 is in the domain");
    Ok(BlowupReport {
        n,
        dag_size: f1.dag_size(),
        tree_size: f1.tree_size(),
        removals: run.steps.len(),
        ops: run.ops,
    })
}

// ---------------------------------------------------------------------------
// Engine

struct Engine<'m> {
    model: &'m RelationalModel,
    track_formulas: bool,
    check_invariants: bool,
    s: BTreeMap<ElementId, BTreeSet<ElementId>>,
    f: BTreeMap<ElementId, DlFormula>,
    /// Conjuncts of each F(u) by node identity, for O(1) duplicate checks.
    conjuncts: BTreeMap<ElementId, HashSet<DlFormula>>,
    steps: Vec<RefinementStep>,
    ops: u64,
}

fn run(
    model: &RelationalModel,
    lang: Language,
    sched: &Scheduler,
    track_formulas: bool,
    opts: &GreOptions,
) -> Result<GreRun, GreError> {
    if !matches!(lang, Language::El | Language::Elan) {
        return Err(GreError::UnsupportedLanguage(lang));
    }
    let mut engine = Engine::new(model, lang, track_formulas, opts);
    match sched {
        Scheduler::Fifo => engine.run_fifo()?,
        Scheduler::Naive => engine.run_naive()?,
        Scheduler::AdversarialExponential => {
            engine.run_script(&adversarial_script(model.domain_len()))?;
            engine.run_naive()?;
        }
        Scheduler::Quadratic => {
            engine.run_script(&quadratic_script(model.domain_len()))?;
            engine.run_naive()?;
        }
        Scheduler::Script(script) => {
            engine.run_script(script)?;
            engine.run_naive()?;
        }
    }
    Ok(GreRun {
        state: SimulationState {
            model: model.clone(),
            s: engine.s,
            f: engine.f,
        },
        steps: engine.steps,
        ops: engine.ops,
    })
}

impl<'m> Engine<'m> {
    fn new(
        model: &'m RelationalModel,
        lang: Language,
        track_formulas: bool,
        opts: &GreOptions,
    ) -> Self {
        let exact_profiles = lang == Language::Elan;
        let mut s = BTreeMap::new();
        let mut f = BTreeMap::new();
        let mut conjuncts = BTreeMap::new();
        let mut ops = 0u64;
        let profiles: BTreeMap<&ElementId, BTreeSet<&str>> = model
            .domain()
            .map(|e| (e, model.unary_profile(e.as_str())))
            .collect();
        for v in model.domain() {
            let pv = &profiles[v];
            let mut candidates = BTreeSet::new();
            for u in model.domain() {
                ops += 1;
                let ok = if exact_profiles {
                    profiles[u] == *pv
                } else {
                    pv.is_subset(&profiles[u])
                };
                if ok {
                    candidates.insert(u.clone());
                }
            }
            s.insert(v.clone(), candidates);
            if track_formulas {
                let mut parts: Vec<DlFormula> =
                    pv.iter().map(|p| DlFormula::atom(*p)).collect();
                if exact_profiles {
                    parts.extend(
                        model
                            .unary_names()
                            .filter(|p| !pv.contains(p))
                            .map(|p| DlFormula::not(DlFormula::atom(p))),
                    );
                }
                let phi = DlFormula::and_all(parts);
                conjuncts.insert(v.clone(), phi.conjuncts().into_iter().collect());
                f.insert(v.clone(), phi);
            }
        }
        Engine {
            model,
            track_formulas,
            check_invariants: opts.check_invariants,
            s,
            f,
            conjuncts,
            steps: Vec::new(),
            ops,
        }
    }

    /// True iff no r-successor of `w` remains in S(`v`). Charges one
    /// operation per successor probed.
    fn zig_exhausted(&mut self, w: &ElementId, v: &ElementId, relation: &str) -> bool {
        let sv = &self.s[v];
        for w2 in self.model.successors(w.as_str(), relation) {
            self.ops += 1;
            if sv.contains(w2) {
                return false;
            }
        }
        true
    }

    /// Performs a step whose guard the caller has established.
    fn apply(
        &mut self,
        u: &ElementId,
        v: &ElementId,
        w: &ElementId,
        relation: &str,
    ) -> Result<(), GreError> {
        debug_assert!(self.model.binary_holds(relation, u.as_str(), v.as_str()));
        debug_assert!(self.s[u].contains(w));
        debug_assert!(u != w, "reflexive pairs can never fail the guard");
        self.ops += 1;
        self.s.get_mut(u).expect("in domain").remove(w);
        if self.track_formulas {
            let diamond = DlFormula::exists(relation, self.f[v].clone());
            if self.conjuncts.get_mut(u).expect("in domain").insert(diamond.clone()) {
                let joined = DlFormula::and(self.f[u].clone(), diamond);
                self.f.insert(u.clone(), joined);
            }
        }
        self.steps.push(RefinementStep {
            removed: w.clone(),
            from: u.clone(),
            witness: v.clone(),
            relation: relation.to_string(),
        });
        if self.check_invariants {
            self.verify_invariant()?;
        }
        Ok(())
    }

    fn verify_invariant(&self) -> Result<(), GreError> {
        if !self.track_formulas {
            return Ok(());
        }
        let mut evaluator = DlEvaluator::new(self.model);
        for (u, phi) in &self.f {
            let ext = evaluator.eval(phi)?;
            if !ext.is_subset(&self.s[u]) {
                return Err(GreError::InvariantBroken {
                    step: self.steps.len(),
                    detail: format!("extension of F({u}) leaks outside S({u})"),
                });
            }
            if !ext.contains(u) {
                return Err(GreError::InvariantBroken {
                    step: self.steps.len(),
                    detail: format!("{u} no longer satisfies F({u})"),
                });
            }
        }
        Ok(())
    }

    /// Validates and applies each scripted choice in order.
    fn run_script(&mut self, script: &[ScheduleChoice]) -> Result<(), GreError> {
        for choice in script {
            let ScheduleChoice { u, v, w, relation } = choice;
            let fail = |reason: &str| GreError::InvalidChoice {
                u: u.clone(),
                v: v.clone(),
                w: w.clone(),
                relation: relation.clone(),
                reason: reason.to_string(),
            };
            for e in [u, v, w] {
                if !self.model.contains_element(e.as_str()) {
                    return Err(fail(&format!("element `{e}` is not in the model")));
                }
            }
            if !self.model.has_binary(relation) {
                return Err(fail("no such binary relation"));
            }
            if !self.model.binary_holds(relation, u.as_str(), v.as_str()) {
                return Err(fail("the edge (u,v) is not in the relation"));
            }
            if !self.s[u].contains(w) {
                return Err(fail("w is not in S(u)"));
            }
            if !self.zig_exhausted(w, v, relation) {
                return Err(fail("some successor of w still simulates v"));
            }
            self.apply(u, v, w, relation)?;
        }
        Ok(())
    }

    /// Scans candidates in sorted order, applying every step whose guard
    /// holds, until a full pass is clean.
    fn run_naive(&mut self) -> Result<(), GreError> {
        let elements: Vec<ElementId> = self.model.domain().cloned().collect();
        let relations: Vec<String> =
            self.model.binary_names().map(str::to_string).collect();
        loop {
            let mut dirty = false;
            for u in &elements {
                for relation in &relations {
                    let witnesses: Vec<ElementId> = self
                        .model
                        .successors(u.as_str(), relation)
                        .cloned()
                        .collect();
                    for v in &witnesses {
                        let candidates: Vec<ElementId> = self.s[u].iter().cloned().collect();
                        for w in &candidates {
                            self.ops += 1;
                            if self.s[u].contains(w) && self.zig_exhausted(w, v, relation) {
                                self.apply(u, v, w, relation)?;
                                dirty = true;
                            }
                        }
                    }
                }
            }
            if !dirty {
                return Ok(());
            }
        }
    }

    /// Queue-driven refinement. For every (v, w, r) it maintains the count
    /// of r-successors of w still in S(v); when a count hits zero, the
    /// triple wakes up every edge (u, v) to remove w from S(u). Each count
    /// only decreases, so total work stays proportional to
    /// |domain| * |interpretation| plus the initial count construction.
    fn run_fifo(&mut self) -> Result<(), GreError> {
        let elements: Vec<ElementId> = self.model.domain().cloned().collect();
        let index: BTreeMap<&ElementId, usize> =
            elements.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let relations: Vec<String> =
            self.model.binary_names().map(str::to_string).collect();
        let n = elements.len();

        // counts[r][v * n + w] = |successors(w, r) ∩ S(v)|
        let mut counts: Vec<Vec<u32>> = vec![vec![0; n * n]; relations.len()];
        for (ri, relation) in relations.iter().enumerate() {
            for (vi, v) in elements.iter().enumerate() {
                let sv = &self.s[v];
                for (w, x) in self.model.binary_pairs(relation) {
                    self.ops += 1;
                    if sv.contains(x) {
                        counts[ri][vi * n + index[w]] += 1;
                    }
                }
            }
        }

        let mut queue: VecDeque<(usize, usize, usize)> = VecDeque::new();
        for (ri, _) in relations.iter().enumerate() {
            for vi in 0..n {
                for wi in 0..n {
                    self.ops += 1;
                    if counts[ri][vi * n + wi] == 0 {
                        queue.push_back((vi, wi, ri));
                    }
                }
            }
        }

        while let Some((vi, wi, ri)) = queue.pop_front() {
            let (v, w) = (elements[vi].clone(), elements[wi].clone());
            let relation = relations[ri].clone();
            let users: Vec<ElementId> = self
                .model
                .predecessors(v.as_str(), &relation)
                .cloned()
                .collect();
            for u in users {
                self.ops += 1;
                if !self.s[&u].contains(&w) {
                    continue;
                }
                debug_assert!(self.zig_exhausted_pure(&w, &v, &relation));
                self.apply(&u, &v, &w, &relation)?;
                // Removing w from S(u) cancels one credit in every count
                // that was relying on w as a successor inside S(u).
                let ui = index[&u];
                for (ri2, relation2) in relations.iter().enumerate() {
                    let feeders: Vec<&ElementId> = self
                        .model
                        .predecessors(w.as_str(), relation2)
                        .collect();
                    for t in feeders {
                        self.ops += 1;
                        let slot = &mut counts[ri2][ui * n + index[t]];
                        debug_assert!(*slot > 0);
                        *slot -= 1;
                        if *slot == 0 {
                            queue.push_back((ui, index[t], ri2));
                        }
                    }
                }
            }
        }

        debug_assert!(self.fixpoint_reached());
        Ok(())
    }

    /// Non-charging guard check for debug assertions.
    fn zig_exhausted_pure(&self, w: &ElementId, v: &ElementId, relation: &str) -> bool {
        let sv = &self.s[v];
        !self
            .model
            .successors(w.as_str(), relation)
            .any(|w2| sv.contains(w2))
    }

    #[cfg(debug_assertions)]
    fn fixpoint_reached(&self) -> bool {
        self.model.domain().all(|u| {
            self.model.binary_names().all(|relation| {
                self.model.successors(u.as_str(), relation).all(|v| {
                    self.s[u]
                        .iter()
                        .all(|w| !self.zig_exhausted_pure(w, v, relation))
                })
            })
        })
    }

    #[cfg(not(debug_assertions))]
    fn fixpoint_reached(&self) -> bool {
        true
    }
}

// ---------------------------------------------------------------------------
// Scripted schedules for the linear-order family

fn id_of(i: usize) -> ElementId {
    ElementId::new(i.to_string())
}

/// Phase i teaches every u <= n-i that n-i+1 cannot simulate it, using
/// v = w = n-i+1. Each phase conjoins a diamond of the previous F onto F
/// itself, so F(1) doubles n-1 times.
fn adversarial_script(n: usize) -> Vec<ScheduleChoice> {
    let mut script = Vec::new();
    for i in 1..n {
        let vw = n - i + 1;
        for u in (1..=n - i).rev() {
            script.push(ScheduleChoice {
                u: id_of(u),
                v: id_of(vw),
                w: id_of(vw),
                relation: "r".into(),
            });
        }
    }
    script
}

/// Refines each S(u) completely, from u = n-1 down to 2, always using the
/// already-final witness v = u+1; the duplicate-conjunct guard then keeps
/// F(u) at a single diamond. A final row for u = 1 with witnesses
/// v = w = n..2 collects one diamond per witness, so F(1) ends up
/// quadratic in n when expanded.
fn quadratic_script(n: usize) -> Vec<ScheduleChoice> {
    let mut script = Vec::new();
    for u in (2..n).rev() {
        for w in (u + 1..=n).rev() {
            script.push(ScheduleChoice {
                u: id_of(u),
                v: id_of(u + 1),
                w: id_of(w),
                relation: "r".into(),
            });
        }
    }
    for w in (2..=n).rev() {
        script.push(ScheduleChoice {
            u: id_of(1),
            v: id_of(w),
            w: id_of(w),
            relation: "r".into(),
        });
    }
    script
}
