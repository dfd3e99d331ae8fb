//! Referring-expression generation by branch-and-bound search over
//! description graphs, instantiated for EPFOL and EL.
//!
//! A description graph pairs a small model H with a mapping f into the
//! scene G and a distinguished root. The search grows H one fact at a
//! time, always copying facts from G (or, for EL, from its unraveling),
//! and stops when no non-target element of G can simulate the root. The
//! cheapest such H under a monotone cost function is then realized as a
//! formula: an anchored existential description for EPFOL, a rooted tree
//! formula for EL.
//!
//! Termination: EPFOL extensions strictly add facts present in G, so the
//! recursion is finite. EL extensions unravel cycles indefinitely, so the
//! driver explores budgets in increasing cost order (which subsumes
//! breadth-first exploration of the unraveling) and additionally bounds
//! the tree depth by |domain of G| squared; a target whose distractors
//! survive to that depth has none at any depth.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use thiserror::Error;

use crate::logic::{DlFormula, EvalError, FoFormula, Formula, Language, Var};
use crate::model::{ElementId, ModelError, RelationalModel};
use crate::simulation::{similarity_query, simulator_set, SimError, SimOptions};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph search supports epfol and el, not {0}")]
    UnsupportedLanguage(Language),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("description graph is not a tree: {0}")]
    NotATree(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A candidate description: a model `H`, its anchor mapping `f` into the
/// scene, and a distinguished root node (the first node ever inserted).
/// Every fact of `H` maps to a fact of the scene under `f`.
#[derive(Clone, Debug)]
pub struct DescriptionGraph {
    h: RelationalModel,
    /// Insertion order of H's nodes; `order[0]` is the root.
    order: Vec<ElementId>,
    f: BTreeMap<ElementId, ElementId>,
}

impl DescriptionGraph {
    /// A single bare node named after the target itself; the mapping is
    /// the identity. Extensions keep it so, making H a subgraph of the
    /// scene (the EPFOL instantiation).
    pub fn subgraph_seed(g: &RelationalModel, target: &str) -> Result<Self, GraphError> {
        let target = g
            .element(target)
            .ok_or_else(|| GraphError::UnknownElement(target.to_string()))?
            .clone();
        Ok(DescriptionGraph {
            h: RelationalModel::assemble(
                BTreeSet::from([target.clone()]),
                BTreeMap::new(),
                BTreeMap::new(),
            ),
            order: vec![target.clone()],
            f: BTreeMap::from([(target.clone(), target)]),
        })
    }

    /// A single bare node `h0` mapped to the target. Extensions add fresh
    /// nodes only, keeping H a tree (the EL instantiation).
    pub fn tree_seed(g: &RelationalModel, target: &str) -> Result<Self, GraphError> {
        let target = g
            .element(target)
            .ok_or_else(|| GraphError::UnknownElement(target.to_string()))?
            .clone();
        let root = ElementId::new("h0");
        Ok(DescriptionGraph {
            h: RelationalModel::assemble(
                BTreeSet::from([root.clone()]),
                BTreeMap::new(),
                BTreeMap::new(),
            ),
            order: vec![root.clone()],
            f: BTreeMap::from([(root, target)]),
        })
    }

    pub fn graph(&self) -> &RelationalModel {
        &self.h
    }

    /// Nodes in insertion order; the first is the root.
    pub fn nodes(&self) -> &[ElementId] {
        &self.order
    }

    pub fn root(&self) -> &ElementId {
        &self.order[0]
    }

    pub fn mapping(&self) -> &BTreeMap<ElementId, ElementId> {
        &self.f
    }

    pub fn image(&self, node: &str) -> Option<&ElementId> {
        self.f.get(node)
    }

    /// The scene element the root describes.
    pub fn target(&self) -> &ElementId {
        &self.f[self.root()]
    }

    /// True iff every fact of H maps to a fact of `g` under the mapping
    /// and the mapping is total on H's domain.
    pub fn is_consistent_with(&self, g: &RelationalModel) -> bool {
        self.h.domain().all(|u| self.f.contains_key(u))
            && self.h.unary_names().all(|p| {
                self.h
                    .unary_members(p)
                    .unwrap()
                    .iter()
                    .all(|u| g.unary_holds(p, self.f[u].as_str()))
            })
            && self.h.binary_names().all(|r| {
                self.h
                    .binary_pairs(r)
                    .all(|(u, w)| g.binary_holds(r, self.f[u].as_str(), self.f[w].as_str()))
            })
    }

    /// True iff H is a tree rooted at the root node: no edge enters the
    /// root, every other node has exactly one incoming edge, and all nodes
    /// are reachable from the root.
    pub fn is_tree(&self) -> bool {
        let in_degree = |node: &ElementId| -> usize {
            self.h
                .binary_names()
                .map(|r| self.h.predecessors(node.as_str(), r).count())
                .sum()
        };
        if in_degree(self.root()) != 0 {
            return false;
        }
        if self.order.iter().skip(1).any(|n| in_degree(n) != 1) {
            return false;
        }
        self.reachable_from_root() == self.order.len()
    }

    fn reachable_from_root(&self) -> usize {
        let mut seen = BTreeSet::from([self.root().clone()]);
        let mut queue = VecDeque::from([self.root().clone()]);
        while let Some(u) = queue.pop_front() {
            for r in self.h.binary_names() {
                for w in self.h.successors(u.as_str(), r) {
                    if seen.insert(w.clone()) {
                        queue.push_back(w.clone());
                    }
                }
            }
        }
        seen.len()
    }

    /// Depth of each node below the root; meaningful for trees.
    pub fn node_depths(&self) -> BTreeMap<ElementId, usize> {
        let mut depths = BTreeMap::from([(self.root().clone(), 0)]);
        let mut queue = VecDeque::from([self.root().clone()]);
        while let Some(u) = queue.pop_front() {
            let next = depths[&u] + 1;
            for r in self.h.binary_names() {
                for w in self.h.successors(u.as_str(), r) {
                    if !depths.contains_key(w) {
                        depths.insert(w.clone(), next);
                        queue.push_back(w.clone());
                    }
                }
            }
        }
        depths
    }

    /// A compact listing of H's facts for traces and search-state keys.
    pub fn fact_summary(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        for p in self.h.unary_names() {
            for u in self.h.unary_members(p).unwrap() {
                parts.push(format!("{p}({u})"));
            }
        }
        for r in self.h.binary_names() {
            for (u, w) in self.h.binary_pairs(r) {
                parts.push(format!("{r}({u},{w})"));
            }
        }
        parts.join(", ")
    }

    fn with_unary_fact(&self, p: &str, node: &ElementId) -> DescriptionGraph {
        let mut unary: BTreeMap<String, BTreeSet<ElementId>> = self
            .h
            .unary_names()
            .map(|name| (name.to_string(), self.h.unary_members(name).unwrap().clone()))
            .collect();
        unary.entry(p.to_string()).or_default().insert(node.clone());
        DescriptionGraph {
            h: RelationalModel::assemble(
                self.h.domain().cloned().collect(),
                unary,
                self.binary_facts(),
            ),
            order: self.order.clone(),
            f: self.f.clone(),
        }
    }

    /// Adds the edge `r(from, to)`, inserting `to` as a new node mapped to
    /// `image` if it is not present yet.
    fn with_binary_fact(
        &self,
        r: &str,
        from: &ElementId,
        to: &ElementId,
        image: &ElementId,
    ) -> DescriptionGraph {
        let mut domain: BTreeSet<ElementId> = self.h.domain().cloned().collect();
        let mut order = self.order.clone();
        let mut f = self.f.clone();
        if domain.insert(to.clone()) {
            order.push(to.clone());
            f.insert(to.clone(), image.clone());
        }
        let mut binary = self.binary_facts();
        binary
            .entry(r.to_string())
            .or_default()
            .push((from.clone(), to.clone()));
        let unary = self
            .h
            .unary_names()
            .map(|name| (name.to_string(), self.h.unary_members(name).unwrap().clone()))
            .collect();
        DescriptionGraph {
            h: RelationalModel::assemble(domain, unary, binary),
            order,
            f,
        }
    }

    fn binary_facts(&self) -> BTreeMap<String, Vec<(ElementId, ElementId)>> {
        self.h
            .binary_names()
            .map(|r| {
                (
                    r.to_string(),
                    self.h
                        .binary_pairs(r)
                        .map(|(u, w)| (u.clone(), w.clone()))
                        .collect(),
                )
            })
            .collect()
    }
}

/// Prices a description graph. Branch-and-bound pruning is sound only for
/// monotone costs: extending H by one fact must never decrease the cost.
pub trait CostFunction {
    fn cost(&self, dg: &DescriptionGraph) -> u64;
}

/// The default cost: number of nodes plus number of facts.
#[derive(Clone, Copy, Debug, Default)]
pub struct AtomCount;

impl CostFunction for AtomCount {
    fn cost(&self, dg: &DescriptionGraph) -> u64 {
        dg.graph().model_size() as u64
    }
}

/// The scene elements other than the target that still simulate the root
/// of `dg`, i.e. the elements the current description fails to exclude.
pub fn distractors(
    g: &RelationalModel,
    dg: &DescriptionGraph,
    lang: Language,
    opts: &SimOptions,
) -> Result<BTreeSet<ElementId>, GraphError> {
    let target = dg.target();
    let mut out = BTreeSet::new();
    for n in g.domain() {
        if n != target && similarity_query(&dg.h, dg.root().as_str(), g, n.as_str(), lang, opts)? {
            out.insert(n.clone());
        }
    }
    Ok(out)
}

/// All one-fact extensions of a subgraph-style description: a unary fact
/// of G missing from H, or an edge of G leaving a node of H (possibly
/// pulling its endpoint in as a new node). Enumeration order is fixed:
/// unary facts by (node insertion index, relation), then edges by (node
/// insertion index, relation, endpoint), so ties in the search break
/// deterministically.
pub fn extend_epfol(g: &RelationalModel, dg: &DescriptionGraph) -> Vec<DescriptionGraph> {
    let mut out = Vec::new();
    for u in &dg.order {
        for p in g.unary_names() {
            if g.unary_holds(p, u.as_str()) && !dg.h.unary_holds(p, u.as_str()) {
                out.push(dg.with_unary_fact(p, u));
            }
        }
    }
    for u in &dg.order {
        for r in g.binary_names() {
            for w in g.successors(u.as_str(), r) {
                if !dg.h.binary_holds(r, u.as_str(), w.as_str()) {
                    out.push(dg.with_binary_fact(r, u, w, w));
                }
            }
        }
    }
    out
}

/// All one-fact extensions of a tree-style description: a unary fact
/// holding in G at a node's image, or an edge of G leaving a node's image
/// whose endpoint no existing child already represents; the edge goes to
/// a fresh node, so the result is again a tree (an initial piece of G's
/// unraveling). Enumeration order as in [`extend_epfol`].
pub fn extend_el(g: &RelationalModel, dg: &DescriptionGraph) -> Vec<DescriptionGraph> {
    let mut out = Vec::new();
    for u in &dg.order {
        let gu = dg.f[u].as_str();
        for p in g.unary_names() {
            if g.unary_holds(p, gu) && !dg.h.unary_holds(p, u.as_str()) {
                out.push(dg.with_unary_fact(p, u));
            }
        }
    }
    for u in &dg.order {
        let gu = dg.f[u].as_str();
        for r in g.binary_names() {
            for target in g.successors(gu, r) {
                let represented = dg
                    .h
                    .successors(u.as_str(), r)
                    .any(|child| &dg.f[child] == target);
                if !represented {
                    let fresh = ElementId::new(format!("h{}", dg.order.len()));
                    out.push(dg.with_binary_fact(r, u, &fresh, target));
                }
            }
        }
    }
    out
}

/// Realizes a subgraph-style description as an anchored existential
/// formula: x1 names the root, the remaining nodes get x2.. in insertion
/// order, and the matrix conjoins all pairwise inequalities, then H's
/// binary facts, then its unary facts.
pub fn build_formula_epfol(dg: &DescriptionGraph) -> FoFormula {
    let index: BTreeMap<&ElementId, u32> = dg
        .order
        .iter()
        .enumerate()
        .map(|(i, e)| (e, i as u32 + 1))
        .collect();
    let var = |e: &ElementId| Var::new(index[e]);
    let n = dg.order.len() as u32;

    let mut parts: Vec<FoFormula> = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            parts.push(FoFormula::neq(Var::new(i), Var::new(j)));
        }
    }
    for u in &dg.order {
        for r in dg.h.binary_names() {
            for w in dg.h.successors(u.as_str(), r) {
                parts.push(FoFormula::rel_atom(r, vec![var(u), var(w)]));
            }
        }
    }
    for u in &dg.order {
        for p in dg.h.unary_names() {
            if dg.h.unary_holds(p, u.as_str()) {
                parts.push(FoFormula::rel_atom(p, vec![var(u)]));
            }
        }
    }
    let mut phi = FoFormula::and_all(parts);
    for i in (2..=n).rev() {
        phi = FoFormula::exists(Var::new(i), phi);
    }
    phi
}

/// Realizes a tree-style description as a rooted formula: at each node,
/// the unary facts as atoms, then one `some r . _` per child edge.
pub fn build_formula_el(dg: &DescriptionGraph) -> Result<DlFormula, GraphError> {
    if !dg.is_tree() {
        return Err(GraphError::NotATree(format!(
            "rooted at {}: [{}]",
            dg.root(),
            dg.fact_summary()
        )));
    }
    Ok(realize_tree(dg, dg.root()))
}

fn realize_tree(dg: &DescriptionGraph, node: &ElementId) -> DlFormula {
    let mut parts: Vec<DlFormula> = dg
        .h
        .unary_names()
        .filter(|p| dg.h.unary_holds(p, node.as_str()))
        .map(DlFormula::atom)
        .collect();
    for r in dg.h.binary_names() {
        for child in dg.h.successors(node.as_str(), r) {
            parts.push(DlFormula::exists(r, realize_tree(dg, child)));
        }
    }
    DlFormula::and_all(parts)
}

/// A successful search outcome: the realized formula, its witnessing
/// graph, and the graph's cost.
#[derive(Clone, Debug)]
pub struct GraphRe {
    pub formula: Formula,
    pub graph: DescriptionGraph,
    pub cost: u64,
}

#[derive(Clone, Debug)]
pub struct GraphOptions {
    pub sim: SimOptions,
    /// Record the search tree as indented text in the outcome.
    pub trace: bool,
}

#[allow(clippy::derivable_impls)]
impl Default for GraphOptions {
    fn default() -> Self {
        GraphOptions {
            sim: SimOptions::default(),
            trace: false,
        }
    }
}

/// [`make_re`] plus the optional search trace.
#[derive(Debug)]
pub struct GraphOutcome {
    pub re: Option<GraphRe>,
    pub trace: Vec<String>,
}

/// Searches for a minimal-cost description of `target` in the chosen
/// fragment and realizes it as a formula. Returns `None` exactly when the
/// target's simulator set is not the singleton, in which case no formula
/// of the fragment can tell the target apart.
pub fn make_re(
    g: &RelationalModel,
    target: &str,
    lang: Language,
    cost: &dyn CostFunction,
) -> Result<Option<GraphRe>, GraphError> {
    Ok(make_re_with(g, target, lang, cost, &GraphOptions::default())?.re)
}

pub fn make_re_with(
    g: &RelationalModel,
    target: &str,
    lang: Language,
    cost: &dyn CostFunction,
    opts: &GraphOptions,
) -> Result<GraphOutcome, GraphError> {
    if !matches!(lang, Language::El | Language::Epfol) {
        return Err(GraphError::UnsupportedLanguage(lang));
    }
    let target_id = g
        .element(target)
        .ok_or_else(|| GraphError::UnknownElement(target.to_string()))?
        .clone();

    let mut search = Search {
        g,
        lang,
        cost,
        sim: opts.sim.clone(),
        max_depth: g.domain_len() * g.domain_len(),
        budget: None,
        budget_hit: false,
        next_budget: None,
        best: None,
        seen: HashSet::new(),
        trace: if opts.trace { Some(Vec::new()) } else { None },
    };

    // Simulator sets decide existence outright; search only for witnesses.
    let simulators = simulator_set(g, target, lang, &opts.sim)?;
    if simulators.len() != 1 {
        search.log(0, || {
            format!(
                "no description exists: {} is simulated by {}",
                target_id,
                join(simulators.iter().filter(|s| **s != target_id))
            )
        });
        return Ok(GraphOutcome {
            re: None,
            trace: search.trace.unwrap_or_default(),
        });
    }

    match lang {
        Language::Epfol => {
            let seed = DescriptionGraph::subgraph_seed(g, target)?;
            search.find(seed, 0)?;
        }
        Language::El => {
            let seed = DescriptionGraph::tree_seed(g, target)?;
            let mut budget = cost.cost(&seed);
            loop {
                search.best = None;
                search.budget = Some(budget);
                search.budget_hit = false;
                search.next_budget = None;
                // A deeper budget must re-expand graphs whose children were
                // deferred last round.
                search.seen.clear();
                search.log(0, || format!("budget {budget}"));
                search.find(seed.clone(), 0)?;
                if search.best.is_some() || !search.budget_hit {
                    break;
                }
                // Monotone costs let the budget jump straight to the
                // cheapest branch deferred in this round.
                budget = search.next_budget.expect("a deferred branch was seen");
            }
        }
        _ => unreachable!(),
    }

    let (graph, cost) = search
        .best
        .take()
        .expect("a singleton simulator set guarantees a witness");
    let formula = match lang {
        Language::El => Formula::Dl(build_formula_el(&graph)?),
        _ => Formula::Fo(build_formula_epfol(&graph)),
    };
    let extension = formula.extension(g)?;
    assert!(
        extension.len() == 1 && extension.contains(&target_id),
        "realized formula must denote exactly the target"
    );
    Ok(GraphOutcome {
        re: Some(GraphRe {
            formula,
            graph,
            cost,
        }),
        trace: search.trace.unwrap_or_default(),
    })
}

struct Search<'a> {
    g: &'a RelationalModel,
    lang: Language,
    cost: &'a dyn CostFunction,
    sim: SimOptions,
    max_depth: usize,
    /// Cost ceiling for the current deepening round (EL only).
    budget: Option<u64>,
    budget_hit: bool,
    next_budget: Option<u64>,
    best: Option<(DescriptionGraph, u64)>,
    /// Canonical keys of graphs already expanded this round. Different
    /// insertion orders reach the same graph; expanding it once suffices.
    seen: HashSet<String>,
    trace: Option<Vec<String>>,
}

impl<'a> Search<'a> {
    fn log(&mut self, level: usize, line: impl FnOnce() -> String) {
        if let Some(trace) = &mut self.trace {
            trace.push(format!("{}{}", "  ".repeat(level), line()));
        }
    }

    fn find(&mut self, dg: DescriptionGraph, level: usize) -> Result<(), GraphError> {
        let c = self.cost.cost(&dg);
        if let Some((_, best_cost)) = &self.best {
            if *best_cost <= c {
                let best_cost = *best_cost;
                self.log(level, || format!("prune cost={c} (best {best_cost})"));
                return Ok(());
            }
        }
        if let Some(budget) = self.budget {
            if c > budget {
                self.budget_hit = true;
                self.next_budget = Some(self.next_budget.map_or(c, |b| b.min(c)));
                self.log(level, || format!("defer cost={c} (budget {budget})"));
                return Ok(());
            }
        }
        if !self.seen.insert(self.state_key(&dg)) {
            return Ok(());
        }
        let distractors = distractors(self.g, &dg, self.lang, &self.sim)?;
        self.log(level, || {
            format!(
                "visit cost={c} [{}] distractors={{{}}}",
                dg.fact_summary(),
                join(distractors.iter())
            )
        });
        if distractors.is_empty() {
            self.log(level, || format!("keep cost={c}"));
            self.best = Some((dg, c));
            return Ok(());
        }
        for ext in self.extensions(&dg) {
            self.find(ext, level + 1)?;
        }
        Ok(())
    }

    /// An insertion-order-independent key for `dg`. Identity-mapped
    /// subgraphs are determined by their fact set; trees are serialized
    /// with sibling subtrees sorted, images included (they steer growth).
    fn state_key(&self, dg: &DescriptionGraph) -> String {
        match self.lang {
            Language::Epfol => dg.fact_summary(),
            _ => tree_key(dg, dg.root()),
        }
    }

    fn extensions(&self, dg: &DescriptionGraph) -> Vec<DescriptionGraph> {
        match self.lang {
            Language::Epfol => extend_epfol(self.g, dg),
            _ => extend_el(self.g, dg)
                .into_iter()
                .filter(|ext| {
                    // Unary extensions keep the node set; edge extensions
                    // append one fresh node, which must respect the depth
                    // bound.
                    ext.order.len() == dg.order.len()
                        || ext.node_depths()[&ext.order[ext.order.len() - 1]] <= self.max_depth
                })
                .collect(),
        }
    }
}

fn tree_key(dg: &DescriptionGraph, node: &ElementId) -> String {
    let h = dg.graph();
    let atoms: Vec<&str> = h
        .unary_names()
        .filter(|p| h.unary_holds(p, node.as_str()))
        .collect();
    let mut kids: Vec<String> = Vec::new();
    for r in h.binary_names() {
        for child in h.successors(node.as_str(), r) {
            kids.push(format!("{r}>{}", tree_key(dg, child)));
        }
    }
    kids.sort();
    format!(
        "{}[{}]({})",
        dg.image(node.as_str()).expect("mapping is total"),
        atoms.join(","),
        kids.join(",")
    )
}

fn join<'e>(items: impl Iterator<Item = &'e ElementId>) -> String {
    items
        .map(ElementId::as_str)
        .collect::<Vec<_>>()
        .join(",")
}
