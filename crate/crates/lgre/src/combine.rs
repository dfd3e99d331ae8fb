//! The combined strategy: quotient the scene by mutual similarity, then
//! run the graph search on the (never larger) quotient.
//!
//! Two elements that simulate each other are indistinguishable in the
//! logic, so they can share a single node without changing which formulas
//! hold where. Descriptions computed on the quotient lift back: an element
//! satisfies a formula in the original scene iff its class does in the
//! quotient. A target whose class is not a singleton has no referring
//! expression at all, which the pipeline reports without searching.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::gre_graph::{make_re, CostFunction, GraphError, GraphRe};
use crate::gre_sim::{compute_gre, GreError, Scheduler};
use crate::logic::{DlFormula, Language};
use crate::model::{ElementId, ModelError, RelationalModel};
use crate::simulation::{maximal_simulation, SimError, SimOptions};

#[derive(Debug, Error)]
pub enum CombineError {
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Refinement(#[from] GreError),
}

/// A scene quotiented by mutual similarity for a fixed language.
///
/// Each class is named after its lexicographically least member, and
/// relations lift pointwise. For EL and ELAN the refinement run that
/// produced the classes also produced referring expressions; those are
/// kept so callers can start from them and only fall back to the graph
/// search when they want a cheaper one.
pub struct MinimizedScene {
    language: Language,
    quotient: RelationalModel,
    class_of: BTreeMap<ElementId, ElementId>,
    refinement_res: BTreeMap<ElementId, DlFormula>,
}

impl MinimizedScene {
    /// The quotient model. Its elements are class names.
    pub fn model(&self) -> &RelationalModel {
        &self.quotient
    }

    pub fn language(&self) -> Language {
        self.language
    }

    /// The class (an element of the quotient) containing `element`.
    pub fn class_of(&self, element: &str) -> Option<&ElementId> {
        self.class_of.get(element)
    }

    /// The original elements making up `element`'s class.
    pub fn class_members(&self, element: &str) -> BTreeSet<ElementId> {
        let Some(class) = self.class_of(element) else {
            return BTreeSet::new();
        };
        self.class_of
            .iter()
            .filter(|(_, c)| *c == class)
            .map(|(e, _)| e.clone())
            .collect()
    }

    pub fn class_count(&self) -> usize {
        self.quotient.domain_len()
    }

    /// The full element-to-class map.
    pub fn classes(&self) -> &BTreeMap<ElementId, ElementId> {
        &self.class_of
    }

    /// The referring expression the refinement phase computed for
    /// `element`, if it computed one. Populated for EL and ELAN only; the
    /// formula already denotes exactly `{element}` in the original scene,
    /// so callers may use it as-is and treat the graph search as an
    /// optional minimization step.
    pub fn refinement_re(&self, element: &str) -> Option<&DlFormula> {
        self.refinement_res.get(element)
    }
}

/// Quotients `scene` by mutual similarity in `lang`.
///
/// EL and ELAN classes come from a refinement run, which also yields the
/// cached referring expressions. ALC classes come from the refinement
/// closure alone, and EPFOL/FOL fall back to pairwise queries under the
/// brute-force cap in `opts`.
pub fn minimize(
    scene: &RelationalModel,
    lang: Language,
    opts: &SimOptions,
) -> Result<MinimizedScene, CombineError> {
    let mut refinement_res = BTreeMap::new();
    let simulates: BTreeSet<(ElementId, ElementId)> = match lang {
        Language::El | Language::Elan => {
            let run = compute_gre(scene, lang, &Scheduler::Fifo)?;
            for v in scene.domain() {
                if let Some(phi) = crate::gre_sim::re_for(&run.state, v.as_str())? {
                    refinement_res.insert(v.clone(), phi);
                }
            }
            run.state
                .simulator_sets()
                .iter()
                .flat_map(|(v, s)| s.iter().map(move |u| (v.clone(), u.clone())))
                .collect()
        }
        _ => maximal_simulation(scene, scene, lang, opts)?
            .pairs()
            .iter()
            .cloned()
            .collect(),
    };

    // Mutual similarity is the symmetric core of a preorder, hence an
    // equivalence; collecting each element's block directly is sound.
    let mut blocks: BTreeSet<BTreeSet<ElementId>> = BTreeSet::new();
    for u in scene.domain() {
        let block = scene
            .domain()
            .filter(|v| {
                simulates.contains(&(u.clone(), (*v).clone()))
                    && simulates.contains(&((*v).clone(), u.clone()))
            })
            .cloned()
            .collect();
        blocks.insert(block);
    }
    let blocks: Vec<BTreeSet<ElementId>> = blocks.into_iter().collect();
    let (quotient, class_of) = scene.quotient(&blocks)?;
    Ok(MinimizedScene {
        language: lang,
        quotient,
        class_of,
        refinement_res,
    })
}

/// Describes `target` by searching the minimized scene instead of the
/// original. Returns `None` immediately when the target's class holds
/// more than one element: nothing in the language can tell mutually
/// similar elements apart. Otherwise the graph search runs on the
/// quotient, and the resulting formula denotes exactly `{target}` back in
/// `scene`.
pub fn describe_via_minimization(
    scene: &RelationalModel,
    target: &str,
    lang: Language,
    cost: &dyn CostFunction,
    opts: &SimOptions,
) -> Result<Option<GraphRe>, CombineError> {
    if scene.element(target).is_none() {
        return Err(CombineError::UnknownElement(target.to_string()));
    }
    let minimized = minimize(scene, lang, opts)?;
    if minimized.class_members(target).len() > 1 {
        return Ok(None);
    }
    let class = minimized.class_of(target).expect("target is in the domain");
    let re = make_re(minimized.model(), class.as_str(), lang, cost)?;
    if let Some(re) = &re {
        debug_assert_eq!(
            re.formula
                .extension(scene)
                .expect("the scene interprets every symbol of its quotient"),
            BTreeSet::from([scene.element(target).unwrap().clone()]),
            "descriptions must lift from the quotient to the scene"
        );
    }
    Ok(re)
}
