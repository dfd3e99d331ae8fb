//! Referring-expression generation over finite relational models.
//!
//! Given a model and a target element, the library computes a formula in a
//! chosen logic whose extension is exactly the target, or reports that no
//! such formula exists. Three routes are provided: simulation-set
//! refinement, branch-and-bound search over description graphs, and a
//! combined pipeline that first minimizes the model.

pub mod combine;
pub mod gre_graph;
pub mod gre_sim;
pub mod logic;
pub mod model;
pub mod simulation;

pub use combine::{describe_via_minimization, minimize, CombineError, MinimizedScene};
pub use gre_graph::{AtomCount, CostFunction, DescriptionGraph, GraphError, GraphRe};
pub use gre_sim::{GreError, GreRun, Scheduler, SimulationState};
pub use logic::{DlFormula, FoFormula, Formula, Language};
pub use model::{ElementId, ModelError, RelationalModel};
pub use simulation::{SimOptions, SimulationRelation};
