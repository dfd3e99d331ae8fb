//! Shared fixtures and seeded generators for the integration suites.

#![allow(dead_code)]

use lgre::{DlFormula, RelationalModel};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn scene() -> RelationalModel {
    RelationalModel::from_text(include_str!("../data/scene-s.lgre")).unwrap()
}

/// A model over at most two unary relations (`p`, `q`) and one binary
/// relation (`r`), with `2..=max_n` elements.
pub fn random_model(rng: &mut ChaCha8Rng, max_n: usize) -> RelationalModel {
    let n = rng.random_range(2..=max_n);
    let names: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
    let unary = ["p", "q"].map(|p| {
        let members: Vec<&str> = names
            .iter()
            .filter(|_| rng.random_bool(0.4))
            .map(String::as_str)
            .collect();
        (p, members)
    });
    let mut pairs = Vec::new();
    for from in &names {
        for to in &names {
            if rng.random_bool(0.25) {
                pairs.push((from.as_str(), to.as_str()));
            }
        }
    }
    RelationalModel::new(names.iter().map(String::as_str), unary, [("r", pairs)]).unwrap()
}

/// Like [`random_model`] but with sparser edges. The optimal graph
/// search is exponential in the description size, and dense five-element
/// models can demand optimality proofs over millions of candidate trees;
/// suites that search every element of many models use this generator.
pub fn sparse_random_model(rng: &mut ChaCha8Rng, max_n: usize) -> RelationalModel {
    let n = rng.random_range(2..=max_n);
    let names: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
    let unary = ["p", "q"].map(|p| {
        let members: Vec<&str> = names
            .iter()
            .filter(|_| rng.random_bool(0.4))
            .map(String::as_str)
            .collect();
        (p, members)
    });
    let mut pairs = Vec::new();
    for from in &names {
        for to in &names {
            if rng.random_bool(0.15) {
                pairs.push((from.as_str(), to.as_str()));
            }
        }
    }
    RelationalModel::new(names.iter().map(String::as_str), unary, [("r", pairs)]).unwrap()
}

/// A negation-free concept over the vocabulary of [`random_model`].
pub fn random_el_formula(rng: &mut ChaCha8Rng, depth: u32) -> DlFormula {
    match rng.random_range(0..5u8) {
        0 => DlFormula::top(),
        1 | 2 => DlFormula::atom(if rng.random_bool(0.5) { "p" } else { "q" }),
        3 if depth > 0 => DlFormula::exists("r", random_el_formula(rng, depth - 1)),
        _ if depth > 0 => DlFormula::and(
            random_el_formula(rng, depth - 1),
            random_el_formula(rng, depth - 1),
        ),
        _ => DlFormula::atom("p"),
    }
}

/// Like [`random_el_formula`] but with negation in the mix.
pub fn random_dl_formula(rng: &mut ChaCha8Rng, depth: u32) -> DlFormula {
    if depth > 0 && rng.random_bool(0.2) {
        return DlFormula::not(random_dl_formula(rng, depth - 1));
    }
    match rng.random_range(0..5u8) {
        0 => DlFormula::top(),
        1 | 2 => DlFormula::atom(if rng.random_bool(0.5) { "p" } else { "q" }),
        3 if depth > 0 => DlFormula::exists("r", random_dl_formula(rng, depth - 1)),
        _ if depth > 0 => DlFormula::and(
            random_dl_formula(rng, depth - 1),
            random_dl_formula(rng, depth - 1),
        ),
        _ => DlFormula::atom("q"),
    }
}
