//! Fixtures shared by the kernel benchmarks.

use deak_core::corpus::{self, Tag};
use deak_core::{builtin_deak_prime, Calculus, ProofTree};

/// Composed cuts for every completeness entry, each with its calculus.
pub fn composed_cuts() -> Vec<(String, ProofTree, Calculus)> {
    corpus::list()
        .into_iter()
        .filter(|e| e.has_tag(Tag::Completeness))
        .filter_map(|e| {
            let cut = e.composed_cut().ok()??;
            let calc = builtin_deak_prime(&e.decls().ok()?, true);
            Some((e.id.to_string(), cut, calc))
        })
        .collect()
}

/// The calculus over the shared corpus declarations.
pub fn corpus_calculus() -> Calculus {
    builtin_deak_prime(&corpus::base_decls(), true)
}
