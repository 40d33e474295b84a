//! The matching strategies. Each submodule implements one published
//! approach behind the [`CsmStrategy`](crate::ivm::CsmStrategy) trait.

pub mod composed;
pub mod graphflow;
pub mod iedyn;
pub mod incisomatch;
pub mod sjtree;
pub mod symbi;
pub mod turboflux;

use crate::enumerate::Semantics;
use crate::ivm::CsmStrategy;

/// Every strategy the harness can run, in reporting order.
pub const STRATEGY_NAMES: [&str; 9] = [
    "im", "gf", "sj", "dyn", "tf", "sym", "o-gf", "o-dyn", "o-tf",
];

/// Looks a strategy up by its short name. The semantics matters only to
/// strategies that cache partial results.
pub fn strategy_by_name(name: &str, semantics: Semantics) -> Option<Box<dyn CsmStrategy>> {
    Some(match name {
        "im" => Box::new(incisomatch::IncIsoMatch::new()),
        "gf" => Box::new(graphflow::Graphflow::new()),
        "sj" => Box::new(sjtree::SjTree::new(semantics)),
        "dyn" => Box::new(iedyn::IeDyn::new()),
        "tf" => Box::new(turboflux::TurboFlux::new()),
        "sym" => Box::new(symbi::SymBi::new()),
        "o-gf" => Box::new(composed::Composed::new(composed::OrderSource::Graphflow)),
        "o-dyn" => Box::new(composed::Composed::new(composed::OrderSource::TreeDfs)),
        "o-tf" => Box::new(composed::Composed::new(composed::OrderSource::PathCounts)),
        _ => return None,
    })
}
