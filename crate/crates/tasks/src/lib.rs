//! Synthetic tasks with exact oracles.
//!
//! Three families: associative recall over key/value pairs, state tracking (a
//! word folded over a finite monoid, e.g. parity or S5), and k-hop lookups
//! over a fact base. Instances are plain symbol data; natural-language
//! renderings live in [`render`] and are never parsed by the simulator.

mod error;
mod instance;
mod khop;
mod monoid;
mod partition;
mod recall;
pub mod record;
pub mod render;
mod state;

pub use error::TaskError;
pub use instance::{InstanceParams, TaskInstance, TaskKind};
pub use khop::{
    fact_token, gen_khop, oracle_khop, parse_fact_token, parse_query_token, parse_subquery_token, query_token,
    resolve_chain, subquery_token, Fact, KHopInstance, ENTITY_NAMES, RELATION_NAMES,
};
pub use monoid::{Associativity, Monoid};
pub use partition::partition;
pub use recall::{gen_recall, oracle_recall, pair_token, parse_pair_token, query_key, recall_query_token, RecallInstance};
pub use state::{gen_swap_word, gen_word, is_even_permutation, oracle_fold, StateTrackingInstance};

pub(crate) fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
