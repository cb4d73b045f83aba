use std::collections::HashSet;

use masim_core::Symbol;
use rand::seq::index::sample;
use rand::Rng;

use crate::TaskError;

/// Key/value pairs with a query naming exactly one of the keys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecallInstance {
    pairs: Vec<(Symbol, Symbol)>,
    query: Symbol,
}

impl RecallInstance {
    pub fn new(pairs: Vec<(Symbol, Symbol)>, query: Symbol) -> Result<Self, TaskError> {
        let mut keys = HashSet::new();
        for (k, _) in &pairs {
            if !keys.insert(k) {
                return Err(TaskError::InvalidInstance(format!("duplicate key {k}")));
            }
        }
        if !keys.contains(&query) {
            return Err(TaskError::InvalidInstance(format!("query {query} is not a key")));
        }
        Ok(RecallInstance { pairs, query })
    }

    pub fn pairs(&self) -> &[(Symbol, Symbol)] {
        &self.pairs
    }

    pub fn query(&self) -> &Symbol {
        &self.query
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }
}

/// `n` distinct keys drawn from `0..alphabet_size`, values uniform over the
/// same range, query uniform over the keys.
pub fn gen_recall(n: usize, alphabet_size: usize, seed: u64) -> Result<RecallInstance, TaskError> {
    if n == 0 || alphabet_size < n {
        return Err(TaskError::AlphabetTooSmall { n, alphabet: alphabet_size });
    }
    let mut rng = crate::rng(seed);
    let keys = sample(&mut rng, alphabet_size, n).into_vec();
    let pairs: Vec<(Symbol, Symbol)> = keys
        .iter()
        .map(|&k| (Symbol::new(k.to_string()), Symbol::new(rng.random_range(0..alphabet_size).to_string())))
        .collect();
    let query = pairs[rng.random_range(0..n)].0.clone();
    RecallInstance::new(pairs, query)
}

pub fn oracle_recall(inst: &RecallInstance) -> Symbol {
    inst.pairs
        .iter()
        .find(|(k, _)| *k == inst.query)
        .map(|(_, v)| v.clone())
        .expect("instance invariant: query is a key")
}

/// Chunk token for one pair, `key:value`.
pub fn pair_token(key: &Symbol, value: &Symbol) -> Symbol {
    Symbol::new(format!("{key}:{value}"))
}

/// Chunk token for the query, `key:?`.
pub fn recall_query_token(key: &Symbol) -> Symbol {
    Symbol::new(format!("{key}:?"))
}

/// Splits a `key:value` token. Query tokens come back with value `?`.
pub fn parse_pair_token(token: &Symbol) -> Option<(Symbol, Symbol)> {
    token.as_str().split_once(':').map(|(k, v)| (Symbol::new(k), Symbol::new(v)))
}

/// The key of a `key:?` token.
pub fn query_key(token: &Symbol) -> Option<Symbol> {
    token.as_str().strip_suffix(":?").map(Symbol::new)
}
