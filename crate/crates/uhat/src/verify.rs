use masim_core::Symbol;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{
    build_manager_network_with, build_recall_network_with, rightmost_argmax, uhat_select, RecallAlphabet,
    RecallOptions, UhatError,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyConfig {
    /// Largest pair count for recall networks.
    pub recall_n_max: usize,
    /// Largest token count for manager networks.
    pub manager_n_max: usize,
    pub instances: usize,
    pub select_rows: usize,
    pub seed: u64,
    pub options: RecallOptions,
}

impl VerifyConfig {
    pub fn new(n_max: usize, seed: u64) -> Self {
        VerifyConfig {
            recall_n_max: n_max,
            manager_n_max: n_max.min(32),
            instances: 100,
            select_rows: 10_000,
            seed,
            options: RecallOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Tally {
    pub checked: usize,
    pub failed: usize,
    /// First few failures, for the report.
    pub examples: Vec<String>,
}

impl Tally {
    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
            if self.examples.len() < 5 {
                self.examples.push(describe());
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub recall: Tally,
    pub manager: Tally,
    pub select: Tally,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.recall.failed == 0 && self.manager.failed == 0 && self.select.failed == 0
    }
}

/// Recall chunk of `n` pairs over `0..2n+2`; every fourth query is absent.
pub fn random_chunk(n: usize, rng: &mut ChaCha8Rng) -> (Vec<(Symbol, Symbol)>, Symbol) {
    let size = alphabet_size(n);
    let keys = sample(rng, size, n + 1).into_vec();
    let pairs: Vec<(Symbol, Symbol)> =
        keys[..n].iter().map(|&k| (Symbol::new(k.to_string()), Symbol::new(rng.random_range(0..size).to_string()))).collect();
    let query = if rng.random_range(0..4) == 0 { Symbol::new(keys[n].to_string()) } else { pairs[rng.random_range(0..n)].0.clone() };
    (pairs, query)
}

pub fn alphabet_size(n: usize) -> usize {
    2 * n + 2
}

/// Linear-scan recall on a chunk.
pub fn scan_recall(pairs: &[(Symbol, Symbol)], query: &Symbol) -> Symbol {
    pairs.iter().rev().find(|(k, _)| k == query).map_or_else(Symbol::not_found, |(_, v)| v.clone())
}

/// Builds and checks every network up to the configured sizes. J-L failures
/// abort; wrong answers and margin violations are counted.
pub fn verify(config: &VerifyConfig) -> Result<VerifyReport, UhatError> {
    let mut report = VerifyReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for n in 1..=config.recall_n_max {
        let alphabet = RecallAlphabet::numeric(alphabet_size(n));
        let net = build_recall_network_with(n, &alphabet, config.seed.wrapping_add(n as u64), config.options)?;
        for _ in 0..config.instances {
            let (pairs, query) = random_chunk(n, &mut rng);
            let expected = scan_recall(&pairs, &query);
            let got = net.run(&pairs, &query);
            report.recall.record(got.as_ref().ok() == Some(&expected), || {
                format!("recall n={n} query={query}: expected {expected}, got {got:?}")
            });
        }
    }
    for n in 1..=config.manager_n_max {
        let entities: Vec<Symbol> = (0..n.max(4)).map(|i| Symbol::new(format!("e{i}"))).collect();
        let net = build_manager_network_with(n, &entities, config.seed.wrapping_add(1000 + n as u64), config.options.jl)?;
        for pos in 0..n {
            for e in [0, entities.len() - 1] {
                let mut tokens = vec![Symbol::not_found(); n];
                tokens[pos] = entities[e].clone();
                let got = net.run(&tokens);
                report.manager.record(got.as_ref().ok() == Some(&entities[e]), || {
                    format!("manager n={n} position={pos}: expected {}, got {got:?}", entities[e])
                });
            }
        }
    }
    for _ in 0..config.select_rows {
        let len = rng.random_range(1..=10);
        let row: Vec<f64> = (0..len).map(|_| rng.random_range(0..4) as f64).collect();
        let brute = (0..len).filter(|&i| row[i..].iter().all(|&x| x <= row[i]) && row[..i].iter().all(|&x| x <= row[i])).max();
        let got = uhat_select(&row)?;
        let ok = brute == Some(rightmost_argmax(&row)?) && got.iter().sum::<f64>() == 1.0 && brute.is_some_and(|b| got[b] == 1.0);
        report.select.record(ok, || format!("select {row:?}: got {got:?}"));
    }
    Ok(report)
}
