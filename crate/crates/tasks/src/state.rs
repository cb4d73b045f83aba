use std::sync::Arc;

use masim_core::Symbol;
use rand::Rng;

use crate::{Monoid, TaskError};

/// A word over a monoid; the task is its product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateTrackingInstance {
    monoid: Arc<Monoid>,
    word: Vec<usize>,
}

impl StateTrackingInstance {
    pub fn new(monoid: Arc<Monoid>, word: Vec<usize>) -> Result<Self, TaskError> {
        if let Some(&x) = word.iter().find(|&&x| x >= monoid.size()) {
            return Err(TaskError::InvalidInstance(format!("word entry {x} is not an element")));
        }
        Ok(StateTrackingInstance { monoid, word })
    }

    /// Parses element names, e.g. `"11100100"` chars for parity.
    pub fn from_names<'a>(monoid: Arc<Monoid>, names: impl IntoIterator<Item = &'a str>) -> Result<Self, TaskError> {
        let word = names
            .into_iter()
            .map(|s| monoid.index_of(s).ok_or_else(|| TaskError::InvalidInstance(format!("unknown element {s}"))))
            .collect::<Result<_, _>>()?;
        StateTrackingInstance::new(monoid, word)
    }

    /// Parity instance from a bit string such as `"1011"`.
    pub fn parity_bits(bits: &str) -> Result<Self, TaskError> {
        let names: Vec<String> = bits.chars().map(String::from).collect();
        Self::from_names(Arc::new(Monoid::parity()), names.iter().map(String::as_str))
    }

    pub fn monoid(&self) -> &Arc<Monoid> {
        &self.monoid
    }

    pub fn word(&self) -> &[usize] {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        self.word.iter().map(|&x| self.monoid.element(x).clone()).collect()
    }
}

pub fn oracle_fold(inst: &StateTrackingInstance) -> usize {
    inst.monoid.fold(inst.word.iter().copied())
}

/// `n` elements drawn i.i.d. uniformly from the carrier.
pub fn gen_word(monoid: Arc<Monoid>, n: usize, seed: u64) -> StateTrackingInstance {
    let mut rng = crate::rng(seed);
    let size = monoid.size();
    let word = (0..n).map(|_| rng.random_range(0..size)).collect();
    StateTrackingInstance { monoid, word }
}

/// S5 word of random ball swaps, each recorded as its transposition. With
/// `force_even` an odd count is bumped by one so the product lies in A5.
pub fn gen_swap_word(swaps: usize, seed: u64, force_even: bool) -> StateTrackingInstance {
    let monoid = Monoid::shared_s5();
    let count = if force_even && swaps % 2 == 1 { swaps + 1 } else { swaps };
    let mut rng = crate::rng(seed);
    let word = (0..count)
        .map(|_| {
            let x = rng.random_range(1..=5u8);
            let mut y = rng.random_range(1..=4u8);
            if y >= x {
                y += 1;
            }
            let mut p: Vec<u8> = (1..=5).collect();
            p.swap((x - 1) as usize, (y - 1) as usize);
            let name: String = p.iter().map(|d| char::from(b'0' + d)).collect();
            monoid.index_of(&name).expect("transposition is in S5")
        })
        .collect();
    StateTrackingInstance { monoid, word }
}

/// Sign test for an S5 element written in one-line notation.
pub fn is_even_permutation(name: &str) -> Option<bool> {
    let p: Vec<u32> = name.chars().map(|c| c.to_digit(10)).collect::<Option<_>>()?;
    let mut inversions = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    Some(inversions % 2 == 0)
}

