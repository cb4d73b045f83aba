use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use masim_core::Symbol;

use crate::TaskError;

/// How associativity is established when building a [`Monoid`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Associativity {
    /// Check every triple. Only allowed up to [`Monoid::MAX_VERIFIED`] elements.
    Verify,
    /// The caller vouches for associativity (required for larger carriers).
    Assume,
}

/// A finite monoid given by its composition table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monoid {
    name: String,
    elements: Vec<Symbol>,
    identity: usize,
    table: Vec<usize>,
    index: HashMap<Symbol, usize>,
}

impl Monoid {
    pub const MAX_VERIFIED: usize = 128;

    /// `table[a * n + b]` is `a . b`.
    pub fn new(
        name: impl Into<String>,
        elements: Vec<Symbol>,
        identity: usize,
        table: Vec<usize>,
        associativity: Associativity,
    ) -> Result<Self, TaskError> {
        let n = elements.len();
        let bad = |m: String| Err(TaskError::InvalidMonoid(m));
        if n == 0 {
            return bad("empty carrier".into());
        }
        if table.len() != n * n {
            return bad(format!("table has {} entries, expected {}", table.len(), n * n));
        }
        if let Some(x) = table.iter().find(|&&x| x >= n) {
            return bad(format!("table entry {x} is not an element"));
        }
        if identity >= n {
            return bad(format!("identity {identity} is not an element"));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, e) in elements.iter().enumerate() {
            if index.insert(e.clone(), i).is_some() {
                return bad(format!("duplicate element name {e}"));
            }
        }
        for a in 0..n {
            if table[identity * n + a] != a || table[a * n + identity] != a {
                return bad(format!("identity does not fix element {a}"));
            }
        }
        match associativity {
            Associativity::Verify if n > Self::MAX_VERIFIED => {
                return bad(format!("{n} elements is too many to verify; supply Associativity::Assume"));
            }
            Associativity::Verify => {
                for a in 0..n {
                    for b in 0..n {
                        let ab = table[a * n + b];
                        for c in 0..n {
                            if table[ab * n + c] != table[a * n + table[b * n + c]] {
                                return bad(format!("({a}.{b}).{c} != {a}.({b}.{c})"));
                            }
                        }
                    }
                }
            }
            Associativity::Assume => {}
        }
        Ok(Monoid { name: name.into(), elements, identity, table, index })
    }

    /// Z/2 under XOR, elements `0` and `1`.
    pub fn parity() -> Self {
        Monoid::new("parity", vec!["0".into(), "1".into()], 0, vec![0, 1, 1, 0], Associativity::Verify)
            .expect("parity table is a monoid")
    }

    /// Permutations of five balls. An element is written in one-line notation,
    /// `p1p2p3p4p5`, meaning ball `i` sits in bin `p_i`. Composition
    /// `(a . b)(i) = a(b(i))` matches applying the swaps of `a`, then those of `b`.
    pub fn s5() -> Self {
        let perms = permutations(5);
        let n = perms.len();
        let pos: HashMap<Vec<u8>, usize> = perms.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let mut table = vec![0; n * n];
        for (a, pa) in perms.iter().enumerate() {
            for (b, pb) in perms.iter().enumerate() {
                let c: Vec<u8> = pb.iter().map(|&x| pa[(x - 1) as usize]).collect();
                table[a * n + b] = pos[&c];
            }
        }
        let names = perms.iter().map(|p| Symbol::new(p.iter().map(|d| char::from(b'0' + d)).collect::<String>())).collect();
        Monoid::new("s5", names, 0, table, Associativity::Verify).expect("S5 table is a monoid")
    }

    /// Process-wide copy of [`Monoid::parity`].
    pub fn shared_parity() -> Arc<Monoid> {
        static CELL: OnceLock<Arc<Monoid>> = OnceLock::new();
        CELL.get_or_init(|| Arc::new(Monoid::parity())).clone()
    }

    /// Process-wide copy of [`Monoid::s5`], verified once.
    pub fn shared_s5() -> Arc<Monoid> {
        static CELL: OnceLock<Arc<Monoid>> = OnceLock::new();
        CELL.get_or_init(|| Arc::new(Monoid::s5())).clone()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Symbol] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Symbol {
        &self.elements[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn compose(&self, a: usize, b: usize) -> usize {
        self.table[a * self.elements.len() + b]
    }

    /// Left fold from the identity.
    pub fn fold(&self, word: impl IntoIterator<Item = usize>) -> usize {
        word.into_iter().fold(self.identity, |acc, x| self.compose(acc, x))
    }

    /// Composes named elements; `None` if any name is unknown.
    pub fn compose_names<'a>(&self, names: impl IntoIterator<Item = &'a Symbol>) -> Option<Symbol> {
        let mut acc = self.identity;
        for s in names {
            acc = self.compose(acc, self.index_of(s.as_str())?);
        }
        Some(self.elements[acc].clone())
    }
}

/// All permutations of `1..=k` in lexicographic order.
fn permutations(k: u8) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur: Vec<u8> = (1..=k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..cur.len() - 1).rev().find(|&i| cur[i] < cur[i + 1]) else {
            return out;
        };
        let j = (i + 1..cur.len()).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
}
