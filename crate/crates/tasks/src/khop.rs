use std::collections::{HashMap, HashSet};

use masim_core::Symbol;
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::TaskError;

/// Single-token person names, 25 male then 25 female.
pub const ENTITY_NAMES: [&str; 50] = [
    "John", "James", "Robert", "Michael", "William", "David", "Richard", "Joseph", "Thomas", "Charles", "Daniel",
    "Matthew", "Anthony", "Mark", "Paul", "Steven", "Andrew", "Kenneth", "Joshua", "Kevin", "Brian", "George",
    "Edward", "Ronald", "Timothy", "Mary", "Patricia", "Jennifer", "Linda", "Elizabeth", "Barbara", "Susan",
    "Jessica", "Sarah", "Karen", "Nancy", "Lisa", "Betty", "Margaret", "Sandra", "Ashley", "Kimberly", "Emily",
    "Donna", "Michelle", "Dorothy", "Carol", "Amanda", "Melissa", "Deborah",
];

/// Single-token relation names.
pub const RELATION_NAMES: [&str; 20] = [
    "boss", "instructor", "teacher", "mentor", "supervisor", "friend", "neighbor", "coach", "doctor", "lawyer",
    "manager", "partner", "roommate", "colleague", "tutor", "advisor", "landlord", "dentist", "barber", "accountant",
];

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fact {
    pub relation: Symbol,
    pub argument: Symbol,
    pub result: Symbol,
}

impl Fact {
    pub fn new(relation: impl Into<Symbol>, argument: impl Into<Symbol>, result: impl Into<Symbol>) -> Self {
        Fact { relation: relation.into(), argument: argument.into(), result: result.into() }
    }
}

/// Facts `relation(argument) = result` and a query `f_1(f_2(...f_k(x)))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KHopInstance {
    entities: Vec<Symbol>,
    relations: Vec<Symbol>,
    facts: Vec<Fact>,
    chain: Vec<Symbol>,
    start: Symbol,
}

impl KHopInstance {
    /// `chain` lists `f_1 .. f_k` outermost first; `f_k` is applied to `start` first.
    pub fn new(
        entities: Vec<Symbol>,
        relations: Vec<Symbol>,
        facts: Vec<Fact>,
        chain: Vec<Symbol>,
        start: Symbol,
    ) -> Result<Self, TaskError> {
        let bad = |m: String| Err(TaskError::InvalidInstance(m));
        if chain.is_empty() {
            return bad("query has no hops".into());
        }
        let mut keys = HashSet::new();
        for f in &facts {
            if !keys.insert((&f.relation, &f.argument)) {
                return bad(format!("two facts for {}({})", f.relation, f.argument));
            }
        }
        if resolve_chain(&facts, &chain, &start).is_none() {
            return bad("query chain does not resolve".into());
        }
        Ok(KHopInstance { entities, relations, facts, chain, start })
    }

    pub fn entities(&self) -> &[Symbol] {
        &self.entities
    }

    pub fn relations(&self) -> &[Symbol] {
        &self.relations
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn chain(&self) -> &[Symbol] {
        &self.chain
    }

    pub fn start(&self) -> &Symbol {
        &self.start
    }

    pub fn k(&self) -> usize {
        self.chain.len()
    }
}

/// Walks the chain innermost-out; `None` when a hop has no fact.
pub fn resolve_chain(facts: &[Fact], chain: &[Symbol], start: &Symbol) -> Option<Symbol> {
    let lookup: HashMap<(&Symbol, &Symbol), &Symbol> =
        facts.iter().map(|f| ((&f.relation, &f.argument), &f.result)).collect();
    let mut cur = start.clone();
    for rel in chain.iter().rev() {
        cur = (*lookup.get(&(rel, &cur))?).clone();
    }
    Some(cur)
}

pub fn oracle_khop(inst: &KHopInstance) -> Symbol {
    resolve_chain(&inst.facts, &inst.chain, &inst.start).expect("instance invariant: chain resolves")
}

fn names(base: &[&str], n: usize) -> Vec<Symbol> {
    (0..n)
        .map(|i| {
            let round = i / base.len();
            let name = base[i % base.len()];
            if round == 0 {
                Symbol::new(name)
            } else {
                Symbol::new(format!("{name}{}", round + 1))
            }
        })
        .collect()
}

/// Builds a resolvable `k`-hop chain over distinct entities, then pads with
/// uniformly drawn distractor facts on unused (relation, argument) pairs up to
/// `num_facts`, and shuffles.
pub fn gen_khop(
    num_facts: usize,
    k: usize,
    num_entities: usize,
    num_relations: usize,
    seed: u64,
) -> Result<KHopInstance, TaskError> {
    let infeasible = |m: String| Err(TaskError::Infeasible(m));
    if k == 0 || num_facts < k {
        return infeasible(format!("need 1 <= k <= num_facts, got k={k}, num_facts={num_facts}"));
    }
    if num_entities < k + 1 {
        return infeasible(format!("{num_entities} entities cannot form a chain of {k} distinct hops"));
    }
    if num_relations == 0 || num_entities * num_relations < num_facts {
        return infeasible(format!(
            "{num_entities} entities x {num_relations} relations cannot key {num_facts} distinct facts"
        ));
    }
    let entities = names(&ENTITY_NAMES, num_entities);
    let relations = names(&RELATION_NAMES, num_relations);
    let mut rng = crate::rng(seed);

    let path: Vec<usize> = sample(&mut rng, num_entities, k + 1).into_vec();
    let hops: Vec<usize> = (0..k).map(|_| rng.random_range(0..num_relations)).collect();
    let mut used: HashSet<(usize, usize)> = HashSet::new();
    let mut facts = Vec::with_capacity(num_facts);
    for r in 0..k {
        used.insert((hops[r], path[r]));
        facts.push(Fact::new(relations[hops[r]].clone(), entities[path[r]].clone(), entities[path[r + 1]].clone()));
    }
    let chain: Vec<Symbol> = hops.iter().rev().map(|&h| relations[h].clone()).collect();

    while facts.len() < num_facts {
        let rel = rng.random_range(0..num_relations);
        let arg = rng.random_range(0..num_entities);
        if used.insert((rel, arg)) {
            let res = rng.random_range(0..num_entities);
            facts.push(Fact::new(relations[rel].clone(), entities[arg].clone(), entities[res].clone()));
        }
    }
    facts.shuffle(&mut rng);
    let start = entities[path[0]].clone();
    KHopInstance::new(entities, relations, facts, chain, start)
}

/// Chunk token for a fact, `relation(argument)=result`.
pub fn fact_token(f: &Fact) -> Symbol {
    Symbol::new(format!("{}({})={}", f.relation, f.argument, f.result))
}

pub fn parse_fact_token(token: &Symbol) -> Option<Fact> {
    let (lhs, result) = token.as_str().split_once('=')?;
    let (relation, argument) = parse_application(lhs)?;
    Some(Fact::new(relation, argument, result))
}

/// A single hop to resolve, `relation(argument)?`.
pub fn subquery_token(relation: &Symbol, argument: &Symbol) -> Symbol {
    Symbol::new(format!("{relation}({argument})?"))
}

pub fn parse_subquery_token(token: &Symbol) -> Option<(Symbol, Symbol)> {
    let (rel, arg) = parse_application(token.as_str().strip_suffix('?')?)?;
    Some((Symbol::new(rel), Symbol::new(arg)))
}

/// The whole query, `f_1(f_2(...(x)))?`.
pub fn query_token(chain: &[Symbol], start: &Symbol) -> Symbol {
    let mut s = start.to_string();
    for rel in chain.iter().rev() {
        s = format!("{rel}({s})");
    }
    Symbol::new(s + "?")
}

/// Inverse of [`query_token`]: `(chain outermost first, start)`.
pub fn parse_query_token(token: &Symbol) -> Option<(Vec<Symbol>, Symbol)> {
    let mut rest = token.as_str().strip_suffix('?')?;
    let mut chain = Vec::new();
    while let Some((rel, inner)) = parse_application(rest) {
        chain.push(Symbol::new(rel));
        rest = inner;
    }
    if chain.is_empty() || rest.is_empty() || rest.contains(['(', ')']) {
        return None;
    }
    Some((chain, Symbol::new(rest)))
}

fn parse_application(s: &str) -> Option<(&str, &str)> {
    let open = s.find('(')?;
    let inner = s[open + 1..].strip_suffix(')')?;
    let rel = &s[..open];
    if rel.is_empty() || inner.is_empty() {
        return None;
    }
    Some((rel, inner))
}
