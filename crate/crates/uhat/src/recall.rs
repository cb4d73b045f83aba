use std::collections::HashMap;
use std::f64::consts::PI;

use masim_core::Symbol;
use nalgebra::{DMatrix, DVector};

use crate::{jl_vectors_with, FeedForward, HardAttentionLayer, Head, JlConfig, JlVectorSet, Linear, Network, UhatError};

/// Minimum logit gap accepted when decoding: the right code scores 1, every
/// other code at most 1/4.
pub const DECODE_MARGIN: f64 = 0.5;

/// Minimum score gap of the retrieval heads. Matches score 2, mismatches at
/// most 1/2 and the fallback row 5/4.
pub const RETRIEVAL_MARGIN: f64 = 0.5;

const QUERY_WEIGHT: f64 = 2.0;
const FALLBACK_WEIGHT: f64 = 1.25;

/// Keys and values a recall network can embed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecallAlphabet {
    pub keys: Vec<Symbol>,
    pub values: Vec<Symbol>,
}

impl RecallAlphabet {
    /// Keys and values both `0..size`, as produced by the recall generator.
    pub fn numeric(size: usize) -> Self {
        let syms: Vec<Symbol> = (0..size).map(|i| Symbol::new(i.to_string())).collect();
        RecallAlphabet { keys: syms.clone(), values: syms }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecallOptions {
    pub jl: JlConfig,
    /// Rotation angle of the left head's key projection; `None` for `-pi/N`.
    pub theta: Option<f64>,
}

impl Default for RecallOptions {
    fn default() -> Self {
        RecallOptions { jl: JlConfig::default(), theta: None }
    }
}

fn index_of(symbols: &[Symbol]) -> Result<HashMap<Symbol, usize>, UhatError> {
    let mut out = HashMap::with_capacity(symbols.len());
    for (i, s) in symbols.iter().enumerate() {
        if s.is_not_found() || out.insert(s.clone(), i).is_some() {
            return Err(UhatError::Shape(format!("alphabet symbol {s} is reserved or repeated")));
        }
    }
    Ok(out)
}

fn value_seed(seed: u64) -> u64 {
    seed ^ 0x5851_F42D_4C95_7F2D
}

/// Value codes for `values` followed by the NOT_FOUND code.
fn value_codes(values: &[Symbol], seed: u64, jl: JlConfig) -> Result<JlVectorSet, UhatError> {
    jl_vectors_with(values.len() + 1, value_seed(seed), jl)
}

fn unembed(codes: &JlVectorSet) -> DMatrix<f64> {
    DMatrix::from_fn(codes.len(), codes.dim(), |r, c| codes.get(r)[c])
}

fn vocab_with_not_found(values: &[Symbol]) -> Vec<String> {
    values.iter().map(|s| s.to_string()).chain([Symbol::NOT_FOUND.to_string()]).collect()
}

/// Two-layer recall worker for chunks of exactly `n` pairs followed by a
/// query key, `N = 2n + 1` tokens.
///
/// Embedding `[key dk | value dv | P1 P2]` with `P(t) = (cos pi t/N, sin pi t/N)`:
/// key and query tokens carry `[T(key) | T(empty) | P(t)]`, value tokens
/// `[0 | T(value) | P(t)]`.
///
/// Layer 1 has heads L and R over the positional pair. R attends to its own
/// row. L's key projection is the rotation by `theta = -pi/N`, so row `t`
/// attends to row `t - 1` and copies its key code. The feed-forward case table
/// leaves each value row holding its key and value codes, moves the query
/// row's key code into a separate query block with a flag, and clears key rows.
///
/// Layer 2 retrieves from the last row: score `2 <T(q), key> + 5/4 flag`, so a
/// matching value row scores 2, other value rows at most 1/2, and the query row
/// itself 5/4, which falls back to its NOT_FOUND value code. A second,
/// all-zero head keeps the head count uniform.
#[derive(Clone, Debug)]
pub struct RecallNetwork {
    n: usize,
    keys: HashMap<Symbol, usize>,
    values: HashMap<Symbol, usize>,
    key_codes: JlVectorSet,
    value_codes: JlVectorSet,
    network: Network,
}

pub fn build_recall_network(n: usize, alphabet: &RecallAlphabet, seed: u64) -> Result<RecallNetwork, UhatError> {
    build_recall_network_with(n, alphabet, seed, RecallOptions::default())
}

pub fn build_recall_network_with(
    n: usize,
    alphabet: &RecallAlphabet,
    seed: u64,
    options: RecallOptions,
) -> Result<RecallNetwork, UhatError> {
    if n == 0 {
        return Err(UhatError::Shape("recall network needs n >= 1".into()));
    }
    if alphabet.keys.is_empty() || alphabet.values.is_empty() {
        return Err(UhatError::Shape("recall alphabet is empty".into()));
    }
    let keys = index_of(&alphabet.keys)?;
    let values = index_of(&alphabet.values)?;
    let key_codes = jl_vectors_with(alphabet.keys.len(), seed, options.jl)?;
    let value_codes = value_codes(&alphabet.values, seed, options.jl)?;
    let (dk, dv) = (key_codes.dim(), value_codes.dim());
    let d = dk + dv + 2;
    let big_n = (2 * n + 1) as f64;
    let theta = options.theta.unwrap_or(-PI / big_n);
    let positional_margin = 0.5 * (1.0 - (PI / big_n).cos());

    let pos = |m: &mut DMatrix<f64>, block: [[f64; 2]; 2]| {
        for (r, row) in block.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                m[(dk + dv + r, c)] = x;
            }
        }
    };
    let mut select_p = DMatrix::zeros(d, 2);
    pos(&mut select_p, [[1.0, 0.0], [0.0, 1.0]]);
    // Rows of X times rho_theta^T: P(s) -> P(s) rotated by -theta.
    let (c, s) = (theta.cos(), theta.sin());
    let mut rotate = DMatrix::zeros(d, 2);
    pos(&mut rotate, [[c, -s], [s, c]]);
    let copy_key = DMatrix::from_fn(d, dk, |r, c| if r == c { 1.0 } else { 0.0 });

    let left = Head {
        name: "L".into(),
        w_q: select_p.clone(),
        w_k: rotate,
        w_v: Linear::Dense(copy_key),
        min_margin: Some(positional_margin),
    };
    let right = Head {
        name: "R".into(),
        w_q: select_p.clone(),
        w_k: select_p,
        w_v: Linear::Identity(d),
        min_margin: Some(positional_margin),
    };
    let layer1 = HardAttentionLayer {
        heads: vec![left, right],
        w_o: Linear::Identity(dk + d),
        ffn: FeedForward::RecallRouting {
            dk,
            dv,
            empty: value_codes.get(alphabet.values.len()).clone(),
            last_row_below: -(PI / (2.0 * big_n)).cos(),
        },
    };

    let d2 = 2 * dk + dv + 1;
    let flag = d2 - 1;
    let mut w_q = DMatrix::zeros(d2, dk + 1);
    let mut w_k = DMatrix::zeros(d2, dk + 1);
    for i in 0..dk {
        w_q[(dk + dv + i, i)] = QUERY_WEIGHT;
        w_k[(i, i)] = 1.0;
    }
    w_q[(flag, dk)] = FALLBACK_WEIGHT;
    w_k[(flag, dk)] = 1.0;
    let retrieve = Head {
        name: "retrieve".into(),
        w_q,
        w_k,
        w_v: Linear::Dense(DMatrix::from_fn(d2, dv, |r, c| if r == dk + c { 1.0 } else { 0.0 })),
        min_margin: Some(RETRIEVAL_MARGIN),
    };
    let null = Head {
        name: "null".into(),
        w_q: DMatrix::zeros(d2, 1),
        w_k: DMatrix::zeros(d2, 1),
        w_v: Linear::Dense(DMatrix::zeros(d2, dv)),
        min_margin: None,
    };
    let layer2 = HardAttentionLayer {
        heads: vec![retrieve, null],
        w_o: Linear::Dense(DMatrix::from_fn(2 * dv, dv, |r, c| if r == c { 1.0 } else { 0.0 })),
        ffn: FeedForward::Identity { dim: dv },
    };
    let network = Network::new(
        format!("recall n={n}"),
        vec![layer1, layer2],
        0..dv,
        unembed(&value_codes),
        vocab_with_not_found(&alphabet.values),
    )?;
    Ok(RecallNetwork { n, keys, values, key_codes, value_codes, network })
}

impl RecallNetwork {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn key_codes(&self) -> &JlVectorSet {
        &self.key_codes
    }

    pub fn value_codes(&self) -> &JlVectorSet {
        &self.value_codes
    }

    /// Input matrix for `pairs` followed by `query`.
    pub fn embed(&self, pairs: &[(Symbol, Symbol)], query: &Symbol) -> Result<DMatrix<f64>, UhatError> {
        if pairs.len() != self.n {
            return Err(UhatError::LengthMismatch { expected: self.n, got: pairs.len() });
        }
        let (dk, dv) = (self.key_codes.dim(), self.value_codes.dim());
        let d = dk + dv + 2;
        let big_n = 2 * self.n + 1;
        let empty = self.value_codes.get(self.value_codes.len() - 1);
        let mut x = DMatrix::zeros(big_n, d);
        let key_code = |k: &Symbol| {
            self.keys.get(k).map(|&i| self.key_codes.get(i)).ok_or_else(|| UhatError::UnknownSymbol(k.to_string()))
        };
        let mut put = |row: usize, key: Option<&DVector<f64>>, value: &DVector<f64>| {
            if let Some(key) = key {
                x.view_mut((row, 0), (1, dk)).copy_from(&key.transpose());
            }
            x.view_mut((row, dk), (1, dv)).copy_from(&value.transpose());
            let angle = PI * (row + 1) as f64 / big_n as f64;
            x[(row, dk + dv)] = angle.cos();
            x[(row, dk + dv + 1)] = angle.sin();
        };
        for (i, (k, v)) in pairs.iter().enumerate() {
            let value = self.values.get(v).map(|&j| self.value_codes.get(j));
            let value = value.ok_or_else(|| UhatError::UnknownSymbol(v.to_string()))?;
            put(2 * i, Some(key_code(k)?), empty);
            put(2 * i + 1, None, value);
        }
        put(big_n - 1, Some(key_code(query)?), empty);
        Ok(x)
    }

    /// Value paired with `query`, or NOT_FOUND.
    pub fn run(&self, pairs: &[(Symbol, Symbol)], query: &Symbol) -> Result<Symbol, UhatError> {
        let x = self.embed(pairs, query)?;
        let (hidden, _) = self.network.forward(&x)?;
        Ok(Symbol::new(self.network.decode(&hidden, DECODE_MARGIN)?))
    }
}

/// One-layer manager reading `n` tokens of which at most one is not
/// NOT_FOUND, and returning that token.
///
/// Embedding `[T(i) | T(x_i)]` with positional codes `T(i)`. The query is
/// produced from the last position's code by `W_Q = -T(n) T(empty)^T`, so the
/// score of row `s` is `-<T(empty), T(x_s)>`: -1 for sentinels and at least
/// -1/4 for the entity.
#[derive(Clone, Debug)]
pub struct ManagerNetwork {
    n: usize,
    entities: HashMap<Symbol, usize>,
    position_codes: JlVectorSet,
    value_codes: JlVectorSet,
    network: Network,
}

pub fn build_manager_network(n: usize, entities: &[Symbol], seed: u64) -> Result<ManagerNetwork, UhatError> {
    build_manager_network_with(n, entities, seed, JlConfig::default())
}

pub fn build_manager_network_with(
    n: usize,
    entities: &[Symbol],
    seed: u64,
    jl: JlConfig,
) -> Result<ManagerNetwork, UhatError> {
    if n == 0 {
        return Err(UhatError::Shape("manager network needs n >= 1".into()));
    }
    let index = index_of(entities)?;
    let position_codes = jl_vectors_with(n, seed, jl)?;
    let value_codes = value_codes(entities, seed, jl)?;
    let (dp, dv) = (position_codes.dim(), value_codes.dim());
    let d = dp + dv;
    let last = position_codes.get(n - 1);
    let empty = value_codes.get(entities.len());
    let mut w_q = DMatrix::zeros(d, dv);
    w_q.view_mut((0, 0), (dp, dv)).copy_from(&(-(last * empty.transpose())));
    let select_value = DMatrix::from_fn(d, dv, |r, c| if r == dp + c { 1.0 } else { 0.0 });
    let head = Head {
        name: "retrieve".into(),
        w_q,
        w_k: select_value.clone(),
        w_v: Linear::Dense(select_value),
        min_margin: Some(RETRIEVAL_MARGIN),
    };
    let layer = HardAttentionLayer { heads: vec![head], w_o: Linear::Identity(dv), ffn: FeedForward::Identity { dim: dv } };
    let network =
        Network::new(format!("manager n={n}"), vec![layer], 0..dv, unembed(&value_codes), vocab_with_not_found(entities))?;
    Ok(ManagerNetwork { n, entities: index, position_codes, value_codes, network })
}

impl ManagerNetwork {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn embed(&self, tokens: &[Symbol]) -> Result<DMatrix<f64>, UhatError> {
        if tokens.len() != self.n {
            return Err(UhatError::LengthMismatch { expected: self.n, got: tokens.len() });
        }
        let (dp, dv) = (self.position_codes.dim(), self.value_codes.dim());
        let empty = self.value_codes.len() - 1;
        let mut x = DMatrix::zeros(self.n, dp + dv);
        for (i, tok) in tokens.iter().enumerate() {
            let j = if tok.is_not_found() {
                empty
            } else {
                *self.entities.get(tok).ok_or_else(|| UhatError::UnknownSymbol(tok.to_string()))?
            };
            x.view_mut((i, 0), (1, dp)).copy_from(&self.position_codes.get(i).transpose());
            x.view_mut((i, dp), (1, dv)).copy_from(&self.value_codes.get(j).transpose());
        }
        Ok(x)
    }

    pub fn run(&self, tokens: &[Symbol]) -> Result<Symbol, UhatError> {
        let x = self.embed(tokens)?;
        let (hidden, _) = self.network.forward(&x)?;
        Ok(Symbol::new(self.network.decode(&hidden, DECODE_MARGIN)?))
    }
}
