use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::{select_with_gap, UhatError};

/// A projection; identities are kept symbolic so they cost nothing.
#[derive(Clone, Debug, PartialEq)]
pub enum Linear {
    Identity(usize),
    Dense(DMatrix<f64>),
}

impl Linear {
    pub fn nrows(&self) -> usize {
        match self {
            Linear::Identity(n) => *n,
            Linear::Dense(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            Linear::Identity(n) => *n,
            Linear::Dense(m) => m.ncols(),
        }
    }

    /// `x * self`.
    pub fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            Linear::Identity(_) => x.clone(),
            Linear::Dense(m) => x * m,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Linear::Identity(n) => DMatrix::identity(*n, *n),
            Linear::Dense(m) => m.clone(),
        }
    }
}

/// One hard-attention head. Scores are `(X W_Q)(X W_K)^T`, values `X W_V`.
#[derive(Clone, Debug, PartialEq)]
pub struct Head {
    pub name: String,
    pub w_q: DMatrix<f64>,
    pub w_k: DMatrix<f64>,
    pub w_v: Linear,
    /// Smallest winner/runner-up score gap accepted where margins are
    /// checked; `None` disables the check.
    pub min_margin: Option<f64>,
}

/// Position-wise map applied after the attention block, written as the
/// case table it computes.
#[derive(Clone, Debug, PartialEq)]
pub enum FeedForward {
    Identity { dim: usize },
    /// Routes the two-head output of the first recall layer.
    ///
    /// Input `[L.key dk | R]`, with `R` the whole selected row
    /// `[key dk | value dv | P1 P2]`.
    /// Output `[key dk | value dv | query dk | flag]`:
    /// * last row (`R.P1 <= last_row_below`): `[0 | R.value | R.key | 1]`;
    /// * value row (`<R.value, empty> < 1/2`): `[L.key | R.value | 0 | 0]`;
    /// * key row: all zeros.
    RecallRouting { dk: usize, dv: usize, empty: DVector<f64>, last_row_below: f64 },
}

impl FeedForward {
    pub fn name(&self) -> &'static str {
        match self {
            FeedForward::Identity { .. } => "identity",
            FeedForward::RecallRouting { .. } => "recall-routing",
        }
    }

    pub fn in_dim(&self) -> usize {
        match self {
            FeedForward::Identity { dim } => *dim,
            FeedForward::RecallRouting { dk, dv, .. } => 2 * dk + dv + 2,
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            FeedForward::Identity { dim } => *dim,
            FeedForward::RecallRouting { dk, dv, .. } => 2 * dk + dv + 1,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            FeedForward::Identity { .. } => x.to_vec(),
            FeedForward::RecallRouting { dk, dv, empty, last_row_below } => {
                let (dk, dv) = (*dk, *dv);
                let l_key = &x[..dk];
                let r = &x[dk..];
                let (r_key, r_value, r_p1) = (&r[..dk], &r[dk..dk + dv], r[dk + dv]);
                let mut out = vec![0.0; 2 * dk + dv + 1];
                if r_p1 <= *last_row_below {
                    out[dk..dk + dv].copy_from_slice(r_value);
                    out[dk + dv..2 * dk + dv].copy_from_slice(r_key);
                    out[2 * dk + dv] = 1.0;
                } else if dot(r_value, empty.as_slice()) < 0.5 {
                    out[..dk].copy_from_slice(l_key);
                    out[dk..dk + dv].copy_from_slice(r_value);
                }
                out
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `psi([Att_1(X), ..., Att_H(X)] W_O)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HardAttentionLayer {
    pub heads: Vec<Head>,
    pub w_o: Linear,
    pub ffn: FeedForward,
}

impl HardAttentionLayer {
    pub fn in_dim(&self) -> usize {
        self.heads[0].w_q.nrows()
    }

    pub fn out_dim(&self) -> usize {
        self.ffn.out_dim()
    }

    fn validate(&self, index: usize) -> Result<(), UhatError> {
        let bad = |m: String| Err(UhatError::Shape(format!("layer {index}: {m}")));
        if self.heads.is_empty() {
            return bad("no heads".into());
        }
        let d = self.in_dim();
        let mut concat = 0;
        for h in &self.heads {
            if h.w_q.nrows() != d || h.w_k.nrows() != d || h.w_v.nrows() != d {
                return bad(format!("head {} does not read {d} input features", h.name));
            }
            if h.w_q.ncols() != h.w_k.ncols() {
                return bad(format!("head {} query width {} != key width {}", h.name, h.w_q.ncols(), h.w_k.ncols()));
            }
            concat += h.w_v.ncols();
        }
        if self.w_o.nrows() != concat {
            return bad(format!("W_O has {} rows, heads produce {concat}", self.w_o.nrows()));
        }
        if self.w_o.ncols() != self.ffn.in_dim() {
            return bad(format!("W_O has {} columns, feed-forward reads {}", self.w_o.ncols(), self.ffn.in_dim()));
        }
        Ok(())
    }
}

/// Selected source position per layer, head and row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub selections: Vec<Vec<Vec<usize>>>,
    pub min_gap: f64,
}

/// A causally masked stack with an output matrix whose rows are token codes.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub name: String,
    pub layers: Vec<HardAttentionLayer>,
    /// Columns of the final hidden state read by the output matrix.
    pub readout: std::ops::Range<usize>,
    pub unembed: DMatrix<f64>,
    pub vocab: Vec<String>,
}

impl Network {
    pub fn new(
        name: impl Into<String>,
        layers: Vec<HardAttentionLayer>,
        readout: std::ops::Range<usize>,
        unembed: DMatrix<f64>,
        vocab: Vec<String>,
    ) -> Result<Self, UhatError> {
        let net = Network { name: name.into(), layers, readout, unembed, vocab };
        net.validate()?;
        Ok(net)
    }

    fn validate(&self) -> Result<(), UhatError> {
        let Some(first) = self.layers.first() else {
            return Err(UhatError::Shape("network has no layers".into()));
        };
        let heads = first.heads.len();
        for (i, l) in self.layers.iter().enumerate() {
            l.validate(i + 1)?;
            if l.heads.len() != heads {
                return Err(UhatError::Shape(format!("layer {} has {} heads, expected {heads}", i + 1, l.heads.len())));
            }
            if i > 0 && l.in_dim() != self.layers[i - 1].out_dim() {
                return Err(UhatError::Shape(format!("layer {} input width mismatch", i + 1)));
            }
        }
        let last = self.layers.last().expect("non-empty").out_dim();
        if self.readout.end > last || self.readout.len() != self.unembed.ncols() {
            return Err(UhatError::Shape("readout range does not match the output matrix".into()));
        }
        if self.unembed.nrows() != self.vocab.len() {
            return Err(UhatError::Shape("output matrix rows do not match the vocabulary".into()));
        }
        Ok(())
    }

    pub fn d_model(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn head_count(&self) -> usize {
        self.layers[0].heads.len()
    }

    /// Runs the stack. Margins are enforced on every row of non-final layers
    /// and on the last row of the final layer, the only row decoded.
    pub fn forward(&self, x: &DMatrix<f64>) -> Result<(DMatrix<f64>, Trace), UhatError> {
        if x.ncols() != self.d_model() {
            return Err(UhatError::Shape(format!("input has {} features, network reads {}", x.ncols(), self.d_model())));
        }
        let n = x.nrows();
        if n == 0 {
            return Err(UhatError::EmptyRow);
        }
        let mut h = x.clone();
        let mut trace = Trace { selections: Vec::new(), min_gap: f64::INFINITY };
        for (li, layer) in self.layers.iter().enumerate() {
            let final_layer = li + 1 == self.layers.len();
            let mut concat = DMatrix::zeros(n, layer.w_o.nrows());
            let mut offset = 0;
            let mut picks = Vec::with_capacity(layer.heads.len());
            for (hi, head) in layer.heads.iter().enumerate() {
                let q = &h * &head.w_q;
                let k = &h * &head.w_k;
                let v = head.w_v.apply(&h);
                let mut rows = Vec::with_capacity(n);
                for t in 0..n {
                    let scores: Vec<f64> = (0..=t).map(|s| q.row(t).dot(&k.row(s))).collect();
                    let (s, gap) = select_with_gap(&scores)?;
                    let checked = !final_layer || t + 1 == n;
                    if let (true, Some(required)) = (checked, head.min_margin) {
                        if gap < required {
                            return Err(UhatError::Margin { layer: li + 1, head: hi + 1, row: t + 1, gap, required });
                        }
                        trace.min_gap = trace.min_gap.min(gap);
                    }
                    concat.view_mut((t, offset), (1, v.ncols())).copy_from(&v.row(s));
                    rows.push(s);
                }
                offset += v.ncols();
                picks.push(rows);
            }
            trace.selections.push(picks);
            let mixed = layer.w_o.apply(&concat);
            let out_dim = layer.out_dim();
            let mut next = DMatrix::zeros(n, out_dim);
            for t in 0..n {
                let row: Vec<f64> = mixed.row(t).iter().copied().collect();
                next.row_mut(t).copy_from_slice(&layer.ffn.apply(&row));
            }
            h = next;
        }
        Ok((h, trace))
    }

    /// Logits of the last row over the vocabulary.
    pub fn logits(&self, hidden: &DMatrix<f64>) -> DVector<f64> {
        let last = hidden.row(hidden.nrows() - 1);
        let read = last.columns(self.readout.start, self.readout.len()).transpose();
        &self.unembed * read
    }

    /// Rightmost-argmax decode of the last row; the winning logit must beat
    /// the rest by at least `min_margin`.
    pub fn decode(&self, hidden: &DMatrix<f64>, min_margin: f64) -> Result<&str, UhatError> {
        let logits = self.logits(hidden);
        let (i, gap) = select_with_gap(logits.as_slice())?;
        if gap < min_margin {
            return Err(UhatError::Margin { layer: self.layers.len() + 1, head: 0, row: hidden.nrows(), gap, required: min_margin });
        }
        Ok(&self.vocab[i])
    }

    /// Text dump: shapes, then every matrix row-major at 17 significant digits.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "network {}", self.name);
        let _ = writeln!(s, "d_model {} layers {} heads {}", self.d_model(), self.layers.len(), self.head_count());
        for (li, l) in self.layers.iter().enumerate() {
            let _ = writeln!(s, "layer {} ffn {} in {} out {}", li + 1, l.ffn.name(), l.ffn.in_dim(), l.ffn.out_dim());
            for (hi, h) in l.heads.iter().enumerate() {
                let margin = h.min_margin.map_or("none".to_string(), fmt_real);
                let _ = writeln!(s, "head {} {} min_margin {}", hi + 1, h.name, margin);
                dump_matrix(&mut s, "w_q", &h.w_q);
                dump_matrix(&mut s, "w_k", &h.w_k);
                dump_linear(&mut s, "w_v", &h.w_v);
            }
            dump_linear(&mut s, "w_o", &l.w_o);
            if let FeedForward::RecallRouting { empty, last_row_below, .. } = &l.ffn {
                let _ = writeln!(s, "last_row_below {}", fmt_real(*last_row_below));
                dump_matrix(&mut s, "empty", &DMatrix::from_row_slice(1, empty.len(), empty.as_slice()));
            }
        }
        let _ = writeln!(s, "readout {} {}", self.readout.start, self.readout.end);
        dump_matrix(&mut s, "unembed", &self.unembed);
        let _ = writeln!(s, "vocab {}", self.vocab.join(" "));
        s
    }
}

pub(crate) fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn dump_matrix(s: &mut String, name: &str, m: &DMatrix<f64>) {
    let _ = writeln!(s, "{name} {} {}", m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        let row: Vec<String> = m.row(r).iter().map(|&x| fmt_real(x)).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
}

fn dump_linear(s: &mut String, name: &str, m: &Linear) {
    match m {
        Linear::Identity(n) => {
            let _ = writeln!(s, "{name} identity {n}");
        }
        Linear::Dense(m) => dump_matrix(s, name, m),
    }
}
