use masim_core::{Symbol, Token};

/// The transcript prefix an agent has processed when it acts at node `time`:
/// its chunk, its ID token, the tokens of nodes `1..time`, and the receive
/// token of node `time` if a message arrived.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentContext {
    tokens: Vec<Token>,
    id_pos: usize,
    self_id: usize,
    width: usize,
    time: usize,
}

impl AgentContext {
    /// A fresh context at the agent's first node.
    pub fn new(chunk: &[Symbol], self_id: usize, width: usize) -> Self {
        let mut tokens: Vec<Token> = chunk.iter().cloned().map(Token::Plain).collect();
        let id_pos = tokens.len();
        tokens.push(Token::AgentId(self_id));
        AgentContext { tokens, id_pos, self_id, width, time: 1 }
    }

    /// Wraps an existing prefix. Returns `None` unless it contains exactly one
    /// ID token, for `self_id`.
    pub fn from_tokens(tokens: Vec<Token>, self_id: usize, width: usize, time: usize) -> Option<Self> {
        let ids: Vec<usize> = tokens
            .iter()
            .filter_map(|t| match t {
                Token::AgentId(i) => Some(*i),
                _ => None,
            })
            .collect();
        if ids != [self_id] || time == 0 {
            return None;
        }
        let id_pos = tokens.iter().position(|t| matches!(t, Token::AgentId(_)))?;
        Some(AgentContext { tokens, id_pos, self_id, width, time })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn self_id(&self) -> usize {
        self.self_id
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn chunk(&self) -> Vec<Symbol> {
        self.tokens[..self.id_pos].iter().filter_map(|t| t.payload().cloned()).collect()
    }

    pub fn chunk_len(&self) -> usize {
        self.id_pos
    }

    /// Element `i` of the chunk without copying the rest.
    pub fn chunk_item(&self, i: usize) -> Option<&Symbol> {
        self.tokens[..self.id_pos].get(i).and_then(Token::payload)
    }

    /// Tokens after the ID token.
    pub fn history(&self) -> &[Token] {
        &self.tokens[self.id_pos + 1..]
    }

    /// The message delivered to the current node.
    pub fn received(&self) -> Option<&Symbol> {
        match self.history().last() {
            Some(Token::Receive(s)) => Some(s),
            _ => None,
        }
    }

    /// Every message received so far, in order.
    pub fn receipts(&self) -> Vec<&Symbol> {
        self.history()
            .iter()
            .filter_map(|t| match t {
                Token::Receive(s) => Some(s),
                _ => None,
            })
            .collect()
    }

    /// Every CoT symbol emitted so far, in order.
    pub fn emitted(&self) -> Vec<&Symbol> {
        self.history()
            .iter()
            .filter_map(|t| match t {
                Token::Plain(s) => Some(s),
                _ => None,
            })
            .collect()
    }

    pub fn last_emitted(&self) -> Option<&Symbol> {
        self.history().iter().rev().find_map(|t| match t {
            Token::Plain(s) => Some(s),
            _ => None,
        })
    }

    /// Appends the tokens produced by the agent's own node.
    pub fn record(&mut self, tokens: impl IntoIterator<Item = Token>) {
        self.tokens.extend(tokens);
    }

    /// Moves to the next node, optionally delivering a message to it.
    pub fn advance(&mut self, message: Option<Symbol>) {
        self.time += 1;
        if let Some(m) = message {
            self.tokens.push(Token::Receive(m));
        }
    }

    pub fn into_tokens(self) -> Vec<Token> {
        self.tokens
    }
}
