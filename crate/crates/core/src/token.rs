use std::fmt;

use serde::{Deserialize, Serialize};

use crate::Symbol;

/// One entry of an agent transcript.
///
/// The enum shape encodes the token invariants: only `Send` carries a target,
/// and only `Eos` carries no payload.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Token {
    Plain(Symbol),
    AgentId(usize),
    Receive(Symbol),
    Send { symbol: Symbol, target: usize },
    Broadcast(Symbol),
    Eos,
}

impl Token {
    pub fn payload(&self) -> Option<&Symbol> {
        match self {
            Token::Plain(s) | Token::Receive(s) | Token::Broadcast(s) => Some(s),
            Token::Send { symbol, .. } => Some(symbol),
            Token::AgentId(_) | Token::Eos => None,
        }
    }

    pub fn target(&self) -> Option<usize> {
        match self {
            Token::Send { target, .. } => Some(*target),
            _ => None,
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Plain(s) => write!(f, "{s}"),
            Token::AgentId(i) => write!(f, "ID_{i}"),
            Token::Receive(s) => write!(f, "RECEIVE_{s}"),
            Token::Send { symbol, target } => write!(f, "SEND_{symbol}_ID_{target}"),
            Token::Broadcast(s) => write!(f, "BROADCAST_{s}"),
            Token::Eos => f.write_str("EOS"),
        }
    }
}
