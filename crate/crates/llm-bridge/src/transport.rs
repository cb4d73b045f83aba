use std::collections::{HashMap, VecDeque};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::{BridgeError, Message, RemoteAgentConfig};

/// An OpenAI-style chat-completion request.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl ChatRequest {
    /// The last user message, which carries the task text.
    pub fn user_text(&self) -> &str {
        self.messages.iter().rev().find(|m| m.role == crate::Role::User).map_or("", |m| m.content.as_str())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub content: String,
    pub usage: Option<Usage>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum TransportError {
    #[error("request timed out")]
    Timeout,
    #[error("HTTP status {status}: {body}")]
    Http { status: u16, body: String },
    #[error("network error: {0}")]
    Network(String),
    #[error("malformed response: {0}")]
    Decode(String),
    /// The stub has nothing scripted for a request.
    #[error("no scripted reply for request: {0}")]
    Unscripted(String),
}

impl TransportError {
    pub fn retryable(&self) -> bool {
        !matches!(self, TransportError::Unscripted(_))
    }
}

/// A request/response channel to a chat model.
pub trait Transport: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, TransportError>;
}

/// Chat completions over HTTP. The only transport that touches the network.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
    endpoint: String,
    key: String,
}

impl HttpTransport {
    /// Reads the credential from the environment variable named in `config`.
    pub fn from_config(config: &RemoteAgentConfig) -> Result<Self, BridgeError> {
        let key = std::env::var(&config.auth_env)
            .map_err(|_| BridgeError::Config(format!("credential variable {} is not set", config.auth_env)))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_secs))
            .build()
            .map_err(|e| BridgeError::Config(e.to_string()))?;
        Ok(HttpTransport { client, endpoint: config.endpoint.clone(), key })
    }
}

/// Pulls the reply text and token counts out of a chat-completions body.
pub fn decode_completion(body: &serde_json::Value) -> Result<ChatResponse, TransportError> {
    let content = body
        .pointer("/choices/0/message/content")
        .and_then(serde_json::Value::as_str)
        .ok_or_else(|| TransportError::Decode("missing choices[0].message.content".into()))?;
    let usage = body.get("usage").and_then(|u| serde_json::from_value::<Usage>(u.clone()).ok());
    Ok(ChatResponse { content: content.to_string(), usage })
}

/// The JSON body sent for a request.
pub fn encode_request(request: &ChatRequest) -> serde_json::Value {
    json!({
        "model": request.model,
        "messages": request.messages,
        "temperature": request.temperature,
        "max_tokens": request.max_tokens,
    })
}

impl Transport for HttpTransport {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        let resp = self.client.post(&self.endpoint).bearer_auth(&self.key).json(&encode_request(request)).send();
        let resp = match resp {
            Ok(r) => r,
            Err(e) if e.is_timeout() => return Err(TransportError::Timeout),
            Err(e) => return Err(TransportError::Network(e.to_string())),
        };
        let status = resp.status();
        let text = resp.text().map_err(|e| TransportError::Network(e.to_string()))?;
        if !status.is_success() {
            return Err(TransportError::Http { status: status.as_u16(), body: text });
        }
        let body: serde_json::Value = serde_json::from_str(&text).map_err(|e| TransportError::Decode(e.to_string()))?;
        decode_completion(&body)
    }
}

type Reply = Result<String, TransportError>;

/// Canned replies for tests.
///
/// Replies registered with [`ScriptedTransport::on`] are matched on the exact
/// user message and consumed in order; the last one for a key repeats once
/// the queue would otherwise run dry. Unmatched requests take the next reply
/// from the shared queue filled by [`ScriptedTransport::push`].
#[derive(Default)]
pub struct ScriptedTransport {
    keyed: Mutex<HashMap<String, VecDeque<Reply>>>,
    queue: Mutex<VecDeque<Reply>>,
    calls: Mutex<usize>,
}

impl ScriptedTransport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn on(self, user: impl Into<String>, reply: impl Into<String>) -> Self {
        self.on_result(user, Ok(reply.into()))
    }

    pub fn on_err(self, user: impl Into<String>, err: TransportError) -> Self {
        self.on_result(user, Err(err))
    }

    pub fn on_result(self, user: impl Into<String>, reply: Reply) -> Self {
        self.keyed.lock().unwrap().entry(user.into()).or_default().push_back(reply);
        self
    }

    pub fn push(self, reply: impl Into<String>) -> Self {
        self.queue.lock().unwrap().push_back(Ok(reply.into()));
        self
    }

    pub fn push_err(self, err: TransportError) -> Self {
        self.queue.lock().unwrap().push_back(Err(err));
        self
    }

    /// Requests answered so far, failures included.
    pub fn calls(&self) -> usize {
        *self.calls.lock().unwrap()
    }
}

impl Transport for ScriptedTransport {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        *self.calls.lock().unwrap() += 1;
        let user = request.user_text();
        let reply = {
            let mut keyed = self.keyed.lock().unwrap();
            match keyed.get_mut(user) {
                Some(q) if q.len() > 1 => q.pop_front(),
                Some(q) => q.front().cloned(),
                None => None,
            }
        };
        let reply = match reply {
            Some(r) => r,
            None => self.queue.lock().unwrap().pop_front().ok_or_else(|| TransportError::Unscripted(user.to_string()))?,
        };
        reply.map(|content| ChatResponse { content, usage: None })
    }
}

/// A transport backed by a function of the request.
pub struct FnTransport<F>(pub F);

impl<F> Transport for FnTransport<F>
where
    F: Fn(&ChatRequest) -> Result<ChatResponse, TransportError> + Send + Sync,
{
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        (self.0)(request)
    }
}
