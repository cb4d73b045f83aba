//! Protocol role programs and the synchronous scheduler.
//!
//! A protocol is laid out on an instance as one role per agent ([`layout`]),
//! agents are built from roles by an [`AgentFactory`], and [`run`] steps them
//! in lockstep while recording the execution DAG.

mod duty;
mod factory;
mod layout;
mod roles;
mod run;
mod scheduler;
mod spec;

pub use duty::{Decision, Duty, Plan, Role, Then};
pub use factory::{derive_seed, AgentFactory, AgentSetup, NoisyFactory, OracleAgent, OracleFactory};
pub use layout::{layout, Layout};
pub use roles::plurality;
pub use run::{run, ProtocolError, RunFailure, RunRecord, RunResult};
pub use scheduler::{execute, Execution};
pub use spec::{Family, ProtocolSpec, RoleKind};
