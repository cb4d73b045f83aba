use std::path::{Path, PathBuf};

use masim_bounds::{cell_spec, SweepConfig};
use masim_llm_bridge::RemoteAgentConfig;
use masim_protocols::{Family, ProtocolSpec};
use masim_tasks::{InstanceParams, TaskKind};
use serde::Deserialize;

/// Raw file contents. Everything is checked in [`ExperimentConfig::load`].
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    #[serde(default = "one")]
    replications: usize,
    output: Option<PathBuf>,
    task: RawTask,
    protocol: RawProtocol,
    #[serde(default)]
    agents: RawAgents,
    sweep: Option<RawSweep>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    family: String,
    n: usize,
    #[serde(default)]
    k: usize,
    #[serde(default)]
    alphabet: usize,
    #[serde(default = "default_entities")]
    entities: usize,
    #[serde(default = "default_relations")]
    relations: usize,
    #[serde(default)]
    force_even: bool,
}

fn default_entities() -> usize {
    50
}

fn default_relations() -> usize {
    20
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProtocol {
    family: String,
    #[serde(default = "one")]
    w: usize,
    #[serde(default = "two")]
    b: usize,
    #[serde(default = "one")]
    m: usize,
    #[serde(default)]
    theory_variant: bool,
}

fn two() -> usize {
    2
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgents {
    mode: Option<String>,
    epsilon: Option<f64>,
    remote: Option<PathBuf>,
    audit: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    n: Vec<usize>,
    #[serde(default)]
    w: Vec<usize>,
    #[serde(default)]
    b: Vec<usize>,
    #[serde(default)]
    k: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AgentMode {
    Oracle,
    Noisy { epsilon: f64 },
    Remote { config: RemoteAgentConfig, audit: Option<PathBuf> },
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub replications: usize,
    pub output: Option<PathBuf>,
    pub instance: InstanceParams,
    pub protocol: ProtocolSpec,
    pub agents: AgentMode,
    pub sweep: Option<SweepConfig>,
}

fn field(name: &str, msg: impl std::fmt::Display) -> String {
    format!("{name}: {msg}")
}

impl ExperimentConfig {
    /// Reads and validates a config file. `seed` overrides the file's seed.
    pub fn load(path: &Path, seed: Option<u64>) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let raw: RawConfig = toml::from_str(&text).map_err(|e| format!("{}: {}", path.display(), e.message()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_raw(raw, seed, base)
    }

    fn from_raw(raw: RawConfig, seed: Option<u64>, base: &Path) -> Result<Self, String> {
        let seed = seed.or(raw.seed).ok_or_else(|| field("seed", "missing field `seed` (set it or pass --seed)"))?;
        if raw.replications == 0 {
            return Err(field("replications", "must be at least 1"));
        }
        let kind: TaskKind = raw.task.family.parse().map_err(|e| field("task.family", e))?;
        let t = &raw.task;
        if t.n == 0 {
            return Err(field("task.n", "must be at least 1"));
        }
        if kind == TaskKind::KHop && t.k == 0 && raw.sweep.as_ref().is_none_or(|s| s.k.is_empty()) {
            return Err(field("task.k", "k-hop needs k >= 1"));
        }
        if kind == TaskKind::KHop && (t.entities < 2 || t.relations < 1) {
            return Err(field("task.entities", "k-hop needs at least 2 entities and 1 relation"));
        }
        let instance = InstanceParams {
            kind,
            n: t.n,
            k: t.k,
            alphabet: t.alphabet,
            entities: t.entities,
            relations: t.relations,
            force_even: t.force_even,
        };

        let family: Family = raw.protocol.family.parse().map_err(|e| field("protocol.family", e))?;
        let p = &raw.protocol;
        if p.w == 0 {
            return Err(field("protocol.w", "must be at least 1"));
        }
        if p.b < 2 {
            return Err(field("protocol.b", "must be at least 2"));
        }
        if p.m == 0 {
            return Err(field("protocol.m", "must be at least 1"));
        }
        let protocol = match family {
            Family::MajorityVote => cell_spec(family, p.m, p.b, p.theory_variant),
            _ => cell_spec(family, p.w, p.b, p.theory_variant),
        };
        let compatible = match family {
            Family::RecallBroadcast => kind == TaskKind::Recall,
            Family::PrefixSum | Family::ChainOfAgents => kind.is_state_tracking(),
            Family::IterativeQuery => kind == TaskKind::KHop,
            Family::MajorityVote => true,
        };
        if !compatible {
            return Err(field("protocol.family", format!("{family} cannot run {kind} tasks")));
        }

        let agents = match raw.agents.mode.as_deref().unwrap_or("oracle") {
            "oracle" => AgentMode::Oracle,
            "noisy" => {
                let epsilon = raw.agents.epsilon.ok_or_else(|| field("agents.epsilon", "required for noisy agents"))?;
                if !(0.0..=1.0).contains(&epsilon) {
                    return Err(field("agents.epsilon", "must lie in [0, 1]"));
                }
                AgentMode::Noisy { epsilon }
            }
            "remote" => {
                let rel = raw.agents.remote.as_ref().ok_or_else(|| field("agents.remote", "required for remote agents"))?;
                let path = base.join(rel);
                let text = std::fs::read_to_string(&path).map_err(|e| field("agents.remote", format!("{}: {e}", path.display())))?;
                let config: RemoteAgentConfig =
                    toml::from_str(&text).map_err(|e| field("agents.remote", format!("{}: {}", path.display(), e.message())))?;
                config.validate().map_err(|e| field("agents.remote", e))?;
                AgentMode::Remote { config, audit: raw.agents.audit.as_ref().map(|a| base.join(a)) }
            }
            other => return Err(field("agents.mode", format!("unknown mode {other:?} (oracle, noisy or remote)"))),
        };

        let sweep = match raw.sweep {
            None => None,
            Some(s) => {
                if s.n.is_empty() || s.n.contains(&0) {
                    return Err(field("sweep.n", "needs at least one positive length"));
                }
                if s.w.contains(&0) {
                    return Err(field("sweep.w", "widths must be positive"));
                }
                if s.b.iter().any(|&b| b < 2) {
                    return Err(field("sweep.b", "branching factors must be at least 2"));
                }
                if kind == TaskKind::KHop && s.k.contains(&0) {
                    return Err(field("sweep.k", "k-hop needs k >= 1"));
                }
                let ws = if s.w.is_empty() { vec![if family == Family::MajorityVote { p.m } else { p.w }] } else { s.w };
                Some(SweepConfig {
                    protocol: family,
                    instance: instance.clone(),
                    ns: s.n,
                    ws,
                    bs: if s.b.is_empty() { vec![p.b] } else { s.b },
                    ks: if s.k.is_empty() { vec![t.k] } else { s.k },
                    replications: raw.replications,
                    seed,
                    theory_variant: p.theory_variant,
                })
            }
        };

        Ok(ExperimentConfig {
            seed,
            replications: raw.replications,
            output: raw.output.map(|o| base.join(o)),
            instance,
            protocol,
            agents,
            sweep,
        })
    }
}
