use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use masim_agents::{Agent, AgentContext, AgentError};
use masim_core::Symbol;
use masim_llm_bridge::*;
use masim_protocols::{layout, run, AgentSetup, Duty, Plan, ProtocolSpec, RoleKind, RunFailure};
use masim_tasks::{gen_khop, Fact, InstanceParams, TaskInstance, TaskKind};
use proptest::prelude::*;
use sha2::{Digest, Sha256};

const DIGESTS: [(&str, &str); 15] = [
    ("khop_majority", "f864a0fc4ab78f944ffc56f503d709905bd32070986bccd014d94dc8b857fc86"),
    ("khop_manager", "0480108289c62304adf8ef6f035fa103b07ecb9af5e4c4f8df21e957d63d87ce"),
    ("khop_worker", "d4c82c8ab9999bb5c6942b80bd8957a9ccd3a212e70c7b7ca64bd3bb0d0398aa"),
    ("parity_majority", "e47b58ed77a7c7dc9860112883fa7c3cd4645241e9ac5d91658dad4c2fe5325b"),
    ("parity_manager", "ab8abc82d36e85775c0104f09860d4d5f136ac8d5ec999fad8a8a1e17ee525ef"),
    ("parity_worker", "849e33b45998b1f0821fa1b1cfbd7ba5cec26e38f2fdd5f5cf4a4bd6ad8cc11f"),
    ("perm_majority", "f6cfc406d43ce833834358150e280359e48bcb013eeb7fe427982b23b1d95e6a"),
    ("perm_manager", "eceb304695544c98fc434b34263e239db7dfcc285f275acd0a83e439df24fada"),
    ("perm_prefix_manager", "a63aa91e812a85d59e23e2cdc223c714e0d79a69434f0d981379199946f84e0b"),
    ("perm_prefix_worker", "6b34f6bcc158a95b05c2b8b449ce748f26dc09fe0b7a281cd7022f5ebdde0c72"),
    ("perm_worker", "56f5ac4b1fd71eb9d928d3f989e2f951045c0378389ca9ee9033e2bf531a7bf3"),
    ("prefix_manager", "a4a54418e6f9999cd00b7ede427a416e0f206d93cda780d8c5b22fd62d5c701c"),
    ("recall_majority", "fe708e301c5c00df0db05f47f66e3b0c2f4f6d430a50f07980a0a4b337f352d1"),
    ("recall_manager", "c96e01e8b1208a3fcee7bf523c406a0312dd2335b56b5bf43e97899b56cb07d9"),
    ("recall_worker", "fe708e301c5c00df0db05f47f66e3b0c2f4f6d430a50f07980a0a4b337f352d1"),
];

fn sha(s: &str) -> String {
    Sha256::digest(s.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn prompt_files_match_pinned_digests() {
    for (id, digest) in DIGESTS {
        let t: TemplateId = id.parse().unwrap();
        assert_eq!(t.as_str(), id);
        assert_eq!(sha(t.system_prompt()), digest, "{id}");
    }
    assert_eq!(TemplateId::ALL.len(), DIGESTS.len());
}

fn normalize_source(s: &str) -> String {
    s.replace("$\\vert$", "|")
        .replace("\\_", "_")
        .replace("\\{", "{")
        .replace("\\}", "}")
        .replace("``", "\"")
        .replace("''", "\"")
}

fn strip_list_marker(line: &str) -> &str {
    let t = line.trim_start();
    if let Some(rest) = t.strip_prefix("- ") {
        return rest;
    }
    match t.split_once(". ") {
        Some((n, rest)) if !n.is_empty() && n.chars().all(|c| c.is_ascii_digit()) => rest,
        _ => t,
    }
}

/// Every prompt line appears, in order, inside its box in the source text.
#[test]
fn prompt_lines_appear_in_order_in_source() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../paper.md");
    let Ok(source) = std::fs::read_to_string(path) else {
        panic!("source text missing at {path}");
    };
    let source = normalize_source(&source);
    let boxes: Vec<&str> = source.split("\\begin{tcolorbox}").skip(1).map(|b| b.split("\\end{tcolorbox}").next().unwrap()).collect();
    assert_eq!(boxes.len(), 15);
    for t in TemplateId::ALL {
        let prompt = t.system_prompt();
        let matched = boxes.iter().any(|b| {
            let mut at = 0;
            prompt.lines().filter(|l| !l.trim().is_empty()).all(|l| {
                let needle = strip_list_marker(l).trim();
                match b[at..].find(needle) {
                    Some(i) => {
                        at += i + needle.len();
                        true
                    }
                    None => false,
                }
            })
        });
        assert!(matched, "{t} does not follow any source box");
        assert!(prompt.ends_with('\n') && !prompt.ends_with("\n\n"), "{t}");
        assert!(prompt.contains(t.marker().text().trim_end_matches(':')), "{t}");
    }
}

#[test]
fn prompts_carry_their_worked_examples() {
    assert!(TemplateId::RecallWorker.system_prompt().contains("\"23 42 12 34 56 78 90 12 | Query: 56\""));
    assert!(TemplateId::RecallManager.system_prompt().contains("\"NOT_FOUND NOT_FOUND 78 NOT_FOUND\""));
    assert!(TemplateId::ParityWorker.system_prompt().contains("Here is an example for \"1011\""));
    assert!(TemplateId::KhopWorker.system_prompt().contains("Response: Answer: Not Found"));
    assert!(TemplateId::KhopManager.system_prompt().contains("Next Query: Who is Mary's supervisor?"));
}

fn sym(s: &str) -> Symbol {
    Symbol::new(s)
}

fn syms(xs: &[&str]) -> Vec<Symbol> {
    xs.iter().map(|s| sym(s)).collect()
}

#[test]
fn recall_worker_prompt_uses_the_example_rendering() {
    let pairs = vec![(sym("23"), sym("42")), (sym("12"), sym("34")), (sym("56"), sym("78")), (sym("90"), sym("12"))];
    let duty = Duty::Lookup { pairs, query: sym("56") };
    let msgs = render_prompt(TemplateId::RecallWorker, &duty).unwrap();
    assert_eq!(msgs.len(), 2);
    assert_eq!(msgs[0].role, Role::System);
    assert_eq!(msgs[0].content, TemplateId::RecallWorker.system_prompt());
    assert_eq!(msgs[1].content, "23 42 12 34 56 78 90 12 | Query: 56");
    assert!(msgs[0].content.contains(&msgs[1].content));
}

#[test]
fn parity_worker_example_yields_one() {
    let duty = Duty::Fold { elements: syms(&["1", "0", "1", "1"]) };
    let msgs = render_prompt(TemplateId::ParityWorker, &duty).unwrap();
    assert_eq!(msgs[1].content, "1011");
    let example_reply = TemplateId::ParityWorker.system_prompt().split("\"1011\":\n").nth(1).unwrap();
    assert_eq!(parse_answer(example_reply, TemplateId::ParityWorker).unwrap(), "1");
}

#[test]
fn empty_and_incompatible_inputs_are_refused() {
    let empty = [
        (TemplateId::RecallWorker, Duty::Lookup { pairs: vec![], query: sym("1") }),
        (TemplateId::RecallManager, Duty::Select { reports: vec![] }),
        (TemplateId::ParityWorker, Duty::Fold { elements: vec![] }),
        (TemplateId::PrefixManager, Duty::Combine { parts: vec![] }),
        (TemplateId::PermMajority, Duty::Fold { elements: vec![] }),
        (TemplateId::KhopWorker, Duty::Resolve { facts: vec![], relation: sym("boss"), argument: sym("John") }),
    ];
    for (t, d) in empty {
        assert_eq!(render_prompt(t, &d), Err(BridgeError::EmptyInput(t)));
    }
    let fold = Duty::Fold { elements: syms(&["21345"]) };
    assert!(matches!(render_prompt(TemplateId::ParityWorker, &fold), Err(BridgeError::Incompatible { .. })));
    let bits = Duty::Fold { elements: syms(&["1", "0"]) };
    assert!(matches!(render_prompt(TemplateId::PermWorker, &bits), Err(BridgeError::Incompatible { .. })));
    let select = Duty::Select { reports: syms(&["1"]) };
    assert!(matches!(render_prompt(TemplateId::KhopManager, &select), Err(BridgeError::Incompatible { .. })));
}

#[test]
fn khop_renderings() {
    let facts = vec![
        Fact { relation: sym("boss"), argument: sym("John"), result: sym("Mary") },
        Fact { relation: sym("teacher"), argument: sym("Alice"), result: sym("Bob") },
    ];
    let d = Duty::Resolve { facts: facts.clone(), relation: sym("boss"), argument: sym("John") };
    assert_eq!(
        render_user(TemplateId::KhopWorker, &d).unwrap(),
        "Facts: \"John's boss is Mary. Alice's teacher is Bob.\"\nQuery: \"Who is John's boss?\""
    );
    let chain = syms(&["supervisor", "boss"]);
    let d = Duty::Answer { facts, chain: chain.clone(), start: sym("John") };
    assert!(render_user(TemplateId::KhopMajority, &d).unwrap().ends_with("Query: \"Who is the supervisor of the boss of John?\""));
    let d = Duty::NextQuery { chain, start: sym("John"), answer: sym("Mary"), step: 1 };
    assert_eq!(
        render_user(TemplateId::KhopManager, &d).unwrap(),
        "Original question: \"Who is the supervisor of the boss of John?\"\nCurrent answer: \"Mary\"\nCurrent step: 1"
    );
}

#[test]
fn perm_renderings() {
    let d = Duty::Fold { elements: syms(&["21345", "13245"]) };
    assert_eq!(render_user(TemplateId::PermMajority, &d).unwrap(), "Swap ball 1 and ball 2\nSwap ball 2 and ball 3");
    assert_eq!(
        render_user(TemplateId::PermWorker, &d).unwrap(),
        "Current positions: {1:1, 2:2, 3:3, 4:4, 5:5}\nSwap operations:\nSwap ball 1 and ball 2\nSwap ball 2 and ball 3"
    );
    let c = Duty::Combine { parts: syms(&["31245", "12354"]) };
    assert_eq!(
        render_user(TemplateId::PermWorker, &c).unwrap(),
        "Current positions: {1:3, 2:1, 3:2, 4:4, 5:5}\nSwap operations:\nSwap ball 4 and ball 5"
    );
    let from_identity = Duty::Combine { parts: syms(&["12345", "23145"]) };
    assert_eq!(
        render_user(TemplateId::PermWorker, &from_identity).unwrap(),
        "Current positions: {1:1, 2:2, 3:3, 4:4, 5:5}\nSwap operations:\nSwap ball 1 and ball 2\nSwap ball 2 and ball 3"
    );
    assert_eq!(
        render_user(TemplateId::PermPrefixManager, &c).unwrap(),
        "Worker 1: {1:3, 2:1, 3:2, 4:4, 5:5}\nWorker 2: {1:1, 2:2, 3:3, 4:5, 5:4}"
    );
}

proptest! {
    /// Applying the expanded swaps to the identity reproduces the element.
    #[test]
    fn swap_sequences_rebuild_their_element(p in Just("12345".chars().collect::<Vec<char>>()).prop_shuffle()) {
        let e = Symbol::new(p.iter().collect::<String>());
        let swaps = swap_sequence(&e).unwrap();
        prop_assert!(swaps.len() <= 4);
        let mut bins: Vec<char> = "12345".chars().collect();
        for (x, y) in swaps {
            bins.swap(x - 1, y - 1);
        }
        prop_assert_eq!(bins, p);
    }
}

#[test]
fn parse_examples() {
    assert_eq!(parse_answer("Final count: 3\nThe answer is: 1", TemplateId::ParityWorker).unwrap(), "1");
    assert!(parse_answer("The answer is: NOT_FOUND", TemplateId::RecallWorker).unwrap().is_not_found());
    assert!(parse_answer("I think the answer might be 7", TemplateId::RecallWorker).is_err());
    assert!(parse_answer("Answer: Not Found", TemplateId::KhopWorker).unwrap().is_not_found());
    assert_eq!(parse_answer("Reasoning...\nAnswer: Tom.", TemplateId::KhopMajority).unwrap(), "Tom");
    assert_eq!(
        parse_answer("Response: Next Query: Who is Mary's supervisor?", TemplateId::KhopManager).unwrap(),
        "supervisor(Mary)?"
    );
    assert_eq!(
        parse_answer("The answer is: 3\nsecond thoughts\nThe answer is: **78**.", TemplateId::RecallManager).unwrap(),
        "78"
    );
    // Balls left out of the dictionary stay put.
    assert_eq!(parse_answer("The answer is: {1:2, 2:1}", TemplateId::PermMajority).unwrap(), "21345");
    assert!(parse_answer("The answer is: {1:2, 2:2}", TemplateId::PermMajority).is_err());
    assert!(parse_answer("The answer is: 2", TemplateId::ParityWorker).is_err());
    assert!(parse_answer("The answer is:", TemplateId::RecallWorker).is_err());
}

fn answer_for(kind: AnswerKind) -> BoxedStrategy<Symbol> {
    match kind {
        AnswerKind::Value => prop_oneof![Just(Symbol::not_found()), (0u32..10_000).prop_map(|v| Symbol::new(v.to_string()))].boxed(),
        AnswerKind::Bit => prop_oneof![Just(sym("0")), Just(sym("1"))].boxed(),
        AnswerKind::Permutation => Just("12345".chars().collect::<Vec<char>>())
            .prop_shuffle()
            .prop_map(|p| Symbol::new(p.into_iter().collect::<String>()))
            .boxed(),
        AnswerKind::Entity => prop_oneof![Just(Symbol::not_found()), "[A-Z][a-z]{1,8}".prop_map(Symbol::new)].boxed(),
        AnswerKind::Question => ("[a-z]{2,8}", "[A-Z][a-z]{1,8}").prop_map(|(r, a)| Symbol::new(format!("{r}({a})?"))).boxed(),
    }
}

proptest! {
    #[test]
    fn parse_inverts_render(idx in 0usize..15, seed in any::<u64>()) {
        let t = TemplateId::ALL[idx];
        let mut runner = proptest::test_runner::TestRunner::deterministic();
        let strategy = answer_for(t.answer_kind());
        for _ in 0..(seed % 7 + 1) {
            let a = strategy.new_tree(&mut runner).unwrap().current();
            let reply = render_response(t, &a).unwrap();
            prop_assert_eq!(parse_answer(&reply, t).unwrap(), a.clone());
            let chatty = format!("Let me think.\n{} {}\n{reply}\n", t.marker().text(), "garbage");
            prop_assert_eq!(parse_answer(&chatty, t).unwrap(), a);
        }
    }
}

fn khop_instance(n: usize, k: usize, seed: u64) -> TaskInstance {
    TaskInstance::KHop(gen_khop(n, k, 50, 20, seed).unwrap())
}

fn config() -> RemoteAgentConfig {
    let mut c = RemoteAgentConfig::new("http://127.0.0.1:9/v1/chat/completions", "stub-model", "MASIM_TEST_KEY");
    c.backoff_ms = 0;
    c
}

/// Reads a worker's lookup prompt and answers it from the text alone.
fn recall_reader(text: &str) -> String {
    let (pairs, query) = text.split_once(" | Query: ").unwrap();
    let toks: Vec<&str> = pairs.split(' ').collect();
    let hit = toks.chunks(2).rev().find(|kv| kv[0] == query).map(|kv| kv[1]);
    format!("The answer is: {}", hit.unwrap_or("NOT_FOUND"))
}

fn quoted(line: &str) -> &str {
    line.split_once('"').unwrap().1.rsplit_once('"').unwrap().0
}

/// A rule-based reader for the k-hop prompts; it only sees the prose.
fn khop_reader(req: &ChatRequest) -> String {
    let system = &req.messages[0].content;
    let user = req.user_text();
    let lines: Vec<&str> = user.lines().collect();
    if system == TemplateId::KhopManager.system_prompt() {
        let question = quoted(lines[0]);
        let answer = quoted(lines[1]);
        let step: usize = lines[2].rsplit(' ').next().unwrap().parse().unwrap();
        let path = question.strip_prefix("Who is the ").unwrap();
        let rels: Vec<&str> = path.split(" of the ").map(|s| s.split(" of ").next().unwrap()).collect();
        let rel = rels[rels.len() - 1 - step];
        return format!("Next Query: Who is {answer}'s {rel}?");
    }
    let facts: HashMap<(String, String), String> = quoted(lines[0])
        .split(". ")
        .map(|s| s.trim_end_matches('.'))
        .map(|s| {
            let (arg, rest) = s.split_once("'s ").unwrap();
            let (rel, res) = rest.split_once(" is ").unwrap();
            ((arg.to_string(), rel.to_string()), res.to_string())
        })
        .collect();
    let q = quoted(lines[1]).strip_prefix("Who is ").unwrap().trim_end_matches('?');
    let (arg, rel) = q.split_once("'s ").unwrap();
    match facts.get(&(arg.to_string(), rel.to_string())) {
        Some(v) => format!("Looking at the facts.\nAnswer: {v}"),
        None => "Answer: Not Found".to_string(),
    }
}

#[test]
fn stub_reply_becomes_the_roles_action() {
    let inst = InstanceParams::new(TaskKind::Recall, 6).generate(3).unwrap();
    let spec = ProtocolSpec::recall_broadcast(3, false);
    let lay = layout(&spec, &inst).unwrap();
    let transport: Arc<dyn Transport> = Arc::new(ScriptedTransport::new().push("The answer is: D"));
    let audit = AuditLog::new();
    let setup = AgentSetup { agent: 1, width: 4, role: lay.role(1).clone(), spec: &spec, task: inst.kind(), alphabet: &[], seed: 0 };
    let mut agent = RemoteAgent::new(&setup, config(), transport, audit.clone());
    let ctx = AgentContext::new(&lay.chunks[0], 1, 4);
    let Plan::Decide(d) = lay.role(1).plan(&ctx).unwrap() else { panic!("worker decides at t=1") };
    assert_eq!(agent.step(&ctx).unwrap(), d.then.apply(sym("D")));
    assert_eq!(audit.len(), 1);
    assert_eq!(audit.records()[0].template, TemplateId::RecallWorker);
    assert_eq!(audit.records()[0].answer.as_deref(), Some("D"));
}

#[test]
fn recall_run_through_a_prose_reader_is_correct() {
    for (w, seed) in [(1, 1u64), (2, 2), (4, 3), (8, 4)] {
        let inst = InstanceParams::new(TaskKind::Recall, 16).generate(seed).unwrap();
        let transport = FnTransport(|req: &ChatRequest| {
            let text = req.user_text();
            let content = if text.contains(" | Query: ") {
                recall_reader(text)
            } else {
                let hit = text.split(' ').find(|r| *r != "NOT_FOUND").unwrap_or("NOT_FOUND");
                format!("The answer is: {hit}")
            };
            Ok(ChatResponse { content, usage: Some(Usage { prompt_tokens: 10, completion_tokens: 3 }) })
        });
        let factory = RemoteFactory::new(config(), Arc::new(transport));
        let r = run(&ProtocolSpec::recall_broadcast(w, false), &inst, &factory, seed).unwrap();
        assert!(r.correct, "w={w}");
        let calls = if w == 1 { 1 } else { w + 1 };
        assert_eq!(factory.audit.len(), calls);
        assert_eq!(factory.audit.completion_tokens(), 3 * calls as u64);
    }
}

#[test]
fn garbage_reply_fails_the_run_without_panicking() {
    let inst = InstanceParams::new(TaskKind::Recall, 8).generate(5).unwrap();
    let transport = FnTransport(|_: &ChatRequest| Ok(ChatResponse { content: "I am not sure.".into(), usage: None }));
    let factory = RemoteFactory::new(config(), Arc::new(transport));
    let r = run(&ProtocolSpec::recall_broadcast(2, false), &inst, &factory, 0).unwrap();
    assert!(!r.correct);
    assert!(matches!(r.failure, Some(RunFailure::Agent(AgentError::Unparseable { .. }))));
}

#[test]
fn retry_after_timeout_matches_immediate_success() {
    let inst = khop_instance(20, 2, 9);
    let spec = ProtocolSpec::iterative_query(3);
    let plain = RemoteFactory::new(config(), Arc::new(FnTransport(|r: &ChatRequest| Ok(ChatResponse { content: khop_reader(r), usage: None }))));
    let fails = Arc::new(Mutex::new(0usize));
    let f2 = fails.clone();
    let flaky = RemoteFactory::new(
        config(),
        Arc::new(FnTransport(move |r: &ChatRequest| {
            let mut n = f2.lock().unwrap();
            *n += 1;
            if *n % 2 == 1 {
                Err(TransportError::Timeout)
            } else {
                Ok(ChatResponse { content: khop_reader(r), usage: None })
            }
        })),
    );
    let a = run(&spec, &inst, &plain, 4).unwrap();
    let b = run(&spec, &inst, &flaky, 4).unwrap();
    assert!(a.correct);
    assert_eq!(a.dag, b.dag);
    assert_eq!(a.answer, b.answer);
    assert_eq!(flaky.audit.len(), 2 * plain.audit.len());
    assert!(flaky.audit.records().iter().filter(|r| r.attempt == 1).all(|r| r.error.is_none()));
}

#[test]
fn exhausted_retries_mark_the_agent_unavailable() {
    let inst = khop_instance(20, 2, 9);
    let mut cfg = config();
    cfg.max_retries = 2;
    let script = ScriptedTransport::new().push_err(TransportError::Http { status: 503, body: String::new() });
    let script = (0..5).fold(script, |s, _| s.push_err(TransportError::Timeout));
    let transport = Arc::new(script);
    let factory = RemoteFactory::new(cfg, transport.clone());
    let r = run(&ProtocolSpec::iterative_query(3), &inst, &factory, 0).unwrap();
    assert!(!r.correct);
    assert!(matches!(r.failure, Some(RunFailure::Agent(AgentError::Unavailable { .. }))));
    assert_eq!(transport.calls(), 3);
}

#[test]
fn unscripted_requests_are_not_retried() {
    let transport = Arc::new(ScriptedTransport::new());
    let factory = RemoteFactory::new(config(), transport.clone());
    let r = run(&ProtocolSpec::iterative_query(3), &khop_instance(20, 2, 1), &factory, 0).unwrap();
    assert!(matches!(r.failure, Some(RunFailure::Agent(AgentError::Unavailable { .. }))));
    assert_eq!(transport.calls(), 1);
}

/// The end-to-end contract: a scripted k=4, N=100, w=5 run reaches the
/// oracle answer and leaves one audit record per model decision.
#[test]
fn scripted_iterative_query_run() {
    let (n, k, w) = (100, 4, 5);
    let inst = khop_instance(n, k, 2024);
    let spec = ProtocolSpec::iterative_query(w);

    // Record a prose reader's replies as a script keyed on the task text.
    let recorder = RemoteFactory::new(config(), Arc::new(FnTransport(|r: &ChatRequest| Ok(ChatResponse { content: khop_reader(r), usage: None }))));
    run(&spec, &inst, &recorder, 7).unwrap();
    let script = recorder
        .audit
        .records()
        .into_iter()
        .fold(ScriptedTransport::new(), |s, rec| s.on(rec.request.user_text(), rec.response.unwrap()));

    let transport = Arc::new(script);
    let factory = RemoteFactory::new(config(), transport.clone());
    let r = run(&spec, &inst, &factory, 7).unwrap();
    assert!(r.correct, "{:?}", r.failure);
    assert_eq!(r.answer.as_ref(), Some(&inst.oracle_answer()));
    assert_eq!(r.metrics.comm_budget, 2 * k);

    let records = factory.audit.records();
    assert_eq!(records.len(), 2 * k - 1);
    assert_eq!(transport.calls(), 2 * k - 1);
    assert_eq!(records.iter().filter(|r| r.template == TemplateId::KhopWorker).count(), k);
    assert_eq!(records.iter().filter(|r| r.template == TemplateId::KhopManager).count(), k - 1);
    for rec in &records {
        assert!(rec.error.is_none() && rec.response.is_some());
        assert_eq!(rec.answer.as_deref(), Some(rec.expected.as_str()));
        assert_eq!(rec.request.messages[0].content, rec.template.system_prompt());
        assert_eq!(rec.request.temperature, 0.0);
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("audit.ndjson");
    factory.audit.write_ndjson(&path).unwrap();
    let lines: Vec<AuditRecord> = std::fs::read_to_string(&path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines, records);
}

#[test]
fn template_selection_follows_duty_and_task() {
    use masim_protocols::Family;
    let fold = Duty::Fold { elements: syms(&["1"]) };
    let comb = Duty::Combine { parts: syms(&["1", "0"]) };
    let t = |d: &Duty, k, task, f| select_template(d, k, Some(task), f).unwrap();
    assert_eq!(t(&fold, RoleKind::Solo, TaskKind::Parity, Family::MajorityVote), TemplateId::ParityMajority);
    assert_eq!(t(&fold, RoleKind::Worker, TaskKind::S5, Family::ChainOfAgents), TemplateId::PermWorker);
    assert_eq!(t(&comb, RoleKind::Manager, TaskKind::Parity, Family::PrefixSum), TemplateId::PrefixManager);
    assert_eq!(t(&comb, RoleKind::Worker, TaskKind::Parity, Family::ChainOfAgents), TemplateId::ParityManager);
    assert_eq!(
        resolve_template(Some(TemplateChoice::MajorityAgent), &fold, RoleKind::Solo, Some(TaskKind::S5), Family::MajorityVote),
        Some(TemplateId::PermMajority)
    );
}

#[test]
fn config_parsing_and_validation() {
    let c: RemoteAgentConfig = serde_json::from_str(
        r#"{"endpoint":"https://api.example.com/v1/chat/completions","model":"m","auth_env":"API_KEY","template":"majority_agent"}"#,
    )
    .unwrap();
    assert_eq!(c.template, Some(TemplateChoice::MajorityAgent));
    assert_eq!(c.temperature, 0.0);
    assert_eq!(c.max_tokens, 1024);
    c.validate().unwrap();
    assert!(serde_json::from_str::<RemoteAgentConfig>(r#"{"endpoint":"x","model":"m","auth_env":"K","api_key":"s"}"#).is_err());
    assert!(serde_json::from_str::<RemoteAgentConfig>(r#"{"endpoint":"x","model":"m","auth_env":"K","template":"nope"}"#).is_err());
    let mut bad = c.clone();
    bad.endpoint = "ftp://x".into();
    assert!(bad.validate().is_err());
    let mut missing = c;
    missing.auth_env = "MASIM_SURELY_UNSET_VARIABLE".into();
    assert!(matches!(HttpTransport::from_config(&missing), Err(BridgeError::Config(_))));
}

#[test]
fn wire_format() {
    let req = ChatRequest { model: "m".into(), messages: vec![Message::system("s"), Message::user("u")], temperature: 0.0, max_tokens: 8 };
    let v = encode_request(&req);
    assert_eq!(v["messages"][0]["role"], "system");
    assert_eq!(v["messages"][1]["content"], "u");
    assert_eq!(v["temperature"], 0.0);
    let body = serde_json::json!({"choices":[{"message":{"role":"assistant","content":"The answer is: 1"}}],"usage":{"prompt_tokens":5,"completion_tokens":2,"total_tokens":7}});
    let resp = decode_completion(&body).unwrap();
    assert_eq!(resp.content, "The answer is: 1");
    assert_eq!(resp.usage, Some(Usage { prompt_tokens: 5, completion_tokens: 2 }));
    assert!(matches!(decode_completion(&serde_json::json!({"choices":[]})), Err(TransportError::Decode(_))));
}

#[test]
fn state_tracking_runs_through_remote_agents() {
    // A reader that folds parity and swap prompts from the prose alone.
    let reader = |req: &ChatRequest| -> Result<ChatResponse, TransportError> {
        let user = req.user_text();
        let content = if user.chars().all(|c| c == '0' || c == '1') {
            let ones = user.chars().filter(|&c| c == '1').count();
            format!("Final count: {ones}\nThe answer is: {}", ones % 2)
        } else {
            let mut bins: Vec<u32> = (1..=5).collect();
            for line in user.lines() {
                if let Some(rest) = line.strip_prefix("Current positions: ") {
                    bins = masim_tasks::render::parse_perm_dict(rest).unwrap().as_str().chars().map(|c| c.to_digit(10).unwrap()).collect();
                } else if let Some(rest) = line.strip_prefix("Swap ball ") {
                    let (x, y) = rest.split_once(" and ball ").unwrap();
                    bins.swap(x.parse::<usize>().unwrap() - 1, y.parse::<usize>().unwrap() - 1);
                }
            }
            let body: Vec<String> = bins.iter().enumerate().map(|(i, b)| format!("{}:{b}", i + 1)).collect();
            format!("The answer is: {{{}}}", body.join(", "))
        };
        Ok(ChatResponse { content, usage: None })
    };
    for (kind, spec) in [
        (TaskKind::Parity, ProtocolSpec::prefix_sum(4, 2)),
        (TaskKind::Parity, ProtocolSpec::chain_of_agents(4)),
        (TaskKind::Parity, ProtocolSpec::majority_vote(3)),
        (TaskKind::S5, ProtocolSpec::chain_of_agents(3)),
        (TaskKind::S5, ProtocolSpec::prefix_sum(4, 2)),
        (TaskKind::S5, ProtocolSpec::majority_vote(3)),
    ] {
        for seed in 0..3u64 {
            let inst = InstanceParams::new(kind, 12).generate(seed).unwrap();
            let factory = RemoteFactory::new(config(), Arc::new(FnTransport(reader)));
            let r = run(&spec, &inst, &factory, seed).unwrap();
            assert!(r.correct, "{kind} {spec} seed {seed}: {:?}", r.failure);
            assert!(!factory.audit.is_empty());
            for rec in factory.audit.records() {
                assert_eq!(rec.answer.as_deref(), Some(rec.expected.as_str()), "{kind} {spec} {}", rec.template);
            }
        }
    }
}
