use crate::metrics::answer;
use crate::{Edge, ExecutionDag, NodeId, Symbol};

/// Simulates a multi-agent DAG with one agent.
///
/// The single agent walks the original nodes in time order (manager's final
/// node last), writing `ID_i` for the agent being simulated followed by the
/// token that created the node (`RECEIVE_sigma` for a message, `sigma` for a CoT
/// step). Its input is the concatenation of all chunks. If the last written
/// token is not the original answer, one answer step is appended, so the
/// answer is always preserved. Output size is at most `2 * size + width`.
pub fn to_single_agent(dag: &ExecutionDag) -> ExecutionDag {
    let adj = dag.adjacency();
    let manager_last = NodeId::new(dag.manager(), dag.length(dag.manager()));
    let mut nodes: Vec<NodeId> = dag.nodes().filter(|&n| n != manager_last).collect();
    nodes.sort_by_key(|n| (n.time, n.agent));
    nodes.push(manager_last);

    let mut chain: Vec<Symbol> = Vec::with_capacity(2 * nodes.len() + 1);
    for node in nodes {
        chain.push(Symbol::new(format!("ID_{}", node.agent)));
        if let Some(&k) = adj.incoming(node).first() {
            let e = &dag.edges()[k];
            chain.push(if e.is_comm() { Symbol::new(format!("RECEIVE_{}", e.symbol)) } else { e.symbol.clone() });
        }
    }
    if let Ok(ans) = answer(dag) {
        if chain.last() != Some(&ans) {
            chain.push(ans);
        }
    }

    let edges: Vec<Edge> = chain.into_iter().enumerate().map(|(t, s)| Edge::cot(1, t + 1, s)).collect();
    let chunk: Vec<Symbol> = dag.chunks().iter().flatten().cloned().collect();
    ExecutionDag::new(1, 1, vec![edges.len() + 1], edges, vec![chunk]).expect("single chain is in range")
}
