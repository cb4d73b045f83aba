#![allow(dead_code)]

use masim_core::{Edge, ExecutionDag, Symbol};

pub fn syms(xs: &[&str]) -> Vec<Symbol> {
    xs.iter().map(|s| Symbol::new(*s)).collect()
}

/// Fig. 1a recall protocol with the manager aligned in time.
pub fn fig1a() -> ExecutionDag {
    let edges = vec![
        Edge::cot(1, 1, "NOT_FOUND"),
        Edge::cot(2, 1, "NOT_FOUND"),
        Edge::cot(3, 1, "D"),
        Edge::cot(4, 1, "WAIT"),
        Edge::comm(3, 2, 4, "D"),
        Edge::cot(4, 3, "D"),
    ];
    let chunks = vec![
        syms(&["4:C", "8:A", "7:?"]),
        syms(&["6:E", "1:H", "7:?"]),
        syms(&["7:D", "2:X", "7:?"]),
        vec![],
    ];
    ExecutionDag::new(4, 4, vec![2, 2, 2, 4], edges, chunks).unwrap()
}

/// Fig. 1b prefix sum on 11100100 with four agents and b = 2.
pub fn fig1b() -> ExecutionDag {
    let edges = vec![
        Edge::cot(1, 1, "0"),
        Edge::cot(2, 1, "1"),
        Edge::cot(3, 1, "1"),
        Edge::cot(4, 1, "0"),
        Edge::comm(1, 2, 2, "0"),
        Edge::comm(3, 2, 4, "1"),
        Edge::cot(2, 3, "1"),
        Edge::cot(4, 3, "1"),
        Edge::comm(2, 4, 4, "1"),
        Edge::cot(4, 5, "0"),
    ];
    let chunks = vec![syms(&["1", "1"]), syms(&["1", "0"]), syms(&["0", "1"]), syms(&["0", "0"])];
    ExecutionDag::new(4, 4, vec![2, 4, 2, 6], edges, chunks).unwrap()
}

/// Fig. 1c iterative query, edges as drawn, plus the answer edge.
pub fn fig1c() -> ExecutionDag {
    let edges = vec![
        Edge::comm(2, 1, 1, "boss(b)?"),
        Edge::comm(2, 1, 3, "boss(b)?"),
        Edge::cot(2, 1, "WAIT"),
        Edge::cot(1, 2, "NOT_FOUND"),
        Edge::cot(3, 2, "a"),
        Edge::comm(3, 2, 2, "a"),
        Edge::comm(2, 3, 1, "friend(a)?"),
        Edge::comm(2, 3, 3, "friend(a)?"),
        Edge::cot(2, 3, "WAIT"),
        Edge::cot(3, 4, "c"),
        Edge::comm(3, 4, 2, "c"),
        Edge::cot(2, 5, "c"),
    ];
    let chunks = vec![syms(&["boss(b)=a"]), syms(&["friend(boss(b))?"]), syms(&["friend(a)=c"])];
    ExecutionDag::new(3, 2, vec![4, 6, 5], edges, chunks).unwrap()
}

/// Builds a random legal DAG by simulating random agent choices.
///
/// `choices` drives every decision; each agent has a one-symbol chunk.
pub fn random_dag(width: usize, steps: usize, choices: &[u8]) -> ExecutionDag {
    let mut pick = choices.iter().cycle().copied();
    let mut lengths = vec![1usize; width];
    let mut alive = vec![true; width];
    let mut edges = Vec::new();
    for t in 1..=steps {
        let mut inbox = vec![false; width];
        let mut next_alive = vec![false; width];
        for i in 0..width {
            if !alive[i] {
                continue;
            }
            let c = pick.next().unwrap_or(0);
            let sym = format!("s{}", c % 3);
            let keep = c % 2 == 0;
            match c % 4 {
                0 => {}
                1 => {
                    if !inbox[i] {
                        inbox[i] = true;
                        next_alive[i] = true;
                        edges.push(Edge::cot(i + 1, t, sym.clone()));
                    }
                }
                2 => {
                    let j = (i + 1 + (c as usize / 4) % width.max(2)) % width;
                    if j != i && alive[j] && !inbox[j] {
                        inbox[j] = true;
                        next_alive[j] = true;
                        edges.push(Edge::comm(i + 1, t, j + 1, sym.clone()));
                    }
                    if keep && !inbox[i] {
                        inbox[i] = true;
                        next_alive[i] = true;
                        edges.push(Edge::cot(i + 1, t, "k"));
                    }
                }
                _ => {
                    let others: Vec<usize> = (0..width).filter(|&j| j != i).collect();
                    if !others.is_empty() && others.iter().all(|&j| alive[j] && !inbox[j]) {
                        for &j in &others {
                            inbox[j] = true;
                            next_alive[j] = true;
                            edges.push(Edge::comm(i + 1, t, j + 1, sym.clone()));
                        }
                        if keep && !inbox[i] {
                            inbox[i] = true;
                            next_alive[i] = true;
                            edges.push(Edge::cot(i + 1, t, "k"));
                        }
                    }
                }
            }
        }
        for i in 0..width {
            if next_alive[i] {
                lengths[i] = t + 1;
            }
        }
        alive = next_alive;
    }
    let chunks = (0..width).map(|i| vec![Symbol::new(format!("x{i}"))]).collect();
    ExecutionDag::new(width, width, lengths, edges, chunks).unwrap()
}
