//! Small directed-graph routines over string node ids.

use std::collections::{BTreeMap, BTreeSet};

/// Returns one cycle per back edge found by a depth-first search, each as a
/// closed path `[a, b, ..., a]`. Nodes are visited in the order given, and
/// successors in edge order, so the result is deterministic.
pub fn find_cycles<'a>(nodes: &[&'a str], edges: &[(&'a str, &'a str)]) -> Vec<Vec<String>> {
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for &(from, to) in edges {
        succ.entry(from).or_default().push(to);
    }
    let mut order: Vec<&str> = nodes.to_vec();
    for &(from, to) in edges {
        for n in [from, to] {
            if !order.contains(&n) {
                order.push(n);
            }
        }
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Fresh,
        Open,
        Done,
    }
    let mut mark: BTreeMap<&str, Mark> = order.iter().map(|&n| (n, Mark::Fresh)).collect();
    let mut cycles = Vec::new();

    for &root in &order {
        if mark[root] != Mark::Fresh {
            continue;
        }
        // Iterative DFS: (node, next successor index).
        let mut stack: Vec<(&str, usize)> = vec![(root, 0)];
        mark.insert(root, Mark::Open);
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            let children = succ.get(node).map(Vec::as_slice).unwrap_or(&[]);
            if *next < children.len() {
                let child = children[*next];
                *next += 1;
                match mark[child] {
                    Mark::Fresh => {
                        mark.insert(child, Mark::Open);
                        stack.push((child, 0));
                    }
                    Mark::Open => {
                        let start = stack.iter().position(|&(n, _)| n == child).unwrap();
                        let mut cycle: Vec<String> = stack[start..].iter().map(|&(n, _)| n.to_string()).collect();
                        cycle.push(child.to_string());
                        cycles.push(cycle);
                    }
                    Mark::Done => {}
                }
            } else {
                mark.insert(node, Mark::Done);
                stack.pop();
            }
        }
    }
    cycles
}

/// Nodes with no incoming edge, in the order given.
pub fn sources<'a>(nodes: &[&'a str], edges: &[(&str, &str)]) -> Vec<&'a str> {
    let targets: BTreeSet<&str> = edges.iter().map(|&(_, to)| to).collect();
    nodes.iter().copied().filter(|n| !targets.contains(n)).collect()
}

/// Nodes with no outgoing edge, in the order given.
pub fn sinks<'a>(nodes: &[&'a str], edges: &[(&str, &str)]) -> Vec<&'a str> {
    let origins: BTreeSet<&str> = edges.iter().map(|&(from, _)| from).collect();
    nodes.iter().copied().filter(|n| !origins.contains(n)).collect()
}
