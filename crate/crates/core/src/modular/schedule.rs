use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::patch::PatchGraph;
use super::validate::{dependency_edges, find_cycles};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("delay-free cycle: {}", .0.join(" -> "))]
pub struct ScheduleError(pub Vec<String>);

/// Topological evaluation order. Delay outputs count as values from the previous sample, and
/// among ready nodes the lexicographically smallest name goes first.
pub fn schedule(graph: &PatchGraph) -> Result<Vec<String>, ScheduleError> {
    let deps = dependency_edges(graph);
    let mut indegree: BTreeMap<&str, usize> = deps.keys().map(|&k| (k, 0)).collect();
    for targets in deps.values() {
        for t in targets {
            *indegree.get_mut(t).expect("node") += 1;
        }
    }
    let mut ready: BTreeSet<&str> = indegree.iter().filter(|(_, &d)| d == 0).map(|(&k, _)| k).collect();
    let mut order = Vec::with_capacity(deps.len());
    while let Some(n) = ready.pop_first() {
        order.push(n.to_string());
        for t in &deps[n] {
            let d = indegree.get_mut(t).expect("node");
            *d -= 1;
            if *d == 0 {
                ready.insert(t);
            }
        }
    }
    if order.len() < deps.len() {
        let cycle = find_cycles(&deps).into_iter().next().unwrap_or_default();
        return Err(ScheduleError(cycle.into_iter().map(str::to_string).collect()));
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::patch::parse_patch;

    #[test]
    fn chain_order() {
        let g = parse_patch(
            "module sh samplehold\nmodule ef envfollower\nmodule pre preamp\n\
             connect ef.cv -> sh.in\nconnect pre.out -> ef.in\nconnect sid.audio -> pre.in\n",
        )
        .unwrap();
        assert_eq!(schedule(&g).unwrap(), ["sid", "pre", "ef", "sh"]);
    }

    #[test]
    fn independent_chains_interleave_by_name() {
        let g = parse_patch(
            "module b1 offset\nmodule b2 offset\nmodule a1 offset\nmodule a2 offset\n\
             connect b1.out -> b2.in\nconnect a1.out -> a2.in\n",
        )
        .unwrap();
        let first = schedule(&g).unwrap();
        assert_eq!(first, ["a1", "a2", "b1", "b2", "sid"]);
        assert_eq!(schedule(&g).unwrap(), first);
    }

    #[test]
    fn delay_closed_cycle_schedules() {
        let g = parse_patch(
            "module z delay\nmodule o offset\nconnect z.out -> o.in\nconnect o.out -> z.in\n",
        )
        .unwrap();
        assert_eq!(schedule(&g).unwrap(), ["o", "sid", "z"]);
    }

    #[test]
    fn delay_free_cycle_fails() {
        let g = parse_patch("module o offset\nmodule p offset\nconnect o.out -> p.in\nconnect p.out -> o.in\n")
            .unwrap();
        let e = schedule(&g).unwrap_err();
        assert_eq!(e.to_string(), "delay-free cycle: o -> p -> o");
    }
}
