use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::patch::{ModuleKind, PatchGraph, PortRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn error(message: String) -> Self {
        Self { severity: Severity::Error, message }
    }

    fn warning(message: String) -> Self {
        Self { severity: Severity::Warning, message }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}

fn check_output(graph: &PatchGraph, r: &PortRef, what: &str, out: &mut Vec<Diagnostic>) -> bool {
    match graph.nodes.get(&r.node) {
        None => {
            out.push(Diagnostic::error(format!("{what} {r}: unknown node '{}'", r.node)));
            false
        }
        Some(p) if !p.has_output(&r.port) => {
            let why = if p.has_input(&r.port) { "is an input" } else { "no such port" };
            out.push(Diagnostic::error(format!("{what} {r}: {why} on {}", p.kind())));
            false
        }
        Some(_) => true,
    }
}

/// Dependency edges between nodes; edges leaving a delay are sample boundaries and carry no
/// same-sample dependency.
pub(crate) fn dependency_edges(graph: &PatchGraph) -> BTreeMap<&str, BTreeSet<&str>> {
    let mut deps: BTreeMap<&str, BTreeSet<&str>> =
        graph.nodes.keys().map(|n| (n.as_str(), BTreeSet::new())).collect();
    for e in &graph.edges {
        if graph.node_kind(&e.from.node) == Some(ModuleKind::Delay) {
            continue;
        }
        let wired = graph.nodes.get(&e.from.node).is_some_and(|p| p.has_output(&e.from.port))
            && graph.nodes.get(&e.to.node).is_some_and(|p| p.has_input(&e.to.port));
        if !wired {
            continue;
        }
        if let Some(targets) = deps.get_mut(e.from.node.as_str()) {
            targets.insert(e.to.node.as_str());
        }
    }
    deps
}

/// Finds one delay-free cycle per strongly connected tangle, as node name paths.
pub(crate) fn find_cycles<'a>(deps: &BTreeMap<&'a str, BTreeSet<&'a str>>) -> Vec<Vec<&'a str>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut mark: BTreeMap<&str, Mark> = deps.keys().map(|&k| (k, Mark::New)).collect();
    let mut cycles = Vec::new();

    for &root in deps.keys() {
        if mark[root] != Mark::New {
            continue;
        }
        // Iterative DFS; `path` mirrors the active stack.
        let mut stack: Vec<(&str, std::collections::btree_set::Iter<&str>)> =
            vec![(root, deps[root].iter())];
        let mut path = vec![root];
        mark.insert(root, Mark::Active);
        while let Some((_, it)) = stack.last_mut() {
            match it.next() {
                Some(&next) => match mark[next] {
                    Mark::New => {
                        mark.insert(next, Mark::Active);
                        path.push(next);
                        stack.push((next, deps[next].iter()));
                    }
                    Mark::Active => {
                        let start = path.iter().position(|&n| n == next).expect("on path");
                        let mut cycle = path[start..].to_vec();
                        cycle.push(next);
                        cycles.push(cycle);
                    }
                    Mark::Done => {}
                },
                None => {
                    let (node, _) = stack.pop().expect("non-empty");
                    mark.insert(node, Mark::Done);
                    path.pop();
                }
            }
        }
    }
    cycles
}

/// Checks a parsed graph. Errors make it unrenderable; warnings do not.
pub fn validate(graph: &PatchGraph) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut drivers: BTreeMap<&PortRef, Vec<&PortRef>> = BTreeMap::new();

    for e in &graph.edges {
        check_output(graph, &e.from, "connection source", &mut out);
        match graph.nodes.get(&e.to.node) {
            None => out.push(Diagnostic::error(format!(
                "connection target {}: unknown node '{}'",
                e.to, e.to.node
            ))),
            Some(p) if !p.has_input(&e.to.port) => {
                let why = if p.has_output(&e.to.port) { "is an output" } else { "no such port" };
                out.push(Diagnostic::error(format!(
                    "connection target {}: {why} on {}",
                    e.to,
                    p.kind()
                )));
            }
            Some(_) => drivers.entry(&e.to).or_default().push(&e.from),
        }
    }

    for (input, sources) in &drivers {
        if sources.len() > 1 {
            let list: Vec<String> = sources.iter().map(|s| s.to_string()).collect();
            out.push(Diagnostic::error(format!(
                "multiple drivers for {input}: {} (use a mixer to sum)",
                list.join(", ")
            )));
        }
    }

    for (name, binding) in [("left", &graph.outputs.left), ("right", &graph.outputs.right)] {
        if let Some(r) = binding {
            if !graph.nodes.contains_key(&r.node) || !graph.nodes[&r.node].has_output(&r.port) {
                out.push(Diagnostic::error(format!("dangling output binding: {name} -> {r}")));
            }
        }
    }
    for p in &graph.probes {
        check_output(graph, &p.source, &format!("probe '{}'", p.label), &mut out);
    }

    for cycle in find_cycles(&dependency_edges(graph)) {
        out.push(Diagnostic::error(format!(
            "delay-free cycle: {} (insert a delay node)",
            cycle.join(" -> ")
        )));
    }

    for (name, params) in &graph.nodes {
        for port in params.input_ports() {
            let r = PortRef::new(name.clone(), port.clone());
            if params.input_required(&port) && !drivers.contains_key(&r) {
                out.push(Diagnostic::warning(format!("unconnected input {r} reads 0 V")));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::patch::parse_patch;

    fn errors(text: &str) -> Vec<String> {
        validate(&parse_patch(text).unwrap())
            .into_iter()
            .filter(Diagnostic::is_error)
            .map(|d| d.message)
            .collect()
    }

    #[test]
    fn multiple_drivers() {
        let e = errors(
            "module pre preamp\nmodule ef1 envfollower\nconnect sid.audio -> pre.in\n\
             connect sid.audio -> ef1.in\nconnect pre.out -> ef1.in\n",
        );
        assert_eq!(e.len(), 1);
        assert!(e[0].starts_with("multiple drivers for ef1.in"), "{e:?}");
    }

    #[test]
    fn delay_free_cycle() {
        let e = errors(
            "module vco1 vco\nmodule vcf1 vcf\nconnect vco1.out -> vcf1.in\nconnect vcf1.lp -> vco1.fm\n",
        );
        assert_eq!(e, ["delay-free cycle: vcf1 -> vco1 -> vcf1 (insert a delay node)"]);
    }

    #[test]
    fn delay_breaks_cycle() {
        let e = errors(
            "module vco1 vco\nmodule vcf1 vcf\nmodule z delay\nconnect vco1.saw -> vcf1.in\n\
             connect vcf1.lp -> z.in\nconnect z.out -> vco1.fm\n",
        );
        assert!(e.is_empty(), "{e:?}");
    }

    #[test]
    fn self_loop() {
        let e = errors("module o offset\nconnect o.out -> o.in\n");
        assert_eq!(e, ["delay-free cycle: o -> o (insert a delay node)"]);
    }

    #[test]
    fn port_direction_and_names() {
        let e = errors(
            "module a vca\nconnect a.in -> a.cv\nconnect sid.audio -> a.out\nconnect sid.audio -> a.nope\n",
        );
        assert_eq!(e.len(), 3, "{e:?}");
        assert!(e[0].contains("is an input"));
        assert!(e[1].contains("is an output"));
        assert!(e[2].contains("no such port"));
    }

    #[test]
    fn dangling_output_binding() {
        let e = errors("module a vca\noutput left a.gate\n");
        assert_eq!(e, ["dangling output binding: left -> a.gate"]);
        let e = errors("probe sid.nothing as x\n");
        assert_eq!(e.len(), 1);
    }

    #[test]
    fn unconnected_required_inputs_warn() {
        let d = validate(&parse_patch("module a vca\nmodule v vco\nconnect sid.audio -> a.in\n").unwrap());
        assert_eq!(d, [Diagnostic::warning("unconnected input a.cv reads 0 V".into())]);
        assert!(!has_errors(&d));
    }

    #[test]
    fn passthrough_is_clean() {
        assert!(validate(&PatchGraph::passthrough()).is_empty());
    }
}
