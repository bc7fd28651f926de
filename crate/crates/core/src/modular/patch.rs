//! Patch graph types and the line-oriented patch language.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::modules::{
    ComparatorParams, EnvFollowerParams, VcfParams, VcoParams, DEFAULT_PREAMP_GAIN, VCF_MAX_Q,
    VCF_MIN_Q,
};

/// Name of the predeclared chip source node.
pub const SID_NODE: &str = "sid";
/// Its only port.
pub const SID_PORT: &str = "audio";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModuleKind {
    Sid,
    Preamp,
    EnvFollower,
    Comparator,
    SampleHold,
    Vco,
    Vcf,
    Vca,
    RingMod,
    Mixer,
    Offset,
    Delay,
}

impl ModuleKind {
    /// Kinds a patch may declare (`sid` is predeclared).
    pub const DECLARABLE: [ModuleKind; 11] = [
        ModuleKind::Preamp,
        ModuleKind::EnvFollower,
        ModuleKind::Comparator,
        ModuleKind::SampleHold,
        ModuleKind::Vco,
        ModuleKind::Vcf,
        ModuleKind::Vca,
        ModuleKind::RingMod,
        ModuleKind::Mixer,
        ModuleKind::Offset,
        ModuleKind::Delay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModuleKind::Sid => "sid",
            ModuleKind::Preamp => "preamp",
            ModuleKind::EnvFollower => "envfollower",
            ModuleKind::Comparator => "comparator",
            ModuleKind::SampleHold => "samplehold",
            ModuleKind::Vco => "vco",
            ModuleKind::Vcf => "vcf",
            ModuleKind::Vca => "vca",
            ModuleKind::RingMod => "ringmod",
            ModuleKind::Mixer => "mixer",
            ModuleKind::Offset => "offset",
            ModuleKind::Delay => "delay",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::DECLARABLE.into_iter().find(|k| k.name() == name)
    }

    pub fn output_ports(self) -> &'static [&'static str] {
        match self {
            ModuleKind::Sid => &[SID_PORT],
            ModuleKind::EnvFollower => &["cv"],
            ModuleKind::Comparator => &["gate", "trigger"],
            ModuleKind::Vco => &["sine", "tri", "saw", "pulse", "out"],
            ModuleKind::Vcf => &["lp", "bp", "hp"],
            _ => &["out"],
        }
    }

    /// Parameter keys and their units, for the `modules` reference.
    pub fn param_help(self) -> &'static [(&'static str, &'static str)] {
        match self {
            ModuleKind::Sid | ModuleKind::SampleHold | ModuleKind::Vca | ModuleKind::RingMod | ModuleKind::Delay => &[],
            ModuleKind::Preamp => &[("gain", "ratio, default 10")],
            ModuleKind::EnvFollower => &[("attack", "seconds, default 5ms"), ("release", "seconds, default 50ms")],
            ModuleKind::Comparator => &[
                ("threshold", "volts, default 2.5"),
                ("hysteresis", "volts, default 0.5"),
                ("gate_high", "volts, default 5"),
                ("trigger_len", "seconds, default 1ms"),
            ],
            ModuleKind::Vco => &[
                ("f0", "Hz, default 440"),
                ("voct_enabled", "true|false, default true"),
                ("fm_depth", "Hz per volt, default 0"),
            ],
            ModuleKind::Vcf => &[
                ("cutoff", "Hz, default 1000"),
                ("q", "ratio in [0.5, 20], default 0.707"),
                ("cv_scale", "octaves per volt, default 1"),
            ],
            ModuleKind::Mixer => &[("gains", "comma-separated ratios, one per input, default 1,1,1,1")],
            ModuleKind::Offset => &[("add", "volts, default 0"), ("mul", "ratio, default 1")],
        }
    }
}

impl fmt::Display for ModuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModuleParams {
    Sid,
    Preamp { gain: f64 },
    EnvFollower(EnvFollowerParams),
    Comparator(ComparatorParams),
    SampleHold,
    Vco(VcoParams),
    Vcf(VcfParams),
    Vca,
    RingMod,
    Mixer { gains: Vec<f64> },
    Offset { add: f64, mul: f64 },
    Delay,
}

impl ModuleParams {
    pub fn default_for(kind: ModuleKind) -> Self {
        match kind {
            ModuleKind::Sid => ModuleParams::Sid,
            ModuleKind::Preamp => ModuleParams::Preamp { gain: DEFAULT_PREAMP_GAIN },
            ModuleKind::EnvFollower => ModuleParams::EnvFollower(Default::default()),
            ModuleKind::Comparator => ModuleParams::Comparator(Default::default()),
            ModuleKind::SampleHold => ModuleParams::SampleHold,
            ModuleKind::Vco => ModuleParams::Vco(Default::default()),
            ModuleKind::Vcf => ModuleParams::Vcf(Default::default()),
            ModuleKind::Vca => ModuleParams::Vca,
            ModuleKind::RingMod => ModuleParams::RingMod,
            ModuleKind::Mixer => ModuleParams::Mixer { gains: vec![1.0; 4] },
            ModuleKind::Offset => ModuleParams::Offset { add: 0.0, mul: 1.0 },
            ModuleKind::Delay => ModuleParams::Delay,
        }
    }

    pub fn kind(&self) -> ModuleKind {
        match self {
            ModuleParams::Sid => ModuleKind::Sid,
            ModuleParams::Preamp { .. } => ModuleKind::Preamp,
            ModuleParams::EnvFollower(_) => ModuleKind::EnvFollower,
            ModuleParams::Comparator(_) => ModuleKind::Comparator,
            ModuleParams::SampleHold => ModuleKind::SampleHold,
            ModuleParams::Vco(_) => ModuleKind::Vco,
            ModuleParams::Vcf(_) => ModuleKind::Vcf,
            ModuleParams::Vca => ModuleKind::Vca,
            ModuleParams::RingMod => ModuleKind::RingMod,
            ModuleParams::Mixer { .. } => ModuleKind::Mixer,
            ModuleParams::Offset { .. } => ModuleKind::Offset,
            ModuleParams::Delay => ModuleKind::Delay,
        }
    }

    /// Input ports in evaluation order.
    pub fn input_ports(&self) -> Vec<String> {
        let fixed: &[&str] = match self {
            ModuleParams::Sid => &[],
            ModuleParams::SampleHold => &["in", "gate"],
            ModuleParams::Vco(_) => &["voct", "fm"],
            ModuleParams::Vcf(_) => &["in", "cutoff"],
            ModuleParams::Vca => &["in", "cv"],
            ModuleParams::RingMod => &["a", "b"],
            ModuleParams::Mixer { gains } => {
                return (1..=gains.len()).map(|i| format!("in{i}")).collect();
            }
            _ => &["in"],
        };
        fixed.iter().map(|s| s.to_string()).collect()
    }

    /// Whether leaving `port` unconnected deserves a warning.
    pub fn input_required(&self, port: &str) -> bool {
        match self {
            ModuleParams::Vco(_) => false,
            ModuleParams::Vcf(_) => port == "in",
            ModuleParams::Mixer { .. } => port == "in1",
            _ => true,
        }
    }

    pub fn has_input(&self, port: &str) -> bool {
        self.input_ports().iter().any(|p| p == port)
    }

    pub fn has_output(&self, port: &str) -> bool {
        self.kind().output_ports().contains(&port)
    }
}

/// `node.port`
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortRef {
    pub node: String,
    pub port: String,
}

impl PortRef {
    pub fn new(node: impl Into<String>, port: impl Into<String>) -> Self {
        Self { node: node.into(), port: port.into() }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.node, self.port)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: PortRef,
    pub to: PortRef,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Probe {
    pub source: PortRef,
    pub label: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OutputBindings {
    pub left: Option<PortRef>,
    pub right: Option<PortRef>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchGraph {
    pub nodes: BTreeMap<String, ModuleParams>,
    pub edges: Vec<Edge>,
    pub probes: Vec<Probe>,
    pub outputs: OutputBindings,
}

impl Default for PatchGraph {
    fn default() -> Self {
        Self::new()
    }
}

impl PatchGraph {
    /// Empty graph holding only the predeclared `sid` node.
    pub fn new() -> Self {
        let mut nodes = BTreeMap::new();
        nodes.insert(SID_NODE.to_string(), ModuleParams::Sid);
        Self { nodes, edges: Vec::new(), probes: Vec::new(), outputs: OutputBindings::default() }
    }

    /// `sid.audio` straight to the left output.
    pub fn passthrough() -> Self {
        let mut g = Self::new();
        g.outputs.left = Some(PortRef::new(SID_NODE, SID_PORT));
        g
    }

    /// Adds a node; returns false if the name is taken.
    pub fn add_module(&mut self, name: impl Into<String>, params: ModuleParams) -> bool {
        let name = name.into();
        if self.nodes.contains_key(&name) {
            return false;
        }
        self.nodes.insert(name, params);
        true
    }

    pub fn connect(&mut self, from: PortRef, to: PortRef) {
        self.edges.push(Edge { from, to });
    }

    pub fn is_stereo(&self) -> bool {
        self.outputs.right.is_some()
    }

    pub fn node_kind(&self, name: &str) -> Option<ModuleKind> {
        self.nodes.get(name).map(ModuleParams::kind)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("patch line {line}: {kind}")]
pub struct PatchError {
    pub line: usize,
    pub kind: PatchErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatchErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("invalid node name '{0}'")]
    InvalidName(String),
    #[error("duplicate node name '{0}'")]
    DuplicateName(String),
    #[error("unknown module kind '{0}'")]
    UnknownKind(String),
    #[error("unknown parameter '{param}' for {kind}")]
    UnknownParam { kind: ModuleKind, param: String },
    #[error("duplicate parameter '{0}'")]
    DuplicateParam(String),
    #[error("bad unit suffix in '{0}'")]
    BadUnit(String),
    #[error("bad value for '{param}': {reason}")]
    BadValue { param: String, reason: String },
    #[error("unknown node '{0}'")]
    UnknownNode(String),
    #[error("invalid probe label '{0}'")]
    InvalidLabel(String),
    #[error("duplicate probe label '{0}'")]
    DuplicateLabel(String),
    #[error("{0} output bound twice")]
    DuplicateOutput(&'static str),
}

fn valid_node_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// Probe labels end up as CSV column names.
fn valid_label(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

#[derive(Clone, Copy)]
enum Unit {
    Seconds,
    Hertz,
    Plain,
}

fn parse_quantity(raw: &str, unit: Unit) -> Result<f64, PatchErrorKind> {
    let lower = raw.to_ascii_lowercase();
    let split = lower
        .find(|c: char| c.is_ascii_alphabetic() && c != 'e')
        .unwrap_or(lower.len());
    let (num, suffix) = lower.split_at(split);
    if num.is_empty() {
        return Err(PatchErrorKind::Syntax(format!("bad number '{raw}'")));
    }
    let scale = match (unit, suffix) {
        (_, "") => 1.0,
        (Unit::Seconds, "s") => 1.0,
        (Unit::Seconds, "ms") => 1e-3,
        (Unit::Hertz, "hz") => 1.0,
        (Unit::Hertz, "khz") => 1e3,
        _ => return Err(PatchErrorKind::BadUnit(raw.to_string())),
    };
    let v: f64 = num.parse().map_err(|_| PatchErrorKind::Syntax(format!("bad number '{raw}'")))?;
    let v = v * scale;
    if !v.is_finite() {
        return Err(PatchErrorKind::Syntax(format!("bad number '{raw}'")));
    }
    Ok(v)
}

fn bad_value(param: &str, reason: &str) -> PatchErrorKind {
    PatchErrorKind::BadValue { param: param.to_string(), reason: reason.to_string() }
}

fn positive(param: &str, v: f64) -> Result<f64, PatchErrorKind> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(bad_value(param, "must be positive"))
    }
}

fn parse_bool(param: &str, raw: &str) -> Result<bool, PatchErrorKind> {
    match raw.to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(bad_value(param, "expected true or false")),
    }
}

fn apply_param(params: &mut ModuleParams, key: &str, raw: &str) -> Result<(), PatchErrorKind> {
    let kind = params.kind();
    let unknown = || PatchErrorKind::UnknownParam { kind, param: key.to_string() };
    match params {
        ModuleParams::Preamp { gain } if key == "gain" => *gain = parse_quantity(raw, Unit::Plain)?,
        ModuleParams::EnvFollower(p) => match key {
            "attack" => p.attack = positive(key, parse_quantity(raw, Unit::Seconds)?)?,
            "release" => p.release = positive(key, parse_quantity(raw, Unit::Seconds)?)?,
            _ => return Err(unknown()),
        },
        ModuleParams::Comparator(p) => match key {
            "threshold" => p.threshold = parse_quantity(raw, Unit::Plain)?,
            "hysteresis" => p.hysteresis = parse_quantity(raw, Unit::Plain)?,
            "gate_high" => p.gate_high = positive(key, parse_quantity(raw, Unit::Plain)?)?,
            "trigger_len" => p.trigger_len = positive(key, parse_quantity(raw, Unit::Seconds)?)?,
            _ => return Err(unknown()),
        },
        ModuleParams::Vco(p) => match key {
            "f0" => p.f0 = positive(key, parse_quantity(raw, Unit::Hertz)?)?,
            "voct_enabled" => p.voct_enabled = parse_bool(key, raw)?,
            "fm_depth" => p.fm_depth = parse_quantity(raw, Unit::Plain)?,
            _ => return Err(unknown()),
        },
        ModuleParams::Vcf(p) => match key {
            "cutoff" => p.cutoff = positive(key, parse_quantity(raw, Unit::Hertz)?)?,
            "q" => {
                let q = parse_quantity(raw, Unit::Plain)?;
                if !(VCF_MIN_Q..=VCF_MAX_Q).contains(&q) {
                    return Err(bad_value(key, "must lie in [0.5, 20]"));
                }
                p.q = q;
            }
            "cv_scale" => p.cv_scale = parse_quantity(raw, Unit::Plain)?,
            _ => return Err(unknown()),
        },
        ModuleParams::Mixer { gains } if key == "gains" => {
            *gains = raw
                .split(',')
                .map(|g| parse_quantity(g, Unit::Plain))
                .collect::<Result<_, _>>()?;
        }
        ModuleParams::Offset { add, mul } => match key {
            "add" => *add = parse_quantity(raw, Unit::Plain)?,
            "mul" => *mul = parse_quantity(raw, Unit::Plain)?,
            _ => return Err(unknown()),
        },
        _ => return Err(unknown()),
    }
    Ok(())
}

fn check_params(params: &ModuleParams) -> Result<(), PatchErrorKind> {
    if let ModuleParams::Comparator(p) = params {
        if !(0.0..p.threshold).contains(&p.hysteresis) {
            return Err(bad_value("hysteresis", "must be non-negative and below threshold"));
        }
    }
    Ok(())
}

fn parse_port_ref(s: &str) -> Result<PortRef, PatchErrorKind> {
    match s.split_once('.') {
        Some((node, port)) if !node.is_empty() && !port.is_empty() && !port.contains('.') => {
            Ok(PortRef::new(node, port))
        }
        _ => Err(PatchErrorKind::Syntax(format!("expected <node>.<port>, found '{s}'"))),
    }
}

/// Parses patch text. Port names are checked later by [`validate`](super::validate).
pub fn parse_patch(text: &str) -> Result<PatchGraph, PatchError> {
    let mut graph = PatchGraph::new();
    // Node references are resolved after all declarations are read.
    let mut references: Vec<(usize, String)> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |kind| PatchError { line, kind };
        let content = raw_line.split('#').next().unwrap_or("");
        let words: Vec<&str> = content.split_whitespace().collect();
        let Some((&head, rest)) = words.split_first() else { continue };

        match head {
            "module" => {
                let [name, kind, params @ ..] = rest else {
                    return Err(err(PatchErrorKind::Syntax(
                        "expected 'module <name> <kind> [key=value...]'".into(),
                    )));
                };
                if !valid_node_name(name) {
                    return Err(err(PatchErrorKind::InvalidName(name.to_string())));
                }
                if graph.nodes.contains_key(*name) {
                    return Err(err(PatchErrorKind::DuplicateName(name.to_string())));
                }
                let kind = ModuleKind::from_name(kind)
                    .ok_or_else(|| err(PatchErrorKind::UnknownKind(kind.to_string())))?;
                let mut p = ModuleParams::default_for(kind);
                let mut seen: Vec<&str> = Vec::new();
                for kv in params {
                    let (k, v) = kv.split_once('=').ok_or_else(|| {
                        err(PatchErrorKind::Syntax(format!("expected key=value, found '{kv}'")))
                    })?;
                    if seen.contains(&k) {
                        return Err(err(PatchErrorKind::DuplicateParam(k.to_string())));
                    }
                    seen.push(k);
                    apply_param(&mut p, k, v).map_err(err)?;
                }
                check_params(&p).map_err(err)?;
                graph.nodes.insert(name.to_string(), p);
            }
            "connect" => {
                let [from, "->", to] = rest else {
                    return Err(err(PatchErrorKind::Syntax(
                        "expected 'connect <node>.<port> -> <node>.<port>'".into(),
                    )));
                };
                let from = parse_port_ref(from).map_err(err)?;
                let to = parse_port_ref(to).map_err(err)?;
                references.push((line, from.node.clone()));
                references.push((line, to.node.clone()));
                graph.connect(from, to);
            }
            "probe" => {
                let [source, "as", label] = rest else {
                    return Err(err(PatchErrorKind::Syntax(
                        "expected 'probe <node>.<port> as <label>'".into(),
                    )));
                };
                let source = parse_port_ref(source).map_err(err)?;
                if !valid_label(label) {
                    return Err(err(PatchErrorKind::InvalidLabel(label.to_string())));
                }
                if graph.probes.iter().any(|p| p.label == *label) {
                    return Err(err(PatchErrorKind::DuplicateLabel(label.to_string())));
                }
                references.push((line, source.node.clone()));
                graph.probes.push(Probe { source, label: label.to_string() });
            }
            "output" => {
                let [channel, source] = rest else {
                    return Err(err(PatchErrorKind::Syntax(
                        "expected 'output left|right <node>.<port>'".into(),
                    )));
                };
                let source = parse_port_ref(source).map_err(err)?;
                let (slot, name) = match *channel {
                    "left" => (&mut graph.outputs.left, "left"),
                    "right" => (&mut graph.outputs.right, "right"),
                    other => {
                        return Err(err(PatchErrorKind::Syntax(format!(
                            "unknown output channel '{other}'"
                        ))))
                    }
                };
                if slot.is_some() {
                    return Err(err(PatchErrorKind::DuplicateOutput(name)));
                }
                references.push((line, source.node.clone()));
                *slot = Some(source);
            }
            other => {
                return Err(err(PatchErrorKind::Syntax(format!("unknown directive '{other}'"))));
            }
        }
    }

    for (line, node) in references {
        if !graph.nodes.contains_key(&node) {
            return Err(PatchError { line, kind: PatchErrorKind::UnknownNode(node) });
        }
    }
    Ok(graph)
}

/// Canonical patch text; parses back to an equal graph.
pub fn format_patch(graph: &PatchGraph) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    for (name, params) in &graph.nodes {
        if matches!(params, ModuleParams::Sid) {
            continue;
        }
        let _ = write!(out, "module {name} {}", params.kind());
        match params {
            ModuleParams::Preamp { gain } => {
                let _ = write!(out, " gain={gain}");
            }
            ModuleParams::EnvFollower(p) => {
                let _ = write!(out, " attack={}s release={}s", p.attack, p.release);
            }
            ModuleParams::Comparator(p) => {
                let _ = write!(
                    out,
                    " threshold={} hysteresis={} gate_high={} trigger_len={}s",
                    p.threshold, p.hysteresis, p.gate_high, p.trigger_len
                );
            }
            ModuleParams::Vco(p) => {
                let _ = write!(out, " f0={}hz voct_enabled={} fm_depth={}", p.f0, p.voct_enabled, p.fm_depth);
            }
            ModuleParams::Vcf(p) => {
                let _ = write!(out, " cutoff={}hz q={} cv_scale={}", p.cutoff, p.q, p.cv_scale);
            }
            ModuleParams::Mixer { gains } => {
                let list: Vec<String> = gains.iter().map(f64::to_string).collect();
                let _ = write!(out, " gains={}", list.join(","));
            }
            ModuleParams::Offset { add, mul } => {
                let _ = write!(out, " add={add} mul={mul}");
            }
            _ => {}
        }
        out.push('\n');
    }
    for e in &graph.edges {
        let _ = writeln!(out, "connect {} -> {}", e.from, e.to);
    }
    for p in &graph.probes {
        let _ = writeln!(out, "probe {} as {}", p.source, p.label);
    }
    if let Some(l) = &graph.outputs.left {
        let _ = writeln!(out, "output left {l}");
    }
    if let Some(r) = &graph.outputs.right {
        let _ = writeln!(out, "output right {r}");
    }
    out
}
