//! Compiled per-sample evaluation of a validated patch.

use std::collections::HashMap;

use thiserror::Error;

use super::modules::{self, rail, Comparator, EnvFollower, SampleHold, Vcf, Vco};
use super::patch::{ModuleParams, PatchGraph, PortRef};
use super::schedule::{schedule, ScheduleError};
use super::validate::{has_errors, validate, Diagnostic};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("patch has {} error(s)", .0.iter().filter(|d| d.is_error()).count())]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("sample rate must be positive")]
    SampleRate,
    #[error("evaluation order must list every node once")]
    Order,
}

#[derive(Debug, Clone)]
enum NodeState {
    Sid,
    Preamp(f64),
    EnvFollower(EnvFollower),
    Comparator(Comparator),
    SampleHold(SampleHold),
    Vco(Vco),
    Vcf(Vcf),
    Vca,
    RingMod,
    Mixer(Vec<f64>),
    Offset { add: f64, mul: f64 },
    Delay { held: f64 },
}

impl NodeState {
    fn new(params: &ModuleParams) -> Self {
        match params {
            ModuleParams::Sid => NodeState::Sid,
            ModuleParams::Preamp { gain } => NodeState::Preamp(*gain),
            ModuleParams::EnvFollower(p) => NodeState::EnvFollower(EnvFollower::new(*p)),
            ModuleParams::Comparator(p) => NodeState::Comparator(Comparator::new(*p)),
            ModuleParams::SampleHold => NodeState::SampleHold(SampleHold::default()),
            ModuleParams::Vco(p) => NodeState::Vco(Vco::new(*p)),
            ModuleParams::Vcf(p) => NodeState::Vcf(Vcf::new(*p)),
            ModuleParams::Vca => NodeState::Vca,
            ModuleParams::RingMod => NodeState::RingMod,
            ModuleParams::Mixer { gains } => NodeState::Mixer(gains.clone()),
            ModuleParams::Offset { add, mul } => NodeState::Offset { add: *add, mul: *mul },
            ModuleParams::Delay => NodeState::Delay { held: 0.0 },
        }
    }
}

#[derive(Debug, Clone)]
struct Node {
    name: String,
    state: NodeState,
    /// Source slot per input port; `None` reads 0 V.
    inputs: Vec<Option<usize>>,
    /// First output slot; outputs are contiguous in port order.
    out: usize,
}

/// Output of [`PatchEngine::process_block`]. `right` is present iff the patch binds it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BlockOutput {
    pub left: Vec<f64>,
    pub right: Option<Vec<f64>>,
    /// Probe label and samples, in declaration order.
    pub traces: Vec<(String, Vec<f64>)>,
}

impl BlockOutput {
    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct PatchEngine {
    nodes: Vec<Node>,
    delays: Vec<usize>,
    slots: Vec<f64>,
    left: Option<usize>,
    right: Option<usize>,
    probes: Vec<(String, usize)>,
    dt: f64,
}

impl PatchEngine {
    /// Validates, schedules and compiles `graph`. Warnings are accepted.
    pub fn new(graph: &PatchGraph, sample_rate: f64) -> Result<Self, EngineError> {
        Self::check(graph)?;
        Self::compile(graph, &schedule(graph)?, sample_rate)
    }

    /// Compiles with an explicit evaluation order. Any topological order gives the same
    /// output as the canonical one.
    pub fn with_order(graph: &PatchGraph, order: &[String], sample_rate: f64) -> Result<Self, EngineError> {
        Self::check(graph)?;
        let mut sorted: Vec<&String> = order.iter().collect();
        sorted.sort();
        if !sorted.iter().copied().eq(graph.nodes.keys()) {
            return Err(EngineError::Order);
        }
        Self::compile(graph, order, sample_rate)
    }

    fn check(graph: &PatchGraph) -> Result<(), EngineError> {
        let diagnostics = validate(graph);
        if has_errors(&diagnostics) {
            return Err(EngineError::Invalid(diagnostics));
        }
        Ok(())
    }

    fn compile(graph: &PatchGraph, order: &[String], sample_rate: f64) -> Result<Self, EngineError> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(EngineError::SampleRate);
        }
        let mut slot_of: HashMap<PortRef, usize> = HashMap::new();
        let mut next_slot = 0;
        for name in order {
            for port in graph.nodes[name].kind().output_ports() {
                slot_of.insert(PortRef::new(name.clone(), *port), next_slot);
                next_slot += 1;
            }
        }
        let mut drivers: HashMap<&PortRef, usize> = HashMap::new();
        for e in &graph.edges {
            drivers.insert(&e.to, slot_of[&e.from]);
        }

        let mut nodes = Vec::with_capacity(order.len());
        let mut delays = Vec::new();
        for name in order {
            let params = &graph.nodes[name];
            let inputs = params
                .input_ports()
                .into_iter()
                .map(|p| drivers.get(&PortRef::new(name.clone(), p)).copied())
                .collect();
            if matches!(params, ModuleParams::Delay) {
                delays.push(nodes.len());
            }
            let out = slot_of[&PortRef::new(name.clone(), params.kind().output_ports()[0])];
            nodes.push(Node { name: name.clone(), state: NodeState::new(params), inputs, out });
        }

        Ok(Self {
            nodes,
            delays,
            slots: vec![0.0; next_slot],
            left: graph.outputs.left.as_ref().map(|r| slot_of[r]),
            right: graph.outputs.right.as_ref().map(|r| slot_of[r]),
            probes: graph.probes.iter().map(|p| (p.label.clone(), slot_of[&p.source])).collect(),
            dt: 1.0 / sample_rate,
        })
    }

    pub fn is_stereo(&self) -> bool {
        self.right.is_some()
    }

    pub fn order(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.name.as_str())
    }

    pub fn probe_labels(&self) -> impl Iterator<Item = &str> {
        self.probes.iter().map(|(l, _)| l.as_str())
    }

    /// Fresh output buffers shaped for this patch.
    pub fn empty_output(&self) -> BlockOutput {
        BlockOutput {
            left: Vec::new(),
            right: self.right.map(|_| Vec::new()),
            traces: self.probes.iter().map(|(l, _)| (l.clone(), Vec::new())).collect(),
        }
    }

    /// Runs the first `n` samples of `sid_audio` through the patch.
    pub fn process_block(&mut self, sid_audio: &[f64], n: usize) -> BlockOutput {
        let mut out = self.empty_output();
        self.process_into(&sid_audio[..n], &mut out);
        out
    }

    /// Like [`process_block`](Self::process_block) but appends to existing buffers.
    pub fn process_into(&mut self, sid_audio: &[f64], out: &mut BlockOutput) {
        out.left.reserve(sid_audio.len());
        for &x in sid_audio {
            self.tick(x);
            out.left.push(self.left.map_or(0.0, |s| self.slots[s]));
            if let (Some(buf), Some(s)) = (out.right.as_mut(), self.right) {
                buf.push(self.slots[s]);
            }
            for ((_, buf), (_, s)) in out.traces.iter_mut().zip(&self.probes) {
                buf.push(self.slots[*s]);
            }
        }
    }

    fn tick(&mut self, sid_sample: f64) {
        let dt = self.dt;
        let slots = &mut self.slots;
        for &d in &self.delays {
            let node = &self.nodes[d];
            if let NodeState::Delay { held } = node.state {
                slots[node.out] = held;
            }
        }
        for node in &mut self.nodes {
            let read = |k: usize, slots: &[f64]| node.inputs[k].map_or(0.0, |s| slots[s]);
            let o = node.out;
            match &mut node.state {
                NodeState::Sid => slots[o] = sid_sample,
                NodeState::Preamp(gain) => slots[o] = rail(read(0, slots) * *gain),
                NodeState::EnvFollower(ef) => slots[o] = ef.step(read(0, slots), dt),
                NodeState::Comparator(c) => {
                    let (g, t) = c.step(read(0, slots), dt);
                    slots[o] = g;
                    slots[o + 1] = t;
                }
                NodeState::SampleHold(sh) => slots[o] = sh.step(read(0, slots), read(1, slots)),
                NodeState::Vco(v) => {
                    let w = v.step(read(0, slots), read(1, slots), dt);
                    slots[o..o + 5].copy_from_slice(&[w.sine, w.tri, w.saw, w.pulse, w.sine]);
                }
                NodeState::Vcf(f) => {
                    let y = f.step(read(0, slots), read(1, slots), dt);
                    slots[o..o + 3].copy_from_slice(&[y.lp, y.bp, y.hp]);
                }
                NodeState::Vca => slots[o] = modules::vca(read(0, slots), read(1, slots)),
                NodeState::RingMod => slots[o] = modules::ringmod(read(0, slots), read(1, slots)),
                NodeState::Mixer(gains) => {
                    let mut acc = 0.0;
                    for (k, g) in gains.iter().enumerate() {
                        acc += read(k, slots) * g;
                    }
                    slots[o] = rail(acc);
                }
                NodeState::Offset { add, mul } => slots[o] = modules::offset(read(0, slots), *add, *mul),
                NodeState::Delay { held } => *held = rail(read(0, slots)),
            }
        }
    }
}
