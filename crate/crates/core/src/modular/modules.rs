//! Per-sample DSP for each module kind.

use std::f64::consts::TAU;

use crate::dsp::{Svf, SvfCoefficients, SvfOutputs};

/// No signal or state may leave this voltage range.
pub const RAIL_VOLTS: f64 = 20.0;
/// Peak level of oscillator outputs.
pub const OSC_PEAK_VOLTS: f64 = 5.0;
/// Full-scale control voltage (VCA unity gain, ring-mod normalization).
pub const CV_FULL_SCALE: f64 = 5.0;
/// Rising-edge threshold of the sample-and-hold gate input.
pub const SH_GATE_THRESHOLD: f64 = DEFAULT_GATE_HIGH / 2.0;

pub const DEFAULT_PREAMP_GAIN: f64 = 10.0;
pub const DEFAULT_ATTACK_S: f64 = 0.005;
pub const DEFAULT_RELEASE_S: f64 = 0.050;
pub const DEFAULT_THRESHOLD: f64 = 2.5;
pub const DEFAULT_HYSTERESIS: f64 = 0.5;
pub const DEFAULT_GATE_HIGH: f64 = 5.0;
pub const DEFAULT_TRIGGER_LEN_S: f64 = 0.001;

/// Clamps to the ±20 V rail and maps non-finite values to 0.
#[inline]
pub fn rail(v: f64) -> f64 {
    if v.is_finite() {
        v.clamp(-RAIL_VOLTS, RAIL_VOLTS)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvFollowerParams {
    pub attack: f64,
    pub release: f64,
}

impl Default for EnvFollowerParams {
    fn default() -> Self {
        Self { attack: DEFAULT_ATTACK_S, release: DEFAULT_RELEASE_S }
    }
}

/// Full-wave rectifier into an asymmetric one-pole smoother.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnvFollower {
    pub params: EnvFollowerParams,
    pub cv: f64,
}

impl EnvFollower {
    pub fn new(params: EnvFollowerParams) -> Self {
        Self { params, cv: 0.0 }
    }

    pub fn step(&mut self, input: f64, dt: f64) -> f64 {
        let r = input.abs();
        let tau = if r > self.cv { self.params.attack } else { self.params.release };
        self.cv += (r - self.cv) * (1.0 - (-dt / tau).exp());
        self.cv = rail(self.cv).max(0.0);
        self.cv
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparatorParams {
    pub threshold: f64,
    pub hysteresis: f64,
    pub gate_high: f64,
    pub trigger_len: f64,
}

impl Default for ComparatorParams {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            hysteresis: DEFAULT_HYSTERESIS,
            gate_high: DEFAULT_GATE_HIGH,
            trigger_len: DEFAULT_TRIGGER_LEN_S,
        }
    }
}

/// Schmitt trigger producing a gate and a fixed-length trigger pulse.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Comparator {
    pub params: ComparatorParams,
    pub high: bool,
    trigger_samples_left: u64,
}

impl Comparator {
    pub fn new(params: ComparatorParams) -> Self {
        Self { params, high: false, trigger_samples_left: 0 }
    }

    /// Returns `(gate, trigger)` volts.
    pub fn step(&mut self, input: f64, dt: f64) -> (f64, f64) {
        let p = &self.params;
        if !self.high && input > p.threshold {
            self.high = true;
            self.trigger_samples_left = ((p.trigger_len / dt).round() as u64).max(1);
        } else if self.high && input < p.threshold - p.hysteresis {
            self.high = false;
        }
        let trigger = if self.trigger_samples_left > 0 {
            self.trigger_samples_left -= 1;
            p.gate_high
        } else {
            0.0
        };
        let gate = if self.high { p.gate_high } else { 0.0 };
        (rail(gate), rail(trigger))
    }
}

/// Edge-triggered sample and hold.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleHold {
    pub out: f64,
    gate_was_high: bool,
}

impl SampleHold {
    pub fn step(&mut self, input: f64, gate: f64) -> f64 {
        let high = gate >= SH_GATE_THRESHOLD;
        if high && !self.gate_was_high {
            self.out = rail(input);
        }
        self.gate_was_high = high;
        self.out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VcoParams {
    pub f0: f64,
    pub voct_enabled: bool,
    /// Linear FM depth in Hz per volt.
    pub fm_depth: f64,
}

impl Default for VcoParams {
    fn default() -> Self {
        Self { f0: 440.0, voct_enabled: true, fm_depth: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VcoOutputs {
    pub sine: f64,
    pub tri: f64,
    pub saw: f64,
    pub pulse: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vco {
    pub params: VcoParams,
    /// Phase in cycles, `[0, 1)`.
    pub phase: f64,
}

impl Vco {
    pub fn new(params: VcoParams) -> Self {
        Self { params, phase: 0.0 }
    }

    /// Instantaneous frequency for the given inputs, clamped to `[0, 0.45/dt]`.
    pub fn frequency(&self, voct_cv: f64, fm_in: f64, dt: f64) -> f64 {
        let p = &self.params;
        let octaves = if p.voct_enabled { voct_cv } else { 0.0 };
        let f = p.f0 * octaves.exp2() + p.fm_depth * fm_in;
        if f.is_nan() {
            0.0
        } else {
            f.clamp(0.0, 0.45 / dt)
        }
    }

    pub fn step(&mut self, voct_cv: f64, fm_in: f64, dt: f64) -> VcoOutputs {
        let p = self.phase;
        let out = VcoOutputs {
            sine: OSC_PEAK_VOLTS * (TAU * p).sin(),
            tri: OSC_PEAK_VOLTS * (1.0 - 4.0 * (p - 0.5).abs()),
            saw: OSC_PEAK_VOLTS * (2.0 * p - 1.0),
            pulse: if p < 0.5 { OSC_PEAK_VOLTS } else { -OSC_PEAK_VOLTS },
        };
        let f = self.frequency(voct_cv, fm_in, dt);
        self.phase = (self.phase + f * dt).fract();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VcfParams {
    pub cutoff: f64,
    pub q: f64,
    /// Octaves per volt on the cutoff input.
    pub cv_scale: f64,
}

impl Default for VcfParams {
    fn default() -> Self {
        Self { cutoff: 1000.0, q: std::f64::consts::FRAC_1_SQRT_2, cv_scale: 1.0 }
    }
}

pub const VCF_MIN_Q: f64 = 0.5;
pub const VCF_MAX_Q: f64 = 20.0;

/// State-variable VCF with exponential cutoff CV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vcf {
    pub params: VcfParams,
    svf: Svf,
}

impl Vcf {
    pub fn new(params: VcfParams) -> Self {
        Self { params, svf: Svf::new() }
    }

    /// Cutoff after CV, clamped to `[1 Hz, 0.166/dt]`.
    pub fn effective_cutoff(&self, cutoff_cv: f64, dt: f64) -> f64 {
        let f = self.params.cutoff * (self.params.cv_scale * cutoff_cv).exp2();
        if f.is_nan() {
            1.0
        } else {
            f.clamp(1.0, 0.166 / dt)
        }
    }

    pub fn coefficients(&self, cutoff_cv: f64, dt: f64) -> SvfCoefficients {
        SvfCoefficients::new(self.effective_cutoff(cutoff_cv, dt), self.params.q, 1.0 / dt)
    }

    pub fn step(&mut self, input: f64, cutoff_cv: f64, dt: f64) -> SvfOutputs {
        let c = self.coefficients(cutoff_cv, dt);
        let o = self.svf.process(input, c);
        self.svf.clamp_state(RAIL_VOLTS);
        SvfOutputs { lp: rail(o.lp), bp: rail(o.bp), hp: rail(o.hp) }
    }
}

/// Linear VCA: 5 V of CV is unity gain; negative CV closes it.
pub fn vca(input: f64, cv: f64) -> f64 {
    rail(input * (cv / CV_FULL_SCALE).max(0.0))
}

/// Four-quadrant multiplier normalized so 5 V × 5 V gives 5 V.
pub fn ringmod(a: f64, b: f64) -> f64 {
    rail(a * b / CV_FULL_SCALE)
}

pub fn mixer(inputs: &[f64], gains: &[f64]) -> f64 {
    rail(inputs.iter().zip(gains).map(|(x, g)| x * g).sum())
}

/// Attenuverter then offset: `input * mul + add`.
pub fn offset(input: f64, add: f64, mul: f64) -> f64 {
    rail(input * mul + add)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SR: f64 = 44_100.0;
    const DT: f64 = 1.0 / SR;

    /// Rising zero crossings per second, with linear interpolation.
    fn measured_freq(sig: &[f64]) -> f64 {
        let mut xs = Vec::new();
        for i in 1..sig.len() {
            if sig[i - 1] < 0.0 && sig[i] >= 0.0 {
                let frac = -sig[i - 1] / (sig[i] - sig[i - 1]);
                xs.push((i - 1) as f64 + frac);
            }
        }
        (xs.len() - 1) as f64 / ((xs[xs.len() - 1] - xs[0]) * DT)
    }

    #[test]
    fn follower_settles_on_constant_input() {
        let mut ef = EnvFollower::default();
        for _ in 0..(5.0 * DEFAULT_ATTACK_S * SR) as usize + 1 {
            ef.step(5.0, DT);
        }
        assert!((ef.cv - 5.0).abs() <= 0.05, "{}", ef.cv);
        for _ in 0..(5.0 * DEFAULT_RELEASE_S * SR) as usize + 1 {
            ef.step(0.0, DT);
        }
        assert!(ef.cv <= 0.05, "{}", ef.cv);
    }

    #[test]
    fn follower_tracks_rectified_square() {
        let mut ef = EnvFollower::default();
        let period = (SR / 100.0) as usize;
        for i in 0..44_100 {
            let x = if i % period < period / 2 { 5.0 } else { -5.0 };
            ef.step(x, DT);
        }
        assert!((ef.cv - 5.0).abs() <= 0.1, "{}", ef.cv);
    }

    #[test]
    fn comparator_step_pulse() {
        let mut c = Comparator::default();
        let input: Vec<f64> = (0..1000).map(|i| if (100..600).contains(&i) { 5.0 } else { 0.0 }).collect();
        let (gates, trigs): (Vec<f64>, Vec<f64>) = input.iter().map(|&x| c.step(x, DT)).unzip();
        let gate_high: Vec<usize> = (0..1000).filter(|&i| gates[i] > 0.0).collect();
        assert_eq!(gate_high.first(), Some(&100));
        assert_eq!(gate_high.last(), Some(&599));
        assert_eq!(gate_high.len(), 500);
        let trig_high: Vec<usize> = (0..1000).filter(|&i| trigs[i] > 0.0).collect();
        assert_eq!(trig_high.first(), Some(&100));
        // 1 ms at 44.1 kHz
        assert_eq!(trig_high.len(), 44);
        assert_eq!(*trig_high.last().unwrap(), 143);
    }

    #[test]
    fn comparator_hysteresis_prevents_chatter() {
        let mut c = Comparator::default();
        let mut edges = 0;
        let mut prev = 0.0;
        for i in 0..10_000 {
            let x = if i % 3 == 0 { 2.3 } else { 2.6 };
            let (g, _) = c.step(x, DT);
            if g > prev {
                edges += 1;
            }
            prev = g;
        }
        assert!(edges <= 1);
    }

    #[test]
    fn comparator_idle_on_zero() {
        let mut c = Comparator::default();
        for _ in 0..1000 {
            assert_eq!(c.step(0.0, DT), (0.0, 0.0));
        }
    }

    #[test]
    fn sample_hold_edges() {
        let mut sh = SampleHold::default();
        let mut changes = 0;
        let mut prev = 0.0;
        for i in 0..300 {
            let gate = if (100..105).contains(&i) || (200..250).contains(&i) { 5.0 } else { 0.0 };
            let out = sh.step(i as f64 * 0.01, gate);
            if out != prev {
                changes += 1;
                assert!(i == 100 || i == 200, "{i}");
            }
            prev = out;
        }
        assert_eq!(changes, 2);
    }

    #[test]
    fn sample_hold_without_edges_stays_zero() {
        let mut sh = SampleHold::default();
        for i in 0..100 {
            assert_eq!(sh.step(i as f64, 1.0), 0.0);
        }
    }

    #[test]
    fn vco_pitch_laws() {
        for (voct, fm, depth, expected) in [(0.0, 0.0, 0.0, 440.0), (1.0, 0.0, 0.0, 880.0), (0.0, 5.0, 100.0, 940.0)] {
            let mut v = Vco::new(VcoParams { fm_depth: depth, ..Default::default() });
            let sig: Vec<f64> = (0..44_100).map(|_| v.step(voct, fm, DT).sine).collect();
            let f = measured_freq(&sig);
            assert!((f - expected).abs() <= 0.005 * expected, "{f} vs {expected}");
        }
    }

    #[test]
    fn vco_frequency_clamps() {
        let v = Vco::new(VcoParams { fm_depth: 1000.0, ..Default::default() });
        assert_eq!(v.frequency(0.0, -10.0, DT), 0.0);
        assert_eq!(v.frequency(10.0, 0.0, DT), 0.45 * SR);
    }

    #[test]
    fn vcf_cutoff_cv_is_exponential() {
        let f = Vcf::new(VcfParams { cutoff: 500.0, ..Default::default() });
        assert_eq!(f.effective_cutoff(0.0, DT), 500.0);
        assert_eq!(f.effective_cutoff(1.0, DT), 1000.0);
        assert_eq!(f.effective_cutoff(-20.0, DT), 1.0);
        assert_eq!(f.effective_cutoff(20.0, DT), 0.166 * SR);
    }

    #[test]
    fn vcf_lowpass_passes_and_highpass_blocks() {
        let mut f = Vcf::new(VcfParams { cutoff: 7000.0, ..Default::default() });
        let x: Vec<f64> = (0..44_100).map(|i| (TAU * 440.0 * i as f64 * DT).sin()).collect();
        let y: Vec<f64> = x.iter().map(|&s| f.step(s, 0.0, DT).lp).collect();
        let ratio = crate::dsp::rms(&y[4410..]) / crate::dsp::rms(&x[4410..]);
        assert!((ratio - 1.0).abs() < 0.1, "{ratio}");

        let mut f = Vcf::new(VcfParams::default());
        let mut hp = 0.0;
        for _ in 0..44_100 {
            hp = f.step(1.0, 0.0, DT).hp;
        }
        assert!(hp.abs() < 0.01);
    }

    #[test]
    fn simple_module_identities() {
        assert_eq!(vca(3.0, 0.0), 0.0);
        assert_eq!(vca(3.0, 5.0), 3.0);
        assert_eq!(ringmod(4.0, 0.0), 0.0);
        assert_eq!(mixer(&[1.25], &[1.0]), 1.25);
        assert_eq!(offset(1.0, 2.0, 0.5), 2.5);
        assert_eq!(rail(f64::NAN), 0.0);
        assert_eq!(rail(1e9), RAIL_VOLTS);
    }
}
