use crate::dsp::{Svf, SvfCoefficients};

pub const MODE_LP: u8 = 0x10;
pub const MODE_BP: u8 = 0x20;
pub const MODE_HP: u8 = 0x40;
pub const MODE_VOICE3_OFF: u8 = 0x80;

const MIN_CUTOFF_HZ: f64 = 30.0;
const CUTOFF_HZ_PER_STEP: f64 = 5.8;
const MIN_Q: f64 = 0.7;
const MAX_Q: f64 = 10.0;

/// Multimode filter and volume registers (offsets 21..24).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterState {
    /// 11-bit cutoff.
    pub cutoff_register: u16,
    pub resonance_nibble: u8,
    /// Bits 0..2 route voices 1..3 through the filter.
    pub routing_bits: u8,
    /// Upper nibble of offset 24: lp, bp, hp, voice-3 off.
    pub mode_bits: u8,
    pub master_volume_nibble: u8,
    svf: Svf,
}

impl FilterState {
    pub(crate) fn write_register(&mut self, offset: usize, value: u8) {
        match offset {
            21 => self.cutoff_register = (self.cutoff_register & 0x07F8) | u16::from(value & 0x07),
            22 => self.cutoff_register = (self.cutoff_register & 0x0007) | (u16::from(value) << 3),
            23 => {
                self.resonance_nibble = value >> 4;
                self.routing_bits = value & 0x07;
            }
            24 => {
                self.mode_bits = value & 0xF0;
                self.master_volume_nibble = value & 0x0F;
            }
            _ => unreachable!("filter register {offset}"),
        }
    }

    pub fn routes_voice(&self, voice: usize) -> bool {
        self.routing_bits & (1 << voice) != 0
    }

    pub fn voice3_off(&self) -> bool {
        self.mode_bits & MODE_VOICE3_OFF != 0
    }

    /// Cutoff frequency in Hz after clamping to `[30, sample_rate / 6]`.
    pub fn cutoff_hz(&self, sample_rate: f64) -> f64 {
        let raw = MIN_CUTOFF_HZ + CUTOFF_HZ_PER_STEP * f64::from(self.cutoff_register);
        raw.clamp(MIN_CUTOFF_HZ, sample_rate / 6.0)
    }

    pub fn q(&self) -> f64 {
        MIN_Q + (MAX_Q - MIN_Q) * f64::from(self.resonance_nibble) / 15.0
    }

    /// Filters one sample and returns the sum of the enabled outputs.
    /// With no mode bit set the input passes through unchanged.
    pub fn step(&mut self, input: f64, sample_rate: f64) -> f64 {
        let c = SvfCoefficients::new(self.cutoff_hz(sample_rate), self.q(), sample_rate);
        let o = self.svf.process(input, c);
        if self.mode_bits & (MODE_LP | MODE_BP | MODE_HP) == 0 {
            return input;
        }
        let mut out = 0.0;
        if self.mode_bits & MODE_LP != 0 {
            out += o.lp;
        }
        if self.mode_bits & MODE_BP != 0 {
            out += o.bp;
        }
        if self.mode_bits & MODE_HP != 0 {
            out += o.hp;
        }
        out
    }
}
