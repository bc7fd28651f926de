//! One oscillator voice: phase accumulator, waveform generators, noise LFSR
//! and the envelope that scales it.

use std::f64::consts::TAU;

use super::envelope::EnvelopeState;

pub const ACCUMULATOR_MASK: u32 = 0x00FF_FFFF;
const ACCUMULATOR_MSB: u32 = 0x0080_0000;
const NOISE_CLOCK_BIT: u64 = 1 << 19;
const LFSR_MASK: u32 = 0x007F_FFFF;
/// Power-on value of the noise shift register.
pub const LFSR_RESET: u32 = 0x007F_FFF8;

pub const CTRL_GATE: u8 = 0x01;
pub const CTRL_SYNC: u8 = 0x02;
pub const CTRL_RING: u8 = 0x04;
pub const CTRL_TEST: u8 = 0x08;
pub const CTRL_TRIANGLE: u8 = 0x10;
pub const CTRL_SAWTOOTH: u8 = 0x20;
pub const CTRL_PULSE: u8 = 0x40;
pub const CTRL_NOISE: u8 = 0x80;

/// Bit of the pulse-width high register (voice offset +3) that enables the
/// sine generator. The chip leaves the upper nibble of that register unused.
pub const PW_HI_SINE: u8 = 0x10;

#[derive(Debug, Clone, PartialEq)]
pub struct VoiceState {
    pub phase_accumulator: u32,
    pub freq_register: u16,
    pub pulse_width: u16,
    pub control: u8,
    pub sine: bool,
    pub noise_lfsr: u32,
    noise_seed: u32,
    pub envelope: EnvelopeState,
    /// Accumulator wrapped past 2^24 during the last advance.
    pub(crate) wrapped: bool,
    /// Last digitized waveform (12-bit), before the envelope.
    pub(crate) last_wave: u16,
}

impl Default for VoiceState {
    fn default() -> Self {
        Self::with_noise_seed(LFSR_RESET)
    }
}

impl VoiceState {
    pub fn with_noise_seed(seed: u32) -> Self {
        let seed = match seed & LFSR_MASK {
            0 => LFSR_RESET,
            s => s,
        };
        Self {
            phase_accumulator: 0,
            freq_register: 0,
            pulse_width: 0,
            control: 0,
            sine: false,
            noise_lfsr: seed,
            noise_seed: seed,
            envelope: EnvelopeState::default(),
            wrapped: false,
            last_wave: 0,
        }
    }

    pub fn gate(&self) -> bool {
        self.control & CTRL_GATE != 0
    }

    pub fn test(&self) -> bool {
        self.control & CTRL_TEST != 0
    }

    pub fn sync(&self) -> bool {
        self.control & CTRL_SYNC != 0
    }

    pub fn ring_mod(&self) -> bool {
        self.control & CTRL_RING != 0
    }

    /// Writes one of this voice's seven registers (`reg` in 0..7).
    pub(crate) fn write_register(&mut self, reg: usize, value: u8) {
        match reg {
            0 => self.freq_register = (self.freq_register & 0xFF00) | u16::from(value),
            1 => self.freq_register = (self.freq_register & 0x00FF) | (u16::from(value) << 8),
            2 => self.pulse_width = (self.pulse_width & 0x0F00) | u16::from(value),
            3 => {
                self.pulse_width = (self.pulse_width & 0x00FF) | (u16::from(value & 0x0F) << 8);
                self.sine = value & PW_HI_SINE != 0;
            }
            4 => self.write_control(value),
            5 => self.envelope.set_attack_decay(value),
            6 => self.envelope.set_sustain_release(value),
            _ => unreachable!("voice register {reg}"),
        }
    }

    fn write_control(&mut self, value: u8) {
        let was_gated = self.gate();
        self.control = value;
        match (was_gated, self.gate()) {
            (false, true) => self.envelope.gate_on(),
            (true, false) => self.envelope.gate_off(),
            _ => {}
        }
        if self.test() {
            self.phase_accumulator = 0;
            self.noise_lfsr = self.noise_seed;
        }
    }

    /// Advances the accumulator by `cycles` chip clocks.
    pub(crate) fn advance(&mut self, cycles: u64) {
        self.wrapped = false;
        if self.test() {
            self.phase_accumulator = 0;
            return;
        }
        let start = u64::from(self.phase_accumulator);
        let end = start + u64::from(self.freq_register) * cycles;
        self.wrapped = end > u64::from(ACCUMULATOR_MASK);
        // Rising edges of bit 19 sit at k * 2^20 + 2^19.
        let edges = (end + NOISE_CLOCK_BIT) / (2 * NOISE_CLOCK_BIT)
            - (start + NOISE_CLOCK_BIT) / (2 * NOISE_CLOCK_BIT);
        for _ in 0..edges {
            self.clock_noise();
        }
        self.phase_accumulator = (end & u64::from(ACCUMULATOR_MASK)) as u32;
    }

    /// Hard sync from the modulating voice.
    pub(crate) fn apply_sync(&mut self, modulator_wrapped: bool) {
        if self.sync() && modulator_wrapped {
            self.phase_accumulator = 0;
        }
    }

    fn clock_noise(&mut self) {
        let r = self.noise_lfsr;
        let bit = ((r >> 22) ^ (r >> 17)) & 1;
        self.noise_lfsr = ((r << 1) | bit) & LFSR_MASK;
    }

    fn top12(&self) -> u16 {
        (self.phase_accumulator >> 12) as u16
    }

    fn triangle12(acc: u32) -> u16 {
        let folded = if acc & ACCUMULATOR_MSB != 0 { !acc & ACCUMULATOR_MASK } else { acc };
        ((folded >> 11) & 0x0FFF) as u16
    }

    fn noise12(&self) -> u16 {
        let r = self.noise_lfsr;
        let bits = [22, 20, 16, 13, 11, 7, 4, 2];
        let byte = bits.iter().fold(0u16, |acc, &b| (acc << 1) | ((r >> b) & 1) as u16);
        byte << 4
    }

    fn sine12(&self) -> u16 {
        let phase = f64::from(self.phase_accumulator) / f64::from(ACCUMULATOR_MASK + 1);
        ((TAU * phase).sin() * 2047.5 + 2047.5).round().clamp(0.0, 4095.0) as u16
    }

    /// Digitized output of the selected waveforms, or `None` when no waveform
    /// bit is set. Several selected waveforms combine by bitwise AND.
    ///
    /// `modulator_phase` is the accumulator of the voice feeding ring mod.
    pub fn waveform(&self, modulator_phase: u32) -> Option<u16> {
        let mut out: Option<u16> = None;
        let mut combine = |w: u16| out = Some(out.map_or(w, |o| o & w));
        if self.control & CTRL_TRIANGLE != 0 {
            let mut tri = Self::triangle12(self.phase_accumulator);
            // ring mod: multiply by the sign of the modulator's triangle
            if self.ring_mod() && Self::triangle12(modulator_phase) < 2048 {
                tri = 0x0FFF - tri;
            }
            combine(tri);
        }
        if self.control & CTRL_SAWTOOTH != 0 {
            combine(self.top12());
        }
        if self.control & CTRL_PULSE != 0 {
            combine(if self.top12() < self.pulse_width { 0x0FFF } else { 0 });
        }
        if self.sine {
            combine(self.sine12());
        }
        if self.control & CTRL_NOISE != 0 {
            combine(self.noise12());
        }
        out
    }

    /// Computes the enveloped output in [-1, 1] and latches the raw waveform.
    pub fn sample(&mut self, modulator_phase: u32) -> f64 {
        match self.waveform(modulator_phase) {
            Some(w) => {
                self.last_wave = w;
                (f64::from(w) / 4095.0 * 2.0 - 1.0) * self.envelope.level
            }
            None => {
                self.last_wave = 0;
                0.0
            }
        }
    }

    /// Last raw waveform as an unsigned byte, `floor(normalized * 255)`.
    pub fn oscillator_byte(&self) -> u8 {
        (f64::from(self.last_wave) / 4095.0 * 255.0).floor() as u8
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sid::envelope::EnvelopeStage;

    fn full_level() -> EnvelopeState {
        EnvelopeState {
            stage: EnvelopeStage::Sustain,
            level: 1.0,
            sustain_nibble: 15,
            ..Default::default()
        }
    }

    #[test]
    fn no_waveform_is_silent() {
        let mut v = VoiceState { envelope: full_level(), ..Default::default() };
        v.phase_accumulator = 0x123456;
        assert_eq!(v.sample(0), 0.0);
    }

    #[test]
    fn frequency_bytes_pack_little_endian() {
        let mut v = VoiceState::default();
        v.write_register(0, 0x45);
        v.write_register(1, 0x1D);
        assert_eq!(v.freq_register, 7493);
    }

    #[test]
    fn pulse_width_is_twelve_bits() {
        let mut v = VoiceState::default();
        v.write_register(2, 0xFF);
        v.write_register(3, 0xFF);
        assert_eq!(v.pulse_width, 0x0FFF);
        assert!(v.sine);
    }

    #[test]
    fn test_bit_holds_accumulator() {
        let mut v = VoiceState { freq_register: 1000, ..Default::default() };
        v.advance(100);
        assert_eq!(v.phase_accumulator, 100_000);
        v.write_register(4, CTRL_TEST);
        assert_eq!(v.phase_accumulator, 0);
        v.advance(100);
        assert_eq!(v.phase_accumulator, 0);
    }

    #[test]
    fn accumulator_wraps_mod_2_24() {
        let mut v = VoiceState { freq_register: 0xFFFF, ..Default::default() };
        v.phase_accumulator = ACCUMULATOR_MASK - 10;
        v.advance(1);
        assert!(v.wrapped);
        assert_eq!(v.phase_accumulator, 0xFFFF - 11);
    }

    #[test]
    fn ring_mod_with_still_modulator_is_signed_triangle() {
        let mut modulator = VoiceState::default();
        modulator.write_register(4, CTRL_TEST);
        let mut plain = VoiceState {
            control: CTRL_TRIANGLE,
            envelope: full_level(),
            ..Default::default()
        };
        let mut ringed = plain.clone();
        ringed.control |= CTRL_RING;
        for step in 0..64u32 {
            plain.phase_accumulator = (step * 0x3_1111) & ACCUMULATOR_MASK;
            ringed.phase_accumulator = plain.phase_accumulator;
            let p = plain.sample(modulator.phase_accumulator);
            let r = ringed.sample(modulator.phase_accumulator);
            assert!((p + r).abs() < 1e-12, "{p} {r}");
        }
    }

    #[test]
    fn noise_lfsr_never_zero() {
        let mut v = VoiceState::default();
        for _ in 0..100_000 {
            v.clock_noise();
            assert_ne!(v.noise_lfsr, 0);
        }
        let v = VoiceState::with_noise_seed(0);
        assert_eq!(v.noise_lfsr, LFSR_RESET);
    }

    #[test]
    fn noise_clocks_on_bit19_rising_edges() {
        let mut v = VoiceState { freq_register: 1 << 12, ..Default::default() };
        let start = v.noise_lfsr;
        // 2^20 / 2^12 = 256 cycles per bit-19 period; first rise after 128.
        v.advance(127);
        assert_eq!(v.noise_lfsr, start);
        v.advance(1);
        assert_ne!(v.noise_lfsr, start);
    }

    #[test]
    fn combined_waveforms_and_together() {
        let mut v = VoiceState { control: CTRL_SAWTOOTH | CTRL_PULSE, pulse_width: 0x0800, ..Default::default() };
        v.phase_accumulator = 0x3AB000;
        assert_eq!(v.waveform(0), Some(0x3AB));
        v.phase_accumulator = 0x9AB000;
        assert_eq!(v.waveform(0), Some(0));
    }
}
