//! Register-level model of the SID sound chip.
//!
//! The chip is a 29-byte register file: three seven-byte voice blocks at
//! offsets 0, 7 and 14, the filter and volume block at 21..24 and four
//! read-only registers at 25..28. Writes update the derived voice, envelope
//! and filter state immediately, so they are audible from the next rendered
//! sample.
//!
//! Oscillators run on chip clocks. Sample `n` ends at chip cycle
//! `floor(n * clock_hz / sample_rate_hz)`, and each accumulator advances by
//! its frequency register once per cycle, so phase is exact modulo 2^24 no
//! matter how long the render runs.

mod envelope;
mod filter;
mod voice;

pub use envelope::{envelope_time, EnvelopeStage, EnvelopeState, RateKind};
pub use filter::{FilterState, MODE_BP, MODE_HP, MODE_LP, MODE_VOICE3_OFF};
pub use voice::{
    VoiceState, CTRL_GATE, CTRL_NOISE, CTRL_PULSE, CTRL_RING, CTRL_SAWTOOTH, CTRL_SYNC,
    CTRL_TEST, CTRL_TRIANGLE, LFSR_RESET, PW_HI_SINE,
};

use thiserror::Error;

/// Address of register offset 0 on the host machine.
pub const SID_BASE: u16 = 54272;
pub const REGISTER_COUNT: usize = 29;
/// First read-only offset.
const READ_ONLY_START: usize = 25;
const OSC3_OFFSET: usize = 27;
const ENV3_OFFSET: usize = 28;
const VOICE_STRIDE: usize = 7;

/// Default chip clock (PAL machine).
pub const PAL_CLOCK_HZ: f64 = 985_248.0;
/// Default peak line-level voltage at full-scale output.
pub const DEFAULT_LINE_LEVEL_VOLTS: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SidError {
    #[error("register offset {0} out of range 0..=28")]
    OffsetOutOfRange(usize),
    #[error("invalid chip configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SidConfig {
    pub clock_hz: f64,
    pub sample_rate_hz: f64,
    pub line_level_volts: f64,
    /// Selects the power-on noise register. Seed 0 keeps the chip's reset
    /// value; any other seed is hashed into a non-zero 23-bit state.
    pub noise_seed: u64,
}

impl SidConfig {
    pub fn new(sample_rate_hz: f64) -> Self {
        Self {
            clock_hz: PAL_CLOCK_HZ,
            sample_rate_hz,
            line_level_volts: DEFAULT_LINE_LEVEL_VOLTS,
            noise_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SidError> {
        if !(self.clock_hz.is_finite() && self.clock_hz > 0.0) {
            return Err(SidError::InvalidConfig("clock_hz must be positive"));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz >= 8000.0) {
            return Err(SidError::InvalidConfig("sample_rate_hz must be at least 8000"));
        }
        if !(self.line_level_volts.is_finite() && self.line_level_volts > 0.0) {
            return Err(SidError::InvalidConfig("line_level_volts must be positive"));
        }
        Ok(())
    }

    fn initial_lfsr(&self) -> u32 {
        if self.noise_seed == 0 {
            return LFSR_RESET;
        }
        let mut x = self.noise_seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x ^= x >> 31;
        match (x & 0x7F_FFFF) as u32 {
            0 => LFSR_RESET,
            s => s,
        }
    }
}

impl Default for SidConfig {
    fn default() -> Self {
        Self::new(44_100.0)
    }
}

/// The chip: register file plus oscillator, envelope and filter state.
#[derive(Debug, Clone, PartialEq)]
pub struct Sid {
    config: SidConfig,
    registers: [u8; REGISTER_COUNT],
    voices: [VoiceState; 3],
    filter: FilterState,
    samples_rendered: u64,
    cycles_elapsed: u64,
}

/// Voice whose accumulator drives ring mod and sync for each voice.
const MODULATOR: [usize; 3] = [2, 0, 1];

impl Sid {
    pub fn new(config: SidConfig) -> Result<Self, SidError> {
        config.validate()?;
        let seed = config.initial_lfsr();
        Ok(Self {
            registers: [0; REGISTER_COUNT],
            voices: std::array::from_fn(|_| VoiceState::with_noise_seed(seed)),
            filter: FilterState::default(),
            samples_rendered: 0,
            cycles_elapsed: 0,
            config,
        })
    }

    pub fn config(&self) -> &SidConfig {
        &self.config
    }

    pub fn voice(&self, index: usize) -> &VoiceState {
        &self.voices[index]
    }

    pub fn filter(&self) -> &FilterState {
        &self.filter
    }

    pub fn samples_rendered(&self) -> u64 {
        self.samples_rendered
    }

    pub fn cycles_elapsed(&self) -> u64 {
        self.cycles_elapsed
    }

    /// Writes a register. Offsets 25..=28 are read-only and ignore writes.
    pub fn poke(&mut self, offset: usize, value: u8) -> Result<(), SidError> {
        if offset >= REGISTER_COUNT {
            return Err(SidError::OffsetOutOfRange(offset));
        }
        if offset >= READ_ONLY_START {
            return Ok(());
        }
        self.registers[offset] = value;
        if offset < 3 * VOICE_STRIDE {
            self.voices[offset / VOICE_STRIDE].write_register(offset % VOICE_STRIDE, value);
        } else {
            self.filter.write_register(offset, value);
        }
        Ok(())
    }

    pub fn peek(&self, offset: usize) -> Result<u8, SidError> {
        match offset {
            OSC3_OFFSET => Ok(self.voices[2].oscillator_byte()),
            ENV3_OFFSET => Ok(self.voices[2].envelope.level_byte()),
            o if o < REGISTER_COUNT => Ok(self.registers[o]),
            o => Err(SidError::OffsetOutOfRange(o)),
        }
    }

    fn cycles_at(&self, sample: u64) -> u64 {
        (sample as f64 * self.config.clock_hz / self.config.sample_rate_hz).floor() as u64
    }

    /// Renders one sample in volts.
    pub fn next_sample(&mut self) -> f64 {
        let sr = self.config.sample_rate_hz;
        let dt = 1.0 / sr;
        let next = self.samples_rendered + 1;
        let cycles_end = self.cycles_at(next);
        let cycles = cycles_end - self.cycles_elapsed;
        self.cycles_elapsed = cycles_end;
        self.samples_rendered = next;

        for v in &mut self.voices {
            v.advance(cycles);
        }
        let wrapped = [self.voices[0].wrapped, self.voices[1].wrapped, self.voices[2].wrapped];
        for (i, v) in self.voices.iter_mut().enumerate() {
            v.apply_sync(wrapped[MODULATOR[i]]);
        }
        let phases = [
            self.voices[0].phase_accumulator,
            self.voices[1].phase_accumulator,
            self.voices[2].phase_accumulator,
        ];

        let mut filtered = 0.0;
        let mut direct = 0.0;
        for (i, v) in self.voices.iter_mut().enumerate() {
            v.envelope.step(dt);
            let s = v.sample(phases[MODULATOR[i]]);
            if i == 2 && self.filter.voice3_off() {
                continue;
            }
            if self.filter.routes_voice(i) {
                filtered += s;
            } else {
                direct += s;
            }
        }
        let mixed = self.filter.step(filtered, sr) + direct;
        let volume = f64::from(self.filter.master_volume_nibble) / 15.0;
        mixed * volume * self.config.line_level_volts / 3.0
    }

    /// Renders `n` samples of line-level audio in volts.
    pub fn render(&mut self, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        self.render_into(n, &mut out);
        out
    }

    /// Appends `n` rendered samples to `out`.
    pub fn render_into(&mut self, n: usize, out: &mut Vec<f64>) {
        out.reserve(n);
        for _ in 0..n {
            let s = self.next_sample();
            out.push(s);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sid() -> Sid {
        Sid::new(SidConfig::default()).unwrap()
    }

    #[test]
    fn volume_register() {
        let mut s = sid();
        s.poke(24, 15).unwrap();
        assert_eq!(s.filter().master_volume_nibble, 15);
    }

    #[test]
    fn gate_rise_then_fall() {
        let mut s = sid();
        s.poke(4, 0x11).unwrap();
        assert_eq!(s.voice(0).envelope.stage, EnvelopeStage::Attack);
        s.render(441);
        s.poke(4, 0x10).unwrap();
        assert_eq!(s.voice(0).envelope.stage, EnvelopeStage::Release);
    }

    #[test]
    fn frequency_register_bytes() {
        let mut s = sid();
        s.poke(0, 0x45).unwrap();
        s.poke(1, 0x1D).unwrap();
        assert_eq!(s.voice(0).freq_register, 7493);
    }

    #[test]
    fn round_trip_and_read_only() {
        let mut s = sid();
        s.poke(23, 0xF1).unwrap();
        assert_eq!(s.peek(23).unwrap(), 0xF1);
        for o in 25..29 {
            s.poke(o, 0xAA).unwrap();
        }
        assert_eq!(s.peek(25).unwrap(), 0);
        assert_eq!(s.peek(26).unwrap(), 0);
        assert_eq!(s.peek(28).unwrap(), 0);
    }

    #[test]
    fn out_of_range_offsets() {
        let mut s = sid();
        assert_eq!(s.poke(29, 1), Err(SidError::OffsetOutOfRange(29)));
        assert_eq!(s.peek(100), Err(SidError::OffsetOutOfRange(100)));
    }

    #[test]
    fn silent_at_zero_volume() {
        let mut s = sid();
        s.poke(1, 0x1D).unwrap();
        s.poke(6, 0xF0).unwrap();
        s.poke(4, 0x21).unwrap();
        assert!(s.render(4410).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn single_full_voice_peaks_at_a_third_of_line_level() {
        let mut s = sid();
        s.poke(24, 15).unwrap();
        s.poke(1, 0x1D).unwrap();
        s.poke(6, 0xF0).unwrap();
        s.poke(4, 0x21).unwrap();
        let buf = s.render(44_100);
        let peak = buf[4410..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let expected = DEFAULT_LINE_LEVEL_VOLTS / 3.0;
        assert!((peak - expected).abs() <= 0.01 * expected, "{peak}");
    }

    #[test]
    fn render_is_deterministic() {
        let mut a = sid();
        a.poke(24, 0x1F).unwrap();
        a.poke(23, 0x71).unwrap();
        a.poke(1, 0x30).unwrap();
        a.poke(6, 0xA0).unwrap();
        a.poke(4, 0x81).unwrap();
        let mut b = a.clone();
        let x = a.render(10_000);
        let y = b.render(10_000);
        assert_eq!(x.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), y.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn osc3_readback_tracks_sawtooth() {
        let mut s = sid();
        s.poke(15, 0x10).unwrap();
        s.poke(18, 0x20).unwrap();
        s.render(100);
        let top = s.voice(2).phase_accumulator >> 12;
        let expected = (f64::from(top) / 4095.0 * 255.0).floor() as u8;
        assert_eq!(s.peek(27).unwrap(), expected);
    }

    #[test]
    fn noise_seed_zero_uses_reset_value() {
        let s = sid();
        assert_eq!(s.voice(0).noise_lfsr, LFSR_RESET);
        let t = Sid::new(SidConfig { noise_seed: 7, ..Default::default() }).unwrap();
        assert_ne!(t.voice(0).noise_lfsr, 0);
        assert_ne!(t.voice(0).noise_lfsr, LFSR_RESET);
    }

    #[test]
    fn config_bounds() {
        let mut cfg = SidConfig::new(7999.0);
        assert!(Sid::new(cfg.clone()).is_err());
        cfg.sample_rate_hz = 8000.0;
        assert!(Sid::new(cfg.clone()).is_ok());
        cfg.clock_hz = 0.0;
        assert!(Sid::new(cfg.clone()).is_err());
        cfg.clock_hz = PAL_CLOCK_HZ;
        cfg.line_level_volts = 0.0;
        assert!(Sid::new(cfg).is_err());
    }
}
