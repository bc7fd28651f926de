//! ADSR envelope generator with linear segments.
//!
//! Stage durations come from the chip's 4-bit rate nibbles. Each duration is
//! the time a segment takes to traverse the full 0..1 range, so a decay that
//! stops at a non-zero sustain level finishes proportionally sooner.

/// Attack durations in milliseconds, indexed by the attack nibble.
const ATTACK_MS: [f64; 16] = [
    2.0, 8.0, 16.0, 24.0, 38.0, 56.0, 68.0, 80.0, 100.0, 250.0, 500.0, 800.0, 1000.0, 3000.0,
    5000.0, 8000.0,
];

/// Decay and release durations in milliseconds, indexed by nibble.
const DECAY_RELEASE_MS: [f64; 16] = [
    6.0, 24.0, 48.0, 72.0, 114.0, 168.0, 204.0, 240.0, 300.0, 750.0, 1500.0, 2400.0, 3000.0,
    9000.0, 15000.0, 24000.0,
];

/// Which rate table a nibble indexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    Attack,
    DecayRelease,
}

/// Full-scale segment duration in seconds for a rate nibble.
///
/// Only the low four bits of `nibble` are used.
pub fn envelope_time(nibble: u8, kind: RateKind) -> f64 {
    let idx = usize::from(nibble & 0x0F);
    let ms = match kind {
        RateKind::Attack => ATTACK_MS[idx],
        RateKind::DecayRelease => DECAY_RELEASE_MS[idx],
    };
    ms / 1000.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnvelopeStage {
    #[default]
    Idle,
    Attack,
    Decay,
    Sustain,
    Release,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeState {
    pub stage: EnvelopeStage,
    pub level: f64,
    pub attack_nibble: u8,
    pub decay_nibble: u8,
    pub sustain_nibble: u8,
    pub release_nibble: u8,
}

impl Default for EnvelopeState {
    fn default() -> Self {
        Self {
            stage: EnvelopeStage::Idle,
            level: 0.0,
            attack_nibble: 0,
            decay_nibble: 0,
            sustain_nibble: 0,
            release_nibble: 0,
        }
    }
}

impl EnvelopeState {
    /// Loads the attack/decay byte (voice offset +5).
    pub fn set_attack_decay(&mut self, byte: u8) {
        self.attack_nibble = byte >> 4;
        self.decay_nibble = byte & 0x0F;
    }

    /// Loads the sustain/release byte (voice offset +6).
    pub fn set_sustain_release(&mut self, byte: u8) {
        self.sustain_nibble = byte >> 4;
        self.release_nibble = byte & 0x0F;
        if self.stage == EnvelopeStage::Sustain {
            self.level = self.sustain_level();
        }
    }

    pub fn sustain_level(&self) -> f64 {
        f64::from(self.sustain_nibble) / 15.0
    }

    /// Gate rising edge.
    pub fn gate_on(&mut self) {
        self.stage = EnvelopeStage::Attack;
    }

    /// Gate falling edge.
    pub fn gate_off(&mut self) {
        self.stage = EnvelopeStage::Release;
    }

    /// Advances the envelope by `dt` seconds.
    pub fn step(&mut self, dt: f64) {
        match self.stage {
            EnvelopeStage::Idle => {}
            EnvelopeStage::Attack => {
                self.level += dt / envelope_time(self.attack_nibble, RateKind::Attack);
                if self.level >= 1.0 {
                    self.level = 1.0;
                    self.stage = EnvelopeStage::Decay;
                }
            }
            EnvelopeStage::Decay => {
                let sustain = self.sustain_level();
                if self.level <= sustain {
                    // sustain nibble raised above the current level
                    self.level = sustain;
                    self.stage = EnvelopeStage::Sustain;
                } else {
                    self.level -= dt / envelope_time(self.decay_nibble, RateKind::DecayRelease);
                    if self.level <= sustain {
                        self.level = sustain;
                        self.stage = EnvelopeStage::Sustain;
                    }
                }
            }
            EnvelopeStage::Sustain => {
                self.level = self.sustain_level();
            }
            EnvelopeStage::Release => {
                self.level -= dt / envelope_time(self.release_nibble, RateKind::DecayRelease);
                if self.level <= 0.0 {
                    self.level = 0.0;
                    self.stage = EnvelopeStage::Idle;
                }
            }
        }
        self.level = self.level.clamp(0.0, 1.0);
    }

    /// Envelope level as the byte the chip exposes for voice 3.
    pub fn level_byte(&self) -> u8 {
        (self.level * 255.0).floor() as u8
    }
}
