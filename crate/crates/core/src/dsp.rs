//! Small DSP building blocks shared by the chip model and the patch modules.

use std::f64::consts::PI;

/// Internal oversampling factor of [`Svf`].
///
/// A plain Chamberlin loop goes unstable when `f² + 2fk ≥ 4`, which low-Q
/// settings reach near a sixth of the sample rate. Running two updates per
/// sample halves the tuning coefficient and keeps every allowed setting stable.
const SVF_OVERSAMPLE: usize = 2;

/// Outputs of one [`Svf`] update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SvfOutputs {
    pub lp: f64,
    pub bp: f64,
    pub hp: f64,
}

/// Two-integrator (Chamberlin) state-variable filter.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Svf {
    low: f64,
    band: f64,
}

/// Precomputed filter coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvfCoefficients {
    /// Integrator gain per oversampled step.
    pub tune: f64,
    /// Damping, `1 / Q`.
    pub damping: f64,
}

impl SvfCoefficients {
    pub fn new(cutoff_hz: f64, q: f64, sample_rate: f64) -> Self {
        let rate = sample_rate * SVF_OVERSAMPLE as f64;
        Self {
            tune: 2.0 * (PI * cutoff_hz / rate).sin(),
            damping: 1.0 / q,
        }
    }
}

impl Svf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        self.low = 0.0;
        self.band = 0.0;
    }

    /// Integrator contents `(low, band)`.
    pub fn state(&self) -> (f64, f64) {
        (self.low, self.band)
    }

    pub fn process(&mut self, input: f64, c: SvfCoefficients) -> SvfOutputs {
        let mut high = 0.0;
        for _ in 0..SVF_OVERSAMPLE {
            self.low += c.tune * self.band;
            high = input - self.low - c.damping * self.band;
            self.band += c.tune * high;
        }
        SvfOutputs { lp: self.low, bp: self.band, hp: high }
    }

    /// Clamps the integrators to `±limit`, zeroing any non-finite state.
    pub fn clamp_state(&mut self, limit: f64) {
        for v in [&mut self.low, &mut self.band] {
            *v = if v.is_finite() { v.clamp(-limit, limit) } else { 0.0 };
        }
    }
}

/// Root mean square of a buffer; 0 for an empty slice.
pub fn rms(buf: &[f64]) -> f64 {
    if buf.is_empty() {
        return 0.0;
    }
    (buf.iter().map(|x| x * x).sum::<f64>() / buf.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, sr: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (2.0 * PI * freq * i as f64 / sr).sin()).collect()
    }

    #[test]
    fn lowpass_passes_signal_far_below_cutoff() {
        let sr = 44_100.0;
        let c = SvfCoefficients::new(sr / 6.0, 0.7, sr);
        let mut f = Svf::new();
        let x = sine(440.0, sr, 44_100);
        let y: Vec<f64> = x.iter().map(|&s| f.process(s, c).lp).collect();
        let ratio = rms(&y[4410..]) / rms(&x[4410..]);
        assert!((ratio - 1.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn highpass_blocks_dc() {
        let sr = 44_100.0;
        let c = SvfCoefficients::new(1000.0, 0.7, sr);
        let mut f = Svf::new();
        let mut hp = 1.0;
        for _ in 0..44_100 {
            hp = f.process(1.0, c).hp;
        }
        assert!(hp.abs() < 0.01, "{hp}");
    }

    #[test]
    fn stable_at_extreme_settings() {
        let sr = 8000.0;
        for q in [0.5, 0.7, 20.0] {
            let c = SvfCoefficients::new(0.166 * sr, q, sr);
            let mut f = Svf::new();
            let mut peak: f64 = 0.0;
            for i in 0..80_000 {
                let x = if (i / 7) % 2 == 0 { 1.0 } else { -1.0 };
                let o = f.process(x, c);
                peak = peak.max(o.lp.abs()).max(o.bp.abs()).max(o.hp.abs());
            }
            assert!(peak.is_finite() && peak < 100.0, "q={q} peak={peak}");
        }
    }
}
