//! Bundled demo assets: a program that emits gate pulses through the chip, and a patch that
//! turns them into sample-and-hold steps on a filter cutoff.

/// Eight volume-gated bursts, 250 statements apart, the first starting at statement 10.
pub const GATE_PROGRAM: &str = include_str!("../assets/gate_pulses.bas");
pub const GATE_PATCH: &str = include_str!("../assets/gate_sh.patch");

pub const GATE_PULSES: u32 = 8;
/// Statements between burst onsets.
pub const GATE_PERIOD_STATEMENTS: u64 = 250;
/// Statements executed before the first burst's volume poke.
pub const GATE_LEAD_IN_STATEMENTS: u64 = 10;

/// The gate program with a different burst count.
pub fn gate_program(pulses: u32) -> String {
    GATE_PROGRAM.replace(
        &format!("FOR N=1 TO {GATE_PULSES}"),
        &format!("FOR N=1 TO {pulses}"),
    )
}

/// Simulated time (µs) of each burst's volume poke.
pub fn gate_onsets_us(pulses: u32, statement_cost_us: u64) -> Vec<u64> {
    (0..u64::from(pulses))
        .map(|k| (GATE_LEAD_IN_STATEMENTS + k * GATE_PERIOD_STATEMENTS) * statement_cost_us)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basic::parse_program;
    use crate::modular::{parse_patch, validate};

    #[test]
    fn assets_parse_and_validate() {
        parse_program(GATE_PROGRAM).unwrap();
        assert!(validate(&parse_patch(GATE_PATCH).unwrap()).is_empty());
    }

    #[test]
    fn pulse_count_substitution() {
        assert!(gate_program(3).contains("FOR N=1 TO 3"));
        assert_eq!(gate_program(GATE_PULSES), GATE_PROGRAM);
    }
}
