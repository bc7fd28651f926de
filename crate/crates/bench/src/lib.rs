//! Shared inputs for the benchmarks.

use sidmod_core::basic::{parse_program, Program};
use sidmod_core::modular::{parse_patch, PatchGraph};
use sidmod_core::reference::{gate_program, GATE_PATCH};
use sidmod_core::{Sid, SidConfig};

/// Three voices with filter, sync and ring modulation all active.
pub fn busy_chip() -> Sid {
    let mut sid = Sid::new(SidConfig::default()).expect("default config");
    let writes: [(usize, u8); 21] = [
        (0, 69), (1, 29), (2, 0), (3, 8), (5, 0x09), (6, 0xA4), (4, 0x41),
        (7, 12), (8, 44), (12, 0x22), (13, 0xF3), (11, 0x23),
        (14, 200), (15, 7), (19, 0x00), (20, 0xF0), (18, 0x81),
        (21, 3), (22, 90), (23, 0xF3), (24, 0x1F),
    ];
    for (offset, value) in writes {
        sid.poke(offset, value).expect("offset in range");
    }
    sid
}

pub fn gate_fixture(pulses: u32) -> (Program, PatchGraph) {
    let program = parse_program(&gate_program(pulses)).expect("bundled program parses");
    let patch = parse_patch(GATE_PATCH).expect("bundled patch parses");
    (program, patch)
}

/// A line-level test signal for driving patches without the chip.
pub fn burst_signal(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let on = (i / 2205) % 4 == 0;
            if on {
                0.17 * if (i / 50) % 2 == 0 { 1.0 } else { -1.0 }
            } else {
                0.0
            }
        })
        .collect()
}
