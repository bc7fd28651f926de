use proptest::prelude::*;

use sidmod_core::basic::{list_program, parse_program, run, C64Bus, RunLimits, VmConfig};
use sidmod_core::modular::modules::{self, Comparator, EnvFollower, SampleHold, Vcf, VcfParams, Vco, VcoParams};
use sidmod_core::modular::{format_patch, parse_patch, schedule, PatchEngine};
use sidmod_core::{Sid, SidConfig};

const DT: f64 = 1.0 / 44_100.0;

fn volts() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6..1e6f64,
        Just(f64::NAN),
        Just(f64::INFINITY),
        Just(f64::NEG_INFINITY),
        Just(0.0),
    ]
}

const STATEMENTS: &[&str] = &[
    "A=A+1",
    "PRINT A;B",
    "POKE 54296,15",
    "POKE 1024,A AND 255",
    "B=PEEK(1024)",
    "IF A>3 THEN 10",
    "IF B=0 THEN A=A*2",
    "FOR I=1 TO 3:NEXT I",
    "GOSUB 900",
    "REM NOTHING TO SEE",
    "X=INT(RND(1)*10)",
    "DIM Q(2):Q(1)=(A+1)*-2",
    "GOTO 20",
    "END",
];

fn program() -> impl Strategy<Value = String> {
    prop::collection::vec((1u32..60, prop::sample::select(STATEMENTS)), 1..12).prop_map(|lines| {
        let mut src: String = lines.iter().map(|(n, s)| format!("{} {s}\n", n * 10)).collect();
        src.push_str("900 RETURN\n");
        src
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parser_never_panics(src in "[ -~\n]{0,200}") {
        let _ = parse_program(&src);
    }

    #[test]
    fn patch_parser_never_panics(src in "[ -~\n]{0,200}") {
        let _ = parse_patch(&src);
    }

    #[test]
    fn listing_round_trips(src in program()) {
        let p = parse_program(&src).unwrap();
        let listed = list_program(&p);
        let q = parse_program(&listed).unwrap();
        prop_assert_eq!(&p, &q);
        prop_assert_eq!(list_program(&q), listed);
    }

    #[test]
    fn random_programs_stay_bounded(src in program(), seed in any::<u64>()) {
        let p = parse_program(&src).unwrap();
        let mut bus = C64Bus::new(Sid::new(SidConfig::default()).unwrap());
        let limits = RunLimits { max_statements: Some(2000), ..Default::default() };
        let config = VmConfig { seed, ..Default::default() };
        if let Ok(r) = run(&p, &mut bus, limits, config) {
            prop_assert!(r.statements_executed <= 2000);
            prop_assert_eq!(r.final_sim_time_us, r.statements_executed * 1000);
        }
    }

    #[test]
    fn writable_registers_read_back(offset in 0usize..25, value in any::<u8>()) {
        let mut sid = Sid::new(SidConfig::default()).unwrap();
        sid.poke(offset, value).unwrap();
        prop_assert_eq!(sid.peek(offset).unwrap(), value);
    }

    #[test]
    fn chip_output_finite_and_bounded(writes in prop::collection::vec((0usize..25, any::<u8>()), 1..64)) {
        let mut sid = Sid::new(SidConfig::default()).unwrap();
        for (o, v) in writes {
            sid.poke(o, v).unwrap();
            for s in sid.render(16) {
                prop_assert!(s.is_finite());
                prop_assert!(s.abs() <= 1.0);
            }
        }
    }

    #[test]
    fn modules_finite_in_finite_out(xs in prop::collection::vec((volts(), volts()), 1..200)) {
        let mut ef = EnvFollower::default();
        let mut cmp = Comparator::default();
        let mut sh = SampleHold::default();
        let mut vco = Vco::new(VcoParams { fm_depth: 100.0, ..Default::default() });
        let mut vcf = Vcf::new(VcfParams { q: 20.0, ..Default::default() });
        for (a, b) in xs {
            let mut outs = vec![ef.step(a, DT), sh.step(a, b)];
            let (g, t) = cmp.step(a, DT);
            outs.extend([g, t]);
            let w = vco.step(a, b, DT);
            outs.extend([w.sine, w.tri, w.saw, w.pulse]);
            let y = vcf.step(a, b, DT);
            outs.extend([y.lp, y.bp, y.hp]);
            outs.extend([modules::vca(a, b), modules::ringmod(a, b), modules::mixer(&[a, b], &[1.0, 1.0]), modules::offset(a, b, 2.0)]);
            for o in outs {
                prop_assert!(o.is_finite() && o.abs() <= modules::RAIL_VOLTS, "{o}");
            }
            prop_assert!(ef.cv >= 0.0);
        }
    }

    #[test]
    fn simple_module_identities(x in -20.0..20.0f64) {
        prop_assert_eq!(modules::vca(x, 0.0), 0.0);
        prop_assert_eq!(modules::ringmod(x, 0.0), 0.0);
        prop_assert_eq!(modules::mixer(&[x], &[1.0]), x);
        prop_assert_eq!(modules::offset(x, 0.0, 1.0), x);
    }

    #[test]
    fn topological_orders_agree(swaps in prop::collection::vec((0usize..10, 0usize..10), 0..30)) {
        let g = parse_patch(
            "module p preamp\nmodule e envfollower\nmodule c comparator\nmodule h samplehold\n\
             module l vco f0=2hz\nmodule f vcf\nmodule z delay\nmodule m mixer gains=1,0.5\n\
             connect sid.audio -> p.in\nconnect p.out -> e.in\nconnect e.cv -> c.in\n\
             connect c.trigger -> h.gate\nconnect l.tri -> h.in\nconnect p.out -> m.in1\n\
             connect z.out -> m.in2\nconnect m.out -> f.in\nconnect h.out -> f.cutoff\n\
             connect f.lp -> z.in\noutput left f.lp\nprobe h.out as h\n",
        ).unwrap();
        let canonical = schedule(&g).unwrap();
        // Random adjacent swaps that keep every dependency satisfied.
        let mut order = canonical.clone();
        let depends = |a: &str, b: &str| {
            g.edges.iter().any(|e| e.from.node == a && e.to.node == b && g.nodes[a].kind().name() != "delay")
        };
        for (i, _) in swaps {
            let i = i % (order.len() - 1);
            if !depends(&order[i], &order[i + 1]) {
                order.swap(i, i + 1);
            }
        }
        let x: Vec<f64> = (0..3000).map(|i| ((i * 37 % 101) as f64 / 50.0 - 1.0) * 0.2).collect();
        let a = PatchEngine::new(&g, 44_100.0).unwrap().process_block(&x, x.len());
        let b = PatchEngine::with_order(&g, &order, 44_100.0).unwrap().process_block(&x, x.len());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn patch_format_round_trips(gain in 0.1..100.0f64, cutoff in 1.0..20_000.0f64, q in 0.5..20.0f64,
                                gains in prop::collection::vec(-4.0..4.0f64, 1..6)) {
        let list: Vec<String> = gains.iter().map(|g| g.to_string()).collect();
        let text = format!(
            "module p preamp gain={gain}\nmodule f vcf cutoff={cutoff}hz q={q}\nmodule m mixer gains={}\n\
             connect sid.audio -> p.in\nconnect p.out -> f.in\nconnect f.lp -> m.in1\nprobe m.out as mix\n",
            list.join(",")
        );
        let g = parse_patch(&text).unwrap();
        prop_assert_eq!(parse_patch(&format_patch(&g)).unwrap(), g);
    }
}
