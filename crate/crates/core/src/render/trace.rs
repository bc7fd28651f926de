use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

/// `%g`-style formatting with six significant digits.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim(&format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    }
}

/// Writes `time_s,<label>...` followed by every `decimate`-th sample.
pub fn encode_trace_csv<W: Write>(
    traces: &[(String, Vec<f64>)],
    sample_rate: u32,
    decimate: usize,
    mut out: W,
) -> io::Result<()> {
    assert!(decimate > 0, "decimate must be positive");
    let len = traces.first().map_or(0, |(_, t)| t.len());
    assert!(traces.iter().all(|(_, t)| t.len() == len), "trace lengths differ");
    write!(out, "time_s")?;
    for (label, _) in traces {
        write!(out, ",{label}")?;
    }
    writeln!(out)?;
    for i in (0..len).step_by(decimate) {
        write!(out, "{:.6}", i as f64 / f64::from(sample_rate))?;
        for (_, t) in traces {
            write!(out, ",{}", format_sig6(t[i]))?;
        }
        writeln!(out)?;
    }
    out.flush()
}

pub fn trace_csv_string(traces: &[(String, Vec<f64>)], sample_rate: u32, decimate: usize) -> String {
    let mut buf = Vec::new();
    encode_trace_csv(traces, sample_rate, decimate, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("ascii")
}

pub fn write_trace_csv(
    traces: &[(String, Vec<f64>)],
    sample_rate: u32,
    decimate: usize,
    path: &Path,
) -> io::Result<()> {
    encode_trace_csv(traces, sample_rate, decimate, BufWriter::new(File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_matches_printf_g() {
        for (v, s) in [
            (0.0, "0"),
            (-0.0, "0"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (1.0 / 3.0, "0.333333"),
            (123456.7, "123457"),
            (1234567.0, "1.23457e+06"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (999999.5, "1e+06"),
            (4.999999999, "5"),
            (20.0, "20"),
        ] {
            assert_eq!(format_sig6(v), s, "{v}");
        }
    }

    #[test]
    fn row_counts() {
        let t = vec![("x".to_string(), vec![0.0, 0.5, 1.0])];
        let csv = trace_csv_string(&t, 44_100, 1);
        assert_eq!(csv, "time_s,x\n0.000000,0\n0.000023,0.5\n0.000045,1\n");
        let t = vec![("a".to_string(), vec![1.0; 100]), ("b".to_string(), vec![2.0; 100])];
        let csv = trace_csv_string(&t, 1000, 10);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 11);
        assert_eq!(lines[0], "time_s,a,b");
        assert_eq!(lines[2], "0.010000,1,2");
    }
}
