//! Per-iteration records and their CSV form.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

/// Column order of the per-replication CSV files.
pub const CSV_HEADER: [&str; 9] = ["k", "f_S", "f_eval", "d_norm", "delta", "sample_size", "step_t", "accepted", "wall_ms"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub k: usize,
    /// In-sample objective estimate at the incumbent.
    pub f_s: f64,
    /// Held-out objective estimate at the incumbent; NaN until filled in.
    pub f_eval: f64,
    pub d_norm: f64,
    pub delta: f64,
    pub sample_size: usize,
    pub step_t: f64,
    pub accepted: bool,
    /// Zero unless timing was requested, so that output is reproducible.
    pub wall_ms: u64,
}

/// Formats a float with 17 significant digits, which round-trips exactly.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        }
    } else {
        format!("{v:.16e}")
    }
}

pub fn parse_f64(s: &str) -> Option<f64> {
    match s {
        "NaN" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

pub fn write_csv<W: Write>(records: &[IterateRecord], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.k.to_string(),
            format_f64(r.f_s),
            format_f64(r.f_eval),
            format_f64(r.d_norm),
            format_f64(r.delta),
            r.sample_size.to_string(),
            format_f64(r.step_t),
            u8::from(r.accepted).to_string(),
            r.wall_ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<IterateRecord>, csv::Error> {
    let mut rd = csv::Reader::from_reader(input);
    let bad = |what: &str| csv::Error::from(std::io::Error::new(std::io::ErrorKind::InvalidData, what.to_string()));
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        if row.len() != CSV_HEADER.len() {
            return Err(bad("wrong number of fields"));
        }
        let f = |i: usize| parse_f64(&row[i]).ok_or_else(|| bad(CSV_HEADER[i]));
        let u = |i: usize| row[i].parse::<u64>().map_err(|_| bad(CSV_HEADER[i]));
        out.push(IterateRecord {
            k: u(0)? as usize,
            f_s: f(1)?,
            f_eval: f(2)?,
            d_norm: f(3)?,
            delta: f(4)?,
            sample_size: u(5)? as usize,
            step_t: f(6)?,
            accepted: u(7)? != 0,
            wall_ms: u(8)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let recs = vec![
            IterateRecord {
                k: 1,
                f_s: 0.1 + 0.2,
                f_eval: f64::NAN,
                d_norm: 1e-300,
                delta: 2.0 / 3.0,
                sample_size: 17,
                step_t: 0.0,
                accepted: true,
                wall_ms: 0,
            },
            IterateRecord {
                k: 2,
                f_s: -123456.789,
                f_eval: 5.0,
                d_norm: f64::MIN_POSITIVE,
                delta: 1.0,
                sample_size: 18,
                step_t: 0.75,
                accepted: false,
                wall_ms: 3,
            },
        ];
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("k,f_S,f_eval,d_norm,delta,sample_size,step_t,accepted,wall_ms\n"));
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].f_s.to_bits(), recs[0].f_s.to_bits());
        assert!(back[0].f_eval.is_nan());
        assert_eq!(back[1], recs[1]);
        assert_eq!(back[0].d_norm, 1e-300);
    }
}
