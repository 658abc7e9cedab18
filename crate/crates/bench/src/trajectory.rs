//! Trajectory CSV reading and writing.
//!
//! Floats are written in shortest round-trip form, so a file re-parsed and
//! re-written is byte-identical; absent values are empty fields.

use std::io::{Read, Write};

use minimax_core::{IterationRecord, StepClass};

use crate::error::{BenchError, Result};

pub const HEADER: [&str; 11] = [
    "iter",
    "wall_time_s",
    "surrogate_P",
    "true_P_gap",
    "grad_norm",
    "step_norm",
    "lambda",
    "delta",
    "rho",
    "step_class",
    "inner_iters",
];

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write_trajectory<W: Write>(out: W, rows: &[IterationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.iter.to_string(),
            fmt_f64(r.wall_time_s),
            fmt_f64(r.surrogate_p),
            fmt_opt(r.true_p_gap),
            fmt_f64(r.grad_norm),
            fmt_f64(r.step_norm),
            fmt_f64(r.lambda),
            fmt_f64(r.delta),
            fmt_opt(r.rho),
            r.step_class.map(|c| c.as_str().to_string()).unwrap_or_default(),
            r.inner_iters.to_string(),
        ])?;
    }
    w.flush().map_err(|e| BenchError::Io("trajectory".into(), e))?;
    Ok(())
}

pub fn read_trajectory<R: Read>(input: R) -> Result<Vec<IterationRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(BenchError::Trajectory(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut rows = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        let bad = |col: &str, v: &str| BenchError::Trajectory(format!("row {}: bad {col} value {v:?}", line + 1));
        let num = |i: usize| -> Result<f64> { rec[i].parse::<f64>().map_err(|_| bad(HEADER[i], &rec[i])) };
        let opt = |i: usize| -> Result<Option<f64>> {
            if rec[i].is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        let int = |i: usize| -> Result<usize> { rec[i].parse::<usize>().map_err(|_| bad(HEADER[i], &rec[i])) };
        rows.push(IterationRecord {
            iter: int(0)?,
            wall_time_s: num(1)?,
            surrogate_p: num(2)?,
            true_p_gap: opt(3)?,
            grad_norm: num(4)?,
            step_norm: num(5)?,
            lambda: num(6)?,
            delta: num(7)?,
            rho: opt(8)?,
            step_class: if rec[9].is_empty() {
                None
            } else {
                Some(rec[9].parse::<StepClass>().map_err(|_| bad(HEADER[9], &rec[9]))?)
            },
            inner_iters: int(10)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(iter: usize, gap: Option<f64>, class: Option<StepClass>) -> IterationRecord {
        IterationRecord {
            iter,
            wall_time_s: 0.125,
            surrogate_p: -1.0 / 3.0,
            true_p_gap: gap,
            grad_norm: 1e-300,
            step_norm: 0.0,
            lambda: 2.5,
            delta: 0.1,
            rho: class.map(|_| 0.75),
            step_class: class,
            inner_iters: 7,
        }
    }

    #[test]
    fn header_and_empty_fields() {
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &[sample(0, None, None)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), HEADER.join(","));
        assert_eq!(lines.next().unwrap(), "0,0.125,-0.3333333333333333,,1e-300,0.0,2.5,0.1,,,7");
    }

    #[test]
    fn rejects_wrong_header() {
        let err = read_trajectory("a,b\n1,2\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("header"));
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(
            gaps in proptest::collection::vec(proptest::option::of(any::<f64>().prop_filter("finite", |v| v.is_finite())), 1..20),
            class in proptest::option::of(0usize..4),
        ) {
            let classes = [StepClass::AcceptSigma, StepClass::AcceptDelta, StepClass::Contract, StepClass::Expand];
            let rows: Vec<_> = gaps.iter().enumerate().map(|(i, g)| sample(i, *g, class.map(|c| classes[c]))).collect();
            let mut buf = Vec::new();
            write_trajectory(&mut buf, &rows).unwrap();
            let back = read_trajectory(buf.as_slice()).unwrap();
            prop_assert_eq!(&back, &rows);
            let mut again = Vec::new();
            write_trajectory(&mut again, &back).unwrap();
            prop_assert_eq!(again, buf);
        }
    }
}
