//! CSV output. Numbers are written with nine significant digits in
//! scientific notation, so files are byte-identical across platforms and
//! locales for identical input.

use std::io::Write;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::scan::ScanResult;

fn number(v: f64) -> String {
    format!("{v:.8e}")
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("csv: {other:?}")),
    }
}

/// Header and rows `t_ns, <trace names in order>`.
pub fn write_trajectory<W: Write>(out: W, tr: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t_ns"];
    header.extend(tr.names());
    w.write_record(&header).map_err(csv_error)?;
    for (k, t) in tr.times.iter().enumerate() {
        let mut row = vec![number(*t)];
        row.extend(tr.traces.iter().map(|c| number(c.values[k])));
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn trajectory_csv(tr: &Trajectory) -> Result<String> {
    let mut buf = Vec::new();
    write_trajectory(&mut buf, tr)?;
    Ok(String::from_utf8(buf).expect("csv output is ASCII"))
}

/// Every evaluated scan point, `omega_ghz,objective`, sorted by frequency.
pub fn write_scan<W: Write>(out: W, result: &ScanResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["omega_ghz", "objective"]).map_err(csv_error)?;
    for s in &result.samples {
        w.write_record([number(s.omega), number(s.objective)]).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn scan_csv(result: &ScanResult) -> Result<String> {
    let mut buf = Vec::new();
    write_scan(&mut buf, result)?;
    Ok(String::from_utf8(buf).expect("csv output is ASCII"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Diagnostics, Trace};
    use crate::integrate::SolverStats;
    use crate::operator::{DimSignature, QuantumState};
    use crate::scan::{Objective, ScanParameter, ScanSample};
    use nalgebra::DVector;

    fn trajectory() -> Trajectory {
        let sig = DimSignature::single(2).unwrap();
        Trajectory {
            times: vec![0.0, 0.5],
            traces: vec![
                Trace { name: "n_cav".into(), values: vec![1.0, 0.123456789012] },
                Trace { name: "pop_0ee".into(), values: vec![0.0, -1.5e-20] },
            ],
            final_state: QuantumState::ket(sig, DVector::from_vec(vec![1.0.into(), 0.0.into()])).unwrap(),
            states: None,
            stats: SolverStats::default(),
            diagnostics: Diagnostics::default(),
        }
    }

    #[test]
    fn trajectory_layout_is_fixed() {
        let text = trajectory_csv(&trajectory()).unwrap();
        assert_eq!(
            text,
            "t_ns,n_cav,pop_0ee\n\
             0.00000000e0,1.00000000e0,0.00000000e0\n\
             5.00000000e-1,1.23456789e-1,-1.50000000e-20\n"
        );
    }

    #[test]
    fn scan_report_layout() {
        let s = ScanSample { omega: 7.9655, objective: 0.97 };
        let r = ScanResult {
            samples: vec![s],
            best: s,
            objective: Objective::PeakTransfer,
            parameter: ScanParameter::CavityFrequency,
            coarse_points: 1,
            refinement: vec![s],
            evaluations: 1,
        };
        assert_eq!(scan_csv(&r).unwrap(), "omega_ghz,objective\n7.96550000e0,9.70000000e-1\n");
    }
}
