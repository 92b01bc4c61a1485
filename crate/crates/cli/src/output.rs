//! CSV and JSON renderings of sweep results. Both print floats in shortest
//! round-trip form, so they carry identical values; JSON writes NaN as null.

use std::io::Write;

use crate::error::CliResult;
use crate::sweep::{SweepOutput, COLUMNS};

fn num(v: f64) -> String {
    format!("{v}")
}

pub fn write_csv<W: Write>(out: &SweepOutput, w: W) -> CliResult<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(COLUMNS)?;
    for r in &out.rows {
        wr.write_record([
            num(r.omega),
            num(r.n0),
            r.method.to_string(),
            r.wave.clone(),
            num(r.re_xi),
            num(r.im_xi),
            num(r.phase_velocity),
            num(r.attenuation),
            r.residual.map(num).unwrap_or_default(),
            r.warnings.join("; "),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(out: &SweepOutput, w: W) -> CliResult<()> {
    serde_json::to_writer_pretty(w, out)?;
    Ok(())
}

pub fn csv_string(out: &SweepOutput) -> String {
    let mut buf = Vec::new();
    write_csv(out, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is UTF-8")
}
