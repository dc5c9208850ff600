//! Export formats: coordinate-list kernel dumps with a JSON header, CSV
//! tables with an embedded provenance comment, and JSON reports.

use serde::Serialize;
use std::io::Write;

use crate::chains::Kernel;
use crate::scalar::Scalar;

/// JSON header of a kernel dump.
#[derive(Debug, Serialize)]
pub struct KernelHeader {
    pub n_states: usize,
    pub labels: Vec<String>,
    pub log_pi: Vec<f64>,
    pub lazy: bool,
    pub nnz: usize,
}

/// Writes a kernel as a JSON header line followed by `row col value` triples.
pub fn write_kernel_coo<T: Scalar, W: Write>(k: &Kernel<T>, mut w: W) -> std::io::Result<()> {
    let header = KernelHeader {
        n_states: k.n_states(),
        labels: (0..k.n_states()).map(|i| k.labels().describe(i)).collect(),
        log_pi: k.log_pi().iter().map(|&x| x.f64()).collect(),
        lazy: k.is_lazy(),
        nnz: k.nnz(),
    };
    writeln!(w, "{}", serde_json::to_string(&header).expect("header serializes"))?;
    for (i, row) in k.rows().iter().enumerate() {
        for &(j, v) in row {
            writeln!(w, "{i} {j} {:.17e}", v.f64())?;
        }
    }
    Ok(())
}

/// Writes a CSV table; the serialized config goes first as a `#` comment so
/// every output embeds its provenance.
pub fn write_csv<W: Write, C: Serialize>(
    mut w: W,
    config: &C,
    columns: &[&str],
    rows: &[Vec<String>],
) -> std::io::Result<()> {
    writeln!(w, "# {}", serde_json::to_string(config).expect("config serializes"))?;
    writeln!(w, "{}", columns.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
