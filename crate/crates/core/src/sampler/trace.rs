use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chain::{run_chain, ChainDiagnostics, ChainSample, SamplerConfig};
use crate::error::{Error, Result};

/// Streaming CSV writer for `sweep, contact_fraction, pin_fraction, sup_abs_h` rows,
/// optionally followed by the grid values `h_0..h_N`.
pub struct TraceWriter<W: Write> {
    inner: csv::Writer<W>,
    include_profile: bool,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(out: W, n: usize, include_profile: bool) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        let mut header = vec!["sweep".to_string(), "contact_fraction".into(), "pin_fraction".into(), "sup_abs_h".into()];
        if include_profile {
            header.extend((0..=n).map(|k| format!("h_{k}")));
        }
        inner.write_record(&header).map_err(csv_error)?;
        Ok(TraceWriter { inner, include_profile })
    }

    pub fn write(&mut self, s: &ChainSample) -> Result<()> {
        let mut row = vec![
            s.sweep.to_string(),
            format!("{:.16e}", s.contact_fraction),
            format!("{:.16e}", s.pin_fraction),
            format!("{:.16e}", s.profile.sup_abs()),
        ];
        if self.include_profile {
            row.extend(s.profile.values.iter().map(|v| format!("{v:.16e}")));
        }
        self.inner.write_record(&row).map_err(csv_error)
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Writes `samples` through a [`TraceWriter`].
pub fn write_trace<W: Write>(out: W, samples: &[ChainSample], include_profile: bool) -> Result<()> {
    let n = samples.first().map_or(0, |s| s.profile.n);
    let mut w = TraceWriter::new(out, n, include_profile)?;
    for s in samples {
        w.write(s)?;
    }
    w.finish()
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicaSummary {
    pub replica: u64,
    pub samples: usize,
    pub mean_contact_fraction: f64,
    pub mean_pin_fraction: f64,
    pub diagnostics: ChainDiagnostics,
}

/// Independent chains on streams `0..replicas` of `config.seed`, run in parallel.
pub fn run_replicas(config: &SamplerConfig, replicas: u64) -> Result<Vec<ReplicaSummary>> {
    (0..replicas)
        .into_par_iter()
        .map(|replica| {
            let mut c = config.clone();
            c.replica = replica;
            let mut run = run_chain(&c)?;
            let (mean_contact_fraction, mean_pin_fraction, samples) = run.mean_fractions();
            Ok(ReplicaSummary {
                replica,
                samples,
                mean_contact_fraction,
                mean_pin_fraction,
                diagnostics: run.diagnostics(),
            })
        })
        .collect()
}
