use std::path::Path;

use crate::error::{Error, Result};

/// `ε → τ` lookup from a CSV carrying `epsilon` and `tau` columns.
///
/// With an `n` column the rows of the largest `n` are used. Values between rows
/// are interpolated linearly in `log ε`; `ε = 0` maps to a zero row only.
#[derive(Clone, Debug, PartialEq)]
pub struct TauTable {
    /// `(ε, τ)` sorted by `ε`.
    pub rows: Vec<(f64, f64)>,
}

fn parse_error(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

impl TauTable {
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| parse_error(format!("{}: {e}", path.display())))?;
        let headers = reader.headers().map_err(|e| parse_error(e.to_string()))?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let (Some(ie), Some(it)) = (col("epsilon"), col("tau")) else {
            return Err(parse_error(format!("{}: needs `epsilon` and `tau` columns", path.display())));
        };
        let in_ = col("n");
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| parse_error(e.to_string()))?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .unwrap_or("")
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| parse_error(format!("row {:?}: {e}", rec.position().map(|p| p.line()))))
            };
            let n = match in_ {
                Some(i) => num(i)?,
                None => 0.0,
            };
            rows.push((n, num(ie)?, num(it)?));
        }
        let n_max = rows.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
        let mut rows: Vec<(f64, f64)> = rows.into_iter().filter(|r| r.0 == n_max).map(|r| (r.1, r.2)).collect();
        rows.sort_by(|x, y| x.0.total_cmp(&y.0));
        if rows.is_empty() {
            return Err(parse_error(format!("{}: no rows", path.display())));
        }
        Ok(TauTable { rows })
    }

    pub fn tau_at(&self, epsilon: f64) -> Result<f64> {
        if let Some(&(_, t)) = self.rows.iter().find(|r| r.0 == epsilon) {
            return Ok(t);
        }
        let positive: Vec<&(f64, f64)> = self.rows.iter().filter(|r| r.0 > 0.0).collect();
        let upper = positive.iter().position(|r| r.0 > epsilon);
        match upper {
            Some(j) if j > 0 && epsilon > 0.0 => {
                let (e0, t0) = *positive[j - 1];
                let (e1, t1) = *positive[j];
                let w = (epsilon / e0).ln() / (e1 / e0).ln();
                Ok(t0 + w * (t1 - t0))
            }
            _ => Err(Error::Domain(format!(
                "ε = {epsilon} outside the table range [{}, {}]",
                self.rows[0].0,
                self.rows[self.rows.len() - 1].0
            ))),
        }
    }
}
