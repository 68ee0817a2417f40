use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed CSV columns, in order. `circulation_<i>` columns follow, one per
/// tracked loop. Quantities that do not apply to the model are left empty.
pub const CSV_COLUMNS: [&str; 12] = [
    "step",
    "time",
    "energy",
    "momentum_x",
    "momentum_y",
    "momentum_z",
    "div_d",
    "div_b",
    "div_w",
    "helicity",
    "pb_orth",
    "vorticity_residual",
];

/// One sample of the diagnostics time series.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub step: u64,
    pub time: f64,
    /// `∫ℋ`, `½∫(|D|²+|B|²)`, `∫h` or `½∫|u|²` depending on the model.
    pub energy: f64,
    pub momentum: [f64; 3],
    pub div_d: Option<f64>,
    pub div_b: Option<f64>,
    pub div_w: Option<f64>,
    pub helicity: Option<f64>,
    /// `max|P·B|/h`
    pub pb_orth: Option<f64>,
    /// L² norm of the vorticity-equation imbalance.
    pub vorticity_residual: Option<f64>,
    pub circulation: Vec<f64>,
}

fn cell(out: &mut String, v: Option<f64>) {
    out.push(',');
    if let Some(v) = v {
        // shortest representation that round-trips
        write!(out, "{v:?}").expect("write to string");
    }
}

impl DiagnosticsRecord {
    pub fn csv_header(loops: usize) -> String {
        let mut h = CSV_COLUMNS.join(",");
        for i in 0..loops {
            write!(h, ",circulation_{i}").expect("write to string");
        }
        h
    }

    pub fn to_csv_row(&self) -> String {
        let mut out = self.step.to_string();
        cell(&mut out, Some(self.time));
        cell(&mut out, Some(self.energy));
        for m in self.momentum {
            cell(&mut out, Some(m));
        }
        for v in [
            self.div_d,
            self.div_b,
            self.div_w,
            self.helicity,
            self.pb_orth,
            self.vorticity_residual,
        ] {
            cell(&mut out, v);
        }
        for &c in &self.circulation {
            cell(&mut out, Some(c));
        }
        out
    }

    /// Parses a row written by [`to_csv_row`](Self::to_csv_row).
    pub fn from_csv_row(row: &str) -> Result<Self> {
        let cols: Vec<&str> = row.trim_end().split(',').collect();
        if cols.len() < CSV_COLUMNS.len() {
            return Err(Error::InvalidArgument(format!(
                "diagnostics row has {} columns, expected at least {}",
                cols.len(),
                CSV_COLUMNS.len()
            )));
        }
        let num = |i: usize| -> Result<f64> {
            cols[i].parse().map_err(|_| {
                Error::InvalidArgument(format!("column {}: bad number {:?}", CSV_COLUMNS[i], cols[i]))
            })
        };
        let opt = |i: usize| -> Result<Option<f64>> {
            if cols[i].is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        let step = cols[0]
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad step {:?}", cols[0])))?;
        let circulation = cols[CSV_COLUMNS.len()..]
            .iter()
            .map(|c| {
                c.parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad circulation {c:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self {
            step,
            time: num(1)?,
            energy: num(2)?,
            momentum: [num(3)?, num(4)?, num(5)?],
            div_d: opt(6)?,
            div_b: opt(7)?,
            div_w: opt(8)?,
            helicity: opt(9)?,
            pb_orth: opt(10)?,
            vorticity_residual: opt(11)?,
            circulation,
        })
    }

    /// Values in column order, `NaN` for empty cells.
    pub fn values(&self) -> Vec<f64> {
        let o = |v: Option<f64>| v.unwrap_or(f64::NAN);
        let mut v = vec![
            self.step as f64,
            self.time,
            self.energy,
            self.momentum[0],
            self.momentum[1],
            self.momentum[2],
            o(self.div_d),
            o(self.div_b),
            o(self.div_w),
            o(self.helicity),
            o(self.pb_orth),
            o(self.vorticity_residual),
        ];
        v.extend(&self.circulation);
        v
    }

    /// True when every present entry is finite.
    pub fn is_finite(&self) -> bool {
        self.values()
            .iter()
            .zip(self.optional_mask())
            .all(|(v, optional)| v.is_finite() || optional)
    }

    fn optional_mask(&self) -> Vec<bool> {
        let mut m = vec![false; 6];
        m.extend([
            self.div_d.is_none(),
            self.div_b.is_none(),
            self.div_w.is_none(),
            self.helicity.is_none(),
            self.pb_orth.is_none(),
            self.vorticity_residual.is_none(),
        ]);
        m.extend(std::iter::repeat_n(false, self.circulation.len()));
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_with_empty_cells() {
        let r = DiagnosticsRecord {
            step: 12,
            time: 0.1 + 0.2,
            energy: 248.05021344239853,
            momentum: [1e-17, -0.0, 3.5],
            div_d: Some(1.2e-15),
            div_b: Some(0.0),
            helicity: None,
            circulation: vec![0.25, -1.0 / 3.0],
            ..Default::default()
        };
        let row = r.to_csv_row();
        assert_eq!(row.split(',').count(), DiagnosticsRecord::csv_header(2).split(',').count());
        assert_eq!(DiagnosticsRecord::from_csv_row(&row).unwrap(), r);
        assert!(row.contains(",,"));
        assert!(r.is_finite());
    }

    #[test]
    fn non_finite_entries_are_detected() {
        let r = DiagnosticsRecord {
            energy: f64::NAN,
            ..Default::default()
        };
        assert!(!r.is_finite());
        assert!(DiagnosticsRecord::from_csv_row("1,2").is_err());
    }
}
