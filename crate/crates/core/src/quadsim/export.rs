//! CSV and JSON export of trajectories.

use super::Trajectory;
use crate::error::{Error, Result};

impl Trajectory {
    /// CSV with columns `iteration,f_gap,step,ratio`. The step column is
    /// empty on the last row and the ratio column on the first.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Numerical(format!("csv: {e}"));
        w.write_record(["iteration", "f_gap", "step", "ratio"]).map_err(io)?;
        let ratios = self.ratios();
        for (i, v) in self.values.iter().enumerate() {
            let step = self.steps.get(i).map(|s| s.to_string()).unwrap_or_default();
            let ratio = i
                .checked_sub(1)
                .and_then(|k| ratios[k])
                .map(|r| r.to_string())
                .unwrap_or_default();
            w.write_record([i.to_string(), v.to_string(), step, ratio]).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Numerical(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Numerical(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Numerical(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: Trajectory = serde_json::from_str(s).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        let n = t.iterates.len();
        if n == 0 || t.values.len() != n || t.steps.len() + 1 != n || t.directions.len() + 1 != n {
            return Err(Error::input("inconsistent trajectory lengths"));
        }
        Ok(t)
    }
}
