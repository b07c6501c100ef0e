use serde::{Deserialize, Serialize};

use crate::measures::{first_maximum, PeakResult};
use crate::{Error, Result};

/// Uniform sampling times `k * dt` for `k = 0..=round(t_max / dt)`.
pub fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("sampling interval must be > 0, got {dt}")));
    }
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_max must be >= 0, got {t_max}")));
    }
    let n = (t_max / dt).round() as usize;
    Ok((0..=n).map(|k| k as f64 * dt).collect())
}

/// Sampled scalars sharing one time axis, in insertion order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    times: Vec<f64>,
    channels: Vec<(String, Vec<f64>)>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("times must be strictly increasing".into()));
        }
        Ok(Self { times, channels: Vec::new() })
    }

    pub fn push_channel(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.times.len() {
            return Err(Error::SizeMismatch { expected: self.times.len(), found: values.len() });
        }
        if self.get(&name).is_some() {
            return Err(Error::InvalidParameter(format!("duplicate channel {name}")));
        }
        self.channels.push((name, values));
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.channels.iter().map(|(n, _)| n.as_str())
    }

    pub fn channels(&self) -> &[(String, Vec<f64>)] {
        &self.channels
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.channels.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn first_maximum(&self, key: &str) -> Result<PeakResult> {
        let values = self.get(key).ok_or_else(|| Error::UnknownChannel(key.to_string()))?;
        first_maximum(&self.times, values).ok_or_else(|| Error::NoPeak(key.to_string()))
    }
}

/// Runs of at least `min_len` consecutive samples below `tol`, as half-open
/// index ranges.
pub fn flat_zero_intervals(values: &[f64], min_len: usize, tol: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, v) in values.iter().enumerate() {
        match (v.abs() < tol, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if i - s >= min_len {
                    out.push((s, i));
                }
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        if values.len() - s >= min_len {
            out.push((s, values.len()));
        }
    }
    out
}
