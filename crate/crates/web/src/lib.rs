//! Browser bindings: end-pair transfer curves, the pair-concurrence map and
//! Werner-state measures.

use wasm_bindgen::prelude::*;

use spinwire::evolve::PropagatorConfig;
use spinwire::experiments::{hopping_map, hopping_pairs, run_transfer, site_label, TRANSFER_CHANNELS};
use spinwire::measures::{concurrence, purity, werner_average_fidelity, werner_singlet_fraction, werner_state};
use spinwire::model::ChainSpec;

/// Largest total length offered in the page.
pub const MAX_WEB_SITES: usize = 14;

fn spec(n_channel: usize, coupling: f64) -> spinwire::Result<ChainSpec> {
    let spec = ChainSpec::new(n_channel, coupling)?;
    if spec.n_total() > MAX_WEB_SITES {
        return Err(spinwire::Error::InvalidParameter(format!(
            "N = {} exceeds the page limit of {MAX_WEB_SITES} sites",
            spec.n_total()
        )));
    }
    Ok(spec)
}

fn sampling(dt: f64) -> PropagatorConfig {
    PropagatorConfig { dt_sample: dt, ..PropagatorConfig::default() }
}

fn js(e: spinwire::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Transfer {
    times: Vec<f64>,
    channels: Vec<Vec<f64>>,
}

#[wasm_bindgen]
impl Transfer {
    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    /// Channel `k` in the order `concurrence, purity, werner_p, avg_fidelity`.
    pub fn channel(&self, k: usize) -> Vec<f64> {
        self.channels.get(k).cloned().unwrap_or_default()
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }
}

pub fn compute_transfer(n_channel: usize, coupling: f64, t_max: f64, dt: f64) -> spinwire::Result<Transfer> {
    let series = run_transfer(&spec(n_channel, coupling)?, t_max, &sampling(dt))?;
    let channels = TRANSFER_CHANNELS.iter().map(|k| series.get(k).expect("transfer channel").to_vec()).collect();
    Ok(Transfer { times: series.times().to_vec(), channels })
}

#[wasm_bindgen]
pub fn transfer(n_channel: usize, coupling: f64, t_max: f64, dt: f64) -> Result<Transfer, JsError> {
    compute_transfer(n_channel, coupling, t_max, dt).map_err(js)
}

/// Pair concurrences over time, row-major `[sample][pair]`.
#[wasm_bindgen]
pub struct Hopping {
    times: Vec<f64>,
    labels: Vec<String>,
    values: Vec<f64>,
}

#[wasm_bindgen]
impl Hopping {
    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    pub fn labels(&self) -> Vec<String> {
        self.labels.clone()
    }

    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    pub fn pair_count(&self) -> usize {
        self.labels.len()
    }
}

pub fn compute_hopping(n_channel: usize, coupling: f64, t_max: f64, dt: f64) -> spinwire::Result<Hopping> {
    let spec = spec(n_channel, coupling)?;
    let map = hopping_map(&spec, t_max, &sampling(dt))?;
    let labels: Vec<String> =
        hopping_pairs(&spec).iter().map(|&(a, b)| format!("{}-{}", site_label(a), site_label(b))).collect();
    let cols = map.series.channels();
    let mut values = Vec::with_capacity(map.series.len() * cols.len());
    for k in 0..map.series.len() {
        values.extend(cols.iter().map(|(_, v)| v[k]));
    }
    Ok(Hopping { times: map.series.times().to_vec(), labels, values })
}

#[wasm_bindgen]
pub fn hopping(n_channel: usize, coupling: f64, t_max: f64, dt: f64) -> Result<Hopping, JsError> {
    compute_hopping(n_channel, coupling, t_max, dt).map_err(js)
}

/// `[concurrence, purity, average fidelity, singlet fraction]` of the
/// Werner state with singlet weight `p`.
pub fn compute_werner(p: f64) -> spinwire::Result<Vec<f64>> {
    if !(-1.0 / 3.0..=1.0).contains(&p) {
        return Err(spinwire::Error::InvalidParameter(format!("p must be in [-1/3, 1], got {p}")));
    }
    let rho = werner_state(p);
    Ok(vec![concurrence(&rho)?, purity(&rho), werner_average_fidelity(p), werner_singlet_fraction(p)])
}

#[wasm_bindgen]
pub fn werner(p: f64) -> Result<Vec<f64>, JsError> {
    compute_werner(p).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transfer_starts_from_mixed_end_pair() {
        let t = compute_transfer(2, 1.0, 1.0, 0.1).unwrap();
        assert_eq!(t.times().len(), 11);
        assert_eq!(t.channel_count(), 4);
        assert!(t.channel(0)[0].abs() < 1e-12);
        assert!((t.channel(1)[0] - 0.25).abs() < 1e-12);
        assert!((t.channel(3)[0] - 0.5).abs() < 1e-12);
        assert!(t.channel(9).is_empty());
    }

    #[test]
    fn hopping_layout() {
        let h = compute_hopping(4, 1.0, 0.5, 0.25).unwrap();
        assert_eq!(h.times().len(), 3);
        assert_eq!(h.labels()[0], "0p-0");
        assert_eq!(h.values().len(), 3 * h.pair_count());
        assert!((h.values()[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn werner_values() {
        let w = compute_werner(1.0).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-12 && (w[1] - 1.0).abs() < 1e-12);
        let w = compute_werner(0.2).unwrap();
        assert!(w[0].abs() < 1e-12);
        assert!((w[2] - 0.6).abs() < 1e-15);
        assert!(compute_werner(1.5).is_err());
    }

    #[test]
    fn size_limit() {
        assert!(compute_transfer(MAX_WEB_SITES - 1, 1.0, 1.0, 0.1).is_err());
        assert!(compute_transfer(0, 1.0, 1.0, 0.1).is_err());
    }
}
