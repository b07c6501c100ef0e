//! Experiment dispatch and the metadata record.

use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use spinwire::experiments::{
    ansatz_overlap, default_t_max, hopping_map, run_transfer, scan_gamma, scan_length, scan_temperature, sign_label,
    site_label, ScanRow, TimeSeries,
};

use crate::config::{Experiment, RunConfig};
use crate::output::{write_all, Cell, Table};
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Units {
    pub time: &'static str,
    pub temperature: &'static str,
    pub gamma: &'static str,
    pub energy: &'static str,
}

const UNITS: Units = Units {
    time: "1/|J| (hbar = 1)",
    temperature: "|J|/k_B",
    gamma: "|J|",
    energy: "|J|",
};

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: Experiment,
    pub config: RunConfig,
    pub units: Units,
    /// Total sites `N = N_ch + 2`, absent for length scans.
    pub n_total: Option<usize>,
    pub n_channel: Option<usize>,
    pub t_max: Option<f64>,
    pub tie_break: Option<String>,
    pub data_file: String,
    pub columns: Vec<String>,
    pub rows: usize,
    pub wall_time_s: f64,
    pub threads: usize,
}

/// Data table plus the chain-level facts recorded in metadata.
struct Outcome {
    table: Table,
    n_total: Option<usize>,
    n_channel: Option<usize>,
    t_max: Option<f64>,
    tie_break: Option<String>,
}

fn series_table(series: &TimeSeries) -> Table {
    let mut cols = vec!["t".to_string()];
    cols.extend(series.names().map(str::to_string));
    let mut table = Table::new(cols);
    for (k, &t) in series.times().iter().enumerate() {
        let mut row = vec![Cell::Time(t)];
        row.extend(series.channels().iter().map(|(_, v)| Cell::Num(v[k])));
        table.push(row);
    }
    table
}

fn scan_table(key: &str, rows: &[ScanRow], key_cell: impl Fn(f64) -> Cell) -> Table {
    let cols = [key, "sign", "t_first_max", "c_first_max", "purity_at_max"];
    let mut table = Table::new(cols.iter().map(|s| s.to_string()).collect());
    let opt = |v: Option<f64>| v.map_or(Cell::Missing, Cell::Num);
    for r in rows {
        table.push(vec![
            key_cell(r.key),
            Cell::Text(sign_label(r.coupling).into()),
            opt(r.t_first_max),
            Cell::Num(r.c_first_max),
            opt(r.purity_at_max),
        ]);
    }
    table
}

fn compute(experiment: Experiment, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let prop = &cfg.propagator;
    if experiment == Experiment::ScanLength {
        let rows = scan_length(&cfg.lengths(), cfg.chain.coupling, cfg.grids.t_max, prop)?;
        return Ok(Outcome {
            table: scan_table("N", &rows, |n| Cell::Int(n.round() as i64)),
            n_total: None,
            n_channel: None,
            t_max: cfg.grids.t_max,
            tie_break: None,
        });
    }
    let spec = cfg.chain_spec()?;
    let t_max = cfg.grids.t_max.unwrap_or_else(|| default_t_max(&spec));
    let table = match experiment {
        Experiment::Transfer => series_table(&run_transfer(&spec, t_max, prop)?),
        Experiment::Overlap => series_table(&ansatz_overlap(&spec, t_max, prop)?),
        Experiment::Hopping => {
            let map = hopping_map(&spec, t_max, prop)?;
            let mut table = series_table(&map.series);
            table.columns.push("bonds".into());
            for (row, bonds) in table.rows.iter_mut().zip(&map.bonds) {
                let text: Vec<String> =
                    bonds.iter().map(|&(a, b)| format!("{}-{}", site_label(a), site_label(b))).collect();
                row.push(Cell::Text(text.join(";")));
            }
            table
        }
        Experiment::Thermal => {
            let rows =
                scan_temperature(&spec, &cfg.grids.temperatures, Some(t_max), prop, Some(cfg.grids.weight_cut))?;
            scan_table("T", &rows, Cell::Num)
        }
        Experiment::Decoherence => {
            let rows = scan_gamma(&spec, &cfg.grids.gammas, Some(t_max), prop.dt_sample, &cfg.lindblad)?;
            scan_table("gamma", &rows, Cell::Num)
        }
        Experiment::ScanLength => unreachable!(),
    };
    Ok(Outcome {
        table,
        n_total: Some(spec.n_total()),
        n_channel: Some(spec.n_channel),
        t_max: Some(t_max),
        tie_break: Some(spec.tie_break.describe(spec.n_channel)),
    })
}

/// Runs one experiment and writes `<name>.<ext>` and `<name>.meta.json`.
/// Nothing is written unless the computation succeeds.
pub fn run(experiment: Experiment, cfg: &RunConfig, threads: Option<usize>) -> Result<Vec<PathBuf>, CliError> {
    cfg.validate(experiment)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        if k == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        builder = builder.num_threads(k);
    }
    let pool = builder.build().map_err(|e| CliError::Numerical(e.to_string()))?;
    let format = cfg.format.unwrap_or_default();
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));

    let start = Instant::now();
    let outcome = pool.install(|| compute(experiment, cfg))?;
    let wall = start.elapsed().as_secs_f64();

    let mut echo = cfg.clone();
    echo.experiment = Some(experiment);
    echo.format = Some(format);
    echo.output_dir = Some(dir.clone());
    let data_file = format!("{}.{}", experiment.name(), format.extension());
    let meta = Metadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        experiment,
        config: echo,
        units: UNITS,
        n_total: outcome.n_total,
        n_channel: outcome.n_channel,
        t_max: outcome.t_max,
        tie_break: outcome.tie_break,
        data_file: data_file.clone(),
        columns: outcome.table.columns.clone(),
        rows: outcome.table.rows.len(),
        wall_time_s: wall,
        threads: pool.current_num_threads(),
    };
    let mut meta_bytes = serde_json::to_vec_pretty(&meta)?;
    meta_bytes.push(b'\n');
    let files = vec![
        (data_file, outcome.table.encode(format)?),
        (format!("{}.meta.json", experiment.name()), meta_bytes),
    ];
    write_all(&dir, &files)
}
