//! Figure sweeps and the oracle cross-check.

use fbl_eee::channel::{self, ExpectationMethod, OperatingPoint};
use fbl_eee::effcap::{self, BufferMode, EcModel, PowerModelConfig, QosConfig};
use fbl_eee::optimize::{
    evaluate_candidate, solve_constrained, EpsilonMode, EpsilonRule, RateConstraint, SolveConstraints,
};
use fbl_eee::specfun::RandomStream;
use fbl_eee::{db_to_linear, linear_to_db};
use rayon::prelude::*;

use crate::config::{Bundle, Method};
use crate::table::{Cell, CsvTable};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// EEE vs SNR for several θ.
    EeeVsSnr,
    /// EEE vs ε at fixed SNR.
    EeeVsEpsilon,
    /// Optimal EEE vs δ.
    EeeVsDelta,
    /// Optimal power vs δ.
    PowerVsDelta,
    /// EC at the optimum vs δ.
    EcVsDelta,
}

impl Figure {
    pub fn from_number(n: u8) -> Result<Self, CliError> {
        Ok(match n {
            2 => Figure::EeeVsSnr,
            3 => Figure::EeeVsEpsilon,
            4 => Figure::EeeVsDelta,
            5 => Figure::PowerVsDelta,
            6 => Figure::EcVsDelta,
            _ => return Err(CliError::Validation(format!("figure must be 2..6, got {n}"))),
        })
    }

    fn default_grid(self) -> Grid {
        match self {
            Figure::EeeVsSnr => Grid::new(-10.0, 20.0, 31, Spacing::Linear),
            Figure::EeeVsEpsilon => Grid::new(1e-8, 0.5, 50, Spacing::Log),
            _ => Grid::new(100.0, 1000.0, 10, Spacing::Linear),
        }
    }

    fn variable(self) -> &'static str {
        match self {
            Figure::EeeVsSnr => "snr_db",
            Figure::EeeVsEpsilon => "epsilon",
            _ => "delta",
        }
    }
}

pub const FIG2_THETAS: [f64; 3] = [0.001, 0.01, 0.1];
pub const OUTAGE_SERIES: [f64; 2] = [1e-2, 1e-3];
/// Extra full-buffer series of the power figure.
pub const LOW_ARRIVAL_RATE: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Grid {
    pub fn new(start: f64, stop: f64, count: usize, spacing: Spacing) -> Self {
        Self {
            start,
            stop,
            count,
            spacing,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.count < 2 {
            return Err(CliError::Validation(format!(
                "count must be at least 2, got {}",
                self.count
            )));
        }
        if self.start >= self.stop || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(CliError::Validation(format!(
                "start must be below stop, got {} and {}",
                self.start, self.stop
            )));
        }
        if self.spacing == Spacing::Log && self.start <= 0.0 {
            return Err(CliError::Validation(format!(
                "start must be positive on a log grid, got {}",
                self.start
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let s = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.start + (self.stop - self.start) * s,
                    Spacing::Log => (self.start.ln() + (self.stop / self.start).ln() * s).exp(),
                }
            })
            .collect()
    }
}

/// Start, stop and count overrides from the command line.
#[derive(Debug, Clone, Copy, Default)]
pub struct GridOverride {
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub count: Option<usize>,
}

impl GridOverride {
    fn apply(self, g: Grid) -> Grid {
        Grid {
            start: self.start.unwrap_or(g.start),
            stop: self.stop.unwrap_or(g.stop),
            count: self.count.unwrap_or(g.count),
            spacing: g.spacing,
        }
    }
}

/// A curve in a figure.
#[derive(Debug, Clone, Copy)]
struct Series {
    mode: BufferMode,
    lambda_out: f64,
    arrival_rate: f64,
    model: EcModel,
}

impl Series {
    fn name(&self) -> String {
        let mode = match self.mode {
            BufferMode::FullBuffer => "full",
            BufferMode::EmptyBufferAware => "ebp",
        };
        let model = if self.model.is_shannon() { "shannon" } else { "fbl" };
        let lambda = if self.arrival_rate == 1.0 {
            String::new()
        } else {
            format!("_lambda{}", self.arrival_rate)
        };
        format!("{mode}_outage{:e}{lambda}_{model}", self.lambda_out)
    }
}

fn series_set(model: EcModel, figure: Figure, arrival_rate: f64) -> Vec<Series> {
    let mut out = Vec::new();
    for mode in [BufferMode::FullBuffer, BufferMode::EmptyBufferAware] {
        for lambda_out in OUTAGE_SERIES {
            for m in [model, EcModel::Shannon] {
                out.push(Series {
                    mode,
                    lambda_out,
                    arrival_rate,
                    model: m,
                });
            }
        }
    }
    if figure == Figure::PowerVsDelta {
        out.push(Series {
            mode: BufferMode::FullBuffer,
            lambda_out: OUTAGE_SERIES[0],
            arrival_rate: LOW_ARRIVAL_RATE,
            model,
        });
    }
    out
}

pub(crate) fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

/// One row of cells per grid point, plus per-cell error notes.
type RowOut = (Vec<Cell>, Vec<String>);

pub fn run_sweep(
    b: &Bundle,
    figure: Figure,
    grid: GridOverride,
    rate_constraint: RateConstraint,
) -> Result<CsvTable, CliError> {
    if b.method == Method::MonteCarlo {
        return Err(CliError::Validation(
            "method monte-carlo is not available for sweeps; use cross-check".into(),
        ));
    }
    let grid = grid.apply(figure.default_grid());
    grid.validate()?;
    let model = b.method.model();
    let xs = grid.points();

    let mut header = vec![figure.variable().to_string()];
    let compute: Box<dyn Fn(f64) -> RowOut + Sync> = match figure {
        Figure::EeeVsSnr => {
            for th in FIG2_THETAS {
                header.push(format!("eee_theta{th}"));
            }
            Box::new(move |snr_db| {
                let mut row = vec![Cell::Num(snr_db)];
                let mut notes = Vec::new();
                for th in FIG2_THETAS {
                    let qos = QosConfig::with_exponent(th, b.qos.arrival_rate).expect("valid exponent");
                    match evaluate_candidate(
                        &b.channel,
                        &qos,
                        &b.power,
                        db_to_linear(snr_db),
                        EpsilonRule::Fixed(b.epsilon),
                        model,
                    ) {
                        Ok(c) => row.push(Cell::Num(c.eee)),
                        Err(e) => {
                            row.push(Cell::Empty);
                            notes.push(format!("snr_db={snr_db} theta={th}: {e}"));
                        }
                    }
                }
                (row, notes)
            })
        }
        Figure::EeeVsEpsilon => {
            let (delta, _) = b
                .delay()
                .ok_or_else(|| CliError::Validation("figure 3 needs qos.delta and qos.lambda_out".into()))?;
            let series = series_set(model, figure, b.qos.arrival_rate);
            header.extend(series.iter().map(|s| format!("eee_{}", s.name())));
            let rho = db_to_linear(b.snr_db);
            Box::new(move |eps| {
                let mut row = vec![Cell::Num(eps)];
                let mut notes = Vec::new();
                for s in &series {
                    let qos = QosConfig::with_outage(delta, s.lambda_out, s.arrival_rate).expect("valid target");
                    let pm = PowerModelConfig {
                        buffer_mode: s.mode,
                        ..b.power
                    };
                    match evaluate_candidate(&b.channel, &qos, &pm, rho, EpsilonRule::Fixed(eps), s.model) {
                        Ok(c) => row.push(Cell::Num(c.eee)),
                        Err(e) => {
                            row.push(Cell::Empty);
                            notes.push(format!("epsilon={eps} {}: {e}", s.name()));
                        }
                    }
                }
                (row, notes)
            })
        }
        Figure::EeeVsDelta | Figure::PowerVsDelta | Figure::EcVsDelta => {
            let series = series_set(model, figure, b.qos.arrival_rate);
            let prefix = match figure {
                Figure::EeeVsDelta => "eee_star",
                Figure::PowerVsDelta => "rho_star_db",
                _ => "ec_star",
            };
            for s in &series {
                header.push(format!("{prefix}_{}", s.name()));
                header.push(format!("feasible_{}", s.name()));
            }
            let epsilon_mode = if figure == Figure::PowerVsDelta {
                EpsilonMode::Target
            } else {
                EpsilonMode::OptimalCapped
            };
            Box::new(move |delta| {
                let mut row = vec![Cell::Num(delta)];
                let mut notes = Vec::new();
                for s in &series {
                    let qos = QosConfig::with_outage(delta, s.lambda_out, s.arrival_rate).expect("valid target");
                    let pm = PowerModelConfig {
                        buffer_mode: s.mode,
                        ..b.power
                    };
                    let cons = SolveConstraints::new(b.rho_max(), b.epsilon_t, qos, pm)
                        .expect("validated caps")
                        .with_rate_model(s.model)
                        .with_rate_constraint(rate_constraint)
                        .with_epsilon_mode(epsilon_mode);
                    let r = solve_constrained(&b.channel, &cons);
                    let value = match figure {
                        Figure::EeeVsDelta => r.eee_star,
                        Figure::PowerVsDelta => linear_to_db(r.rho_star),
                        _ => r.ec_star,
                    };
                    if value.is_finite() {
                        row.push(Cell::Num(value));
                    } else {
                        row.push(Cell::Empty);
                    }
                    row.push(Cell::Flag(r.feasible));
                    if let Some(reason) = r.infeasibility {
                        if !value.is_finite() {
                            notes.push(format!("delta={delta} {}: {reason}", s.name()));
                        }
                    }
                }
                (row, notes)
            })
        }
    };

    let rows: Vec<RowOut> = pool(b.jobs)?.install(|| xs.par_iter().map(|&x| compute(x)).collect());
    let mut t = CsvTable::new(header);
    let mut notes = Vec::new();
    for (row, n) in rows {
        t.push(row);
        notes.extend(n);
    }
    let n_fig = match figure {
        Figure::EeeVsSnr => 2,
        Figure::EeeVsEpsilon => 3,
        Figure::EeeVsDelta => 4,
        Figure::PowerVsDelta => 5,
        Figure::EcVsDelta => 6,
    };
    t.note(format!("figure {n_fig}"));
    if matches!(figure, Figure::EeeVsDelta | Figure::PowerVsDelta | Figure::EcVsDelta) {
        let rc = match rate_constraint {
            RateConstraint::Relax => "relax",
            RateConstraint::Enforce => "enforce",
        };
        t.note(format!("rate constraint {rc}"));
    }
    for n in notes {
        t.note(format!("error {n}"));
    }
    Ok(t)
}

/// Closed form vs quadrature vs Monte Carlo ψ over the SNR × θ grid of figure 2.
pub fn cross_check(b: &Bundle, grid: GridOverride) -> Result<CsvTable, CliError> {
    let grid = grid.apply(Figure::EeeVsSnr.default_grid());
    grid.validate()?;
    let cells: Vec<(f64, f64)> = grid
        .points()
        .into_iter()
        .flat_map(|x| FIG2_THETAS.map(|th| (x, th)))
        .collect();
    let n = f64::from(b.channel.blocklength());
    let root = RandomStream::new(b.seed);
    let rows: Vec<Result<[f64; 12], String>> = pool(b.jobs)?.install(|| {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, &(snr_db, theta))| {
                let point = OperatingPoint::new(db_to_linear(snr_db), b.epsilon, theta).map_err(|e| e.to_string())?;
                let closed = effcap::psi(&b.channel, &point, EcModel::ClosedForm).map_err(|e| e.to_string())?;
                let oracle = effcap::psi(&b.channel, &point, EcModel::Oracle).map_err(|e| e.to_string())?;
                let mut stream = root.substream(i as u64);
                let mc = channel::rate_functional_expectation(
                    &b.channel,
                    &point,
                    ExpectationMethod::MonteCarlo {
                        stream: &mut stream,
                        count: b.samples,
                    },
                )
                .map_err(|e| e.to_string())?;
                let ec = |psi: f64| -psi.ln() / (n * theta);
                let (ec_c, ec_o, ec_m) = (ec(closed), ec(oracle), ec(mc.mean));
                Ok([
                    snr_db,
                    theta,
                    closed,
                    oracle,
                    mc.mean,
                    mc.std_error,
                    ec_c,
                    ec_o,
                    ec_m,
                    ((ec_c - ec_o) / ec_o).abs(),
                    ((ec_m - ec_o) / ec_o).abs(),
                    (mc.mean - oracle) / mc.std_error,
                ])
            })
            .collect()
    });
    let mut t = CsvTable::new([
        "snr_db",
        "theta",
        "psi_closed",
        "psi_oracle",
        "psi_mc",
        "psi_mc_std_error",
        "ec_closed",
        "ec_oracle",
        "ec_mc",
        "rel_err_closed",
        "rel_err_mc",
        "mc_z",
    ]);
    let mut worst: Option<(f64, f64, f64)> = None;
    let mut beyond_3sigma = 0;
    let mut notes = Vec::new();
    for (i, r) in rows.into_iter().enumerate() {
        match r {
            Ok(v) => {
                if worst.is_none_or(|w| v[9] > w.0) {
                    worst = Some((v[9], v[0], v[1]));
                }
                if v[11].abs() > 3.0 {
                    beyond_3sigma += 1;
                }
                t.push(v.iter().map(|&x| Cell::Num(x)).collect());
            }
            Err(e) => {
                let (snr_db, theta) = cells[i];
                let mut row = vec![Cell::Num(snr_db), Cell::Num(theta)];
                row.resize(12, Cell::Empty);
                t.push(row);
                notes.push(format!("error snr_db={snr_db} theta={theta}: {e}"));
            }
        }
    }
    if let Some((err, snr_db, theta)) = worst {
        t.note(format!(
            "max rel_err_closed {} at snr_db={snr_db} theta={theta}",
            crate::table::format_number(err)
        ));
    }
    t.note(format!("points with |mc_z| > 3: {beyond_3sigma} of {}", cells.len()));
    t.note(format!("samples {}", b.samples));
    for n in notes {
        t.note(n);
    }
    Ok(t)
}
