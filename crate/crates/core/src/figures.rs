//! Preset experiments for the inexact-gradient comparison figures.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};
use crate::harness::{
    plot_series, run_experiment, write_plotdata, AlgoEntry, AlgoSpec, Channel, ExperimentConfig, InitSpec, PlotMetric,
    Protocol, Report,
};
use crate::min_solvers::{MinBase, MinSolverParams, RegMinParams, StopRule};
use crate::minimax_solvers::{MinimaxBase, MinimaxSolverParams, OutputMode, RegMinimaxParams, Stepsize};
use crate::oracles::{GradMode, OracleKind, OracleSpec};
use crate::plot::{render_svg, Plot, Series};
use crate::problems::{InstanceDoc, InstanceSeedSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureId {
    /// GD, AGD, Reg-GD and Reg-AGD on a rank-deficient quadratic.
    MinInexactGrad,
    /// EG, Reg-EG, GDA and Reg-GDA on a bilinear game over balls.
    MinimaxInexactGrad,
}

impl FigureId {
    pub const ALL: [FigureId; 2] = [FigureId::MinInexactGrad, FigureId::MinimaxInexactGrad];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureId::MinInexactGrad => "min_inexact_grad",
            FigureId::MinimaxInexactGrad => "minimax_inexact_grad",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match FigureId::ALL.iter().find(|id| id.as_str() == s) {
            Some(id) => Ok(*id),
            None => config_err(format!("unknown figure '{s}'; expected min_inexact_grad or minimax_inexact_grad")),
        }
    }
}

pub const DEFAULT_SEED: u64 = 1;
const ITERS: usize = 10_000;
const DELTA: f64 = 0.1;
const REG: f64 = 0.05;
/// Only the budget stops the regularized runs here; this target is unused.
const UNUSED_EPS_R: f64 = 1e-12;

fn fixed_budget(mut p: RegMinimaxParams, stepsize: f64) -> RegMinimaxParams {
    p.base_stepsize = Some(stepsize);
    p.stop = StopRule::Budget;
    p.max_iters = Some(ITERS);
    p
}

fn reg_min_budget(base: MinBase) -> RegMinParams {
    let mut p = RegMinParams::new(REG, UNUSED_EPS_R, base);
    p.base_stepsize = Some(0.01);
    p.stop = StopRule::Budget;
    p.max_iters = Some(ITERS);
    p
}

fn averaged(stepsize: f64) -> MinimaxSolverParams {
    MinimaxSolverParams::new(ITERS).with_stepsize(Stepsize::Value(stepsize)).with_output(OutputMode::Average)
}

/// The preset experiment behind a figure.
pub fn figure_config(id: FigureId, master_seed: u64) -> ExperimentConfig {
    let oracle = OracleSpec::new(OracleKind::InexactGrad, DELTA, GradMode::PaperLiteralOnes, 0);
    let (problem, init, algorithms) = match id {
        FigureId::MinInexactGrad => (
            InstanceDoc::QuadraticMin {
                spec: InstanceSeedSpec { seed: 0, d: 100, eig_lo: 0.1, eig_hi: 10.0, zeros: 1 },
                b_scale: 10.0,
                radius: None,
            },
            InitSpec::Origin,
            vec![
                AlgoEntry::new("GD", AlgoSpec::Gd(MinSolverParams::new(ITERS).with_stepsize(0.01))),
                AlgoEntry::new("AGD", AlgoSpec::Agd(MinSolverParams::new(ITERS).with_stepsize(0.01))),
                AlgoEntry::new("Reg-GD", AlgoSpec::RegMin(reg_min_budget(MinBase::Gd))),
                AlgoEntry::new("Reg-AGD", AlgoSpec::RegMin(reg_min_budget(MinBase::InexactAgd))),
            ],
        ),
        FigureId::MinimaxInexactGrad => (
            InstanceDoc::Bilinear {
                spec: InstanceSeedSpec { seed: 0, d: 500, eig_lo: 0.1, eig_hi: 10.0, zeros: 1 },
                radius: 10.0,
            },
            InitSpec::Sphere { radius: 5.0 },
            vec![
                AlgoEntry::new("EG", AlgoSpec::Eg(averaged(0.1))),
                AlgoEntry::new(
                    "Reg-EG",
                    AlgoSpec::RegMinimax(fixed_budget(RegMinimaxParams::new(REG, UNUSED_EPS_R, MinimaxBase::InexactEgScsc), 0.05)),
                ),
                AlgoEntry::new("GDA", AlgoSpec::Gda(averaged(0.001))),
                AlgoEntry::new(
                    "Reg-GDA",
                    AlgoSpec::RegMinimax(fixed_budget(RegMinimaxParams::new(REG, UNUSED_EPS_R, MinimaxBase::Gda), 0.0001)),
                ),
            ],
        ),
    };
    ExperimentConfig {
        experiment_id: id.as_str().to_string(),
        problem,
        oracle,
        algorithms,
        protocol: Protocol::ReferenceRun,
        channel: Channel::DeterministicGradient,
        master_seed,
        repeats: Some(1),
        init,
        schedule: None,
    }
}

#[derive(Clone, Debug)]
pub struct FigureOutput {
    pub report: Report,
    /// One `t,value` CSV per algorithm and metric.
    pub csv: Vec<PathBuf>,
    /// Convergence and deviation panels.
    pub svg: Vec<PathBuf>,
}

/// Runs a figure's experiment and writes its series and panels into
/// `out_dir/<figure id>/`.
pub fn run_figure(id: FigureId, master_seed: u64, out_dir: &Path) -> Result<FigureOutput> {
    let report = run_experiment(&figure_config(id, master_seed))?;
    let files = write_figure(&report, &out_dir.join(id.as_str()))?;
    Ok(FigureOutput { report, csv: files.0, svg: files.1 })
}

/// Writes the per-series CSVs and the two SVG panels of a figure report.
pub fn write_figure(report: &Report, dir: &Path) -> Result<(Vec<PathBuf>, Vec<PathBuf>)> {
    let csv_paths = write_plotdata(report, dir)?;
    let gap_name = report.problem.gap_metric.as_str();
    let mut svg_paths = Vec::new();
    for (metric, name) in [(PlotMetric::Gap, gap_name), (PlotMetric::Deviation, "deviation_sq")] {
        let series = report
            .algorithms
            .iter()
            .map(|algo| Series {
                label: algo.label.clone(),
                points: plot_series(algo, metric).into_iter().map(|(t, v)| (t as f64, v)).collect(),
            })
            .collect();
        let (title, y_label) = match metric {
            PlotMetric::Gap => ("Convergence", name.replace('_', " ")),
            PlotMetric::Deviation => ("Deviation from the exact-gradient run", "squared deviation".to_string()),
        };
        let plot = Plot {
            title: format!("{title} ({})", report.experiment_id),
            x_label: "iteration t".into(),
            y_label,
            log_x: true,
            log_y: true,
            series,
        };
        let path = dir.join(format!("{name}.svg"));
        std::fs::write(&path, render_svg(&plot))?;
        svg_paths.push(path);
    }
    Ok((csv_paths, svg_paths))
}
