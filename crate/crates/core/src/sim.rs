//! Run driver: builds solvers from a [`SimConfig`], steps to `t_end` and collects output.

use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;

use crate::chaos::{GpcBasis, RandomCoefficient};
use crate::collocation::{ensemble_stats, project_members, CollocationPlan};
use crate::config::{Model, SimConfig, UqMode};
use crate::diagnostics::{mean_std_fields, FieldSnapshot, ScalarRow};
use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::imex::{KineticSolver, KineticState};
use crate::initial::{equilibrium_state, initial_density_at, initial_density_hat};
use crate::kernels::ModelKind;
use crate::limit::{KsSolver, MacroState};
use crate::output::{write_fields, write_scalars};

/// One solver with its state: either the full gPC system or a single realization.
#[derive(Debug, Clone)]
pub enum Member {
    Kinetic {
        solver: Box<KineticSolver>,
        state: KineticState,
    },
    Limit {
        solver: Box<KsSolver>,
        state: MacroState,
    },
}

impl Member {
    pub fn build(cfg: &SimConfig, basis: GpcBasis, coeff: &RandomCoefficient, rho0: Array2<f64>) -> Result<Self> {
        let grid = cfg.grid()?;
        let vel = cfg.velocity()?;
        Ok(match cfg.model {
            Model::KsLimit => Member::Limit {
                solver: Box::new(KsSolver::new(basis, coeff, &vel, grid)),
                state: MacroState { rho_hat: rho0, t: 0.0 },
            },
            Model::Nonlocal | Model::Local => {
                let kind = if cfg.model == Model::Local {
                    ModelKind::local(&vel)
                } else {
                    ModelKind::Nonlocal
                };
                let state = equilibrium_state(&rho0, &vel);
                Member::Kinetic {
                    solver: Box::new(KineticSolver::new(kind, cfg.eps, basis, coeff, vel, grid)?),
                    state,
                }
            }
        })
    }

    pub fn step(&mut self, dt: f64) -> Result<()> {
        match self {
            Member::Kinetic { solver, state } => *state = solver.step(state, dt)?,
            Member::Limit { solver, state } => *state = solver.step(state, dt)?,
        }
        Ok(())
    }

    /// Density chaos coefficients `[n, K]`.
    pub fn density(&self) -> Array2<f64> {
        match self {
            Member::Kinetic { solver, state } => state.density(&solver.vel),
            Member::Limit { state, .. } => state.rho_hat.clone(),
        }
    }

    /// Chemoattractant coefficients `[n, K]` for the given density.
    pub fn chemo(&self, rho_hat: &Array2<f64>) -> Result<Array2<f64>> {
        Ok(match self {
            Member::Kinetic { solver, .. } => solver.chemo_field(rho_hat)?.s_hat,
            Member::Limit { solver, .. } => solver.chemo_field(rho_hat)?.s_hat,
        })
    }

    pub fn time(&self) -> f64 {
        match self {
            Member::Kinetic { state, .. } => state.t,
            Member::Limit { state, .. } => state.t,
        }
    }
}

/// What the UQ mode advances in lockstep.
#[derive(Debug, Clone)]
pub enum Ensemble {
    Galerkin(Member),
    Collocation {
        plan: CollocationPlan,
        members: Vec<Member>,
        /// Modes reported in field snapshots.
        k: usize,
    },
}

/// Statistics of the current state.
#[derive(Debug, Clone)]
pub struct Observation {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub modes: Vec<Vec<f64>>,
    pub variance_clamp: f64,
}

fn columns(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.columns().into_iter().map(|c| c.to_vec()).collect()
}

impl Ensemble {
    pub fn build(cfg: &SimConfig) -> Result<Self> {
        let grid = cfg.grid()?;
        match cfg.uq {
            UqMode::Gpc => {
                let basis = GpcBasis::with_order(cfg.gpc_order)?;
                let rho0 = initial_density_hat(&cfg.peaks, &basis, &grid);
                Ok(Ensemble::Galerkin(Member::build(cfg, basis, &cfg.alpha, rho0)?))
            }
            UqMode::Deterministic => {
                let coeff = RandomCoefficient::constant(cfg.alpha.a0)?;
                let rho0 = initial_density_at(&cfg.peaks, 0.0, &grid);
                Ok(Ensemble::Galerkin(Member::build(cfg, GpcBasis::with_order(0)?, &coeff, rho0)?))
            }
            UqMode::Collocation => {
                let plan = CollocationPlan::gauss(cfg.colloc_nodes)?;
                let members = plan
                    .nodes
                    .iter()
                    .map(|&z| {
                        let coeff = RandomCoefficient::constant(cfg.alpha.eval(z))?;
                        let rho0 = initial_density_at(&cfg.peaks, z, &grid);
                        Member::build(cfg, GpcBasis::with_order(0)?, &coeff, rho0)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Ensemble::Collocation {
                    plan,
                    members,
                    k: cfg.gpc_order + 1,
                })
            }
        }
    }

    pub fn step(&mut self, dt: f64) -> Result<()> {
        match self {
            Ensemble::Galerkin(m) => m.step(dt),
            Ensemble::Collocation { plan, members, .. } => {
                let results: Vec<Result<()>> = members.par_iter_mut().map(|m| m.step(dt)).collect();
                for (j, r) in results.into_iter().enumerate() {
                    if let Err(e) = r {
                        return Err(name_node(e, j, plan.nodes[j]));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn time(&self) -> f64 {
        match self {
            Ensemble::Galerkin(m) => m.time(),
            Ensemble::Collocation { members, .. } => members[0].time(),
        }
    }

    pub fn observe(&self) -> Observation {
        match self {
            Ensemble::Galerkin(m) => {
                let rho = m.density();
                let (mean, std) = mean_std_fields(rho.view());
                Observation {
                    mean: mean.to_vec(),
                    std: std.to_vec(),
                    modes: columns(&rho),
                    variance_clamp: 0.0,
                }
            }
            Ensemble::Collocation { plan, members, k } => {
                let fields: Vec<Vec<f64>> = members.iter().map(|m| m.density().column(0).to_vec()).collect();
                let refs: Vec<&[f64]> = fields.iter().map(|f| f.as_slice()).collect();
                let stats = ensemble_stats(plan, &refs);
                Observation {
                    modes: project_members(plan, &refs, *k),
                    mean: stats.mean,
                    std: stats.std,
                    variance_clamp: stats.variance_clamp,
                }
            }
        }
    }

    /// Mean chemoattractant concentration.
    pub fn mean_chemo(&self) -> Result<Vec<f64>> {
        match self {
            Ensemble::Galerkin(m) => Ok(m.chemo(&m.density())?.column(0).to_vec()),
            Ensemble::Collocation { plan, members, .. } => {
                let fields = members
                    .iter()
                    .map(|m| Ok(m.chemo(&m.density())?.column(0).to_vec()))
                    .collect::<Result<Vec<_>>>()?;
                let refs: Vec<&[f64]> = fields.iter().map(|f| f.as_slice()).collect();
                Ok(ensemble_stats(plan, &refs).mean)
            }
        }
    }
}

fn name_node(e: Error, j: usize, z: f64) -> Error {
    let tag = format!("collocation node {j} (z = {z})");
    match e {
        Error::Numerical(m) => Error::Numerical(format!("{tag}: {m}")),
        Error::Config(m) => Error::Config(format!("{tag}: {m}")),
        other => other,
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub scalars: Vec<ScalarRow>,
    pub snapshots: Vec<FieldSnapshot>,
    pub dt: f64,
    pub steps: usize,
    /// Smallest mean density seen; negative values are reported, not clipped.
    pub min_mean_rho: f64,
    /// Largest relative negative variance clipped by the collocation reduction.
    pub variance_clamp: f64,
}

impl RunOutput {
    pub fn final_row(&self) -> &ScalarRow {
        self.scalars.last().expect("at least the initial row")
    }
}

/// Step indices for the requested snapshot times plus the final step.
pub fn snapshot_steps(cfg: &SimConfig) -> Vec<usize> {
    let n = cfg.n_steps();
    let dt = cfg.dt();
    let mut steps: Vec<usize> = cfg
        .snapshot_times
        .iter()
        .map(|t| ((t / dt).round() as usize).min(n))
        .chain(std::iter::once(n))
        .collect();
    steps.sort_unstable();
    steps.dedup();
    steps
}

fn snapshot(t: f64, obs: &Observation, mean_s: Vec<f64>, grid: &SpatialGrid) -> FieldSnapshot {
    FieldSnapshot {
        t,
        x: grid.centers.clone(),
        mean_rho: obs.mean.clone(),
        std_rho: obs.std.clone(),
        modes: obs.modes.clone(),
        mean_s,
    }
}

/// Runs to `t_end`, calling `observer` with each scalar row as it is produced.
pub fn run_with(cfg: &SimConfig, mut observer: impl FnMut(&ScalarRow)) -> Result<RunOutput> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let dt = cfg.dt();
    let n_steps = cfg.n_steps();
    let snaps = snapshot_steps(cfg);
    let mut ens = Ensemble::build(cfg)?;

    let mut out = RunOutput {
        scalars: Vec::with_capacity(n_steps + 1),
        snapshots: Vec::new(),
        dt,
        steps: n_steps,
        min_mean_rho: f64::INFINITY,
        variance_clamp: 0.0,
    };
    let mut next_snap = 0;
    for step in 0..=n_steps {
        if step > 0 {
            ens.step(dt)?;
        }
        let t = step as f64 * dt;
        let obs = ens.observe();
        let row = ScalarRow::from_fields(t, &obs.mean, &obs.std, &grid);
        observer(&row);
        out.scalars.push(row);
        out.min_mean_rho = obs.mean.iter().copied().fold(out.min_mean_rho, f64::min);
        out.variance_clamp = out.variance_clamp.max(obs.variance_clamp);
        if next_snap < snaps.len() && snaps[next_snap] == step {
            out.snapshots.push(snapshot(t, &obs, ens.mean_chemo()?, &grid));
            next_snap += 1;
        }
    }
    debug_assert!((ens.time() - n_steps as f64 * dt).abs() <= 1e-9 * dt.max(ens.time()));
    Ok(out)
}

pub fn run(cfg: &SimConfig) -> Result<RunOutput> {
    run_with(cfg, |_| {})
}

/// Runs and writes `scalars.csv` plus one field file per snapshot into `dir`.
pub fn run_to_dir(cfg: &SimConfig, dir: &Path) -> Result<RunOutput> {
    let out = run(cfg)?;
    write_outputs(&out, dir)?;
    Ok(out)
}

pub fn write_outputs(out: &RunOutput, dir: &Path) -> Result<()> {
    write_scalars(dir, &out.scalars)?;
    for s in &out.snapshots {
        write_fields(dir, s)?;
    }
    Ok(())
}
