use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::jacobi::{assemble_system, jacobi_spectrum, ContractionBound, JacobiState, TridiagonalSystem};
use super::problem::{sup_norm_error, Grid, GridField, PoissonProblem};
use super::variational::VariationalObjective;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::nn::{train, Activation, Control, LossKind, Network, OptimizerKind, OutputHead, TrainConfig};
use crate::scalar::Scalar;
use crate::spectral::{delta_f, FourierBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Dnn,
    Jacobi,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Dnn => "dnn",
            Phase::Jacobi => "jacobi",
        }
    }
}

/// Machine-independent work estimate.
///
/// One training epoch is charged `12 * params * nodes` (forward, input
/// tangent and the backward pass through both); one Jacobi sweep `5 n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub per_epoch: f64,
    pub per_sweep: f64,
}

impl CostModel {
    pub fn new<T: Scalar>(net: &Network<T>, grid: &Grid<T>) -> Self {
        Self {
            per_epoch: 12.0 * net.num_params() as f64 * grid.len() as f64,
            per_sweep: 5.0 * grid.n as f64,
        }
    }

    pub fn cost(&self, epochs: usize, sweeps: usize) -> f64 {
        epochs as f64 * self.per_epoch + sweeps as f64 * self.per_sweep
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverRecord {
    pub phase: Phase,
    /// Epoch in the DNN phase, sweep count in the Jacobi phase.
    pub step: usize,
    pub cost_units: f64,
    pub sup_norm_err: f64,
    /// `Delta_F` at each tracked peak; `None` where undefined.
    pub delta_f: Vec<Option<f64>>,
    /// Seconds since the run started; kept out of the CSV, which must be reproducible.
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub peaks: Vec<f64>,
    pub records: Vec<SolverRecord>,
}

impl SolverTrace {
    /// CSV `phase,step,cost_units,sup_norm_err,dF_k<peak>...`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("phase,step,cost_units,sup_norm_err");
        for k in &self.peaks {
            let _ = write!(s, ",dF_k{k}");
        }
        s.push('\n');
        for r in &self.records {
            let _ = write!(s, "{},{},{:e},{:e}", r.phase.name(), r.step, r.cost_units, r.sup_norm_err);
            for d in &r.delta_f {
                match d {
                    Some(v) => {
                        let _ = write!(s, ",{v:e}");
                    }
                    None => s.push(','),
                }
            }
            s.push('\n');
        }
        s
    }

    /// Wall-clock companion file `phase,step,wall_seconds`.
    pub fn timing_csv(&self) -> String {
        let mut s = String::from("phase,step,wall_seconds\n");
        for r in &self.records {
            let _ = writeln!(s, "{},{},{:.6}", r.phase.name(), r.step, r.wall_seconds);
        }
        s
    }

    /// First recorded step of `phase` with `Delta_F < threshold` at peak `j`.
    pub fn crossing_step(&self, phase: Phase, j: usize, threshold: f64) -> Option<usize> {
        self.records
            .iter()
            .filter(|r| r.phase == phase)
            .find(|r| r.delta_f.get(j).copied().flatten().is_some_and(|d| d < threshold))
            .map(|r| r.step)
    }

    /// Cost at the first record whose sup-norm error is below `target`.
    pub fn cost_to_reach(&self, target: f64) -> Option<f64> {
        self.records.iter().find(|r| r.sup_norm_err < target).map(|r| r.cost_units)
    }
}

/// Sup-norm error and per-peak `Delta_F` of grid fields against the reference solution.
#[derive(Debug, Clone)]
pub struct PeakDiagnostics<T> {
    basis: FourierBasis<T>,
    target: Vec<Complex<T>>,
    reference: Vec<T>,
}

impl<T: Scalar> PeakDiagnostics<T> {
    pub fn new(problem: &PoissonProblem<T>, grid: &Grid<T>, peaks: &[T]) -> Result<Self> {
        let reference = problem.reference_field(grid)?.values().to_vec();
        let xs: Vec<T> = grid.nodes().collect();
        let basis = FourierBasis::new(&xs, peaks)?;
        let target = basis.transform(&reference)?;
        Ok(Self { basis, target, reference })
    }

    pub fn reference(&self) -> &[T] {
        &self.reference
    }

    pub fn target(&self) -> &[Complex<T>] {
        &self.target
    }

    pub fn measure(&self, values: &[T]) -> Result<(f64, Vec<Option<f64>>)> {
        let sup = sup_norm_error(values, &self.reference)?.as_f64();
        let h = self.basis.transform(values)?;
        let d = self
            .target
            .iter()
            .zip(&h)
            .map(|(&y, &hh)| delta_f(y, hh).ok().map(|v| v.as_f64()))
            .collect();
        Ok((sup, d))
    }
}

/// Network and optimizer settings for the variational solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverNetConfig {
    pub widths: Vec<usize>,
    pub activation: Activation,
    pub init_std: f64,
    pub learning_rate: f64,
    pub beta: f64,
    pub seed: u64,
}

impl SolverNetConfig {
    pub fn init_network<T: Scalar>(&self) -> Result<Network<T>> {
        Network::init(&self.widths, self.activation, OutputHead::Linear, self.init_std, self.seed)
    }

    fn train_config(&self, epochs: usize, record_every: usize) -> TrainConfig {
        TrainConfig {
            loss: LossKind::Mse,
            optimizer: OptimizerKind::Adam,
            learning_rate: self.learning_rate,
            batch_size: None,
            epochs,
            init_std: self.init_std,
            seed: self.seed,
            record_every,
        }
    }
}

/// Trains on the variational loss, recording sup-norm error and peak `Delta_F`.
///
/// `on_record` sees every record and may stop training early.
#[allow(clippy::too_many_arguments)]
pub fn dnn_solve<T: Scalar>(
    problem: &PoissonProblem<T>,
    grid: &Grid<T>,
    peaks: &[T],
    config: &SolverNetConfig,
    epochs: usize,
    record_every: usize,
    on_record: &mut dyn FnMut(&SolverRecord) -> Control,
) -> Result<(Network<T>, SolverTrace)> {
    let diag = PeakDiagnostics::new(problem, grid, peaks)?;
    let objective = VariationalObjective::new(problem, grid, config.beta)?;
    let mut net = config.init_network::<T>()?;
    let cost = CostModel::new(&net, grid);
    let mut records = Vec::new();
    let start = Instant::now();
    let nodes = objective.nodes().clone();
    let mut probe = |epoch: usize, _: &Network<T>, snapshot: Option<&Matrix<T>>| -> Result<Control> {
        let h = snapshot.expect("probe inputs supplied").as_slice();
        let (sup, d) = diag.measure(h)?;
        let rec = SolverRecord {
            phase: Phase::Dnn,
            step: epoch,
            cost_units: cost.cost(epoch, 0),
            sup_norm_err: sup,
            delta_f: d,
            wall_seconds: start.elapsed().as_secs_f64(),
        };
        let c = on_record(&rec);
        records.push(rec);
        Ok(c)
    };
    train(
        &mut net,
        &objective,
        &config.train_config(epochs, record_every),
        Some(&nodes),
        &mut [&mut probe],
    )?;
    Ok((
        net,
        SolverTrace {
            peaks: peaks.iter().map(|k| k.as_f64()).collect(),
            records,
        },
    ))
}

/// Jacobi sweeps from an interior initial iterate, recorded every `record_every` sweeps.
#[allow(clippy::too_many_arguments)]
pub fn jacobi_run<T: Scalar>(
    problem: &PoissonProblem<T>,
    grid: &Grid<T>,
    system: &TridiagonalSystem<T>,
    diag: &PeakDiagnostics<T>,
    initial: Vec<T>,
    sweeps: usize,
    record_every: usize,
    base_cost: f64,
    cost: &CostModel,
    stop_below: Option<f64>,
    clock: (Instant, f64),
) -> Result<(Vec<SolverRecord>, Vec<T>)> {
    if record_every == 0 {
        return Err(Error::invalid("record_every must be at least 1"));
    }
    let mut state = JacobiState::new(system, initial)?;
    let mut records = Vec::new();
    let mut field = vec![T::zero(); grid.len()];
    loop {
        let t = state.t;
        if t % record_every == 0 || t == sweeps {
            field[0] = problem.left;
            field[grid.n] = problem.right;
            field[1..grid.n].copy_from_slice(&state.u);
            let (sup, d) = diag.measure(&field)?;
            records.push(SolverRecord {
                phase: Phase::Jacobi,
                step: t,
                cost_units: base_cost + cost.cost(0, t),
                sup_norm_err: sup,
                delta_f: d,
                wall_seconds: clock.1 + clock.0.elapsed().as_secs_f64(),
            });
            if stop_below.is_some_and(|s| sup < s) {
                break;
            }
        }
        if t == sweeps {
            break;
        }
        state.sweep();
    }
    Ok((records, state.u))
}

/// Pure Jacobi from a zero initial iterate.
pub fn jacobi_solve<T: Scalar>(
    problem: &PoissonProblem<T>,
    n: usize,
    peaks: &[T],
    sweeps: usize,
    record_every: usize,
) -> Result<SolverTrace> {
    let (grid, system) = assemble_system(problem, n)?;
    let diag = PeakDiagnostics::new(problem, &grid, peaks)?;
    let cost = CostModel {
        per_epoch: 0.0,
        per_sweep: 5.0 * n as f64,
    };
    let (records, _) = jacobi_run(
        problem,
        &grid,
        &system,
        &diag,
        vec![T::zero(); n - 1],
        sweeps,
        record_every,
        0.0,
        &cost,
        None,
        (Instant::now(), 0.0),
    )?;
    Ok(SolverTrace {
        peaks: peaks.iter().map(|k| k.as_f64()).collect(),
        records,
    })
}

/// Handoff epoch `M`; `Never` is pure DNN training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Handoff {
    Epoch(usize),
    Never,
}

impl std::fmt::Display for Handoff {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Handoff::Epoch(m) => write!(f, "{m}"),
            Handoff::Never => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Handoff {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "never" => Ok(Handoff::Never),
            other => other
                .parse()
                .map(Handoff::Epoch)
                .map_err(|_| Error::invalid(format!("bad handoff epoch '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridConfig {
    pub net: SolverNetConfig,
    pub handoffs: Vec<Handoff>,
    /// Training budget for the pure-DNN run.
    pub max_epochs: usize,
    /// Jacobi budget after each handoff.
    pub max_sweeps: usize,
    /// Sup-norm target used for the cost comparison.
    pub target_error: f64,
    pub record_every_epochs: usize,
    pub record_every_sweeps: usize,
    /// End each Jacobi phase as soon as the target error is met.
    pub stop_at_target: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridRun {
    pub handoff: Handoff,
    pub trace: SolverTrace,
    /// Cost units spent when the sup-norm error first fell below the target.
    pub cost_to_target: Option<f64>,
    /// Records in the Jacobi phase where the lowest peak's `Delta_F` exceeded
    /// its handoff value plus the mode-contraction bound.
    pub bound_violations: usize,
}

/// Trains once and hands off to Jacobi at every requested epoch.
///
/// `Handoff::Epoch(0)` skips the network: Jacobi starts from zero, bit for bit
/// the same as [`jacobi_solve`]. Otherwise Jacobi starts from the network's
/// interior node values with exact boundary values.
pub fn hybrid_sweep<T: Scalar>(
    problem: &PoissonProblem<T>,
    n: usize,
    peaks: &[T],
    config: &HybridConfig,
) -> Result<(CostModel, Vec<HybridRun>)> {
    if config.handoffs.is_empty() {
        return Err(Error::Empty("handoff list"));
    }
    if config.record_every_epochs == 0 || config.record_every_sweeps == 0 {
        return Err(Error::invalid("record strides must be at least 1"));
    }
    let (grid, system) = assemble_system(problem, n)?;
    let diag = PeakDiagnostics::new(problem, &grid, peaks)?;
    let objective = VariationalObjective::new(problem, &grid, config.beta())?;
    let mut net = config.net.init_network::<T>()?;
    let cost = CostModel::new(&net, &grid);
    let fixed_point = system.solve()?;
    let spectrum = jacobi_spectrum::<T>(n)?;
    let xs: Vec<T> = grid.nodes().collect();

    let finite: Vec<usize> = config
        .handoffs
        .iter()
        .filter_map(|h| match h {
            Handoff::Epoch(m) => Some(*m),
            Handoff::Never => None,
        })
        .collect();
    let want_dnn_only = config.handoffs.contains(&Handoff::Never);
    let last_handoff = finite.iter().copied().max().unwrap_or(0);
    let epochs = if want_dnn_only { config.max_epochs.max(last_handoff) } else { last_handoff };

    // One training run; every epoch is measured so the pure-DNN cost is exact.
    let start = Instant::now();
    let mut dnn_records: Vec<SolverRecord> = Vec::new();
    let mut snapshots: BTreeMap<usize, (Vec<T>, f64)> = BTreeMap::new();
    let mut dnn_hit: Option<usize> = None;
    if epochs > 0 {
        let nodes = objective.nodes().clone();
        let mut probe = |epoch: usize, _: &Network<T>, snapshot: Option<&Matrix<T>>| -> Result<Control> {
            let h = snapshot.expect("probe inputs supplied").as_slice();
            let (sup, d) = diag.measure(h)?;
            let wall = start.elapsed().as_secs_f64();
            if epoch % config.record_every_epochs == 0 || finite.contains(&epoch) || epoch == epochs {
                dnn_records.push(SolverRecord {
                    phase: Phase::Dnn,
                    step: epoch,
                    cost_units: cost.cost(epoch, 0),
                    sup_norm_err: sup,
                    delta_f: d,
                    wall_seconds: wall,
                });
            }
            if finite.contains(&epoch) {
                snapshots.insert(epoch, (h[1..grid.n].to_vec(), wall));
            }
            if dnn_hit.is_none() && sup < config.target_error {
                dnn_hit = Some(epoch);
            }
            let done_dnn = !want_dnn_only || dnn_hit.is_some();
            Ok(if done_dnn && epoch >= last_handoff { Control::Stop } else { Control::Continue })
        };
        train(
            &mut net,
            &objective,
            &config.net.train_config(epochs, 1),
            Some(&nodes),
            &mut [&mut probe],
        )?;
    }

    let mut runs = Vec::with_capacity(config.handoffs.len());
    for &handoff in &config.handoffs {
        match handoff {
            Handoff::Never => {
                let records: Vec<SolverRecord> = dnn_records
                    .iter()
                    .filter(|r| dnn_hit.is_none_or(|hit| r.step <= hit))
                    .cloned()
                    .collect();
                runs.push(HybridRun {
                    handoff,
                    trace: SolverTrace {
                        peaks: peaks.iter().map(|k| k.as_f64()).collect(),
                        records,
                    },
                    cost_to_target: dnn_hit.map(|e| cost.cost(e, 0)),
                    bound_violations: 0,
                });
            }
            Handoff::Epoch(m) => {
                let (initial, wall) = if m == 0 {
                    (vec![T::zero(); n - 1], 0.0)
                } else {
                    snapshots
                        .get(&m)
                        .cloned()
                        .ok_or_else(|| Error::invalid(format!("no snapshot at handoff epoch {m}")))?
                };
                let mut records: Vec<SolverRecord> =
                    dnn_records.iter().filter(|r| m > 0 && r.step <= m).cloned().collect();
                let (jac, _) = jacobi_run(
                    problem,
                    &grid,
                    &system,
                    &diag,
                    initial.clone(),
                    config.max_sweeps,
                    config.record_every_sweeps,
                    cost.cost(m, 0),
                    &cost,
                    config.stop_at_target.then_some(config.target_error),
                    (Instant::now(), wall),
                )?;
                let bound = ContractionBound::new(&spectrum, &initial, &fixed_point, &xs, peaks[0], diag.target()[0])?;
                let start_df = jac[0].delta_f[0];
                let bound_violations = match start_df {
                    Some(d0) => jac
                        .iter()
                        .filter(|r| {
                            r.delta_f[0].is_some_and(|d| d > d0 + bound.bound(r.step).as_f64() + 1e-12)
                        })
                        .count(),
                    None => 0,
                };
                let cost_to_target = jac
                    .iter()
                    .find(|r| r.sup_norm_err < config.target_error)
                    .map(|r| r.cost_units);
                records.extend(jac);
                runs.push(HybridRun {
                    handoff,
                    trace: SolverTrace {
                        peaks: peaks.iter().map(|k| k.as_f64()).collect(),
                        records,
                    },
                    cost_to_target,
                    bound_violations,
                });
            }
        }
    }
    Ok((cost, runs))
}

impl HybridConfig {
    fn beta(&self) -> f64 {
        self.net.beta
    }
}

/// Grid field of a trained network on the problem's grid.
pub fn network_field<T: Scalar>(net: &Network<T>, grid: &Grid<T>) -> Result<GridField<T>> {
    let xs: Vec<T> = grid.nodes().collect();
    GridField::new(*grid, net.forward_scalar(&xs)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> HybridConfig {
        HybridConfig {
            net: SolverNetConfig {
                widths: vec![1, 8, 1],
                activation: Activation::Tanh,
                init_std: 0.1,
                learning_rate: 1e-2,
                beta: 10.0,
                seed: 0,
            },
            handoffs: vec![Handoff::Epoch(0), Handoff::Epoch(5), Handoff::Never],
            max_epochs: 10,
            max_sweeps: 300,
            target_error: 1e-9,
            record_every_epochs: 2,
            record_every_sweeps: 10,
            stop_at_target: false,
        }
    }

    #[test]
    fn zero_handoff_equals_plain_jacobi() {
        let p = PoissonProblem::<f64>::paper();
        let peaks = [0.5, 4.0];
        let cfg = small_config();
        let (_, runs) = hybrid_sweep(&p, 100, &peaks, &cfg).unwrap();
        let plain = jacobi_solve(&p, 100, &peaks, 300, 10).unwrap();
        assert_eq!(runs[0].trace.to_csv(), plain.to_csv());
        assert_eq!(runs[0].bound_violations, 0);
        assert_eq!(runs[1].bound_violations, 0);
        assert_eq!(runs[2].trace.records.last().unwrap().step, 10);
        assert!(runs[1].trace.records.iter().any(|r| r.phase == Phase::Dnn && r.step == 5));
    }

    #[test]
    fn dnn_solve_is_deterministic() {
        let p = PoissonProblem::<f64>::paper();
        let g = p.grid(50).unwrap();
        let cfg = small_config().net;
        let (_, a) = dnn_solve(&p, &g, &[0.5], &cfg, 20, 5, &mut |_| Control::Continue).unwrap();
        let (_, b) = dnn_solve(&p, &g, &[0.5], &cfg, 20, 5, &mut |_| Control::Continue).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.records.len(), 5);
    }

    #[test]
    fn csv_header() {
        let p = PoissonProblem::<f64>::paper();
        let t = jacobi_solve(&p, 20, &[0.5, 1.5], 4, 2).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("phase,step,cost_units,sup_norm_err,dF_k0.5,dF_k1.5\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
