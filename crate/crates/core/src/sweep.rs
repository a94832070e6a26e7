//! Parameter maps, persistence metrics, and derivative-free optimization.
//!
//! Map cells are computed independently and assembled in a declared
//! (row-major) order, so results are bit-identical across runs and thread
//! counts. Geometry parameters trigger one Hamiltonian rebuild per distinct
//! value; the probe detuning reuses the cached eigendecomposition.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::scattering::{correlation_constants, g2_trace, CorrelationTrace};
use crate::scenarios::{ParamKind, Scenario, DETUNING_PARAM};
use crate::spectral::{eigendecompose, SpectralData};
use crate::tolerances::{DEBOUNCE_FRACTION, DEBOUNCE_LIFETIMES, PERSISTENCE_MAX_STEP};
use crate::C64;

/// How to schedule independent cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[cfg_attr(feature = "parallel", default)]
    Rayon,
}

/// Order-preserving indexed map over `0..n`.
fn run_indexed<T, F>(n: usize, parallelism: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match parallelism {
        Parallelism::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Parallelism::Rayon => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
    }
}

/// Scenario with its spectral decomposition cached; the per-point evaluator
/// behind maps, traces and the optimizer.
#[derive(Debug, Clone)]
pub struct Evaluator {
    scenario: Scenario,
    spectral: SpectralData,
    g_in: DVector<C64>,
    g_out: DVector<C64>,
}

impl Evaluator {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        let system = scenario.build()?;
        let spectral = eigendecompose(&system.heff)?;
        Ok(Self {
            scenario: scenario.clone(),
            spectral,
            g_in: system.g_in,
            g_out: system.g_out,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn spectral(&self) -> &SpectralData {
        &self.spectral
    }

    pub fn couplings(&self) -> (&DVector<C64>, &DVector<C64>) {
        (&self.g_in, &self.g_out)
    }

    pub fn constants(&self, detuning: f64) -> Result<Vec<C64>> {
        correlation_constants(&self.spectral, &self.g_in, &self.g_out, detuning)
    }

    /// g²(0) = |1 − Σ_ν C⁽ᵛ⁾|².
    pub fn g2_zero(&self, detuning: f64) -> Result<f64> {
        let c = self.constants(detuning)?;
        let sum: C64 = c.iter().sum();
        Ok((C64::new(1.0, 0.0) - sum).norm_sqr())
    }

    pub fn trace(&self, detuning: f64, tau_grid: &[f64]) -> Result<CorrelationTrace> {
        let c = self.constants(detuning)?;
        g2_trace(
            &c,
            &self.spectral,
            detuning,
            tau_grid,
            self.scenario.name.clone(),
        )
    }
}

/// One named parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub param: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(param: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            param: param.into(),
            values,
        }
    }

    /// Uniform grid `min, min+step, …` up to and including `max` (within a
    /// half-step fuzz of the lattice).
    pub fn linspace_step(param: impl Into<String>, min: f64, max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || max < min {
            return Err(Error::InvalidInput(format!(
                "bad axis range [{min}, {max}] step {step}"
            )));
        }
        let n = ((max - min) / step + 1e-9).floor() as usize + 1;
        Ok(Self {
            param: param.into(),
            values: (0..n).map(|i| min + i as f64 * step).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Quality flag of one map cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellFlag {
    Ok,
    /// Linear amplitude too small to normalize; value recorded as the
    /// neutral 1.0 and excluded from argmin queries.
    LinearAmplitudeZero,
    /// Any other numerical failure (near-defective geometry, singular
    /// kernel); value recorded as the neutral 1.0.
    Numerical,
}

impl CellFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellFlag::Ok => "ok",
            CellFlag::LinearAmplitudeZero => "linear_amplitude_zero",
            CellFlag::Numerical => "numerical",
        }
    }
}

/// Dense two-axis map; `values[i1 * axis2.len() + i2]`, row-major in axis1.
///
/// Carries its own provenance: the scenario, both grids, and the crate
/// version that produced it.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub scenario: Scenario,
    pub axis1: Axis,
    pub axis2: Axis,
    pub values: Vec<f64>,
    pub flags: Vec<CellFlag>,
    pub version: &'static str,
}

/// Crate version stamped into sweep provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

impl SweepResult {
    pub fn at(&self, i1: usize, i2: usize) -> (f64, CellFlag) {
        let k = i1 * self.axis2.len() + i2;
        (self.values[k], self.flags[k])
    }

    /// Minimum over unflagged cells.
    pub fn argmin(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for i1 in 0..self.axis1.len() {
            for i2 in 0..self.axis2.len() {
                let (v, flag) = self.at(i1, i2);
                if flag != CellFlag::Ok {
                    continue;
                }
                if best.map_or(true, |(_, _, b)| v < b) {
                    best = Some((i1, i2, v));
                }
            }
        }
        best
    }

    pub fn flagged_cells(&self) -> Vec<(usize, usize, CellFlag)> {
        let mut out = Vec::new();
        for i1 in 0..self.axis1.len() {
            for i2 in 0..self.axis2.len() {
                let (_, flag) = self.at(i1, i2);
                if flag != CellFlag::Ok {
                    out.push((i1, i2, flag));
                }
            }
        }
        out
    }
}

fn classify(err: &Error) -> CellFlag {
    match err {
        Error::LinearAmplitudeZero { .. } => CellFlag::LinearAmplitudeZero,
        _ => CellFlag::Numerical,
    }
}

fn validate_axis(scenario: &Scenario, axis: &Axis) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::InvalidInput(format!(
            "axis '{}' is empty",
            axis.param
        )));
    }
    let spec = scenario.param_spec(&axis.param)?;
    for &v in &axis.values {
        if !(spec.min..=spec.max).contains(&v) {
            return Err(Error::InvalidInput(format!(
                "{} = {v} outside schema bounds [{}, {}]",
                axis.param, spec.min, spec.max
            )));
        }
    }
    Ok(())
}

/// Dense map of g²(0) over two scenario parameters.
///
/// Cells that cannot be normalized are recorded with a quality flag rather
/// than aborting the run.
pub fn map_g2_zero(
    scenario: &Scenario,
    axis1: &Axis,
    axis2: &Axis,
    parallelism: Parallelism,
) -> Result<SweepResult> {
    validate_axis(scenario, axis1)?;
    validate_axis(scenario, axis2)?;
    if axis1.param == axis2.param {
        return Err(Error::InvalidInput(
            "map axes must use distinct parameters".into(),
        ));
    }
    let kind1 = scenario.param_spec(&axis1.param)?.kind;
    let kind2 = scenario.param_spec(&axis2.param)?.kind;
    let (n1, n2) = (axis1.len(), axis2.len());

    let cell = |evaluator: &Result<Evaluator>, detuning: f64| -> (f64, CellFlag) {
        match evaluator {
            Ok(ev) => match ev.g2_zero(detuning) {
                Ok(v) => (v, CellFlag::Ok),
                Err(e) => (1.0, classify(&e)),
            },
            Err(e) => (1.0, classify(e)),
        }
    };

    let cells: Vec<(f64, CellFlag)> = match (kind1, kind2) {
        (ParamKind::Geometry, ParamKind::Frequency) => {
            // one eigendecomposition per row
            run_indexed(n1, parallelism, |i1| {
                let ev = scenario
                    .with_param(&axis1.param, axis1.values[i1])
                    .and_then(|s| Evaluator::new(&s));
                axis2
                    .values
                    .iter()
                    .map(|&d| cell(&ev, d))
                    .collect::<Vec<_>>()
            })
            .into_iter()
            .flatten()
            .collect()
        }
        (ParamKind::Frequency, ParamKind::Geometry) => {
            // one eigendecomposition per column, then transpose
            let cols: Vec<Vec<(f64, CellFlag)>> = run_indexed(n2, parallelism, |i2| {
                let ev = scenario
                    .with_param(&axis2.param, axis2.values[i2])
                    .and_then(|s| Evaluator::new(&s));
                axis1.values.iter().map(|&d| cell(&ev, d)).collect()
            });
            let mut out = Vec::with_capacity(n1 * n2);
            for i1 in 0..n1 {
                for col in cols.iter() {
                    out.push(col[i1]);
                }
            }
            out
        }
        (ParamKind::Geometry, ParamKind::Geometry) => run_indexed(n1 * n2, parallelism, |k| {
            let (i1, i2) = (k / n2, k % n2);
            let ev = scenario
                .with_param(&axis1.param, axis1.values[i1])
                .and_then(|s| s.with_param(&axis2.param, axis2.values[i2]))
                .and_then(|s| Evaluator::new(&s));
            // probe at the schema default detuning 0 when no frequency axis
            cell(&ev, 0.0)
        }),
        (ParamKind::Frequency, ParamKind::Frequency) => {
            return Err(Error::InvalidInput(
                "both axes refer to the probe detuning".into(),
            ))
        }
    };

    let (values, flags) = cells.into_iter().unzip();
    Ok(SweepResult {
        scenario: scenario.clone(),
        axis1: axis1.clone(),
        axis2: axis2.clone(),
        values,
        flags,
        version: VERSION,
    })
}

/// Dense map of g²(τ) over detuning × delay.
pub fn map_g2_tau(
    scenario: &Scenario,
    detuning_axis: &Axis,
    tau_axis: &Axis,
    parallelism: Parallelism,
) -> Result<SweepResult> {
    validate_axis(scenario, detuning_axis)?;
    if scenario.param_spec(&detuning_axis.param)?.kind != ParamKind::Frequency {
        return Err(Error::InvalidInput(
            "first axis of a delay map must be the probe detuning".into(),
        ));
    }
    if tau_axis.is_empty() || tau_axis.values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "tau axis must be ascending and non-empty".into(),
        ));
    }
    if tau_axis.values[0] < 0.0 {
        return Err(Error::InvalidInput("delays must be non-negative".into()));
    }
    let evaluator = Evaluator::new(scenario)?;
    let n2 = tau_axis.len();
    let rows: Vec<Vec<(f64, CellFlag)>> = run_indexed(detuning_axis.len(), parallelism, |i1| {
        match evaluator.trace(detuning_axis.values[i1], &tau_axis.values) {
            Ok(trace) => trace
                .g2_values()
                .iter()
                .map(|&v| (v, CellFlag::Ok))
                .collect(),
            Err(e) => vec![(1.0, classify(&e)); n2],
        }
    });
    let (values, flags) = rows.into_iter().flatten().unzip();
    Ok(SweepResult {
        scenario: scenario.clone(),
        axis1: detuning_axis.clone(),
        axis2: tau_axis.clone(),
        values,
        flags,
        version: VERSION,
    })
}

/// Persistence metrics of one correlation trace.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceMetric {
    /// g²(0).
    pub g2_zero: f64,
    /// First debounced threshold crossing, `Some(0)` when g²(0) is already at
    /// or above the threshold, `None` when the trace never crosses within its
    /// grid (antibunching outlives the trace).
    pub tau_half: Option<f64>,
    /// Max g² over the declared window.
    pub window_max: f64,
    /// The window over which `window_max` was taken.
    pub window: (f64, f64),
}

/// Locate the debounced threshold crossing and the window maximum.
///
/// The crossing is interpolated linearly between grid points and must stay
/// above `DEBOUNCE_FRACTION × threshold` for one unit-rate lifetime;
/// oscillatory traces cross a bare threshold many times.
pub fn persistence(
    trace: &CorrelationTrace,
    threshold: f64,
    window: (f64, f64),
) -> Result<PersistenceMetric> {
    if !(0.0 < threshold && threshold < 1.0) {
        return Err(Error::InvalidInput(format!(
            "threshold {threshold} must lie in (0, 1)"
        )));
    }
    if window.1 <= window.0 || window.0 < 0.0 {
        return Err(Error::InvalidInput(format!("bad window {window:?}")));
    }
    let step = trace.max_step();
    if step > PERSISTENCE_MAX_STEP * (1.0 + 1e-9) {
        return Err(Error::GridTooCoarse {
            step,
            max: PERSISTENCE_MAX_STEP,
        });
    }

    let taus = trace.tau_grid();
    let vals = trace.g2_values();
    let g2_zero = trace.g2_at(0.0);

    let tau_half = if g2_zero >= threshold {
        Some(0.0)
    } else {
        let debounce_level = DEBOUNCE_FRACTION * threshold;
        let mut found = None;
        'crossings: for k in 1..vals.len() {
            if vals[k - 1] < threshold && vals[k] >= threshold {
                let frac = (threshold - vals[k - 1]) / (vals[k] - vals[k - 1]);
                let t_star = taus[k - 1] + frac * (taus[k] - taus[k - 1]);
                for (t, v) in taus.iter().zip(vals.iter()) {
                    if *t >= t_star && *t <= t_star + DEBOUNCE_LIFETIMES && *v < debounce_level {
                        continue 'crossings;
                    }
                }
                found = Some(t_star);
                break;
            }
        }
        found
    };

    let window_max = taus
        .iter()
        .zip(vals.iter())
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    if !window_max.is_finite() {
        return Err(Error::InvalidInput(
            "persistence window contains no grid points".into(),
        ));
    }

    Ok(PersistenceMetric {
        g2_zero,
        tau_half,
        window_max,
        window,
    })
}

/// Optimization objective.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// Minimize g²(0).
    MinimizeG2Zero,
    /// Maximize τ½(0.5) among points with g²(0) below the cap.
    MaximizeTauHalf { g2_zero_cap: f64 },
    /// Maximize the initial window during which g² stays below the cap.
    MaximizeWindow { cap: f64 },
}

/// τ-grid used by trace-based objectives.
const OBJECTIVE_TAU_MAX: f64 = 60.0;
const OBJECTIVE_TAU_STEP: f64 = 0.02;

/// One audited evaluation.
#[derive(Debug, Clone)]
pub struct AuditRow {
    pub index: usize,
    pub params: Vec<(String, f64)>,
    /// Raw metric in the objective's natural orientation.
    pub metric: f64,
    pub feasible: bool,
    pub stage: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizeStatus {
    Converged,
    BudgetExhausted,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub status: OptimizeStatus,
    /// Best feasible point, absent when infeasible.
    pub best_params: Option<Vec<(String, f64)>>,
    pub best_metric: Option<f64>,
    pub audit: Vec<AuditRow>,
}

struct ObjectiveEval<'a> {
    scenario: &'a Scenario,
    names: Vec<String>,
    objective: &'a Objective,
}

impl ObjectiveEval<'_> {
    /// Internal orientation: smaller is better. Returns (internal, raw, feasible).
    fn eval(&self, x: &[f64]) -> (f64, f64, bool) {
        let mut detuning = 0.0;
        let mut scenario = self.scenario.clone();
        for (name, &v) in self.names.iter().zip(x) {
            if name == DETUNING_PARAM {
                detuning = v;
            } else {
                match scenario.with_param(name, v) {
                    Ok(s) => scenario = s,
                    Err(_) => return (f64::INFINITY, f64::NAN, false),
                }
            }
        }
        let Ok(ev) = Evaluator::new(&scenario) else {
            return (f64::INFINITY, f64::NAN, false);
        };
        match self.objective {
            Objective::MinimizeG2Zero => match ev.g2_zero(detuning) {
                Ok(v) => (v, v, true),
                Err(_) => (f64::INFINITY, f64::NAN, false),
            },
            Objective::MaximizeTauHalf { g2_zero_cap } => {
                let (metric, feasible) = self.tau_metric(&ev, detuning, *g2_zero_cap);
                (
                    if feasible { -metric } else { f64::INFINITY },
                    metric,
                    feasible,
                )
            }
            Objective::MaximizeWindow { cap } => {
                let Ok(trace) = ev.trace(detuning, &objective_tau_grid()) else {
                    return (f64::INFINITY, f64::NAN, false);
                };
                let first = trace
                    .tau_grid()
                    .iter()
                    .zip(trace.g2_values())
                    .find(|(_, &v)| v >= *cap)
                    .map(|(&t, _)| t)
                    .unwrap_or(OBJECTIVE_TAU_MAX);
                (-first, first, true)
            }
        }
    }

    fn tau_metric(&self, ev: &Evaluator, detuning: f64, cap: f64) -> (f64, bool) {
        let Ok(trace) = ev.trace(detuning, &objective_tau_grid()) else {
            return (f64::NAN, false);
        };
        let Ok(metric) = persistence(&trace, 0.5, (0.0, 5.0)) else {
            return (f64::NAN, false);
        };
        if metric.g2_zero >= cap {
            return (metric.tau_half.unwrap_or(0.0), false);
        }
        // a trace that never crosses outlives the grid
        (metric.tau_half.unwrap_or(OBJECTIVE_TAU_MAX), true)
    }
}

fn objective_tau_grid() -> Vec<f64> {
    let n = (OBJECTIVE_TAU_MAX / OBJECTIVE_TAU_STEP).round() as usize;
    (0..=n).map(|i| i as f64 * OBJECTIVE_TAU_STEP).collect()
}

/// Two-stage derivative-free search: a coarse grid scan over the bounds picks
/// the best feasible cell, then a bounded Nelder-Mead simplex refines it with
/// the remaining evaluation budget. Fully deterministic; the optimizer never
/// returns a point worse than the best coarse cell.
pub fn optimize(
    scenario: &Scenario,
    objective: &Objective,
    bounds: &[(String, f64, f64)],
    budget: usize,
) -> Result<OptimizeOutcome> {
    if bounds.is_empty() {
        return Err(Error::InvalidInput("no parameters to optimize".into()));
    }
    for (name, lo, hi) in bounds {
        let spec = scenario.param_spec(name)?;
        if lo >= hi || *lo < spec.min || *hi > spec.max {
            return Err(Error::InvalidInput(format!(
                "bounds [{lo}, {hi}] for '{name}' invalid or outside schema [{}, {}]",
                spec.min, spec.max
            )));
        }
    }
    if budget == 0 {
        return Err(Error::InvalidInput(
            "evaluation budget must be positive".into(),
        ));
    }
    let dims = bounds.len();
    // coarse stage consumes at most half the budget, degenerating gracefully
    // to a single center cell when the budget is tiny
    let per_dim =
        (((budget / 2).max(1) as f64).powf(1.0 / dims as f64).floor() as usize).clamp(1, 25);
    let coarse_total: usize = per_dim.pow(dims as u32);

    let eval = ObjectiveEval {
        scenario,
        names: bounds.iter().map(|(n, _, _)| n.clone()).collect(),
        objective,
    };

    let mut audit = Vec::new();
    let mut best: Option<(f64, Vec<f64>, f64)> = None; // (internal, x, raw)
    let mut evals = 0usize;

    // stage 1: coarse grid
    let point = |cell: usize| -> Vec<f64> {
        let mut x = Vec::with_capacity(dims);
        let mut rest = cell;
        for (_, lo, hi) in bounds {
            let idx = rest % per_dim;
            rest /= per_dim;
            let frac = if per_dim == 1 {
                0.5
            } else {
                idx as f64 / (per_dim - 1) as f64
            };
            x.push(lo + frac * (hi - lo));
        }
        x
    };
    for cellidx in 0..coarse_total {
        let x = point(cellidx);
        let (internal, raw, feasible) = eval.eval(&x);
        audit.push(AuditRow {
            index: evals,
            params: eval.names.iter().cloned().zip(x.iter().copied()).collect(),
            metric: raw,
            feasible,
            stage: "grid",
        });
        evals += 1;
        if feasible && best.as_ref().map_or(true, |(b, _, _)| internal < *b) {
            best = Some((internal, x, raw));
        }
    }

    let Some((mut best_internal, best_x, mut best_raw)) = best else {
        return Ok(OptimizeOutcome {
            status: OptimizeStatus::Infeasible,
            best_params: None,
            best_metric: None,
            audit,
        });
    };

    // stage 2: bounded Nelder-Mead from the best cell
    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(dims + 1);
    simplex.push((best_internal, best_x.clone()));
    let mut best_point = best_x.clone();
    for d in 0..dims {
        if evals >= budget {
            break;
        }
        let (_, lo, hi) = &bounds[d];
        let step = (hi - lo) / (2.0 * per_dim as f64);
        let mut x = best_x.clone();
        x[d] = (x[d] + step).clamp(*lo, *hi);
        if (x[d] - best_x[d]).abs() < 1e-15 {
            x[d] = (best_x[d] - step).clamp(*lo, *hi);
        }
        let (internal, raw, feasible) = eval.eval(&x);
        audit.push(AuditRow {
            index: evals,
            params: eval.names.iter().cloned().zip(x.iter().copied()).collect(),
            metric: raw,
            feasible,
            stage: "simplex",
        });
        evals += 1;
        if feasible && internal < best_internal {
            best_internal = internal;
            best_raw = raw;
            best_point = x.clone();
        }
        simplex.push((internal, x));
    }

    let clamp = |x: &mut Vec<f64>| {
        for (v, (_, lo, hi)) in x.iter_mut().zip(bounds) {
            *v = v.clamp(*lo, *hi);
        }
    };

    while evals < budget && simplex.len() == dims + 1 {
        simplex.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let centroid: Vec<f64> = (0..dims)
            .map(|d| simplex[..dims].iter().map(|(_, x)| x[d]).sum::<f64>() / dims as f64)
            .collect();
        let worst = simplex[dims].clone();

        let mut try_point = |x: Vec<f64>, evals: &mut usize, audit: &mut Vec<AuditRow>| {
            let (internal, raw, feasible) = eval.eval(&x);
            audit.push(AuditRow {
                index: *evals,
                params: eval.names.iter().cloned().zip(x.iter().copied()).collect(),
                metric: raw,
                feasible,
                stage: "simplex",
            });
            *evals += 1;
            if feasible && internal < best_internal {
                best_internal = internal;
                best_raw = raw;
                best_point = x.clone();
            }
            (internal, x)
        };

        // reflection
        let mut xr: Vec<f64> = centroid
            .iter()
            .zip(&worst.1)
            .map(|(c, w)| c + (c - w))
            .collect();
        clamp(&mut xr);
        let (fr, xr) = try_point(xr, &mut evals, &mut audit);
        if fr < simplex[0].0 && evals < budget {
            // expansion
            let mut xe: Vec<f64> = centroid
                .iter()
                .zip(&xr)
                .map(|(c, r)| c + 2.0 * (r - c))
                .collect();
            clamp(&mut xe);
            let (fe, xe) = try_point(xe, &mut evals, &mut audit);
            simplex[dims] = if fe < fr { (fe, xe) } else { (fr, xr) };
        } else if fr < simplex[dims - 1].0 {
            simplex[dims] = (fr, xr);
        } else if evals < budget {
            // contraction toward the centroid
            let mut xc: Vec<f64> = centroid
                .iter()
                .zip(&worst.1)
                .map(|(c, w)| c + 0.5 * (w - c))
                .collect();
            clamp(&mut xc);
            let (fc, xc) = try_point(xc, &mut evals, &mut audit);
            if fc < worst.0 {
                simplex[dims] = (fc, xc);
            } else {
                // shrink toward the best vertex
                let anchor = simplex[0].1.clone();
                for k in 1..=dims {
                    if evals >= budget {
                        break;
                    }
                    let mut xs: Vec<f64> = anchor
                        .iter()
                        .zip(&simplex[k].1)
                        .map(|(a, x)| a + 0.5 * (x - a))
                        .collect();
                    clamp(&mut xs);
                    let (fs, xs) = try_point(xs, &mut evals, &mut audit);
                    simplex[k] = (fs, xs);
                }
            }
        }

        // convergence: simplex collapsed
        let spread = simplex
            .iter()
            .map(|(f, _)| *f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), f| {
                (lo.min(f), hi.max(f))
            });
        if (spread.1 - spread.0).abs() < 1e-12 * (1.0 + spread.0.abs()) {
            break;
        }
    }

    let status = if evals >= budget {
        OptimizeStatus::BudgetExhausted
    } else {
        OptimizeStatus::Converged
    };
    Ok(OptimizeOutcome {
        status,
        best_params: Some(
            eval.names
                .iter()
                .cloned()
                .zip(best_point.iter().copied())
                .collect(),
        ),
        best_metric: Some(best_raw),
        audit,
    })
}
