use log::{debug, warn};
use rayon::prelude::*;

use super::inner::{inner_minimize, InnerState};
use super::problem::{eval_f, update_qa, update_qty, RdcProblem};
use super::{check_multipliers, RdcCurve, RdcPoint, SolverParams};
use crate::error::{Error, Result};
use crate::prob::{ConditionalPmf, JointPmf, Pmf};
use crate::scenario::ScenarioInstance;

/// Full record of one run: `f_values` holds `F` initially and after every
/// block (inner minimization, `Q_A` update, `Q_{T,Y}` update).
#[derive(Clone, Debug)]
pub struct SolveTrace {
    pub point: RdcPoint,
    pub f_values: Vec<f64>,
    pub ptx: ConditionalPmf,
    pub qa: Pmf,
    pub qty: JointPmf,
}

impl RdcProblem {
    /// Alternating minimization at slopes `(s, m)`.
    pub fn solve(&self, s: f64, m: f64, params: &SolverParams) -> Result<RdcPoint> {
        self.run(s, m, params, false).map(|t| t.point)
    }

    pub fn solve_traced(&self, s: f64, m: f64, params: &SolverParams) -> Result<SolveTrace> {
        self.run(s, m, params, true)
    }

    fn run(&self, s: f64, m: f64, params: &SolverParams, keep_trace: bool) -> Result<SolveTrace> {
        check_multipliers(s, m)?;
        params.validate()?;
        let mut ptx = self.uniform_ptx();
        let mut qa = update_qa(self, &ptx)?;
        let mut qty = update_qty(self, &ptx)?;
        let mut f = eval_f(self, &ptx, &qty, &qa, s, m)?;
        let mut trace = vec![f];
        let mut state = InnerState::initial(self);
        let mut inner_ok = true;
        let mut converged = false;
        let mut iterations = 0;
        for it in 1..=params.max_outer {
            iterations = it;
            if !params.warm_start {
                state = InnerState::initial(self);
            }
            match inner_minimize(self, &qa, &qty, s, m, params, &mut state) {
                Ok(out) => ptx = out.ptx,
                Err(Error::MaxIterations { best: Some(best), iterations, .. }) => {
                    debug!("dual loop stopped after {iterations} rounds at s={s}, m={m}");
                    inner_ok = false;
                    ptx = *best;
                }
                Err(e) => return Err(e),
            }
            if keep_trace {
                trace.push(eval_f(self, &ptx, &qty, &qa, s, m)?);
            }
            qa = update_qa(self, &ptx)?;
            if keep_trace {
                trace.push(eval_f(self, &ptx, &qty, &qa, s, m)?);
            }
            qty = update_qty(self, &ptx)?;
            let f_new = eval_f(self, &ptx, &qty, &qa, s, m)?;
            if keep_trace {
                trace.push(f_new);
            }
            let delta = (f - f_new).abs();
            f = f_new;
            if delta < params.outer_tol {
                converged = true;
                break;
            }
        }
        if !converged {
            warn!("outer loop did not converge within {} iterations at s={s}, m={m}", params.max_outer);
        }
        let distortion = self.distortion_of(&ptx);
        let cost = self.cost_of(&ptx);
        let point = RdcPoint {
            s,
            m,
            rate: (f + s * distortion + m * cost).max(0.0),
            distortion,
            cost,
            converged: converged && inner_ok,
            iterations,
        };
        Ok(SolveTrace {
            point,
            f_values: trace,
            ptx,
            qa,
            qty,
        })
    }
}

/// Solves one `(s, m)` point from scratch.
pub fn solve_point(scenario: &ScenarioInstance, s: f64, m: f64, params: &SolverParams) -> Result<RdcPoint> {
    RdcProblem::new(scenario, params.pruning, params.strategy_cap)?.solve(s, m, params)
}

pub fn solve_point_traced(
    scenario: &ScenarioInstance,
    s: f64,
    m: f64,
    params: &SolverParams,
) -> Result<SolveTrace> {
    RdcProblem::new(scenario, params.pruning, params.strategy_cap)?.solve_traced(s, m, params)
}

/// Independent solves over the product grid, ordered `s`-major.
pub fn sweep(scenario: &ScenarioInstance, s_grid: &[f64], m_grid: &[f64], params: &SolverParams) -> Result<RdcCurve> {
    if s_grid.is_empty() || m_grid.is_empty() {
        return Err(Error::InvalidParams("empty multiplier grid".into()));
    }
    let problem = RdcProblem::new(scenario, params.pruning, params.strategy_cap)?;
    let cells: Vec<(f64, f64)> = s_grid
        .iter()
        .flat_map(|&s| m_grid.iter().map(move |&m| (s, m)))
        .collect();
    let points = cells
        .par_iter()
        .map(|&(s, m)| problem.solve(s, m, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(RdcCurve {
        points,
        scenario_hash: scenario.hash(),
    })
}

/// Lower envelope of the supporting planes at `(d, c)`, clamped at zero.
///
/// Unconverged points are skipped: their planes can sit above the surface.
pub fn evaluate_rdc(curve: &RdcCurve, d: f64, c: f64) -> f64 {
    best_plane(&curve.points, d, c)
}

/// `n` negative multipliers `-lo, …, -hi`, geometrically spaced.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![-lo],
        _ => (0..n)
            .map(|k| -lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
            .collect(),
    }
}

const S_MIN: f64 = 1e-4;
const S_MAX: f64 = 500.0;
const M_MIN: f64 = 1e-4;
const M_MAX: f64 = 500.0;
/// Bracket width in `ln|slope|` at which a root search stops. Plane values
/// are stationary in the slopes, so a coarse bracket costs little accuracy.
const LOG_BRACKET: f64 = 2e-3;
const MAX_ROOT_STEPS: usize = 60;

/// Illinois false-position search for a sign change of `residual` on
/// `[lo, hi]` given `r(lo) > 0 > r(hi)`. Returns the values attached to the
/// final bracket ends.
fn illinois<T: Clone>(
    (mut lo, mut r_lo, mut v_lo): (f64, f64, T),
    (mut hi, mut r_hi, mut v_hi): (f64, f64, T),
    mut eval: impl FnMut(f64) -> Result<(f64, T)>,
) -> Result<(T, T)> {
    let mut side = 0i8;
    for _ in 0..MAX_ROOT_STEPS {
        if hi - lo <= LOG_BRACKET {
            break;
        }
        let mut x = (lo * r_hi - hi * r_lo) / (r_hi - r_lo);
        // keep the probe away from the ends so the bracket always shrinks
        let guard = 0.05 * (hi - lo);
        x = x.clamp(lo + guard, hi - guard);
        let (r, value) = eval(x)?;
        if r == 0.0 {
            return Ok((value.clone(), value));
        }
        if r > 0.0 {
            (lo, r_lo, v_lo) = (x, r, value);
            if side == 1 {
                r_hi *= 0.5;
            }
            side = 1;
        } else {
            (hi, r_hi, v_hi) = (x, r, value);
            if side == -1 {
                r_lo *= 0.5;
            }
            side = -1;
        }
    }
    Ok((v_lo, v_hi))
}

/// Outcome of a distortion search at fixed `m`.
#[derive(Clone, Copy, Debug)]
struct SliceHit {
    /// Bracket end closest to the target distortion.
    point: RdcPoint,
    /// Cost interpolated across the final bracket at the target distortion.
    /// When `D_{s,m}` jumps, the optimum at `d` mixes the two bracket ends
    /// and this is the matching cost.
    cost: f64,
}

impl SliceHit {
    fn single(point: RdcPoint) -> Self {
        Self { point, cost: point.cost }
    }

    fn between(a: RdcPoint, b: RdcPoint, target: f64) -> Self {
        let span = a.distortion - b.distortion;
        let w = if span.abs() > 0.0 {
            ((a.distortion - target) / span).clamp(0.0, 1.0)
        } else {
            0.5
        };
        let point = if w < 0.5 { a } else { b };
        Self {
            point,
            cost: a.cost + w * (b.cost - a.cost),
        }
    }
}

/// Searches `ln|s|` at fixed `m` for `D_{s,m} = target`.
fn bisect_s(
    problem: &RdcProblem,
    target: f64,
    m: f64,
    params: &SolverParams,
    visited: &mut Vec<RdcPoint>,
) -> Result<SliceHit> {
    let flat = problem.solve(-S_MIN, m, params)?;
    visited.push(flat);
    if flat.distortion <= target {
        return Ok(SliceHit::single(flat));
    }
    let steep = problem.solve(-S_MAX, m, params)?;
    visited.push(steep);
    if steep.distortion >= target {
        return Ok(SliceHit::single(steep));
    }
    let (a, b) = illinois(
        (S_MIN.ln(), flat.distortion - target, flat),
        (S_MAX.ln(), steep.distortion - target, steep),
        |x| {
            let p = problem.solve(-x.exp(), m, params)?;
            visited.push(p);
            Ok((p.distortion - target, p))
        },
    )?;
    Ok(SliceHit::between(a, b, target))
}

/// Largest supporting-plane value at `(d, c)` among converged points.
fn best_plane(points: &[RdcPoint], d: f64, c: f64) -> f64 {
    points
        .iter()
        .filter(|p| p.converged)
        .map(|p| p.plane(d, c))
        .fold(0.0, f64::max)
}

/// Rate at distortion `target` along the slice of fixed cost slope `m`.
/// Returns the tightest plane value and every point solved on the way.
pub fn solve_for_distortion(
    problem: &RdcProblem,
    target: f64,
    m: f64,
    params: &SolverParams,
) -> Result<(f64, Vec<RdcPoint>)> {
    let mut visited = Vec::new();
    bisect_s(problem, target, m, params, &mut visited)?;
    let best = visited
        .iter()
        .filter(|p| p.converged)
        .map(|p| p.rate + p.s * (target - p.distortion))
        .fold(0.0, f64::max);
    Ok((best, visited))
}

#[derive(Clone, Debug)]
pub struct TargetSolution {
    /// Envelope of all planes visited, evaluated at the target.
    pub rate: f64,
    /// The last point solved, whose `(D, C)` approximates the target.
    pub point: RdcPoint,
    pub visited: Vec<RdcPoint>,
}

/// `R(d, c)` by maximizing the dual function
/// `g(s,m) = min F + s·d + m·c`, which is concave in `(s, m)` with gradient
/// `(d − D_{s,m}, c − C_{s,m})`: nested false-position searches in
/// `ln|m|` around `ln|s|`.
pub fn solve_for_target(problem: &RdcProblem, d: f64, c: f64, params: &SolverParams) -> Result<TargetSolution> {
    if !(d >= 0.0) || !(c >= 0.0) {
        return Err(Error::InfeasibleTarget(format!("(D, C) = ({d}, {c}) must be nonnegative")));
    }
    let mut visited = Vec::new();
    let free = bisect_s(problem, d, 0.0, params, &mut visited)?;
    let mut point = free.point;
    if free.cost > c {
        let loose = bisect_s(problem, d, -M_MIN, params, &mut visited)?;
        let tight = bisect_s(problem, d, -M_MAX, params, &mut visited)?;
        point = tight.point;
        if loose.cost > c && tight.cost < c {
            let (a, b) = illinois(
                (M_MIN.ln(), loose.cost - c, loose),
                (M_MAX.ln(), tight.cost - c, tight),
                |x| {
                    let hit = bisect_s(problem, d, -x.exp(), params, &mut visited)?;
                    Ok((hit.cost - c, hit))
                },
            )?;
            point = if (a.cost - c).abs() < (b.cost - c).abs() { a.point } else { b.point };
        }
    }
    Ok(TargetSolution {
        rate: best_plane(&visited, d, c),
        point,
        visited,
    })
}
