//! Minimization of `F` over `P_{T|X}` for fixed auxiliaries: an outer dual
//! loop on `μ_x` around damped fixed-point iterations on `P_{A|X}`.

use log::debug;

use super::problem::{compute_alphas, Alphas, RdcProblem};
use super::{SolverParams, StepRule};
use crate::error::{Error, Result};
use crate::prob::{log2_sum_exp2, ConditionalPmf, JointPmf, Pmf, LOG_FLOOR};

const DIVERGENCE_LIMIT: f64 = 1e30;

#[inline]
fn log_floor() -> f64 {
    LOG_FLOOR.log2()
}

/// Dual variables and the log-domain `P_{A|X}` iterate (`[x * |A| + a]`).
#[derive(Clone, Debug, PartialEq)]
pub struct InnerState {
    pub q: Vec<f64>,
    pub mu: Vec<f64>,
}

impl InnerState {
    /// `P(a|x) = 1/|T|`, `μ_x = 1`.
    pub fn initial(problem: &RdcProblem) -> Self {
        let start = -(problem.num_t() as f64).log2();
        Self {
            q: vec![start; problem.num_x() * problem.num_a()],
            mu: vec![1.0; problem.num_x()],
        }
    }

    pub fn pax(&self, x: usize, a: usize, na: usize) -> f64 {
        self.q[x * na + a].exp2()
    }
}

/// `log2 P(y,a)` for every `(y, a)`, laid out `[a * |Y| + y]`.
fn log_pya(problem: &RdcProblem, q: &[f64]) -> Vec<f64> {
    let (ny, na) = (problem.num_y(), problem.num_a());
    let ch = problem.scenario().channel();
    let px = problem.px();
    let active = problem.active();
    let mut out = vec![f64::NEG_INFINITY; na * ny];
    for a in 0..na {
        for y in 0..ny {
            out[a * ny + y] = log2_sum_exp2(active.iter().filter_map(|&x| {
                let p = ch.prob(x, a, y);
                (p > 0.0).then(|| px[x].log2() + p.log2() + q[x * na + a])
            }));
        }
    }
    out
}

/// The log-domain map `G(q) = β q + (1 − β) H(q, μ)` with
/// `H_{a|x} = μ_x + log2 α_{a,x} − Σ_y P(y|x,a) log2 P(y,a)`.
///
/// Entries are floored at `log2(1e-300)`; zero-mass source symbols are left
/// untouched.
pub fn log_map(problem: &RdcProblem, q: &[f64], mu: &[f64], alphas: &Alphas, beta: f64) -> Vec<f64> {
    let (ny, na) = (problem.num_y(), problem.num_a());
    let ch = problem.scenario().channel();
    let lpya = log_pya(problem, q);
    let floor = log_floor();
    let mut out = q.to_vec();
    for &x in problem.active() {
        for a in 0..na {
            let la = alphas.log_ax(a, x);
            let h = if la == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                let mut h = mu[x] + la;
                for (y, &p) in ch.row(x, a).iter().enumerate() {
                    if p > 0.0 {
                        h -= p * lpya[a * ny + y];
                    }
                }
                h
            };
            out[x * na + a] = (beta * q[x * na + a] + (1.0 - beta) * h).max(floor);
        }
    }
    out
}

/// One linear-domain step `g_{a|x}(P_{A|X}, μ_x)`; `pax` is `[x * |A| + a]`
/// and need not have normalized rows.
pub fn fixed_point_step(
    problem: &RdcProblem,
    pax: &[f64],
    mu: &[f64],
    alphas: &Alphas,
    beta: f64,
) -> Result<Vec<f64>> {
    let q: Vec<f64> = pax.iter().map(|&p| p.max(LOG_FLOOR).log2()).collect();
    let next: Vec<f64> = log_map(problem, &q, mu, alphas, beta)
        .into_iter()
        .map(f64::exp2)
        .collect();
    if let Some(&value) = next.iter().find(|v| !(**v <= DIVERGENCE_LIMIT)) {
        return Err(Error::DivergenceDetected { value });
    }
    Ok(next)
}

/// Finite-difference estimate of `‖J_G(q)‖∞` over the active coordinates.
pub fn jacobian_inf_norm(
    problem: &RdcProblem,
    q: &[f64],
    mu: &[f64],
    alphas: &Alphas,
    beta: f64,
    h: f64,
) -> f64 {
    let na = problem.num_a();
    let coords: Vec<usize> = problem
        .active()
        .iter()
        .flat_map(|&x| (0..na).map(move |a| x * na + a))
        .collect();
    let mut row_sums = vec![0.0; q.len()];
    let mut work = q.to_vec();
    for &j in &coords {
        work[j] = q[j] + h;
        let plus = log_map(problem, &work, mu, alphas, beta);
        work[j] = q[j] - h;
        let minus = log_map(problem, &work, mu, alphas, beta);
        work[j] = q[j];
        for &i in &coords {
            row_sums[i] += ((plus[i] - minus[i]) / (2.0 * h)).abs();
        }
    }
    coords.iter().map(|&i| row_sums[i]).fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct InnerOutcome {
    pub ptx: ConditionalPmf,
    pub dual_iterations: usize,
    pub fp_iterations: usize,
    /// `max_x |1 − Σ_a P(a|x)|` at exit.
    pub violation: f64,
}

fn row_sums(problem: &RdcProblem, q: &[f64]) -> Vec<f64> {
    let na = problem.num_a();
    let mut sums = vec![1.0; problem.num_x()];
    for &x in problem.active() {
        sums[x] = (0..na).map(|a| q[x * na + a].exp2()).sum();
    }
    sums
}

/// `P*(t|x) = (α_{t,x}/α_{a(t),x}) P(a(t)|x)`, rows renormalized.
fn recover(problem: &RdcProblem, alphas: &Alphas, q: &[f64]) -> ConditionalPmf {
    let (nx, nt, na) = (problem.num_x(), problem.num_t(), problem.num_a());
    let space = problem.space();
    let mut data = vec![1.0 / nt as f64; nx * nt];
    for &x in problem.active() {
        let row = &mut data[x * nt..(x + 1) * nt];
        for (t, v) in row.iter_mut().enumerate() {
            let a = space.action_of(t);
            let la = alphas.log_ax(a, x);
            *v = if la == f64::NEG_INFINITY {
                0.0
            } else {
                (alphas.log_tx(t, x) - la + q[x * na + a]).exp2()
            };
        }
        let total: f64 = row.iter().sum();
        if total > 0.0 && total.is_finite() {
            row.iter_mut().for_each(|v| *v /= total);
        } else {
            row.iter_mut().for_each(|v| *v = 1.0 / nt as f64);
        }
    }
    ConditionalPmf::from_weights(nx, nt, data).expect("rows carry mass")
}

/// Minimizes `F` over `P_{T|X}` for fixed `(Q_A, Q_{T,Y})`, starting from and
/// updating `state`.
///
/// Fails with [`Error::MaxIterations`] (best iterate attached) when the dual
/// loop cannot bring every row sum within `inner_tol` of one.
pub fn inner_minimize(
    problem: &RdcProblem,
    qa: &Pmf,
    qty: &JointPmf,
    s: f64,
    m: f64,
    params: &SolverParams,
    state: &mut InnerState,
) -> Result<InnerOutcome> {
    let alphas = compute_alphas(problem, qa, qty, s, m)?;
    let px = problem.px();
    let mut fp_total = 0;
    let mut violation = f64::INFINITY;
    let mut dual_iterations = 0;
    for i in 1..=params.max_inner {
        dual_iterations = i;
        let mut converged = false;
        for _ in 0..params.max_fp {
            let next = log_map(problem, &state.q, &state.mu, &alphas, params.beta);
            fp_total += 1;
            let mut step: f64 = 0.0;
            for (&n, &o) in next.iter().zip(&state.q) {
                step = step.max((n.exp2() - o.exp2()).abs());
            }
            if let Some(&value) = next.iter().find(|v| !(v.exp2() <= DIVERGENCE_LIMIT)) {
                return Err(Error::DivergenceDetected { value: value.exp2() });
            }
            state.q = next;
            if step < params.fp_tol {
                converged = true;
                break;
            }
        }
        if !converged {
            debug!("fixed-point loop hit its cap in dual round {i}");
        }
        let sums = row_sums(problem, &state.q);
        violation = problem
            .active()
            .iter()
            .map(|&x| (1.0 - sums[x]).abs())
            .fold(0.0, f64::max);
        if violation <= params.inner_tol {
            break;
        }
        for &x in problem.active() {
            match params.step_rule {
                StepRule::Harmonic => state.mu[x] += (1.0 / i as f64) / px[x] * (1.0 - sums[x]),
                StepRule::Normalized => state.mu[x] -= sums[x].log2(),
            }
        }
    }
    let ptx = recover(problem, &alphas, &state.q);
    if violation > params.inner_tol {
        return Err(Error::MaxIterations {
            stage: "dual",
            iterations: dual_iterations,
            best: Some(Box::new(ptx)),
        });
    }
    Ok(InnerOutcome {
        ptx,
        dual_iterations,
        fp_iterations: fp_total,
        violation,
    })
}
