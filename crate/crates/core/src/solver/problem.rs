use crate::error::{Error, Result};
use crate::prob::{build_joint, log2_sum_exp2, ConditionalPmf, JointPmf, Pmf, ZERO_TOL};
use crate::scenario::ScenarioInstance;
use crate::strategy::{Pruning, StrategySpace};

/// Joint masses below this are treated as underflowed when evaluating `F`;
/// together they contribute well under `1e-290` bits.
const NEGLIGIBLE: f64 = 1e-300;

/// A scenario paired with its strategy space and the per-strategy tables the
/// solver reuses at every iteration.
#[derive(Clone, Debug)]
pub struct RdcProblem {
    scenario: ScenarioInstance,
    space: StrategySpace,
    px: Vec<f64>,
    /// Source symbols with positive mass; the dual loop only runs over these.
    active: Vec<usize>,
    /// `Σ_y P(y|x,a(t)) d(x, t(y))`, laid out `[t * nx + x]`.
    exp_dist: Vec<f64>,
}

impl RdcProblem {
    pub fn new(scenario: &ScenarioInstance, pruning: Pruning, cap: usize) -> Result<Self> {
        let space = StrategySpace::for_scenario(scenario, pruning, cap)?;
        Self::with_space(scenario, space)
    }

    pub fn with_space(scenario: &ScenarioInstance, space: StrategySpace) -> Result<Self> {
        if space.num_actions() != scenario.num_a()
            || space.num_y() != scenario.num_y()
            || space.num_xhat() != scenario.num_xhat()
        {
            return Err(Error::ShapeMismatch("strategy space does not match scenario".into()));
        }
        let nx = scenario.num_x();
        let px = scenario.px().probs().to_vec();
        let active = (0..nx).filter(|&x| px[x] > ZERO_TOL).collect();
        let ch = scenario.channel();
        let mut exp_dist = vec![0.0; space.len() * nx];
        for (t, strat) in space.iter().enumerate() {
            for x in 0..nx {
                exp_dist[t * nx + x] = ch
                    .row(x, strat.action())
                    .iter()
                    .enumerate()
                    .map(|(y, &p)| p * scenario.distortion(x, strat.apply(y)))
                    .sum();
            }
        }
        Ok(Self {
            scenario: scenario.clone(),
            space,
            px,
            active,
            exp_dist,
        })
    }

    pub fn scenario(&self) -> &ScenarioInstance {
        &self.scenario
    }

    pub fn space(&self) -> &StrategySpace {
        &self.space
    }

    pub fn num_x(&self) -> usize {
        self.px.len()
    }

    pub fn num_t(&self) -> usize {
        self.space.len()
    }

    pub fn num_a(&self) -> usize {
        self.scenario.num_a()
    }

    pub fn num_y(&self) -> usize {
        self.scenario.num_y()
    }

    pub(crate) fn px(&self) -> &[f64] {
        &self.px
    }

    pub(crate) fn active(&self) -> &[usize] {
        &self.active
    }

    #[inline]
    pub(crate) fn exp_dist(&self, t: usize, x: usize) -> f64 {
        self.exp_dist[t * self.num_x() + x]
    }

    pub fn uniform_ptx(&self) -> ConditionalPmf {
        ConditionalPmf::uniform(self.num_x(), self.num_t())
    }

    fn check_ptx(&self, ptx: &ConditionalPmf) -> Result<()> {
        if ptx.rows() != self.num_x() || ptx.cols() != self.num_t() {
            return Err(Error::ShapeMismatch(format!(
                "ptx is {}x{}, expected {}x{}",
                ptx.rows(),
                ptx.cols(),
                self.num_x(),
                self.num_t()
            )));
        }
        Ok(())
    }

    /// `E[d(X, T(Y))]` under `ptx`.
    pub fn distortion_of(&self, ptx: &ConditionalPmf) -> f64 {
        let nx = self.num_x();
        (0..nx)
            .map(|x| {
                self.px[x]
                    * (0..self.num_t())
                        .map(|t| ptx.get(x, t) * self.exp_dist(t, x))
                        .sum::<f64>()
            })
            .sum()
    }

    /// `E[Δ(a(T))]` under `ptx`.
    pub fn cost_of(&self, ptx: &ConditionalPmf) -> f64 {
        update_qa_weights(self, ptx)
            .iter()
            .enumerate()
            .map(|(a, q)| q * self.scenario.cost(a))
            .sum()
    }

    /// Joint over `(x, y, t)` induced by `ptx`.
    pub fn joint(&self, ptx: &ConditionalPmf) -> Result<JointPmf> {
        build_joint(self.scenario.px(), ptx, self.scenario.channel(), |t| self.space.action_of(t))
    }

    /// `I(X;A) + I(X;T|Y,A)` evaluated through the generic joint machinery.
    pub fn rate_of(&self, ptx: &ConditionalPmf) -> Result<f64> {
        // T determines A, so I(X;A) + I(X;T|Y,A) = I(X;A) + I(X;T|Y) - I(X;A|Y)
        // would need an explicit A axis; build it instead.
        let j = self.joint(ptx)?;
        let (nx, ny, nt, na) = (self.num_x(), self.num_y(), self.num_t(), self.num_a());
        let mut data = vec![0.0; nx * ny * nt * na];
        for x in 0..nx {
            for y in 0..ny {
                for t in 0..nt {
                    let a = self.space.action_of(t);
                    data[((x * ny + y) * nt + t) * na + a] = j.get(&[x, y, t]);
                }
            }
        }
        let full = JointPmf::from_parts_unchecked(&["x", "y", "t", "a"], &[nx, ny, nt, na], data);
        Ok(full.mutual_information(&["x"], &["a"], &[])?
            + full.mutual_information(&["x"], &["t"], &["y", "a"])?)
    }
}

fn update_qa_weights(problem: &RdcProblem, ptx: &ConditionalPmf) -> Vec<f64> {
    let mut qa = vec![0.0; problem.num_a()];
    for x in 0..problem.num_x() {
        let px = problem.px[x];
        if px == 0.0 {
            continue;
        }
        for (t, &p) in ptx.row(x).iter().enumerate() {
            qa[problem.space.action_of(t)] += px * p;
        }
    }
    qa
}

/// `Q_A(a) = Σ_{x, t ∈ T^a} P_X(x) P_{T|X}(t|x)`, i.e. the induced `P_A`.
pub fn update_qa(problem: &RdcProblem, ptx: &ConditionalPmf) -> Result<Pmf> {
    problem.check_ptx(ptx)?;
    Pmf::from_weights(&update_qa_weights(problem, ptx))
}

pub(crate) fn qty_weights(problem: &RdcProblem, ptx: &ConditionalPmf) -> Vec<f64> {
    let (nx, ny, nt) = (problem.num_x(), problem.num_y(), problem.num_t());
    let ch = problem.scenario.channel();
    let mut q = vec![0.0; nt * ny];
    for x in 0..nx {
        let px = problem.px[x];
        if px == 0.0 {
            continue;
        }
        for t in 0..nt {
            let w = px * ptx.get(x, t);
            if w == 0.0 {
                continue;
            }
            let row = ch.row(x, problem.space.action_of(t));
            for y in 0..ny {
                q[t * ny + y] += w * row[y];
            }
        }
    }
    q
}

/// `Q_{T,Y}(t,y) = Σ_x P_X(x) P_{Y|X,A}(y|x,a(t)) P_{T|X}(t|x)`, axes `["t","y"]`.
pub fn update_qty(problem: &RdcProblem, ptx: &ConditionalPmf) -> Result<JointPmf> {
    problem.check_ptx(ptx)?;
    let mut q = qty_weights(problem, ptx);
    let total: f64 = q.iter().sum();
    q.iter_mut().for_each(|v| *v /= total);
    Ok(JointPmf::from_parts_unchecked(
        &["t", "y"],
        &[problem.num_t(), problem.num_y()],
        q,
    ))
}

/// The five terms of `F`, in bits. `total` is their sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FTerms {
    /// `Σ_{y,a} P(y,a) log2(P(y,a) / Q_A(a))`
    pub action_divergence: f64,
    /// `−E[log2 P_{Y|X,A}(Y|X,A)]`
    pub channel_entropy: f64,
    /// `Σ_x P_X(x) D(P_{Y,T|X=x} || Q_{T,Y})`
    pub strategy_divergence: f64,
    /// `E[d(X, T(Y))]` (enters `F` as `−s·distortion`)
    pub distortion: f64,
    /// `E[Δ(a(T))]` (enters `F` as `−m·cost`)
    pub cost: f64,
    pub total: f64,
}

fn check_qs(problem: &RdcProblem, qty: &JointPmf, qa: &Pmf) -> Result<()> {
    if qa.len() != problem.num_a() || qty.shape() != [problem.num_t(), problem.num_y()] {
        return Err(Error::ShapeMismatch("auxiliary pmfs do not match the problem".into()));
    }
    Ok(())
}

pub fn f_terms(
    problem: &RdcProblem,
    ptx: &ConditionalPmf,
    qty: &JointPmf,
    qa: &Pmf,
    s: f64,
    m: f64,
) -> Result<FTerms> {
    problem.check_ptx(ptx)?;
    check_qs(problem, qty, qa)?;
    let (nx, ny, nt, na) = (problem.num_x(), problem.num_y(), problem.num_t(), problem.num_a());
    let ch = problem.scenario.channel();
    let q = qty.as_slice();

    let mut pya = vec![0.0; ny * na];
    let mut channel_entropy = 0.0;
    let mut strategy_divergence = 0.0;
    for x in 0..nx {
        let px = problem.px[x];
        if px == 0.0 {
            continue;
        }
        let mut kl_x = 0.0;
        for t in 0..nt {
            let ptx_xt = ptx.get(x, t);
            if ptx_xt <= 0.0 {
                continue;
            }
            let a = problem.space.action_of(t);
            for (y, &pyxa) in ch.row(x, a).iter().enumerate() {
                let w = ptx_xt * pyxa;
                // skip masses that underflow (to zero or to subnormals) once
                // weighted by P_X: the matching Q cell may have flushed to 0
                if w <= 0.0 || px * w < NEGLIGIBLE {
                    continue;
                }
                pya[y * na + a] += px * w;
                channel_entropy -= px * w * pyxa.log2();
                let qv = q[t * ny + y];
                if qv <= 0.0 {
                    return Err(Error::AbsoluteContinuityViolation { index: t * ny + y, p: px * w });
                }
                kl_x += w * (w / qv).log2();
            }
        }
        strategy_divergence += px * kl_x;
    }
    let mut action_divergence = 0.0;
    for y in 0..ny {
        for a in 0..na {
            let p = pya[y * na + a];
            if p < NEGLIGIBLE {
                continue;
            }
            if qa[a] <= 0.0 {
                return Err(Error::AbsoluteContinuityViolation { index: a, p });
            }
            action_divergence += p * (p / qa[a]).log2();
        }
    }
    let distortion = problem.distortion_of(ptx);
    let cost = problem.cost_of(ptx);
    let total = action_divergence + channel_entropy + strategy_divergence - s * distortion - m * cost;
    Ok(FTerms {
        action_divergence,
        channel_entropy,
        strategy_divergence,
        distortion,
        cost,
        total,
    })
}

/// The functional `F(P_{T|X}, Q_{T,Y}, Q_A)` in bits.
pub fn eval_f(
    problem: &RdcProblem,
    ptx: &ConditionalPmf,
    qty: &JointPmf,
    qa: &Pmf,
    s: f64,
    m: f64,
) -> Result<f64> {
    f_terms(problem, ptx, qty, qa, s, m).map(|f| f.total)
}

/// The constants `α_{t,x}` and `α_{a,x}`, held as base-2 logarithms.
///
/// An `α` of zero (some `Q_{T,Y}(t,y) = 0` under positive channel weight, or
/// `Q_A(a) = 0`) is stored as `-inf`.
#[derive(Clone, Debug)]
pub struct Alphas {
    nx: usize,
    nt: usize,
    na: usize,
    /// `[x * nt + t]`
    log_tx: Vec<f64>,
    /// `[x * na + a]`
    log_ax: Vec<f64>,
}

impl Alphas {
    #[inline]
    pub fn log_tx(&self, t: usize, x: usize) -> f64 {
        self.log_tx[x * self.nt + t]
    }

    #[inline]
    pub fn log_ax(&self, a: usize, x: usize) -> f64 {
        self.log_ax[x * self.na + a]
    }

    pub fn alpha_tx(&self, t: usize, x: usize) -> f64 {
        self.log_tx(t, x).exp2()
    }

    pub fn alpha_ax(&self, a: usize, x: usize) -> f64 {
        self.log_ax(a, x).exp2()
    }

    pub fn num_x(&self) -> usize {
        self.nx
    }
}

pub fn compute_alphas(problem: &RdcProblem, qa: &Pmf, qty: &JointPmf, s: f64, m: f64) -> Result<Alphas> {
    check_qs(problem, qty, qa)?;
    let (nx, ny, nt, na) = (problem.num_x(), problem.num_y(), problem.num_t(), problem.num_a());
    let ch = problem.scenario.channel();
    let log_q: Vec<f64> = qty
        .as_slice()
        .iter()
        .map(|&v| if v > 0.0 { v.log2() } else { f64::NEG_INFINITY })
        .collect();
    let mut log_tx = vec![f64::NEG_INFINITY; nx * nt];
    let mut log_ax = vec![f64::NEG_INFINITY; nx * na];
    for a in 0..na {
        if qa[a] <= 0.0 {
            continue;
        }
        let base = qa[a].log2() + m * problem.scenario.cost(a);
        let class = problem.space.class(a);
        for x in 0..nx {
            let row = ch.row(x, a);
            for t in class.clone() {
                let mut e = base + s * problem.exp_dist(t, x);
                for (y, &p) in row.iter().enumerate() {
                    if p > 0.0 {
                        e += p * log_q[t * ny + y];
                    }
                }
                // -inf * 0 never occurs: p > 0 above
                log_tx[x * nt + t] = e;
            }
            log_ax[x * na + a] = log2_sum_exp2(class.clone().map(|t| log_tx[x * nt + t]));
        }
    }
    Ok(Alphas {
        nx,
        nt,
        na,
        log_tx,
        log_ax,
    })
}
