mod common;

use actionrd_core::solver::{
    compute_alphas, eval_f, f_terms, fixed_point_step, inner_minimize, log_map, update_qa, update_qty, InnerState,
};
use actionrd_core::{ConditionalPmf, Pmf, Pruning, RdcProblem, SolverParams};
use actionrd_testkit::{random_instance, Instance};
use approx::assert_abs_diff_eq;
use common::{binary_source, to_scenario, two_by_two};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn problem(inst: &Instance) -> RdcProblem {
    RdcProblem::new(&to_scenario(inst), Pruning::None, 1_000_000).unwrap()
}

/// Random full-support `P_{T|X}`.
fn random_ptx(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ConditionalPmf {
    use rand::Rng;
    let data = (0..rows * cols).map(|_| 0.05 + rng.gen::<f64>()).collect();
    ConditionalPmf::from_weights(rows, cols, data).unwrap()
}

#[test]
fn qa_is_one_for_single_action() {
    let p = problem(&binary_source());
    let qa = update_qa(&p, &p.uniform_ptx()).unwrap();
    assert_eq!(qa.probs(), &[1.0]);
}

#[test]
fn qa_examples() {
    // uniform bit, deterministic a = x: strategy (recon [0], a) for each a
    let inst = Instance {
        px: vec![0.5, 0.5],
        channel: vec![vec![vec![1.0], vec![1.0]]; 2],
        distortion: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        cost: vec![0.0, 1.0],
    };
    let p = problem(&inst);
    let space = p.space();
    let nt = space.len();
    let mut rows = vec![vec![0.0; nt]; 2];
    for x in 0..2 {
        rows[x][space.class(x).start] = 1.0;
    }
    let qa = update_qa(&p, &ConditionalPmf::new(rows).unwrap()).unwrap();
    assert_abs_diff_eq!(qa[0], 0.5);
    assert_abs_diff_eq!(qa[1], 0.5);

    // px = [0.25, 0.75], P(a=1|x=0) = 0.2, P(a=1|x=1) = 0.6
    let p = problem(&Instance {
        px: vec![0.25, 0.75],
        ..inst
    });
    let mut rows = vec![vec![0.0; nt]; 2];
    for (x, on) in [(0, 0.2), (1, 0.6)] {
        rows[x][p.space().class(0).start] = 1.0 - on;
        rows[x][p.space().class(1).start] = on;
    }
    let qa = update_qa(&p, &ConditionalPmf::new(rows).unwrap()).unwrap();
    assert_abs_diff_eq!(qa[1], 0.25 * 0.2 + 0.75 * 0.6, epsilon = 1e-15);
}

#[test]
fn qty_examples() {
    // single strategy, deterministic channel y = x
    let inst = Instance {
        px: vec![0.3, 0.7],
        channel: vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]],
        distortion: vec![vec![0.0], vec![0.0]],
        cost: vec![0.0],
    };
    let p = problem(&inst);
    assert_eq!(p.num_t(), 1);
    let qty = update_qty(&p, &p.uniform_ptx()).unwrap();
    assert_eq!(qty.labels(), &["t".to_string(), "y".to_string()]);
    assert_abs_diff_eq!(qty.get(&[0, 0]), 0.3);
    assert_abs_diff_eq!(qty.get(&[0, 1]), 0.7);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = problem(&two_by_two());
    let ptx = random_ptx(&mut rng, 2, p.num_t());
    let qty = update_qty(&p, &ptx).unwrap();
    // t-marginal is the px-weighted ptx
    let qt = qty.marginal(&["t"]).unwrap();
    for t in 0..p.num_t() {
        let direct = 0.4 * ptx.get(0, t) + 0.6 * ptx.get(1, t);
        assert_abs_diff_eq!(qt.as_slice()[t], direct, epsilon = 1e-15);
    }
    // one cell against the generic joint
    let joint = p.joint(&ptx).unwrap().marginal(&["t", "y"]).unwrap();
    assert_abs_diff_eq!(qty.get(&[5, 1]), joint.get(&[5, 1]), epsilon = 1e-15);
}

#[test]
fn single_strategy_f_is_channel_entropy() {
    let inst = Instance {
        px: vec![0.3, 0.7],
        channel: vec![vec![vec![0.9, 0.1], vec![0.2, 0.8]]],
        distortion: vec![vec![0.0], vec![0.0]],
        cost: vec![0.0],
    };
    let p = problem(&inst);
    let ptx = p.uniform_ptx();
    let (qa, qty) = (update_qa(&p, &ptx).unwrap(), update_qty(&p, &ptx).unwrap());
    let terms = f_terms(&p, &ptx, &qty, &qa, 0.0, 0.0).unwrap();
    let h = -(0.3 * (0.9 * 0.9f64.log2() + 0.1 * 0.1f64.log2()) + 0.7 * (0.2 * 0.2f64.log2() + 0.8 * 0.8f64.log2()));
    assert_abs_diff_eq!(terms.channel_entropy, h, epsilon = 1e-14);
    // with a single strategy the divergence terms cancel the channel entropy:
    // F = I(X;A) + I(X;T|Y,A) = 0
    assert_abs_diff_eq!(terms.total, 0.0, epsilon = 1e-14);
}

#[test]
fn f_at_induced_marginals_is_the_lagrangian() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let inst = random_instance(&mut rng, 3, 2, 2, 2);
        let p = problem(&inst);
        let ptx = random_ptx(&mut rng, 3, p.num_t());
        let (qa, qty) = (update_qa(&p, &ptx).unwrap(), update_qty(&p, &ptx).unwrap());
        let (s, m) = (-1.3, -0.4);
        let f = eval_f(&p, &ptx, &qty, &qa, s, m).unwrap();
        let strategies: Vec<(Vec<usize>, usize)> = p.space().iter().map(|t| (t.recon().to_vec(), t.action())).collect();
        let rows: Vec<Vec<f64>> = (0..3).map(|x| ptx.row(x).to_vec()).collect();
        let (rate, d, c) = inst.evaluate(&strategies, &rows);
        assert_abs_diff_eq!(f + s * d + m * c, rate, epsilon = 1e-12);
        assert_abs_diff_eq!(p.rate_of(&ptx).unwrap(), rate, epsilon = 1e-12);
    }
}

#[test]
fn perturbing_qa_increases_f() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = problem(&two_by_two());
    let ptx = random_ptx(&mut rng, 2, p.num_t());
    let (qa, qty) = (update_qa(&p, &ptx).unwrap(), update_qty(&p, &ptx).unwrap());
    let base = eval_f(&p, &ptx, &qty, &qa, -1.0, -0.5).unwrap();
    for shift in [-0.05, 0.02, 0.1] {
        let moved = Pmf::new(vec![qa[0] + shift, qa[1] - shift]).unwrap();
        assert!(eval_f(&p, &ptx, &qty, &moved, -1.0, -0.5).unwrap() > base);
    }
}

#[test]
fn f_flags_missing_support() {
    let p = problem(&two_by_two());
    let ptx = p.uniform_ptx();
    let qty = update_qty(&p, &ptx).unwrap();
    let err = eval_f(&p, &ptx, &qty, &Pmf::point(2, 0), 0.0, 0.0).unwrap_err();
    assert!(matches!(err, actionrd_core::Error::AbsoluteContinuityViolation { .. }));
}

#[test]
fn alphas_collapse_for_uniform_q() {
    let p = problem(&two_by_two());
    let (nt, ny) = (p.num_t(), p.num_y());
    let qty = actionrd_core::JointPmf::new(&["t", "y"], &[nt, ny], vec![1.0 / (nt * ny) as f64; nt * ny]).unwrap();
    let qa = Pmf::new(vec![0.3, 0.7]).unwrap();
    let al = compute_alphas(&p, &qa, &qty, 0.0, 0.0).unwrap();
    for x in 0..2 {
        for t in 0..nt {
            let a = p.space().action_of(t);
            assert_abs_diff_eq!(al.alpha_tx(t, x), qa[a] / (nt * ny) as f64, epsilon = 1e-15);
        }
        for a in 0..2 {
            let sum: f64 = p.space().class(a).map(|t| al.alpha_tx(t, x)).sum();
            assert_abs_diff_eq!(al.alpha_ax(a, x), sum, epsilon = 1e-15);
        }
    }
}

#[test]
fn alphas_ignore_m_without_costs() {
    let mut inst = two_by_two();
    inst.cost = vec![0.0, 0.0];
    let p = problem(&inst);
    let ptx = p.uniform_ptx();
    let (qa, qty) = (update_qa(&p, &ptx).unwrap(), update_qty(&p, &ptx).unwrap());
    let a0 = compute_alphas(&p, &qa, &qty, -1.0, 0.0).unwrap();
    let a1 = compute_alphas(&p, &qa, &qty, -1.0, -7.0).unwrap();
    for x in 0..2 {
        for t in 0..p.num_t() {
            assert_eq!(a0.log_tx(t, x), a1.log_tx(t, x));
        }
    }
}

#[test]
fn alpha_cells_match_direct_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let inst = random_instance(&mut rng, 2, 2, 2, 2);
    let p = problem(&inst);
    let ptx = random_ptx(&mut rng, 2, p.num_t());
    let (qa, qty) = (update_qa(&p, &ptx).unwrap(), update_qty(&p, &ptx).unwrap());
    let (s, m) = (-2.5, -0.75);
    let al = compute_alphas(&p, &qa, &qty, s, m).unwrap();
    for x in 0..2 {
        for (t, strat) in p.space().iter().enumerate() {
            let row: Vec<f64> = (0..p.num_y()).map(|y| qty.get(&[t, y])).collect();
            let direct = inst.alpha_direct(strat.recon(), strat.action(), x, qa.probs(), &row, s, m);
            assert!((al.alpha_tx(t, x) / direct - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn zero_q_gives_zero_alpha() {
    let p = problem(&two_by_two());
    let (nt, ny) = (p.num_t(), p.num_y());
    let mut cells = vec![1.0; nt * ny];
    cells[0] = 0.0;
    let total: f64 = cells.iter().sum();
    let qty = actionrd_core::JointPmf::new(&["t", "y"], &[nt, ny], cells.iter().map(|v| v / total).collect()).unwrap();
    let al = compute_alphas(&p, &Pmf::uniform(2), &qty, -1.0, -1.0).unwrap();
    assert_eq!(al.alpha_tx(0, 0), 0.0);
    assert!(al.alpha_tx(1, 0) > 0.0);
    assert!(!al.alpha_ax(0, 0).is_nan());
}

fn converged_inner(p: &RdcProblem, s: f64, m: f64, params: &SolverParams) -> (InnerState, actionrd_core::solver::Alphas) {
    let ptx = p.uniform_ptx();
    let (qa, qty) = (update_qa(p, &ptx).unwrap(), update_qty(p, &ptx).unwrap());
    let mut state = InnerState::initial(p);
    inner_minimize(p, &qa, &qty, s, m, params, &mut state).unwrap();
    (state, compute_alphas(p, &qa, &qty, s, m).unwrap())
}

#[test]
fn fixed_point_is_reproduced() {
    let p = problem(&two_by_two());
    let params = SolverParams::default();
    let (state, al) = converged_inner(&p, -2.0, -0.5, &params);
    let pax: Vec<f64> = state.q.iter().map(|v| v.exp2()).collect();
    let next = fixed_point_step(&p, &pax, &state.mu, &al, params.beta).unwrap();
    for (a, b) in pax.iter().zip(&next) {
        assert!((a - b).abs() < 10.0 * params.fp_tol);
    }
}

#[test]
fn larger_beta_moves_less() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let inst = random_instance(&mut rng, 2, 2, 2, 2);
        let p = problem(&inst);
        let ptx = random_ptx(&mut rng, 2, p.num_t());
        let (qa, qty) = (update_qa(&p, &ptx).unwrap(), update_qty(&p, &ptx).unwrap());
        let al = compute_alphas(&p, &qa, &qty, -1.0, -1.0).unwrap();
        let pax: Vec<f64> = (0..4).map(|_| 0.1 + rand::Rng::gen::<f64>(&mut rng)).collect();
        let mu = vec![0.5, 1.5];
        let gap = |beta: f64| {
            fixed_point_step(&p, &pax, &mu, &al, beta)
                .unwrap()
                .iter()
                .zip(&pax)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        assert!(gap(0.9) <= gap(0.1) + 1e-15);
    }
}

#[test]
fn fixed_point_iterates_contract() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let p = problem(&two_by_two());
    let ptx = random_ptx(&mut rng, 2, p.num_t());
    let (qa, qty) = (update_qa(&p, &ptx).unwrap(), update_qty(&p, &ptx).unwrap());
    let al = compute_alphas(&p, &qa, &qty, -1.5, -0.5).unwrap();
    let mu = vec![1.0, 0.5];
    for beta in [0.2, 0.5, 0.8] {
        let mut q = vec![-3.0, -0.5, -1.0, -4.0];
        let mut steps = Vec::new();
        for _ in 0..200 {
            let next = log_map(&p, &q, &mu, &al, beta);
            let step = next.iter().zip(&q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            q = next;
            if step < 1e-12 {
                break;
            }
            steps.push(step);
        }
        assert!(steps.len() >= 3 && steps.len() < 200, "beta {beta}: {} steps", steps.len());
        let worst = steps.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
        assert!(worst < 1.0, "beta {beta}: ratio {worst}");
    }
}

#[test]
fn single_action_inner_normalizes() {
    let p = problem(&binary_source());
    let params = SolverParams::default();
    let ptx = p.uniform_ptx();
    let (qa, qty) = (update_qa(&p, &ptx).unwrap(), update_qty(&p, &ptx).unwrap());
    let mut state = InnerState::initial(&p);
    let out = inner_minimize(&p, &qa, &qty, -1.0, 0.0, &params, &mut state).unwrap();
    assert!(out.violation <= params.inner_tol);
    let sums: Vec<f64> = (0..2).map(|x| state.pax(x, 0, 1)).collect();
    for s in sums {
        assert_abs_diff_eq!(s, 1.0, epsilon = params.inner_tol);
    }
}

#[test]
fn inner_rows_are_normalized_for_both_step_rules() {
    // the harmonic schedule is a plain subgradient method: correct but slow,
    // so it gets a looser tolerance
    for (rule, tol) in [
        (actionrd_core::StepRule::Normalized, 1e-7),
        (actionrd_core::StepRule::Harmonic, 1e-4),
    ] {
        let params = SolverParams {
            step_rule: rule,
            inner_tol: tol,
            max_inner: 20_000,
            ..SolverParams::default()
        };
        let p = problem(&two_by_two());
        let ptx = p.uniform_ptx();
        let (qa, qty) = (update_qa(&p, &ptx).unwrap(), update_qty(&p, &ptx).unwrap());
        let mut state = InnerState::initial(&p);
        let out = inner_minimize(&p, &qa, &qty, -2.0, -1.0, &params, &mut state).unwrap();
        assert!(out.violation <= params.inner_tol, "{rule:?}: {}", out.violation);
        for x in 0..2 {
            let total: f64 = state.q[x * 2..x * 2 + 2].iter().map(|v| v.exp2()).sum();
            assert!((total - 1.0).abs() <= params.inner_tol);
            assert_abs_diff_eq!(out.ptx.row(x).iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }
}

#[test]
fn inner_beats_a_grid_over_the_simplex() {
    // minimizing F over P_{T|X} for fixed (Q_A, Q_{T,Y}) on a 2x2x2 instance
    // with one strategy per action (T = {(x̂=0 for all y, a=0), (x̂=1, a=1)})
    // is searchable exhaustively at step 0.02
    let inst = Instance {
        px: vec![0.45, 0.55],
        channel: vec![
            vec![vec![0.6, 0.4], vec![0.3, 0.7]],
            vec![vec![0.9, 0.1], vec![0.2, 0.8]],
        ],
        distortion: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        cost: vec![0.0, 0.7],
    };
    let scenario = to_scenario(&inst);
    let space = actionrd_core::StrategySpace::for_scenario(&scenario, Pruning::None, 1_000_000).unwrap();
    let picked: Vec<actionrd_core::ShannonStrategy> = vec![
        actionrd_core::ShannonStrategy::new(vec![0, 1], 0),
        actionrd_core::ShannonStrategy::new(vec![1, 1], 1),
    ];
    assert!(picked.iter().all(|t| space.position(t).is_some()));
    let reduced = actionrd_core::StrategySpace::from_strategies(picked, 2, 2, 2).unwrap();
    let p = RdcProblem::with_space(&scenario, reduced).unwrap();
    let start = ConditionalPmf::new(vec![vec![0.3, 0.7], vec![0.8, 0.2]]).unwrap();
    let (qa, qty) = (update_qa(&p, &start).unwrap(), update_qty(&p, &start).unwrap());
    let (s, m) = (-1.2, -0.6);
    let mut state = InnerState::initial(&p);
    let out = inner_minimize(&p, &qa, &qty, s, m, &SolverParams::default(), &mut state).unwrap();
    let f_inner = eval_f(&p, &out.ptx, &qty, &qa, s, m).unwrap();
    let mut f_grid = f64::INFINITY;
    for i in 0..=50 {
        for j in 0..=50 {
            let (u, v) = (i as f64 * 0.02, j as f64 * 0.02);
            let ptx = ConditionalPmf::new(vec![vec![u, 1.0 - u], vec![v, 1.0 - v]]).unwrap();
            if let Ok(f) = eval_f(&p, &ptx, &qty, &qa, s, m) {
                f_grid = f_grid.min(f);
            }
        }
    }
    assert!(f_inner <= f_grid + 1e-3, "{f_inner} vs {f_grid}");
    assert!(f_inner <= f_grid + 1e-9, "grid should not beat the exact minimizer");
}
