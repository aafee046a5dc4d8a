#![allow(dead_code)]

use actionrd_core::{ActionChannel, Alphabets, Pmf, ScenarioInstance, SolverParams};
use actionrd_testkit::Instance;

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

pub fn to_scenario(inst: &Instance) -> ScenarioInstance {
    let alphabets = Alphabets {
        x: names(inst.nx()),
        y: names(inst.ny()),
        a: names(inst.na()),
        xhat: names(inst.nxh()),
    };
    ScenarioInstance::new(
        alphabets,
        Pmf::new(inst.px.clone()).unwrap(),
        ActionChannel::new(&inst.channel).unwrap(),
        inst.distortion.clone(),
        inst.cost.clone(),
    )
    .unwrap()
}

/// Uniform bit, Hamming distortion, one action, no side information.
pub fn binary_source() -> Instance {
    Instance {
        px: vec![0.5, 0.5],
        channel: vec![vec![vec![1.0], vec![1.0]]],
        distortion: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        cost: vec![0.0],
    }
}

/// Binary source with a free noisy look (BSC 0.3) and a paid clean one.
pub fn two_by_two() -> Instance {
    Instance {
        px: vec![0.4, 0.6],
        channel: vec![
            vec![vec![0.7, 0.3], vec![0.3, 0.7]],
            vec![vec![0.95, 0.05], vec![0.05, 0.95]],
        ],
        distortion: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        cost: vec![0.0, 1.0],
    }
}

pub fn tight() -> SolverParams {
    SolverParams {
        outer_tol: 1e-11,
        max_outer: 20_000,
        ..SolverParams::default()
    }
}
