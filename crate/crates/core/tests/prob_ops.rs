use actionrd_core::{build_joint, h2, kl_divergence, ActionChannel, ConditionalPmf, Error, JointPmf, Pmf};
use actionrd_testkit::info;
use approx::assert_abs_diff_eq;
use proptest::prelude::*;

#[test]
fn kl_examples() {
    let half = Pmf::new(vec![0.5, 0.5]).unwrap();
    assert_eq!(kl_divergence(&half, &half).unwrap(), 0.0);
    assert_abs_diff_eq!(kl_divergence(&Pmf::point(2, 0), &half).unwrap(), 1.0, epsilon = 1e-15);
    let skew = Pmf::new(vec![0.25, 0.75]).unwrap();
    assert_abs_diff_eq!(kl_divergence(&skew, &half).unwrap(), 0.188722, epsilon = 1e-6);
}

#[test]
fn kl_requires_absolute_continuity() {
    let err = kl_divergence(&Pmf::uniform(2), &Pmf::point(2, 1)).unwrap_err();
    assert!(matches!(err, Error::AbsoluteContinuityViolation { index: 0, .. }));
}

#[test]
fn mutual_information_examples() {
    let product = JointPmf::new(&["a", "b"], &[2, 2], vec![0.25; 4]).unwrap();
    assert_abs_diff_eq!(product.mutual_information(&["a"], &["b"], &[]).unwrap(), 0.0, epsilon = 1e-15);

    let copy = JointPmf::new(&["x", "y"], &[2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
    assert_abs_diff_eq!(copy.mutual_information(&["x"], &["y"], &[]).unwrap(), 1.0, epsilon = 1e-15);

    let f = 0.11;
    let bsc = JointPmf::new(&["x", "y"], &[2, 2], vec![0.5 * (1.0 - f), 0.5 * f, 0.5 * f, 0.5 * (1.0 - f)]).unwrap();
    let mi = bsc.mutual_information(&["x"], &["y"], &[]).unwrap();
    assert_abs_diff_eq!(mi, 1.0 - h2(f), epsilon = 1e-12);
    assert_abs_diff_eq!(mi, 0.500, epsilon = 1e-3);
}

#[test]
fn mutual_information_rejects_unknown_axes() {
    let j = JointPmf::new(&["a", "b"], &[2, 2], vec![0.25; 4]).unwrap();
    assert!(j.mutual_information(&["a"], &["z"], &[]).is_err());
    assert!(j.mutual_information(&["a"], &["a"], &[]).is_err());
}

#[test]
fn build_joint_hand_cell() {
    let px = Pmf::new(vec![0.3, 0.7]).unwrap();
    // two strategies, strategy t uses action t
    let ptx = ConditionalPmf::new(vec![vec![0.4, 0.6], vec![0.9, 0.1]]).unwrap();
    let channel = ActionChannel::new(&[
        vec![vec![0.8, 0.2], vec![0.1, 0.9]],
        vec![vec![0.5, 0.5], vec![0.25, 0.75]],
    ])
    .unwrap();
    let j = build_joint(&px, &ptx, &channel, |t| t).unwrap();
    // (x=1, y=0, t=1): 0.7 * 0.1 * 0.25
    assert_abs_diff_eq!(j.get(&[1, 0, 1]), 0.7 * 0.1 * 0.25, epsilon = 1e-16);
    assert_abs_diff_eq!(j.as_slice().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    let mx = j.marginal(&["x"]).unwrap();
    assert_abs_diff_eq!(mx.as_slice()[0], 0.3, epsilon = 1e-15);
    assert_abs_diff_eq!(mx.as_slice()[1], 0.7, epsilon = 1e-15);
}

fn pmf_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|w| {
        let t: f64 = w.iter().sum();
        w.into_iter().map(|v| v / t).collect()
    })
}

proptest! {
    #[test]
    fn kl_vanishes_only_on_equal_pmfs(p in pmf_strategy(4), q in pmf_strategy(4)) {
        let (pp, qq) = (Pmf::new(p.clone()).unwrap(), Pmf::new(q.clone()).unwrap());
        let d = kl_divergence(&pp, &qq).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!((d - info::kl(&p, &q).unwrap()).abs() < 1e-12);
        prop_assert!(kl_divergence(&pp, &pp).unwrap().abs() < 1e-15);
        if pp.total_variation(&qq) > 1e-3 {
            prop_assert!(d > 0.0);
        }
    }

    #[test]
    fn mutual_information_matches_kl_route(cells in pmf_strategy(12)) {
        let j = JointPmf::new(&["a", "b"], &[3, 4], cells.clone()).unwrap();
        let table: Vec<Vec<f64>> = cells.chunks(4).map(<[f64]>::to_vec).collect();
        let mi = j.mutual_information(&["a"], &["b"], &[]).unwrap();
        prop_assert!(mi >= 0.0);
        prop_assert!((mi - info::mutual_information_2d(&table)).abs() < 1e-12);
        let sym = j.mutual_information(&["b"], &["a"], &[]).unwrap();
        prop_assert!((mi - sym).abs() < 1e-12);
    }

    #[test]
    fn build_joint_reproduces_inputs(px in pmf_strategy(3), r0 in pmf_strategy(4), r1 in pmf_strategy(4), r2 in pmf_strategy(4)) {
        let px = Pmf::new(px).unwrap();
        let ptx = ConditionalPmf::new(vec![r0, r1, r2]).unwrap();
        let channel = ActionChannel::new(&[
            vec![vec![0.5, 0.5], vec![0.2, 0.8], vec![1.0, 0.0]],
            vec![vec![0.9, 0.1], vec![0.6, 0.4], vec![0.3, 0.7]],
        ]).unwrap();
        let j = build_joint(&px, &ptx, &channel, |t| t % 2).unwrap();
        let mx = j.marginal(&["x"]).unwrap();
        let mxt = j.marginal(&["x", "t"]).unwrap();
        for x in 0..3 {
            prop_assert!((mx.as_slice()[x] - px[x]).abs() < 1e-15);
            for t in 0..4 {
                prop_assert!((mxt.get(&[x, t]) - px[x] * ptx.get(x, t)).abs() < 1e-15);
            }
        }
    }
}
