//! Convergence orders behind the scheme allowance: the energy-identity
//! residual is first order in `dt`, and the discrete initial energy is second
//! order in `h`.

use viscodecay::commands::{initial_record, simulate};
use viscodecay::config::{parse_spec, RunSpec};
use viscodecay::energy::energy_identity_residual;

const STABLE: &str = r#"{
    "domain": {"lengths": [1.0], "nodes": [101]},
    "kernel": {"kind": "exponential", "g0": 0.5, "k": 1.0},
    "initial": {"u0": {"profile": "sine-mode", "amplitude": 0.2475}},
    "time": {"dt": 0.004, "t_end": 5.0}
}"#;

fn spec(over: &[String]) -> RunSpec {
    parse_spec(STABLE, over, None).unwrap()
}

#[test]
fn identity_residual_is_first_order_in_dt() {
    let residuals: Vec<f64> = [0.004, 0.002, 0.001]
        .iter()
        .map(|dt| {
            let (traj, _) = simulate(&spec(&[format!("time.dt={dt}")])).unwrap();
            energy_identity_residual(&traj).max_abs
        })
        .collect();
    for w in residuals.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 2.0).abs() < 0.2, "ratio {ratio} from {residuals:?}");
    }
}

#[test]
fn discrete_initial_energy_is_second_order_in_h() {
    let energies: Vec<f64> = [26, 51, 101, 201]
        .iter()
        .map(|n| {
            let s = spec(&[format!("domain.nodes=[{n}]"), "time.dt=0.001".into()]);
            initial_record(&s.setup().unwrap()).unwrap().e
        })
        .collect();
    let diffs: Vec<f64> = energies.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    for w in diffs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio} from {energies:?}");
    }
    // at h = 0.01 the grid error sits far inside the allowance dt + h²
    let allowance = 0.004 + 0.01 * 0.01;
    assert!((energies[2] - energies[3]).abs() / energies[3] < allowance);
}
