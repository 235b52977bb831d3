use std::collections::BTreeMap;

use mzsim::algebra::TagVector;
use mzsim::circuit::{builtin_scenario, builtin_source, parse, serialize, Circuit, Scenario};
use mzsim::field::expand_paths;
use mzsim::quantum::propagate;
use num_complex::Complex64;
use proptest::prelude::*;

/// Classical path amplitudes summed per visited-mirror set, keyed by tag.
fn paths_by_tag(c: &Circuit, phi: Option<f64>) -> BTreeMap<String, Complex64> {
    let mut out = BTreeMap::new();
    for p in expand_paths(c, phi).unwrap() {
        let mut tag = TagVector::zeros(c.mirror_count()).unwrap();
        for &i in &p.mirrors {
            tag = tag.with_set(i).unwrap();
        }
        *out.entry(tag.to_string()).or_default() += p.amplitude;
    }
    out.retain(|_, a: &mut Complex64| a.norm() > 1e-15);
    out
}

fn state_by_tag(c: &Circuit, phi: Option<f64>) -> BTreeMap<String, Complex64> {
    propagate(c, phi)
        .unwrap()
        .terms()
        .map(|(k, a)| (k.tag.to_string(), *a))
        .collect()
}

fn assert_same(a: &BTreeMap<String, Complex64>, b: &BTreeMap<String, Complex64>) {
    assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>());
    for (k, v) in a {
        assert!((v - b[k]).norm() < 1e-14, "{k}: {v} vs {}", b[k]);
    }
}

#[test]
fn builtin_text_parses_to_builtin_circuit() {
    for s in Scenario::ALL {
        let c = parse(&builtin_source(s)).unwrap();
        assert_eq!(c, builtin_scenario(s));
        assert_eq!(parse(&serialize(&c)).unwrap(), c);
    }
}

#[test]
fn path_expansion_matches_quantum_state_for_builtins() {
    for s in Scenario::ALL {
        let c = builtin_scenario(s);
        assert_same(&paths_by_tag(&c, None), &state_by_tag(&c, None));
    }
}

#[test]
fn blocked_lower_arm_loses_only_its_share() {
    let state = propagate(&builtin_scenario(Scenario::C), None).unwrap();
    assert!((state.lost_norm - 7.0 / 9.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn path_expansion_matches_quantum_state(phi in -7.0..7.0f64, t in 0.05..1.0f64, theta in -3.0..3.0f64) {
        let text = format!(
            "source s\n\
             bs P in=(s,) out=(s,q) t={t}\n\
             mirror M1 path=s freq=100 amp=1e-3\n\
             phase path=q phi={phi}\n\
             mirror M2 path=q freq=150 amp=1e-3 phase={theta}\n\
             bs Q in=(s,q) out=(q,s) t=1/sqrt(2)\n\
             mirror M3 path=s freq=175 amp=1e-3\n\
             bs R in=(s,q) out=(s,q) t={t}\n\
             discard q\n\
             detect s\n"
        );
        let c = parse(&text).unwrap();
        assert_same(&paths_by_tag(&c, None), &state_by_tag(&c, None));
    }

    #[test]
    fn phi_override_equals_rewritten_circuit(phi in -7.0..7.0f64) {
        let base = builtin_scenario(Scenario::A);
        let rewritten = base.with_phase(phi).unwrap();
        prop_assert_eq!(propagate(&base, Some(phi)).unwrap(), propagate(&rewritten, None).unwrap());
    }
}

#[test]
fn paraxial_error_stays_below_ten_eps() {
    use mzsim::field::{paraxial_error, SimGrid};
    let grid = SimGrid {
        n_y: 257,
        ..SimGrid::default()
    };
    for s in Scenario::ALL {
        for eps in [1e-2, 1e-3, 1e-4] {
            let c = builtin_scenario(s).with_mirror_amplitude(eps);
            let mirrors: Vec<_> = c.mirrors().cloned().collect();
            let err = paraxial_error(&expand_paths(&c, None).unwrap(), &grid, &mirrors).unwrap();
            assert!(err <= 10.0 * eps, "({s}) eps={eps}: {err:e}");
            assert!(err >= 0.01 * eps, "({s}) eps={eps}: {err:e} is suspiciously small");
        }
    }
}
