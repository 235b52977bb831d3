//! Acceptance suite. Each test prints one `PASS`/`FAIL` line; run with
//! `cargo test -p mzsim-cli --test acceptance -- --nocapture --test-threads=1`
//! to see them in order.

mod common;

use std::f64::consts::PI;

use mzsim::algebra::{apply_element, state_norm, BasisKet, PhotonState, TagVector};
use mzsim::circuit::{builtin_scenario, parse, serialize, Circuit, Scenario};
use mzsim::field::{
    expand_paths, paraxial_error, quad_cell_signal, run_classical, synthesize_field,
    total_intensity_spectrum, ClassicalRun, SimGrid, Variant,
};
use mzsim::quantum::{mirror_weights, propagate};
use mzsim::spectral::{compare_weights, power_spectrum};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::{dense_weights, manifest_path, mzsim, random_circuit_text};

const EXACT: f64 = 1e-12;
const BALANCE: f64 = 0.02;
const SUPPRESSION: f64 = 1e-6;
const MAX_DEVIATION: f64 = 0.02;
const PARSEVAL: f64 = 1e-9;

fn verdict(id: u32, what: &str, ok: bool, detail: String) {
    println!(
        "{} C{id:<2} {what}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {id} failed: {detail}");
}

fn sweep() -> Vec<f64> {
    (0..=6).map(|k| k as f64 * PI / 6.0).collect()
}

fn classical(s: Scenario, phi: Option<f64>) -> ClassicalRun {
    run_classical(
        &builtin_scenario(s),
        phi,
        &SimGrid::default(),
        Variant::Exact,
        1,
    )
    .unwrap()
}

fn w(run_table: &mzsim::WeightTable, label: &str) -> f64 {
    run_table.get(label).unwrap()
}

#[test]
fn c01_final_state_amplitudes() {
    let third = 1.0 / 3.0;
    let mut worst: f64 = 0.0;
    for phi in [0.0, PI] {
        let c = builtin_scenario(Scenario::A);
        let state = propagate(&c, Some(phi)).unwrap();
        let want = [
            ("00100", Complex64::new(third, 0.0)),
            ("01011", Complex64::new(-third, 0.0)),
            ("10011", Complex64::from_polar(third, phi)),
        ];
        assert_eq!(state.len(), 3, "unexpected extra terms at phi={phi}");
        for (bits, amp) in want {
            let tag = TagVector::from_bits(bits).unwrap();
            let got = state.amplitude(&BasisKet {
                mode: c.detector,
                tag,
            });
            worst = worst.max((got - amp).norm());
        }
    }
    verdict(
        1,
        "final state matches (|00100> - |01011> + e^{iφ}|10011>)/3",
        worst <= EXACT,
        format!("max |Δamp| = {worst:.2e}"),
    );
}

#[test]
fn c02_postselection_table() {
    let mut worst: f64 = 0.0;
    for phi in sweep().into_iter().chain([PI]) {
        let c = builtin_scenario(Scenario::A);
        let table = mirror_weights(&propagate(&c, Some(phi)).unwrap(), &c).unwrap();
        for l in ["A", "B", "C"] {
            worst = worst.max((w(&table, l) - 1.0 / 9.0).abs());
        }
        if phi == 0.0 || phi == PI {
            let ef = if phi == 0.0 { 0.0 } else { 4.0 / 9.0 };
            for l in ["E", "F"] {
                worst = worst.max((w(&table, l) - ef).abs());
            }
        }
    }
    verdict(
        2,
        "weights A,B,C = 1/9; E,F = 0 at φ=0 and 4/9 at φ=π",
        worst <= EXACT,
        format!("max error = {worst:.2e}"),
    );
}

#[test]
fn c03_phi_sweep_law_with_dense_oracle() {
    let mut worst_law: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    for phi in sweep() {
        let c = builtin_scenario(Scenario::A).with_phase(phi).unwrap();
        let table = mirror_weights(&propagate(&c, None).unwrap(), &c).unwrap();
        let law = 4.0 / 9.0 * (phi / 2.0).sin().powi(2);
        for l in ["E", "F"] {
            worst_law = worst_law.max((w(&table, l) - law).abs());
        }
        for (got, dense) in table.entries.iter().map(|e| e.1).zip(dense_weights(&c)) {
            worst_oracle = worst_oracle.max((got - dense).abs());
        }
    }
    let ok = worst_law <= EXACT && worst_oracle <= EXACT;
    verdict(
        3,
        "E,F = (4/9)sin²(φ/2) over φ = 0..π step π/6; dense oracle agrees",
        ok,
        format!("law error {worst_law:.2e}, oracle error {worst_oracle:.2e}"),
    );
}

#[test]
fn c04_delta_i_peak_ratio() {
    let run = classical(Scenario::A, None);
    let t = &run.delta_i_weights.weights;
    let mut ratios = Vec::new();
    for big in ["E", "F"] {
        for small in ["A", "B", "C"] {
            ratios.push(w(t, big) / w(t, small));
        }
    }
    let worst = ratios
        .iter()
        .map(|r| (r / 4.0 - 1.0).abs())
        .fold(0.0, f64::max);
    verdict(
        4,
        "scenario (a) ΔI peak power ratio (E,F):(A,B,C) = 4",
        worst <= BALANCE,
        format!("ratios {ratios:.4?}"),
    );
}

#[test]
fn c05_scenario_b_three_balanced_peaks() {
    let run = classical(Scenario::B, None);
    let mut details = Vec::new();
    let mut ok = true;
    for (name, t) in [
        ("ΔI", &run.delta_i_weights.weights),
        ("I_T", &run.i_total_weights.weights),
    ] {
        let abc = [w(t, "A"), w(t, "B"), w(t, "C")];
        let max = abc.iter().cloned().fold(f64::MIN, f64::max);
        let min = abc.iter().cloned().fold(f64::MAX, f64::min);
        let spread = max / min - 1.0;
        let ef = w(t, "E").max(w(t, "F")) / w(t, "A");
        ok &= spread <= BALANCE && ef <= SUPPRESSION;
        details.push(format!("{name}: spread {spread:.2e}, E/F vs A {ef:.2e}"));
    }
    verdict(
        5,
        "scenario (b) balanced A,B,C peaks; E,F suppressed",
        ok,
        details.join("; "),
    );
}

#[test]
fn c06_scenario_c_delta_i_null() {
    let a = classical(Scenario::A, None).delta_i.max_abs();
    let c = classical(Scenario::C, None).delta_i.max_abs();
    let ratio = c / a;
    verdict(
        6,
        "scenario (c) ΔI(t) vanishes",
        ratio <= SUPPRESSION,
        format!("max|ΔI_c| / max|ΔI_a| = {ratio:.2e}"),
    );
}

#[test]
fn c07_scenario_c_i_total_peaks() {
    let run = classical(Scenario::C, None);
    let t = &run.i_total_weights.weights;
    let (a, b) = (w(t, "A"), w(t, "B"));
    let balance = (a / b - 1.0).abs();
    let others = ["C", "E", "F"]
        .iter()
        .map(|l| w(t, l) / a)
        .fold(0.0, f64::max);
    verdict(
        7,
        "scenario (c) I_T peaks at A and B only",
        balance <= BALANCE && others <= SUPPRESSION,
        format!("A/B - 1 = {balance:.2e}, max(C,E,F)/A = {others:.2e}"),
    );
}

#[test]
fn c08_quantum_classical_agreement() {
    let mut cases: Vec<(String, Circuit, Option<f64>)> = Scenario::ALL
        .iter()
        .map(|s| (format!("({s})"), builtin_scenario(*s), None))
        .collect();
    for phi in sweep() {
        cases.push((
            format!("φ={phi:.3}"),
            builtin_scenario(Scenario::A),
            Some(phi),
        ));
    }
    let mut worst: f64 = 0.0;
    let mut at = String::new();
    for (name, c, phi) in cases {
        let q = mirror_weights(&propagate(&c, phi).unwrap(), &c).unwrap();
        let run = run_classical(&c, phi, &SimGrid::default(), Variant::Exact, 1).unwrap();
        let dev = compare_weights(&q, &run.i_total_weights.weights)
            .unwrap()
            .max_deviation;
        if dev >= worst {
            worst = dev;
            at = name;
        }
    }
    verdict(
        8,
        "normalised quantum vs classical I_T weights",
        worst <= MAX_DEVIATION,
        format!("max deviation {worst:.2e} at {at}"),
    );
}

#[test]
fn c09_paraxial_convergence() {
    let grid = SimGrid::default();
    let mut ok = true;
    let mut details = Vec::new();
    for s in Scenario::ALL {
        let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&eps| {
                let c = builtin_scenario(s).with_mirror_amplitude(eps);
                let paths = expand_paths(&c, None).unwrap();
                let mirrors: Vec<_> = c.mirrors().cloned().collect();
                paraxial_error(&paths, &grid, &mirrors).unwrap()
            })
            .collect();
        let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
        ok &= ratios.iter().all(|r| (r / 10.0 - 1.0).abs() <= 0.2);
        details.push(format!("({s}) {:.3}, {:.3}", ratios[0], ratios[1]));
    }
    verdict(
        9,
        "exact-vs-paraxial error falls 10x per decade of ε",
        ok,
        format!("ratios {}", details.join("; ")),
    );
}

#[test]
fn c10_parser_round_trip_and_malformed_corpus() {
    let mut failures = Vec::new();
    let round_trip = |text: &str| -> Result<(), String> {
        let c = parse(text).map_err(|d| format!("{d:?}"))?;
        let canon = serialize(&c);
        let again = parse(&canon).map_err(|d| format!("canonical text rejected: {d:?}"))?;
        if again != c || serialize(&again) != canon {
            return Err(format!("round trip changed the circuit:\n{canon}"));
        }
        Ok(())
    };
    for s in Scenario::ALL {
        if let Err(e) = round_trip(&serialize(&builtin_scenario(s))) {
            failures.push(format!("builtin ({s}): {e}"));
        }
    }
    let mut rng = StdRng::seed_from_u64(0x6d7a_6931);
    for i in 0..100 {
        let text = random_circuit_text(&mut rng, false);
        if let Err(e) = round_trip(&text) {
            failures.push(format!("random #{i}: {e}\n{text}"));
        }
    }

    let expected = std::fs::read_to_string(manifest_path("tests/malformed/expected.txt")).unwrap();
    let mut corpus = 0;
    for line in expected
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
    {
        let f: Vec<&str> = line.split_whitespace().collect();
        let path = manifest_path(&format!("tests/malformed/{}", f[0]));
        let out = mzsim(&["check", path.to_str().unwrap()]);
        let stderr = String::from_utf8_lossy(&out.stderr);
        let want = format!("{}:{}:{}: error:", path.display(), f[1], f[2]);
        corpus += 1;
        if out.status.success() || !stderr.contains(&want) {
            failures.push(format!(
                "{}: exit {:?}, stderr {stderr:?}",
                f[0],
                out.status.code()
            ));
        }
        let run = mzsim(&[
            "run",
            "--engine",
            "quantum",
            "--circuit",
            path.to_str().unwrap(),
        ]);
        if run.status.code() != Some(1) {
            failures.push(format!("{}: run exited {:?}", f[0], run.status.code()));
        }
    }
    verdict(
        10,
        "parser round trip (3 built-in + 100 random) and malformed corpus",
        failures.is_empty() && corpus > 0,
        if failures.is_empty() {
            format!("{corpus} malformed cases diagnosed")
        } else {
            failures.join("\n")
        },
    );
}

#[test]
fn c11_conservation() {
    let mut rng = StdRng::seed_from_u64(11);
    let mut worst_norm: f64 = 0.0;
    for _ in 0..100 {
        let c = parse(&random_circuit_text(&mut rng, true)).unwrap();
        let mut state = PhotonState::single(c.labels.len(), c.mirror_count(), c.source).unwrap();
        for el in &c.elements {
            state = apply_element(&state, el).unwrap();
        }
        worst_norm = worst_norm.max((state_norm(&state) - 1.0).abs());
    }

    let grid = SimGrid::default();
    let mut worst_parseval: f64 = 0.0;
    for s in Scenario::ALL {
        let c = builtin_scenario(s);
        let paths = expand_paths(&c, None).unwrap();
        let mirrors: Vec<_> = c.mirrors().cloned().collect();
        let frames = synthesize_field(&paths, &grid, &mirrors, Variant::Exact).unwrap();
        let wy = grid.y_weights();
        let time_energy: f64 = (0..grid.n_t())
            .map(|n| {
                frames
                    .row(n)
                    .iter()
                    .zip(&wy)
                    .map(|(v, w)| w * v.norm_sqr())
                    .sum::<f64>()
                    * grid.dt()
            })
            .sum();
        let spec = total_intensity_spectrum(&frames);
        worst_parseval = worst_parseval.max((spec.energy() / time_energy - 1.0).abs());
        let di = quad_cell_signal(&frames);
        let di_energy: f64 = di.samples.iter().map(|v| v * v).sum::<f64>() * di.dt;
        if di_energy > 0.0 {
            worst_parseval =
                worst_parseval.max((power_spectrum(&di).unwrap().energy() / di_energy - 1.0).abs());
        }
    }
    verdict(
        11,
        "norm conserved without loss; Parseval for I_T and ΔI",
        worst_norm <= EXACT && worst_parseval <= PARSEVAL,
        format!("norm error {worst_norm:.2e}, Parseval error {worst_parseval:.2e}"),
    );
}
