use super::*;
use crate::error::Error;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn parallel_rlc(r: f64, l: f64, c: f64) -> CircuitNetwork {
    CircuitNetwork::new(
        vec![
            CircuitElement::new(ElementKind::Resistor, r, "top", "gnd").unwrap(),
            CircuitElement::new(ElementKind::Inductor, l, "top", "gnd").unwrap(),
            CircuitElement::new(ElementKind::Capacitor, c, "top", "gnd").unwrap(),
        ],
        "gnd",
        "top",
    )
    .unwrap()
}

#[test]
fn single_capacitor_stamp() {
    let net = CircuitNetwork::new(
        vec![CircuitElement::new(ElementKind::Capacitor, 1e-12, "n", "gnd").unwrap()],
        "gnd",
        "n",
    )
    .unwrap();
    let omega = TAU * 1e9;
    let y = admittance_matrix(&net, omega).unwrap();
    assert_eq!(y.nrows(), 1);
    assert_eq!(y[(0, 0)], c64::new(0.0, omega * 1e-12));
}

#[test]
fn zero_valued_element_is_rejected() {
    assert!(CircuitElement::new(ElementKind::Resistor, 0.0, "a", "b").is_err());
    assert!(CircuitElement::new(ElementKind::Inductor, -1e-9, "a", "b").is_err());
    assert!(CircuitElement::new(ElementKind::Resistor, 1.0, "a", "a").is_err());
}

#[test]
fn disconnected_network_is_rejected() {
    let err = CircuitNetwork::new(
        vec![
            CircuitElement::new(ElementKind::Resistor, 1.0, "a", "gnd").unwrap(),
            CircuitElement::new(ElementKind::Resistor, 1.0, "x", "y").unwrap(),
        ],
        "gnd",
        "a",
    )
    .unwrap_err();
    assert!(err.to_string().contains("not connected"));
}

fn random_network(rng: &mut ChaCha8Rng) -> CircuitNetwork {
    let n_nodes = rng.random_range(3..8usize);
    let names: Vec<String> = (0..n_nodes).map(|k| format!("n{k}")).collect();
    let mut elements = Vec::new();
    let mut random_element = |rng: &mut ChaCha8Rng, a: &str, b: &str| {
        let kind = match rng.random_range(0..3) {
            0 => ElementKind::Resistor,
            1 => ElementKind::Inductor,
            _ => ElementKind::Capacitor,
        };
        let value = match kind {
            ElementKind::Resistor => 10f64.powf(rng.random_range(0.0..6.0)),
            ElementKind::Inductor => 10f64.powf(rng.random_range(-10.0..-7.0)),
            ElementKind::Capacitor => 10f64.powf(rng.random_range(-16.0..-12.0)),
        };
        CircuitElement::new(kind, value, a, b).unwrap()
    };
    // spanning chain keeps it connected, then a few extra edges
    for k in 1..n_nodes {
        let e = random_element(rng, &names[k - 1], &names[k]);
        elements.push(e);
    }
    for _ in 0..rng.random_range(1..2 * n_nodes) {
        let a = rng.random_range(0..n_nodes);
        let b = rng.random_range(0..n_nodes);
        if a != b {
            let e = random_element(rng, &names[a], &names[b]);
            elements.push(e);
        }
    }
    CircuitNetwork::new(elements, "n0", "n1").unwrap()
}

#[test]
fn admittance_matrix_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let net = random_network(&mut rng);
        let omega = TAU * 10f64.powf(rng.random_range(8.0..10.0));
        let y = admittance_matrix(&net, omega).unwrap();
        for i in 0..y.nrows() {
            for j in 0..y.ncols() {
                assert_eq!(y[(i, j)], y[(j, i)]);
            }
        }
    }
}

#[test]
fn nodal_and_mesh_formulations_agree_on_random_networks() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for trial in 0..100 {
        let net = random_network(&mut rng);
        let omega = TAU * 10f64.powf(rng.random_range(8.0..10.0));
        let z_nodal = driving_point_impedance(&net, omega).unwrap();
        let z_mesh = driving_point_impedance_mesh(&net, omega).unwrap();
        let rel = (z_nodal - z_mesh).norm() / z_nodal.norm();
        assert!(rel < 1e-9, "trial {trial}: nodal {z_nodal} vs mesh {z_mesh} rel {rel:.3e}");
    }
}

#[test]
fn passivity_on_random_networks() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    for _ in 0..100 {
        let net = random_network(&mut rng);
        let omega = TAU * 10f64.powf(rng.random_range(8.0..10.0));
        let z = driving_point_impedance(&net, omega).unwrap();
        assert!(z.re >= -1e-9 * z.norm(), "Re Z = {} < 0", z.re);
    }
}

#[test]
fn nominal_network_nodal_vs_mesh_at_3_ghz() {
    let net = build_network(&WirebondModelParams::nominal()).unwrap();
    let omega = TAU * 3e9;
    let z_nodal = driving_point_impedance(&net, omega).unwrap();
    let z_mesh = driving_point_impedance_mesh(&net, omega).unwrap();
    assert!((z_nodal - z_mesh).norm() / z_nodal.norm() < 1e-9);
}

#[test]
fn parallel_lc_peaks_at_closed_form_frequency() {
    let (r, l, c) = (50e3, 20e-9, 130.8e-15);
    let net = parallel_rlc(r, l, c);
    let f0 = 1.0 / (TAU * (l * c).sqrt());
    let res = find_resonances(&net, 0.5 * f0, 1.5 * f0, 2001).unwrap();
    assert_eq!(res.len(), 1);
    assert!((res[0].freq - f0).abs() / f0 < 1e-6, "found {} vs {}", res[0].freq, f0);
    // parallel RLC: FWHM = f0 / Q with Q = R sqrt(C/L)
    let q = r * (c / l).sqrt();
    assert!((res[0].linewidth - f0 / q).abs() / (f0 / q) < 1e-3);
}

#[test]
fn narrow_resonance_linewidth_uses_curvature_fallback() {
    // Q ~ 9.5e4: 3 dB width ~ 33 kHz, far below the coarse grid step.
    let p = WirebondModelParams::nominal();
    let net = microwave_branch_network(&p).unwrap();
    let f0 = p.microwave_resonance_hz();
    let res = find_resonances(&net, 0.8 * f0, 1.2 * f0, 2001).unwrap();
    assert_eq!(res.len(), 1);
    let q = p.r_mw * (p.c_mw / p.l_mw).sqrt();
    let expected = res[0].freq / q;
    assert!(
        (res[0].linewidth - expected).abs() / expected < 1e-2,
        "linewidth {} vs {}",
        res[0].linewidth,
        expected
    );
}

#[test]
fn series_inductance_shifts_tank_resonance_down() {
    let (r, l, c) = (50e3, 20e-9, 130.8e-15);
    let plain = parallel_rlc(r, l, c);
    let l_extra = 2e-9;
    let loaded = CircuitNetwork::new(
        vec![
            CircuitElement::new(ElementKind::Resistor, r, "top", "gnd").unwrap(),
            CircuitElement::new(ElementKind::Inductor, l, "top", "mid").unwrap(),
            CircuitElement::new(ElementKind::Inductor, l_extra, "mid", "gnd").unwrap(),
            CircuitElement::new(ElementKind::Capacitor, c, "top", "gnd").unwrap(),
        ],
        "gnd",
        "top",
    )
    .unwrap();
    let f0 = 1.0 / (TAU * (l * c).sqrt());
    let f_loaded_expected = 1.0 / (TAU * ((l + l_extra) * c).sqrt());
    let res0 = find_resonances(&plain, 0.5 * f0, 1.5 * f0, 2001).unwrap();
    let res1 = find_resonances(&loaded, 0.5 * f0, 1.5 * f0, 2001).unwrap();
    assert_eq!((res0.len(), res1.len()), (1, 1));
    assert!(res1[0].freq < res0[0].freq);
    assert!((res1[0].freq - f_loaded_expected).abs() / f_loaded_expected < 1e-6);
}

#[test]
fn resonance_search_preconditions() {
    let net = parallel_rlc(1e3, 1e-9, 1e-12);
    assert!(matches!(find_resonances(&net, 1e9, 1e9, 1000), Err(Error::Precondition(_))));
    assert!(matches!(find_resonances(&net, 2e9, 1e9, 1000), Err(Error::Precondition(_))));
    assert!(matches!(find_resonances(&net, 1e8, 1e9, 50), Err(Error::Precondition(_))));
}

#[test]
fn flat_impedance_has_no_resonances() {
    let net = CircuitNetwork::new(
        vec![CircuitElement::new(ElementKind::Resistor, 50.0, "n", "gnd").unwrap()],
        "gnd",
        "n",
    )
    .unwrap();
    let res = find_resonances(&net, 1e9, 2e9, 500).unwrap();
    assert!(res.is_empty());
}

#[test]
fn nominal_values_match_quoted_characteristic_impedance() {
    let p = WirebondModelParams::nominal();
    let z = p.characteristic_impedance();
    assert!((z - 391.0).abs() < 1.0, "Z = {z}");
    // quoted as ~400 Ohm for this tank
    assert!((z - 400.0).abs() / 400.0 < 0.05);
}

#[test]
fn built_network_is_connected_with_expected_element_count() {
    let p = WirebondModelParams::nominal();
    let net = build_network(&p).unwrap();
    assert_eq!(net.elements.len(), 17);
    assert_eq!(net.probe, "mw");
    // microwave-side placement drops the ground-bond shunt
    let alt = WirebondModelParams { c_p_side: CpPlacement::MicrowaveSide, ..p };
    let net2 = build_network(&alt).unwrap();
    assert_eq!(net2.elements.len(), 16);
}

#[test]
fn near_galvanic_limit_keeps_network_valid() {
    let p = WirebondModelParams {
        length: 1e-9,
        c_p: 1e-22,
        c_pwb_per_mm: 1e-22,
        ..WirebondModelParams::nominal()
    };
    let net = build_network(&p).unwrap();
    // still solvable at band frequencies
    let z = driving_point_impedance(&net, TAU * 3e9).unwrap();
    assert!(z.norm().is_finite());
}

#[test]
fn band_consistent_network_shows_two_resonances_in_band() {
    let p = WirebondModelParams::band_consistent();
    let net = build_network(&p).unwrap();
    let res = find_resonances(&net, 1e9, 5e9, 20_000).unwrap();
    assert!(
        res.len() == 2,
        "expected mechanics-like and microwave-like resonances, got {:?}",
        res.iter().map(|r| r.freq / 1e9).collect::<Vec<_>>()
    );
}

#[test]
fn two_lc_avoided_crossing_matches_analytic_splitting() {
    // two parallel LC tanks coupled by a capacitor: normal-mode splitting at
    // degeneracy is omega0 (1/sqrt(1-beta) - 1/sqrt(1+beta)) with
    // beta = Cc / sqrt((C1+Cc)(C2+Cc)).
    let (l1, c1) = (10e-9, 200e-15);
    let (l2, c2) = (8e-9, 260e-15);
    let cc = 4e-15;
    let big_r = 1e6;
    let build = |trim: f64| -> crate::error::Result<CircuitNetwork> {
        CircuitNetwork::new(
            vec![
                CircuitElement::new(ElementKind::Resistor, big_r, "a", "gnd")?,
                CircuitElement::new(ElementKind::Inductor, l1, "a", "gnd")?,
                CircuitElement::new(ElementKind::Capacitor, c1, "a", "gnd")?,
                CircuitElement::new(ElementKind::Resistor, big_r, "b", "gnd")?,
                CircuitElement::new(ElementKind::Inductor, l2 * trim, "b", "gnd")?,
                CircuitElement::new(ElementKind::Capacitor, c2, "b", "gnd")?,
                CircuitElement::new(ElementKind::Capacitor, cc, "a", "b")?,
            ],
            "gnd",
            "a",
        )
    };
    let f1 = 1.0 / (TAU * (l1 * (c1 + cc)).sqrt());
    let beta = cc / ((c1 + cc) * (c2 + cc)).sqrt();
    let analytic_gap = f1 * (1.0 / (1.0 - beta).sqrt() - 1.0 / (1.0 + beta).sqrt());

    // center the trim scan where tank b would cross tank a
    let f2 = 1.0 / (TAU * (l2 * (c2 + cc)).sqrt());
    let center = (f2 / f1).powi(2);
    let search = CrossingSearch {
        f_center: f1,
        window_frac: 0.06,
        n_grid: 4000,
        trim_lo: center * 0.9,
        trim_hi: center * 1.1,
        n_trim: 21,
    };
    let g = extract_coupling(build, &search).unwrap();
    let rel = (2.0 * g - analytic_gap).abs() / analytic_gap;
    assert!(rel < 0.01, "2g = {} vs analytic {} (rel {rel:.3e})", 2.0 * g, analytic_gap);
}

#[test]
fn crossing_error_when_trim_scan_misses() {
    let p = WirebondModelParams::band_consistent();
    let search = CrossingSearch {
        f_center: p.mechanical_resonance_hz(),
        window_frac: 0.05,
        n_grid: 2000,
        trim_lo: 8.0,
        trim_hi: 10.0,
        n_trim: 5,
    };
    let err = extract_coupling(|s| build_network_with_trim(&p, s), &search).unwrap_err();
    assert!(matches!(err, Error::CrossingNotBracketed(_)));
}
