//! Acceptance checks. Each test prints one `PASS`/`FAIL` line; run with
//! `cargo test -p cascade-qed --test acceptance -- --nocapture --test-threads 1`.

use std::f64::consts::PI;
use std::time::Instant;

use cascade_qed::dissipation::{self, dissipation_spectrum, polariton_channel_rates};
use cascade_qed::dynamics::{self, LifetimeAxis, TimeGrid};
use cascade_qed::ensemble::{disorder_sweep, EnsembleAxis};
use cascade_qed::linalg::{c, I};
use cascade_qed::response::{self, linspace, Ports};
use cascade_qed::spectral::{self, eigendecompose, StateClass};
use cascade_qed::{full_heff, mirror_heff, Component, DisorderSpec, Preset, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, pass: bool, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("{tag} [{id:02}] {name}: {detail}");
    assert!(pass, "[{id:02}] {name}: {detail}");
}

/// Fig2 rates expressed with the waveguide rate as unit.
fn gamma_units() -> SystemParams {
    Preset::Fig2
        .params()
        .scaled(1.0 / Preset::Fig2.params().gamma_wg)
}

fn random_params(rng: &mut ChaCha8Rng, max_atoms: usize) -> SystemParams {
    let n = rng.random_range(0..=max_atoms);
    SystemParams {
        g: rng.random_range(0.0..30.0),
        kappa: rng.random_range(0.1..40.0),
        gamma0: rng.random_range(0.0..2.0),
        gamma_wg: rng.random_range(0.1..10.0),
        j0: rng.random_range(0.0..60.0),
        phi_dim: rng.random_range(0.0..PI),
        n_atoms: n,
        varphi: rng.random_range(0.0..2.0 * PI),
        phi1: rng.random_range(0.0..2.0 * PI),
        detunings: (0..n).map(|_| rng.random_range(-5.0..5.0)).collect(),
    }
}

#[test]
fn edge_state_phase_transition() {
    let start = Instant::now();
    let p = SystemParams {
        gamma0: 0.0,
        varphi: 1.5 * PI,
        phi_dim: 0.3 * PI,
        n_atoms: 31,
        ..gamma_units()
    };
    let high: Vec<f64> = (0..=80).map(|k| 1.0 + 0.05 * k as f64).collect();
    let low: Vec<f64> = (0..=4).map(|k| 0.05 * k as f64).collect();
    let hi = spectral::edge_decay_scan(&p, &high).unwrap();
    let lo = spectral::edge_decay_scan(&p, &low).unwrap();
    let worst_hi = hi
        .iter()
        .map(|x| x.decay.unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    let least_lo = lo
        .iter()
        .map(|x| x.decay.unwrap_or(0.0))
        .fold(f64::INFINITY, f64::min);
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        "edge-state transition",
        worst_hi < 1e-6 && least_lo > 1e-2 && secs < 10.0,
        format!(
            "max decay for J0 in [1, 5] Gamma = {worst_hi:.3e} (< 1e-6), min decay for J0 <= 0.2 Gamma = {least_lo:.3e} (> 1e-2), {secs:.2} s (< 10 s)"
        ),
    );
}

#[test]
fn subradiant_polaritons() {
    let p = Preset::Fig2.params();
    let sol = eigendecompose(&full_heff(&p).unwrap()).unwrap();
    let target = 2f64.sqrt() * p.g;
    let mut ok = true;
    let mut detail = Vec::new();
    for (class, sign) in [
        (StateClass::PolaritonPlus, 1.0),
        (StateClass::PolaritonMinus, -1.0),
    ] {
        match sol.find(class) {
            Some(k) => {
                let e = sol.eigenvalues[k];
                let decay = sol.decay_rate(k);
                ok &= (0.3..=0.7).contains(&decay) && (e.re - sign * target).abs() <= 0.05 * target;
                detail.push(format!("{class}: Re E = {:.4}, decay = {:.4}", e.re, decay));
            }
            None => {
                ok = false;
                detail.push(format!("{class} missing"));
            }
        }
    }
    report(
        2,
        "subradiant polaritons",
        ok,
        format!(
            "{} (target +-{target:.4} within 5%, decay in [0.3, 0.7])",
            detail.join("; ")
        ),
    );
}

#[test]
fn bound_polaritons() {
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for kappa in [2.0, 4.0, 8.0] {
        let p = SystemParams {
            gamma0: 0.0,
            kappa,
            ..gamma_units()
        };
        let sol = eigendecompose(&full_heff(&p).unwrap()).unwrap();
        for class in [StateClass::PolaritonPlus, StateClass::PolaritonMinus] {
            let rel = sol
                .find(class)
                .map_or(f64::INFINITY, |k| sol.decay_rate(k) / kappa);
            worst = worst.max(rel);
            detail.push(format!("kappa={kappa} {class}: {rel:.3e} kappa"));
        }
    }
    report(
        3,
        "bound polaritons",
        worst < 1e-3,
        format!("{} (each < 1e-3 kappa)", detail.join(", ")),
    );
}

#[test]
fn lifetime_enhancement() {
    let p = Preset::Fig2.params();
    let grid = TimeGrid::default_for(&p);
    let tau0 = dynamics::reference_lifetime(&p, grid).unwrap();
    let lt = dynamics::qe_lifetime(&full_heff(&p).unwrap(), grid).unwrap();
    let ratio = lt.tau / tau0.tau;
    let expect0 = 2.0 / (p.kappa + p.gamma0);
    let tau0_ok = (tau0.tau - expect0).abs() <= 0.1 * expect0;
    report(
        4,
        "lifetime enhancement",
        lt.crossed && ratio > 10.0 && lt.peaks_before >= 11 && tau0_ok,
        format!(
            "tau_TO/tau_0 = {ratio:.3} (> 10), Rabi maxima before crossing = {} (>= 11; raw local maxima {}), tau_0 = {:.5} vs {expect0:.5} (10%)",
            lt.peaks_before, lt.raw_maxima_before, tau0.tau
        ),
    );
}

#[test]
fn optimal_phase() {
    let p = Preset::Fig2.params();
    let v = linspace(1.3 * PI, 1.7 * PI, 41);
    let step = v[1] - v[0];
    let sweep = dynamics::lifetime_enhancement_sweep(
        &p,
        &LifetimeAxis::Varphi(v.clone()),
        TimeGrid::default_for(&p),
    )
    .unwrap();
    let r = sweep.ratios();
    let k = (0..r.len()).max_by(|&a, &b| r[a].total_cmp(&r[b])).unwrap();
    report(
        5,
        "optimal phase",
        (v[k] - 1.5 * PI).abs() <= step + 1e-12,
        format!(
            "argmax varphi = {:.4} pi (ratio {:.3}), grid step {:.4} pi",
            v[k] / PI,
            r[k],
            step / PI
        ),
    );
}

#[test]
fn critical_onset() {
    let p = Preset::Fig2.params();
    let gw = p.gamma_wg;
    let sweep = dynamics::lifetime_enhancement_sweep(
        &p,
        &LifetimeAxis::J0(vec![3.5 * gw, 6.0 * gw]),
        TimeGrid::default_for(&p),
    )
    .unwrap();
    let r = sweep.ratios();
    let jc = p.critical_j0() / gw;
    report(
        6,
        "critical onset",
        r[1] > 3.0 * r[0],
        format!("ratio(6 Gamma) = {:.3}, ratio(3.5 Gamma) = {:.3}, factor {:.3} (> 3), J0c = {jc:.3} Gamma", r[1], r[0], r[1] / r[0]),
    );
}

#[test]
fn flux_conservation() {
    let p = SystemParams {
        gamma0: 0.0,
        ..Preset::Fig2.params()
    };
    let full = full_heff(&p).unwrap();
    let mirror = mirror_heff(&p).unwrap();
    let a = response::reflection_transmission(&full, &response::default_delta_grid(&full))
        .unwrap()
        .flux_defect();
    let b = response::reflection_transmission(&mirror, &response::default_delta_grid(&mirror))
        .unwrap()
        .flux_defect();
    report(
        7,
        "flux conservation",
        a < 1e-8 && b < 1e-8,
        format!("max |R+T-1| = {a:.3e} (full), {b:.3e} (mirror only); 2001 detunings each"),
    );
}

#[test]
fn single_emitter_oracle() {
    let p = SystemParams {
        g: 0.0,
        kappa: 0.0,
        phi1: 0.0,
        ..Preset::Fig2.params().with_n_atoms(1)
    };
    let (gw, g0) = (p.gamma_wg, p.gamma0);
    let h = full_heff(&p).unwrap();
    let ports = Ports::new(&h);
    let mut worst: f64 = 0.0;
    for d in linspace(-20.0, 20.0, 2001) {
        let (r, _) = response::scattering_amplitudes(&h, &ports, d).unwrap();
        let oracle = -gw / (c(gw + g0 / 2.0, 0.0) - I * d);
        worst = worst.max((r - oracle).norm());
    }
    report(
        8,
        "single-emitter oracle",
        worst < 1e-10,
        format!("max |r - r_oracle| = {worst:.3e} (< 1e-10)"),
    );
}

#[test]
fn trivial_mirror_reflection() {
    let p = SystemParams {
        g: 0.0,
        kappa: 0.0,
        j0: 0.0,
        ..Preset::Fig2.params()
    };
    let h = mirror_heff(&p).unwrap();
    let r = response::reflection_transmission(&h, &[0.0])
        .unwrap()
        .reflection
        .values[0];
    report(
        9,
        "trivial mirror reflection",
        (r - 0.68).abs() <= 0.05,
        format!("R(0) = {r:.4} (0.68 +- 0.05)"),
    );
}

#[test]
fn emission_sum_rule_and_shape() {
    let mut detail = Vec::new();
    let mut ok = true;
    for preset in [Preset::Fig2, Preset::Fig3Weak, Preset::Fig3Strong] {
        let h = full_heff(&preset.params()).unwrap();
        let total = response::emission_integral(&h, 20001).unwrap();
        ok &= (total - PI).abs() <= 0.01 * PI;
        detail.push(format!("{}: int S = {:.5} pi", preset.name(), total / PI));
    }
    let bare = SystemParams {
        g: 0.0,
        ..Preset::Fig2.params().without_mirror()
    };
    let w = linspace(-50.0, 50.0, 2001);
    let s = response::emission_spectrum(&full_heff(&bare).unwrap(), &w).unwrap();
    let g0 = bare.gamma0;
    let lor = w
        .iter()
        .zip(&s.values)
        .map(|(x, v)| (v - (g0 / 2.0) / (x * x + g0 * g0 / 4.0)).abs())
        .fold(0.0, f64::max);
    ok &= lor < 1e-8;
    detail.push(format!("bare QE Lorentzian error {lor:.2e}"));

    let p = Preset::Fig2.params();
    let h = full_heff(&p).unwrap();
    let sol = eigendecompose(&h).unwrap();
    for class in [StateClass::PolaritonPlus, StateClass::PolaritonMinus] {
        let e = sol.eigenvalues[sol.find(class).unwrap()].re;
        let w = linspace(e - 3.0, e + 3.0, 6001);
        let s = response::emission_spectrum(&h, &w).unwrap();
        let k = s.argmax().unwrap();
        let f = response::fwhm(&w, &s.values, k).unwrap_or(f64::INFINITY);
        ok &= f < p.gamma0;
        detail.push(format!("{class} peak at {:.3}, FWHM {f:.4}", w[k]));
    }
    report(10, "emission sum rule and shape", ok, detail.join("; "));
}

#[test]
fn dissipation_form_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut form_err: f64 = 0.0;
    let mut sum_err: f64 = 0.0;
    let mut polariton_draws = 0;
    for _ in 0..50 {
        let p = random_params(&mut rng, 12);
        let h = full_heff(&p).unwrap();
        let a = h.dissipation_matrix();
        let b = dissipation::channel_form(&h);
        for i in 0..h.dim() {
            for j in 0..h.dim() {
                form_err = form_err.max((a[(i, j)] - b[(i, j)]).norm());
            }
        }
        let d = dissipation_spectrum(&h).unwrap();
        let sol = eigendecompose(&h).unwrap();
        if let Ok(r) = polariton_channel_rates(&h, &sol, &d) {
            polariton_draws += 1;
            for x in [&r.plus, &r.minus] {
                let s: f64 = x.per_channel.iter().sum();
                sum_err = sum_err.max((s - x.total).abs() / x.total.abs().max(1e-300));
            }
        }
    }
    let mut rank_ok = true;
    for p in [Preset::Fig2.params(), Preset::Fig3Weak.params()] {
        let p = SystemParams { gamma0: 0.0, ..p };
        rank_ok &= dissipation_spectrum(&full_heff(&p).unwrap())
            .unwrap()
            .rank(1e-10)
            == 2;
    }
    report(
        11,
        "dissipation-form exactness",
        form_err < 1e-12 && sum_err < 1e-10 && rank_ok && polariton_draws > 0,
        format!(
            "max elementwise error {form_err:.2e} (< 1e-12), channel-sum rel error {sum_err:.2e} over {polariton_draws} draws (< 1e-10), rank 2 at gamma0 = 0: {rank_ok}"
        ),
    );
}

#[test]
fn oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut prop_err: f64 = 0.0;
    let mut spec_err: f64 = 0.0;
    let mut compared = 0;
    for _ in 0..20 {
        let p = random_params(&mut rng, 8);
        let h = full_heff(&p).unwrap();
        let s0 = dynamics::excite(&h, Component::Qe).unwrap();
        let times = linspace(0.0, 0.5, 51);
        let a = dynamics::propagate_eigen(&h, &s0, &times).unwrap();
        let b = dynamics::propagate_integrator(&h, &s0, &times).unwrap();
        for (x, y) in a.amplitudes.iter().zip(&b.amplitudes) {
            for (u, v) in x.iter().zip(y) {
                prop_err = prop_err.max((u - v).norm());
            }
        }
        let res = response::EigenResolvent::new(&h).unwrap();
        if res.condition < 1e6 {
            compared += 1;
            let d = linspace(-60.0, 60.0, 241);
            let x = response::reflection_transmission(&h, &d).unwrap();
            let y = response::reflection_transmission_eigen(&h, &d).unwrap();
            let sx = response::emission_spectrum(&h, &d).unwrap();
            let sy = response::emission_spectrum_eigen(&h, &d).unwrap();
            for k in 0..d.len() {
                spec_err = spec_err
                    .max((x.reflection.values[k] - y.reflection.values[k]).abs())
                    .max((x.transmission.values[k] - y.transmission.values[k]).abs())
                    .max((sx.values[k] - sy.values[k]).abs());
            }
        }
    }
    report(
        12,
        "oracle equivalence",
        prop_err < 1e-6 && spec_err < 1e-8,
        format!("propagation max diff {prop_err:.2e} (< 1e-6), spectra max diff {spec_err:.2e} over {compared} well-conditioned systems (< 1e-8)"),
    );
}

#[test]
fn disorder_robustness() {
    let start = Instant::now();
    let p = Preset::Fig2.params();
    let gw = p.gamma_wg;
    let grid = TimeGrid::default_for(&p);
    let pos = DisorderSpec {
        position_frac: 0.02,
        seed: 2024,
        ..Default::default()
    };
    let a = disorder_sweep(&p, &pos, &EnsembleAxis::J0(vec![8.0 * gw]), grid).unwrap();
    let sa = a.points[0].stats.unwrap();

    let freq = DisorderSpec {
        frequency_halfwidth: p.g / 2f64.sqrt(),
        seed: 2024,
        ..Default::default()
    };
    let c_ = disorder_sweep(&p, &freq, &EnsembleAxis::J0(vec![10.0 * gw]), grid).unwrap();
    let sc = c_.points[0].stats.unwrap();
    let clean = dynamics::lifetime_enhancement_sweep(&p, &LifetimeAxis::J0(vec![10.0 * gw]), grid)
        .unwrap()
        .ratios()[0];
    let change = (sc.mean - clean).abs() / clean;
    report(
        13,
        "disorder robustness",
        sa.count == 100 && sa.mean > 10.0 && sc.count == 100 && change < 0.5,
        format!(
            "position 2% at 8 Gamma: mean {:.3} +- {:.3} (> 10, {} runs); frequency g/sqrt2 at 10 Gamma: mean {:.3} vs clean {clean:.3}, change {:.1}% (< 50%); {:.1} s",
            sa.mean,
            sa.std,
            sa.count,
            sc.mean,
            100.0 * change,
            start.elapsed().as_secs_f64()
        ),
    );
}
