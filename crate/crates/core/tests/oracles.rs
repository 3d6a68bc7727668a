use std::f64::consts::PI;

use cascade_qed::dissipation::{dissipation_spectrum, polariton_channel_rates, ChannelLabel};
use cascade_qed::dynamics::{self, TimeGrid};
use cascade_qed::response::{self, linspace};
use cascade_qed::spectral::{eigendecompose, StateClass};
use cascade_qed::{full_heff, mirror_heff, Component, Preset, SystemParams};

fn maxima_times(t: &[f64], p: &[f64]) -> Vec<f64> {
    (1..p.len() - 1)
        .filter(|&i| p[i] > p[i - 1] && p[i] >= p[i + 1] && p[i] > 1e-3)
        .map(|i| t[i])
        .collect()
}

#[test]
fn rabi_period_survives_the_mirror() {
    let p = Preset::Fig2.params();
    let t = linspace(0.0, 0.6, 6001);
    let period = |params: &SystemParams| {
        let h = full_heff(params).unwrap();
        let s0 = dynamics::excite(&h, Component::Qe).unwrap();
        let pop = dynamics::component_population(&h, &s0, Component::Qe, &t).unwrap();
        let m = maxima_times(&t, &pop);
        (m[m.len() - 1] - m[0]) / (m.len() - 1) as f64
    };
    let bare = period(&p.without_mirror());
    let with = period(&p);
    assert!((with - bare).abs() < 0.05 * bare, "{with} vs {bare}");
}

#[test]
fn mirror_slows_decay_below_free_space() {
    let p = Preset::Fig2.params();
    let lt = dynamics::qe_lifetime(&full_heff(&p).unwrap(), TimeGrid::default_for(&p)).unwrap();
    assert!(lt.tau > 1.0 / p.gamma0);
}

#[test]
fn lossless_emitter_keeps_population() {
    let p = SystemParams {
        gamma0: 0.0,
        ..Preset::Fig2.params().scaled(0.2)
    };
    let h = full_heff(&p).unwrap();
    let s0 = dynamics::excite(&h, Component::Qe).unwrap();
    let t = linspace(0.0, 100.0, 20001);
    let pop = dynamics::component_population(&h, &s0, Component::Qe, &t).unwrap();
    // envelope over each Rabi window stays finite
    let window = 400;
    let floor = pop
        .chunks(window)
        .map(|c| c.iter().copied().fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min);
    assert!(floor > 1e-3, "{floor}");
}

#[test]
fn weak_coupling_reflection_dips_split_by_rabi() {
    let p = Preset::Fig3Weak.params();
    let h = full_heff(&p).unwrap();
    let split = 2.0 * 2f64.sqrt() * p.g;
    let d = linspace(-2.0 * split, 2.0 * split, 4001);
    let r = response::reflection_transmission(&h, &d)
        .unwrap()
        .reflection
        .values;
    let inner: Vec<usize> = (1..d.len() - 1)
        .filter(|&i| {
            r[i] < r[i - 1]
                && r[i] <= r[i + 1]
                && d[i].abs() > 0.25 * split
                && d[i].abs() < 0.75 * split
        })
        .collect();
    let neg = inner
        .iter()
        .filter(|&&i| d[i] < 0.0)
        .min_by(|&&a, &&b| r[a].total_cmp(&r[b]))
        .unwrap();
    let pos = inner
        .iter()
        .filter(|&&i| d[i] > 0.0)
        .min_by(|&&a, &&b| r[a].total_cmp(&r[b]))
        .unwrap();
    let gap = d[*pos] - d[*neg];
    assert!((gap - split).abs() < 0.15 * split, "{gap} vs {split}");
}

#[test]
fn emission_peaks_sit_on_polariton_poles() {
    let p = Preset::Fig2.params();
    let h = full_heff(&p).unwrap();
    let sol = eigendecompose(&h).unwrap();
    for class in [StateClass::PolaritonPlus, StateClass::PolaritonMinus] {
        let k = sol.find(class).unwrap();
        let (e, width) = (sol.eigenvalues[k].re, sol.decay_rate(k));
        let w = linspace(e - 2.0, e + 2.0, 4001);
        let s = response::emission_spectrum(&h, &w).unwrap();
        let peak = w[s.argmax().unwrap()];
        // neighbouring poles pull the maximum slightly off Re E
        assert!(
            (peak - e).abs() < 0.02 * width,
            "peak {peak} pole {e} width {width}"
        );
    }
}

#[test]
fn polariton_channels_account_for_decay() {
    for phi in linspace(0.1 * PI, 0.9 * PI, 9) {
        let p = SystemParams {
            phi_dim: phi,
            ..Preset::Fig2.params()
        };
        let h = full_heff(&p).unwrap();
        let sol = eigendecompose(&h).unwrap();
        let d = dissipation_spectrum(&h).unwrap();
        let r = polariton_channel_rates(&h, &sol, &d).unwrap();
        for x in [&r.plus, &r.minus] {
            assert!(x.per_channel.iter().all(|&v| v >= -1e-12));
            let sum: f64 = x.per_channel.iter().sum();
            assert!((sum - x.total).abs() < 1e-10 * x.total.max(1.0));
        }
        assert!(d.labels.iter().any(|l| matches!(
            l,
            ChannelLabel::OddPolarized | ChannelLabel::EvenPolarized | ChannelLabel::CavityLike
        )));
    }
}

#[test]
fn trivial_mirror_has_no_protected_edge() {
    let p = SystemParams {
        j0: 0.0,
        ..Preset::Fig2.params()
    };
    let sol = eigendecompose(&mirror_heff(&p).unwrap()).unwrap();
    let zero = sol.eigenvalues.iter().filter(|e| e.norm() < 1e-6).count();
    assert_eq!(zero, 0);
}
