//! One test per acceptance criterion. Each prints a single PASS/FAIL line;
//! run with `--nocapture` to see them.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, FRAC_PI_8};
use std::process::Command;
use std::time::Instant;

use catqkd::bell::{
    brute_force_s_max, canonical_settings, chsh_value, s_max_closed_form, s_max_from_state,
};
use catqkd::channel::{transmission_from_distance, ChannelPoint};
use catqkd::euler::{verify_decomposition, BasisRotation};
use catqkd::filtering::{filter_point, success_prob_closed_form};
use catqkd::fock::compare_to_qubit_model;
use catqkd::keyrate::{
    biphoton_bracket, biphoton_key, biphoton_zero_crossing, critical_qber, maximize_alpha,
    optimize_gamma, qber,
};
use catqkd::qubit::C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn verdict(id: &str, ok: bool, detail: String) {
    println!("{} {id}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{id} failed: {detail}");
}

fn grid() -> impl Iterator<Item = (f64, f64)> {
    (0..100).flat_map(|i| (1..=100).map(move |j| (0.999 * i as f64 / 99.0, j as f64 / 100.0)))
}

fn km(d: f64) -> f64 {
    transmission_from_distance(d, 0.2).unwrap()
}

#[test]
fn criterion_01_closed_form_matches_pipeline() {
    let (mut dp, mut ds) = (0.0f64, 0.0f64);
    for (g, t) in grid() {
        let point = ChannelPoint::new(g, t).unwrap();
        let fs = filter_point(&point).unwrap();
        let s = s_max_from_state(&fs.state).unwrap().s_max;
        dp = dp.max((fs.success_prob - success_prob_closed_form(&point)).abs());
        ds = ds.max((s - s_max_closed_form(&point)).abs());
    }
    verdict(
        "criterion 1 (closed form vs pipeline)",
        dp <= 1e-10 && ds <= 1e-10,
        format!("max |dp| = {dp:.3e}, max |dS| = {ds:.3e}, tol 1e-10"),
    );
}

#[test]
fn criterion_02_zero_qber() {
    let worst = grid()
        .map(|(g, t)| qber(&filter_point(&ChannelPoint::new(g, t).unwrap()).unwrap().state))
        .fold(0.0f64, f64::max);
    verdict("criterion 2 (zero QBER)", worst <= 1e-12, format!("max Q = {worst:.3e}, tol 1e-12"));
}

#[test]
fn criterion_03_violation_everywhere() {
    let worst = grid()
        .filter(|&(g, _)| g > 0.0)
        .map(|(g, t)| {
            let fs = filter_point(&ChannelPoint::new(g, t).unwrap()).unwrap();
            s_max_from_state(&fs.state).unwrap().s_max
        })
        .fold(f64::INFINITY, f64::min);
    verdict("criterion 3 (S_max > 2)", worst > 2.0, format!("min S_max = {worst:.15}"));
}

#[test]
fn criterion_04_settings_achieve_bound() {
    let started = Instant::now();
    let mut settings_dev = 0.0f64;
    for (g, t) in grid().step_by(37) {
        let point = ChannelPoint::new(g, t).unwrap();
        let rho = filter_point(&point).unwrap().state;
        let s = s_max_closed_form(&point);
        let svd = s_max_from_state(&rho).unwrap();
        settings_dev = settings_dev
            .max((chsh_value(&rho, &svd.settings).unwrap() - s).abs())
            .max((chsh_value(&rho, &canonical_settings(&point)).unwrap() - s).abs());
    }
    let mut rng = StdRng::seed_from_u64(2024);
    let (mut lo, mut hi) = (0.0f64, f64::NEG_INFINITY);
    for _ in 0..20 {
        let point = ChannelPoint::new(rng.gen_range(0.01..0.99), rng.gen_range(0.01..=1.0)).unwrap();
        let rho = filter_point(&point).unwrap().state;
        let diff = brute_force_s_max(&rho, 24, 200).unwrap() - s_max_closed_form(&point);
        lo = lo.min(diff);
        hi = hi.max(diff);
    }
    let secs = started.elapsed().as_secs_f64();
    verdict(
        "criterion 4 (settings achieve S_max)",
        settings_dev <= 1e-10 && lo >= -1e-4 && hi <= 1e-6 && secs <= 60.0,
        format!(
            "settings dev = {settings_dev:.3e}; brute force - S_max in [{lo:.3e}, {hi:.3e}] over 20 points; {secs:.1} s"
        ),
    );
}

#[test]
fn criterion_05_asymptotic_coefficient() {
    let (gamma_star, alpha_star) = maximize_alpha();
    let t = 1e-3;
    let ratio = optimize_gamma(t).unwrap().k_opt / (t * t);
    let ok = (0.045..=0.047).contains(&alpha_star)
        && (0.72..=0.76).contains(&gamma_star)
        && (ratio - alpha_star).abs() <= 1e-3;
    verdict(
        "criterion 5 (asymptotic coefficient)",
        ok,
        format!("alpha* = {alpha_star:.6} at gamma* = {gamma_star:.6}; K_opt(1e-3)/T^2 = {ratio:.6}"),
    );
}

#[test]
fn criterion_06a_critical_qber_at_11_km() {
    let q = critical_qber(km(11.0)).unwrap().q_crit.unwrap();
    verdict(
        "criterion 6a (Q_crit at 11 km in [0.063, 0.069])",
        (0.063..=0.069).contains(&q),
        format!("Q_crit(11 km) = {q:.6}"),
    );
}

#[test]
fn criterion_06b_advantage_ratio_at_11_km() {
    let t = km(11.0);
    let k_cat = optimize_gamma(t).unwrap().k_opt;
    let k_bip = biphoton_key(0.066, t).unwrap().key_fraction;
    let ratio = k_cat / k_bip;
    verdict(
        "criterion 6b (K_cat / K_biphoton(0.066) at 11 km in [1.6, 2.4])",
        (1.6..=2.4).contains(&ratio),
        format!("ratio = {ratio:.4}"),
    );
}

#[test]
fn criterion_06c_long_distance_limit() {
    let qs: Vec<f64> = [150.0, 200.0, 250.0, 300.0]
        .iter()
        .map(|&d| critical_qber(km(d)).unwrap().q_crit.unwrap())
        .collect();
    verdict(
        "criterion 6c (Q_crit beyond 150 km in [0.065, 0.069])",
        qs.iter().all(|q| (0.065..=0.069).contains(q)),
        format!("Q_crit at 150/200/250/300 km = {qs:.6?}"),
    );
}

#[test]
fn criterion_07_biphoton_zero_crossing() {
    let q0 = biphoton_zero_crossing();
    verdict(
        "criterion 7 (biphoton zero crossing in [0.071, 0.072])",
        (0.071..=0.072).contains(&q0) && biphoton_bracket(q0).abs() < 1e-10,
        format!("Q0 = {q0:.7}"),
    );
}

#[test]
fn criterion_08_fock_oracle() {
    let started = Instant::now();
    let mut worst = 0.0f64;
    let mut count = 0;
    for &alpha in &[0.3, 0.5, 1.0, 1.5] {
        for &phi in &[FRAC_PI_8, FRAC_PI_6, FRAC_PI_4] {
            for &t in &[0.2, 0.5, 0.8, 1.0] {
                let cmp = compare_to_qubit_model(alpha, phi, t, 32).unwrap();
                worst = worst.max(cmp.max_deviation);
                count += 1;
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    verdict(
        "criterion 8 (Fock oracle)",
        count == 48 && worst <= 1e-9 && secs <= 10.0,
        format!("max deviation = {worst:.3e} over {count} points; {secs:.2} s"),
    );
}

#[test]
fn criterion_09_gate_decomposition() {
    let mut rng = StdRng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let d = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let rot = BasisRotation::normalized(c, d).unwrap();
        worst = worst.max(verify_decomposition(&rot).aligned_deviation);
    }
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let raw_z = verify_decomposition(&BasisRotation::new(one, zero).unwrap()).raw_deviation;
    let raw_x = verify_decomposition(&BasisRotation::new(zero, one).unwrap()).raw_deviation;
    verdict(
        "criterion 9 (gate decomposition)",
        worst <= 1e-12 && raw_z <= 1e-15 && raw_x <= 1e-15,
        format!("aligned max = {worst:.3e}; raw Z = {raw_z:.1e}, raw X = {raw_x:.1e}"),
    );
}

#[test]
fn criterion_10_keyrate_sweep() {
    let out = Command::new(env!("CARGO_BIN_EXE_catqkd"))
        .args(["keyrate-sweep", "--start-km", "0", "--end-km", "200"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (ip, ir, ik) = (col("p"), col("r_dw"), col("key_fraction"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    let k: Vec<f64> = rows.iter().map(|r| r[ik]).collect();
    let monotone = k.windows(2).all(|w| w[1] <= w[0]);
    let product = rows.iter().map(|r| (r[ik] - r[ip] * r[ir]).abs()).fold(0.0, f64::max);
    verdict(
        "criterion 10 (key-rate sweep 0-200 km)",
        monotone && k[0] >= 0.99 && product <= 1e-10,
        format!(
            "{} rows, monotone = {monotone}, K(0) = {:.9}, max |K - p r_DW| = {product:.2e}",
            rows.len(),
            k[0]
        ),
    );
}
