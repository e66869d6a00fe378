//! Secret key fractions and the comparison with a biphoton protocol.
//!
//! Key bits come from `A₀ = σ_x` and `B₁ = −σ_x`. Eve's Holevo information on
//! `B₁` is bounded by the CHSH value, which gives a Devetak–Winter rate for the
//! filtered state; the raw key fraction is the filter success probability
//! times that rate. Rates exclude the sifting probability and the source
//! repetition rate.

use std::f64::consts::SQRT_2;

use crate::bell::s_max_from_state;
use crate::channel::{one_minus_pow, ChannelPoint};
use crate::error::{Error, Result};
use crate::filtering::{filter_point, success_prob_closed_form};
use crate::qubit::{joint_outcome_probs, Axis, DensityMatrix4, MeasurementVector};

/// Lower edge of the default γ search interval.
pub const GAMMA_MIN: f64 = 1e-6;
/// Upper edge of the default γ search interval.
pub const GAMMA_MAX: f64 = 1.0 - 1e-6;
const SCAN_STEP: f64 = 1e-3;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

pub(crate) fn entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -(x * x.log2() + (1.0 - x) * (1.0 - x).log2())
}

/// Binary Shannon entropy in bits.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::validation(format!(
            "binary entropy argument must lie in [0, 1], got {x}"
        )));
    }
    Ok(entropy(x))
}

/// `P(a₀ ≠ b₁)` for outcomes of `a₀·σ` and `b₁·σ`.
pub fn qber_with(rho: &DensityMatrix4, a0: &MeasurementVector, b1: &MeasurementVector) -> f64 {
    joint_outcome_probs(rho, a0, b1).disagreement()
}

/// QBER of the key settings `A₀ = σ_x`, `B₁ = −σ_x`.
pub fn qber(rho: &DensityMatrix4) -> f64 {
    let x = MeasurementVector::axis(Axis::X);
    qber_with(rho, &x, &x.neg())
}

fn holevo_unchecked(s: f64) -> f64 {
    let half = (s / 2.0).clamp(1.0, SQRT_2);
    let v = (half * half - 1.0).max(0.0);
    entropy(((1.0 + v.sqrt()) / 2.0).min(1.0))
}

/// Upper bound on `χ(B₁ : E)` given a CHSH value `S ∈ [2, 2√2]`.
pub fn holevo_bound(s: f64) -> Result<f64> {
    if !(s >= 2.0 - 1e-9 && s <= 2.0 * SQRT_2 + 1e-9) {
        return Err(Error::validation(format!(
            "CHSH value {s} outside [2, 2*sqrt(2)]"
        )));
    }
    Ok(holevo_unchecked(s))
}

/// `1 − h((1 + γ^{2(1−T)})/2)`.
pub fn devetak_winter(point: &ChannelPoint) -> f64 {
    let x = point.gamma().powf(2.0 * (1.0 - point.transmission()));
    1.0 - entropy((1.0 + x) / 2.0)
}

pub fn secret_key_fraction(point: &ChannelPoint) -> f64 {
    success_prob_closed_form(point) * devetak_winter(point)
}

fn key_fraction_raw(gamma: f64, t: f64) -> f64 {
    let num = one_minus_pow(gamma, t);
    let x = gamma.powf(2.0 * (1.0 - t));
    num * num / one_minus_pow(gamma, 2.0) * (1.0 - entropy((1.0 + x) / 2.0))
}

/// Per-point quantities of the protocol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KeyRateReport {
    pub gamma: f64,
    pub transmission: f64,
    pub distance_km: Option<f64>,
    pub p: f64,
    pub s_max: f64,
    pub qber: f64,
    pub holevo: f64,
    pub r_dw: f64,
    pub key_fraction: f64,
}

/// Full matrix pipeline: state, filters, correlations, SVD, Holevo bound.
pub fn key_rate_report(point: &ChannelPoint) -> Result<KeyRateReport> {
    let filtered = filter_point(point)?;
    let q = qber(&filtered.state);
    let chsh = s_max_from_state(&filtered.state)?;
    let holevo = holevo_bound(chsh.s_max)?;
    let r_dw = (1.0 - entropy(q) - holevo).max(0.0);
    Ok(KeyRateReport {
        gamma: point.gamma(),
        transmission: point.transmission(),
        distance_km: point.distance_km(),
        p: filtered.success_prob,
        s_max: chsh.s_max,
        qber: q,
        holevo,
        r_dw,
        key_fraction: filtered.success_prob * r_dw,
    })
}

/// Same fields from the closed forms (QBER identically zero).
pub fn key_rate_closed_form(point: &ChannelPoint) -> KeyRateReport {
    let s_max = crate::bell::s_max_closed_form(point);
    let p = success_prob_closed_form(point);
    let r_dw = devetak_winter(point);
    KeyRateReport {
        gamma: point.gamma(),
        transmission: point.transmission(),
        distance_km: point.distance_km(),
        p,
        s_max,
        qber: 0.0,
        holevo: holevo_unchecked(s_max),
        r_dw,
        key_fraction: p * r_dw,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaOptimum {
    pub transmission: f64,
    pub gamma_opt: f64,
    pub k_opt: f64,
}

/// Coarse scan, then golden-section search around the best scan point.
fn maximize_scalar(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let n = (((hi - lo) / SCAN_STEP).ceil() as usize).max(2);
    let x_at = |k: usize| lo + (hi - lo) * k as f64 / n as f64;
    let mut best_k = 0;
    let mut best = f(lo);
    for k in 1..=n {
        let v = f(x_at(k));
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let mut a = x_at(best_k.saturating_sub(1));
    let mut b = x_at((best_k + 1).min(n));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mut candidates = [(best, x_at(best_k)), (fc, c), (fd, d), (f(a), a), (f(b), b)];
    candidates.sort_by(|u, v| v.0.total_cmp(&u.0));
    (candidates[0].1, candidates[0].0)
}

pub fn optimize_gamma(transmission: f64) -> Result<GammaOptimum> {
    optimize_gamma_within(transmission, GAMMA_MIN, GAMMA_MAX)
}

pub fn optimize_gamma_within(transmission: f64, lo: f64, hi: f64) -> Result<GammaOptimum> {
    if !(transmission > 0.0 && transmission <= 1.0) {
        return Err(Error::validation(format!(
            "transmission must lie in (0, 1], got {transmission}"
        )));
    }
    if !(0.0 <= lo && lo < hi && hi < 1.0) {
        return Err(Error::validation(format!("bad gamma bounds [{lo}, {hi}]")));
    }
    let (gamma_opt, k_opt) = maximize_scalar(|g| key_fraction_raw(g, transmission), lo, hi);
    Ok(GammaOptimum {
        transmission,
        gamma_opt,
        k_opt,
    })
}

/// Leading small-`T` coefficient of the key fraction, `K ≈ α(γ) T²`:
/// `ln²γ / (1 − γ²) · (1 − h((1 + γ²)/2))`.
pub fn asymptotic_alpha(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::validation(format!(
            "gamma must lie in (0, 1), got {gamma}"
        )));
    }
    Ok(alpha_raw(gamma))
}

fn alpha_raw(g: f64) -> f64 {
    let l = g.ln();
    l * l / one_minus_pow(g, 2.0) * (1.0 - entropy((1.0 + g * g) / 2.0))
}

/// `(γ*, α*)` maximizing [`asymptotic_alpha`].
pub fn maximize_alpha() -> (f64, f64) {
    maximize_scalar(alpha_raw, GAMMA_MIN, GAMMA_MAX)
}

/// Key fraction of the depolarized biphoton protocol at QBER `Q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiphotonPoint {
    pub qber: f64,
    /// `2√2(1 − 2Q)`.
    pub s: f64,
    pub key_fraction: f64,
    /// False when the protocol yields no key at this QBER.
    pub usable: bool,
}

/// Largest QBER with `S(Q) ≥ 2`.
pub fn biphoton_qber_limit() -> f64 {
    (1.0 - 1.0 / SQRT_2) / 2.0
}

/// `1 − h(Q) − h((1 + √((S/2)² − 1))/2)` with `S = 2√2(1 − 2Q)`.
pub fn biphoton_bracket(q: f64) -> f64 {
    let s = 2.0 * SQRT_2 * (1.0 - 2.0 * q);
    1.0 - entropy(q) - holevo_unchecked(s)
}

pub fn biphoton_key(q: f64, transmission: f64) -> Result<BiphotonPoint> {
    if !(0.0..=0.5).contains(&q) {
        return Err(Error::validation(format!("QBER must lie in [0, 1/2], got {q}")));
    }
    if !(transmission > 0.0 && transmission <= 1.0) {
        return Err(Error::validation(format!(
            "transmission must lie in (0, 1], got {transmission}"
        )));
    }
    let s = 2.0 * SQRT_2 * (1.0 - 2.0 * q);
    if q > biphoton_qber_limit() {
        return Ok(BiphotonPoint {
            qber: q,
            s,
            key_fraction: 0.0,
            usable: false,
        });
    }
    let bracket = biphoton_bracket(q);
    Ok(BiphotonPoint {
        qber: q,
        s,
        key_fraction: transmission * transmission * bracket.max(0.0),
        usable: bracket > 0.0,
    })
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, width: f64) -> f64 {
    // f(lo) > 0 > f(hi)
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// QBER at which the biphoton key fraction reaches zero.
pub fn biphoton_zero_crossing() -> f64 {
    bisect(biphoton_bracket, 0.0, biphoton_qber_limit(), 1e-15)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalQber {
    pub transmission: f64,
    pub gamma_opt: f64,
    /// `None` when the cat-state key exceeds even the error-free biphoton key.
    pub q_crit: Option<f64>,
    pub k_cat: f64,
    pub k_biphoton: Option<f64>,
}

/// QBER at which the biphoton key equals the optimized cat-state key.
pub fn critical_qber(transmission: f64) -> Result<CriticalQber> {
    let opt = optimize_gamma(transmission)?;
    let k_cat = opt.k_opt;
    let t2 = transmission * transmission;
    let gap = |q: f64| t2 * biphoton_bracket(q) - k_cat;
    let hi = biphoton_zero_crossing();
    let none = CriticalQber {
        transmission,
        gamma_opt: opt.gamma_opt,
        q_crit: None,
        k_cat,
        k_biphoton: None,
    };
    if !(gap(0.0) > 0.0) {
        return Ok(none);
    }
    if !(gap(hi) < 0.0) {
        return Err(Error::Numerical(format!(
            "critical QBER bracket has no sign change at T = {transmission}"
        )));
    }
    let q = bisect(gap, 0.0, hi, 1e-13);
    Ok(CriticalQber {
        q_crit: Some(q),
        k_biphoton: Some(biphoton_key(q, transmission)?.key_fraction),
        ..none
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::transmission_from_distance;

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.11).unwrap() - 0.499916).abs() < 1e-6);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn qber_reference_states() {
        assert!((qber(&DensityMatrix4::maximally_mixed()) - 0.5).abs() < 1e-12);
        let rho = filter_point(&ChannelPoint::new(0.5, 0.5).unwrap()).unwrap().state;
        assert!(qber(&rho) < 1e-12);
        // singlet with equal z settings: always anti-correlated, so a ≠ b
        let z = MeasurementVector::axis(Axis::Z);
        assert!((qber_with(&DensityMatrix4::singlet(), &z, &z) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn holevo_values() {
        assert_eq!(holevo_bound(2.0).unwrap(), 1.0);
        assert_eq!(holevo_bound(2.0 * SQRT_2).unwrap(), 0.0);
        let s = 2.0 * 1.25f64.sqrt();
        let h = holevo_bound(s).unwrap();
        assert!((h - entropy(0.75)).abs() < 1e-12);
        assert!((h - 0.811278).abs() < 1e-6);
        assert!(holevo_bound(1.9).is_err());
        assert!(holevo_bound(2.9).is_err());
        assert_eq!(holevo_bound(2.0 - 1e-10).unwrap(), 1.0);
    }

    #[test]
    fn devetak_winter_values() {
        assert_eq!(devetak_winter(&ChannelPoint::new(0.5, 1.0).unwrap()), 1.0);
        assert_eq!(devetak_winter(&ChannelPoint::new(0.0, 0.4).unwrap()), 0.0);
        let p = ChannelPoint::new(0.5, 0.5).unwrap();
        assert!((devetak_winter(&p) - (1.0 - entropy(0.75))).abs() < 1e-15);
        assert!((devetak_winter(&p) - 0.188722).abs() < 1e-6);
        let via_holevo = 1.0 - holevo_bound(crate::bell::s_max_closed_form(&p)).unwrap();
        assert!((devetak_winter(&p) - via_holevo).abs() < 1e-12);
    }

    #[test]
    fn key_fraction_values() {
        assert_eq!(secret_key_fraction(&ChannelPoint::new(0.0, 0.3).unwrap()), 0.0);
        let k = secret_key_fraction(&ChannelPoint::new(0.5, 1.0).unwrap());
        assert!((k - 1.0 / 3.0).abs() < 1e-15);
        let k = secret_key_fraction(&ChannelPoint::new(0.5, 0.5).unwrap());
        let p = (1.0 - 0.5f64.sqrt()).powi(2) / 0.75;
        assert!((k - p * (1.0 - entropy(0.75))).abs() < 1e-15);
        assert!((k - 0.021587).abs() < 1e-6);
    }

    #[test]
    fn pipeline_report_matches_closed_form() {
        for &(g, t) in &[(0.5, 0.5), (0.1, 0.9), (0.9, 0.05), (0.0, 0.3), (0.7, 1.0)] {
            let p = ChannelPoint::new(g, t).unwrap();
            let r = key_rate_report(&p).unwrap();
            let c = key_rate_closed_form(&p);
            assert!((r.key_fraction - c.key_fraction).abs() < 1e-10);
            assert!((r.p - c.p).abs() < 1e-12);
            assert!((r.s_max - c.s_max).abs() < 1e-10);
            assert!(r.qber < 1e-12);
            assert_eq!(r.key_fraction, r.p * r.r_dw);
        }
    }

    #[test]
    fn optimizer_at_lossless_end_point() {
        let o = optimize_gamma(1.0).unwrap();
        assert_eq!(o.gamma_opt, GAMMA_MIN);
        assert!((o.k_opt - (1.0 - GAMMA_MIN) / (1.0 + GAMMA_MIN)).abs() < 1e-12);
    }

    #[test]
    fn optimizer_matches_dense_grid() {
        let t = 0.1;
        let o = optimize_gamma(t).unwrap();
        let n = 100_000;
        let grid_best = (0..=n)
            .map(|k| GAMMA_MIN + (GAMMA_MAX - GAMMA_MIN) * k as f64 / n as f64)
            .map(|g| secret_key_fraction(&ChannelPoint::new(g, t).unwrap()))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(o.k_opt >= grid_best - 1e-15);
        assert!((o.k_opt - grid_best).abs() < 1e-8);
        for g in [o.gamma_opt - 1e-4, o.gamma_opt + 1e-4] {
            assert!(secret_key_fraction(&ChannelPoint::new(g, t).unwrap()) <= o.k_opt + 1e-12);
        }
    }

    #[test]
    fn alpha_behaviour() {
        assert!(asymptotic_alpha(0.0).is_err());
        assert!(asymptotic_alpha(1.0).is_err());
        let small = asymptotic_alpha(0.01).unwrap();
        assert!(small.is_finite() && small >= 0.0 && small < 1e-3);
        let (g, a) = maximize_alpha();
        assert!((0.72..=0.76).contains(&g), "gamma* = {g}");
        assert!((0.045..=0.047).contains(&a), "alpha* = {a}");
    }

    #[test]
    fn biphoton_values() {
        let b = biphoton_key(0.0, 0.3).unwrap();
        assert!((b.key_fraction - 0.09).abs() < 1e-15 && b.usable);
        let z = biphoton_zero_crossing();
        assert!((0.0714..0.0716).contains(&z));
        assert!(biphoton_key(z + 1e-6, 1.0).unwrap().key_fraction == 0.0);
        // Q = 0.05, T = 1: direct evaluation of the defining expression
        let s: f64 = 2.0 * SQRT_2 * 0.9;
        let direct = 1.0 - entropy(0.05) - entropy((1.0 + ((s / 2.0).powi(2) - 1.0).sqrt()) / 2.0);
        assert!((biphoton_key(0.05, 1.0).unwrap().key_fraction - direct).abs() < 1e-15);
        let over = biphoton_key(0.2, 1.0).unwrap();
        assert!(!over.usable && over.key_fraction == 0.0);
        assert!(biphoton_key(0.6, 1.0).is_err());
    }

    #[test]
    fn critical_qber_root_certificate() {
        let t = transmission_from_distance(30.0, 0.2).unwrap();
        let c = critical_qber(t).unwrap();
        let q = c.q_crit.unwrap();
        assert!((c.k_biphoton.unwrap() - c.k_cat).abs() < 1e-8 * c.k_cat.max(1e-300) + 1e-15);
        assert!(q > 0.0 && q < biphoton_zero_crossing());
    }
}
