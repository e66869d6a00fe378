//! Number-basis model of the source, the lossy fibres and the partial trace.
//!
//! Coherent states are expanded in a truncated Fock basis and every overlap is
//! obtained by summation. The two-term structure of the post-channel state
//! reduces the partial trace over the loss modes to a 2×2 Gram matrix of
//! loss-mode overlaps, so the four-mode state is never built explicitly.

use num_complex::Complex64;

use crate::channel::{rho_unfiltered, ChannelPoint, SourceParams};
use crate::error::{Error, Result};
use crate::qubit::{tensor_vec, CMat, ComplexMat4, C64};

/// Largest admissible norm defect of a truncated coherent state.
pub const MAX_NORM_DEFECT: f64 = 1e-12;
pub const DEFAULT_N_MAX: usize = 32;

/// Truncated number-basis amplitudes `a₀ … a_{n_max}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    pub amplitudes: Vec<C64>,
    pub n_max: usize,
    /// `|1 − Σ|aₙ|²|`.
    pub norm_defect: f64,
}

impl FockVector {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    fn combine(&self, u: C64, other: &FockVector, v: C64) -> FockVector {
        let amplitudes: Vec<C64> = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(x, y)| u * x + v * y)
            .collect();
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        FockVector {
            amplitudes,
            n_max: self.n_max,
            norm_defect: (1.0 - norm).abs(),
        }
    }

    fn normalized(mut self) -> FockVector {
        let n = self.norm_sqr().sqrt();
        for a in &mut self.amplitudes {
            *a /= n;
        }
        self.norm_defect = (1.0 - self.norm_sqr()).abs();
        self
    }
}

/// Admission rule `|β|² ≤ n_max/4`.
pub fn admits(amplitude: C64, n_max: usize) -> bool {
    amplitude.norm_sqr() <= n_max as f64 / 4.0
}

/// `aₙ = e^{−|β|²/2} βⁿ/√(n!)` via `aₙ = a_{n−1}·β/√n`.
pub fn coherent_fock(amplitude: C64, n_max: usize) -> Result<FockVector> {
    if !admits(amplitude, n_max) {
        return Err(Error::validation(format!(
            "truncation n_max = {n_max} too small for |beta|^2 = {} (need |beta|^2 <= n_max/4)",
            amplitude.norm_sqr()
        )));
    }
    let mut amplitudes = Vec::with_capacity(n_max + 1);
    let mut a = C64::new((-amplitude.norm_sqr() / 2.0).exp(), 0.0);
    amplitudes.push(a);
    for n in 1..=n_max {
        a = a * amplitude / (n as f64).sqrt();
        amplitudes.push(a);
    }
    let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
    let norm_defect = (1.0 - norm).abs();
    if norm_defect > MAX_NORM_DEFECT {
        return Err(Error::validation(format!(
            "truncation n_max = {n_max} leaves norm defect {norm_defect:e} for |beta|^2 = {}",
            amplitude.norm_sqr()
        )));
    }
    Ok(FockVector {
        amplitudes,
        n_max,
        norm_defect,
    })
}

/// `⟨u|v⟩ = Σ conj(uₙ) vₙ`.
pub fn overlap(u: &FockVector, v: &FockVector) -> Result<C64> {
    if u.n_max != v.n_max || u.amplitudes.len() != v.amplitudes.len() {
        return Err(Error::validation(format!(
            "mismatched truncations {} and {}",
            u.n_max, v.n_max
        )));
    }
    Ok(u.amplitudes
        .iter()
        .zip(&v.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Beam-splitter action on a coherent amplitude with real `t = √T`, `r = √(1−T)`.
pub fn split_amplitudes(amplitude: C64, transmission: f64) -> (C64, C64) {
    (
        amplitude * transmission.sqrt(),
        amplitude * (1.0 - transmission).sqrt(),
    )
}

fn arg_or_zero(z: C64) -> f64 {
    if z.norm() == 0.0 {
        0.0
    } else {
        z.arg()
    }
}

/// Reduced state of Alice and Bob in the `{|±⟩}` basis, built entirely from
/// Fock-space overlaps.
pub fn reduced_state(alpha: f64, phi: f64, transmission: f64, n_max: usize) -> Result<ComplexMat4> {
    SourceParams::new(alpha, phi)?;
    if !(transmission > 0.0 && transmission <= 1.0) {
        return Err(Error::validation(format!(
            "transmission must lie in (0, 1], got {transmission}"
        )));
    }
    let plus_amp = Complex64::from_polar(alpha, phi);
    let minus_amp = Complex64::from_polar(alpha, -phi);

    // source normalization N² = 2(1 − |⟨α₊|α₋⟩|²)
    let src_p = coherent_fock(plus_amp, n_max)?;
    let src_m = coherent_fock(minus_amp, n_max)?;
    let g = overlap(&src_p, &src_m)?.norm();
    let n_sq = 2.0 * (1.0 - g * g);
    if !(n_sq > 0.0) {
        return Err(Error::domain("degenerate overlap: gamma = 1 (N = 0)"));
    }

    let (tp, rp) = split_amplitudes(plus_amp, transmission);
    let (tm, rm) = split_amplitudes(minus_amp, transmission);
    let t_p = coherent_fock(tp, n_max)?;
    let t_m = coherent_fock(tm, n_max)?;
    let r_p = coherent_fock(rp, n_max)?;
    let r_m = coherent_fock(rm, n_max)?;

    // cat basis |±⟩ ∝ e^{iδ/2}|tα₊⟩ ± e^{−iδ/2}|tα₋⟩ with δ = arg⟨tα₊|tα₋⟩
    let delta = arg_or_zero(overlap(&t_p, &t_m)?);
    let half = Complex64::from_polar(1.0, delta / 2.0);
    let cat_plus = t_p.combine(half, &t_m, half.conj()).normalized();
    let cat_minus = t_p.combine(half, &t_m, -half.conj()).normalized();

    let coords = |v: &FockVector| -> Result<[C64; 2]> {
        Ok([overlap(&cat_plus, v)?, overlap(&cat_minus, v)?])
    };
    let cp = coords(&t_p)?;
    let cm = coords(&t_m)?;

    // |A₁⟩ = |tα₊⟩|tα₋⟩ with loss modes |rα₊⟩|rα₋⟩, |A₂⟩ the swap, weights ±1/N
    let terms = [
        (tensor_vec(&cp, &cm), [&r_p, &r_m], 1.0),
        (tensor_vec(&cm, &cp), [&r_m, &r_p], -1.0),
    ];
    let mut rho = ComplexMat4::zeros();
    for (ai, li, ci) in &terms {
        for (aj, lj, cj) in &terms {
            let loss = overlap(lj[0], li[0])? * overlap(lj[1], li[1])?;
            rho = rho + CMat::outer(ai, aj).scale(loss * (ci * cj / n_sq));
        }
    }
    Ok(rho)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedStateComparison {
    pub oracle_matrix: ComplexMat4,
    pub model_matrix: ComplexMat4,
    pub max_deviation: f64,
}

/// Fock-space reduced state against the closed-form two-qubit state.
pub fn compare_to_qubit_model(
    alpha: f64,
    phi: f64,
    transmission: f64,
    n_max: usize,
) -> Result<ReducedStateComparison> {
    let oracle_matrix = reduced_state(alpha, phi, transmission, n_max)?;
    let src = SourceParams::new(alpha, phi)?;
    let model = rho_unfiltered(&ChannelPoint::from_source(&src, transmission)?)?;
    let model_matrix = *model.matrix();
    Ok(ReducedStateComparison {
        oracle_matrix,
        model_matrix,
        max_deviation: oracle_matrix.max_abs_diff(&model_matrix),
    })
}
