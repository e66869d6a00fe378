//! Single-copy local filtering.
//!
//! The optimal filters are `M_A = M_B = (d/a)^{1/4}|+⟩⟨+| + |−⟩⟨−|`. They bring
//! the unfiltered state to a mixture of the two Bell states
//! `(|++⟩ − |−−⟩)/√2` and `(|+−⟩ − |−+⟩)/√2`.

use crate::channel::{coefficients, one_minus_pow, rho_matrix, rho_unfiltered, ChannelPoint, CoefficientsABD};
use crate::error::{Error, Result};
use crate::qubit::{eig_hermitian2, tensor, CMat, ComplexMat2, ComplexMat4, DensityMatrix4, C64, EXACT_TOL};

/// Success probabilities at or below this are treated as annihilation.
pub const MIN_SUCCESS_PROB: f64 = 1e-15;

/// A local filter `M` with `I − M†M ⪰ 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalFilter(ComplexMat2);

impl LocalFilter {
    pub fn new(m: ComplexMat2) -> Result<Self> {
        let check = validate_filter(&m)?;
        if !check.valid {
            return Err(Error::validation(format!(
                "filter is not a contraction (min eigenvalue of I - M^dag M = {:e})",
                check.margin
            )));
        }
        Ok(LocalFilter(m))
    }

    pub fn identity() -> Self {
        LocalFilter(ComplexMat2::identity())
    }

    /// `diag(strength, 1)` in the `{|+⟩, |−⟩}` basis.
    pub fn diagonal(strength: f64) -> Result<Self> {
        Self::new(CMat::diag([C64::new(strength, 0.0), C64::new(1.0, 0.0)]))
    }

    pub fn matrix(&self) -> &ComplexMat2 {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterCheck {
    pub valid: bool,
    /// Smallest eigenvalue of `I − M†M`.
    pub margin: f64,
}

pub fn validate_filter(m: &ComplexMat2) -> Result<FilterCheck> {
    let gap = ComplexMat2::identity() - m.adjoint() * *m;
    let eig = eig_hermitian2(&gap)?;
    let margin = eig.values[1];
    Ok(FilterCheck {
        valid: margin >= -EXACT_TOL,
        margin,
    })
}

/// The filtered, renormalized state and the probability that filtering succeeds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilteredState {
    pub state: DensityMatrix4,
    pub success_prob: f64,
}

impl FilteredState {
    /// Largest off-diagonal modulus of the state written in the Bell basis.
    pub fn bell_offdiagonal(&self) -> f64 {
        let b = bell_basis();
        let in_bell = b.adjoint() * *self.state.matrix() * b;
        let mut m = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    m = m.max(in_bell[(i, j)].norm());
                }
            }
        }
        m
    }
}

/// Columns `(|++⟩ ± |−−⟩)/√2`, `(|+−⟩ ± |−+⟩)/√2`.
fn bell_basis() -> ComplexMat4 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_real([
        [s, s, 0.0, 0.0],
        [0.0, 0.0, s, s],
        [0.0, 0.0, s, -s],
        [s, -s, 0.0, 0.0],
    ])
}

pub fn optimal_filters(coeffs: &CoefficientsABD) -> Result<(LocalFilter, LocalFilter)> {
    if !(coeffs.a > 0.0) {
        return Err(Error::domain(
            "optimal filter undefined for a = 0 (lossless channel)",
        ));
    }
    let f = LocalFilter::diagonal((coeffs.d / coeffs.a).powf(0.25))?;
    Ok((f, f))
}

/// Optimal filters for a channel point, including the lossless end point.
///
/// At `T = 1` both `a` and `d` vanish but `(d/a)^{1/4} = N₋/N₊` stays finite;
/// the limiting filter `√((1−γ)/(1+γ))` is used there.
pub fn optimal_filters_for(point: &ChannelPoint) -> Result<(LocalFilter, LocalFilter)> {
    let coeffs = coefficients(point);
    if coeffs.a > 0.0 {
        return optimal_filters(&coeffs);
    }
    let gt = point.gamma_t();
    let f = LocalFilter::diagonal((one_minus_pow(point.gamma(), point.transmission()) / (1.0 + gt)).sqrt())?;
    Ok((f, f))
}

/// `(M_A ⊗ M_B) ρ (M_A ⊗ M_B)† / p`.
pub fn apply_filters(rho: &DensityMatrix4, ma: &LocalFilter, mb: &LocalFilter) -> Result<FilteredState> {
    let k = tensor(ma.matrix(), mb.matrix());
    let unnormalized = k * *rho.matrix() * k.adjoint();
    let p = unnormalized.trace().re;
    if !(p > MIN_SUCCESS_PROB) {
        return Err(Error::domain(format!(
            "filter annihilates state (success probability {p:e})"
        )));
    }
    let mut m = unnormalized.scale_re(1.0 / p);
    for i in 0..4 {
        m[(i, i)].im = 0.0;
    }
    Ok(FilteredState {
        state: DensityMatrix4::new(m)?,
        success_prob: p,
    })
}

/// Filtered state and success probability written directly from `(a, b, d)`.
pub fn filtered_state_closed_form(coeffs: &CoefficientsABD) -> Result<FilteredState> {
    if !(coeffs.d > 0.0) || !(coeffs.a > 0.0) {
        return Err(Error::domain("closed-form filtered state needs a, d > 0"));
    }
    let r = coeffs.sqrt_ad();
    let norm = 2.0 * (coeffs.b + r);
    let shape = CoefficientsABD {
        a: r,
        b: coeffs.b,
        d: r,
    };
    let state = DensityMatrix4::new(rho_matrix(&shape).scale_re(1.0 / norm))?;
    Ok(FilteredState {
        state,
        success_prob: 2.0 * (coeffs.d / coeffs.a).sqrt() * (coeffs.b + r),
    })
}

/// `p = (1 − γ^T)² / (1 − γ²)`.
pub fn success_prob_closed_form(point: &ChannelPoint) -> f64 {
    let num = one_minus_pow(point.gamma(), point.transmission());
    num * num / one_minus_pow(point.gamma(), 2.0)
}

/// Unfiltered state, optimal filters, filtered state.
pub fn filter_point(point: &ChannelPoint) -> Result<FilteredState> {
    let rho = rho_unfiltered(point)?;
    let (ma, mb) = optimal_filters_for(point)?;
    apply_filters(&rho, &ma, &mb)
}
