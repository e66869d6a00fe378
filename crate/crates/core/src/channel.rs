//! Source and channel parametrization and the effective two-qubit state.
//!
//! The source emits `(|α₊⟩|α₋⟩ − |α₋⟩|α₊⟩)/N` with `α± = α e^{±iφ}`. Each arm
//! crosses a pure-loss channel of transmission `T`; tracing out the loss modes
//! leaves a rank-two state on the orthonormalized cat basis `{|+⟩, |−⟩}` that
//! depends only on the overlap `γ = |⟨α₊|α₋⟩|` and on `T`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qubit::{CMat, ComplexMat4, DensityMatrix4, C64, EXACT_TOL};

/// Amplitude and phase of the entangling source.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceParams {
    pub alpha: f64,
    pub phi: f64,
}

impl SourceParams {
    pub fn new(alpha: f64, phi: f64) -> Result<Self> {
        validate_source(alpha, phi)?;
        Ok(SourceParams { alpha, phi })
    }

    pub fn gamma(&self) -> f64 {
        (-2.0 * self.alpha * self.alpha * self.phi.sin().powi(2)).exp()
    }

    /// Displaced-cat amplitude `β = iα sin φ`, reported only.
    pub fn beta(&self) -> Complex64 {
        Complex64::new(0.0, self.alpha * self.phi.sin())
    }

    pub fn delta_t(&self, transmission: f64) -> f64 {
        wrap_angle(-transmission * self.alpha * self.alpha * (2.0 * self.phi).sin())
    }
}

fn validate_source(alpha: f64, phi: f64) -> Result<()> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::validation(format!("alpha must be >= 0, got {alpha}")));
    }
    if !(phi > 0.0 && phi <= FRAC_PI_2) {
        return Err(Error::validation(format!(
            "phi must lie in (0, pi/2], got {phi}"
        )));
    }
    Ok(())
}

/// Wrap an angle to `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// `γ = |⟨α₊|α₋⟩| = exp(−2α² sin²φ)`.
pub fn gamma_from_source(alpha: f64, phi: f64) -> Result<f64> {
    Ok(SourceParams::new(alpha, phi)?.gamma())
}

/// `δ_t = arg⟨tα₊|tα₋⟩ = −Tα² sin 2φ`, wrapped to `(−π, π]`.
///
/// Where the overlap has no well-defined phase the value is 0.
pub fn delta_t(alpha: f64, phi: f64, transmission: f64) -> Result<f64> {
    let src = SourceParams::new(alpha, phi)?;
    validate_transmission(transmission)?;
    Ok(src.delta_t(transmission))
}

pub fn transmission_from_distance(distance_km: f64, loss_db_per_km: f64) -> Result<f64> {
    if !(distance_km >= 0.0) || !distance_km.is_finite() {
        return Err(Error::validation(format!(
            "distance must be >= 0 km, got {distance_km}"
        )));
    }
    if !(loss_db_per_km > 0.0) || !loss_db_per_km.is_finite() {
        return Err(Error::validation(format!(
            "loss must be > 0 dB/km, got {loss_db_per_km}"
        )));
    }
    Ok(10f64.powf(-loss_db_per_km * distance_km / 10.0))
}

fn validate_transmission(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::validation(format!(
            "transmission must lie in (0, 1], got {t}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Provenance {
    pub distance_km: f64,
    pub loss_db_per_km: f64,
}

/// Overlap `γ` and per-arm transmission `T = |t|²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelPoint {
    gamma: f64,
    transmission: f64,
    provenance: Option<Provenance>,
}

impl ChannelPoint {
    pub fn new(gamma: f64, transmission: f64) -> Result<Self> {
        if gamma == 1.0 {
            return Err(Error::domain("degenerate overlap: gamma = 1 (N = 0)"));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::validation(format!(
                "gamma must lie in [0, 1), got {gamma}"
            )));
        }
        validate_transmission(transmission)?;
        Ok(ChannelPoint {
            gamma,
            transmission,
            provenance: None,
        })
    }

    pub fn from_distance(gamma: f64, distance_km: f64, loss_db_per_km: f64) -> Result<Self> {
        let t = transmission_from_distance(distance_km, loss_db_per_km)?;
        let mut p = Self::new(gamma, t)?;
        p.provenance = Some(Provenance {
            distance_km,
            loss_db_per_km,
        });
        Ok(p)
    }

    pub fn from_source(src: &SourceParams, transmission: f64) -> Result<Self> {
        Self::new(src.gamma(), transmission)
    }

    /// Same channel, different overlap.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        let mut p = Self::new(gamma, self.transmission)?;
        p.provenance = self.provenance;
        Ok(p)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn transmission(&self) -> f64 {
        self.transmission
    }

    pub fn provenance(&self) -> Option<Provenance> {
        self.provenance
    }

    pub fn distance_km(&self) -> Option<f64> {
        self.provenance.map(|p| p.distance_km)
    }

    /// `γ_t = γ^T`.
    pub fn gamma_t(&self) -> f64 {
        self.gamma.powf(self.transmission)
    }

    /// `γ_r = γ^(1−T)`.
    pub fn gamma_r(&self) -> f64 {
        self.gamma.powf(1.0 - self.transmission)
    }

    pub(crate) fn norms(&self) -> Norms {
        let g = self.gamma;
        let t = self.transmission;
        Norms {
            n_sq: 2.0 * one_minus_pow(g, 2.0),
            n_plus_sq: 2.0 * (1.0 + self.gamma_t()),
            n_minus_sq: 2.0 * one_minus_pow(g, t),
            m_plus_sq: 2.0 * (1.0 + g.powf(2.0 * (1.0 - t))),
            m_minus_sq: 2.0 * one_minus_pow(g, 2.0 * (1.0 - t)),
        }
    }
}

/// `1 − γ^x` without cancellation for `γ^x` near 1.
pub(crate) fn one_minus_pow(gamma: f64, x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if gamma == 0.0 {
        1.0
    } else {
        -(x * gamma.ln()).exp_m1()
    }
}

/// Squared normalizations `N²`, `N±²`, `M±²` of the source and cat bases.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Norms {
    pub n_sq: f64,
    pub n_plus_sq: f64,
    pub n_minus_sq: f64,
    pub m_plus_sq: f64,
    pub m_minus_sq: f64,
}

/// Entries of the unfiltered state: diagonal `(a, b, b, d)`, coherences `−√(ad)`
/// and `−b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientsABD {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

impl CoefficientsABD {
    pub fn trace(&self) -> f64 {
        self.a + 2.0 * self.b + self.d
    }

    pub fn sqrt_ad(&self) -> f64 {
        (self.a * self.d).sqrt()
    }
}

pub fn coefficients(point: &ChannelPoint) -> CoefficientsABD {
    let n = point.norms();
    let denom = 16.0 * n.n_sq;
    CoefficientsABD {
        a: n.m_minus_sq * n.n_plus_sq * n.n_plus_sq / denom,
        b: n.m_plus_sq * n.n_plus_sq * n.n_minus_sq / denom,
        d: n.m_minus_sq * n.n_minus_sq * n.n_minus_sq / denom,
    }
}

pub fn rho_matrix(c: &CoefficientsABD) -> ComplexMat4 {
    let r = c.sqrt_ad();
    CMat::from_real([
        [c.a, 0.0, 0.0, -r],
        [0.0, c.b, -c.b, 0.0],
        [0.0, -c.b, c.b, 0.0],
        [-r, 0.0, 0.0, c.d],
    ])
}

/// The state shared by Alice and Bob after the loss modes are traced out.
pub fn rho_unfiltered(point: &ChannelPoint) -> Result<DensityMatrix4> {
    let c = coefficients(point);
    if (c.trace() - 1.0).abs() > EXACT_TOL {
        return Err(Error::Numerical(format!(
            "a + 2b + d = {} at gamma = {}, T = {}",
            c.trace(),
            point.gamma,
            point.transmission
        )));
    }
    DensityMatrix4::new(rho_matrix(&c))
}

/// `ρ = w_Ψ |Ψ⟩⟨Ψ| + w_Φ |Φ⟩⟨Φ|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoStateMixture {
    pub weight_psi: f64,
    pub weight_phi: f64,
    /// `(N₊²|++⟩ − N₋²|−−⟩)/√(N₊⁴ + N₋⁴)`.
    pub psi: [C64; 4],
    /// `(|+−⟩ − |−+⟩)/√2`.
    pub phi: [C64; 4],
}

impl TwoStateMixture {
    pub fn matrix(&self) -> ComplexMat4 {
        CMat::outer(&self.psi, &self.psi).scale_re(self.weight_psi)
            + CMat::outer(&self.phi, &self.phi).scale_re(self.weight_phi)
    }
}

pub fn rho_eigendecomposition(point: &ChannelPoint) -> TwoStateMixture {
    let n = point.norms();
    let np4 = n.n_plus_sq * n.n_plus_sq;
    let nm4 = n.n_minus_sq * n.n_minus_sq;
    let denom = 16.0 * n.n_sq;
    let norm = (np4 + nm4).sqrt();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    TwoStateMixture {
        weight_psi: n.m_minus_sq * (np4 + nm4) / denom,
        weight_phi: n.m_plus_sq * 2.0 * n.n_plus_sq * n.n_minus_sq / denom,
        psi: [
            C64::new(n.n_plus_sq / norm, 0.0),
            z,
            z,
            C64::new(-n.n_minus_sq / norm, 0.0),
        ],
        phi: [z, C64::new(s, 0.0), C64::new(-s, 0.0), z],
    }
}
