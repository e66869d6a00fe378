//! Euler decomposition of the rotation that maps a measurement basis onto the
//! cat basis.
//!
//! To measure in `{|φ⟩, |φ̄⟩}` with `|φ⟩ = c|+⟩ + d|−⟩`, apply
//! `U = [[c*, d*], [d, −c]]` and then distinguish `|+⟩` from `|−⟩`. `U` factors
//! as `i·R_z(q)·H·R_z(r)·H·R_z(s)`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use crate::channel::wrap_angle;
use crate::error::{Error, Result};
use crate::qubit::{CMat, ComplexMat2, C64, EXACT_TOL};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisRotation {
    c: C64,
    d: C64,
}

impl BasisRotation {
    /// Requires `|c|² + |d|² = 1` to `1e−12`.
    pub fn new(c: C64, d: C64) -> Result<Self> {
        let n = c.norm_sqr() + d.norm_sqr();
        if !n.is_finite() || (n - 1.0).abs() > EXACT_TOL {
            return Err(Error::validation(format!(
                "|c|^2 + |d|^2 = {n}, expected 1"
            )));
        }
        Ok(BasisRotation { c, d })
    }

    /// Rescales `(c, d)` to unit norm; fails on the zero vector.
    pub fn normalized(c: C64, d: C64) -> Result<Self> {
        let n = (c.norm_sqr() + d.norm_sqr()).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::validation("basis vector (c, d) is zero"));
        }
        Self::new(c / n, d / n)
    }

    pub fn c(&self) -> C64 {
        self.c
    }

    pub fn d(&self) -> C64 {
        self.d
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerAngles {
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

pub fn rotation_matrix(rot: &BasisRotation) -> ComplexMat2 {
    CMat([[rot.c.conj(), rot.d.conj()], [rot.d, -rot.c]])
}

/// `R_z(θ) = diag(e^{−iθ/2}, e^{iθ/2})`.
pub fn rz(angle: f64) -> ComplexMat2 {
    let z = C64::new(0.0, 0.0);
    CMat([
        [C64::from_polar(1.0, -angle / 2.0), z],
        [z, C64::from_polar(1.0, angle / 2.0)],
    ])
}

pub fn hadamard() -> ComplexMat2 {
    CMat::from_real([
        [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
        [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
    ])
}

fn arg_or_zero(z: C64) -> f64 {
    if z.norm() == 0.0 {
        0.0
    } else {
        z.arg()
    }
}

/// `q = π/2 + ξ + η`, `r = 2θ`, `s = π/2 + ξ − η` with `ξ = arg c`, `η = arg d`,
/// `tan θ = |d/c|`; each wrapped to `(−π, π]`. `arg 0` is taken as 0.
pub fn euler_angles(rot: &BasisRotation) -> EulerAngles {
    let xi = arg_or_zero(rot.c);
    let eta = arg_or_zero(rot.d);
    let theta = rot.d.norm().atan2(rot.c.norm());
    EulerAngles {
        q: wrap_angle(FRAC_PI_2 + xi + eta),
        r: wrap_angle(2.0 * theta),
        s: wrap_angle(FRAC_PI_2 + xi - eta),
    }
}

/// `i·R_z(q)·H·R_z(r)·H·R_z(s)`.
pub fn reconstruct(angles: &EulerAngles) -> ComplexMat2 {
    let h = hadamard();
    (rz(angles.q) * h * rz(angles.r) * h * rz(angles.s)).scale(C64::new(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecompositionCheck {
    pub angles: EulerAngles,
    /// `min_λ ‖λ·reconstruct − U‖_max` over unit phases `λ`.
    pub aligned_deviation: f64,
    /// `‖reconstruct − U‖_max`.
    pub raw_deviation: f64,
    /// The aligning phase `λ`.
    pub phase: C64,
}

pub fn verify_decomposition(rot: &BasisRotation) -> DecompositionCheck {
    let angles = euler_angles(rot);
    let built = reconstruct(&angles);
    let target = rotation_matrix(rot);
    // λ = arg Tr(built† target) minimizes the Frobenius distance
    let overlap = (built.adjoint() * target).trace();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    DecompositionCheck {
        angles,
        aligned_deviation: built.scale(phase).max_abs_diff(&target),
        raw_deviation: built.max_abs_diff(&target),
        phase,
    }
}
