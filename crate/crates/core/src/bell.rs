//! Maximal CHSH violation of a two-qubit state.
//!
//! For `S = A₁⊗B₁ + A₂⊗B₁ + A₁⊗B₂ − A₂⊗B₂` the largest value over projective
//! settings is `2√(s₁² + s₂²)`, with `s₁ ≥ s₂` the two largest singular values
//! of the correlation matrix.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::channel::ChannelPoint;
use crate::error::Result;
use crate::qubit::{
    correlation_matrix, expectation_joint, svd3, CorrelationMatrix, DensityMatrix4,
    MeasurementVector, SingularTriple, norm3,
};

/// Alice's `a₁, a₂`, Bob's `b₁, b₂` and the mixing angle between `a₁` and `a₂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellSettings {
    pub a1: MeasurementVector,
    pub a2: MeasurementVector,
    pub b1: MeasurementVector,
    pub b2: MeasurementVector,
    /// In `[0, π/4]`.
    pub varphi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChshResult {
    pub s_max: f64,
    pub settings: BellSettings,
    pub singular: SingularTriple,
}

impl ChshResult {
    pub fn violates(&self) -> bool {
        self.s_max > 2.0
    }
}

fn combine(cos: f64, u: &[f64; 3], sin: f64, v: &[f64; 3]) -> Result<MeasurementVector> {
    MeasurementVector::normalize([
        cos * u[0] + sin * v[0],
        cos * u[1] + sin * v[1],
        cos * u[2] + sin * v[2],
    ])
}

/// Maximal CHSH value and the singular-vector settings that reach it.
pub fn s_max_from_state(rho: &DensityMatrix4) -> Result<ChshResult> {
    let c = correlation_matrix(rho)?;
    Ok(s_max_from_correlations(&c))
}

pub fn s_max_from_correlations(c: &CorrelationMatrix) -> ChshResult {
    let singular = svd3(c);
    let [s1, s2, _] = singular.values;
    let norm = s1.hypot(s2);
    let settings = if norm == 0.0 {
        BellSettings {
            a1: MeasurementVector::axis(crate::qubit::Axis::X),
            a2: MeasurementVector::axis(crate::qubit::Axis::X),
            b1: MeasurementVector::axis(crate::qubit::Axis::X),
            b2: MeasurementVector::axis(crate::qubit::Axis::Y),
            varphi: 0.0,
        }
    } else {
        let (cos, sin) = (s1 / norm, s2 / norm);
        let [l1, l2, _] = singular.left;
        let [r1, r2, _] = singular.right;
        BellSettings {
            a1: combine(cos, &l1, sin, &l2).expect("orthonormal singular vectors"),
            a2: combine(cos, &l1, -sin, &l2).expect("orthonormal singular vectors"),
            b1: MeasurementVector::normalize(r1).expect("unit singular vector"),
            b2: MeasurementVector::normalize(r2).expect("unit singular vector"),
            varphi: s2.atan2(s1),
        }
    };
    ChshResult {
        s_max: 2.0 * norm,
        settings,
        singular,
    }
}

/// `(a₁ + a₂)·C·b₁ + (a₁ − a₂)·C·b₂`.
pub fn chsh_value(rho: &DensityMatrix4, settings: &BellSettings) -> Result<f64> {
    let c = correlation_matrix(rho)?;
    Ok(chsh_from_correlations(&c, settings))
}

pub fn chsh_from_correlations(c: &CorrelationMatrix, s: &BellSettings) -> f64 {
    let a1 = s.a1.components();
    let a2 = s.a2.components();
    let sum = [a1[0] + a2[0], a1[1] + a2[1], a1[2] + a2[2]];
    let diff = [a1[0] - a2[0], a1[1] - a2[1], a1[2] - a2[2]];
    c.bilinear(&sum, &s.b1.components()) + c.bilinear(&diff, &s.b2.components())
}

/// Same quantity as [`chsh_value`], summed from four operator traces.
pub fn chsh_value_operator(rho: &DensityMatrix4, s: &BellSettings) -> f64 {
    expectation_joint(rho, &s.a1, &s.b1)
        + expectation_joint(rho, &s.a2, &s.b1)
        + expectation_joint(rho, &s.a1, &s.b2)
        - expectation_joint(rho, &s.a2, &s.b2)
}

/// `2√(1 + γ^{4(1−T)})`.
pub fn s_max_closed_form(point: &ChannelPoint) -> f64 {
    let x = point.gamma().powf(2.0 * (1.0 - point.transmission()));
    2.0 * (1.0 + x * x).sqrt()
}

/// `A₁,₂ = cos φ σ_x ± sin φ σ_y`, `B₁ = −σ_x`, `B₂ = −σ_y`, `cos φ = 2/S_max`.
pub fn canonical_settings(point: &ChannelPoint) -> BellSettings {
    let cos = (2.0 / s_max_closed_form(point)).min(1.0);
    let varphi = cos.acos();
    let sin = varphi.sin();
    let unit = |x: f64, y: f64| MeasurementVector::normalize([x, y, 0.0]).expect("nonzero");
    BellSettings {
        a1: unit(cos, sin),
        a2: unit(cos, -sin),
        b1: unit(-1.0, 0.0),
        b2: unit(0.0, -1.0),
        varphi,
    }
}

/// Direct search for the maximal CHSH value.
///
/// For fixed `b₁, b₂` the best `a₁, a₂` are the directions of `C(b₁ ± b₂)`, so
/// only Bob's two vectors are searched: a `coarse_steps × coarse_steps/2`
/// azimuth/polar grid per vector, then a shrinking pattern search over the
/// four angles for at most `refine_iters` rounds.
pub fn brute_force_s_max(rho: &DensityMatrix4, coarse_steps: usize, refine_iters: usize) -> Result<f64> {
    let c = correlation_matrix(rho)?;
    Ok(brute_force_from_correlations(&c, coarse_steps, refine_iters))
}

fn brute_force_from_correlations(c: &CorrelationMatrix, coarse_steps: usize, refine_iters: usize) -> f64 {
    let n_az = coarse_steps.max(4);
    let n_pol = (coarse_steps / 2).max(2);
    let objective = |x: &[f64; 4]| {
        let b1 = MeasurementVector::from_angles(x[0], x[1]).components();
        let b2 = MeasurementVector::from_angles(x[2], x[3]).components();
        let sum = c.apply(&[b1[0] + b2[0], b1[1] + b2[1], b1[2] + b2[2]]);
        let diff = c.apply(&[b1[0] - b2[0], b1[1] - b2[1], b1[2] - b2[2]]);
        norm3(&sum) + norm3(&diff)
    };
    let grid: Vec<(f64, f64)> = (0..n_pol)
        .flat_map(|i| {
            (0..n_az).map(move |j| {
                (
                    (i as f64 + 0.5) * PI / n_pol as f64,
                    j as f64 * 2.0 * PI / n_az as f64,
                )
            })
        })
        .collect();

    let (mut best_x, mut best) = grid
        .par_iter()
        .map(|&(t1, p1)| {
            grid.iter()
                .map(|&(t2, p2)| {
                    let x = [t1, p1, t2, p2];
                    (x, objective(&x))
                })
                .fold(([0.0; 4], f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc })
        })
        .reduce(|| ([0.0; 4], f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });

    let mut step = PI / n_pol as f64;
    for _ in 0..refine_iters {
        let mut improved = false;
        for k in 0..4 {
            for dir in [1.0, -1.0] {
                let mut x = best_x;
                x[k] += dir * step;
                let v = objective(&x);
                if v > best {
                    best = v;
                    best_x = x;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
    }
    best
}
