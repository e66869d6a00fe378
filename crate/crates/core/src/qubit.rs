//! Small dense complex linear algebra for one and two qubits.
//!
//! Single-qubit operators are written in the ordered basis `{|+⟩, |−⟩}` and
//! two-qubit operators in `{|++⟩, |+−⟩, |−+⟩, |−−⟩}`; `|+⟩` is always the first
//! basis vector, so `σ_z|+⟩ = +|+⟩`.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance for algebraic identities on exactly representable inputs.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for iterative eigen / SVD results.
pub const ITERATIVE_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix stored row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat<const N: usize>(pub [[C64; N]; N]);

pub type ComplexMat2 = CMat<2>;
pub type ComplexMat4 = CMat<4>;

impl<const N: usize> CMat<N> {
    pub fn zeros() -> Self {
        CMat([[ZERO; N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = ONE;
        }
        m
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn from_real(rows: [[f64; N]; N]) -> Self {
        Self::from_fn(|i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag(values: [C64; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = values[i];
        }
        m
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &[C64; N], v: &[C64; N]) -> Self {
        Self::from_fn(|i, j| u[i] * v[j].conj())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    pub fn scale(&self, k: C64) -> Self {
        Self::from_fn(|i, j| self.0[i][j] * k)
    }

    pub fn scale_re(&self, k: f64) -> Self {
        Self::from_fn(|i, j| self.0[i][j] * k)
    }

    pub fn mul_vec(&self, v: &[C64; N]) -> [C64; N] {
        let mut out = [ZERO; N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..N).map(|j| self.0[i][j] * v[j]).sum();
        }
        out
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    /// Largest `|M_ij − conj(M_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest deviation of `M†M` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Self::identity())
    }
}

impl<const N: usize> Index<(usize, usize)> for CMat<N> {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for CMat<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl<const N: usize> Mul for CMat<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| (0..N).map(|k| self.0[i][k] * rhs.0[k][j]).sum())
    }
}

impl<const N: usize> Add for CMat<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j] + rhs.0[i][j])
    }
}

impl<const N: usize> Sub for CMat<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j] - rhs.0[i][j])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

pub fn pauli(axis: Axis) -> ComplexMat2 {
    match axis {
        Axis::X => CMat([[ZERO, ONE], [ONE, ZERO]]),
        Axis::Y => CMat([[ZERO, -I], [I, ZERO]]),
        Axis::Z => CMat([[ONE, ZERO], [ZERO, -ONE]]),
    }
}

/// Kronecker product `A ⊗ B`, Alice's factor on the left.
pub fn tensor(a: &ComplexMat2, b: &ComplexMat2) -> ComplexMat4 {
    CMat::from_fn(|r, c| a.0[r / 2][c / 2] * b.0[r % 2][c % 2])
}

pub fn tensor_vec(u: &[C64; 2], v: &[C64; 2]) -> [C64; 4] {
    [u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1]]
}

/// A 4×4 Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix4 {
    mat: ComplexMat4,
}

impl DensityMatrix4 {
    pub fn new(mat: ComplexMat4) -> Result<Self> {
        if !mat.is_finite() {
            return Err(Error::validation("density matrix has non-finite entries"));
        }
        let herm = mat.hermitian_defect();
        if herm > EXACT_TOL {
            return Err(Error::validation(format!(
                "density matrix not Hermitian (defect {herm:e})"
            )));
        }
        let tr = mat.trace();
        if (tr - ONE).norm() > EXACT_TOL {
            return Err(Error::validation(format!("density matrix trace {tr} != 1")));
        }
        let eig = eig_hermitian4(&mat)?;
        let min = eig.values[3];
        if min < -EXACT_TOL {
            return Err(Error::validation(format!(
                "density matrix not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        Ok(DensityMatrix4 { mat })
    }

    /// Projector onto a (not necessarily normalized) pure state.
    pub fn from_pure(psi: &[C64; 4]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 || !norm2.is_finite() {
            return Err(Error::validation("pure state has zero norm"));
        }
        let mut p = CMat::outer(psi, psi).scale_re(1.0 / norm2);
        // exact hermiticity
        for i in 0..4 {
            p.0[i][i].im = 0.0;
        }
        Self::new(p)
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix4 {
            mat: ComplexMat4::identity().scale_re(0.25),
        }
    }

    /// `(|+−⟩ − |−+⟩)/√2`.
    pub fn singlet() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_pure(&[ZERO, C64::new(s, 0.0), C64::new(-s, 0.0), ZERO])
            .expect("singlet is a valid state")
    }

    pub fn matrix(&self) -> &ComplexMat4 {
        &self.mat
    }

    /// `Tr[O ρ]`.
    pub fn expect(&self, op: &ComplexMat4) -> C64 {
        (*op * self.mat).trace()
    }
}

/// A real unit 3-vector labelling the dichotomic observable `a·σ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementVector([f64; 3]);

impl MeasurementVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if !n.is_finite() || (n - 1.0).abs() > EXACT_TOL {
            return Err(Error::validation(format!(
                "measurement vector ({x}, {y}, {z}) has norm {n}, expected 1"
            )));
        }
        Ok(MeasurementVector([x, y, z]))
    }

    /// Rescale a nonzero vector to unit length.
    pub fn normalize(v: [f64; 3]) -> Result<Self> {
        let n = norm3(&v);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::validation("cannot normalize a zero vector"));
        }
        Ok(MeasurementVector([v[0] / n, v[1] / n, v[2] / n]))
    }

    pub fn axis(axis: Axis) -> Self {
        match axis {
            Axis::X => MeasurementVector([1.0, 0.0, 0.0]),
            Axis::Y => MeasurementVector([0.0, 1.0, 0.0]),
            Axis::Z => MeasurementVector([0.0, 0.0, 1.0]),
        }
    }

    /// Unit vector from polar angle `theta` and azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        MeasurementVector([theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn neg(&self) -> Self {
        MeasurementVector([-self.0[0], -self.0[1], -self.0[2]])
    }
}

pub fn observable_from_vector(v: &MeasurementVector) -> ComplexMat2 {
    let [x, y, z] = v.components();
    pauli(Axis::X).scale_re(x) + pauli(Axis::Y).scale_re(y) + pauli(Axis::Z).scale_re(z)
}

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn scale3(a: &[f64; 3], k: f64) -> [f64; 3] {
    [a[0] * k, a[1] * k, a[2] * k]
}

/// `C_ij = Tr[(σ_i ⊗ σ_j) ρ]` with indices over `(x, y, z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationMatrix(pub [[f64; 3]; 3]);

impl CorrelationMatrix {
    /// `a · C · b`.
    pub fn bilinear(&self, a: &[f64; 3], b: &[f64; 3]) -> f64 {
        dot3(a, &self.apply(b))
    }

    /// `C · v`.
    pub fn apply(&self, v: &[f64; 3]) -> [f64; 3] {
        [
            dot3(&self.0[0], v),
            dot3(&self.0[1], v),
            dot3(&self.0[2], v),
        ]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                m = m.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        m
    }
}

pub fn correlation_matrix(rho: &DensityMatrix4) -> Result<CorrelationMatrix> {
    let mut c = [[0.0; 3]; 3];
    for (i, ai) in Axis::ALL.iter().enumerate() {
        for (j, aj) in Axis::ALL.iter().enumerate() {
            let v = rho.expect(&tensor(&pauli(*ai), &pauli(*aj)));
            if v.im.abs() > ITERATIVE_TOL {
                return Err(Error::Numerical(format!(
                    "correlation entry ({i},{j}) has imaginary part {:e}",
                    v.im
                )));
            }
            if v.re.abs() > 1.0 + EXACT_TOL {
                return Err(Error::Numerical(format!(
                    "correlation entry ({i},{j}) = {} outside [-1, 1]",
                    v.re
                )));
            }
            c[i][j] = v.re.clamp(-1.0, 1.0);
        }
    }
    Ok(CorrelationMatrix(c))
}

/// `⟨A ⊗ B⟩ = Tr[(A ⊗ B) ρ]`, evaluated as an operator trace.
pub fn expectation_joint(rho: &DensityMatrix4, a: &MeasurementVector, b: &MeasurementVector) -> f64 {
    let op = tensor(&observable_from_vector(a), &observable_from_vector(b));
    rho.expect(&op).re.clamp(-1.0, 1.0)
}

/// Joint outcome distribution of two dichotomic measurements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutcomeProbs {
    pub pp: f64,
    pub pm: f64,
    pub mp: f64,
    pub mm: f64,
}

impl OutcomeProbs {
    pub fn total(&self) -> f64 {
        self.pp + self.pm + self.mp + self.mm
    }

    /// `Σ s·t·P(s, t)`.
    pub fn correlator(&self) -> f64 {
        self.pp - self.pm - self.mp + self.mm
    }

    /// Probability that the two outcomes differ.
    pub fn disagreement(&self) -> f64 {
        self.pm + self.mp
    }
}

/// `P(s, t) = Tr[((I + sA)/2 ⊗ (I + tB)/2) ρ]`.
pub fn joint_outcome_probs(
    rho: &DensityMatrix4,
    a: &MeasurementVector,
    b: &MeasurementVector,
) -> OutcomeProbs {
    let id = ComplexMat2::identity();
    let oa = observable_from_vector(a);
    let ob = observable_from_vector(b);
    let proj = |obs: &ComplexMat2, sign: f64| (id + obs.scale_re(sign)).scale_re(0.5);
    let p = |s: f64, t: f64| {
        rho.expect(&tensor(&proj(&oa, s), &proj(&ob, t)))
            .re
            .clamp(0.0, 1.0)
    };
    OutcomeProbs {
        pp: p(1.0, 1.0),
        pm: p(1.0, -1.0),
        mp: p(-1.0, 1.0),
        mm: p(-1.0, -1.0),
    }
}

/// Singular value decomposition of a real 3×3 matrix, `C = Σ sᵢ lᵢ rᵢᵀ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingularTriple {
    /// Descending, non-negative.
    pub values: [f64; 3],
    /// `left[i]` is `lᵢ`.
    pub left: [[f64; 3]; 3],
    /// `right[i]` is `rᵢ`.
    pub right: [[f64; 3]; 3],
}

impl SingularTriple {
    pub fn reconstruct(&self) -> CorrelationMatrix {
        let mut c = [[0.0; 3]; 3];
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    c[i][j] += self.values[k] * self.left[k][i] * self.right[k][j];
                }
            }
        }
        CorrelationMatrix(c)
    }
}

/// One-sided Jacobi SVD.
///
/// Equal singular values keep their column order `x, y, z`, and each pair is
/// signed so that the first nonzero component of `lᵢ` is positive with
/// `lᵢ·C·rᵢ = sᵢ ≥ 0`.
pub fn svd3(c: &CorrelationMatrix) -> SingularTriple {
    // columns of W = C V
    let mut w = [[0.0; 3]; 3];
    for j in 0..3 {
        for i in 0..3 {
            w[j][i] = c.0[i][j];
        }
    }
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..2 {
            for q in (p + 1)..3 {
                let alpha = dot3(&w[p], &w[p]);
                let beta = dot3(&w[q], &w[q]);
                let gamma = dot3(&w[p], &w[q]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for k in 0..3 {
                    let (wp, wq) = (w[p][k], w[q][k]);
                    w[p][k] = cs * wp - sn * wq;
                    w[q][k] = sn * wp + cs * wq;
                    let (vp, vq) = (v[p][k], v[q][k]);
                    v[p][k] = cs * vp - sn * vq;
                    v[q][k] = sn * vp + cs * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms = [norm3(&w[0]), norm3(&w[1]), norm3(&w[2])];
    let scale = norms.iter().cloned().fold(0.0, f64::max);
    let tie = 1e-12 * scale.max(f64::MIN_POSITIVE);

    // stable descending order; near-equal values keep axis order
    let mut order = [0usize, 1, 2];
    for i in 1..3 {
        let mut k = i;
        while k > 0 && norms[order[k]] > norms[order[k - 1]] + tie {
            order.swap(k, k - 1);
            k -= 1;
        }
    }

    let negligible = 1e-13 * scale.max(f64::MIN_POSITIVE);
    let cols: [[f64; 3]; 3] = [w[order[0]], w[order[1]], w[order[2]]];
    let right: [[f64; 3]; 3] = [v[order[0]], v[order[1]], v[order[2]]];
    let mut left = [[0.0; 3]; 3];

    // l1
    if norms[order[0]] > negligible {
        left[0] = scale3(&cols[0], 1.0 / norms[order[0]]);
    } else {
        left = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        return SingularTriple {
            values: [0.0; 3],
            left,
            right,
        };
    }
    // l2: Gram-Schmidt against l1, or any orthogonal completion
    let proj = dot3(&cols[1], &left[0]);
    let resid = [
        cols[1][0] - proj * left[0][0],
        cols[1][1] - proj * left[0][1],
        cols[1][2] - proj * left[0][2],
    ];
    let rn = norm3(&resid);
    left[1] = if norms[order[1]] > negligible && rn > negligible {
        scale3(&resid, 1.0 / rn)
    } else {
        orthogonal_completion(&left[0])
    };
    // l3 fixed by orthogonality, signed along the third column
    let l3 = cross3(&left[0], &left[1]);
    let l3 = scale3(&l3, 1.0 / norm3(&l3));
    left[2] = if dot3(&l3, &cols[2]) < 0.0 {
        scale3(&l3, -1.0)
    } else {
        l3
    };

    let mut values = [0.0; 3];
    let mut right = right;
    for k in 0..3 {
        let s = c.bilinear(&left[k], &right[k]);
        if s < 0.0 {
            right[k] = scale3(&right[k], -1.0);
        }
        values[k] = s.abs();
        // first clearly nonzero component of l positive
        if let Some(first) = left[k].iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                left[k] = scale3(&left[k], -1.0);
                right[k] = scale3(&right[k], -1.0);
            }
        }
    }
    SingularTriple {
        values,
        left,
        right,
    }
}

fn orthogonal_completion(u: &[f64; 3]) -> [f64; 3] {
    // axis least aligned with u
    let mut k = 0;
    for i in 1..3 {
        if u[i].abs() < u[k].abs() {
            k = i;
        }
    }
    let mut e = [0.0; 3];
    e[k] = 1.0;
    let p = dot3(&e, u);
    let r = [e[0] - p * u[0], e[1] - p * u[1], e[2] - p * u[2]];
    scale3(&r, 1.0 / norm3(&r))
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermitianEigen<const N: usize> {
    /// Descending.
    pub values: [f64; N],
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: [[C64; N]; N],
}

pub fn eig_hermitian4(m: &ComplexMat4) -> Result<HermitianEigen<4>> {
    eig_hermitian(m)
}

pub fn eig_hermitian2(m: &ComplexMat2) -> Result<HermitianEigen<2>> {
    eig_hermitian(m)
}

/// Cyclic complex Jacobi iteration.
pub fn eig_hermitian<const N: usize>(m: &CMat<N>) -> Result<HermitianEigen<N>> {
    if !m.is_finite() {
        return Err(Error::validation("matrix has non-finite entries"));
    }
    let defect = m.hermitian_defect();
    if defect > ITERATIVE_TOL {
        return Err(Error::validation(format!(
            "matrix not Hermitian (defect {defect:e})"
        )));
    }
    // symmetrize
    let mut a = (*m + m.adjoint()).scale_re(0.5);
    let mut vecs = CMat::<N>::identity();
    let frob = a
        .0
        .iter()
        .flat_map(|r| r.iter())
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();

    for _sweep in 0..100 {
        let off: f64 = (0..N)
            .flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.0[i][j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-16 * frob || off == 0.0 {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a.0[p][q];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let tau = (a.0[q][q].re - a.0[p][p].re) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                // U = diag(1, e^{-iφ}) · [[c, s], [-s, c]] on the (p, q) plane
                let mut u = CMat::<N>::identity();
                u.0[p][p] = C64::new(cs, 0.0);
                u.0[p][q] = C64::new(sn, 0.0);
                u.0[q][p] = phase.conj() * (-sn);
                u.0[q][q] = phase.conj() * cs;
                a = u.adjoint() * a * u;
                a.0[p][q] = ZERO;
                a.0[q][p] = ZERO;
                vecs = vecs * u;
            }
        }
    }

    let mut idx: Vec<usize> = (0..N).collect();
    idx.sort_by(|&i, &j| a.0[j][j].re.total_cmp(&a.0[i][i].re));
    let mut values = [0.0; N];
    let mut vectors = [[ZERO; N]; N];
    for (k, &i) in idx.iter().enumerate() {
        values[k] = a.0[i][i].re;
        for r in 0..N {
            vectors[k][r] = vecs.0[r][i];
        }
    }
    Ok(HermitianEigen { values, vectors })
}
