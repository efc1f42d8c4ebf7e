//! Qubit channels in Choi form: validation, Bloch-ellipsoid geometry, linear optimization over
//! CPTP maps, and feasibility of mapping one set of pure states onto another.

use nalgebra::{Cholesky, Matrix3, SMatrix, SVector, Vector3, SVD};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{
    bloch_operator, c, hermiticity_residual, herm_eig, identity2, kron2, max_abs, paulis, unitary_from_rotation,
    BlochVector, Mat2, Mat4, NumericsError, C64, TOL_ALGEBRAIC, TOL_STRUCTURAL,
};

/// Subsystem order of a 4×4 Choi matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChoiConvention {
    /// J = Σ_ij Φ(|i⟩⟨j|) ⊗ |i⟩⟨j|.
    OutputFirst,
    /// J = Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|).
    InputFirst,
}

/// Convention under which the printed explicit-strategy matrices are trace preserving.
pub const RESOLVED_CONVENTION: ChoiConvention = ChoiConvention::OutputFirst;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("Choi matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("invalid channel: min eigenvalue {min_eigenvalue:e}, trace-preservation residual {tp_residual:e}")]
    InvalidChannel { min_eigenvalue: f64, tp_residual: f64 },
    #[error("invalid density operator: {0}")]
    InvalidState(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Qubit channel stored in the output-first convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChoiFile", into = "ChoiFile")]
pub struct ChoiMatrix {
    matrix: Mat4,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ChoiFile {
    convention: ChoiConvention,
    matrix: [[[f64; 2]; 4]; 4],
}

impl TryFrom<ChoiFile> for ChoiMatrix {
    type Error = ChannelError;

    fn try_from(f: ChoiFile) -> Result<Self, ChannelError> {
        let m = Mat4::from_fn(|i, j| c(f.matrix[i][j][0], f.matrix[i][j][1]));
        let dev = hermiticity_residual(&m);
        if dev > TOL_STRUCTURAL {
            return Err(ChannelError::NotHermitian(dev));
        }
        Ok(ChoiMatrix::new(m, f.convention))
    }
}

impl From<ChoiMatrix> for ChoiFile {
    fn from(j: ChoiMatrix) -> Self {
        let mut matrix = [[[0.0; 2]; 4]; 4];
        for (i, row) in matrix.iter_mut().enumerate() {
            for (k, e) in row.iter_mut().enumerate() {
                *e = [j.matrix[(i, k)].re, j.matrix[(i, k)].im];
            }
        }
        ChoiFile { convention: ChoiConvention::OutputFirst, matrix }
    }
}

/// Exchanges the two tensor factors of a two-qubit operator.
pub fn swap_subsystems(m: &Mat4) -> Mat4 {
    let sw = |k: usize| (k & 1) << 1 | k >> 1;
    Mat4::from_fn(|i, j| m[(sw(i), sw(j))])
}

/// Trace over the first tensor factor.
pub fn trace_first(m: &Mat4) -> Mat2 {
    Mat2::from_fn(|i, j| m[(i, j)] + m[(2 + i, 2 + j)])
}

/// Trace over the second tensor factor.
pub fn trace_second(m: &Mat4) -> Mat2 {
    Mat2::from_fn(|a, b| m[(2 * a, 2 * b)] + m[(2 * a + 1, 2 * b + 1)])
}

/// Trace-preservation residual of a raw matrix read in the given convention.
pub fn tp_residual_under(m: &Mat4, convention: ChoiConvention) -> f64 {
    let reduced = match convention {
        ChoiConvention::OutputFirst => trace_first(m),
        ChoiConvention::InputFirst => trace_second(m),
    };
    max_abs(&(reduced - identity2()))
}

/// Conventions under which a raw Choi matrix is trace preserving within 1e-8.
pub fn resolve_convention(m: &Mat4) -> Vec<ChoiConvention> {
    [ChoiConvention::OutputFirst, ChoiConvention::InputFirst]
        .into_iter()
        .filter(|&cv| tp_residual_under(m, cv) <= TOL_ALGEBRAIC)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChoiValidity {
    pub cp: bool,
    pub tp: bool,
    pub min_eigenvalue: f64,
    pub tp_residual: f64,
}

impl ChoiMatrix {
    pub fn new(m: Mat4, convention: ChoiConvention) -> Self {
        let matrix = match convention {
            ChoiConvention::OutputFirst => m,
            ChoiConvention::InputFirst => swap_subsystems(&m),
        };
        Self { matrix }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.matrix
    }

    pub fn matrix_in(&self, convention: ChoiConvention) -> Mat4 {
        match convention {
            ChoiConvention::OutputFirst => self.matrix,
            ChoiConvention::InputFirst => swap_subsystems(&self.matrix),
        }
    }

    pub fn identity() -> Self {
        Self::from_unitary(&identity2())
    }

    pub fn from_unitary(u: &Mat2) -> Self {
        Self::from_kraus(&[*u])
    }

    /// Channel ρ ↦ Tr(ρ) I/2.
    pub fn completely_depolarizing() -> Self {
        Self { matrix: Mat4::identity() * c(0.5, 0.0) }
    }

    pub fn from_kraus(kraus: &[Mat2]) -> Self {
        let mut matrix = Mat4::zeros();
        for k in kraus {
            let v = SVector::<C64, 4>::from_fn(|idx, _| k[(idx >> 1, idx & 1)]);
            matrix += v * v.adjoint();
        }
        Self { matrix }
    }

    /// Channel with Bloch action r ↦ T r + t.
    pub fn from_affine(t_mat: &Matrix3<f64>, t_vec: &Vector3<f64>) -> Self {
        let p = paulis();
        let image_of_identity = identity2() + (0..3).fold(Mat2::zeros(), |acc, k| acc + p[k] * c(t_vec[k], 0.0));
        let image = |l: usize| (0..3).fold(Mat2::zeros(), |acc, k| acc + p[k] * c(t_mat[(k, l)], 0.0));
        let mut matrix = Mat4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                let mut e = Mat2::zeros();
                e[(i, j)] = c(1.0, 0.0);
                // |i⟩⟨j| = Σ_μ ½ Tr(σ_μ |i⟩⟨j|) σ_μ
                let mut out = image_of_identity * c(0.5 * (i == j) as u8 as f64, 0.0);
                for (l, pl) in p.iter().enumerate() {
                    out += image(l) * (pl * e).trace() * c(0.5, 0.0);
                }
                matrix += kron2(&out, &e);
            }
        }
        Self { matrix }
    }

    /// Φ(ρ) = Σ_ij ρ_ij Φ(|i⟩⟨j|) without validity checks.
    pub fn apply(&self, rho: &Mat2) -> Mat2 {
        let j = &self.matrix;
        Mat2::from_fn(|a, b| {
            let mut s = c(0.0, 0.0);
            for i in 0..2 {
                for k in 0..2 {
                    s += rho[(i, k)] * j[(2 * a + i, 2 * b + k)];
                }
            }
            s
        })
    }

    /// Heisenberg-picture map Φ†(E), so that Tr[E Φ(ρ)] = Tr[Φ†(E) ρ].
    pub fn adjoint_apply(&self, e: &Mat2) -> Mat2 {
        let j = &self.matrix;
        Mat2::from_fn(|jj, ii| {
            let mut s = c(0.0, 0.0);
            for a in 0..2 {
                for b in 0..2 {
                    s += e[(b, a)] * j[(2 * a + ii, 2 * b + jj)];
                }
            }
            s
        })
    }

    /// Bloch-affine action (T, t) with T_kl = ½Tr[σ_k Φ(σ_l)] and t_k = ½Tr[σ_k Φ(I)].
    pub fn affine(&self) -> (Matrix3<f64>, Vector3<f64>) {
        let p = paulis();
        let images = p.map(|s| self.apply(&s));
        let id_image = self.apply(&identity2());
        let t_mat = Matrix3::from_fn(|k, l| 0.5 * (p[k] * images[l]).trace().re);
        let t_vec = Vector3::from_fn(|k, _| 0.5 * (p[k] * id_image).trace().re);
        (t_mat, t_vec)
    }

    /// Composition: first `self`, then `after`.
    pub fn then(&self, after: &ChoiMatrix) -> ChoiMatrix {
        let mut matrix = Mat4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                let mut e = Mat2::zeros();
                e[(i, j)] = c(1.0, 0.0);
                matrix += kron2(&after.apply(&self.apply(&e)), &e);
            }
        }
        ChoiMatrix { matrix }
    }

    pub fn tp_residual(&self) -> f64 {
        tp_residual_under(&self.matrix, ChoiConvention::OutputFirst)
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("Choi serialization cannot fail")
    }
}

/// CP and TP flags with the minimum eigenvalue and trace-preservation residual.
pub fn validate_choi(j: &ChoiMatrix) -> Result<ChoiValidity, ChannelError> {
    let dev = hermiticity_residual(j.matrix());
    if dev > TOL_STRUCTURAL {
        return Err(ChannelError::NotHermitian(dev));
    }
    let eig = herm_eig(j.matrix())?;
    let min_eigenvalue = eig.min();
    let tp_residual = j.tp_residual();
    Ok(ChoiValidity { cp: min_eigenvalue >= -TOL_ALGEBRAIC, tp: tp_residual <= TOL_ALGEBRAIC, min_eigenvalue, tp_residual })
}

fn require_valid(j: &ChoiMatrix) -> Result<(), ChannelError> {
    let v = validate_choi(j)?;
    if v.cp && v.tp {
        Ok(())
    } else {
        Err(ChannelError::InvalidChannel { min_eigenvalue: v.min_eigenvalue, tp_residual: v.tp_residual })
    }
}

/// Checks that ρ is a density operator within the structural tolerance.
pub fn check_state(rho: &Mat2) -> Result<(), ChannelError> {
    let dev = hermiticity_residual(rho);
    if dev > TOL_STRUCTURAL {
        return Err(ChannelError::InvalidState(format!("not Hermitian ({dev:e})")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TOL_STRUCTURAL || tr.im.abs() > TOL_STRUCTURAL {
        return Err(ChannelError::InvalidState(format!("trace {tr}")));
    }
    let min = herm_eig(rho)?.min();
    if min < -TOL_STRUCTURAL {
        return Err(ChannelError::InvalidState(format!("negative eigenvalue {min:e}")));
    }
    Ok(())
}

/// Output state of a valid channel on a valid state.
pub fn apply_channel(j: &ChoiMatrix, rho: &Mat2) -> Result<Mat2, ChannelError> {
    require_valid(j)?;
    check_state(rho)?;
    Ok(j.apply(rho))
}

/// Bloch ellipsoid of a channel in its principal frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidParams {
    /// Signed semi-axes, |λ1| ≥ |λ2| ≥ |λ3|; only λ3 can be negative (improper Bloch action).
    pub lambda: [f64; 3],
    /// Centre of the ellipsoid in the principal frame.
    pub t: [f64; 3],
    pub improper: bool,
}

/// Semi-axes and centre after factoring out proper rotations on both sides of the Bloch action.
pub fn ellipsoid_params(j: &ChoiMatrix) -> Result<EllipsoidParams, ChannelError> {
    require_valid(j)?;
    let (t_mat, t_vec) = j.affine();
    Ok(ellipsoid_from_affine(&t_mat, &t_vec))
}

pub fn ellipsoid_from_affine(t_mat: &Matrix3<f64>, t_vec: &Vector3<f64>) -> EllipsoidParams {
    let svd = SVD::new(*t_mat, true, true);
    let u0 = svd.u.expect("requested U");
    let vt0 = svd.v_t.expect("requested V^T");
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut u = Matrix3::from_fn(|r, k| u0[(r, order[k])]);
    let mut v = Matrix3::from_fn(|r, k| vt0[(order[k], r)]);
    let mut lambda = order.map(|k| svd.singular_values[k]);
    if u.determinant() < 0.0 {
        u.column_mut(2).neg_mut();
        lambda[2] = -lambda[2];
    }
    if v.determinant() < 0.0 {
        v.column_mut(2).neg_mut();
        lambda[2] = -lambda[2];
    }
    let tp = u.transpose() * t_vec;
    EllipsoidParams { lambda, t: [tp[0], tp[1], tp[2]], improper: t_mat.determinant() < 0.0 }
}

/// (λ1 + λ2)² ≤ (1 + λ3)² − t3².
pub fn cp_necessary_condition(e: &EllipsoidParams) -> bool {
    let [l1, l2, l3] = e.lambda;
    (l1 + l2).powi(2) <= (1.0 + l3).powi(2) - e.t[2].powi(2) + TOL_STRUCTURAL
}

/// The same inequality with every axis in turn playing the role of the third.
pub fn cp_necessary_condition_all_axes(e: &EllipsoidParams) -> bool {
    (0..3).all(|k| {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        (e.lambda[i] + e.lambda[j]).powi(2) <= (1.0 + e.lambda[k]).powi(2) - e.t[k].powi(2) + TOL_STRUCTURAL
    })
}

/// Smallest λ3 compatible with the necessary condition for given λ1, λ2, t3.
pub fn required_lambda3(l1: f64, l2: f64, t3: f64) -> f64 {
    ((l1 + l2).powi(2) + t3 * t3).sqrt() - 1.0
}

/// Result of maximizing Re Tr[J W] over CPTP maps.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOptimum {
    pub choi: ChoiMatrix,
    pub value: f64,
}

const BARRIER_GAP: f64 = 1e-11;
const BARRIER_GROWTH: f64 = 20.0;

fn choi_basis() -> [Mat4; 12] {
    let p = paulis();
    let inputs = [identity2(), p[0], p[1], p[2]];
    std::array::from_fn(|k| kron2(&p[k / 4], &inputs[k % 4]))
}

fn choi_from_params(basis: &[Mat4; 12], x: &SVector<f64, 12>) -> Mat4 {
    let mut j = Mat4::identity() * c(0.5, 0.0);
    for (b, &xk) in basis.iter().zip(x.iter()) {
        j += b * c(xk, 0.0);
    }
    j
}

fn trace_product(a: &Mat4, b: &Mat4) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for k in 0..4 {
            s += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    s
}

/// log det of a Hermitian matrix via Cholesky; None unless positive definite.
fn log_det_pd(j: &Mat4) -> Option<f64> {
    let mut l = Mat4::zeros();
    let mut s = 0.0;
    for i in 0..4 {
        for k in 0..=i {
            let mut acc = j[(i, k)];
            for m in 0..k {
                acc -= l[(i, m)] * l[(k, m)].conj();
            }
            if i == k {
                if !(acc.re > 0.0) {
                    return None;
                }
                let d = acc.re.sqrt();
                l[(i, i)] = c(d, 0.0);
                s += 2.0 * d.ln();
            } else {
                l[(i, k)] = acc / l[(k, k)];
            }
        }
    }
    Some(s)
}

/// Maximizes Re Tr[J W] over Choi matrices of CPTP maps with a log-barrier Newton method. The
/// iterate stays trace preserving by construction (J = I/2 + Σ x_k σ_a ⊗ σ_b with a ≠ 0) and
/// strictly positive definite; the returned value is within 1e-11 of the optimum.
pub fn maximize_linear(w: &Mat4) -> ChannelOptimum {
    let w = (w + w.adjoint()) * c(0.5, 0.0);
    let basis = choi_basis();
    let g = SVector::<f64, 12>::from_fn(|k, _| trace_product(&basis[k], &w));
    let base = 0.5 * w.trace().re;
    let scale = g.amax().max(1e-300);
    let mut x = SVector::<f64, 12>::zeros();
    let mut t = 1.0 / scale;
    loop {
        for _ in 0..100 {
            let j = choi_from_params(&basis, &x);
            let Some(jinv) = j.try_inverse() else { break };
            let m: [Mat4; 12] = std::array::from_fn(|k| jinv * basis[k]);
            let grad = SVector::<f64, 12>::from_fn(|k, _| t * g[k] + trace_product_id(&m[k]));
            let mut h = SMatrix::<f64, 12, 12>::zeros();
            for k in 0..12 {
                for l in k..12 {
                    let v = trace_product(&m[k], &m[l]);
                    h[(k, l)] = v;
                    h[(l, k)] = v;
                }
            }
            let step = match Cholesky::new(h) {
                Some(ch) => ch.solve(&grad),
                None => match h.try_inverse() {
                    Some(inv) => inv * grad,
                    None => break,
                },
            };
            let decrement = grad.dot(&step);
            if !(decrement > 1e-14) {
                break;
            }
            let phi = |y: &SVector<f64, 12>| -> Option<f64> {
                let jj = choi_from_params(&basis, y);
                Some(t * g.dot(y) + log_det_pd(&jj)?)
            };
            let phi0 = phi(&x).unwrap_or(f64::NEG_INFINITY);
            let mut s = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let cand = x + step * s;
                if let Some(v) = phi(&cand) {
                    if v >= phi0 + 0.25 * s * decrement {
                        x = cand;
                        accepted = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !accepted || decrement < 1e-12 {
                break;
            }
        }
        if 4.0 / t < BARRIER_GAP * scale.max(1.0) {
            break;
        }
        t *= BARRIER_GROWTH;
    }
    let matrix = choi_from_params(&basis, &x);
    ChannelOptimum { value: base + g.dot(&x), choi: ChoiMatrix { matrix } }
}

fn trace_product_id(m: &Mat4) -> f64 {
    (0..4).map(|i| m[(i, i)].re).sum()
}

/// Frobenius-nearest CPTP Choi matrix by Dykstra alternating projections.
pub fn project_cptp(j: &ChoiMatrix) -> Result<ChoiMatrix, ChannelError> {
    let h = (j.matrix + j.matrix.adjoint()) * c(0.5, 0.0);
    let start = ChoiMatrix { matrix: h };
    let v = validate_choi(&start)?;
    if v.min_eigenvalue >= 0.0 && v.tp_residual <= 1e-12 {
        return Ok(start);
    }
    let project_psd = |m: &Mat4| -> Result<Mat4, ChannelError> {
        let e = herm_eig(m)?;
        let clipped = e.values.map(|l| c(l.max(0.0), 0.0));
        Ok(e.vectors * Mat4::from_diagonal(&clipped) * e.vectors.adjoint())
    };
    let project_tp = |m: &Mat4| -> Mat4 {
        let d = trace_first(m) - identity2();
        m - kron2(&(identity2() * c(0.5, 0.0)), &d)
    };
    let mut x = project_tp(&h);
    let mut p = Mat4::zeros();
    for _ in 0..100_000 {
        let y = project_psd(&(x + p))?;
        p = x + p - y;
        let y = (y + y.adjoint()) * c(0.5, 0.0);
        let min_y = herm_eig(&y)?.min();
        let tp_y = tp_residual_under(&y, ChoiConvention::OutputFirst);
        if min_y >= -1e-12 && tp_y <= 1e-9 {
            return Ok(ChoiMatrix { matrix: y });
        }
        x = project_tp(&y);
        let min_x = herm_eig(&x)?.min();
        if min_x >= -1e-9 {
            return Ok(ChoiMatrix { matrix: x });
        }
    }
    Err(ChannelError::InvalidChannel {
        min_eigenvalue: herm_eig(&x)?.min(),
        tp_residual: tp_residual_under(&x, ChoiConvention::OutputFirst),
    })
}

/// Why a map between four pure states does or does not exist.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// A proper rotation mapping each source onto its target, with its unitary channel.
    Rotation { rotation: Matrix3<f64>, choi: ChoiMatrix },
    /// A non-unitary channel found by optimization, reaching total fidelity 4.
    Channel { choi: ChoiMatrix },
    /// Coplanar targets at offset h: the CP condition needs λ3 ≥ required while fitting inside
    /// the unit ball allows at most λ3 ≤ allowed.
    EllipsoidBounds { offset: f64, radius: f64, required_lambda3: f64, allowed_lambda3: f64 },
    /// No channel reaches total fidelity 4, but the targets are not coplanar.
    FidelityGap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub certificate: Certificate,
    /// Maximum of Σ_i ⟨t_i|Φ(ρ_{s_i})|t_i⟩ over CPTP maps (4 exactly when feasible).
    pub best_total_fidelity: f64,
}

/// Proper rotation closest to mapping `sources` onto `targets` (Kabsch).
pub fn best_rotation(sources: &[BlochVector], targets: &[BlochVector]) -> (Matrix3<f64>, f64) {
    let mut h = Matrix3::zeros();
    for (s, t) in sources.iter().zip(targets) {
        h += s.to_vector() * t.to_vector().transpose();
    }
    let svd = SVD::new(h, true, true);
    let (u, vt) = (svd.u.expect("U"), svd.v_t.expect("V^T"));
    let d = (vt.transpose() * u.transpose()).determinant().signum();
    let r = vt.transpose() * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d)) * u.transpose();
    let err = sources.iter().zip(targets).map(|(s, t)| (r * s.to_vector() - t.to_vector()).amax()).fold(0.0, f64::max);
    (r, err)
}

/// Plane fit of target points: returns (|offset|, radius, worst deviation from the plane).
fn plane_of(targets: &[BlochVector]) -> (f64, f64, f64) {
    let n = targets.len() as f64;
    let mean = targets.iter().fold(Vector3::zeros(), |a, t| a + t.to_vector()) / n;
    let mut cov = Matrix3::zeros();
    for t in targets {
        let d = t.to_vector() - mean;
        cov += d * d.transpose();
    }
    let eig = cov.symmetric_eigen();
    let k = (0..3).min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b])).unwrap();
    let normal = eig.eigenvectors.column(k).into_owned();
    let h = normal.dot(&mean);
    let flat = targets.iter().map(|t| (normal.dot(&t.to_vector()) - h).abs()).fold(0.0, f64::max);
    let radius = targets.iter().map(|t| (t.to_vector() - normal * h).norm()).sum::<f64>() / n;
    (h.abs(), radius, flat)
}

/// Decides whether some CPTP map sends each pure source state to the matching pure target.
pub fn reflection_feasibility(targets: &[BlochVector; 4], sources: &[BlochVector; 4]) -> FeasibilityReport {
    let (rotation, err) = best_rotation(sources, targets);
    let mut w = Mat4::zeros();
    for (s, t) in sources.iter().zip(targets) {
        w += kron2(&bloch_operator(*t), &bloch_operator(*s).transpose());
    }
    if err <= TOL_STRUCTURAL {
        let choi = ChoiMatrix::from_unitary(&unitary_from_rotation(&rotation));
        let best = (w * choi.matrix()).trace().re;
        return FeasibilityReport { feasible: true, certificate: Certificate::Rotation { rotation, choi }, best_total_fidelity: best };
    }
    let opt = maximize_linear(&w);
    if opt.value >= 4.0 - 1e-7 {
        return FeasibilityReport {
            feasible: true,
            certificate: Certificate::Channel { choi: opt.choi },
            best_total_fidelity: opt.value,
        };
    }
    let (offset, radius, flat) = plane_of(targets);
    let certificate = if flat <= TOL_STRUCTURAL {
        Certificate::EllipsoidBounds {
            offset,
            radius,
            required_lambda3: required_lambda3(radius, radius, offset),
            allowed_lambda3: 1.0 - offset,
        }
    } else {
        Certificate::FidelityGap
    };
    FeasibilityReport { feasible: false, certificate, best_total_fidelity: opt.value }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{rotation_unitary, sigma_x, unitary_bloch_action};
    use std::f64::consts::PI;

    #[test]
    fn identity_channel_valid() {
        let v = validate_choi(&ChoiMatrix::identity()).unwrap();
        assert!(v.cp && v.tp);
        assert!((ChoiMatrix::identity().matrix().trace().re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn negative_diagonal_not_cp() {
        let m = Mat4::from_diagonal(&SVector::<C64, 4>::from([c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-0.1, 0.0)]));
        let v = validate_choi(&ChoiMatrix::new(m, ChoiConvention::OutputFirst)).unwrap();
        assert!(!v.cp);
        assert!((v.min_eigenvalue + 0.1).abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = Mat4::identity();
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(
            validate_choi(&ChoiMatrix::new(m, ChoiConvention::OutputFirst)),
            Err(ChannelError::NotHermitian(_))
        ));
    }

    #[test]
    fn apply_examples() {
        let zero = bloch_operator(BlochVector::new(0.0, 0.0, 1.0));
        assert!(max_abs(&(apply_channel(&ChoiMatrix::identity(), &zero).unwrap() - zero)) < 1e-15);
        let rx = ChoiMatrix::from_unitary(&rotation_unitary(BlochVector::new(1.0, 0.0, 0.0), PI).unwrap());
        let s = 1.0 / 3f64.sqrt();
        let out = apply_channel(&rx, &bloch_operator(BlochVector::new(s, s, s))).unwrap();
        assert!(crate::numerics::state_to_bloch(&out).max_deviation(BlochVector::new(s, -s, -s)) < 1e-12);
        let dep = ChoiMatrix::completely_depolarizing();
        let out = apply_channel(&dep, &zero).unwrap();
        assert!(max_abs(&(out - identity2() * c(0.5, 0.0))) < 1e-15);
        assert!(matches!(apply_channel(&ChoiMatrix::identity(), &(zero * c(2.0, 0.0))), Err(ChannelError::InvalidState(_))));
    }

    #[test]
    fn adjoint_is_dual() {
        let j = ChoiMatrix::from_unitary(&rotation_unitary(BlochVector::new(0.0, 0.6, 0.8), 1.1).unwrap());
        let rho = bloch_operator(BlochVector::new(0.1, 0.2, 0.3));
        let e = bloch_operator(BlochVector::new(-0.4, 0.5, 0.2));
        let lhs = (e * j.apply(&rho)).trace();
        let rhs = (j.adjoint_apply(&e) * rho).trace();
        assert!((lhs - rhs).norm() < 1e-14);
        let obj = (j.matrix() * kron2(&e, &rho.transpose())).trace();
        assert!((lhs - obj).norm() < 1e-14);
    }

    #[test]
    fn ellipsoid_examples() {
        let e = ellipsoid_params(&ChoiMatrix::identity()).unwrap();
        assert!(e.lambda.iter().all(|l| (l - 1.0).abs() < 1e-12) && e.t.iter().all(|t| t.abs() < 1e-12));
        let e = ellipsoid_params(&ChoiMatrix::completely_depolarizing()).unwrap();
        assert!(e.lambda.iter().chain(e.t.iter()).all(|v| v.abs() < 1e-12));
        let damp = ChoiMatrix::from_affine(
            &Matrix3::from_diagonal(&Vector3::new(0.5f64.sqrt(), 0.5f64.sqrt(), 0.5)),
            &Vector3::new(0.0, 0.0, 0.5),
        );
        let e = ellipsoid_params(&damp).unwrap();
        assert!((e.lambda[2] - 0.5).abs() < 1e-8 && (e.t[2] - 0.5).abs() < 1e-8);
        assert!((e.lambda[0] - 0.5f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn cp_condition_examples() {
        let unit = EllipsoidParams { lambda: [1.0; 3], t: [0.0; 3], improper: false };
        assert!(cp_necessary_condition(&unit));
        let r = (2.0f64 / 3.0).sqrt();
        let bad = EllipsoidParams { lambda: [r, r, 0.5], t: [0.0, 0.0, 1.0 / 3f64.sqrt()], improper: false };
        assert!(!cp_necessary_condition(&bad));
        assert!((required_lambda3(r, r, 1.0 / 3f64.sqrt()) - (3f64.sqrt() - 1.0)).abs() < 1e-12);
        let zero = EllipsoidParams { lambda: [0.0; 3], t: [0.0; 3], improper: false };
        assert!(cp_necessary_condition(&zero));
    }

    #[test]
    fn transpose_map_is_improper_and_not_cp() {
        let m = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0));
        let j = ChoiMatrix::from_affine(&m, &Vector3::zeros());
        assert!(!validate_choi(&j).unwrap().cp);
        let e = ellipsoid_from_affine(&m, &Vector3::zeros());
        assert!(e.improper && e.lambda[2] < 0.0);
        assert!(!cp_necessary_condition(&e));
    }

    #[test]
    fn convention_swap_round_trip() {
        let j = ChoiMatrix::from_affine(&Matrix3::from_diagonal(&Vector3::new(0.6, 0.6, 0.36)), &Vector3::new(0.0, 0.0, 0.64));
        assert!(validate_choi(&j).unwrap().cp);
        let input_first = j.matrix_in(ChoiConvention::InputFirst);
        assert_eq!(ChoiMatrix::new(input_first, ChoiConvention::InputFirst), j);
        assert_eq!(resolve_convention(&input_first), vec![ChoiConvention::InputFirst]);
    }

    #[test]
    fn barrier_recovers_unitary() {
        let u = rotation_unitary(BlochVector::new(1.0, 0.0, 0.0), PI).unwrap();
        let target = ChoiMatrix::from_unitary(&u);
        let opt = maximize_linear(target.matrix());
        assert!((opt.value - 4.0).abs() < 1e-9, "{}", opt.value);
        let v = validate_choi(&opt.choi).unwrap();
        assert!(v.cp && v.tp);
        let (t, _) = opt.choi.affine();
        assert!((t - unitary_bloch_action(&u)).amax() < 1e-5);
    }

    #[test]
    fn barrier_with_zero_objective_stays_valid() {
        let opt = maximize_linear(&Mat4::zeros());
        assert!(opt.value.abs() < 1e-15);
        assert!(validate_choi(&opt.choi).unwrap().cp);
    }

    #[test]
    fn projection_fixes_valid_and_repairs_invalid() {
        let j = ChoiMatrix::from_unitary(&sigma_x());
        let p = project_cptp(&j).unwrap();
        assert!(max_abs(&(p.matrix() - j.matrix())) < 1e-10);
        let bad = ChoiMatrix::new(j.matrix() * c(1.3, 0.0) - Mat4::identity() * c(0.2, 0.0), ChoiConvention::OutputFirst);
        let p = project_cptp(&bad).unwrap();
        let v = validate_choi(&p).unwrap();
        assert!(v.min_eigenvalue >= -1e-9 && v.tp_residual <= 1e-9);
    }
}
