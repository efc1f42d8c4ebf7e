//! Small dense complex linear algebra, Bloch-sphere helpers and a dense simplex solver.

use nalgebra::{Complex, Matrix2, Matrix3, Matrix4, SMatrix, Rotation3, SVector, UnitQuaternion, Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;
pub type Ket2 = Vector2<C64>;
pub type ComplexMatrix<const N: usize> = SMatrix<C64, N, N>;

/// Tolerance for structural checks (hermiticity, normalization, completeness).
pub const TOL_STRUCTURAL: f64 = 1e-9;
/// Tolerance for algebraic identities (reconstructions, round trips).
pub const TOL_ALGEBRAIC: f64 = 1e-8;
/// Tolerance for optimized values.
pub const TOL_OPTIMIZATION: f64 = 1e-6;

const MAX_SWEEPS: usize = 10_000;
const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("Jacobi iteration did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("Bloch vector norm {0} exceeds 1")]
    NormViolation(f64),
    #[error("Bloch vector norm {0} is not 1 for a pure state")]
    NotPure(f64),
    #[error("rotation axis has norm {0}, expected 1")]
    AxisNotNormalized(f64),
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity2() -> Mat2 {
    Mat2::identity()
}

pub fn sigma_x() -> Mat2 {
    Mat2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
}

pub fn sigma_y() -> Mat2 {
    Mat2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0))
}

pub fn sigma_z() -> Mat2 {
    Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0))
}

/// Pauli matrices in the order X, Y, Z.
pub fn paulis() -> [Mat2; 3] {
    [sigma_x(), sigma_y(), sigma_z()]
}

pub fn ket(a: C64, b: C64) -> Ket2 {
    Ket2::new(a, b)
}

pub fn projector(v: &Ket2) -> Mat2 {
    v * v.adjoint()
}

/// Largest absolute entry.
pub fn max_abs<const N: usize, const M: usize>(m: &SMatrix<C64, N, M>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_residual<const N: usize>(m: &ComplexMatrix<N>) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn is_finite<const N: usize, const M: usize>(m: &SMatrix<C64, N, M>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Kronecker product `a ⊗ b` of two qubit operators.
pub fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    a.kronecker(b)
}

/// Hermitian eigendecomposition with eigenvalues sorted in descending order.
#[derive(Debug, Clone)]
pub struct HermEig<const N: usize> {
    pub values: SVector<f64, N>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: ComplexMatrix<N>,
}

impl<const N: usize> HermEig<N> {
    pub fn vector(&self, k: usize) -> SVector<C64, N> {
        self.vectors.column(k).into_owned()
    }

    pub fn reconstruct(&self) -> ComplexMatrix<N> {
        let d = ComplexMatrix::<N>::from_diagonal(&self.values.map(|x| c(x, 0.0)));
        self.vectors * d * self.vectors.adjoint()
    }

    pub fn min(&self) -> f64 {
        self.values[N - 1]
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
pub fn herm_eig<const N: usize>(m: &ComplexMatrix<N>) -> Result<HermEig<N>, NumericsError> {
    if !is_finite(m) {
        return Err(NumericsError::NonFinite);
    }
    let dev = hermiticity_residual(m);
    if dev > TOL_STRUCTURAL {
        return Err(NumericsError::NotHermitian(dev));
    }
    let mut a = (m + m.adjoint()) * c(0.5, 0.0);
    let mut v = ComplexMatrix::<N>::identity();
    let scale = a.norm();
    let mut converged = scale == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off: f64 = (0..N)
            .flat_map(|p| (0..N).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[(p, q)];
                let b = apq.norm();
                if b <= 1e-300 {
                    continue;
                }
                let phase = apq / b;
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * b);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                let mut g = ComplexMatrix::<N>::identity();
                g[(p, p)] = c(cs, 0.0);
                g[(p, q)] = c(sn, 0.0);
                g[(q, p)] = -phase.conj() * sn;
                g[(q, q)] = phase.conj() * cs;
                a = g.adjoint() * a * g;
                v *= g;
                a[(p, q)] = c(0.0, 0.0);
                a[(q, p)] = c(0.0, 0.0);
            }
        }
    }
    if !converged {
        return Err(NumericsError::NoConvergence(MAX_SWEEPS));
    }
    let mut order: Vec<usize> = (0..N).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re).then(i.cmp(&j)));
    let mut values = SVector::<f64, N>::zeros();
    let mut vectors = ComplexMatrix::<N>::zeros();
    for (k, &i) in order.iter().enumerate() {
        values[k] = a[(i, i)].re;
        let mut col = v.column(i).into_owned();
        fix_phase(&mut col);
        vectors.set_column(k, &col);
    }
    Ok(HermEig { values, vectors })
}

/// Rotates the global phase so the largest-magnitude component is real and positive.
pub fn fix_phase<const N: usize>(v: &mut SVector<C64, N>) {
    let mut best = 0;
    for k in 1..N {
        if v[k].norm() > v[best].norm() + 1e-12 {
            best = k;
        }
    }
    let n = v[best].norm();
    if n > 0.0 {
        let ph = v[best].conj() / n;
        *v *= ph;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn norm(self) -> f64 {
        self.to_vector().norm()
    }

    pub fn dot(self, o: BlochVector) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        Self::new(self.x / n, self.y / n, self.z / n)
    }

    pub fn scaled(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn distance(self, o: BlochVector) -> f64 {
        (self.to_vector() - o.to_vector()).norm()
    }

    pub fn max_deviation(self, o: BlochVector) -> f64 {
        (self.to_vector() - o.to_vector()).amax()
    }
}

/// Density operator (I + xX + yY + zZ)/2.
pub fn bloch_to_state(v: BlochVector, pure: bool) -> Result<Mat2, NumericsError> {
    let n = v.norm();
    if !n.is_finite() || n > 1.0 + TOL_STRUCTURAL {
        return Err(NumericsError::NormViolation(n));
    }
    if pure && (n - 1.0).abs() > TOL_STRUCTURAL {
        return Err(NumericsError::NotPure(n));
    }
    Ok(bloch_operator(v))
}

/// (I + v·σ)/2 without any norm check.
pub fn bloch_operator(v: BlochVector) -> Mat2 {
    let [x, y, z] = paulis();
    (identity2() + x * c(v.x, 0.0) + y * c(v.y, 0.0) + z * c(v.z, 0.0)) * c(0.5, 0.0)
}

pub fn state_to_bloch(rho: &Mat2) -> BlochVector {
    let [x, y, z] = paulis();
    BlochVector::new((rho * x).trace().re, (rho * y).trace().re, (rho * z).trace().re)
}

pub fn ket_to_bloch(k: &Ket2) -> BlochVector {
    let n2 = k.norm_squared();
    state_to_bloch(&(projector(k) / c(n2, 0.0)))
}

/// Pure state with the given Bloch direction, in the phase convention cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩.
pub fn bloch_to_ket(v: BlochVector) -> Ket2 {
    let v = v.normalized();
    let up = (1.0 + v.z) / 2.0;
    if up < 1e-300 {
        return ket(c(0.0, 0.0), c(1.0, 0.0));
    }
    let a = up.sqrt();
    let b = c(v.x, v.y) / (2.0 * a);
    ket(c(a, 0.0), b)
}

/// exp(−i·angle·(n·σ)/2).
pub fn rotation_unitary(axis: BlochVector, angle: f64) -> Result<Mat2, NumericsError> {
    let n = axis.norm();
    if (n - 1.0).abs() > TOL_STRUCTURAL {
        return Err(NumericsError::AxisNotNormalized(n));
    }
    let [x, y, z] = paulis();
    let ns = x * c(axis.x, 0.0) + y * c(axis.y, 0.0) + z * c(axis.z, 0.0);
    let (s, co) = (angle / 2.0).sin_cos();
    Ok(identity2() * c(co, 0.0) - ns * c(0.0, s))
}

/// Real 3×3 rotation by `angle` about the unit `axis` (Rodrigues).
pub fn bloch_rotation(axis: BlochVector, angle: f64) -> Matrix3<f64> {
    let n = axis.to_vector().normalize();
    let k = Matrix3::new(0.0, -n[2], n[1], n[2], 0.0, -n[0], -n[1], n[0], 0.0);
    Matrix3::identity() + k * angle.sin() + k * k * (1.0 - angle.cos())
}

/// Adjoint action of a qubit unitary on Bloch vectors: R_kl = ½ Tr[σ_k U σ_l U†].
pub fn unitary_bloch_action(u: &Mat2) -> Matrix3<f64> {
    let p = paulis();
    Matrix3::from_fn(|k, l| 0.5 * (p[k] * u * p[l] * u.adjoint()).trace().re)
}

/// A unitary whose Bloch action is the given proper rotation.
pub fn unitary_from_rotation(r: &Matrix3<f64>) -> Mat2 {
    let q = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*r));
    let (w, v) = (q.w, q.imag());
    let [x, y, z] = paulis();
    identity2() * c(w, 0.0) - (x * c(v[0], 0.0) + y * c(v[1], 0.0) + z * c(v[2], 0.0)) * c(0.0, 1.0)
}

/// Phase-insensitive distance 1 − |Tr(U†V)|/2 between qubit unitaries.
pub fn unitary_distance(u: &Mat2, v: &Mat2) -> f64 {
    1.0 - (u.adjoint() * v).trace().norm() / 2.0
}

/// |⟨a|b⟩|² for normalized kets.
pub fn fidelity(a: &Ket2, b: &Ket2) -> f64 {
    a.dotc(b).norm_sqr() / (a.norm_squared() * b.norm_squared())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub eq_rows: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub x: Vec<f64>,
}

impl LpProblem {
    /// Maximize `objective · x` subject to `x ≥ 0` and no constraints yet.
    pub fn new(objective: Vec<f64>) -> Self {
        Self { objective, eq_rows: Vec::new(), eq_rhs: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        assert_eq!(row.len(), self.num_vars(), "constraint row length must equal variable count");
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
    }

    /// Largest violation of the equality constraints and of nonnegativity.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let eq = self
            .eq_rows
            .iter()
            .zip(&self.eq_rhs)
            .map(|(r, b)| (r.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - b).abs())
            .fold(0.0, f64::max);
        let neg = x.iter().fold(0.0_f64, |m, &v| m.max(-v));
        eq.max(neg)
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self) -> usize {
        self.width
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[col];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
        let f = self.obj[col];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
        self.basis[r] = col;
    }

    /// Bland-rule primal simplex over the allowed columns. Returns false when unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        let rhs = self.rhs();
        loop {
            let Some(col) = (0..allowed).find(|&j| self.obj[j] < -PIVOT_TOL) else {
                return true;
            };
            let mut best: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[col] > PIVOT_TOL {
                    let ratio = row[rhs] / row[col];
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-12 || (ratio <= br + 1e-12 && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, col),
            }
        }
    }
}

/// Two-phase dense simplex: maximize c·x subject to Ax = b, x ≥ 0.
pub fn lp_maximize(p: &LpProblem) -> LpSolution {
    let n = p.num_vars();
    let m = p.eq_rows.len();
    for row in &p.eq_rows {
        assert_eq!(row.len(), n, "constraint row length must equal variable count");
    }
    let width = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, (r, &b)) in p.eq_rows.iter().zip(&p.eq_rhs).enumerate() {
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; width + 1];
        for (j, &a) in r.iter().enumerate() {
            row[j] = sign * a;
        }
        row[n + i] = 1.0;
        row[width] = sign * b;
        rows.push(row);
    }
    // Phase 1: maximize −Σ artificials, priced out against the artificial basis.
    let mut obj = vec![0.0; width + 1];
    for row in &rows {
        for j in 0..n {
            obj[j] -= row[j];
        }
        obj[width] -= row[width];
    }
    let mut t = Tableau { rows, obj, basis: (n..n + m).collect(), width };
    t.optimize(width);
    let scale = 1.0 + p.eq_rhs.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    if t.obj[width] < -1e-9 * scale {
        return LpSolution { status: LpStatus::Infeasible, value: f64::NAN, x: Vec::new() };
    }
    // Drive artificials out of the basis; rows that cannot pivot are redundant.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            if let Some(col) = (0..n).find(|&j| t.rows[i][j].abs() > PIVOT_TOL) {
                t.pivot(i, col);
                i += 1;
            } else {
                t.rows.remove(i);
                t.basis.remove(i);
            }
        } else {
            i += 1;
        }
    }
    // Phase 2 objective row: reduced costs c_B B⁻¹A − c.
    let mut obj = vec![0.0; width + 1];
    for j in 0..n {
        obj[j] = -p.objective[j];
    }
    for (row, &b) in t.rows.iter().zip(&t.basis) {
        let cb = p.objective[b];
        if cb != 0.0 {
            for j in 0..n {
                obj[j] += cb * row[j];
            }
            obj[width] += cb * row[width];
        }
    }
    t.obj = obj;
    if !t.optimize(n) {
        return LpSolution { status: LpStatus::Unbounded, value: f64::INFINITY, x: Vec::new() };
    }
    let mut x = vec![0.0; n];
    for (row, &b) in t.rows.iter().zip(&t.basis) {
        if b < n {
            x[b] = row[width];
        }
    }
    let value = p.objective.iter().zip(&x).map(|(a, b)| a * b).sum();
    LpSolution { status: LpStatus::Optimal, value, x }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn pauli_spectra() {
        let e = herm_eig(&sigma_z()).unwrap();
        assert!(close(e.values[0], 1.0, 1e-12) && close(e.values[1], -1.0, 1e-12));
        assert!(close(e.vectors[(0, 0)].norm(), 1.0, 1e-12));
        assert!(close(e.vectors[(1, 1)].norm(), 1.0, 1e-12));
        let e = herm_eig(&sigma_x()).unwrap();
        assert!(close(e.values[0], 1.0, 1e-12) && close(e.values[1], -1.0, 1e-12));
        let e = herm_eig(&sigma_y()).unwrap();
        assert!(max_abs(&(e.reconstruct() - sigma_y())) < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = sigma_x();
        m[(0, 1)] = c(2.0, 0.0);
        assert!(matches!(herm_eig(&m), Err(NumericsError::NotHermitian(_))));
    }

    #[test]
    fn degenerate_and_zero_matrices() {
        let e = herm_eig(&Mat4::zeros()).unwrap();
        assert!(e.values.iter().all(|v| *v == 0.0));
        let e = herm_eig(&(Mat4::identity() * c(3.0, 0.0))).unwrap();
        assert!(e.values.iter().all(|v| close(*v, 3.0, 1e-14)));
    }

    #[test]
    fn bloch_examples() {
        let north = bloch_to_state(BlochVector::new(0.0, 0.0, 1.0), true).unwrap();
        assert!(max_abs(&(north - projector(&ket(c(1.0, 0.0), c(0.0, 0.0))))) < 1e-15);
        let mixed = bloch_to_state(BlochVector::new(0.0, 0.0, 0.0), false).unwrap();
        assert!(max_abs(&(mixed - identity2() * c(0.5, 0.0))) < 1e-15);
        assert!(matches!(
            bloch_to_state(BlochVector::new(1.0, 1.0, 0.0), false),
            Err(NumericsError::NormViolation(_))
        ));
        assert!(matches!(bloch_to_state(BlochVector::new(0.5, 0.0, 0.0), true), Err(NumericsError::NotPure(_))));
    }

    #[test]
    fn bloch_ket_round_trip_at_poles() {
        for v in [BlochVector::new(0.0, 0.0, 1.0), BlochVector::new(0.0, 0.0, -1.0), BlochVector::new(0.0, 1.0, 0.0)] {
            assert!(ket_to_bloch(&bloch_to_ket(v)).max_deviation(v) < 1e-14);
        }
    }

    #[test]
    fn rotation_examples() {
        let rx = rotation_unitary(BlochVector::new(1.0, 0.0, 0.0), PI).unwrap();
        let act = unitary_bloch_action(&rx);
        assert!((act - Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0))).amax() < 1e-12);
        let rz = rotation_unitary(BlochVector::new(0.0, 0.0, 1.0), PI / 2.0).unwrap();
        let v = unitary_bloch_action(&rz) * Vector3::new(0.3, 0.5, 0.7);
        assert!((v - Vector3::new(-0.5, 0.3, 0.7)).amax() < 1e-12);
    }

    #[test]
    fn full_turn_is_minus_identity() {
        let u = rotation_unitary(BlochVector::new(0.0, 0.6, 0.8), 2.0 * PI).unwrap();
        assert!(max_abs(&(u + identity2())) < 1e-9);
        assert!((unitary_bloch_action(&u) - Matrix3::identity()).amax() < 1e-9);
    }

    #[test]
    fn unnormalized_axis_rejected() {
        assert!(rotation_unitary(BlochVector::new(1.0, 1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn quaternion_round_trip() {
        let axis = BlochVector::new(1.0, -2.0, 0.5).normalized();
        let r = bloch_rotation(axis, 2.1);
        let u = unitary_from_rotation(&r);
        assert!((unitary_bloch_action(&u) - r).amax() < 1e-12);
        assert!(unitary_distance(&u, &rotation_unitary(axis, 2.1).unwrap()) < 1e-12);
    }

    #[test]
    fn lp_box() {
        let mut p = LpProblem::new(vec![1.0, 1.0, 0.0, 0.0]);
        p.add_eq(vec![1.0, 0.0, 1.0, 0.0], 1.0);
        p.add_eq(vec![0.0, 1.0, 0.0, 1.0], 1.0);
        let s = lp_maximize(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(close(s.value, 2.0, 1e-12));
    }

    #[test]
    fn lp_infeasible() {
        let mut p = LpProblem::new(vec![1.0, 0.0]);
        p.add_eq(vec![1.0, 1.0], 1.0);
        p.add_eq(vec![1.0, 1.0], 2.0);
        assert_eq!(lp_maximize(&p).status, LpStatus::Infeasible);
    }

    #[test]
    fn lp_unbounded() {
        let mut p = LpProblem::new(vec![1.0, 0.0]);
        p.add_eq(vec![1.0, -1.0], 1.0);
        assert_eq!(lp_maximize(&p).status, LpStatus::Unbounded);
    }

    #[test]
    fn lp_redundant_rows_and_negative_rhs() {
        let mut p = LpProblem::new(vec![2.0, 1.0, 0.0]);
        p.add_eq(vec![1.0, 1.0, 1.0], 3.0);
        p.add_eq(vec![2.0, 2.0, 2.0], 6.0);
        p.add_eq(vec![-1.0, 0.0, 0.0], -1.0);
        let s = lp_maximize(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(close(s.value, 4.0, 1e-12));
        assert!(p.residual(&s.x) < 1e-12);
    }
}
