//! Exact evaluation of QRAC and EARAC strategies and the tripartite behaviors they induce.

use nalgebra::SVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channels::{validate_choi, ChannelError, ChoiMatrix};
use crate::numerics::{
    bloch_operator, bloch_to_ket, c, hermiticity_residual, herm_eig, identity2, ket, ket_to_bloch, max_abs, paulis,
    projector, BlochVector, Ket2, Mat2, NumericsError, C64, TOL_STRUCTURAL,
};
use crate::tasks::{average_success, Input, PhaseOffset, Reflection, TaskError, TaskSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("strategy has no single-setting Bell form: {0}")]
    NotBellCompatible(String),
    #[error("invalid behavior: {0}")]
    InvalidBehavior(String),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Serde bridge for 2×2 complex matrices as [[[re, im]; 2]; 2].
pub mod mat2_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn to_array(m: &Mat2) -> [[[f64; 2]; 2]; 2] {
        std::array::from_fn(|i| std::array::from_fn(|j| [m[(i, j)].re, m[(i, j)].im]))
    }

    pub fn from_array(a: &[[[f64; 2]; 2]; 2]) -> Mat2 {
        Mat2::from_fn(|i, j| c(a[i][j][0], a[i][j][1]))
    }

    pub fn serialize<S: Serializer>(m: &Mat2, s: S) -> Result<S::Ok, S::Error> {
        to_array(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Mat2, D::Error> {
        Ok(from_array(&<[[[f64; 2]; 2]; 2]>::deserialize(d)?))
    }
}

/// Two-outcome POVM {E₀, E₁}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[[[f64; 2]; 2]; 2]; 2]", into = "[[[[f64; 2]; 2]; 2]; 2]")]
pub struct BinaryMeasurement {
    pub effects: [Mat2; 2],
}

impl TryFrom<[[[[f64; 2]; 2]; 2]; 2]> for BinaryMeasurement {
    type Error = ProtocolError;

    fn try_from(a: [[[[f64; 2]; 2]; 2]; 2]) -> Result<Self, ProtocolError> {
        let m = BinaryMeasurement { effects: [mat2_serde::from_array(&a[0]), mat2_serde::from_array(&a[1])] };
        m.validate()?;
        Ok(m)
    }
}

impl From<BinaryMeasurement> for [[[[f64; 2]; 2]; 2]; 2] {
    fn from(m: BinaryMeasurement) -> Self {
        [mat2_serde::to_array(&m.effects[0]), mat2_serde::to_array(&m.effects[1])]
    }
}

impl BinaryMeasurement {
    /// Projective measurement of n·σ; outcome 0 is the +1 eigenvector.
    pub fn along(n: BlochVector) -> Self {
        let e0 = bloch_operator(n.normalized());
        Self { effects: [e0, identity2() - e0] }
    }

    /// Projective measurement with outcome 0 on the given ket.
    pub fn projective(k: &Ket2) -> Self {
        let e0 = projector(&(k / c(k.norm(), 0.0)));
        Self { effects: [e0, identity2() - e0] }
    }

    pub fn effect(&self, z: u8) -> &Mat2 {
        &self.effects[z as usize]
    }

    /// Tr[E₀ ρ] − Tr[E₁ ρ].
    pub fn expectation(&self, rho: &Mat2) -> f64 {
        ((self.effects[0] - self.effects[1]) * rho).trace().re
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        for e in &self.effects {
            let dev = hermiticity_residual(e);
            if dev > TOL_STRUCTURAL {
                return Err(ProtocolError::InvalidStrategy(format!("effect not Hermitian ({dev:e})")));
            }
            let min = herm_eig(e)?.min();
            if min < -TOL_STRUCTURAL {
                return Err(ProtocolError::InvalidStrategy(format!("effect not PSD (min eigenvalue {min:e})")));
            }
        }
        let dev = max_abs(&(self.effects[0] + self.effects[1] - identity2()));
        if dev > TOL_STRUCTURAL {
            return Err(ProtocolError::InvalidStrategy(format!("effects do not sum to identity ({dev:e})")));
        }
        Ok(())
    }
}

/// Prepare (x₀,x₁) → channel (x₂) → measure (y).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QracFile", into = "QracFile")]
pub struct QracStrategy {
    /// Preparations indexed by 2x₀ + x₁.
    pub states: [Ket2; 4],
    /// Channels indexed by x₂.
    pub channels: [ChoiMatrix; 2],
    /// Decoding measurements indexed by y.
    pub measurements: [BinaryMeasurement; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct QracFile {
    states: [BlochVector; 4],
    channels: [ChoiMatrix; 2],
    measurements: [BinaryMeasurement; 3],
}

impl TryFrom<QracFile> for QracStrategy {
    type Error = ProtocolError;

    fn try_from(f: QracFile) -> Result<Self, ProtocolError> {
        for v in &f.states {
            if (v.norm() - 1.0).abs() > TOL_STRUCTURAL {
                return Err(ProtocolError::InvalidStrategy(format!("state Bloch vector has norm {}", v.norm())));
            }
        }
        let s = QracStrategy { states: f.states.map(bloch_to_ket), channels: f.channels, measurements: f.measurements };
        s.validate()?;
        Ok(s)
    }
}

impl From<QracStrategy> for QracFile {
    fn from(s: QracStrategy) -> Self {
        QracFile { states: s.states.map(|k| ket_to_bloch(&k)), channels: s.channels, measurements: s.measurements }
    }
}

impl QracStrategy {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        for k in &self.states {
            if (k.norm() - 1.0).abs() > TOL_STRUCTURAL {
                return Err(ProtocolError::InvalidStrategy(format!("state norm {}", k.norm())));
            }
        }
        for (x2, j) in self.channels.iter().enumerate() {
            let v = validate_choi(j)?;
            if !(v.cp && v.tp) {
                return Err(ProtocolError::InvalidStrategy(format!(
                    "channel {x2}: min eigenvalue {:e}, TP residual {:e}",
                    v.min_eigenvalue, v.tp_residual
                )));
            }
        }
        for m in &self.measurements {
            m.validate()?;
        }
        Ok(())
    }

    /// States reaching the decoder, indexed by input index.
    pub fn output_states(&self) -> [Mat2; 8] {
        std::array::from_fn(|i| {
            let x = Input::from_index(i);
            self.channels[x.x2 as usize].apply(&projector(&self.states[x.pair()]))
        })
    }

    /// p(z = f(x,y) | x, y) indexed by [input index][y].
    pub fn success_table(&self, task: &TaskSpec) -> [[f64; 3]; 8] {
        let out = self.output_states();
        std::array::from_fn(|i| {
            let x = Input::from_index(i);
            std::array::from_fn(|y| (self.measurements[y].effect(task.f(x, y)) * out[i]).trace().re)
        })
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("strategy serialization cannot fail")
    }
}

/// Average success of a QRAC strategy on a task.
pub fn eval_qrac_strategy(s: &QracStrategy, task: &TaskSpec) -> Result<f64, ProtocolError> {
    s.validate()?;
    let table = s.success_table(task);
    Ok(average_success(task, |x, y| table[x.index()][y])?)
}

/// (|000⟩ + |111⟩)/√2.
pub fn ghz_state() -> SVector<C64, 8> {
    let mut v = SVector::<C64, 8>::zeros();
    v[0] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v[7] = v[0];
    v
}

pub fn kron3(a: &Ket2, b: &Ket2, cc: &Ket2) -> SVector<C64, 8> {
    SVector::<C64, 8>::from_fn(|k, _| a[k >> 2] * b[(k >> 1) & 1] * cc[k & 1])
}

/// Residual of the GHZ decomposition: the A|BC split with Alice's factor normalized by 1/√2, and
/// the B|C expansion of |00⟩ + (−1)^a e^{iφ}|11⟩ in Bob's θ basis.
pub fn ghz_decomposition_check(phi: f64, theta: f64) -> f64 {
    let (ct, st) = (theta.cos(), theta.sin());
    let mut rhs = SVector::<C64, 8>::zeros();
    let mut bc_residual: f64 = 0.0;
    for a in 0..2 {
        let sign = if a == 0 { 1.0 } else { -1.0 };
        let alice = ket(c(1.0, 0.0), C64::from_polar(sign, -phi)) * c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let e = C64::from_polar(sign, phi);
        let b0 = ket(c(ct, 0.0), c(st, 0.0));
        let b1 = ket(c(st, 0.0), c(-ct, 0.0));
        let c0 = ket(c(ct, 0.0), e * st);
        let c1 = ket(c(st, 0.0), -e * ct);
        let bc_lhs = SVector::<C64, 4>::from_fn(|k, _| match k {
            0 => c(1.0, 0.0),
            3 => e,
            _ => c(0.0, 0.0),
        });
        let bc_rhs = SVector::<C64, 4>::from_fn(|k, _| b0[k >> 1] * c0[k & 1] + b1[k >> 1] * c1[k & 1]);
        bc_residual = bc_residual.max(max_abs(&(bc_lhs - bc_rhs)));
        rhs += (kron3(&alice, &b0, &c0) + kron3(&alice, &b1, &c1)) * c(0.5, 0.0);
    }
    max_abs(&(rhs - ghz_state())).max(bc_residual)
}

/// θ(r) = arccos √((√3 + (−1)^r)/(2√3)).
pub fn bob_angle(r: u8) -> f64 {
    let s3 = 3f64.sqrt();
    let sign = if r == 0 { 1.0 } else { -1.0 };
    ((s3 + sign) / (2.0 * s3)).sqrt().acos()
}

/// φ(s) = π/4 (1 + 2s).
pub fn alice_angle(s: u8) -> f64 {
    std::f64::consts::FRAC_PI_4 * (1.0 + 2.0 * s as f64)
}

/// GHZ-assisted strategy: Alice measures in (|0⟩ ± e^{−iφ}|1⟩)/√2 with φ indexed by x₀⊕x₁ and
/// sends m₁ = a⊕x₀; Bob measures {cosθ|0⟩ + e^{iχ}sinθ|1⟩, sinθ|0⟩ − e^{iχ}cosθ|1⟩} with θ indexed
/// by m₁⊕x₂ and χ = −x₂φ′, and sends m₂ = m₁⊕b; Charlie's GHZ qubit carries a fixed frame unitary
/// and he answers z = m₂⊕c.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EaracStrategy {
    pub alice_phase: [f64; 2],
    pub bob_theta: [f64; 2],
    /// φ′, applied on Bob's side when x₂ = 1.
    pub bob_twist: f64,
    #[serde(with = "mat2_serde")]
    pub charlie_frame: Mat2,
    pub charlie_bases: [BinaryMeasurement; 3],
    pub invert_decoder: bool,
}

impl EaracStrategy {
    /// Member (reflection, φ′) of the GHZ family.
    pub fn family(reflection: Reflection, offset: PhaseOffset) -> Self {
        Self {
            alice_phase: [alice_angle(0), alice_angle(1)],
            bob_theta: [bob_angle(0), bob_angle(1)],
            bob_twist: offset.radians(),
            charlie_frame: reflection.charlie_frame(),
            charlie_bases: crate::tasks::mub_measurements(),
            invert_decoder: false,
        }
    }

    pub fn with_inverted_decoder(mut self) -> Self {
        self.invert_decoder = !self.invert_decoder;
        self
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let angles = self.alice_phase.iter().chain(self.bob_theta.iter()).chain(std::iter::once(&self.bob_twist));
        if angles.into_iter().any(|a| !a.is_finite()) {
            return Err(ProtocolError::InvalidStrategy("non-finite angle".into()));
        }
        let dev = max_abs(&(self.charlie_frame.adjoint() * self.charlie_frame - identity2()));
        if dev > TOL_STRUCTURAL {
            return Err(ProtocolError::InvalidStrategy(format!("Charlie frame not unitary ({dev:e})")));
        }
        for m in &self.charlie_bases {
            m.validate()?;
        }
        for i in 0..3 {
            for j in i + 1..3 {
                let overlap = (self.charlie_bases[i].effects[0] * self.charlie_bases[j].effects[0]).trace().re;
                if (overlap - 0.5).abs() > TOL_STRUCTURAL {
                    return Err(ProtocolError::InvalidStrategy(format!("bases {i},{j} not mutually unbiased")));
                }
            }
        }
        Ok(())
    }

    pub fn alice_ket(&self, setting: u8, a: u8) -> Ket2 {
        let sign = if a == 0 { 1.0 } else { -1.0 };
        ket(c(1.0, 0.0), C64::from_polar(sign, -self.alice_phase[setting as usize])) * c(std::f64::consts::FRAC_1_SQRT_2, 0.0)
    }

    pub fn bob_ket(&self, setting: u8, x2: u8, b: u8) -> Ket2 {
        let theta = self.bob_theta[setting as usize];
        let twist = C64::from_polar(1.0, -(x2 as f64) * self.bob_twist);
        if b == 0 {
            ket(c(theta.cos(), 0.0), twist * theta.sin())
        } else {
            ket(c(theta.sin(), 0.0), -twist * theta.cos())
        }
    }

    /// Shared state with Charlie's frame applied.
    pub fn shared_state(&self) -> SVector<C64, 8> {
        let g = ghz_state();
        SVector::<C64, 8>::from_fn(|k, _| {
            let base = k & !1;
            self.charlie_frame[(k & 1, 0)] * g[base] + self.charlie_frame[(k & 1, 1)] * g[base + 1]
        })
    }

    /// Unnormalized Charlie state after Alice and Bob obtain (a, b).
    fn conditional(psi: &SVector<C64, 8>, alpha: &Ket2, beta: &Ket2) -> Ket2 {
        let mut out = Ket2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                let w = alpha[i].conj() * beta[j].conj();
                out[0] += w * psi[4 * i + 2 * j];
                out[1] += w * psi[4 * i + 2 * j + 1];
            }
        }
        out
    }

    /// Probability of each (a, b) branch with Charlie's unnormalized state and the message m₂.
    fn branches(&self, x: Input) -> [(Ket2, u8); 4] {
        let psi = self.shared_state();
        let s = x.x0 ^ x.x1;
        std::array::from_fn(|k| {
            let (a, b) = ((k >> 1) as u8, (k & 1) as u8);
            let m1 = a ^ x.x0;
            let alpha = self.alice_ket(s, a);
            let beta = self.bob_ket(m1 ^ x.x2, x.x2, b);
            (Self::conditional(&psi, &alpha, &beta), m1 ^ b)
        })
    }

    /// p(z = f(x,y) | x, y) indexed by [input index][y].
    pub fn success_table(&self, task: &TaskSpec) -> [[f64; 3]; 8] {
        std::array::from_fn(|i| {
            let x = Input::from_index(i);
            let br = self.branches(x);
            std::array::from_fn(|y| {
                br.iter()
                    .map(|(chi, m2)| {
                        let cc = task.f(x, y) ^ m2 ^ self.invert_decoder as u8;
                        (chi.adjoint() * self.charlie_bases[y].effect(cc) * chi)[(0, 0)].re
                    })
                    .sum()
            })
        })
    }

    /// Decoded Bloch vector per input: components (⟨M₁⟩, ⟨M₀⟩, ⟨M₂⟩) of Charlie's branch state,
    /// sign-corrected by the message so that a negative component means the answer 1.
    pub fn charlie_vectors(&self) -> [BlochVector; 8] {
        std::array::from_fn(|i| {
            let (chi, m2) = self.branches(Input::from_index(i))[0];
            let rho = projector(&chi) / c(chi.norm_squared(), 0.0);
            let e = self.charlie_bases.map(|m| m.expectation(&rho));
            let sign = if (m2 ^ self.invert_decoder as u8) == 0 { 1.0 } else { -1.0 };
            BlochVector::new(e[1], e[0], e[2]).scaled(sign)
        })
    }
}

/// Average success of an EARAC strategy on a task.
pub fn eval_earac(s: &EaracStrategy, task: &TaskSpec) -> Result<f64, ProtocolError> {
    s.validate()?;
    let table = s.success_table(task);
    Ok(average_success(task, |x, y| table[x.index()][y])?)
}

/// P(a,b,c | z₁,z₂,y) for binary a, b, c, z₁, z₂ and ternary y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Behavior {
    p: Vec<f64>,
}

impl Behavior {
    pub const LEN: usize = 96;

    pub fn index(a: u8, b: u8, c: u8, z1: u8, z2: u8, y: usize) -> usize {
        (((z1 as usize * 2 + z2 as usize) * 3 + y) << 3) + ((a as usize) << 2) + ((b as usize) << 1) + c as usize
    }

    pub fn new(p: Vec<f64>) -> Result<Self, ProtocolError> {
        if p.len() != Self::LEN {
            return Err(ProtocolError::InvalidBehavior(format!("expected {} entries, got {}", Self::LEN, p.len())));
        }
        if p.iter().any(|v| !v.is_finite() || *v < -TOL_STRUCTURAL) {
            return Err(ProtocolError::InvalidBehavior("negative or non-finite probability".into()));
        }
        Ok(Self { p })
    }

    pub fn from_fn(f: impl Fn(u8, u8, u8, u8, u8, usize) -> f64) -> Self {
        let mut p = vec![0.0; Self::LEN];
        for z1 in 0..2 {
            for z2 in 0..2 {
                for y in 0..3 {
                    for a in 0..2 {
                        for b in 0..2 {
                            for cc in 0..2 {
                                p[Self::index(a, b, cc, z1, z2, y)] = f(a, b, cc, z1, z2, y);
                            }
                        }
                    }
                }
            }
        }
        Self { p }
    }

    pub fn get(&self, a: u8, b: u8, c: u8, z1: u8, z2: u8, y: usize) -> f64 {
        self.p[Self::index(a, b, c, z1, z2, y)]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn normalization_residual(&self) -> f64 {
        self.p.chunks(8).map(|ch| (ch.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Largest dependence of any two-party marginal on the third party's input.
    pub fn no_signaling_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let bits = [0u8, 1];
        for y in 0..3 {
            for z2 in bits {
                for (b, cc) in bits.iter().flat_map(|&b| bits.map(move |cc| (b, cc))) {
                    let m = |z1| bits.iter().map(|&a| self.get(a, b, cc, z1, z2, y)).sum::<f64>();
                    worst = worst.max((m(0) - m(1)).abs());
                }
            }
            for z1 in bits {
                for (a, cc) in bits.iter().flat_map(|&a| bits.map(move |cc| (a, cc))) {
                    let m = |z2| bits.iter().map(|&b| self.get(a, b, cc, z1, z2, y)).sum::<f64>();
                    worst = worst.max((m(0) - m(1)).abs());
                }
            }
        }
        for z1 in bits {
            for z2 in bits {
                for (a, b) in bits.iter().flat_map(|&a| bits.map(move |b| (a, b))) {
                    let m = |y| bits.iter().map(|&cc| self.get(a, b, cc, z1, z2, y)).sum::<f64>();
                    worst = worst.max((m(0) - m(1)).abs()).max((m(0) - m(2)).abs());
                }
            }
        }
        worst
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let n = self.normalization_residual();
        let ns = self.no_signaling_residual();
        if n > TOL_STRUCTURAL || ns > TOL_STRUCTURAL {
            return Err(ProtocolError::InvalidBehavior(format!("normalization {n:e}, no-signaling {ns:e}")));
        }
        Ok(())
    }
}

/// Behavior of the GHZ measurements with Alice's setting z₁ (her phase index) and Bob's setting
/// z₂ (his angle index, the former m₁⊕x₂). Requires φ′ = 0 so that Bob's basis depends on z₂ alone.
pub fn earac_behavior(s: &EaracStrategy) -> Result<Behavior, ProtocolError> {
    s.validate()?;
    if s.bob_twist.rem_euclid(2.0 * std::f64::consts::PI).abs() > TOL_STRUCTURAL {
        return Err(ProtocolError::NotBellCompatible(format!(
            "Bob's basis depends on x2 through the offset {}",
            s.bob_twist
        )));
    }
    let psi = s.shared_state();
    let conditional: Vec<Ket2> = (0..16)
        .map(|k| {
            let (z1, z2, a, b) = ((k >> 3) as u8, ((k >> 2) & 1) as u8, ((k >> 1) & 1) as u8, (k & 1) as u8);
            EaracStrategy::conditional(&psi, &s.alice_ket(z1, a), &s.bob_ket(z2, 0, b))
        })
        .collect();
    let behavior = Behavior::from_fn(|a, b, cc, z1, z2, y| {
        let chi = &conditional[((z1 as usize) << 3) | ((z2 as usize) << 2) | ((a as usize) << 1) | b as usize];
        (chi.adjoint() * s.charlie_bases[y].effect(cc) * chi)[(0, 0)].re
    });
    Ok(behavior)
}

/// Success of the sequential protocol recomputed from a behavior, with z₁ = x₀⊕x₁,
/// z₂ = x₀⊕a⊕x₂ and the answer x₀⊕a⊕b⊕c (complemented when `invert`).
pub fn success_from_behavior(p: &Behavior, task: &TaskSpec, invert: bool) -> Result<f64, ProtocolError> {
    p.validate()?;
    Ok(average_success(task, |x, y| {
        let mut total = 0.0;
        for a in 0..2u8 {
            for b in 0..2u8 {
                for cc in 0..2u8 {
                    let z = x.x0 ^ a ^ b ^ cc ^ invert as u8;
                    if z == task.f(x, y) {
                        total += p.get(a, b, cc, x.x0 ^ x.x1, x.x0 ^ a ^ x.x2, y);
                    }
                }
            }
        }
        total
    })?)
}

/// Pauli expectations (⟨σ_X⟩, ⟨σ_Y⟩, ⟨σ_Z⟩) of a state.
pub fn pauli_expectations(rho: &Mat2) -> [f64; 3] {
    paulis().map(|p| (p * rho).trace().re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::{quantum_optimum, table_one_earac, table_one_qrac, table_one_task};

    #[test]
    fn measurement_along_axes() {
        let m = BinaryMeasurement::along(BlochVector::new(0.0, 1.0, 0.0));
        m.validate().unwrap();
        let plus_i = bloch_operator(BlochVector::new(0.0, 1.0, 0.0));
        assert!((m.expectation(&plus_i) - 1.0).abs() < 1e-15);
        let bad = BinaryMeasurement { effects: [identity2(), identity2()] };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn earac_rows_reach_optimum() {
        for row in 1..=4 {
            let (task, s) = table_one_earac(row).unwrap();
            assert_eq!(task.bits(), table_one_task(row).unwrap().bits(), "row {row}");
            let v = eval_earac(&s, &task).unwrap();
            assert!((v - quantum_optimum()).abs() < 1e-12, "row {row}: {v}");
        }
    }

    #[test]
    fn inverted_decoder_complements() {
        let (task, s) = table_one_earac(1).unwrap();
        let v = eval_earac(&s.with_inverted_decoder(), &task).unwrap();
        assert!((v - (1.0 - quantum_optimum())).abs() < 1e-12);
    }

    #[test]
    fn ghz_examples() {
        assert!(ghz_decomposition_check(std::f64::consts::FRAC_PI_4, bob_angle(0)) <= 1e-12);
        assert!(ghz_decomposition_check(0.0, 0.0) <= 1e-12);
    }

    #[test]
    fn behavior_is_valid_and_reproduces_success() {
        let (task, s) = table_one_earac(1).unwrap();
        let p = earac_behavior(&s).unwrap();
        p.validate().unwrap();
        for z1 in 0..2 {
            let pa: f64 = (0..2).flat_map(|b| (0..2).map(move |cc| (b, cc))).map(|(b, cc)| p.get(0, b, cc, z1, 0, 0)).sum();
            assert!((pa - 0.5).abs() < 1e-12);
        }
        let v = success_from_behavior(&p, &task, false).unwrap();
        assert!((v - quantum_optimum()).abs() < 1e-12);
        let (_, twisted) = table_one_earac(2).unwrap();
        assert!(matches!(earac_behavior(&twisted), Err(ProtocolError::NotBellCompatible(_))));
    }

    #[test]
    fn qrac_rows_reach_optimum() {
        for row in 5..=8 {
            let (task, s) = table_one_qrac(row).unwrap();
            assert_eq!(task.bits(), table_one_task(row).unwrap().bits(), "row {row}");
            let v = eval_qrac_strategy(&s, &task).unwrap();
            assert!((v - quantum_optimum()).abs() < 1e-12, "row {row}: {v}");
        }
    }

    #[test]
    fn trivial_qrac_is_half() {
        let zero = ket(c(1.0, 0.0), c(0.0, 0.0));
        let z = BinaryMeasurement::along(BlochVector::new(0.0, 0.0, 1.0));
        let s = QracStrategy {
            states: [zero; 4],
            channels: [ChoiMatrix::identity(), ChoiMatrix::identity()],
            measurements: [z; 3],
        };
        let v = eval_qrac_strategy(&s, &TaskSpec::standard()).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn qrac_json_round_trip() {
        let (task, s) = table_one_qrac(6).unwrap();
        let back = QracStrategy::from_json(&s.to_json()).unwrap();
        let v = eval_qrac_strategy(&back, &task).unwrap();
        assert!((v - quantum_optimum()).abs() < 1e-9);
    }
}
