//! Distributed 3→1 RAC tasks, exact classical optima, and task families built from cube symmetries.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channels::{reflection_feasibility, ChoiMatrix, FeasibilityReport};
use crate::numerics::{
    bloch_to_ket, c, ket, ket_to_bloch, projector, rotation_unitary, BlochVector, Ket2, Mat2, C64,
};
use crate::protocols::{BinaryMeasurement, EaracStrategy, QracStrategy};

/// Success probability of the optimal quantum strategy, (1+√3)/(2√3).
pub fn quantum_optimum() -> f64 {
    (1.0 + 3f64.sqrt()) / (2.0 * 3f64.sqrt())
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TaskError {
    #[error("success probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("bias q = {0} outside [0, 1/6]")]
    BiasOutOfRange(f64),
    #[error("bias t = {0} must be 0 or 1")]
    BiasSetting(u8),
    #[error("truth table must have 24 entries, got {0}")]
    TruthTableLength(usize),
    #[error("truth table entry {index} is {value}, expected 0 or 1")]
    TruthTableEntry { index: usize, value: u8 },
    #[error("rotation {0} fixes a cube vertex and cannot produce eight distinct states")]
    InadmissibleRotation(String),
    #[error("vertex assignment is not four distinct cube vertices")]
    InvalidAssignment,
    #[error("rotation {0} maps the assigned vertices onto themselves")]
    IncompatibleAssignment(String),
    #[error("unknown task selector {0}")]
    UnknownTask(String),
    #[error("unknown cube rotation label {0}")]
    UnknownRotation(String),
}

/// Input bits x = (x0, x1, x2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Input {
    pub x0: u8,
    pub x1: u8,
    pub x2: u8,
}

impl Input {
    pub fn new(x0: u8, x1: u8, x2: u8) -> Self {
        Self { x0: x0 & 1, x1: x1 & 1, x2: x2 & 1 }
    }

    pub fn from_index(i: usize) -> Self {
        Self::new((i >> 2) as u8 & 1, (i >> 1) as u8 & 1, i as u8 & 1)
    }

    /// Index with x0 as the most significant bit.
    pub fn index(self) -> usize {
        (self.x0 as usize) << 2 | (self.x1 as usize) << 1 | self.x2 as usize
    }

    /// Index of the (x0, x1) pair seen by the first device.
    pub fn pair(self) -> usize {
        (self.x0 as usize) << 1 | self.x1 as usize
    }

    pub fn bit(self, k: usize) -> u8 {
        [self.x0, self.x1, self.x2][k]
    }

    pub fn all() -> impl Iterator<Item = Input> {
        (0..8).map(Input::from_index)
    }
}

impl fmt::Display for Input {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.x0, self.x1, self.x2)
    }
}

/// Charlie's question distribution (1/3+q, 1/3+(−2)^t q, 1/3+(−2)^{t⊕1} q).
pub fn bias_weights(t: u8, q: f64) -> [f64; 3] {
    let pow = |e: u8| if e == 0 { 1.0 } else { -2.0 };
    [1.0 / 3.0 + q, 1.0 / 3.0 + pow(t) * q, 1.0 / 3.0 + pow(t ^ 1) * q]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bias {
    pub t: u8,
    pub q: f64,
}

impl Bias {
    pub fn new(t: u8, q: f64) -> Result<Self, TaskError> {
        if t > 1 {
            return Err(TaskError::BiasSetting(t));
        }
        if !(-1e-12..=1.0 / 6.0 + 1e-12).contains(&q) {
            return Err(TaskError::BiasOutOfRange(q));
        }
        Ok(Self { t, q })
    }

    pub fn weights(self) -> [f64; 3] {
        bias_weights(self.t, self.q)
    }
}

/// Guessing functions f(x, y) stored as a 24-bit truth table, index 3·x + y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TaskFile", into = "TaskFile")]
pub struct TaskSpec {
    label: String,
    bits: u32,
    bias: Option<Bias>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TaskFile {
    label: String,
    truth_table: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bias: Option<Bias>,
}

impl TryFrom<TaskFile> for TaskSpec {
    type Error = TaskError;

    fn try_from(f: TaskFile) -> Result<Self, TaskError> {
        if f.truth_table.len() != 24 {
            return Err(TaskError::TruthTableLength(f.truth_table.len()));
        }
        let mut bits = 0u32;
        for (index, &value) in f.truth_table.iter().enumerate() {
            match value {
                0 => {}
                1 => bits |= 1 << index,
                _ => return Err(TaskError::TruthTableEntry { index, value }),
            }
        }
        let bias = f.bias.map(|b| Bias::new(b.t, b.q)).transpose()?;
        Ok(TaskSpec { label: f.label, bits, bias })
    }
}

impl From<TaskSpec> for TaskFile {
    fn from(t: TaskSpec) -> Self {
        TaskFile { truth_table: (0..24).map(|i| (t.bits >> i & 1) as u8).collect(), label: t.label, bias: t.bias }
    }
}

impl TaskSpec {
    pub fn from_fn(label: impl Into<String>, f: impl Fn(Input, usize) -> u8) -> Self {
        let mut bits = 0u32;
        for x in Input::all() {
            for y in 0..3 {
                if f(x, y) & 1 == 1 {
                    bits |= 1 << (3 * x.index() + y);
                }
            }
        }
        Self { label: label.into(), bits, bias: None }
    }

    pub fn from_bits(label: impl Into<String>, bits: u32) -> Self {
        Self { label: label.into(), bits: bits & 0xFF_FFFF, bias: None }
    }

    /// Task f(x, y) = x_y.
    pub fn standard() -> Self {
        Self::from_fn("x0, x1, x2", |x, y| x.bit(y))
    }

    pub fn with_bias(mut self, bias: Bias) -> Self {
        self.bias = Some(bias);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn f(&self, x: Input, y: usize) -> u8 {
        (self.bits >> (3 * x.index() + y) & 1) as u8
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn bias(&self) -> Option<Bias> {
        self.bias
    }

    pub fn weights(&self) -> [f64; 3] {
        self.bias.map_or([1.0 / 3.0; 3], Bias::weights)
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("task serialization cannot fail")
    }

    /// Same task with questions permuted: the new question y asks the old question perm[y].
    pub fn relabel_questions(&self, perm: [usize; 3]) -> Self {
        let mut t = Self::from_fn(self.label.clone(), |x, y| self.f(x, perm[y]));
        t.bias = self.bias;
        t
    }

    /// True when every pair of guessing functions is balanced and statistically independent over uniform x.
    pub fn pairwise_independent(&self) -> bool {
        for y in 0..3 {
            for y2 in (y + 1)..3 {
                let mut counts = [[0; 2]; 2];
                for x in Input::all() {
                    counts[self.f(x, y) as usize][self.f(x, y2) as usize] += 1;
                }
                if counts.iter().flatten().any(|&n| n != 2) {
                    return false;
                }
            }
        }
        true
    }
}

/// The task of a given Table I row (1–8).
pub fn table_one_task(row: usize) -> Result<TaskSpec, TaskError> {
    let t = match row {
        1 => TaskSpec::from_fn("x0, x1, x2", |x, y| x.bit(y)),
        2 => TaskSpec::from_fn("x0⊕x2, x1⊕x2, x2", |x, y| match y {
            0 => x.x0 ^ x.x2,
            1 => x.x1 ^ x.x2,
            _ => x.x2,
        }),
        3 => TaskSpec::from_fn("x0⊕x2(x0⊕x1), x1⊕x2(¬(x0⊕x1)), x2", |x, y| {
            let s = x.x0 ^ x.x1;
            match y {
                0 => x.x0 ^ (x.x2 & s),
                1 => x.x1 ^ (x.x2 & (s ^ 1)),
                _ => x.x2,
            }
        }),
        4 => TaskSpec::from_fn("x0⊕x2(¬(x0⊕x1)), x1⊕x2(x0⊕x1), x2", |x, y| {
            let s = x.x0 ^ x.x1;
            match y {
                0 => x.x0 ^ (x.x2 & (s ^ 1)),
                1 => x.x1 ^ (x.x2 & s),
                _ => x.x2,
            }
        }),
        5 => TaskSpec::from_fn("x0⊕x2, x1, x2", |x, y| match y {
            0 => x.x0 ^ x.x2,
            1 => x.x1,
            _ => x.x2,
        }),
        6 => TaskSpec::from_fn("x0, x1, x2⊕x0", |x, y| match y {
            0 => x.x0,
            1 => x.x1,
            _ => x.x2 ^ x.x0,
        }),
        7 => TaskSpec::from_fn("x0⊕x2, x1, x0", |x, y| match y {
            0 => x.x0 ^ x.x2,
            1 => x.x1,
            _ => x.x0,
        }),
        8 => TaskSpec::from_fn("x0⊕x2, x1⊕x2, x0", |x, y| match y {
            0 => x.x0 ^ x.x2,
            1 => x.x1 ^ x.x2,
            _ => x.x0,
        }),
        _ => return Err(TaskError::UnknownTask(row.to_string())),
    };
    Ok(t)
}

/// Transformation column of Table I.
pub fn table_one_transformation(row: usize) -> Option<&'static str> {
    const LABELS: [&str; 8] =
        ["R_XY", "R_XY R_Z(pi)", "R_XY R_Z(pi/2)", "R_XY R_Z(3pi/2)", "R_X(pi)", "R_X(3pi/2)", "R_X(pi/2)", "R_Z(pi)"];
    LABELS.get(row.wrapping_sub(1)).copied()
}

/// Polar and azimuthal angles of the encoding state ψ(x0, x1, x2).
pub fn encoding_angles(x0: u8, x1: u8, x2: u8) -> (f64, f64) {
    let s3 = 3f64.sqrt();
    let sign = if x2 & 1 == 0 { 1.0 } else { -1.0 };
    let theta = ((s3 + sign) / (2.0 * s3)).sqrt().acos();
    let phi = FRAC_PI_4 * (1.0 + 4.0 * (x0 & 1) as f64 + 2.0 * ((x0 ^ x1) & 1) as f64);
    (theta, phi)
}

/// cos θ|0⟩ + e^{iφ} sin θ|1⟩ for the encoding angles.
pub fn encoding_ket(x0: u8, x1: u8, x2: u8) -> Ket2 {
    let (theta, phi) = encoding_angles(x0, x1, x2);
    ket(c(theta.cos(), 0.0), C64::from_polar(theta.sin(), phi))
}

pub fn encoding_state(x0: u8, x1: u8, x2: u8) -> Mat2 {
    projector(&encoding_ket(x0, x1, x2))
}

pub fn encoding_bloch(x0: u8, x1: u8, x2: u8) -> BlochVector {
    ket_to_bloch(&encoding_ket(x0, x1, x2))
}

/// Weighted average success: (1/8) Σ_x Σ_y w_y p(z = f(x,y) | x, y); uniform weights give the plain average.
pub fn average_success(task: &TaskSpec, p: impl Fn(Input, usize) -> f64) -> Result<f64, TaskError> {
    let w = task.weights();
    let mut total = 0.0;
    for x in Input::all() {
        for (y, wy) in w.iter().enumerate() {
            let v = p(x, y);
            if !(-1e-12..=1.0 + 1e-12).contains(&v) || !v.is_finite() {
                return Err(TaskError::ProbabilityOutOfRange(v));
            }
            total += wy * v;
        }
    }
    Ok(total / 8.0)
}

/// Deterministic three-device strategy: encoder (x0,x1)→m1, relay (m1,x2)→m2, decoder (m2,y)→z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalStrategy {
    /// Bit k is m1 for (x0,x1) with k = 2·x0 + x1.
    pub encoder: u8,
    /// Bit k is m2 for (m1,x2) with k = 2·m1 + x2.
    pub relay: u8,
    /// Bit k is z for (m2,y) with k = 3·m2 + y.
    pub decoder: u8,
}

impl ClassicalStrategy {
    /// Enumeration index, encoder-major.
    pub fn index(&self) -> u32 {
        (self.encoder as u32) << 10 | (self.relay as u32) << 6 | self.decoder as u32
    }

    pub fn guess(&self, x: Input, y: usize) -> u8 {
        let m1 = self.encoder >> x.pair() & 1;
        let m2 = self.relay >> (2 * m1 as usize + x.x2 as usize) & 1;
        self.decoder >> (3 * m2 as usize + y) & 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalOptimum<S> {
    pub value: f64,
    /// Number of the 24 (x,y) pairs answered correctly, for unbiased tasks.
    pub successes: Option<u32>,
    pub witness: S,
}

/// Best decoder bit per (message, question) given weighted votes; ties go to 0.
fn best_decoder(votes: &[[f64; 2]]) -> (f64, u8) {
    let mut score = 0.0;
    let mut bits = 0u8;
    for (k, v) in votes.iter().enumerate() {
        if v[1] > v[0] {
            bits |= 1 << k;
            score += v[1];
        } else {
            score += v[0];
        }
    }
    (score, bits)
}

fn integer_weights(task: &TaskSpec) -> ([f64; 3], bool) {
    match task.bias() {
        None => ([1.0; 3], true),
        Some(b) => (b.weights(), false),
    }
}

/// Exhaustive maximum over all 16·16·64 deterministic strategies. Shared randomness is a convex
/// mixture of these, so the deterministic maximum is the classical bound.
pub fn classical_optimum(task: &TaskSpec) -> ClassicalOptimum<ClassicalStrategy> {
    let (w, unbiased) = integer_weights(task);
    let mut best: Option<(f64, ClassicalStrategy)> = None;
    for encoder in 0u8..16 {
        for relay in 0u8..16 {
            let mut votes = [[0.0; 2]; 6];
            for x in Input::all() {
                let m1 = encoder >> x.pair() & 1;
                let m2 = relay >> (2 * m1 as usize + x.x2 as usize) & 1;
                for (y, wy) in w.iter().enumerate() {
                    votes[3 * m2 as usize + y][task.f(x, y) as usize] += wy;
                }
            }
            let (score, decoder) = best_decoder(&votes);
            if best.is_none_or(|(b, _)| score > b + 1e-12) {
                best = Some((score, ClassicalStrategy { encoder, relay, decoder }));
            }
        }
    }
    let (score, witness) = best.expect("strategy space is nonempty");
    finish(score, unbiased, witness)
}

fn finish<S>(score: f64, unbiased: bool, witness: S) -> ClassicalOptimum<S> {
    if unbiased {
        let n = score.round() as u32;
        ClassicalOptimum { value: n as f64 / 24.0, successes: Some(n), witness }
    } else {
        ClassicalOptimum { value: score / 8.0, successes: None, witness }
    }
}

/// Deterministic non-distributed strategy: encoder x→m, decoder (m,y)→z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandardRacStrategy {
    /// Bit k is m for input index k.
    pub encoder: u8,
    /// Bit k is z for (m,y) with k = 3·m + y.
    pub decoder: u8,
}

/// Exhaustive classical optimum of the standard (single encoder) 3→1 RAC for the given task.
pub fn standard_rac_classical_optimum(task: &TaskSpec) -> ClassicalOptimum<StandardRacStrategy> {
    let (w, unbiased) = integer_weights(task);
    let mut best: Option<(f64, StandardRacStrategy)> = None;
    for encoder in 0u16..256 {
        let encoder = encoder as u8;
        let mut votes = [[0.0; 2]; 6];
        for x in Input::all() {
            let m = encoder >> x.index() & 1;
            for (y, wy) in w.iter().enumerate() {
                votes[3 * m as usize + y][task.f(x, y) as usize] += wy;
            }
        }
        let (score, decoder) = best_decoder(&votes);
        if best.is_none_or(|(b, _)| score > b + 1e-12) {
            best = Some((score, StandardRacStrategy { encoder, decoder }));
        }
    }
    let (score, witness) = best.expect("strategy space is nonempty");
    finish(score, unbiased, witness)
}

/// A cube vertex (±1, ±1, ±1) up to the factor 1/√3.
pub type Vertex = [i8; 3];

pub fn cube_vertices() -> [Vertex; 8] {
    let mut v = [[0i8; 3]; 8];
    for (i, out) in v.iter_mut().enumerate() {
        for k in 0..3 {
            out[k] = if i >> (2 - k) & 1 == 0 { 1 } else { -1 };
        }
    }
    v
}

pub fn vertex_bloch(v: Vertex) -> BlochVector {
    let s = 1.0 / 3f64.sqrt();
    BlochVector::new(v[0] as f64 * s, v[1] as f64 * s, v[2] as f64 * s)
}

/// An element of the rotation group of the cube acting on Bloch vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeRotation {
    pub matrix: [[i8; 3]; 3],
    pub label: String,
    pub axis: BlochVector,
    pub angle: f64,
    pub admissible: bool,
}

impl CubeRotation {
    pub fn matrix_f64(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.matrix[i][j] as f64)
    }

    pub fn apply(&self, v: Vertex) -> Vertex {
        let mut out = [0i8; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|j| self.matrix[i][j] * v[j]).sum();
        }
        out
    }

    pub fn unitary(&self) -> Mat2 {
        rotation_unitary(self.axis, self.angle).expect("cube rotation axes are normalized")
    }

    pub fn compose(&self, other: &CubeRotation) -> [[i8; 3]; 3] {
        let mut m = [[0i8; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = (0..3).map(|k| self.matrix[i][k] * other.matrix[k][j]).sum();
            }
        }
        m
    }

    /// Whether some four vertices are mapped exactly onto the other four.
    pub fn swaps_some_half(&self) -> bool {
        let verts = cube_vertices();
        (0u8..=255).filter(|m| m.count_ones() == 4).any(|mask| {
            (0..8).filter(|i| mask >> i & 1 == 1).all(|i| {
                let img = self.apply(verts[i]);
                let j = verts.iter().position(|v| *v == img).expect("vertex image");
                mask >> j & 1 == 0
            })
        })
    }
}

fn axis_label(n: [i32; 3]) -> String {
    const NAMES: [&str; 3] = ["X", "Y", "Z"];
    let nz: Vec<usize> = (0..3).filter(|&k| n[k] != 0).collect();
    match nz.len() {
        1 => NAMES[nz[0]].to_string(),
        2 => {
            let (i, j) = if nz == [0, 2] { (2, 0) } else { (nz[0], nz[1]) };
            let sign = if n[i] * n[j] > 0 { "+" } else { "-" };
            format!("{{{}{}{}}}", NAMES[i], sign, NAMES[j])
        }
        _ => {
            let s = |k: usize| if n[k] > 0 { "+" } else { "-" };
            format!("{{X{}Y{}Z}}", s(1), s(2))
        }
    }
}

fn angle_label(k: u32) -> &'static str {
    // angle = k·π/6 for the values occurring in the cube group
    match k {
        3 => "pi/2",
        4 => "2pi/3",
        6 => "pi",
        8 => "4pi/3",
        9 => "3pi/2",
        _ => "?",
    }
}

fn classify(m: &Matrix3<f64>) -> (BlochVector, f64, String) {
    let tr = m.trace();
    if (tr - 3.0).abs() < 1e-9 {
        return (BlochVector::new(0.0, 0.0, 1.0), 0.0, "I".to_string());
    }
    let angle = ((tr - 1.0) / 2.0).clamp(-1.0, 1.0).acos();
    let mut axis: Vector3<f64>;
    let mut angle = angle;
    if (angle - PI).abs() < 1e-9 {
        let sym = (m + Matrix3::identity()) / 2.0;
        let col = (0..3).max_by(|&a, &b| sym[(a, a)].total_cmp(&sym[(b, b)])).unwrap();
        axis = sym.column(col).into_owned().normalize();
        let first = (0..3).find(|&k| axis[k].abs() > 1e-9).unwrap();
        if axis[first] < 0.0 {
            axis = -axis;
        }
    } else {
        axis = Vector3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]).normalize();
        let first = (0..3).find(|&k| axis[k].abs() > 1e-9).unwrap();
        if axis[first] < 0.0 {
            axis = -axis;
            angle = 2.0 * PI - angle;
        }
    }
    let ints = [0, 1, 2].map(|k| if axis[k] > 1e-9 { 1 } else if axis[k] < -1e-9 { -1 } else { 0 });
    let k = (angle / (PI / 6.0)).round() as u32;
    let label = format!("R_{}({})", axis_label(ints), angle_label(k));
    (BlochVector::from_vector(&axis), angle, label)
}

/// The 24 proper rotations of the cube. A rotation is admissible when it fixes no vertex, which
/// is exactly when it maps some face-set of four vertices onto the complementary four.
pub fn enumerate_cube_rotations() -> Vec<CubeRotation> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::with_capacity(24);
    for p in perms {
        for signs in 0..8u8 {
            let mut m = [[0i8; 3]; 3];
            for i in 0..3 {
                m[i][p[i]] = if signs >> i & 1 == 0 { 1 } else { -1 };
            }
            let mf = Matrix3::from_fn(|i, j| m[i][j] as f64);
            if mf.determinant() < 0.0 {
                continue;
            }
            let (axis, angle, label) = classify(&mf);
            let fixes_vertex = cube_vertices().iter().any(|v| {
                let img: Vec<i8> = (0..3).map(|i| (0..3).map(|j| m[i][j] * v[j]).sum()).collect();
                img == v.to_vec()
            });
            out.push(CubeRotation { matrix: m, label, axis, angle, admissible: !fixes_vertex });
        }
    }
    out.sort_by(|a, b| rotation_order(a).cmp(&rotation_order(b)).then(a.label.cmp(&b.label)));
    out
}

fn rotation_order(r: &CubeRotation) -> (u8, u32) {
    let class = if r.label == "I" {
        0
    } else if r.label.starts_with("R_{X+Y+Z}")
        || r.label.starts_with("R_{X-Y+Z}")
        || r.label.starts_with("R_{X+Y-Z}")
        || r.label.starts_with("R_{X-Y-Z}")
    {
        3
    } else if r.label.starts_with("R_{") {
        2
    } else {
        1
    };
    (class, (r.angle * 1e6) as u32)
}

pub fn cube_rotation(label: &str) -> Result<CubeRotation, TaskError> {
    enumerate_cube_rotations()
        .into_iter()
        .find(|r| r.label == label)
        .ok_or_else(|| TaskError::UnknownRotation(label.to_string()))
}

/// Assignment of cube vertices to the four (x0, x1) preparations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexAssignment(pub [Vertex; 4]);

impl VertexAssignment {
    /// The encoding states with x2 = 0 (top face).
    pub fn canonical() -> Self {
        Self::from_encoding(|_, _| 0)
    }

    /// The encoding state with x2 replaced by x0: x0 = 1 states sit on the bottom face.
    pub fn x2_equals_x0() -> Self {
        Self::from_encoding(|x0, _| x0)
    }

    fn from_encoding(x2: impl Fn(u8, u8) -> u8) -> Self {
        let mut v = [[0i8; 3]; 4];
        for (k, out) in v.iter_mut().enumerate() {
            let (x0, x1) = ((k >> 1) as u8, (k & 1) as u8);
            let b = encoding_bloch(x0, x1, x2(x0, x1)).to_array();
            *out = b.map(|c| if c > 0.0 { 1 } else { -1 });
        }
        Self(v)
    }

    pub fn is_valid(&self) -> bool {
        let all = cube_vertices();
        self.0.iter().all(|v| all.contains(v))
            && (0..4).all(|i| (i + 1..4).all(|j| self.0[i] != self.0[j]))
    }

    /// All orderings of four distinct vertices whose image under `r` is disjoint from them.
    pub fn compatible_with(r: &CubeRotation) -> Vec<VertexAssignment> {
        let verts = cube_vertices();
        let mut out = Vec::new();
        for a in 0..8 {
            for b in 0..8 {
                for c2 in 0..8 {
                    for d in 0..8 {
                        let idx = [a, b, c2, d];
                        let asg = VertexAssignment(idx.map(|i| verts[i]));
                        if asg.is_valid() && asg.0.iter().all(|v| !asg.0.contains(&r.apply(*v))) {
                            out.push(asg);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Guessing functions read off from final Bloch vectors: f(x,0)=[w_y<0], f(x,1)=[w_x<0], f(x,2)=[w_z<0].
pub fn task_from_vectors(label: impl Into<String>, w: impl Fn(Input) -> BlochVector) -> TaskSpec {
    TaskSpec::from_fn(label, |x, y| {
        let v = w(x);
        let comp = [v.y, v.x, v.z][y];
        (comp < 0.0) as u8
    })
}

/// Mutually unbiased decoding bases σ_Y, σ_X, σ_Z with outcome 0 on the +1 eigenvector.
pub fn mub_measurements() -> [BinaryMeasurement; 3] {
    [BlochVector::new(0.0, 1.0, 0.0), BlochVector::new(1.0, 0.0, 0.0), BlochVector::new(0.0, 0.0, 1.0)]
        .map(BinaryMeasurement::along)
}

/// Task and strategy where x2 = 1 applies the cube rotation to the assigned preparations.
pub fn build_qrac_task(
    rotation: &CubeRotation,
    assignment: &VertexAssignment,
) -> Result<(TaskSpec, QracStrategy), TaskError> {
    if !rotation.admissible {
        return Err(TaskError::InadmissibleRotation(rotation.label.clone()));
    }
    if !assignment.is_valid() {
        return Err(TaskError::InvalidAssignment);
    }
    if assignment.0.iter().any(|v| assignment.0.contains(&rotation.apply(*v))) {
        return Err(TaskError::IncompatibleAssignment(rotation.label.clone()));
    }
    let final_vertex = |x: Input| {
        let v = assignment.0[x.pair()];
        if x.x2 == 0 {
            v
        } else {
            rotation.apply(v)
        }
    };
    let task = task_from_vectors(format!("{} on {:?}", rotation.label, assignment.0), |x| vertex_bloch(final_vertex(x)));
    let states = [0, 1, 2, 3].map(|k| bloch_to_ket(vertex_bloch(assignment.0[k])));
    let channels = [ChoiMatrix::identity(), ChoiMatrix::from_unitary(&rotation.unitary())];
    Ok((task, QracStrategy { states, channels, measurements: mub_measurements() }))
}

/// Rotation and vertex assignment realizing the QRAC construction of Table I rows 5–8.
pub fn table_one_qrac_construction(row: usize) -> Result<(CubeRotation, VertexAssignment), TaskError> {
    let (label, assignment) = match row {
        5 => ("R_X(pi)", VertexAssignment::canonical()),
        6 => ("R_X(3pi/2)", VertexAssignment::x2_equals_x0()),
        7 => ("R_X(pi/2)", VertexAssignment::x2_equals_x0()),
        8 => ("R_Z(pi)", VertexAssignment::x2_equals_x0()),
        _ => return Err(TaskError::UnknownTask(row.to_string())),
    };
    Ok((cube_rotation(label)?, assignment))
}

/// Table I row 5–8 task (with its Table I label) and the QRAC strategy reaching (1+√3)/(2√3).
pub fn table_one_qrac(row: usize) -> Result<(TaskSpec, QracStrategy), TaskError> {
    let (r, a) = table_one_qrac_construction(row)?;
    let (task, strategy) = build_qrac_task(&r, &a)?;
    Ok((task.with_label(table_one_task(row)?.label()), strategy))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Reflection {
    XY,
    XZ,
    YZ,
}

impl Reflection {
    pub const ALL: [Reflection; 3] = [Reflection::XY, Reflection::XZ, Reflection::YZ];

    /// Bloch normal of the mirror plane.
    pub fn normal(self) -> BlochVector {
        match self {
            Reflection::XY => BlochVector::new(0.0, 0.0, 1.0),
            Reflection::XZ => BlochVector::new(0.0, 1.0, 0.0),
            Reflection::YZ => BlochVector::new(1.0, 0.0, 0.0),
        }
    }

    pub fn matrix(self) -> Matrix3<f64> {
        let n = self.normal().to_vector();
        Matrix3::identity() - n * n.transpose() * 2.0
    }

    /// Fixed unitary applied to Charlie's share of the GHZ state. It carries the z axis onto the
    /// reflection normal, so the conditional states of the R_XY protocol are mapped accordingly.
    pub fn charlie_frame(self) -> Mat2 {
        match self {
            Reflection::XY => Mat2::identity(),
            Reflection::XZ => rotation_unitary(BlochVector::new(1.0, 0.0, 0.0), -FRAC_PI_2).expect("unit axis"),
            Reflection::YZ => rotation_unitary(BlochVector::new(0.0, 1.0, 0.0), FRAC_PI_2).expect("unit axis"),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Reflection::XY => "R_XY",
            Reflection::XZ => "R_XZ",
            Reflection::YZ => "R_YZ",
        }
    }

    /// Axis of the extra rotation R(φ′) composed with the reflection.
    pub fn twist_axis_label(self) -> &'static str {
        match self {
            Reflection::XY => "Z",
            Reflection::XZ => "Y",
            Reflection::YZ => "X",
        }
    }
}

impl std::str::FromStr for Reflection {
    type Err = TaskError;

    fn from_str(s: &str) -> Result<Self, TaskError> {
        match s.trim_start_matches("R_").to_ascii_uppercase().as_str() {
            "XY" | "YX" => Ok(Reflection::XY),
            "XZ" | "ZX" => Ok(Reflection::XZ),
            "YZ" | "ZY" => Ok(Reflection::YZ),
            _ => Err(TaskError::UnknownRotation(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseOffset {
    Zero,
    Pi,
    HalfPi,
    ThreeHalvesPi,
}

impl PhaseOffset {
    pub const ALL: [PhaseOffset; 4] = [PhaseOffset::Zero, PhaseOffset::Pi, PhaseOffset::HalfPi, PhaseOffset::ThreeHalvesPi];

    pub fn radians(self) -> f64 {
        match self {
            PhaseOffset::Zero => 0.0,
            PhaseOffset::Pi => PI,
            PhaseOffset::HalfPi => FRAC_PI_2,
            PhaseOffset::ThreeHalvesPi => 3.0 * FRAC_PI_2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PhaseOffset::Zero => "0",
            PhaseOffset::Pi => "pi",
            PhaseOffset::HalfPi => "pi/2",
            PhaseOffset::ThreeHalvesPi => "3pi/2",
        }
    }
}

impl std::str::FromStr for PhaseOffset {
    type Err = TaskError;

    fn from_str(s: &str) -> Result<Self, TaskError> {
        match s {
            "0" => Ok(PhaseOffset::Zero),
            "pi" => Ok(PhaseOffset::Pi),
            "pi/2" => Ok(PhaseOffset::HalfPi),
            "3pi/2" => Ok(PhaseOffset::ThreeHalvesPi),
            _ => Err(TaskError::UnknownRotation(s.to_string())),
        }
    }
}

/// Task solved with success (1+√3)/(2√3) by the EARAC family member (reflection, φ′), with its strategy.
pub fn build_earac_task(reflection: Reflection, offset: PhaseOffset) -> (TaskSpec, EaracStrategy) {
    let strategy = EaracStrategy::family(reflection, offset);
    let vectors = strategy.charlie_vectors();
    let label = if offset == PhaseOffset::Zero {
        reflection.label().to_string()
    } else {
        format!("{} R_{}({})", reflection.label(), reflection.twist_axis_label(), offset.label())
    };
    let task = task_from_vectors(label, |x| vectors[x.index()]);
    (task, strategy)
}

/// Table I row of the EARAC family member (R_XY, φ′), rows 1–4.
pub fn table_one_earac(row: usize) -> Result<(TaskSpec, EaracStrategy), TaskError> {
    let offset = match row {
        1 => PhaseOffset::Zero,
        2 => PhaseOffset::Pi,
        3 => PhaseOffset::HalfPi,
        4 => PhaseOffset::ThreeHalvesPi,
        _ => return Err(TaskError::UnknownTask(row.to_string())),
    };
    let (task, s) = build_earac_task(Reflection::XY, offset);
    Ok((task.with_label(table_one_task(row)?.label()), s))
}

/// Distance of a Bloch vector from the nearest cube vertex.
pub fn distance_to_cube(v: BlochVector) -> f64 {
    cube_vertices().iter().map(|w| vertex_bloch(*w).distance(v)).fold(f64::INFINITY, f64::min)
}

/// The four cube vertices on the positive side of the mirror (sources) and their mirror images
/// (targets).
pub fn reflection_instance(r: Reflection) -> ([BlochVector; 4], [BlochVector; 4]) {
    let n = r.normal();
    let m = r.matrix();
    let side: Vec<BlochVector> = cube_vertices().iter().map(|v| vertex_bloch(*v)).filter(|v| v.dot(n) > 0.0).collect();
    let sources: [BlochVector; 4] = side.try_into().expect("four vertices per face");
    (sources, sources.map(|s| BlochVector::from_vector(&(m * s.to_vector()))))
}

/// Whether a qubit channel can apply the reflection to the four sources of [`reflection_instance`].
pub fn reflection_nogo(r: Reflection) -> FeasibilityReport {
    let (sources, targets) = reflection_instance(r);
    reflection_feasibility(&targets, &sources)
}

/// Whether a qubit channel can map the first compatible assignment of `rotation` onto its image.
pub fn rotation_feasibility(rotation: &CubeRotation) -> Result<FeasibilityReport, TaskError> {
    let assignment = VertexAssignment::compatible_with(rotation)
        .into_iter()
        .next()
        .ok_or_else(|| TaskError::IncompatibleAssignment(rotation.label.clone()))?;
    let sources = assignment.0.map(vertex_bloch);
    let targets = assignment.0.map(|v| vertex_bloch(rotation.apply(v)));
    Ok(reflection_feasibility(&targets, &sources))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::unitary_bloch_action;

    #[test]
    fn encoding_examples() {
        let s = 1.0 / 3f64.sqrt();
        assert!(encoding_bloch(0, 0, 0).max_deviation(BlochVector::new(s, s, s)) < 1e-12);
        assert!(encoding_bloch(0, 0, 1).max_deviation(BlochVector::new(s, s, -s)) < 1e-12);
        let mut dists = Vec::new();
        let pts: Vec<_> = Input::all().map(|x| encoding_bloch(x.x0, x.x1, x.x2)).collect();
        for i in 0..8 {
            assert!(distance_to_cube(pts[i]) < 1e-12);
            for j in (i + 1)..8 {
                dists.push(pts[i].distance(pts[j]));
            }
        }
        let allowed = [2.0 * s, 2.0 * 2f64.sqrt() * s, 2.0];
        assert!(dists.iter().all(|d| allowed.iter().any(|a| (a - d).abs() < 1e-12)));
        assert!(dists.iter().all(|d| *d > 1e-6));
    }

    #[test]
    fn success_averages() {
        let t = TaskSpec::standard();
        assert!((average_success(&t, |_, _| 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((average_success(&t, |_, _| 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(average_success(&t, |_, _| 1.5), Err(TaskError::ProbabilityOutOfRange(_))));
    }

    #[test]
    fn biased_weights_sum_to_one() {
        for t in 0..2 {
            for q in [0.0, 0.05, 1.0 / 6.0] {
                let w = bias_weights(t, q);
                assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
                assert!(w.iter().all(|x| *x >= -1e-15));
            }
        }
        assert_eq!(Bias::new(0, 0.2), Err(TaskError::BiasOutOfRange(0.2)));
        assert_eq!(Bias::new(2, 0.1), Err(TaskError::BiasSetting(2)));
    }

    #[test]
    fn classical_examples() {
        // m1 = [x0x1 = 00], m2 = [x2 = 0 and m1 = 0] scores 17/24 on x_y
        let c1 = classical_optimum(&TaskSpec::standard());
        assert_eq!(c1.successes, Some(17));
        let witness = ClassicalStrategy { encoder: 1, relay: 1, decoder: c1.witness.decoder };
        let hits = Input::all().flat_map(|x| (0..3).map(move |y| (x, y))).filter(|&(x, y)| witness.guess(x, y) == x.bit(y)).count();
        assert_eq!(hits, 17);
        let zero = TaskSpec::from_fn("0", |_, _| 0);
        assert_eq!(classical_optimum(&zero).successes, Some(24));
        assert_eq!(classical_optimum(&zero).witness, ClassicalStrategy { encoder: 0, relay: 0, decoder: 0 });
        assert_eq!(standard_rac_classical_optimum(&TaskSpec::standard()).successes, Some(18));
        let parity = TaskSpec::from_fn("parity", |x, _| x.x0 ^ x.x1 ^ x.x2);
        assert_eq!(standard_rac_classical_optimum(&parity).successes, Some(24));
        assert_eq!(standard_rac_classical_optimum(&zero).successes, Some(24));
    }

    #[test]
    fn witness_reaches_reported_value() {
        let t = table_one_task(3).unwrap();
        let opt = classical_optimum(&t);
        let n = Input::all()
            .flat_map(|x| (0..3).map(move |y| (x, y)))
            .filter(|&(x, y)| opt.witness.guess(x, y) == t.f(x, y))
            .count();
        assert_eq!(Some(n as u32), opt.successes);
    }

    #[test]
    fn cube_group_counts() {
        let r = enumerate_cube_rotations();
        assert_eq!(r.len(), 24);
        assert_eq!(r.iter().filter(|x| x.admissible).count(), 15);
        assert_eq!(r[0].label, "I");
        assert!(!r[0].admissible);
        assert!(cube_rotation("R_{X+Y}(pi)").unwrap().admissible);
        let labels: Vec<_> = r.iter().map(|x| x.label.clone()).collect();
        for l in ["R_X(pi/2)", "R_X(pi)", "R_X(3pi/2)", "R_Z(pi)", "R_{X-Y}(pi)", "R_{Z-X}(pi)", "R_{X+Y+Z}(2pi/3)"] {
            assert!(labels.contains(&l.to_string()), "{l} missing from {labels:?}");
        }
    }

    #[test]
    fn cube_rotation_unitaries_match_matrices() {
        for r in enumerate_cube_rotations() {
            let act = unitary_bloch_action(&r.unitary());
            assert!((act - r.matrix_f64()).amax() < 1e-12, "{}", r.label);
        }
    }

    #[test]
    fn admissible_iff_swaps_a_half() {
        for r in enumerate_cube_rotations() {
            assert_eq!(r.admissible, r.swaps_some_half(), "{}", r.label);
        }
    }

    #[test]
    fn inadmissible_rotation_rejected() {
        let id = cube_rotation("I").unwrap();
        assert!(matches!(
            build_qrac_task(&id, &VertexAssignment::canonical()),
            Err(TaskError::InadmissibleRotation(_))
        ));
        let rz = cube_rotation("R_Z(pi/2)").unwrap();
        assert!(matches!(
            build_qrac_task(&rz, &VertexAssignment::canonical()),
            Err(TaskError::IncompatibleAssignment(_))
        ));
    }

    #[test]
    fn task_json_round_trip() {
        let t = table_one_task(4).unwrap().with_bias(Bias::new(1, 0.1).unwrap());
        let back = TaskSpec::from_json(&t.to_json()).unwrap();
        assert_eq!(t, back);
        assert!(TaskSpec::from_json(r#"{"label":"x","truth_table":[0,1]}"#).is_err());
        assert!(TaskSpec::from_json(&format!(r#"{{"label":"x","truth_table":[{}]}}"#, ["2"; 24].join(","))).is_err());
    }

    #[test]
    fn reflection_parsing() {
        assert_eq!("XY".parse::<Reflection>().unwrap(), Reflection::XY);
        assert_eq!("R_YZ".parse::<Reflection>().unwrap(), Reflection::YZ);
        assert!("XX".parse::<Reflection>().is_err());
    }
}
