//! See-saw maximization of QRAC success over measurements, preparations and channels, plus the
//! explicit strategies of the first four Table I tasks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channels::{maximize_linear, ChoiMatrix, RESOLVED_CONVENTION};
use crate::numerics::{c, herm_eig, identity2, ket, kron2, projector, Ket2, Mat2, Mat4, C64};
use crate::protocols::{eval_qrac_strategy, BinaryMeasurement, ProtocolError, QracStrategy};
use crate::tasks::{mub_measurements, Input, TaskSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeesawError {
    #[error("restart count must be at least 1")]
    NoRestarts,
    #[error("no explicit strategy for task {0}")]
    UnknownTask(usize),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

pub const MAX_CYCLES: usize = 500;
pub const CYCLE_TOL: f64 = 1e-9;
pub const DEFAULT_RESTARTS: usize = 50;

fn objective(states: &[Ket2; 4], channels: &[ChoiMatrix; 2], meas: &[BinaryMeasurement; 3], task: &TaskSpec) -> f64 {
    let s = QracStrategy { states: *states, channels: channels.clone(), measurements: *meas };
    let table = s.success_table(task);
    let w = task.weights();
    table.iter().map(|row| row.iter().zip(w).map(|(p, wy)| p * wy).sum::<f64>()).sum::<f64>() / 8.0
}

/// Optimal measurements for fixed decoder inputs: E₀ projects onto the positive part of
/// Σ_x (±)ρ_x; a vanishing difference gives E₀ = E₁ = I/2.
pub fn opt_measurements(post_states: &[Mat2; 8], task: &TaskSpec) -> [BinaryMeasurement; 3] {
    std::array::from_fn(|y| {
        let mut d = Mat2::zeros();
        for (i, rho) in post_states.iter().enumerate() {
            let sign = if task.f(Input::from_index(i), y) == 0 { 1.0 } else { -1.0 };
            d += rho * c(sign, 0.0);
        }
        let scale = post_states.iter().map(|r| r.trace().re.abs()).sum::<f64>().max(1.0);
        let eig = herm_eig(&((d + d.adjoint()) * c(0.5, 0.0))).expect("2x2 Hermitian eigensolve");
        let tol = 1e-12 * scale;
        if eig.values.iter().all(|l| l.abs() <= tol) {
            let half = identity2() * c(0.5, 0.0);
            return BinaryMeasurement { effects: [half, half] };
        }
        let mut e0 = Mat2::zeros();
        for k in 0..2 {
            if eig.values[k] > tol {
                let v = eig.vector(k);
                e0 += v * v.adjoint();
            }
        }
        BinaryMeasurement { effects: [e0, identity2() - e0] }
    })
}

/// Score operator of preparation (x₀,x₁): Σ_{x₂,y} w_y Φ_{x₂}†(E_{y, f(x,y)}).
pub fn score_operator(pair: usize, channels: &[ChoiMatrix; 2], meas: &[BinaryMeasurement; 3], task: &TaskSpec) -> Mat2 {
    let w = task.weights();
    let mut s = Mat2::zeros();
    for x2 in 0..2u8 {
        let x = Input::new((pair >> 1) as u8, (pair & 1) as u8, x2);
        for y in 0..3 {
            s += channels[x2 as usize].adjoint_apply(meas[y].effect(task.f(x, y))) * c(w[y], 0.0);
        }
    }
    (s + s.adjoint()) * c(0.5, 0.0)
}

/// Top eigenvector of each score operator; a state is kept when its operator is ∝ I.
pub fn opt_states(
    channels: &[ChoiMatrix; 2],
    meas: &[BinaryMeasurement; 3],
    task: &TaskSpec,
    current: &[Ket2; 4],
) -> [Ket2; 4] {
    std::array::from_fn(|pair| {
        let s = score_operator(pair, channels, meas, task);
        let eig = herm_eig(&s).expect("2x2 Hermitian eigensolve");
        if eig.values[0] - eig.values[1] <= 1e-12 {
            current[pair]
        } else {
            eig.vector(0)
        }
    })
}

/// Linear objective W with Σ_{x₀x₁,y} w_y Tr[E Φ_{x₂}(ρ)] = Tr[J W] (output-first Choi).
pub fn channel_objective(x2: u8, states: &[Ket2; 4], meas: &[BinaryMeasurement; 3], task: &TaskSpec) -> Mat4 {
    let w = task.weights();
    let mut out = Mat4::zeros();
    for (pair, k) in states.iter().enumerate() {
        let x = Input::new((pair >> 1) as u8, (pair & 1) as u8, x2);
        let rho_t = projector(k).transpose();
        for y in 0..3 {
            out += kron2(meas[y].effect(task.f(x, y)), &rho_t) * c(w[y], 0.0);
        }
    }
    out
}

/// Best channel for x₂ given states and measurements; the current channel is kept unless the
/// optimizer strictly improves on it.
pub fn opt_channel(
    x2: u8,
    states: &[Ket2; 4],
    meas: &[BinaryMeasurement; 3],
    task: &TaskSpec,
    current: &ChoiMatrix,
) -> ChoiMatrix {
    let w = channel_objective(x2, states, meas, task);
    let old = (current.matrix() * w).trace().re;
    let opt = maximize_linear(&w);
    let new = (opt.choi.matrix() * w).trace().re;
    if new > old {
        opt.choi
    } else {
        current.clone()
    }
}

/// One restart's trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SeesawState {
    pub strategy: QracStrategy,
    pub value: f64,
    pub iterations: usize,
    pub seed: u64,
    pub stream: u64,
    /// Objective after every stage (measurements, states, channel 0, channel 1) of every cycle.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeesawResult {
    pub value: f64,
    pub strategy: QracStrategy,
    pub best_restart: usize,
    pub restart_values: Vec<f64>,
}

fn haar_ket(rng: &mut ChaCha8Rng) -> Ket2 {
    let g: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let v = ket(c(g[0], g[1]), c(g[2], g[3]));
    v / c(v.norm(), 0.0)
}

/// Haar-random SU(2) element from a uniformly random unit quaternion.
fn haar_unitary(rng: &mut ChaCha8Rng) -> Mat2 {
    let g: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let n = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let [w, x, y, z] = g.map(|v| v / n);
    Mat2::new(C64::new(w, -z), C64::new(-y, -x), C64::new(y, -x), C64::new(w, z))
}

/// Random initial strategy: Haar states, Haar unitary channels, MUB measurements.
pub fn random_strategy(rng: &mut ChaCha8Rng) -> QracStrategy {
    let states = std::array::from_fn(|_| haar_ket(rng));
    let channels = [ChoiMatrix::from_unitary(&haar_unitary(rng)), ChoiMatrix::from_unitary(&haar_unitary(rng))];
    QracStrategy { states, channels, measurements: mub_measurements() }
}

/// Runs the alternating optimization from a given strategy.
pub fn seesaw_from(task: &TaskSpec, start: QracStrategy) -> (QracStrategy, Vec<f64>) {
    let QracStrategy { mut states, mut channels, measurements } = start;
    let mut meas = measurements;
    let mut history = vec![objective(&states, &channels, &meas, task)];
    let mut prev = history[0];
    for _ in 0..MAX_CYCLES {
        let post = QracStrategy { states, channels: channels.clone(), measurements: meas }.output_states();
        meas = opt_measurements(&post, task);
        history.push(objective(&states, &channels, &meas, task));
        states = opt_states(&channels, &meas, task, &states);
        history.push(objective(&states, &channels, &meas, task));
        for x2 in 0..2u8 {
            channels[x2 as usize] = opt_channel(x2, &states, &meas, task, &channels[x2 as usize]);
            history.push(objective(&states, &channels, &meas, task));
        }
        let v = *history.last().expect("history is nonempty");
        if v - prev < CYCLE_TOL {
            break;
        }
        prev = v;
    }
    (QracStrategy { states, channels, measurements: meas }, history)
}

/// One seeded restart; `stream` selects an independent ChaCha stream.
pub fn run_restart(task: &TaskSpec, seed: u64, stream: u64) -> SeesawState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let (strategy, history) = seesaw_from(task, random_strategy(&mut rng));
    let value = *history.last().expect("history is nonempty");
    SeesawState { strategy, value, iterations: (history.len() - 1) / 4, seed, stream, history }
}

/// Best strategy over independent restarts (ties go to the lowest restart index).
pub fn run_seesaw(task: &TaskSpec, restarts: usize, seed: u64) -> Result<SeesawResult, SeesawError> {
    if restarts == 0 {
        return Err(SeesawError::NoRestarts);
    }
    let runs: Vec<SeesawState> = (0..restarts as u64).into_par_iter().map(|k| run_restart(task, seed, k)).collect();
    let restart_values: Vec<f64> = runs.iter().map(|r| r.value).collect();
    let mut best = 0;
    for (k, v) in restart_values.iter().enumerate() {
        if *v > restart_values[best] {
            best = k;
        }
    }
    let strategy = runs[best].strategy.clone();
    let value = eval_qrac_strategy(&strategy, task)?;
    Ok(SeesawResult { value, strategy, best_restart: best, restart_values })
}

fn kt(a: f64, b: f64) -> Ket2 {
    ket(c(a, 0.0), c(b, 0.0))
}

fn printed_choi(m: [[C64; 4]; 4]) -> ChoiMatrix {
    ChoiMatrix::new(Mat4::from_fn(|i, j| m[i][j]), RESOLVED_CONVENTION)
}

/// Task-1 Choi matrix with the sign s = (−1)^{x₂} in its imaginary entries.
pub fn task1_choi(s: f64) -> ChoiMatrix {
    let q = |re: f64, im: f64| c(re, im);
    printed_choi([
        [q(0.75, 0.0), q(0.25, 0.0), q(0.25, 0.25 * s), q(-0.5, 0.0)],
        [q(0.25, 0.0), q(0.25, 0.0), q(0.0, 0.0), q(-0.25, 0.25 * s)],
        [q(0.25, -0.25 * s), q(0.0, 0.0), q(0.25, 0.0), q(-0.25, 0.0)],
        [q(-0.5, 0.0), q(-0.25, -0.25 * s), q(-0.25, 0.0), q(0.75, 0.0)],
    ])
}

/// Task-2 channels: `flip` = false gives the x₂ = 0 matrix, true the x₂ = 1 matrix.
pub fn task2_choi(alpha: f64, flip: bool) -> ChoiMatrix {
    let r = (alpha * (1.0 - alpha)).sqrt();
    let s = if flip { -1.0 } else { 1.0 };
    let (a, b) = (alpha, 1.0 - alpha);
    let i = |v: f64| c(0.0, v);
    let re = |v: f64| c(v, 0.0);
    printed_choi([
        [re(a), re(-s * r), i(s * r), i(a)],
        [re(-s * r), re(b), i(-b), i(-s * r)],
        [i(-s * r), i(b), re(b), re(s * r)],
        [i(-a), i(s * r), re(s * r), re(a)],
    ])
}

/// Task-3 channels: `flip` = false gives the x₂ = 0 matrix, true the x₂ = 1 matrix.
pub fn task3_choi(alpha: f64, flip: bool) -> ChoiMatrix {
    let r = (alpha * (1.0 - alpha)).sqrt();
    let s = if flip { -1.0 } else { 1.0 };
    let (a, b) = (alpha, 1.0 - alpha);
    let re = |v: f64| c(v, 0.0);
    printed_choi([
        [re(a), re(s * r), re(s * r), re(-a)],
        [re(s * r), re(b), re(b), re(-s * r)],
        [re(s * r), re(b), re(b), re(-s * r)],
        [re(-a), re(-s * r), re(-s * r), re(a)],
    ])
}

/// Closed-form values of the explicit strategies for tasks 1–4.
pub fn explicit_value(task: usize) -> Result<f64, SeesawError> {
    match task {
        1 => Ok(0.75),
        2 => Ok((7.0 + 5f64.sqrt()) / 12.0),
        3 | 4 => Ok((9.0 + 21f64.sqrt()) / 18.0),
        k => Err(SeesawError::UnknownTask(k)),
    }
}

fn circular_right_first() -> BinaryMeasurement {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    BinaryMeasurement::projective(&ket(c(h, 0.0), c(0.0, -h)))
}

/// Explicit strategies for Table I tasks 1–3; task 4 is task 3 with x₀↔x₁ and y₀↔y₁ exchanged.
pub fn explicit_strategy(task: usize) -> Result<QracStrategy, SeesawError> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = BinaryMeasurement::projective(&kt(1.0, 0.0));
    match task {
        1 => Ok(QracStrategy {
            states: [kt(1.0, 0.0), kt(h, h), kt(h, -h), kt(0.0, 1.0)],
            channels: [task1_choi(1.0), task1_choi(-1.0)],
            measurements: [z, BinaryMeasurement::projective(&kt(h, h)), circular_right_first()],
        }),
        2 => {
            let r5 = 5f64.sqrt();
            let mid = kt(((5.0 + r5) / 10.0).sqrt(), (2.0 / (5.0 + r5)).sqrt());
            Ok(QracStrategy {
                states: [kt(1.0, 0.0), mid, mid, kt(1.0 / r5, 2.0 / r5)],
                channels: [task2_choi(0.5 + 1.0 / r5, false), task2_choi(0.5 - 1.0 / r5, true)],
                measurements: [z, z, circular_right_first()],
            })
        }
        3 => {
            let (s34, s21) = (34f64.sqrt(), 21f64.sqrt());
            let alpha1 = 0.5 + ((937.0 + 160.0 * s34) / 357.0).sqrt() / 6.0;
            let alpha2 = (357.0 + 51.0 * s21 - 4.0 * 714f64.sqrt()) / 714.0;
            let psi01 = kt(((25.0 + 4.0 * s34) / 63.0).sqrt(), ((38.0 - 4.0 * s34) / 7.0).sqrt() / 3.0);
            let m1 = kt(2.0 * (2.0f64 / 17.0).sqrt(), 3.0 / 17f64.sqrt());
            let m2 = kt((0.5 + (2.0f64 / 17.0).sqrt()).sqrt(), 3.0 / (34.0 + 4.0 * s34).sqrt());
            Ok(QracStrategy {
                states: [kt(1.0, 0.0), psi01, kt(-(2.0f64 / 3.0).sqrt(), 1.0 / 3f64.sqrt()), kt(2.0 / s21, (17.0f64 / 21.0).sqrt())],
                channels: [task3_choi(alpha1, false), task3_choi(alpha2, true)],
                measurements: [z, BinaryMeasurement::projective(&m1), BinaryMeasurement::projective(&m2)],
            })
        }
        4 => {
            let s = explicit_strategy(3)?;
            Ok(QracStrategy {
                states: [s.states[0], s.states[2], s.states[1], s.states[3]],
                channels: s.channels,
                measurements: [s.measurements[1], s.measurements[0], s.measurements[2]],
            })
        }
        k => Err(SeesawError::UnknownTask(k)),
    }
}

/// Values of the task-1 strategy under alternative readings of the channel sign.
pub fn task1_sign_readings() -> Result<Vec<(&'static str, f64)>, SeesawError> {
    let task = crate::tasks::table_one_task(1).map_err(ProtocolError::from)?;
    let base = explicit_strategy(1)?;
    let readings = [
        ("J(+1) for x2=0, J(-1) for x2=1", [task1_choi(1.0), task1_choi(-1.0)]),
        ("identity for x2=0, J(-1) for x2=1", [ChoiMatrix::identity(), task1_choi(-1.0)]),
        ("identity for x2=0, J(+1) for x2=1", [ChoiMatrix::identity(), task1_choi(1.0)]),
        ("J(-1) for x2=0, J(+1) for x2=1", [task1_choi(-1.0), task1_choi(1.0)]),
    ];
    readings
        .into_iter()
        .map(|(label, channels)| {
            let s = QracStrategy { channels, ..base.clone() };
            Ok((label, eval_qrac_strategy(&s, &task)?))
        })
        .collect()
}

/// Task-1 strategy built from the task-2 strategy by applying R_Y(π) after the x₂ = 1 channel;
/// it flips the σ_Z decoding of y = 0, 1 and leaves the circular basis of y = 2 unchanged.
pub fn task1_composed_strategy() -> Result<QracStrategy, SeesawError> {
    let mut s = explicit_strategy(2)?;
    let ry = Mat2::new(c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
    s.channels[1] = s.channels[1].then(&ChoiMatrix::from_unitary(&ry));
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeesawSummary {
    pub task: String,
    pub value: f64,
    pub restarts: usize,
    pub seed: u64,
    pub best_restart: usize,
}
