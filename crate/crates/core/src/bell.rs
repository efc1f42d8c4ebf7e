//! The biased tripartite Bell expression B(t,q): local and no-signaling-bilocal bounds and the
//! genuine-multipartite-nonlocality threshold of the GHZ strategy.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{lp_maximize, LpProblem, LpStatus, TOL_STRUCTURAL};
use crate::protocols::{earac_behavior, Behavior, EaracStrategy, ProtocolError};
use crate::tasks::{quantum_optimum, Bias, PhaseOffset, Reflection, TaskError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BellError {
    #[error("q = {0} outside [0, 1/6]")]
    QOutOfRange(f64),
    #[error("bias setting t = {0} is not a bit")]
    BadSetting(u8),
    #[error("linear program ended with status {0:?}")]
    Lp(LpStatus),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

impl From<TaskError> for BellError {
    fn from(e: TaskError) -> Self {
        match e {
            TaskError::BiasOutOfRange(q) => BellError::QOutOfRange(q),
            TaskError::BiasSetting(t) => BellError::BadSetting(t),
            other => BellError::Protocol(ProtocolError::Task(other)),
        }
    }
}

/// Coefficients c(a,b,c,z₁,z₂,y) with B = Σ c·P.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellFunctional {
    pub bias: Bias,
    coefficients: Vec<f64>,
}

impl BellFunctional {
    /// ¼ w_y on the winning events a⊕b⊕c = 0 (y=0), a⊕b⊕c = z₁ (y=1), b⊕c = z₂ (y=2).
    pub fn new(t: u8, q: f64) -> Result<Self, BellError> {
        let bias = Bias::new(t, q)?;
        let w = bias.weights();
        let b = Behavior::from_fn(|a, b, c, z1, z2, y| {
            let win = match y {
                0 => a ^ b ^ c == 0,
                1 => a ^ b ^ c == z1,
                _ => b ^ c == z2,
            };
            if win {
                0.25 * w[y]
            } else {
                0.0
            }
        });
        Ok(Self { bias, coefficients: b.as_slice().to_vec() })
    }

    pub fn coefficient(&self, a: u8, b: u8, c: u8, z1: u8, z2: u8, y: usize) -> f64 {
        self.coefficients[Behavior::index(a, b, c, z1, z2, y)]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }
}

pub fn bell_value(f: &BellFunctional, p: &Behavior) -> f64 {
    f.coefficients.iter().zip(p.as_slice()).map(|(c, v)| c * v).sum()
}

/// Which pair shares the no-signaling resource; the third party is classical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Partition {
    AB,
    AC,
    BC,
}

impl Partition {
    pub const ALL: [Partition; 3] = [Partition::AB, Partition::AC, Partition::BC];

    pub fn label(self) -> &'static str {
        match self {
            Partition::AB => "AB|C",
            Partition::AC => "AC|B",
            Partition::BC => "BC|A",
        }
    }

    /// Input alphabet sizes (first pair member, second pair member, lone party).
    pub fn sizes(self) -> (usize, usize, usize) {
        match self {
            Partition::AB => (2, 2, 3),
            Partition::AC => (2, 3, 2),
            Partition::BC => (2, 3, 2),
        }
    }
}

/// Deterministic local strategy: a(z₁), b(z₂), c(y) as bit tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalStrategy {
    pub alice: u8,
    pub bob: u8,
    pub charlie: u8,
}

impl LocalStrategy {
    pub fn behavior(&self) -> Behavior {
        Behavior::from_fn(|a, b, c, z1, z2, y| {
            let hit = a == self.alice >> z1 & 1 && b == self.bob >> z2 & 1 && c == self.charlie >> y & 1;
            hit as u8 as f64
        })
    }
}

/// Exact maximum over the 128 deterministic local strategies (first maximizer in index order).
pub fn local_max(f: &BellFunctional) -> (f64, LocalStrategy) {
    let mut best: Option<(f64, LocalStrategy)> = None;
    for alice in 0..4u8 {
        for bob in 0..4u8 {
            for charlie in 0..8u8 {
                let s = LocalStrategy { alice, bob, charlie };
                let v = bell_value(f, &s.behavior());
                if best.is_none_or(|(b, _)| v > b + 1e-12) {
                    best = Some((v, s));
                }
            }
        }
    }
    best.expect("strategy set is nonempty")
}

/// Index of p(a,b|x,y) in a two-party box with binary outputs.
fn pair_index(ny: usize, x: usize, y: usize, a: usize, b: usize) -> usize {
    ((x * ny + y) * 2 + a) * 2 + b
}

/// Normalization and no-signaling equalities of a two-party box with binary outputs.
pub fn ns_polytope(nx: usize, ny: usize, objective: Vec<f64>) -> LpProblem {
    let n = nx * ny * 4;
    assert_eq!(objective.len(), n, "objective length");
    let mut lp = LpProblem::new(objective);
    for x in 0..nx {
        for y in 0..ny {
            let mut row = vec![0.0; n];
            for a in 0..2 {
                for b in 0..2 {
                    row[pair_index(ny, x, y, a, b)] = 1.0;
                }
            }
            lp.add_eq(row, 1.0);
        }
    }
    for x in 0..nx {
        for a in 0..2 {
            for y in 1..ny {
                let mut row = vec![0.0; n];
                for b in 0..2 {
                    row[pair_index(ny, x, y, a, b)] += 1.0;
                    row[pair_index(ny, x, 0, a, b)] -= 1.0;
                }
                lp.add_eq(row, 0.0);
            }
        }
    }
    for y in 0..ny {
        for b in 0..2 {
            for x in 1..nx {
                let mut row = vec![0.0; n];
                for a in 0..2 {
                    row[pair_index(ny, x, y, a, b)] += 1.0;
                    row[pair_index(ny, 0, y, a, b)] -= 1.0;
                }
                lp.add_eq(row, 0.0);
            }
        }
    }
    lp
}

/// Maximum of a linear objective over the no-signaling polytope of a pair.
pub fn ns_polytope_lp(nx: usize, ny: usize, objective: Vec<f64>) -> Result<(f64, Vec<f64>), BellError> {
    let sol = lp_maximize(&ns_polytope(nx, ny, objective));
    match sol.status {
        LpStatus::Optimal => Ok((sol.value, sol.x)),
        s => Err(BellError::Lp(s)),
    }
}

/// Maps (pair box entry, lone output) to the tripartite event for a partition.
struct Layout {
    part: Partition,
}

impl Layout {
    /// (a, b, c, z₁, z₂, y) for pair inputs (x, y'), pair outputs (o1, o2) and lone (input, output).
    fn event(&self, x: usize, yy: usize, o1: u8, o2: u8, lone_in: usize, lone_out: u8) -> (u8, u8, u8, u8, u8, usize) {
        match self.part {
            Partition::AB => (o1, o2, lone_out, x as u8, yy as u8, lone_in),
            Partition::AC => (o1, lone_out, o2, x as u8, lone_in as u8, yy),
            Partition::BC => (lone_out, o1, o2, lone_in as u8, x as u8, yy),
        }
    }
}

/// NSBL maximum with its witness behavior (lone party deterministic, pair no-signaling).
#[derive(Debug, Clone, PartialEq)]
pub struct NsblOptimum {
    pub value: f64,
    pub lone_strategy: u8,
    pub witness: Behavior,
}

fn pair_objective(f: &BellFunctional, part: Partition, lone: u8) -> Vec<f64> {
    let (nx, ny, nl) = part.sizes();
    let layout = Layout { part };
    let mut obj = vec![0.0; nx * ny * 4];
    for x in 0..nx {
        for yy in 0..ny {
            for o1 in 0..2u8 {
                for o2 in 0..2u8 {
                    for li in 0..nl {
                        let (a, b, c, z1, z2, y) = layout.event(x, yy, o1, o2, li, lone >> li & 1);
                        obj[pair_index(ny, x, yy, o1 as usize, o2 as usize)] += f.coefficient(a, b, c, z1, z2, y);
                    }
                }
            }
        }
    }
    obj
}

fn assemble(part: Partition, lone: u8, pair: &[f64]) -> Behavior {
    let (nx, ny, nl) = part.sizes();
    let layout = Layout { part };
    let mut p = vec![0.0; Behavior::LEN];
    for x in 0..nx {
        for yy in 0..ny {
            for o1 in 0..2u8 {
                for o2 in 0..2u8 {
                    for li in 0..nl {
                        let (a, b, c, z1, z2, y) = layout.event(x, yy, o1, o2, li, lone >> li & 1);
                        p[Behavior::index(a, b, c, z1, z2, y)] = pair[pair_index(ny, x, yy, o1 as usize, o2 as usize)].max(0.0);
                    }
                }
            }
        }
    }
    Behavior::new(p).expect("assembled behavior has 96 nonnegative entries")
}

/// Max of B over no-signaling-bilocal behaviors of a partition.
pub fn nsbl_max(f: &BellFunctional, part: Partition) -> Result<NsblOptimum, BellError> {
    let (nx, ny, nl) = part.sizes();
    let mut best: Option<NsblOptimum> = None;
    for lone in 0..(1u8 << nl) {
        let (value, x) = ns_polytope_lp(nx, ny, pair_objective(f, part, lone))?;
        if best.as_ref().is_none_or(|b| value > b.value + 1e-12) {
            best = Some(NsblOptimum { value, lone_strategy: lone, witness: assemble(part, lone, &x) });
        }
    }
    Ok(best.expect("lone strategy set is nonempty"))
}

/// The same maximization with the pair restricted to convex mixtures of its deterministic local
/// boxes, solved as an LP over mixture weights.
pub fn nsbl_max_local_vertices(f: &BellFunctional, part: Partition) -> Result<f64, BellError> {
    let (nx, ny, nl) = part.sizes();
    let n_vertices = 1usize << (nx + ny);
    let mut best = f64::NEG_INFINITY;
    for lone in 0..(1u8 << nl) {
        let obj = pair_objective(f, part, lone);
        let values: Vec<f64> = (0..n_vertices)
            .map(|v| {
                let (fa, fb) = (v & ((1 << nx) - 1), v >> nx);
                let mut s = 0.0;
                for x in 0..nx {
                    for yy in 0..ny {
                        s += obj[pair_index(ny, x, yy, fa >> x & 1, fb >> yy & 1)];
                    }
                }
                s
            })
            .collect();
        let mut lp = LpProblem::new(values);
        lp.add_eq(vec![1.0; n_vertices], 1.0);
        let sol = lp_maximize(&lp);
        if sol.status != LpStatus::Optimal {
            return Err(BellError::Lp(sol.status));
        }
        best = best.max(sol.value);
    }
    Ok(best)
}

/// The 24 vertices of the two-input two-output no-signaling polytope: 16 deterministic boxes and
/// 8 PR boxes p(a,b|x,y) = ½[a⊕b = xy ⊕ αx ⊕ βy ⊕ γ].
pub fn ns22_vertices() -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(24);
    for v in 0..16usize {
        let (fa, fb) = (v & 3, v >> 2);
        let mut p = vec![0.0; 16];
        for x in 0..2 {
            for y in 0..2 {
                p[pair_index(2, x, y, fa >> x & 1, fb >> y & 1)] = 1.0;
            }
        }
        out.push(p);
    }
    for k in 0..8usize {
        let (alpha, beta, gamma) = (k >> 2 & 1, k >> 1 & 1, k & 1);
        let mut p = vec![0.0; 16];
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    let b = a ^ (x & y) ^ (alpha & x) ^ (beta & y) ^ gamma;
                    p[pair_index(2, x, y, a, b)] = 0.5;
                }
            }
        }
        out.push(p);
    }
    out
}

/// Genuine-nonlocality certificate for the GHZ strategy at bias q.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmnWitness {
    pub q: f64,
    /// For each partition, the bias setting t minimizing its NSBL bound, with that bound.
    pub choices: Vec<(Partition, u8, f64)>,
    pub quantum: f64,
    pub best_bipartition_bound: f64,
    pub certified: bool,
}

/// Value of B(t,q) for the R_XY GHZ strategy, computed from its behavior.
pub fn quantum_value(t: u8, q: f64) -> Result<f64, BellError> {
    let f = BellFunctional::new(t, q)?;
    let p = earac_behavior(&EaracStrategy::family(Reflection::XY, PhaseOffset::Zero))?;
    Ok(bell_value(&f, &p))
}

pub fn gmn_witness(q: f64) -> Result<GmnWitness, BellError> {
    let fs = [BellFunctional::new(0, q)?, BellFunctional::new(1, q)?];
    let mut choices = Vec::new();
    for part in Partition::ALL {
        let bounds = [nsbl_max(&fs[0], part)?.value, nsbl_max(&fs[1], part)?.value];
        let t = if bounds[1] < bounds[0] { 1 } else { 0 };
        choices.push((part, t as u8, bounds[t]));
    }
    let quantum = (0..2).map(|t| quantum_value(t, q)).collect::<Result<Vec<_>, _>>()?.into_iter().fold(f64::INFINITY, f64::min);
    let best_bipartition_bound = choices.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
    let certified = quantum > best_bipartition_bound + TOL_STRUCTURAL;
    Ok(GmnWitness { q, choices, quantum, best_bipartition_bound, certified })
}

/// Smallest q where certification begins, by bisection to within `tol`.
pub fn gmn_threshold(tol: f64) -> Result<f64, BellError> {
    let (mut lo, mut hi) = (0.0, 1.0 / 6.0);
    if gmn_witness(lo)?.certified || !gmn_witness(hi)?.certified {
        return Err(BellError::QOutOfRange(lo));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if gmn_witness(mid)?.certified {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// (2 − √3)/3.
pub fn gmn_threshold_exact() -> f64 {
    (2.0 - 3f64.sqrt()) / 3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellScanRow {
    pub t: u8,
    pub q: f64,
    pub local: f64,
    pub nsbl_ab: f64,
    pub nsbl_ac: f64,
    pub nsbl_bc: f64,
    pub quantum: f64,
}

/// Bounds on an evenly spaced q grid (steps ≥ 2 points including both ends).
pub fn bell_scan(t: u8, qmin: f64, qmax: f64, steps: usize) -> Result<Vec<BellScanRow>, BellError> {
    Bias::new(t, qmin)?;
    Bias::new(t, qmax)?;
    let qs: Vec<f64> = if steps <= 1 {
        vec![qmin]
    } else {
        (0..steps).map(|k| qmin + (qmax - qmin) * k as f64 / (steps - 1) as f64).collect()
    };
    qs.par_iter()
        .map(|&q| {
            let f = BellFunctional::new(t, q)?;
            Ok(BellScanRow {
                t,
                q,
                local: local_max(&f).0,
                nsbl_ab: nsbl_max(&f, Partition::AB)?.value,
                nsbl_ac: nsbl_max(&f, Partition::AC)?.value,
                nsbl_bc: nsbl_max(&f, Partition::BC)?.value,
                quantum: quantum_value(t, q)?,
            })
        })
        .collect()
}

/// Closed forms of the bounds: local and AB equal 2/3 + q/2; the two pairs that include Charlie
/// give 5/6 + q and 5/6 − q/2, in an order fixed by t.
pub fn bound_formulas(t: u8, q: f64) -> (f64, f64, f64, f64) {
    let low = 2.0 / 3.0 + q / 2.0;
    let (up, down) = (5.0 / 6.0 + q, 5.0 / 6.0 - q / 2.0);
    if t == 0 {
        (low, low, up, down)
    } else {
        (low, low, down, up)
    }
}

pub fn quantum_reference() -> f64 {
    quantum_optimum()
}
