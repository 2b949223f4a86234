//! Sampling of doubly free boundary coverings by commuting and reflecting column operators.
//!
//! Each column `i` acts as an operator that grows (`b_i = +`) or shrinks (`b_i = −`) the
//! partition by a strip, weighted by `x_i` per box. A `−` operator can move left past a `+`
//! operator at the cost of a scalar factor; at the free boundaries an operator bounces back
//! with its sign flipped and its weight multiplied by `u²` (left) or `v²` (right).
//!
//! The sweep moves every operator once around the word per round, so after `K` rounds all
//! weights carry a factor `(uv)^{2K}` and the operators are replaced by the identity. What is
//! left is a single partition `λ` with `P(λ) ∝ (uv)^{|λ|}`, drawn by
//! [`sample_boundary_seed`]. The recorded moves are then undone in reverse order, each by one
//! of the bijections [`hh`], [`hv`], [`aa`], [`ab`], which maps a sample of the simpler process
//! to a sample of the original one.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::{Partition, Strip};
use crate::railyard::{CoveringState, RailYardGraph, Side, Sign};
use crate::scalar::Scalar;

/// Parameters of one sampler run.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig {
    /// Boundary truncation depth: number of rounds and the largest part of the seed.
    pub k: u32,
    pub seed: u64,
    pub graph: RailYardGraph,
}

impl SamplerConfig {
    pub fn new(graph: RailYardGraph, k: u32, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("K must be at least 1".into()));
        }
        if graph.u().to_f64() * graph.v().to_f64() >= 1.0 {
            return Err(Error::Divergence("u v ≥ 1".into()));
        }
        Ok(SamplerConfig { k, seed, graph })
    }
}

/// `P(G = g) = ξ^g (1 − ξ)`.
pub fn sample_geometric<R: Rng + ?Sized>(xi: f64, rng: &mut R) -> u32 {
    if xi <= 0.0 {
        return 0;
    }
    let d = Geometric::new(1.0 - xi).expect("geometric parameter in [0, 1)");
    d.sample(rng).min(u32::MAX as u64) as u32
}

fn contract(op: &'static str, detail: String) -> Error {
    Error::Contract { op, step: String::new(), detail }
}

fn build(op: &'static str, parts: Vec<u32>) -> Result<Partition> {
    Partition::new(parts.clone()).ok_or_else(|| contract(op, format!("result {parts:?} is not a partition")))
}

/// Algorithm HH with the geometric variable supplied: `κ ≺ λ`, `κ ≺ μ` to `ν ≻ λ, μ`.
pub fn hh_with(lambda: &Partition, mu: &Partition, kappa: &Partition, g: u32) -> Result<Partition> {
    if !crate::interlaces_h(kappa, lambda) || !crate::interlaces_h(kappa, mu) {
        return Err(contract("HH", format!("need κ ≺ λ and κ ≺ μ, got λ={lambda} μ={mu} κ={kappa}")));
    }
    let n = lambda.len().max(mu.len()) + 1;
    let mut nu = Vec::with_capacity(n);
    nu.push(lambda.first().max(mu.first()) + g);
    for i in 2..=n {
        let hi = lambda.part(i).max(mu.part(i));
        let lo = lambda.part(i - 1).min(mu.part(i - 1));
        nu.push(hi + lo - kappa.part(i - 1));
    }
    build("HH", nu)
}

/// Algorithm HH: draws `G ~ Geom(ξ)` and applies [`hh_with`].
pub fn hh<R: Rng + ?Sized>(lambda: &Partition, mu: &Partition, kappa: &Partition, xi: f64, rng: &mut R) -> Result<Partition> {
    if !(0.0..1.0).contains(&xi) {
        return Err(Error::Divergence(format!("HH parameter ξ = {xi} outside [0, 1)")));
    }
    hh_with(lambda, mu, kappa, sample_geometric(xi, rng))
}

/// Algorithm HV with the Bernoulli variable supplied: `κ ≺′ λ`, `κ ≺ μ` to `λ ≺ ν`, `μ ≺′ ν`.
///
/// The bit is carried down the rows: it is added where `λ_i ≤ μ_i < λ_{i−1}` and is
/// replaced by `min(λ_i, μ_i) − κ_i` where `μ_{i+1} < λ_i ≤ μ_i`.
pub fn hv_with(lambda: &Partition, mu: &Partition, kappa: &Partition, b: u32) -> Result<Partition> {
    if !crate::interlaces_v(kappa, lambda) || !crate::interlaces_h(kappa, mu) {
        return Err(contract("HV", format!("need κ ≺′ λ and κ ≺ μ, got λ={lambda} μ={mu} κ={kappa}")));
    }
    if b > 1 {
        return Err(contract("HV", format!("Bernoulli value {b}")));
    }
    let n = lambda.len().max(mu.len()) + 1;
    let mut carry = b;
    let mut nu = Vec::with_capacity(n);
    for i in 1..=n {
        let (li, mi) = (lambda.part(i), mu.part(i));
        let lprev = if i == 1 { u32::MAX } else { lambda.part(i - 1) };
        if li <= mi && mi < lprev {
            nu.push(li.max(mi) + carry);
        } else {
            nu.push(li.max(mi));
        }
        if mu.part(i + 1) < li && li <= mi {
            carry = li.min(mi) - kappa.part(i);
        }
    }
    build("HV", nu)
}

/// Algorithm HV: draws `B ~ Bern(ξ/(1+ξ))` and applies [`hv_with`].
pub fn hv<R: Rng + ?Sized>(lambda: &Partition, mu: &Partition, kappa: &Partition, xi: f64, rng: &mut R) -> Result<Partition> {
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(Error::Domain(format!("HV parameter ξ = {xi}")));
    }
    let b = rng.random_bool(xi / (1.0 + xi)) as u32;
    hv_with(lambda, mu, kappa, b)
}

/// Algorithm AA: `μ ≺ κ ≺ λ` to `μ ≺ ν ≺ λ` with `|ν| + |κ| = |λ| + |μ|`.
pub fn aa(lambda: &Partition, mu: &Partition, kappa: &Partition) -> Result<Partition> {
    if !crate::interlaces_h(mu, kappa) || !crate::interlaces_h(kappa, lambda) {
        return Err(contract("AA", format!("need μ ≺ κ ≺ λ, got λ={lambda} μ={mu} κ={kappa}")));
    }
    let n = lambda.len();
    let mut nu = Vec::with_capacity(n);
    for i in 1..=n {
        let mprev = if i == 1 { u32::MAX } else { mu.part(i - 1) };
        nu.push(lambda.part(i).min(mprev) + lambda.part(i + 1).max(mu.part(i)) - kappa.part(i));
    }
    build("AA", nu)
}

/// Algorithm AB: `μ ≺′ κ ≺ λ` to `μ ≺ ν ≺′ λ` with `|ν| + |κ| = |λ| + |μ|`.
///
/// The excess `κ_j − max(λ_{j+1}, μ_j)` of a row where `λ_{j+1} ≤ μ_j < λ_j` is removed
/// from the nearest row `i ≤ j` with `μ_i < λ_i ≤ μ_{i−1}`, so rows are scanned bottom-up.
pub fn ab(lambda: &Partition, mu: &Partition, kappa: &Partition) -> Result<Partition> {
    if !crate::interlaces_v(mu, kappa) || !crate::interlaces_h(kappa, lambda) {
        return Err(contract("AB", format!("need μ ≺′ κ ≺ λ, got λ={lambda} μ={mu} κ={kappa}")));
    }
    let n = lambda.len().max(mu.len()) + 1;
    let mut delta = 0;
    let mut nu = vec![0u32; n];
    for i in (1..=n).rev() {
        let (li, mi) = (lambda.part(i), mu.part(i));
        let mprev = if i == 1 { u32::MAX } else { mu.part(i - 1) };
        if lambda.part(i + 1) <= mi && mi < li {
            delta = kappa.part(i) - lambda.part(i + 1).max(mi);
        }
        let top = li.min(mprev);
        if mi < li && li <= mprev {
            nu[i - 1] = top - delta;
            delta = 0;
        } else {
            nu[i - 1] = top;
        }
    }
    if delta != 0 {
        return Err(contract("AB", format!("unmatched excess for λ={lambda} μ={mu} κ={kappa}")));
    }
    build("AB", nu)
}

/// Draws `λ` with `m_k(λ) ~ Geom((uv)^k)` independently for `k ≤ K` and no larger parts.
pub fn sample_boundary_seed<R: Rng + ?Sized>(uv: f64, k: u32, rng: &mut R) -> Partition {
    let mult: Vec<u64> = (1..=k).map(|j| sample_geometric(uv.powi(j as i32), rng) as u64).collect();
    Partition::from_multiplicities(&mult)
}

fn conj(p: &Partition) -> Partition {
    p.conjugate()
}

/// `ν` with `low ≺_second ν ≺_first high` from `low ≺_first κ ≺_second high`.
fn reorder(low: &Partition, kappa: &Partition, high: &Partition, first: Strip, second: Strip) -> Result<Partition> {
    match (first, second) {
        (Strip::H, Strip::H) => aa(high, low, kappa),
        (Strip::V, Strip::V) => Ok(conj(&aa(&conj(high), &conj(low), &conj(kappa))?)),
        (Strip::V, Strip::H) => ab(high, low, kappa),
        (Strip::H, Strip::V) => Ok(conj(&ab(&conj(high), &conj(low), &conj(kappa))?)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Op {
    side: Side,
    sign: Sign,
    x: f64,
}

/// One forward rewriting of the operator word. Undoing it resamples one partition.
#[derive(Clone, Debug, PartialEq)]
pub enum MoveKind {
    /// `[+, −]` at `pos` became `[−, +]`.
    SwapPlusMinus { pos: usize, plus: Side, minus: Side, xi: f64 },
    /// Two operators of the same sign exchanged; strips as they stand after the move.
    SwapSame { pos: usize, sign: Sign, left: Strip, right: Strip },
    /// A `−` operator at the left end became `+` with weight `u²x`; `xi = ux`.
    ReflectLeft { side: Side, xi: f64 },
    /// A `+` operator at the right end became `−` with weight `v²x`; `xi = vx`.
    ReflectRight { side: Side, xi: f64 },
}

/// A move tagged with its place in the schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct Move {
    pub kind: MoveKind,
    /// Round, 1-based.
    pub round: u32,
    /// Original column slot of the travelling operator.
    pub op: usize,
    /// Leg of the round trip, 0 to 4.
    pub leg: u8,
    /// Index within the whole schedule.
    pub index: usize,
}

impl Move {
    fn step_id(&self) -> String {
        format!("round {}, operator {}, leg {}, move {}", self.round, self.op, self.leg, self.index)
    }
}

/// The forward move list for a graph. It depends on the graph and `K` only.
#[derive(Clone, Debug)]
pub struct Schedule {
    pub moves: Vec<Move>,
    signs: Vec<Sign>,
    n_plus: usize,
    n_minus: usize,
    columns: usize,
    k: u32,
}

struct Builder {
    word: Vec<Op>,
    u: f64,
    v: f64,
    moves: Vec<Move>,
    round: u32,
    op: usize,
    leg: u8,
}

impl Builder {
    fn push(&mut self, kind: MoveKind) {
        let index = self.moves.len();
        self.moves.push(Move { kind, round: self.round, op: self.op, leg: self.leg, index });
    }

    /// Exchanges `word[p]` and `word[p+1]`.
    fn swap(&mut self, p: usize) -> Result<()> {
        let (a, b) = (self.word[p], self.word[p + 1]);
        let kind = match (a.sign, b.sign) {
            (Sign::Plus, Sign::Minus) => {
                let xi = a.x * b.x;
                if a.side == b.side && xi >= 1.0 {
                    return Err(Error::Divergence(format!(
                        "commuting columns with x·y = {xi} ≥ 1 (round {}, operator {})",
                        self.round, self.op
                    )));
                }
                MoveKind::SwapPlusMinus { pos: p, plus: a.side, minus: b.side, xi }
            }
            (Sign::Minus, Sign::Plus) => unreachable!("schedule only moves − left past +"),
            (s, _) => MoveKind::SwapSame { pos: p, sign: s, left: b.side.strip(), right: a.side.strip() },
        };
        self.word.swap(p, p + 1);
        self.push(kind);
        Ok(())
    }

    fn reflect_left(&mut self) -> Result<()> {
        let o = self.word[0];
        debug_assert_eq!(o.sign, Sign::Minus);
        let xi = self.u * o.x;
        if xi >= 1.0 {
            return Err(Error::Divergence(format!("u·x = {xi} ≥ 1 at the left boundary")));
        }
        self.word[0] = Op { side: o.side, sign: Sign::Plus, x: self.u * self.u * o.x };
        self.push(MoveKind::ReflectLeft { side: o.side, xi });
        Ok(())
    }

    fn reflect_right(&mut self) -> Result<()> {
        let n = self.word.len();
        let o = self.word[n - 1];
        debug_assert_eq!(o.sign, Sign::Plus);
        let xi = self.v * o.x;
        if xi >= 1.0 {
            return Err(Error::Divergence(format!("v·x = {xi} ≥ 1 at the right boundary")));
        }
        self.word[n - 1] = Op { side: o.side, sign: Sign::Minus, x: self.v * self.v * o.x };
        self.push(MoveKind::ReflectRight { side: o.side, xi });
        Ok(())
    }

    fn move_left(&mut self, from: usize, to: usize) -> Result<()> {
        for p in (to..from).rev() {
            self.swap(p)?;
        }
        Ok(())
    }

    fn move_right(&mut self, from: usize, to: usize) -> Result<()> {
        for p in from..to {
            self.swap(p)?;
        }
        Ok(())
    }

    /// Sends the operator at slot `q` around the word and back.
    fn round_trip(&mut self, q: usize) -> Result<()> {
        let last = self.word.len() - 1;
        self.op = q;
        match self.word[q].sign {
            Sign::Minus => {
                self.leg = 0;
                self.move_left(q, 0)?;
                self.leg = 1;
                self.reflect_left()?;
                self.leg = 2;
                self.move_right(0, last)?;
                self.leg = 3;
                self.reflect_right()?;
                self.leg = 4;
                self.move_left(last, q)?;
            }
            Sign::Plus => {
                self.leg = 0;
                self.move_right(q, last)?;
                self.leg = 1;
                self.reflect_right()?;
                self.leg = 2;
                self.move_left(last, 0)?;
                self.leg = 3;
                self.reflect_left()?;
                self.leg = 4;
                self.move_right(0, q)?;
            }
        }
        Ok(())
    }
}

impl Schedule {
    pub fn new(g: &RailYardGraph, k: u32) -> Result<Self> {
        let word: Vec<Op> = (g.l()..=g.r())
            .map(|i| Op { side: g.a(i), sign: g.b(i), x: g.x(i).to_f64() })
            .collect();
        let n_plus = word.iter().filter(|o| o.sign == Sign::Plus).count();
        let signs = word.iter().map(|o| o.sign).collect();
        let mut b = Builder {
            word,
            u: g.u().to_f64(),
            v: g.v().to_f64(),
            moves: Vec::new(),
            round: 0,
            op: 0,
            leg: 0,
        };
        for r in 1..=k {
            b.round = r;
            for q in 0..g.columns() {
                b.round_trip(q)?;
            }
        }
        Ok(Schedule { moves: b.moves, signs, n_plus, n_minus: g.columns() - n_plus, columns: g.columns(), k })
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }
}

/// Partitions at lattice points visited by the sweep.
///
/// Gaps of the operator word sit on a lattice path with `+` steps `(1, 0)` and `−` steps
/// `(0, −1)`. Undoing a reflection at the left end moves the start of the path by `(1, 1)`,
/// so after all `N·K` of them the path runs from `(−N_+, 0)` to `(0, −N_−)`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SweepGrid {
    pub points: BTreeMap<(i64, i64), Partition>,
    /// Current path, one point per gap.
    pub frontier: Vec<(i64, i64)>,
}

impl SweepGrid {
    fn set(&mut self, k: usize, p: (i64, i64), part: &Partition) {
        self.frontier[k] = p;
        self.points.insert(p, part.clone());
    }

    /// The partitions along the terminal path.
    pub fn boundary_path(&self) -> Vec<Partition> {
        self.frontier.iter().map(|p| self.points[p].clone()).collect()
    }
}

fn at_step(mut e: Error, m: &Move) -> Error {
    if let Error::Contract { step, .. } = &mut e {
        *step = m.step_id();
    }
    e
}

fn undo<R: Rng + ?Sized>(m: &Move, gaps: &mut [Partition], rng: &mut R) -> Result<usize> {
    let n = gaps.len() - 1;
    let changed = match m.kind {
        MoveKind::SwapPlusMinus { pos, plus, minus, xi } => {
            let (l, k, r) = (&gaps[pos], &gaps[pos + 1], &gaps[pos + 2]);
            let nu = match (plus, minus) {
                (Side::L, Side::L) => hh(l, r, k, xi, rng)?,
                (Side::R, Side::R) => conj(&hh(&conj(l), &conj(r), &conj(k), xi, rng)?),
                (Side::L, Side::R) => hv(l, r, k, xi, rng)?,
                (Side::R, Side::L) => conj(&hv(&conj(l), &conj(r), &conj(k), xi, rng)?),
            };
            gaps[pos + 1] = nu;
            pos + 1
        }
        MoveKind::SwapSame { pos, sign, left, right } => {
            let nu = match sign {
                Sign::Plus => reorder(&gaps[pos], &gaps[pos + 1], &gaps[pos + 2], left, right)?,
                Sign::Minus => reorder(&gaps[pos + 2], &gaps[pos + 1], &gaps[pos], right, left)?,
            };
            gaps[pos + 1] = nu;
            pos + 1
        }
        MoveKind::ReflectLeft { side, xi } => {
            let (l, k) = (&gaps[0], &gaps[1]);
            gaps[0] = match side {
                Side::L => hh(k, k, l, xi, rng)?,
                Side::R => conj(&hh(&conj(k), &conj(k), &conj(l), xi, rng)?),
            };
            0
        }
        MoveKind::ReflectRight { side, xi } => {
            let (k, r) = (&gaps[n - 1], &gaps[n]);
            gaps[n] = match side {
                Side::L => hh(k, k, r, xi, rng)?,
                Side::R => conj(&hh(&conj(k), &conj(k), &conj(r), xi, rng)?),
            };
            n
        }
    };
    Ok(changed)
}

/// Runs the full sweep for a prebuilt schedule, optionally recording the lattice.
pub fn run_schedule<R: Rng + ?Sized>(
    sched: &Schedule,
    uv: f64,
    rng: &mut R,
    mut grid: Option<&mut SweepGrid>,
) -> Result<CoveringState> {
    let seed = sample_boundary_seed(uv, sched.k, rng);
    let mut gaps = vec![seed; sched.columns + 1];
    let mut signs: Vec<Sign> = Vec::new();
    if let Some(g) = grid.as_deref_mut() {
        // Every round trip restores the word, so the sign pattern is the original one.
        signs = sched.signs.clone();
        let nk = (sched.columns as i64) * sched.k as i64;
        let mut p = (-(sched.n_plus as i64) - nk, -nk);
        g.frontier = vec![p; sched.columns + 1];
        g.points.clear();
        g.set(0, p, &gaps[0]);
        for (k, s) in signs.iter().enumerate() {
            p = step(p, *s);
            g.set(k + 1, p, &gaps[k + 1]);
        }
    }
    for m in sched.moves.iter().rev() {
        let k = undo(m, &mut gaps, rng).map_err(|e| at_step(e, m))?;
        if let Some(g) = grid.as_deref_mut() {
            let p = match m.kind {
                MoveKind::SwapPlusMinus { pos, .. } => {
                    signs.swap(pos, pos + 1);
                    step(g.frontier[pos], Sign::Plus)
                }
                MoveKind::SwapSame { pos, .. } => {
                    signs.swap(pos, pos + 1);
                    g.frontier[pos + 1]
                }
                MoveKind::ReflectLeft { .. } => {
                    signs[0] = Sign::Minus;
                    (g.frontier[1].0, g.frontier[1].1 + 1)
                }
                MoveKind::ReflectRight { .. } => {
                    let n = signs.len();
                    signs[n - 1] = Sign::Plus;
                    step(g.frontier[n - 1], Sign::Plus)
                }
            };
            g.set(k, p, &gaps[k]);
        }
    }
    if let Some(g) = grid.as_deref() {
        let (start, end) = (g.frontier[0], g.frontier[sched.columns]);
        if start != (-(sched.n_plus as i64), 0) || end != (0, -(sched.n_minus as i64)) {
            return Err(Error::Contract {
                op: "sweep",
                step: "end".into(),
                detail: format!("terminal path runs from {start:?} to {end:?}"),
            });
        }
    }
    Ok(CoveringState { charge: 0, seq: gaps })
}

fn step(p: (i64, i64), s: Sign) -> (i64, i64) {
    match s {
        Sign::Plus => (p.0 + 1, p.1),
        Sign::Minus => (p.0, p.1 - 1),
    }
}

/// One sample from a fresh schedule.
pub fn run_sweep<R: Rng + ?Sized>(cfg: &SamplerConfig, rng: &mut R) -> Result<CoveringState> {
    let sched = Schedule::new(&cfg.graph, cfg.k)?;
    run_schedule(&sched, uv(cfg), rng, None)
}

/// One sample together with the lattice of partitions visited on the way.
pub fn run_sweep_with_grid<R: Rng + ?Sized>(cfg: &SamplerConfig, rng: &mut R) -> Result<(CoveringState, SweepGrid)> {
    let sched = Schedule::new(&cfg.graph, cfg.k)?;
    let mut grid = SweepGrid::default();
    let s = run_schedule(&sched, uv(cfg), rng, Some(&mut grid))?;
    Ok((s, grid))
}

fn uv(cfg: &SamplerConfig) -> f64 {
    cfg.graph.u().to_f64() * cfg.graph.v().to_f64()
}

/// Random stream for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `n` independent samples, computed in parallel. The result depends on `cfg.seed` only.
pub fn sample_many(cfg: &SamplerConfig, n: usize) -> Result<Vec<CoveringState>> {
    let sched = Schedule::new(&cfg.graph, cfg.k)?;
    let uv = uv(cfg);
    (0..n)
        .into_par_iter()
        .map(|i| run_schedule(&sched, uv, &mut sample_rng(cfg.seed, i as u64), None))
        .collect()
}
