//! Rail-yard graphs, dimer coverings as partition sequences, heights and charge.

use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::{Partition, Strip};
use crate::scalar::{format_rational, parse_rational, rational_from_f64, Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    L,
    R,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Side {
    /// Strip type of a step in a column of this letter.
    pub fn strip(self) -> Strip {
        match self {
            Side::L => Strip::H,
            Side::R => Strip::V,
        }
    }
    pub fn from_char(c: char) -> Option<Side> {
        match c {
            'L' | 'l' => Some(Side::L),
            'R' | 'r' => Some(Side::R),
            _ => None,
        }
    }
    fn to_char(self) -> char {
        match self {
            Side::L => 'L',
            Side::R => 'R',
        }
    }
}

impl Sign {
    pub fn from_char(c: char) -> Option<Sign> {
        match c {
            '+' => Some(Sign::Plus),
            '-' | '−' => Some(Sign::Minus),
            _ => None,
        }
    }
    fn to_char(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// How `seq[i]` and `seq[i+1]` are related in a column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StepRelation {
    pub strip: Strip,
    /// `true` if the right partition contains the left one.
    pub grows: bool,
}

impl StepRelation {
    pub fn holds(&self, left: &Partition, right: &Partition) -> bool {
        if self.grows {
            self.strip.holds(left, right)
        } else {
            self.strip.holds(right, left)
        }
    }

    pub fn describe(&self) -> &'static str {
        match (self.strip, self.grows) {
            (Strip::H, true) => "horizontal-grow",
            (Strip::V, true) => "vertical-grow",
            (Strip::H, false) => "horizontal-shrink",
            (Strip::V, false) => "vertical-shrink",
        }
    }
}

pub fn step_relation(a: Side, b: Sign) -> StepRelation {
    StepRelation {
        strip: a.strip(),
        grows: b == Sign::Plus,
    }
}

/// A rail-yard graph on columns `l..=r` with diagonal weights and boundary fugacities.
#[derive(Clone, Debug, PartialEq)]
pub struct RailYardGraph {
    l: i64,
    r: i64,
    a: Vec<Side>,
    b: Vec<Sign>,
    x: Vec<Rational>,
    u: Rational,
    v: Rational,
}

impl RailYardGraph {
    pub fn new(
        l: i64,
        a: Vec<Side>,
        b: Vec<Sign>,
        x: Vec<Rational>,
        u: Rational,
        v: Rational,
    ) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::Structural("a graph needs at least one column".into()));
        }
        if a.len() != b.len() || a.len() != x.len() {
            return Err(Error::Structural(format!(
                "column data lengths differ: a={}, b={}, x={}",
                a.len(),
                b.len(),
                x.len()
            )));
        }
        if let Some(k) = x.iter().position(|xi| !xi.is_positive()) {
            return Err(Error::Structural(format!("x[{}] must be positive", l + k as i64)));
        }
        for (name, f) in [("u", &u), ("v", &v)] {
            if f.is_negative() || *f >= Rational::one() {
                return Err(Error::Structural(format!("{name} must lie in [0,1)")));
            }
        }
        let r = l + a.len() as i64 - 1;
        Ok(RailYardGraph { l, r, a, b, x, u, v })
    }

    /// Parses the letter strings, e.g. `a = "LRRL"`, `b = "++--"`.
    pub fn from_letters(
        l: i64,
        a: &str,
        b: &str,
        x: Vec<Rational>,
        u: Rational,
        v: Rational,
    ) -> Result<Self> {
        let a = a
            .chars()
            .map(|c| Side::from_char(c).ok_or_else(|| Error::Structural(format!("bad LR letter {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let b = b
            .chars()
            .map(|c| Sign::from_char(c).ok_or_else(|| Error::Structural(format!("bad sign {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(l, a, b, x, u, v)
    }

    pub fn l(&self) -> i64 {
        self.l
    }
    pub fn r(&self) -> i64 {
        self.r
    }
    /// Number of columns `r − l + 1`.
    pub fn columns(&self) -> usize {
        self.a.len()
    }
    pub fn u(&self) -> &Rational {
        &self.u
    }
    pub fn v(&self) -> &Rational {
        &self.v
    }
    pub fn sides(&self) -> &[Side] {
        &self.a
    }
    pub fn signs(&self) -> &[Sign] {
        &self.b
    }
    pub fn weights(&self) -> &[Rational] {
        &self.x
    }

    fn idx(&self, i: i64) -> usize {
        assert!(self.l <= i && i <= self.r, "column {i} outside [{}..{}]", self.l, self.r);
        (i - self.l) as usize
    }
    pub fn a(&self, i: i64) -> Side {
        self.a[self.idx(i)]
    }
    pub fn b(&self, i: i64) -> Sign {
        self.b[self.idx(i)]
    }
    pub fn x(&self, i: i64) -> &Rational {
        &self.x[self.idx(i)]
    }

    pub fn with_boundary(&self, u: Rational, v: Rational) -> Result<Self> {
        Self::new(self.l, self.a.clone(), self.b.clone(), self.x.clone(), u, v)
    }

    pub fn letters(&self) -> (String, String) {
        (
            self.a.iter().map(|s| s.to_char()).collect(),
            self.b.iter().map(|s| s.to_char()).collect(),
        )
    }

    /// Left-right mirror image with signs flipped and `u`, `v` exchanged.
    ///
    /// Reversing a partition sequence maps coverings of one graph to the other
    /// with the same weight.
    pub fn mirrored(&self) -> Self {
        let flip = |s: &Sign| match s {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        };
        RailYardGraph {
            l: self.l,
            r: self.r,
            a: self.a.iter().rev().copied().collect(),
            b: self.b.iter().rev().map(flip).collect(),
            x: self.x.iter().rev().cloned().collect(),
            u: self.v.clone(),
            v: self.u.clone(),
        }
    }
}

/// Serialized form of a graph. Numbers may be given as numbers or `"p/q"` strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphConfig {
    #[serde(default = "one")]
    pub l: i64,
    #[serde(default)]
    pub r: Option<i64>,
    pub a: String,
    pub b: String,
    pub x: Vec<Number>,
    #[serde(default)]
    pub u: Option<Number>,
    #[serde(default)]
    pub v: Option<Number>,
}

fn one() -> i64 {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Number {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            Number::Int(i) => Ok(Rational::from_integer((*i).into())),
            Number::Float(f) => {
                // Go through the shortest decimal form so 0.1 means 1/10.
                parse_rational(&format!("{f}"))
                    .or_else(|| rational_from_f64(*f))
                    .ok_or_else(|| Error::Structural(format!("not a finite number: {f}")))
            }
            Number::Text(s) => {
                parse_rational(s).ok_or_else(|| Error::Structural(format!("not a rational: {s:?}")))
            }
        }
    }
}

impl GraphConfig {
    pub fn build(&self) -> Result<RailYardGraph> {
        let x = self.x.iter().map(Number::to_rational).collect::<Result<Vec<_>>>()?;
        let u = self.u.as_ref().map_or(Ok(Rational::zero()), Number::to_rational)?;
        let v = self.v.as_ref().map_or(Ok(Rational::zero()), Number::to_rational)?;
        let g = RailYardGraph::from_letters(self.l, &self.a, &self.b, x, u, v)?;
        if let Some(r) = self.r {
            if r != g.r() {
                return Err(Error::Structural(format!(
                    "r = {r} but the letter strings describe columns {}..{}",
                    g.l(),
                    g.r()
                )));
            }
        }
        Ok(g)
    }

    pub fn from_graph(g: &RailYardGraph) -> Self {
        let (a, b) = g.letters();
        GraphConfig {
            l: g.l(),
            r: Some(g.r()),
            a,
            b,
            x: g.weights().iter().map(|x| Number::Text(format_rational(x))).collect(),
            u: Some(Number::Text(format_rational(g.u()))),
            v: Some(Number::Text(format_rational(g.v()))),
        }
    }
}

/// A dimer covering encoded by the partitions on the odd columns `2l−1, …, 2r+1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoveringState {
    pub charge: i64,
    pub seq: Vec<Partition>,
}

impl CoveringState {
    pub fn empty(g: &RailYardGraph) -> Self {
        CoveringState {
            charge: 0,
            seq: vec![Partition::empty(); g.columns() + 1],
        }
    }

    /// Partition on odd column `2m − 1`, for `m ∈ [l..r+1]`.
    pub fn at<'a>(&'a self, g: &RailYardGraph, m: i64) -> &'a Partition {
        &self.seq[(m - g.l()) as usize]
    }

    /// Shifts the covering vertically by `t` lattice units.
    pub fn translated(&self, t: i64) -> Self {
        CoveringState {
            charge: self.charge + t,
            seq: self.seq.clone(),
        }
    }
}

fn check_len(g: &RailYardGraph, s: &CoveringState) -> Result<()> {
    if s.seq.len() != g.columns() + 1 {
        return Err(Error::Structural(format!(
            "state has {} partitions, graph needs {}",
            s.seq.len(),
            g.columns() + 1
        )));
    }
    Ok(())
}

pub fn validate(g: &RailYardGraph, s: &CoveringState) -> Result<bool> {
    check_len(g, s)?;
    Ok((0..g.columns()).all(|k| {
        step_relation(g.a[k], g.b[k]).holds(&s.seq[k], &s.seq[k + 1])
    }))
}

/// Number of present diagonal edges at abscissa `2i`.
pub fn diagonal_count(g: &RailYardGraph, s: &CoveringState, i: i64) -> u64 {
    let k = g.idx(i);
    let (left, right) = (s.seq[k].size(), s.seq[k + 1].size());
    match g.b[k] {
        Sign::Plus => right.saturating_sub(left),
        Sign::Minus => left.saturating_sub(right),
    }
}

/// `u^{|λ^(l)|} v^{|λ^(r+1)|} ∏ x_i^{d_i}` in the scalar type `T`.
pub fn weight<T: Scalar>(g: &RailYardGraph, s: &CoveringState) -> T {
    let n = g.columns();
    let mut w = T::from_rational(&g.u).powu(s.seq[0].size());
    w = w * T::from_rational(&g.v).powu(s.seq[n].size());
    for i in g.l..=g.r {
        w = w * T::from_rational(g.x(i)).powu(diagonal_count(g, s, i));
    }
    w
}

/// Doubled particle positions of `λ` with charge `c`, restricted to `[lo, hi]`.
fn particles_in(lambda: &Partition, c: i64, lo: i64, hi: i64) -> Vec<i64> {
    let mut out = Vec::new();
    let mut i = 1usize;
    loop {
        let d = 2 * (lambda.part(i) as i64 - i as i64 + c) + 1;
        if d < lo {
            break;
        }
        if d <= hi {
            out.push(d);
        }
        i += 1;
    }
    out.reverse();
    out
}

/// Kinds of present edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    Horizontal,
    Diagonal,
}

/// A present edge. Ordinates are doubled so that vertices sit at odd integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub kind: EdgeKind,
    /// Abscissa of the even endpoint.
    pub even_x: i64,
    pub even_y2: i64,
    /// Abscissa of the odd endpoint.
    pub odd_x: i64,
    pub odd_y2: i64,
}

impl Edge {
    /// Doubled ordinate where the edge crosses the vertical half-line next to its even endpoint.
    pub fn crossing_y2(&self) -> i64 {
        (self.even_y2 + self.odd_y2) / 2
    }
}

/// Doubled-ordinate window that contains every non-frozen vertex of `s`.
pub fn active_window(s: &CoveringState) -> (i64, i64) {
    let top = s.seq.iter().map(|p| p.first() as i64).max().unwrap_or(0);
    let len = s.seq.iter().map(|p| p.len() as i64).max().unwrap_or(0);
    (2 * (s.charge - len - 2) - 1, 2 * (s.charge + top + 2) + 1)
}

/// Present edges at even abscissa `2m` with doubled ordinates in `[lo, hi]`.
///
/// Below the window every odd vertex is a particle and above it every odd
/// vertex is a hole, so the window must contain [`active_window`].
pub fn column_edges(g: &RailYardGraph, s: &CoveringState, m: i64, lo: i64, hi: i64) -> Result<Vec<Edge>> {
    let k = g.idx(m);
    let (a, b) = (g.a[k], g.b[k]);
    let left = &s.seq[k];
    let right = &s.seq[k + 1];
    let (lo, hi) = (lo | 1, if hi % 2 == 0 { hi - 1 } else { hi });
    let shift = if b == Sign::Plus { 2 } else { -2 };
    let ex = 2 * m;
    // Extend by one step so diagonals leaving the window are matched.
    let (elo, ehi) = (lo - 2, hi + 2);
    let lp: Vec<i64> = particles_in(left, s.charge, elo - 2, ehi + 2);
    let rp: Vec<i64> = particles_in(right, s.charge, elo - 2, ehi + 2);
    let is_lp = |y: i64| lp.binary_search(&y).is_ok() || y < elo - 2;
    let is_rp = |y: i64| rp.binary_search(&y).is_ok() || y < elo - 2;
    let mut edges = Vec::new();
    let mut y = elo;
    let fail = |y: i64| {
        Error::Structural(format!(
            "no dimer matching at column {m} near y = {}/2: the state is not a covering",
            y
        ))
    };
    match a {
        Side::L => {
            // Even vertices not taken by a right particle are matched to the left.
            let mut taken_left: Vec<i64> = Vec::new();
            while y <= ehi {
                if is_rp(y) {
                    edges.push(Edge { kind: EdgeKind::Horizontal, even_x: ex, even_y2: y, odd_x: ex + 1, odd_y2: y });
                } else {
                    let free = |t: i64, taken: &Vec<i64>| t >= elo && !is_lp(t) && !taken.contains(&t);
                    let t = y + shift;
                    let diag_first = shift < 0 && free(t, &taken_left);
                    if !diag_first && free(y, &taken_left) {
                        edges.push(Edge { kind: EdgeKind::Horizontal, even_x: ex, even_y2: y, odd_x: ex - 1, odd_y2: y });
                        taken_left.push(y);
                    } else if free(t, &taken_left) {
                        edges.push(Edge { kind: EdgeKind::Diagonal, even_x: ex, even_y2: y, odd_x: ex - 1, odd_y2: t });
                        taken_left.push(t);
                    } else {
                        return Err(fail(y));
                    }
                }
                y += 2;
            }
        }
        Side::R => {
            let mut taken_right: Vec<i64> = Vec::new();
            while y <= ehi {
                if !is_lp(y) {
                    edges.push(Edge { kind: EdgeKind::Horizontal, even_x: ex, even_y2: y, odd_x: ex - 1, odd_y2: y });
                } else {
                    let free = |t: i64, taken: &Vec<i64>| t >= elo && is_rp(t) && !taken.contains(&t);
                    let t = y + shift;
                    let diag_first = shift < 0 && free(t, &taken_right);
                    if !diag_first && free(y, &taken_right) {
                        edges.push(Edge { kind: EdgeKind::Horizontal, even_x: ex, even_y2: y, odd_x: ex + 1, odd_y2: y });
                        taken_right.push(y);
                    } else if free(t, &taken_right) {
                        edges.push(Edge { kind: EdgeKind::Diagonal, even_x: ex, even_y2: y, odd_x: ex + 1, odd_y2: t });
                        taken_right.push(t);
                    } else {
                        return Err(fail(y));
                    }
                }
                y += 2;
            }
        }
    }
    // Every particle on the right column inside the window must be covered from this side.
    if a == Side::L {
        // Holes of the left column must each receive exactly one edge.
        for hy in (lo..=hi).step_by(2) {
            if !is_lp(hy) {
                let n = edges.iter().filter(|e| e.odd_x == ex - 1 && e.odd_y2 == hy).count();
                if n != 1 {
                    return Err(fail(hy));
                }
            }
        }
    } else {
        for py in (lo..=hi).step_by(2) {
            if is_rp(py) {
                let n = edges.iter().filter(|e| e.odd_x == ex + 1 && e.odd_y2 == py).count();
                if n != 1 {
                    return Err(fail(py));
                }
            }
        }
    }
    edges.retain(|e| e.even_y2 >= lo && e.even_y2 <= hi);
    Ok(edges)
}

/// Height of the face containing `(x, y)`, where `x = 2m ∓ 1/2`.
///
/// `x` is passed doubled: `x2 = 4m − 1` or `x2 = 4m + 1`. Edges crossing the
/// line exactly at `y` count as below it, so the height is right-continuous.
pub fn height(g: &RailYardGraph, s: &CoveringState, x2: i64, y: f64) -> Result<i64> {
    check_len(g, s)?;
    let (m, left_line) = match x2.rem_euclid(4) {
        3 => ((x2 + 1) / 4, true),
        1 => ((x2 - 1) / 4, false),
        _ => return Err(Error::Domain(format!("abscissa {x2}/2 is not of the form 2m ∓ 1/2"))),
    };
    if m < g.l || m > g.r {
        return Err(Error::Domain(format!("column {m} outside [{}..{}]", g.l, g.r)));
    }
    if !y.is_finite() {
        return Err(Error::Domain("ordinate must be finite".into()));
    }
    let (wlo, whi) = active_window(s);
    let y2 = (2.0 * y).floor() as i64;
    let hi = whi.max(y2 + 3);
    let lo = wlo;
    if y2 < lo {
        return Ok(0);
    }
    let edges = column_edges(g, s, m, lo, hi)?;
    let count = if left_line {
        // Line between odd 2m−1 and even 2m: all crossing edges are present ones at 2m−1.
        edges
            .iter()
            .filter(|e| e.odd_x == 2 * m - 1 && e.crossing_y2() <= y2)
            .count() as i64
    } else {
        let absent_h = (lo..=hi)
            .step_by(2)
            .filter(|&yy| yy <= y2)
            .filter(|&yy| {
                !edges.iter().any(|e| {
                    e.kind == EdgeKind::Horizontal && e.odd_x == 2 * m + 1 && e.even_y2 == yy
                })
            })
            .count() as i64;
        let diag = edges
            .iter()
            .filter(|e| e.kind == EdgeKind::Diagonal && e.odd_x == 2 * m + 1 && e.crossing_y2() <= y2)
            .count() as i64;
        absent_h - diag
    };
    Ok(2 * count)
}

/// `2·#{holes of λ (charge c) below y}`: the face height along an odd column,
/// read off the Maya diagram alone.
pub fn column_height(lambda: &Partition, c: i64, y: f64) -> i64 {
    // Holes below y = positions below y minus particles below y, counted from
    // the bottom of the staircase where every position is a particle.
    let bottom = 2 * (c - lambda.len() as i64) - 1;
    let y2 = (2.0 * y).floor() as i64;
    if y2 < bottom {
        return 0;
    }
    let positions = ((y2 - bottom).div_euclid(2) + 1).max(0);
    let particles = particles_in(lambda, c, bottom, y2).len() as i64;
    2 * (positions - particles)
}

/// Both sides of the Laplace-transform identity for the height along `x = 2m − 1/2`.
///
/// The left side integrates the column profile exactly: between consecutive
/// integer ordinates the profile is linear, rising by 2 across each hole.
/// The right side is the closed form in the parts of `λ = seq[m]`.
pub fn laplace_height_check(g: &RailYardGraph, s: &CoveringState, m: i64, k: u32, t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!("t = {t} must lie in (0,1)")));
    }
    if k == 0 {
        return Err(Error::Domain("k must be positive".into()));
    }
    check_len(g, s)?;
    if m < g.l || m > g.r {
        return Err(Error::Domain(format!("column {m} outside [{}..{}]", g.l, g.r)));
    }
    let lambda = s.at(g, m);
    let c = s.charge;
    let a = -(k as f64) * t.ln();
    let w = |y: f64| (-(a) * (y - c as f64)).exp();

    // Left side: cellwise integral of the linear interpolant, then the all-hole tail.
    let lo = c - lambda.len() as i64 - 1;
    let hi = c + lambda.first() as i64 + 1;
    let mut lhs = 0.0;
    for n in lo..hi {
        let (y0, y1) = (n as f64, n as f64 + 1.0);
        let h0 = column_height(lambda, c, y0) as f64;
        let h1 = column_height(lambda, c, y1) as f64;
        // ∫_{y0}^{y1} (h0 + (h1−h0)(y−y0)) e^{−a(y−c)} dy
        let (e0, e1) = (w(y0), w(y1));
        let slope = h1 - h0;
        lhs += h0 * (e0 - e1) / a + slope * ((e0 - e1) / (a * a) - e1 / a);
    }
    let htop = column_height(lambda, c, hi as f64) as f64;
    let etop = w(hi as f64);
    lhs += htop * etop / a + 2.0 * etop / (a * a);

    let kf = k as f64;
    let ell = lambda.len();
    let mut sum = 0.0;
    for i in 1..=ell {
        sum += t.powf(kf * (lambda.part(i) as f64 - i as f64 + 1.0));
    }
    let rhs = 2.0 / (kf * t.ln()).powi(2) * (t.powf(-kf * ell as f64) + (1.0 - t.powf(-kf)) * sum);
    Ok((lhs, rhs))
}

/// Particles above the axis minus holes below it, on one Maya diagram.
pub fn maya_charge(lambda: &Partition, c: i64) -> i64 {
    let lo = 2 * (c - lambda.len() as i64) - 1;
    let hi = 2 * (c + lambda.first() as i64) + 1;
    let parts = particles_in(lambda, c, lo.min(-1), hi.max(1));
    let above = parts.iter().filter(|&&d| d > 0).count() as i64;
    let below_positions = ((-1 - lo.min(-1)) / 2 + 1).max(0);
    let below_particles = parts.iter().filter(|&&d| d < 0).count() as i64;
    above - (below_positions - below_particles)
}

/// The charge shared by all columns of a covering.
pub fn charge_of_covering(g: &RailYardGraph, s: &CoveringState) -> Result<i64> {
    check_len(g, s)?;
    let c0 = maya_charge(&s.seq[0], s.charge);
    for (k, p) in s.seq.iter().enumerate() {
        let c = maya_charge(p, s.charge);
        if c != c0 {
            return Err(Error::Structural(format!(
                "charge {c} on column {} differs from {c0} on column {}",
                g.l + k as i64,
                g.l
            )));
        }
    }
    Ok(c0)
}

/// Draws the covering inside the doubled-ordinate window `[y2_lo, y2_hi]`.
pub fn render_svg(g: &RailYardGraph, s: &CoveringState, y2_lo: i64, y2_hi: i64) -> Result<String> {
    check_len(g, s)?;
    let (wlo, whi) = active_window(s);
    let (lo, hi) = (y2_lo.min(wlo), y2_hi.max(whi));
    let scale = 24.0;
    let xmin = 2 * g.l - 1;
    let xmax = 2 * g.r + 1;
    let width = (xmax - xmin) as f64 * scale + 2.0 * scale;
    let height = (y2_hi - y2_lo) as f64 / 2.0 * scale + 2.0 * scale;
    let px = |x: i64| (x - xmin) as f64 * scale + scale;
    let py = |y2: i64| (y2_hi - y2) as f64 / 2.0 * scale + scale;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">"
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let inside = |y: i64| y >= y2_lo && y <= y2_hi;
    for m in g.l..=g.r {
        for e in column_edges(g, s, m, lo, hi)? {
            if !(inside(e.even_y2) && inside(e.odd_y2)) {
                continue;
            }
            let (stroke, w) = match e.kind {
                EdgeKind::Horizontal => ("black", 3.0),
                EdgeKind::Diagonal => ("#c0392b", 3.0),
            };
            let _ = writeln!(
                out,
                "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"{stroke}\" stroke-width=\"{w}\"/>",
                px(e.even_x),
                py(e.even_y2),
                px(e.odd_x),
                py(e.odd_y2)
            );
        }
    }
    let first = y2_lo | 1;
    for x in xmin..=xmax {
        let fill = if x % 2 == 0 { "#2e6fd8" } else { "#d8342e" };
        let mut y = first;
        while y <= y2_hi {
            let _ = writeln!(
                out,
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{fill}\"/>",
                px(x),
                py(y)
            );
            y += 2;
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::part;
    use crate::scalar::rat;

    fn hump(x: Rational) -> (RailYardGraph, CoveringState) {
        let g = RailYardGraph::from_letters(1, "LRRL", "++--", vec![x; 4], rat(0, 1), rat(0, 1)).unwrap();
        let s = CoveringState {
            charge: 0,
            seq: vec![part![], part![2], part![3, 1, 1], part![2], part![]],
        };
        (g, s)
    }

    #[test]
    fn step_relations() {
        assert_eq!(step_relation(Side::L, Sign::Plus).describe(), "horizontal-grow");
        assert_eq!(step_relation(Side::R, Sign::Minus).describe(), "vertical-shrink");
        assert_eq!(step_relation(Side::L, Sign::Minus).describe(), "horizontal-shrink");
    }

    #[test]
    fn hump_validates() {
        let (g, s) = hump(rat(1, 2));
        assert!(validate(&g, &s).unwrap());
        assert!(validate(&g, &CoveringState::empty(&g)).unwrap());
        let g1 = RailYardGraph::from_letters(1, "L", "+", vec![rat(1, 2)], rat(0, 1), rat(0, 1)).unwrap();
        let bad = CoveringState { charge: 0, seq: vec![part![1], part![]] };
        assert!(!validate(&g1, &bad).unwrap());
        let short = CoveringState { charge: 0, seq: vec![part![]] };
        assert!(validate(&g1, &short).is_err());
    }

    #[test]
    fn hump_diagonals_match_edge_count() {
        let (g, s) = hump(rat(1, 2));
        let (lo, hi) = active_window(&s);
        for i in 1..=4 {
            let n = column_edges(&g, &s, i, lo, hi)
                .unwrap()
                .iter()
                .filter(|e| e.kind == EdgeKind::Diagonal)
                .count() as u64;
            assert_eq!(n, diagonal_count(&g, &s, i), "column {i}");
        }
        assert_eq!(diagonal_count(&g, &s, 1), 2);
        assert_eq!(diagonal_count(&g, &s, 3), 3);
    }

    #[test]
    fn hump_weight() {
        let (g, s) = hump(rat(1, 2));
        // Size differences 2, 3, 3, 2.
        assert_eq!(weight::<Rational>(&g, &s), rat(1, 1 << 10));
        assert_eq!(weight::<Rational>(&g, &CoveringState::empty(&g)), rat(1, 1));
    }

    #[test]
    fn single_column_weight() {
        let g = RailYardGraph::from_letters(1, "L", "+", vec![rat(1, 3)], rat(1, 2), rat(1, 5)).unwrap();
        let s = CoveringState { charge: 0, seq: vec![part![], part![2]] };
        assert_eq!(weight::<Rational>(&g, &s), rat(1, 25) * rat(1, 9));
    }

    #[test]
    fn empty_height_is_zero() {
        let (g, _) = hump(rat(1, 2));
        let s = CoveringState::empty(&g);
        for m in 1..=4 {
            for y in [-3.3, -0.2, 0.7, 5.1] {
                assert_eq!(height(&g, &s, 4 * m - 1, y).unwrap(), column_height(&part![], 0, y));
                assert_eq!(column_height(&part![], 0, y), if y > 0.5 { 2 * (y - 0.5).floor() as i64 + 2 } else { 0 });
            }
        }
    }

    #[test]
    fn hump_height_counts_crossings() {
        let (g, s) = hump(rat(1, 2));
        // Column 1 carries the empty partition: holes at 1/2, 3/2, ...
        assert_eq!(height(&g, &s, 3, 4.2).unwrap(), 8);
        // Column 2 carries (2): holes at -1/2, 1/2, 5/2, 7/2, ...
        assert_eq!(column_height(&part![2], 0, 4.2), 8);
        assert!(height(&g, &s, 4, 0.0).is_err());
        assert!(height(&g, &s, 4 * 9 - 1, 0.0).is_err());
    }

    #[test]
    fn laplace_examples() {
        let g = RailYardGraph::from_letters(1, "L", "+", vec![rat(1, 2)], rat(0, 1), rat(0, 1)).unwrap();
        let s = CoveringState { charge: 0, seq: vec![part![1], part![1]] };
        let (lhs, rhs) = laplace_height_check(&g, &s, 1, 1, 0.5).unwrap();
        let want = 2.0 / 2f64.ln().powi(2) * 1.5;
        assert!((rhs - want).abs() < 1e-12);
        assert!((lhs - rhs).abs() < 1e-12 * rhs);
        let e = CoveringState::empty(&g);
        let (lhs, rhs) = laplace_height_check(&g, &e, 1, 3, 0.3).unwrap();
        assert!((rhs - 2.0 / (3.0 * 0.3f64.ln()).powi(2)).abs() < 1e-12);
        assert!((lhs - rhs).abs() < 1e-12 * rhs);
        assert!(laplace_height_check(&g, &e, 1, 1, 1.0).is_err());
    }

    #[test]
    fn charge_of_translates() {
        let (g, s) = hump(rat(1, 2));
        assert_eq!(charge_of_covering(&g, &s).unwrap(), 0);
        assert_eq!(charge_of_covering(&g, &s.translated(3)).unwrap(), 3);
        assert_eq!(charge_of_covering(&g, &s.translated(-2)).unwrap(), -2);
    }

    #[test]
    fn svg_is_deterministic() {
        let (g, s) = hump(rat(1, 2));
        let a = render_svg(&g, &s, -9, 9).unwrap();
        let b = render_svg(&g, &s, -9, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.matches("#c0392b").count(), 10);
        let e = render_svg(&g, &CoveringState::empty(&g), -9, 9).unwrap();
        assert!(!e.contains("#c0392b"));
    }
}
