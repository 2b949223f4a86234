//! Scaling-limit numerics for piecewise periodic rail-yard graphs.
//!
//! The limit shape is governed by the real-rational function
//! `R_χ(w) = G_χ(w) ∏_{k≤K} F_k(w)`. A point (χ, κ) is liquid when
//! `R_χ(w) = e^{-nκ}` has a non-real root `w₊` in the upper half plane, and the
//! slope of the limiting height in κ is then `2 − 2 arg(w₊)/π`.
//!
//! Everything here runs in `f64`: the boundary factors at depth `k` carry
//! `(uv)^{±2k}`, which leaves the `f32` range long before useful depths.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use roots::{find_root_brent, Convergency};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::railyard::{Number, RailYardGraph, Side, Sign};
use crate::scalar::rational_from_f64;

/// Parameters of a piecewise periodic graph in the scaling limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticParams {
    /// Period of the letter sequences.
    pub n: usize,
    /// Breakpoints `V_0 < … < V_m` of the rescaled horizontal axis.
    pub breaks: Vec<f64>,
    /// Positive weights `τ_1..τ_n`, one per residue.
    pub tau: Vec<f64>,
    /// Letter `a_j` per residue.
    pub a: Vec<Side>,
    /// Sign `b_{p,j}` per segment `p` and residue `j`.
    pub b: Vec<Vec<Sign>>,
    pub u: f64,
    pub v: f64,
    /// Stored for moment formulas. The density does not depend on it.
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Truncation depth of the product over `k ≥ 1`.
    pub k: usize,
}

fn default_beta() -> f64 {
    1.0
}

/// Which half of the axis a factor family looks at (`>χ` or `<χ`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tail {
    Above,
    Below,
}

/// Factor type: 1 for residues with letter L, 0 for R.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FactorType {
    Zero,
    One,
}

impl AsymptoticParams {
    /// The single-segment example with period 4 used throughout the tests.
    pub fn period_four(k: usize) -> Self {
        AsymptoticParams {
            n: 4,
            breaks: vec![0.0, 1.0],
            tau: vec![1.0, 0.3, 0.3, 1.0],
            a: vec![Side::L, Side::L, Side::R, Side::R],
            b: vec![vec![Sign::Minus, Sign::Plus, Sign::Plus, Sign::Minus]],
            u: 0.1,
            v: 0.1,
            beta: 1.0,
            k,
        }
    }

    pub fn m(&self) -> usize {
        self.breaks.len().saturating_sub(1)
    }

    /// The finite graph at mesh `ε = 1/per_unit`: columns `i` with `εi ∈ (V_0, V_m]`,
    /// letters from the residue of `i` and its segment, and weights
    /// `x_i = e^{∓ε(i − i*)} τ_{i*}^{±1}` for `b_i = ±`.
    pub fn discretize(&self, per_unit: usize) -> Result<RailYardGraph> {
        self.validate()?;
        if per_unit == 0 {
            return Err(Error::Domain("mesh must have at least one column per unit".into()));
        }
        let eps = 1.0 / per_unit as f64;
        let l = (self.breaks[0] * per_unit as f64).round() as i64 + 1;
        let r = (self.breaks[self.m()] * per_unit as f64).round() as i64;
        if r < l {
            return Err(Error::Domain(format!("mesh 1/{per_unit} leaves no columns")));
        }
        let (mut a, mut b, mut x) = (Vec::new(), Vec::new(), Vec::new());
        for i in l..=r {
            let res = (i - 1).rem_euclid(self.n as i64) as usize;
            let chi = eps * i as f64;
            let p = self.breaks[1..].iter().position(|&v| chi <= v + 1e-12).unwrap_or(self.m() - 1);
            let sign = self.b[p][res];
            let shift = eps * (i - res as i64 - 1) as f64;
            let xi = match sign {
                Sign::Plus => (-shift).exp() * self.tau[res],
                Sign::Minus => shift.exp() / self.tau[res],
            };
            a.push(self.a[res]);
            b.push(sign);
            x.push(rational_from_f64(xi).ok_or_else(|| Error::Numerical(format!("weight x_{i} = {xi}")))?);
        }
        let u = Number::Float(self.u).to_rational()?;
        let v = Number::Float(self.v).to_rational()?;
        RailYardGraph::new(l, a, b, x, u, v)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::Structural(s));
        if self.n == 0 {
            return bad("period n must be positive".into());
        }
        if self.breaks.len() < 2 {
            return bad("need at least two breakpoints V_0 < V_1".into());
        }
        if self.breaks.iter().any(|x| !x.is_finite()) || self.breaks.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("breakpoints must be finite and increasing: {:?}", self.breaks));
        }
        if self.tau.len() != self.n || self.a.len() != self.n {
            return bad(format!("tau and a must have length n = {}", self.n));
        }
        if self.b.len() != self.m() || self.b.iter().any(|row| row.len() != self.n) {
            return bad(format!("b must have {} rows of length {}", self.m(), self.n));
        }
        if self.tau.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return bad("tau must be positive".into());
        }
        if !(0.0..1.0).contains(&self.u) || !(0.0..1.0).contains(&self.v) {
            return Err(Error::Domain(format!("u = {}, v = {} must lie in [0,1)", self.u, self.v)));
        }
        if !(self.beta > 0.0) {
            return Err(Error::Domain(format!("beta = {} must be positive", self.beta)));
        }
        if !self.a.contains(&Side::L) {
            return bad("the reference residue needs letter L; a has none".into());
        }
        Ok(())
    }

    fn check_chi(&self, chi: f64) -> Result<()> {
        let (lo, hi) = (self.breaks[0], self.breaks[self.m()]);
        if !(chi > lo && chi < hi) || self.breaks.contains(&chi) {
            return Err(Error::Domain(format!("chi = {chi} must lie in ({lo}, {hi}) away from breakpoints")));
        }
        Ok(())
    }

    /// Argument scalings of the boundary-anchored factors at depth `k`.
    /// Scalings that are 0 or infinite (a zero fugacity) drop out.
    fn level_scalings(&self, k: usize) -> Vec<(Tail, f64)> {
        let (u, v) = (self.u, self.v);
        let k = k as i32;
        [
            (Tail::Above, (u * v).powi(-2 * k)),
            (Tail::Below, (u * v).powi(2 * k)),
            (Tail::Above, u.powi(2 - 2 * k) * v.powi(-2 * k)),
            (Tail::Below, u.powi(2 * k) * v.powi(2 * k - 2)),
        ]
        .into_iter()
        .filter(|(_, s)| *s > 0.0 && s.is_finite())
        .collect()
    }
}

/// Smallest depth with `(uv)^{2(K+1)} < 1e-14`.
pub fn default_truncation(u: f64, v: f64) -> usize {
    let uv = u * v;
    if uv == 0.0 {
        return 0;
    }
    let mut k = 0;
    while uv.powi(2 * (k as i32 + 1)) >= 1e-14 {
        k += 1;
    }
    k
}

/// Whether residue `j` (1-based) contributes a factor of the given family on segment `p` (1-based).
pub fn indicator(params: &AsymptoticParams, j: usize, p: usize, tail: Tail, ty: FactorType) -> bool {
    let a = params.a[j - 1];
    let b = params.b[p - 1][j - 1];
    let want_sign = match tail {
        Tail::Above => Sign::Minus,
        Tail::Below => Sign::Plus,
    };
    let want_side = match ty {
        FactorType::One => Side::L,
        FactorType::Zero => Side::R,
    };
    a == want_side && b == want_sign
}

/// One zero/pole pair of a family member, before argument scaling.
/// Returns (zero, pole, scale) with the factor equal to `scale (w − zero)/(w − pole)`.
fn family_factors(params: &AsymptoticParams, chi: f64, tail: Tail, ty: FactorType) -> Vec<(f64, f64, f64)> {
    let v = &params.breaks;
    let mut out = Vec::new();
    for p in 1..=params.m() {
        for j in 1..=params.n {
            if !indicator(params, j, p, tail, ty) {
                continue;
            }
            let t = params.tau[j - 1];
            match (tail, ty) {
                (Tail::Above, _) if v[p] <= chi => {}
                (Tail::Below, _) if v[p - 1] >= chi => {}
                (Tail::Above, FactorType::One) => {
                    let hi = v[p - 1].max(chi);
                    out.push((v[p].exp() / t, hi.exp() / t, 1.0));
                }
                (Tail::Above, FactorType::Zero) => {
                    let hi = v[p - 1].max(chi);
                    out.push((-hi.exp() / t, -v[p].exp() / t, 1.0));
                }
                (Tail::Below, FactorType::One) => {
                    let lo = v[p].min(chi);
                    out.push((v[p - 1].exp() / t, lo.exp() / t, (lo - v[p - 1]).exp()));
                }
                (Tail::Below, FactorType::Zero) => {
                    let lo = v[p].min(chi);
                    out.push((-lo.exp() / t, -v[p - 1].exp() / t, (v[p - 1] - lo).exp()));
                }
            }
        }
    }
    out
}

const TYPES: [FactorType; 2] = [FactorType::One, FactorType::Zero];

/// Direct evaluation of one family at `s·w`, from the product formula.
fn family_eval(params: &AsymptoticParams, chi: f64, tail: Tail, ty: FactorType, s: f64, w: Complex64) -> Result<Complex64> {
    let x = w * s;
    let v = &params.breaks;
    let mut acc = Complex64::new(1.0, 0.0);
    for p in 1..=params.m() {
        for j in 1..=params.n {
            if !indicator(params, j, p, tail, ty) {
                continue;
            }
            let t = params.tau[j - 1];
            let (num, den) = match (tail, ty) {
                (Tail::Above, _) if v[p] <= chi => continue,
                (Tail::Below, _) if v[p - 1] >= chi => continue,
                (Tail::Above, FactorType::One) => (x - v[p].exp() / t, x - v[p - 1].max(chi).exp() / t),
                (Tail::Above, FactorType::Zero) => (x + v[p - 1].max(chi).exp() / t, x + v[p].exp() / t),
                (Tail::Below, FactorType::One) => {
                    (1.0 - x * t * (-v[p - 1]).exp(), 1.0 - x * t * (-v[p].min(chi)).exp())
                }
                (Tail::Below, FactorType::Zero) => {
                    (1.0 + x * t * (-v[p].min(chi)).exp(), 1.0 + x * t * (-v[p - 1]).exp())
                }
            };
            if den.norm() == 0.0 {
                return Err(Error::Domain(format!("pole hit at w = {w}")));
            }
            acc *= num / den;
        }
    }
    Ok(acc)
}

/// `G_χ(w)`, the product of the four factor families.
pub fn g_chi(params: &AsymptoticParams, chi: f64, w: Complex64) -> Result<Complex64> {
    let mut acc = Complex64::new(1.0, 0.0);
    for tail in [Tail::Above, Tail::Below] {
        for ty in TYPES {
            acc *= family_eval(params, chi, tail, ty, 1.0, w)?;
        }
    }
    Ok(acc)
}

/// `F_{u,v,k}(w)`: boundary-anchored families at rescaled arguments.
pub fn f_uvk(params: &AsymptoticParams, k: usize, w: Complex64) -> Result<Complex64> {
    if k == 0 {
        return Err(Error::Domain("depth k must be positive".into()));
    }
    let (lo, hi) = (params.breaks[0], params.breaks[params.m()]);
    let mut acc = Complex64::new(1.0, 0.0);
    for (tail, s) in params.level_scalings(k) {
        let anchor = if tail == Tail::Above { lo } else { hi };
        for ty in TYPES {
            acc *= family_eval(params, anchor, tail, ty, s, w)?;
        }
    }
    Ok(acc)
}

/// `scale · ∏ (w − zeros[i]) / (w − poles[i])` with zeros and poles paired.
///
/// Pairing keeps evaluation overflow-free when the catalog spans many
/// orders of magnitude. `inner[i]` marks poles the Laplace contour must
/// enclose together with the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalFunction {
    pub zeros: Vec<f64>,
    pub poles: Vec<f64>,
    pub inner: Vec<bool>,
    pub scale: f64,
}

impl RationalFunction {
    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        let mut acc = Complex64::new(self.scale, 0.0);
        for (z, p) in self.zeros.iter().zip(&self.poles) {
            acc *= (w - z) / (w - p);
        }
        acc
    }

    pub fn eval_real(&self, w: f64) -> f64 {
        let mut acc = self.scale;
        for (z, p) in self.zeros.iter().zip(&self.poles) {
            acc *= (w - z) / (w - p);
        }
        acc
    }

    pub fn log_derivative(&self, w: Complex64) -> Complex64 {
        self.zeros.iter().zip(&self.poles).map(|(z, p)| 1.0 / (w - z) - 1.0 / (w - p)).sum()
    }

    /// Log-derivative at a real point, with the sum of absolute terms for a relative residual.
    pub fn log_derivative_real(&self, w: f64) -> (f64, f64) {
        let mut sum = 0.0;
        let mut mag = 0.0;
        for (z, p) in self.zeros.iter().zip(&self.poles) {
            let (a, b) = (1.0 / (w - z), 1.0 / (w - p));
            sum += a - b;
            mag += a.abs() + b.abs();
        }
        (sum, mag)
    }

    /// Sorted zeros and poles together.
    fn singular_points(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.zeros.iter().chain(&self.poles).copied().collect();
        s.sort_by(f64::total_cmp);
        s
    }
}

/// Builds `G_χ ∏_{k≤K} F_k` in factored form.
pub fn build_rational(params: &AsymptoticParams, chi: f64) -> Result<RationalFunction> {
    params.validate()?;
    params.check_chi(chi)?;
    let mut pairs: Vec<(f64, f64, bool)> = Vec::new();
    let mut scale = 1.0;
    let mut push = |chi: f64, tail: Tail, s: f64| {
        for ty in TYPES {
            for (z, p, c) in family_factors(params, chi, tail, ty) {
                pairs.push((z / s, p / s, tail == Tail::Above));
                scale *= c;
            }
        }
    };
    push(chi, Tail::Above, 1.0);
    push(chi, Tail::Below, 1.0);
    let (lo, hi) = (params.breaks[0], params.breaks[params.m()]);
    for k in 1..=params.k {
        for (tail, s) in params.level_scalings(k) {
            let anchor = if tail == Tail::Above { lo } else { hi };
            push(anchor, tail, s);
        }
    }
    let mut zeros = Vec::with_capacity(pairs.len());
    let mut poles = Vec::with_capacity(pairs.len());
    let mut inner = Vec::with_capacity(pairs.len());
    for (z, p, i) in pairs {
        zeros.push(z);
        poles.push(p);
        inner.push(i);
    }
    let mut rf = RationalFunction { zeros, poles, inner, scale };
    cancel_pairs(&mut rf);
    Ok(rf)
}

fn cancel_pairs(rf: &mut RationalFunction) {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-14 * a.abs().max(b.abs());
    loop {
        let hit = (0..rf.zeros.len())
            .find_map(|i| (0..rf.poles.len()).find(|&j| close(rf.zeros[i], rf.poles[j])).map(|j| (i, j)));
        let Some((i, j)) = hit else { break };
        if i != j {
            // zeros[i] cancels poles[j]; zeros[j] and poles[i] form the new pair i.
            rf.zeros[i] = rf.zeros[j];
        }
        rf.zeros.remove(j);
        rf.poles.remove(j);
        rf.inner.remove(j);
    }
}

/// Relative-tolerance convergence for the bracketing solver.
struct RelTol {
    eps: f64,
    max_iter: usize,
}

impl Convergency<f64> for RelTol {
    fn is_root_found(&mut self, y: f64) -> bool {
        y == 0.0
    }
    fn is_converged(&mut self, x1: f64, x2: f64) -> bool {
        (x1 - x2).abs() <= self.eps * x1.abs().max(x2.abs()).max(1e-300)
    }
    fn is_iteration_limit_reached(&mut self, iter: usize) -> bool {
        iter >= self.max_iter
    }
}

fn brent(a: f64, b: f64, f: impl FnMut(f64) -> f64) -> Option<f64> {
    let mut conv = RelTol { eps: 4.0 * f64::EPSILON, max_iter: 200 };
    find_root_brent(a, b, f, &mut conv).ok()
}

/// `P/P'` for `P = scale ∏(x − z) − target ∏(x − p)`, together with `|1 − target/R(x)|`.
fn newton_ratio(rf: &RationalFunction, target: f64, x: Complex64) -> (Complex64, f64) {
    let rho = target / rf.eval(x);
    let mut sz = Complex64::new(0.0, 0.0);
    let mut sp = Complex64::new(0.0, 0.0);
    for (z, p) in rf.zeros.iter().zip(&rf.poles) {
        sz += 1.0 / (x - z);
        sp += 1.0 / (x - p);
    }
    let one_minus = 1.0 - rho;
    (one_minus / (sz - rho * sp), one_minus.norm())
}

/// All roots of `rf(w) = target`, i.e. of the cleared polynomial
/// `scale ∏(w − z) − target ∏(w − p)`, by Aberth–Ehrlich iteration.
pub fn solve_all(rf: &RationalFunction, target: f64) -> Result<Vec<Complex64>> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::Domain(format!("target e^(-n kappa) = {target} must be positive and finite")));
    }
    let d = rf.degree();
    if d == 0 {
        return Ok(Vec::new());
    }
    let lead = rf.scale - target;
    let span = rf.singular_points().iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut guesses: Vec<Complex64> = rf
        .zeros
        .iter()
        .zip(&rf.poles)
        .enumerate()
        .map(|(i, (z, p))| {
            let mid = 0.5 * (z + p);
            let off = 0.25 * (z - p).abs();
            let phase = 0.4 + 2.1 * i as f64;
            Complex64::new(mid + off * phase.cos(), off * phase.sin())
        })
        .collect();
    // Order by modulus so the largest guess is last.
    guesses.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let degree = if lead.abs() <= 1e-13 * rf.scale.max(target) {
        guesses.pop();
        d - 1
    } else {
        // A leading coefficient near zero pushes one root far out.
        let sum: f64 = rf.poles.iter().sum::<f64>() - rf.zeros.iter().sum::<f64>();
        let far = rf.scale * sum / (target - rf.scale);
        if far.abs() > 10.0 * span {
            *guesses.last_mut().unwrap() = Complex64::new(far, 0.1 * far.abs());
        }
        d
    };
    if degree == 0 {
        return Ok(Vec::new());
    }
    let mut w = guesses;
    let mut done = vec![false; degree];
    let newton = |x: Complex64| newton_ratio(rf, target, x);
    for _ in 0..1000 {
        if done.iter().all(|&b| b) {
            break;
        }
        for i in 0..degree {
            if done[i] {
                continue;
            }
            let (n, res) = newton(w[i]);
            if !n.is_finite() {
                // Landed on a zero or pole; nudge off it.
                let nudge = 1e-9 * w[i].norm().max(1e-300);
                w[i] += Complex64::new(nudge, nudge);
                continue;
            }
            let rep: Complex64 = (0..degree).filter(|&j| j != i).map(|j| 1.0 / (w[i] - w[j])).sum();
            let step = n / (1.0 - n * rep);
            w[i] -= step;
            if step.norm() <= 1e-15 * w[i].norm() || res <= 2.0 * f64::EPSILON {
                done[i] = true;
            }
        }
    }
    // Accept unconverged roots only if they already solve the equation.
    for (i, x) in w.iter().enumerate() {
        if !done[i] {
            let res = (rf.eval(*x) / target - 1.0).norm();
            if !(res < 1e-8) {
                return Err(Error::Numerical(format!(
                    "root finder did not converge: root {x} has relative residual {res:e}"
                )));
            }
        }
    }
    Ok(w)
}

/// Relative imaginary part below which a computed root counts as real.
const REAL_TOL: f64 = 1e-7;

fn is_real_root(x: Complex64) -> bool {
    x.im.abs() <= REAL_TOL * x.norm()
}

/// The root of `R_χ(w) = e^{-nκ}` in the upper half plane, or `None` when all roots are real.
pub fn solve_w_plus(params: &AsymptoticParams, chi: f64, kappa: f64) -> Result<Option<Complex64>> {
    let rf = build_rational(params, chi)?;
    w_plus_of(&rf, params.n, kappa)
}

fn w_plus_of(rf: &RationalFunction, n: usize, kappa: f64) -> Result<Option<Complex64>> {
    let target = (-(n as f64) * kappa).exp();
    let roots = solve_all(rf, target)?;
    let upper: Vec<Complex64> = roots.iter().copied().filter(|x| !is_real_root(*x) && x.im > 0.0).collect();
    match upper.len() {
        0 => Ok(None),
        1 => Ok(Some(polish(rf, target, upper[0]))),
        c => Err(Error::Domain(format!(
            "assumption violated: {c} conjugate pairs of roots at kappa = {kappa} (expected at most one)"
        ))),
    }
}

fn polish(rf: &RationalFunction, target: f64, mut x: Complex64) -> Complex64 {
    for _ in 0..4 {
        let r = rf.eval(x);
        let step = (1.0 - target / r) / rf.log_derivative(x);
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    x
}

/// A liquid κ-interval at fixed χ and the slope just outside each end.
#[derive(Clone, Copy, Debug, PartialEq)]
struct LiquidInterval {
    lo: f64,
    hi: f64,
    below: f64,
    above: f64,
}

/// Everything needed to evaluate the density and the limit height along one vertical line.
#[derive(Clone, Debug)]
pub struct Slice {
    pub chi: f64,
    n: usize,
    rf: RationalFunction,
    liquid: Vec<LiquidInterval>,
    /// Frozen runs `(lo, hi, slope)` filling the gaps between liquid intervals.
    frozen: Vec<(f64, f64, f64)>,
}

impl Slice {
    pub fn new(params: &AsymptoticParams, chi: f64) -> Result<Self> {
        let rf = build_rational(params, chi)?;
        let n = params.n;
        // Double real roots sit at real critical points of R with R > 0.
        let mut crit: Vec<(f64, f64)> = critical_points(&rf)
            .into_iter()
            .filter_map(|w| {
                let r = rf.eval_real(w);
                (r > 0.0 && r.is_finite()).then(|| (-(r.ln()) / n as f64, w))
            })
            .collect();
        crit.sort_by(|a, b| a.0.total_cmp(&b.0));
        crit.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-13 * (1.0 + a.0.abs()));
        let mut liquid = Vec::new();
        for i in 0..crit.len().saturating_sub(1) {
            let (lo, hi) = (crit[i].0, crit[i + 1].0);
            if hi - lo < 1e-12 {
                continue;
            }
            if w_plus_of(&rf, n, 0.5 * (lo + hi))?.is_some() {
                let slope = |w: f64| if w > 0.0 { 2.0 } else { 0.0 };
                liquid.push(LiquidInterval { lo, hi, below: slope(crit[i].1), above: slope(crit[i + 1].1) });
            }
        }
        // Adjacent liquid intervals split by a spurious critical value are merged.
        let mut merged: Vec<LiquidInterval> = Vec::new();
        for iv in liquid {
            match merged.last_mut() {
                Some(last) if (iv.lo - last.hi).abs() <= 1e-13 * (1.0 + iv.lo.abs()) => {
                    last.hi = iv.hi;
                    last.above = iv.above;
                }
                _ => merged.push(iv),
            }
        }
        let frozen = frozen_runs(&merged, rf.eval_real(0.0), n);
        Ok(Slice { chi, n, rf, liquid: merged, frozen })
    }

    pub fn rational(&self) -> &RationalFunction {
        &self.rf
    }

    /// Liquid κ-intervals on this line.
    pub fn liquid_intervals(&self) -> Vec<(f64, f64)> {
        self.liquid.iter().map(|iv| (iv.lo, iv.hi)).collect()
    }

    /// Slope in a frozen region.
    fn frozen_value(&self, kappa: f64) -> f64 {
        self.frozen
            .iter()
            .find(|(lo, hi, _)| kappa >= *lo && kappa <= *hi)
            .or(self.frozen.last())
            .map_or(0.0, |r| r.2)
    }

    fn liquid_density(&self, kappa: f64) -> Result<Option<f64>> {
        Ok(w_plus_of(&self.rf, self.n, kappa)?.map(|w| 2.0 - 2.0 * w.arg() / PI))
    }

    /// Slope of the limit height in κ, a value in [0, 2].
    pub fn density(&self, kappa: f64) -> Result<f64> {
        match self.liquid_density(kappa)? {
            Some(d) => Ok(d),
            None => Ok(self.frozen_value(kappa)),
        }
    }

    /// Density inside a known liquid interval; falls back to the edge value
    /// where the conjugate pair is too close to the axis to resolve.
    fn interval_density(&self, iv: &LiquidInterval, kappa: f64) -> Result<f64> {
        Ok(match self.liquid_density(kappa)? {
            Some(d) => d,
            None if kappa - iv.lo < iv.hi - kappa => iv.below,
            None => iv.above,
        })
    }

    /// Piecewise description of the slope: frozen runs with constant value and liquid intervals.
    fn pieces(&self) -> Result<Vec<Piece>> {
        let mut out: Vec<Piece> = self.frozen.iter().map(|&(lo, hi, value)| Piece::Frozen { lo, hi, value }).collect();
        out.extend(self.liquid.iter().map(|iv| Piece::Liquid(*iv)));
        out.sort_by(|a, b| a.lo().total_cmp(&b.lo()));
        if let Some(Piece::Frozen { value, .. }) = out.first() {
            if *value != 0.0 {
                return Err(Error::Domain(format!(
                    "slope is {value} as kappa -> -inf at chi = {}; the limit height is unbounded below",
                    self.chi
                )));
            }
        }
        Ok(out)
    }

    /// `H(χ, κ) = ∫_{-∞}^{κ} density`, normalized by `H → 0` as `κ → −∞`.
    pub fn height(&self, kappa: f64) -> Result<f64> {
        let mut total = 0.0;
        for piece in self.pieces()? {
            match piece {
                Piece::Frozen { lo, hi, value } => {
                    if kappa > lo && value != 0.0 {
                        total += value * (kappa.min(hi) - lo);
                    }
                }
                Piece::Liquid(iv) => {
                    if kappa > iv.lo {
                        let top = kappa.min(iv.hi);
                        total += self.integrate_liquid(&iv, iv.lo, top, |_| 1.0)?;
                    }
                }
            }
            if kappa <= piece.hi() {
                break;
            }
        }
        Ok(total)
    }

    /// `∫ e^{-nακ} H(χ,κ) dκ`, computed as `(1/(nα)) ∫ e^{-nακ} density dκ`.
    pub fn laplace_direct(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0) {
            return Err(Error::Domain(format!("alpha = {alpha} must be positive")));
        }
        let c = self.n as f64 * alpha;
        let mut total = 0.0;
        for piece in self.pieces()? {
            match piece {
                Piece::Frozen { lo, hi, value } => {
                    if value != 0.0 {
                        let e = |x: f64| if x == f64::INFINITY { 0.0 } else { (-c * x).exp() };
                        total += value * (e(lo) - e(hi)) / c;
                    }
                }
                Piece::Liquid(iv) => {
                    total += self.integrate_liquid(&iv, iv.lo, iv.hi, |k| (-c * k).exp())?;
                }
            }
        }
        Ok(total / c)
    }

    /// `∫_a^b weight(κ) density(κ) dκ` inside one liquid interval. The
    /// substitution `κ = a + (b−a)(1 − cos φ)/2` absorbs square-root edges.
    fn integrate_liquid(&self, iv: &LiquidInterval, a: f64, b: f64, weight: impl Fn(f64) -> f64) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let rule = GaussLegendre::new(20.try_into().unwrap());
        let mut err = None;
        let mut f = |phi: f64| {
            let k = a + (b - a) * 0.5 * (1.0 - phi.cos());
            let jac = 0.5 * (b - a) * phi.sin();
            match self.interval_density(iv, k) {
                Ok(d) => weight(k) * d * jac,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        };
        let whole = rule.integrate(0.0, PI, &mut f);
        let val = adaptive(&rule, &mut f, 0.0, PI, whole, 1e-11, 24);
        match err {
            Some(e) => Err(e),
            None => Ok(val),
        }
    }
}

/// Adaptive bisection on top of a fixed Gauss–Legendre rule. The density can
/// vary sharply inside a liquid interval when `w₊` runs far from the origin.
fn adaptive(rule: &GaussLegendre, f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let mid = 0.5 * (a + b);
    let left = rule.integrate(a, mid, &mut *f);
    let right = rule.integrate(mid, b, &mut *f);
    if depth == 0 || (left + right - whole).abs() <= tol {
        return left + right;
    }
    adaptive(rule, f, a, mid, left, 0.5 * tol, depth - 1) + adaptive(rule, f, mid, b, right, 0.5 * tol, depth - 1)
}

/// Frozen runs between liquid intervals. Each run takes the slope of the
/// liquid edge it touches. Where the two edges of a gap disagree, the slope
/// jumps where `R_χ(0) = e^{-nκ}`, the jump of the indicator term; without
/// liquid intervals that indicator alone decides.
fn frozen_runs(liquid: &[LiquidInterval], r_at_zero: f64, n: usize) -> Vec<(f64, f64, f64)> {
    let jump = (r_at_zero > 0.0).then(|| -r_at_zero.ln() / n as f64);
    let (ninf, inf) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut gaps = Vec::new();
    match (liquid.first(), liquid.last()) {
        (Some(first), Some(last)) => {
            gaps.push((ninf, first.lo, first.below, first.below));
            for pair in liquid.windows(2) {
                gaps.push((pair[0].hi, pair[1].lo, pair[0].above, pair[1].below));
            }
            gaps.push((last.hi, inf, last.above, last.above));
        }
        _ => gaps.push((ninf, inf, 0.0, if jump.is_some() { 2.0 } else { 0.0 })),
    }
    let mut out = Vec::new();
    for (lo, hi, left, right) in gaps {
        if left == right {
            out.push((lo, hi, left));
            continue;
        }
        let cut = match jump {
            Some(k) if k > lo && k < hi => k,
            _ if lo.is_finite() && hi.is_finite() => 0.5 * (lo + hi),
            _ => jump.unwrap_or(0.0),
        };
        out.push((lo, cut, left));
        out.push((cut, hi, right));
    }
    out
}

#[derive(Clone, Copy, Debug)]
enum Piece {
    Frozen { lo: f64, hi: f64, value: f64 },
    Liquid(LiquidInterval),
}

impl Piece {
    fn lo(&self) -> f64 {
        match self {
            Piece::Frozen { lo, .. } => *lo,
            Piece::Liquid(iv) => iv.lo,
        }
    }

    fn hi(&self) -> f64 {
        match self {
            Piece::Frozen { hi, .. } => *hi,
            Piece::Liquid(iv) => iv.hi,
        }
    }
}

/// Sample points in an open interval, dense near both ends.
fn interval_samples(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if lo.is_finite() && hi.is_finite() && lo * hi > 0.0 {
        // Same sign: geometric spacing covers widely separated scales.
        let (a, b) = (lo.abs(), hi.abs());
        let sign = lo.signum();
        for i in 1..count {
            let t = i as f64 / count as f64;
            out.push(sign * a * (b / a).powf(t));
        }
        return out;
    }
    if lo.is_finite() && hi.is_finite() {
        // Straddles zero: geometric on each side.
        let half = count / 2;
        for side in [lo, hi] {
            let a = side.abs();
            for i in 1..half {
                let t = i as f64 / half as f64;
                out.push(side.signum() * a * 1e-12f64.powf(1.0 - t));
            }
        }
        out.push(0.0);
        out.sort_by(f64::total_cmp);
        return out;
    }
    let (edge, sign) = if lo.is_finite() { (lo, 1.0) } else { (hi, -1.0) };
    let base = edge.abs().max(1e-300);
    for i in 1..count {
        let t = i as f64 / count as f64;
        let x = edge + sign * base * (1e8f64.powf(t) - 1.0 + 1e-6);
        out.push(x);
    }
    out
}

/// Real critical points of `log |R|`.
fn critical_points(rf: &RationalFunction) -> Vec<f64> {
    let sing = rf.singular_points();
    let mut bounds = vec![f64::NEG_INFINITY];
    bounds.extend(sing.iter().copied());
    bounds.push(f64::INFINITY);
    bounds.dedup();
    let f = |w: f64| rf.log_derivative_real(w).0;
    let mut out = Vec::new();
    for win in bounds.windows(2) {
        let xs = interval_samples(win[0], win[1], 64);
        let mut prev: Option<(f64, f64)> = None;
        for x in xs {
            let y = f(x);
            if !y.is_finite() {
                prev = None;
                continue;
            }
            if let Some((px, py)) = prev {
                if py == 0.0 {
                    out.push(px);
                } else if py * y < 0.0 {
                    if let Some(r) = brent(px, x, f) {
                        out.push(r);
                    }
                }
            }
            prev = Some((x, y));
        }
    }
    out
}

/// Slope of the limit height in κ at (χ, κ).
pub fn density(params: &AsymptoticParams, chi: f64, kappa: f64) -> Result<f64> {
    let rf = build_rational(params, chi)?;
    if let Some(w) = w_plus_of(&rf, params.n, kappa)? {
        return Ok(2.0 - 2.0 * w.arg() / PI);
    }
    Slice::new(params, chi)?.density(kappa)
}

/// Density on a grid, indexed `[chi][kappa]`. Columns run in parallel.
pub fn density_grid(params: &AsymptoticParams, chis: &[f64], kappas: &[f64]) -> Result<Vec<Vec<f64>>> {
    chis.par_iter()
        .map(|&chi| {
            let slice = Slice::new(params, chi)?;
            kappas.iter().map(|&k| slice.density(k)).collect()
        })
        .collect()
}

/// Limit height `H(χ, κ)` on a grid, indexed `[chi][kappa]`.
pub fn height_grid(params: &AsymptoticParams, chis: &[f64], kappas: &[f64]) -> Result<Vec<Vec<f64>>> {
    chis.par_iter()
        .map(|&chi| {
            let slice = Slice::new(params, chi)?;
            kappas.iter().map(|&k| slice.height(k)).collect()
        })
        .collect()
}

/// A point on the frozen boundary with the real double root that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub chi: f64,
    pub kappa: f64,
    pub w: f64,
    /// Relative residual of the log-derivative equation.
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrozenBoundaryCurve {
    pub points: Vec<BoundaryPoint>,
    /// Grid values of `w` that produced no point.
    pub skipped: Vec<f64>,
}

/// A straight piece of a traced curve, as two `(χ, κ)` end points.
pub type Segment = ((f64, f64), (f64, f64));

/// Residual bound for emitted boundary points.
pub const BOUNDARY_RESIDUAL: f64 = 1e-9;

/// Traces the frozen boundary: for each real `w`, every `χ` with
/// `∂_w log R_χ(w) = 0` and `R_χ(w) > 0` gives the point
/// `(χ, −log R_χ(w)/n)`.
pub fn frozen_boundary(params: &AsymptoticParams, w_grid: &[f64]) -> Result<FrozenBoundaryCurve> {
    params.validate()?;
    let per_w: Vec<Result<Vec<BoundaryPoint>>> = w_grid.par_iter().map(|&w| boundary_at(params, w)).collect();
    let mut curve = FrozenBoundaryCurve::default();
    for (w, pts) in w_grid.iter().zip(per_w) {
        let pts = pts?;
        if pts.is_empty() {
            curve.skipped.push(*w);
        }
        curve.points.extend(pts);
    }
    Ok(curve)
}

/// Traces the boundary on `w_grid` and bisects grid gaps (geometrically)
/// until neighbouring grid values give matching point sets no more than
/// `max_gap` apart, or `rounds` bisections have been spent.
pub fn refine_boundary(params: &AsymptoticParams, w_grid: &[f64], max_gap: f64, rounds: usize) -> Result<FrozenBoundaryCurve> {
    params.validate()?;
    let mut grid: Vec<f64> = w_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut traced: Vec<(f64, Vec<BoundaryPoint>)> = Vec::new();
    let mut fresh = grid.clone();
    for _ in 0..=rounds {
        let found: Vec<Result<Vec<BoundaryPoint>>> = fresh.par_iter().map(|&w| boundary_at(params, w)).collect();
        for (w, pts) in fresh.iter().zip(found) {
            traced.push((*w, pts?));
        }
        traced.sort_by(|a, b| a.0.total_cmp(&b.0));
        fresh.clear();
        for pair in traced.windows(2) {
            let ((wa, pa), (wb, pb)) = (&pair[0], &pair[1]);
            if wa * wb <= 0.0 {
                continue;
            }
            let (xa, xb) = (coords(pa), coords(pb));
            if xa.len() != xb.len() || hausdorff(&xa, &xb) > max_gap {
                fresh.push(wa.signum() * (wa * wb).sqrt());
            }
        }
        if fresh.is_empty() {
            break;
        }
    }
    let mut curve = FrozenBoundaryCurve::default();
    for (w, pts) in traced {
        if pts.is_empty() {
            curve.skipped.push(w);
        }
        curve.points.extend(pts);
    }
    Ok(curve)
}

fn coords(pts: &[BoundaryPoint]) -> Vec<(f64, f64)> {
    pts.iter().map(|p| (p.chi, p.kappa)).collect()
}

impl FrozenBoundaryCurve {
    /// Links points of neighbouring grid values of `w` (same sign) into
    /// segments, each point to its nearest neighbour if closer than `max_link`.
    pub fn segments(&self, max_link: f64) -> Vec<Segment> {
        let mut groups: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
        for p in &self.points {
            match groups.last_mut() {
                Some((w, g)) if *w == p.w => g.push((p.chi, p.kappa)),
                _ => groups.push((p.w, vec![(p.chi, p.kappa)])),
            }
        }
        groups.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out = Vec::new();
        for pair in groups.windows(2) {
            let ((wa, ga), (wb, gb)) = (&pair[0], &pair[1]);
            if wa * wb <= 0.0 {
                continue;
            }
            for a in ga {
                let best = gb
                    .iter()
                    .map(|b| ((a.0 - b.0).hypot(a.1 - b.1), *b))
                    .min_by(|x, y| x.0.total_cmp(&y.0));
                if let Some((d, b)) = best {
                    if d <= max_link {
                        out.push((*a, b));
                    }
                }
            }
        }
        out
    }

    /// Whether `(chi, kappa)` is enclosed by the segments, by the even-odd rule
    /// along the upward vertical ray.
    pub fn encloses(segments: &[Segment], chi: f64, kappa: f64) -> bool {
        let mut inside = false;
        for &((x0, y0), (x1, y1)) in segments {
            if (x0 <= chi) != (x1 <= chi) {
                let y = y0 + (y1 - y0) * (chi - x0) / (x1 - x0);
                if y > kappa {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

fn boundary_at(params: &AsymptoticParams, w: f64) -> Result<Vec<BoundaryPoint>> {
    if !(w != 0.0 && w.is_finite()) {
        return Err(Error::Domain(format!("boundary grid point w = {w} must be finite and nonzero")));
    }
    let m = params.m();
    let (lo, hi) = (params.breaks[0], params.breaks[m]);
    // Catalog points depending on χ are ±e^χ/τ_j; they cross w where χ = log(|w| τ_j).
    let mut cuts: Vec<f64> = params.breaks.clone();
    cuts.extend(params.tau.iter().map(|t| (w.abs() * t).ln()).filter(|c| *c > lo && *c < hi));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let dlog = |chi: f64| -> f64 {
        match build_rational(params, chi) {
            Ok(rf) => rf.log_derivative_real(w).0,
            Err(_) => f64::NAN,
        }
    };
    let mut out = Vec::new();
    for win in cuts.windows(2) {
        let gap = win[1] - win[0];
        let (a, b) = (win[0] + 1e-12 * gap.max(1.0), win[1] - 1e-12 * gap.max(1.0));
        let count = 48;
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=count {
            // Cosine spacing refines near the cuts.
            let t = 0.5 * (1.0 - (PI * i as f64 / count as f64).cos());
            let chi = a + (b - a) * t;
            let y = dlog(chi);
            if !y.is_finite() {
                prev = None;
                continue;
            }
            if let Some((pc, py)) = prev {
                if py * y < 0.0 || y == 0.0 {
                    let root = if y == 0.0 { Some(chi) } else { brent(pc, chi, dlog) };
                    if let Some(chi_r) = root {
                        if let Some(pt) = boundary_point(params, w, chi_r)? {
                            out.push(pt);
                        }
                    }
                }
            }
            prev = Some((chi, y));
        }
    }
    Ok(out)
}

fn boundary_point(params: &AsymptoticParams, w: f64, chi: f64) -> Result<Option<BoundaryPoint>> {
    let rf = build_rational(params, chi)?;
    let r = rf.eval_real(w);
    if !(r > 0.0 && r.is_finite()) {
        return Ok(None);
    }
    let (d, mag) = rf.log_derivative_real(w);
    let residual = d.abs() / mag.max(f64::MIN_POSITIVE);
    if !(residual < BOUNDARY_RESIDUAL) {
        return Ok(None);
    }
    let kappa = -r.ln() / params.n as f64;
    Ok(Some(BoundaryPoint { chi, kappa, w, residual }))
}

/// Certificate that `R_χ = e^{-nκ}` has a double real root at a boundary point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubleRoot {
    /// Distance from `w` to the centroid of the root cluster.
    pub offset: f64,
    /// Diameter of the cluster.
    pub spread: f64,
}

/// Collects the roots within `1e-4·max(1, |w|)` of the boundary point's
/// `w`. Distances in the result are relative to `max(1, |w|)`.
///
/// A double root splits under roundoff by about `sqrt(ε)`, and by more near
/// cusps where it is close to triple. The centroid of the cluster does not
/// suffer from this, so `offset` is the sharp test and `spread` only has to
/// show that the cluster is tight.
pub fn double_root_check(params: &AsymptoticParams, pt: &BoundaryPoint) -> Result<DoubleRoot> {
    let rf = build_rational(params, pt.chi)?;
    let roots = solve_all(&rf, (-(params.n as f64) * pt.kappa).exp())?;
    let scale = pt.w.abs().max(1.0);
    let cluster: Vec<Complex64> = roots.into_iter().filter(|x| (x - pt.w).norm() <= 1e-4 * scale).collect();
    if cluster.len() < 2 {
        return Err(Error::Numerical(format!("no multiple root near w = {}", pt.w)));
    }
    let centroid = cluster.iter().sum::<Complex64>() / cluster.len() as f64;
    let spread = cluster
        .iter()
        .flat_map(|a| cluster.iter().map(move |b| (a - b).norm()))
        .fold(0.0f64, f64::max);
    Ok(DoubleRoot { offset: (centroid - pt.w).norm() / scale, spread: spread / scale })
}

/// Symmetric Hausdorff distance between two planar point sets.
pub fn hausdorff(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let one_way = |x: &[(f64, f64)], y: &[(f64, f64)]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p.0 - q.0).hypot(p.1 - q.1)).fold(f64::INFINITY, f64::min))
            .fold(0.0f64, f64::max)
    };
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    one_way(a, b).max(one_way(b, a))
}

/// Closed counter-clockwise polylines enclosing the origin and the poles
/// marked `inner`, and no other zero or pole.
///
/// The origin gets one circle that may also swallow small-scale points as
/// long as every pole inside is inner. Remaining inner poles get their own
/// small circles.
pub fn laplace_contour(params: &AsymptoticParams, chi: f64, points_per_circle: usize) -> Result<Vec<Vec<Complex64>>> {
    let rf = build_rational(params, chi)?;
    let mut pts: Vec<(f64, bool, bool)> = Vec::new(); // (value, is_pole, inner)
    pts.extend(rf.zeros.iter().map(|&z| (z, false, false)));
    pts.extend(rf.poles.iter().zip(&rf.inner).map(|(&p, &i)| (p, true, i)));
    pts.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
    // Largest prefix by modulus with only inner poles and a clean gap after it.
    let mut best = 0;
    for t in 0..=pts.len() {
        if t > 0 && pts[t - 1].1 && !pts[t - 1].2 {
            break;
        }
        let gap_ok = t == 0 || t == pts.len() || pts[t].0.abs() >= 1.5 * pts[t - 1].0.abs();
        if gap_ok {
            best = t;
        }
    }
    let r0 = match (best, pts.len()) {
        (_, 0) => 1.0,
        (0, _) => 0.5 * pts[0].0.abs(),
        (t, len) if t == len => 2.0 * pts[len - 1].0.abs(),
        (t, _) => (pts[t - 1].0.abs() * pts[t].0.abs()).sqrt(),
    };
    if !(r0 > 0.0) {
        return Err(Error::Domain("cannot separate the origin from the catalog".into()));
    }
    let circle = |c: f64, r: f64| -> Vec<Complex64> {
        (0..points_per_circle)
            .map(|i| Complex64::from_polar(r, 2.0 * PI * i as f64 / points_per_circle as f64) + c)
            .collect()
    };
    let mut out = vec![circle(0.0, r0)];
    for (idx, &(x, is_pole, inner)) in pts.iter().enumerate().skip(best) {
        if !(is_pole && inner) {
            continue;
        }
        let mut dist = x.abs() - r0;
        for (j, &(y, _, _)) in pts.iter().enumerate() {
            if j != idx {
                dist = dist.min((x - y).abs());
            }
        }
        if !(dist > 0.0) {
            return Err(Error::Domain(format!("inner pole {x} coincides with another catalog point")));
        }
        out.push(circle(x, 0.4 * dist));
    }
    Ok(out)
}

/// Compares the contour form of the Laplace transform of `H(χ, ·)` with
/// direct integration of the density. Returns `(integral, direct)`.
///
/// `integral = (1/(n²α²πi)) ∮ R^α dw/w`, with the power taken along a
/// continuously tracked branch of `log R` on each closed component.
/// Components are closed curves sampled at equally spaced parameter values.
pub fn laplace_check(params: &AsymptoticParams, chi: f64, alpha: f64, contour: &[Vec<Complex64>]) -> Result<(f64, f64)> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha = {alpha} must be positive")));
    }
    let rf = build_rational(params, chi)?;
    let mut total = Complex64::new(0.0, 0.0);
    for comp in contour {
        if comp.len() < 3 {
            return Err(Error::Domain("contour component needs at least three points".into()));
        }
        let vals: Vec<Complex64> = comp.iter().map(|&w| rf.eval(w)).collect();
        let mut logs = Vec::with_capacity(comp.len() + 1);
        let mut cur = vals[0].ln();
        logs.push(cur);
        for i in 1..=comp.len() {
            let next = vals[i % comp.len()];
            let jump = (next / vals[i - 1]).arg();
            if jump.abs() > PI / 2.0 {
                return Err(Error::Numerical(format!(
                    "branch of log R jumps by {jump:.3} between contour samples near w = {}; refine the contour",
                    comp[i % comp.len()]
                )));
            }
            cur = Complex64::new(next.norm().ln(), cur.im + jump);
            logs.push(cur);
        }
        let winding = (logs[comp.len()].im - logs[0].im) / (2.0 * PI);
        let turns = alpha * winding;
        if (turns - turns.round()).abs() > 1e-6 {
            return Err(Error::Domain(format!(
                "R^alpha is not single-valued on a contour component (winding {winding:.3}, alpha {alpha})"
            )));
        }
        // Periodic trapezoid rule with the tangent from a fourth-order central
        // difference. Chords alone would bias a sampled circle by sin(h)/h.
        let len = comp.len();
        let at = |i: usize, d: isize| comp[(i as isize + d).rem_euclid(len as isize) as usize];
        for i in 0..len {
            let tangent = if len >= 5 {
                (8.0 * (at(i, 1) - at(i, -1)) - (at(i, 2) - at(i, -2))) / 12.0
            } else {
                0.5 * (at(i, 1) - at(i, -1))
            };
            total += (alpha * logs[i]).exp() / comp[i] * tangent;
        }
    }
    let n = params.n as f64;
    let integral = total / Complex64::new(0.0, n * n * alpha * alpha * PI);
    let direct = Slice::new(params, chi)?.laplace_direct(alpha)?;
    Ok((integral.re, direct))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn indicators_of_the_example() {
        let p = AsymptoticParams::period_four(0);
        assert!(indicator(&p, 1, 1, Tail::Above, FactorType::One));
        assert!(!indicator(&p, 2, 1, Tail::Above, FactorType::One));
        assert!(indicator(&p, 3, 1, Tail::Below, FactorType::Zero));
    }

    #[test]
    fn g_chi_matches_the_displayed_product() {
        let p = AsymptoticParams::period_four(0);
        let e = 1f64.exp();
        let h = 0.5f64.exp();
        let want = ((2.0 - e) / (2.0 - h))
            * ((1.0 - 0.6) / (1.0 - 0.3 / h * 2.0))
            * ((2.0 + h) / (2.0 + e))
            * ((1.0 + 0.3 / h * 2.0) / (1.0 + 0.6));
        let got = g_chi(&p, 0.5, c(2.0)).unwrap();
        assert!((got.re - want).abs() < 1e-14 && got.im == 0.0);
        let far = g_chi(&p, 0.5, c(1e12)).unwrap();
        assert!((far.re - 1.0).abs() < 1e-10);
        let z = Complex64::new(0.7, 1.3);
        let (a, b) = (g_chi(&p, 0.5, z).unwrap(), g_chi(&p, 0.5, z.conj()).unwrap());
        assert!((a.conj() - b).norm() < 1e-15);
    }

    #[test]
    fn f_uvk_matches_the_displayed_product() {
        let p = AsymptoticParams::period_four(1);
        let e = 1f64.exp();
        let w = 1.0;
        let (a, b) = (0.01f64.powi(2), 0.1f64.powi(2));
        let want = ((w - a * e) / (w - a))
            * ((w - b * e) / (w - b))
            * ((1.0 - 0.3 * w * a) / (1.0 - 0.3 / e * w * a))
            * ((1.0 - 0.3 * w * b) / (1.0 - 0.3 / e * w * b))
            * ((w + a) / (w + a * e))
            * ((w + b) / (w + b * e))
            * ((1.0 + 0.3 / e * a * w) / (1.0 + 0.3 * a * w))
            * ((1.0 + 0.3 / e * b * w) / (1.0 + 0.3 * b * w));
        let got = f_uvk(&p, 1, c(w)).unwrap();
        assert!((got.re - want).abs() < 1e-14, "{got} vs {want}");
    }

    #[test]
    fn zero_fugacity_makes_f_trivial() {
        let mut p = AsymptoticParams::period_four(3);
        p.u = 0.0;
        p.v = 0.0;
        for k in 1..4 {
            assert_eq!(f_uvk(&p, k, Complex64::new(0.3, 0.2)).unwrap(), c(1.0));
        }
    }

    #[test]
    fn catalog_without_boundary_levels() {
        let p = AsymptoticParams::period_four(0);
        let rf = build_rational(&p, 0.5).unwrap();
        let (e, h) = (1f64.exp(), 0.5f64.exp());
        let mut z = rf.zeros.clone();
        let mut q = rf.poles.clone();
        z.sort_by(f64::total_cmp);
        q.sort_by(f64::total_cmp);
        let mut wz = vec![e, -h, 1.0 / 0.3, -h / 0.3];
        let mut wp = vec![h, -e, h / 0.3, -1.0 / 0.3];
        wz.sort_by(f64::total_cmp);
        wp.sort_by(f64::total_cmp);
        for (a, b) in z.iter().zip(&wz).chain(q.iter().zip(&wp)) {
            assert!((a - b).abs() < 1e-14);
        }
        // Each boundary level adds eight pairs.
        for k in 1..4 {
            let rk = build_rational(&AsymptoticParams::period_four(k), 0.5).unwrap();
            assert_eq!(rk.degree(), 4 + 8 * k);
        }
    }

    #[test]
    fn cancellation_repairs_partners() {
        let mut rf = RationalFunction {
            zeros: vec![1.0, 3.0],
            poles: vec![2.0, 1.0],
            inner: vec![true, false],
            scale: 2.0,
        };
        let before = rf.eval(Complex64::new(0.4, 0.9));
        cancel_pairs(&mut rf);
        assert_eq!(rf.degree(), 1);
        assert_eq!((rf.zeros[0], rf.poles[0]), (3.0, 2.0));
        assert!((rf.eval(Complex64::new(0.4, 0.9)) - before).norm() < 1e-14);
    }

    #[test]
    fn default_truncation_meets_the_target() {
        let k = default_truncation(0.1, 0.1);
        assert!(0.01f64.powi(2 * (k as i32 + 1)) < 1e-14);
        assert!(0.01f64.powi(2 * k as i32) >= 1e-14);
        assert_eq!(default_truncation(0.0, 0.5), 0);
    }

    #[test]
    fn deep_frozen_has_no_complex_root() {
        let p = AsymptoticParams::period_four(4);
        assert_eq!(solve_w_plus(&p, 0.5, 5.0).unwrap(), None);
        assert_eq!(solve_w_plus(&p, 0.5, -5.0).unwrap(), None);
        assert_eq!(density(&p, 0.5, 5.0).unwrap(), 2.0);
        assert_eq!(density(&p, 0.5, -5.0).unwrap(), 0.0);
    }

    #[test]
    fn hausdorff_basics() {
        let a = [(0.0, 0.0), (1.0, 0.0)];
        let b = [(0.0, 0.0), (1.0, 0.5)];
        assert!((hausdorff(&a, &b) - 0.5).abs() < 1e-15);
        assert_eq!(hausdorff(&a, &a), 0.0);
    }
}
