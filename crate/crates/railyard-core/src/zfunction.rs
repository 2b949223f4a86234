//! Partition functions: closed-form products and a brute-force enumerator.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::partitions::Partition;
use crate::railyard::{step_relation, weight, CoveringState, RailYardGraph, Side, Sign};
use crate::scalar::{Rational, Scalar};

/// Box `max_part × max_len` that every partition of an enumerated covering must fit in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationBound {
    pub max_part: u32,
    pub max_len: usize,
}

impl EnumerationBound {
    pub fn new(max_part: u32, max_len: usize) -> Self {
        assert!(max_part >= 1 && max_len >= 1, "bounds must be positive");
        EnumerationBound { max_part, max_len }
    }
    pub fn square(p: u32) -> Self {
        Self::new(p, p as usize)
    }
}

fn check_column(g: &RailYardGraph, i: i64) -> Result<()> {
    if i < g.l() || i > g.r() {
        return Err(Error::Domain(format!("column {i} outside [{}..{}]", g.l(), g.r())));
    }
    Ok(())
}

/// `1/(1 − t)`, failing if the factor is not convergent.
fn inv_one_minus<T: Scalar>(t: T, what: impl FnOnce() -> String) -> Result<T> {
    let d = T::one() - t;
    if d <= T::zero() {
        return Err(Error::Divergence(what()));
    }
    Ok(T::one() / d)
}

/// `z_{ij}` for a `+` column `i` left of a `−` column `j`.
pub fn z_pair<T: Scalar>(g: &RailYardGraph, i: i64, j: i64) -> Result<T> {
    check_column(g, i)?;
    check_column(g, j)?;
    if i >= j || g.b(i) != Sign::Plus || g.b(j) != Sign::Minus {
        return Err(Error::Domain(format!(
            "z_pair needs i < j with b_i = + and b_j = −, got ({i}, {j})"
        )));
    }
    let p = T::from_rational(g.x(i)) * T::from_rational(g.x(j));
    if g.a(i) != g.a(j) {
        Ok(T::one() + p)
    } else {
        inv_one_minus(p, || format!("1/(1 − x_{i} x_{j}) with x_{i} x_{j} ≥ 1"))
    }
}

/// Partition function with empty boundary partitions on both sides.
pub fn z_pure<T: Scalar>(g: &RailYardGraph) -> Result<T> {
    let mut z = T::one();
    for i in g.l()..=g.r() {
        if g.b(i) != Sign::Plus {
            continue;
        }
        for j in i + 1..=g.r() {
            if g.b(j) == Sign::Minus {
                z = z * z_pair::<T>(g, i, j)?;
            }
        }
    }
    Ok(z)
}

/// Free boundary on the left with fugacity `u`, empty partition on the right.
///
/// The value is a finite product; `v` is ignored.
pub fn z_free_empty<T: Scalar>(g: &RailYardGraph) -> Result<T> {
    let u = T::from_rational(g.u());
    let mut z = z_pure::<T>(g)?;
    for i in g.l()..=g.r() {
        if g.b(i) == Sign::Minus {
            let xi = T::from_rational(g.x(i));
            z = z * inv_one_minus(u.clone() * xi, || format!("1/(1 − u x_{i})"))?;
        }
    }
    let u2 = u.clone() * u;
    for i in g.l()..=g.r() {
        for j in i + 1..=g.r() {
            if g.b(i) != Sign::Minus || g.b(j) != Sign::Minus {
                continue;
            }
            let t = u2.clone() * T::from_rational(g.x(i)) * T::from_rational(g.x(j));
            z = if g.a(i) != g.a(j) {
                z * (T::one() + t)
            } else {
                z * inv_one_minus(t, || format!("1/(1 − u² x_{i} x_{j})"))?
            };
        }
    }
    Ok(z)
}

/// Truncated doubly free partition function.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeFreeValue<T> {
    /// Product over the first `n_terms` levels.
    pub value: T,
    /// Bound on `|log Z − log value|`.
    pub tail_bound: f64,
    pub n_terms: u32,
}

impl<T: Scalar> FreeFreeValue<T> {
    /// Bound on `|Z − value|` implied by the logarithmic tail bound.
    pub fn abs_error(&self) -> f64 {
        self.value.to_f64() * self.tail_bound.exp_m1()
    }
}

/// One factor family of the level-`n` product: monomial `c · u^{αn+β} v^{γn+δ}`
/// entering as `1 + t` or `1/(1 − t)`.
struct Family {
    coef: Rational,
    u_exp: (i64, i64),
    v_exp: (i64, i64),
    pole: bool,
    label: String,
}

fn families(g: &RailYardGraph) -> Vec<Family> {
    let mut out = Vec::new();
    let cols: Vec<i64> = (g.l()..=g.r()).collect();
    for &i in &cols {
        let x = g.x(i).clone();
        match g.b(i) {
            Sign::Plus => out.push(Family {
                coef: x,
                u_exp: (1, -1),
                v_exp: (1, 0),
                pole: true,
                label: format!("1/(1 − u^(n−1) v^n x_{i})"),
            }),
            Sign::Minus => out.push(Family {
                coef: x,
                u_exp: (1, 0),
                v_exp: (1, -1),
                pole: true,
                label: format!("1/(1 − u^n v^(n−1) x_{i})"),
            }),
        }
    }
    out.push(Family {
        coef: Rational::one(),
        u_exp: (1, 0),
        v_exp: (1, 0),
        pole: true,
        label: "1/(1 − u^n v^n)".into(),
    });
    for &i in &cols {
        for &j in &cols {
            if g.b(i) == Sign::Plus && g.b(j) == Sign::Minus {
                out.push(Family {
                    coef: g.x(i) * g.x(j),
                    u_exp: (2, 0),
                    v_exp: (2, 0),
                    pole: g.a(i) == g.a(j),
                    label: format!("u^2n v^2n x_{i} x_{j}"),
                });
            }
        }
    }
    for &i in &cols {
        for &j in &cols {
            if i >= j || g.b(i) != g.b(j) {
                continue;
            }
            let (u_exp, v_exp, tag) = match g.b(i) {
                Sign::Plus => ((2, -2), (2, 0), "u^(2n−2) v^2n"),
                Sign::Minus => ((2, 0), (2, -2), "u^2n v^(2n−2)"),
            };
            out.push(Family {
                coef: g.x(i) * g.x(j),
                u_exp,
                v_exp,
                pole: g.a(i) == g.a(j),
                label: format!("{tag} x_{i} x_{j}"),
            });
        }
    }
    out
}

fn family_term<T: Scalar>(f: &Family, u: &T, v: &T, n: i64) -> T {
    let eu = f.u_exp.0 * n + f.u_exp.1;
    let ev = f.v_exp.0 * n + f.v_exp.1;
    debug_assert!(eu >= 0 && ev >= 0);
    T::from_rational(&f.coef) * u.powu(eu as u64) * v.powu(ev as u64)
}

/// Doubly free partition function: `z_pure` times the level products for `n ≤ n_terms`.
pub fn z_free_free<T: Scalar>(g: &RailYardGraph, n_terms: u32) -> Result<FreeFreeValue<T>> {
    if n_terms == 0 {
        return Err(Error::Domain("n_terms must be positive".into()));
    }
    let uf = g.u().to_f64();
    let vf = g.v().to_f64();
    if uf * vf >= 1.0 {
        return Err(Error::Divergence("u v ≥ 1".into()));
    }
    let (u, v) = (T::from_rational(g.u()), T::from_rational(g.v()));
    let fams = families(g);
    let mut z = z_pure::<T>(g)?;
    for n in 1..=n_terms as i64 {
        for f in &fams {
            let t = family_term(f, &u, &v, n);
            if t.is_zero() {
                continue;
            }
            z = if f.pole {
                z * inv_one_minus(t, || format!("{} at n = {n}", f.label))?
            } else {
                z * (T::one() + t)
            };
        }
    }
    // Each family's terms shrink at least by the factor uv per level.
    let q = uf * vf;
    let n1 = n_terms as i64 + 1;
    let mut tmax: f64 = 0.0;
    let mut sum = 0.0;
    for f in &fams {
        let t = family_term::<f64>(f, &uf, &vf, n1);
        tmax = tmax.max(t);
        sum += t;
    }
    if tmax >= 1.0 {
        return Err(Error::Divergence("omitted levels are not convergent".into()));
    }
    let tail_bound = sum / ((1.0 - q) * (1.0 - tmax));
    Ok(FreeFreeValue { value: z, tail_bound, n_terms })
}

/// Transfer step: all partitions related to `p` by a column step, inside the box.
fn neighbours(p: &Partition, a: Side, b: Sign, bound: EnumerationBound) -> Vec<Partition> {
    let rel = step_relation(a, b);
    let mut out = Vec::new();
    let len_cap = bound.max_len;
    let part_cap = bound.max_part;
    match (rel.strip, rel.grows) {
        (crate::partitions::Strip::H, true) => {
            // ν_1 ∈ [p_1, cap], ν_i ∈ [p_i, p_{i−1}].
            let n = (p.len() + 1).min(len_cap);
            let mut cur = vec![0u32; n];
            fn rec(i: usize, p: &Partition, cap: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
                if i == cur.len() {
                    if let Some(q) = Partition::new(cur.clone()) {
                        out.push(q);
                    }
                    return;
                }
                let lo = p.part(i + 1);
                let hi = if i == 0 { cap } else { p.part(i) };
                for val in lo..=hi {
                    cur[i] = val;
                    rec(i + 1, p, cap, cur, out);
                }
            }
            if p.len() <= len_cap && p.first() <= part_cap {
                rec(0, p, part_cap, &mut cur, &mut out);
            }
        }
        (crate::partitions::Strip::H, false) => {
            let n = p.len();
            let mut cur = vec![0u32; n];
            fn rec(i: usize, p: &Partition, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
                if i == cur.len() {
                    if let Some(q) = Partition::new(cur.clone()) {
                        out.push(q);
                    }
                    return;
                }
                for val in p.part(i + 2)..=p.part(i + 1) {
                    cur[i] = val;
                    rec(i + 1, p, cur, out);
                }
            }
            rec(0, p, &mut cur, &mut out);
        }
        (crate::partitions::Strip::V, grows) => {
            let q = p.conjugate();
            let cb = EnumerationBound { max_part: bound.max_len as u32, max_len: bound.max_part as usize };
            let b2 = if grows { Sign::Plus } else { Sign::Minus };
            for c in neighbours(&q, Side::L, b2, cb) {
                out.push(c.conjugate());
            }
        }
    }
    out.retain(|q| q.fits(part_cap, len_cap));
    out
}

fn boundary_allowed(fugacity: &Rational, p: &Partition) -> bool {
    !fugacity.is_zero() || p.is_empty()
}

/// Sum of weights of all coverings whose partitions fit in `bound`, and their number.
///
/// Coverings of weight zero (a nonempty boundary partition at zero fugacity) are skipped.
pub fn brute_force_z<T: Scalar>(g: &RailYardGraph, bound: EnumerationBound) -> (T, u128) {
    let all = Partition::all_in_box(bound.max_part, bound.max_len);
    let u = T::from_rational(g.u());
    let v = T::from_rational(g.v());
    // Weights depend on sizes only, so carry per-partition sums forward column by column.
    let mut cur: HashMap<Partition, (T, u128)> = HashMap::new();
    // Zero fugacity pins the boundary partition to ∅, so those states are not counted.
    for p in all.iter().filter(|p| boundary_allowed(g.u(), p)) {
        cur.insert(p.clone(), (u.powu(p.size()), 1));
    }
    for i in g.l()..=g.r() {
        let (a, b) = (g.a(i), g.b(i));
        let x = T::from_rational(g.x(i));
        let mut next: HashMap<Partition, (T, u128)> = HashMap::new();
        let mut keys: Vec<&Partition> = cur.keys().collect();
        keys.sort();
        for p in keys {
            let (w, c) = &cur[p];
            for q in neighbours(p, a, b, bound) {
                let d = q.size().abs_diff(p.size());
                let e = next.entry(q).or_insert_with(|| (T::zero(), 0));
                e.0 = e.0.clone() + w.clone() * x.powu(d);
                e.1 += *c;
            }
        }
        cur = next;
    }
    let mut keys: Vec<&Partition> = cur.keys().collect();
    keys.sort();
    let mut z = T::zero();
    let mut n = 0u128;
    for p in keys.into_iter().filter(|p| boundary_allowed(g.v(), p)) {
        let (w, c) = &cur[p];
        z = z + w.clone() * v.powu(p.size());
        n += *c;
    }
    (z, n)
}

/// Every covering whose partitions fit in `bound`, in lexicographic order.
pub fn enumerate_states(g: &RailYardGraph, bound: EnumerationBound) -> Vec<CoveringState> {
    let all = Partition::all_in_box(bound.max_part, bound.max_len);
    let mut out = Vec::new();
    let mut seq = Vec::with_capacity(g.columns() + 1);
    fn rec(g: &RailYardGraph, k: usize, bound: EnumerationBound, seq: &mut Vec<Partition>, out: &mut Vec<CoveringState>) {
        if k == g.columns() {
            if !boundary_allowed(g.v(), &seq[k]) {
                return;
            }
            out.push(CoveringState { charge: 0, seq: seq.clone() });
            return;
        }
        let i = g.l() + k as i64;
        let mut nb = neighbours(&seq[k], g.a(i), g.b(i), bound);
        nb.sort();
        for q in nb {
            seq.push(q);
            rec(g, k + 1, bound, seq, out);
            seq.pop();
        }
    }
    for p in all.into_iter().filter(|p| boundary_allowed(g.u(), p)) {
        seq.clear();
        seq.push(p);
        rec(g, 0, bound, &mut seq, &mut out);
    }
    out
}

/// Normalized weights over the bounded configuration set.
pub fn exact_distribution(g: &RailYardGraph, bound: EnumerationBound) -> Vec<(CoveringState, Rational)> {
    exact_distribution_where(g, bound, |_| true)
}

/// Normalized weights over the bounded coverings accepted by `keep`.
pub fn exact_distribution_where(
    g: &RailYardGraph,
    bound: EnumerationBound,
    keep: impl Fn(&CoveringState) -> bool,
) -> Vec<(CoveringState, Rational)> {
    let states: Vec<CoveringState> = enumerate_states(g, bound).into_iter().filter(|s| keep(s)).collect();
    let weights: Vec<Rational> = states.iter().map(|s| weight::<Rational>(g, s)).collect();
    let total: Rational = weights.iter().fold(Rational::zero(), |a, w| a + w);
    assert!(total > Rational::zero(), "empty configuration set");
    states.into_iter().zip(weights).map(|(s, w)| (s, w / &total)).collect()
}
