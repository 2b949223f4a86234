#![allow(dead_code)]

use std::collections::HashMap;

use railyard_core::sampler::{aa, ab, hh_with, hv_with};
use railyard_core::{interlaces_h, interlaces_v, Partition};

/// Outcome of an exhaustive bijection check: number of cases and the first failure.
pub struct Report {
    pub cases: usize,
    pub failures: Vec<String>,
}

impl Report {
    fn new() -> Self {
        Report { cases: 0, failures: Vec::new() }
    }
    fn fail(&mut self, msg: String) {
        if self.failures.len() < 10 {
            self.failures.push(msg);
        }
    }
}

fn small() -> Vec<Partition> {
    Partition::all_in_box(3, 3)
}

/// Every partition that could appear as an output.
fn targets() -> Vec<Partition> {
    Partition::all_in_box(7, 5)
}

pub fn check_hh() -> Report {
    let mut rep = Report::new();
    let all = small();
    let outs = targets();
    for l in &all {
        for m in &all {
            let mut seen: HashMap<Partition, (Partition, u32)> = HashMap::new();
            for k in all.iter().filter(|k| interlaces_h(k, l) && interlaces_h(k, m)) {
                for g in 0..=3 {
                    rep.cases += 1;
                    let nu = match hh_with(l, m, k, g) {
                        Ok(nu) => nu,
                        Err(e) => {
                            rep.fail(format!("HH {l} {m} {k} {g}: {e}"));
                            continue;
                        }
                    };
                    if !interlaces_h(m, &nu) || !interlaces_h(l, &nu) {
                        rep.fail(format!("HH {l} {m} {k} {g}: ν={nu} not above both"));
                    }
                    if nu.size() + k.size() != l.size() + m.size() + g as u64 {
                        rep.fail(format!("HH {l} {m} {k} {g}: size identity fails for ν={nu}"));
                    }
                    if let Some(prev) = seen.insert(nu.clone(), (k.clone(), g)) {
                        rep.fail(format!("HH {l} {m}: ({k},{g}) and {prev:?} both give {nu}"));
                    }
                }
            }
            // Every ν above both with a small enough first row is reached.
            let cap = l.first().max(m.first()) + 3;
            for nu in outs.iter().filter(|n| n.first() <= cap && interlaces_h(l, n) && interlaces_h(m, n)) {
                if !seen.contains_key(nu) {
                    rep.fail(format!("HH {l} {m}: ν={nu} not reached"));
                }
            }
        }
    }
    rep
}

pub fn check_hv() -> Report {
    let mut rep = Report::new();
    let all = small();
    let outs = targets();
    for l in &all {
        for m in &all {
            let mut seen: HashMap<Partition, (Partition, u32)> = HashMap::new();
            for k in all.iter().filter(|k| interlaces_v(k, l) && interlaces_h(k, m)) {
                for b in 0..=1 {
                    rep.cases += 1;
                    let nu = match hv_with(l, m, k, b) {
                        Ok(nu) => nu,
                        Err(e) => {
                            rep.fail(format!("HV {l} {m} {k} {b}: {e}"));
                            continue;
                        }
                    };
                    if !interlaces_v(m, &nu) || !interlaces_h(l, &nu) {
                        rep.fail(format!("HV {l} {m} {k} {b}: ν={nu} fails μ ≺′ ν or λ ≺ ν"));
                    }
                    if nu.size() + k.size() != l.size() + m.size() + b as u64 {
                        rep.fail(format!("HV {l} {m} {k} {b}: size identity fails for ν={nu}"));
                    }
                    if let Some(prev) = seen.insert(nu.clone(), (k.clone(), b)) {
                        rep.fail(format!("HV {l} {m}: ({k},{b}) and {prev:?} both give {nu}"));
                    }
                }
            }
            for nu in outs.iter().filter(|n| interlaces_h(l, n) && interlaces_v(m, n)) {
                if !seen.contains_key(nu) {
                    rep.fail(format!("HV {l} {m}: ν={nu} not reached"));
                }
            }
        }
    }
    rep
}

fn check_reflection(
    name: &str,
    op: fn(&Partition, &Partition, &Partition) -> railyard_core::Result<Partition>,
    pre: fn(&Partition, &Partition, &Partition) -> bool,
    post: fn(&Partition, &Partition, &Partition) -> bool,
    involution: bool,
) -> Report {
    let mut rep = Report::new();
    let all = small();
    for l in &all {
        for m in &all {
            let mut seen: HashMap<Partition, Partition> = HashMap::new();
            for k in all.iter().filter(|k| pre(l, m, k)) {
                rep.cases += 1;
                let nu = match op(l, m, k) {
                    Ok(nu) => nu,
                    Err(e) => {
                        rep.fail(format!("{name} {l} {m} {k}: {e}"));
                        continue;
                    }
                };
                if !post(l, m, &nu) {
                    rep.fail(format!("{name} {l} {m} {k}: ν={nu} fails the output strips"));
                }
                if nu.size() + k.size() != l.size() + m.size() {
                    rep.fail(format!("{name} {l} {m} {k}: size identity fails for ν={nu}"));
                }
                if involution {
                    match op(l, m, &nu) {
                        Ok(back) if &back == k => {}
                        other => rep.fail(format!("{name} {l} {m} {k}: applying twice gives {other:?}")),
                    }
                }
                if let Some(prev) = seen.insert(nu.clone(), k.clone()) {
                    rep.fail(format!("{name} {l} {m}: {k} and {prev} both give {nu}"));
                }
            }
            for nu in all.iter().filter(|n| post(l, m, n)) {
                if !seen.contains_key(nu) {
                    rep.fail(format!("{name} {l} {m}: ν={nu} not reached"));
                }
            }
        }
    }
    rep
}

pub fn check_aa() -> Report {
    check_reflection(
        "AA",
        aa,
        |l, m, k| interlaces_h(m, k) && interlaces_h(k, l),
        |l, m, n| interlaces_h(m, n) && interlaces_h(n, l),
        true,
    )
}

pub fn check_ab() -> Report {
    check_reflection(
        "AB",
        ab,
        |l, m, k| interlaces_v(m, k) && interlaces_h(k, l),
        |l, m, n| interlaces_h(m, n) && interlaces_v(n, l),
        false,
    )
}
