//! Parsing of grid arguments.

use crate::error::{CliError, Result};

fn number(s: &str, what: &str) -> Result<f64> {
    let x: f64 = s.trim().parse().map_err(|_| CliError::config(format!("{what}: not a number: {s:?}")))?;
    if !x.is_finite() {
        return Err(CliError::config(format!("{what}: not finite: {s:?}")));
    }
    Ok(x)
}

fn count(s: &str, what: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| CliError::config(format!("{what}: not a count: {s:?}")))
}

/// `a:b:n`, `n` evenly spaced values from `a` to `b` inclusive.
pub fn linear(spec: &str, what: &str) -> Result<Vec<f64>> {
    let f: Vec<&str> = spec.split(':').collect();
    if f.len() != 3 {
        return Err(CliError::config(format!("{what}: expected a:b:n, got {spec:?}")));
    }
    let (a, b, n) = (number(f[0], what)?, number(f[1], what)?, count(f[2], what)?);
    match n {
        0 => Err(CliError::config(format!("{what}: needs at least one point"))),
        1 => Ok(vec![a]),
        _ => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
    }
}

/// Values of `w` for boundary tracing.
///
/// - `log:lo:hi:n`: `n` log-spaced moduli in `[lo, hi]`, each with both signs
/// - `lin:a:b:n`: as for [`linear`]
/// - a comma-separated list
pub fn w_grid(spec: &str) -> Result<Vec<f64>> {
    let what = "w-grid";
    let w = if let Some(rest) = spec.strip_prefix("log:") {
        let f: Vec<&str> = rest.split(':').collect();
        if f.len() != 3 {
            return Err(CliError::config(format!("{what}: expected log:lo:hi:n, got {spec:?}")));
        }
        let (lo, hi, n) = (number(f[0], what)?, number(f[1], what)?, count(f[2], what)?);
        if !(lo > 0.0 && hi >= lo) || n == 0 {
            return Err(CliError::config(format!("{what}: need 0 < lo ≤ hi and n ≥ 1")));
        }
        let step = if n > 1 { (hi / lo).ln() / (n - 1) as f64 } else { 0.0 };
        (0..n)
            .flat_map(|i| {
                let x = lo * (step * i as f64).exp();
                [x, -x]
            })
            .collect()
    } else if let Some(rest) = spec.strip_prefix("lin:") {
        linear(rest, what)?
    } else {
        spec.split(',').map(|s| number(s, what)).collect::<Result<Vec<f64>>>()?
    };
    if w.contains(&0.0) {
        return Err(CliError::config(format!("{what}: w = 0 is not allowed")));
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_grids() {
        assert_eq!(linear("0:1:3", "g").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(linear("0.25:9:1", "g").unwrap(), vec![0.25]);
        assert!(linear("0:1", "g").is_err());
        assert!(linear("0:x:3", "g").is_err());
        assert!(linear("0:1:0", "g").is_err());
    }

    #[test]
    fn w_grids() {
        let w = w_grid("log:0.01:100:3").unwrap();
        assert_eq!(w.len(), 6);
        assert!((w[2] - 1.0).abs() < 1e-12 && (w[3] + 1.0).abs() < 1e-12);
        assert_eq!(w_grid("0.5,-2").unwrap(), vec![0.5, -2.0]);
        assert_eq!(w_grid("lin:1:3:3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(w_grid("lin:-1:1:3").is_err());
        assert!(w_grid("log:0:1:3").is_err());
    }
}
