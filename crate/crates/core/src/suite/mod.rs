//! The acceptance experiments as reusable runs.
//!
//! Each run returns a [`Report`]: named checks comparing a measured value
//! with its bound, plus a table of the sampled data. The command-line
//! driver and the acceptance target both print these.

mod circ;
mod geo;
mod probe;
mod sphere;
mod transport;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

pub use circ::{apply_equivalence, decomposition, normal_kernel, ApplyConfig, DecomposeConfig, KernelConfig};
pub use geo::{
    canonical_graph, classification, conjugate_detection, conormal_geometry, lens_model, locus_geometry, locus_table,
    model_graph, model_locus, patch_directions, LocusConfig, ModelSpec,
};
pub use probe::{diagonal_symbol, model_fit, sqrt_law, DiagonalConfig, SqrtLawConfig};
pub use sphere::{sphere_kernel, SphereConfig};
pub use transport::{cancellation, scon, CancelConfig};

/// One assertion.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub expected: String,
    pub pass: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            expected: format!("< {bound:e}"),
            pass: measured < bound,
        }
    }

    pub fn above(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            expected: format!("> {bound:e}"),
            pass: measured > bound,
        }
    }

    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            expected: format!("<= {bound}"),
            pass: measured <= bound,
        }
    }

    pub fn within(name: impl Into<String>, measured: f64, target: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            expected: format!("{target} ± {tol:e}"),
            pass: (measured - target).abs() <= tol,
        }
    }

    pub fn equals(name: impl Into<String>, measured: usize, target: usize) -> Self {
        Self {
            name: name.into(),
            measured: measured as f64,
            expected: format!("= {target}"),
            pass: measured == target,
        }
    }

    /// `measured` is 1 when `ok` holds.
    pub fn holds(name: impl Into<String>, ok: bool, expected: &str) -> Self {
        Self {
            name: name.into(),
            measured: if ok { 1.0 } else { 0.0 },
            expected: expected.into(),
            pass: ok,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: measured {:.6e}, expected {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.expected
        )
    }
}

/// Rows of formatted cells under a header.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Shortest round-trip text for a float, in exponent form when small or
/// large.
pub fn cell(x: f64) -> String {
    format!("{x:?}")
}

/// `""` for `None`.
pub fn opt_cell(x: Option<f64>) -> String {
    x.map(cell).unwrap_or_default()
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub title: String,
    pub checks: Vec<Check>,
    pub table: Table,
    /// Run parameters and scalar results, for the JSON sidecar.
    pub meta: BTreeMap<String, String>,
}

impl Report {
    pub fn new(title: impl Into<String>, table: Table) -> Self {
        Self {
            title: title.into(),
            table,
            ..Default::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.meta.insert(key.to_string(), value.to_string());
    }

    /// Adds the checks of `other` with their names prefixed.
    pub fn absorb(&mut self, prefix: &str, other: Report) {
        for mut c in other.checks {
            c.name = format!("{prefix}: {}", c.name);
            self.checks.push(c);
        }
        for (k, v) in other.meta {
            self.meta.insert(format!("{prefix}.{k}"), v);
        }
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_lines() {
        let c = Check::below("err", 2e-6, 1e-5);
        assert!(c.pass);
        assert_eq!(c.to_string(), "PASS err: measured 2.000000e-6, expected < 1e-5");
        assert!(!Check::below("nan", f64::NAN, 1.0).pass);
        assert!(!Check::within("t", 3.2, 3.0, 0.1).pass);
        assert!(Check::equals("rank", 4, 4).pass);
    }

    #[test]
    fn cells_round_trip() {
        for x in [0.0, 1.0 / 3.0, 1.9e-16, -2.5e20, std::f64::consts::PI] {
            assert_eq!(cell(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(cell(1.9e-16), "1.9e-16");
        assert_eq!(opt_cell(None), "");
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [16.0, 32.0, 64.0].iter().map(|&k: &f64| (k, 5.0 * k.powf(-2.5))).collect();
        assert!((log_slope(&pts) + 2.5).abs() < 1e-12);
    }
}
