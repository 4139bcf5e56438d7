//! Value parsers for the command line.

use anyhow::{bail, Context};
use caustica::geodesic::models::ConformalSpeed;
use caustica::suite::ModelSpec;

/// A model name, or `conformal:FILE` for a JSON wave-speed description.
pub fn model(s: &str) -> anyhow::Result<ModelSpec> {
    if let Some(path) = s.strip_prefix("conformal:") {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        let speed: ConformalSpeed = serde_json::from_str(&text).with_context(|| format!("parsing {path}"))?;
        return Ok(ModelSpec::Conformal(speed));
    }
    Ok(ModelSpec::parse(s)?)
}

pub fn floats(s: &str) -> anyhow::Result<Vec<f64>> {
    let v: Result<Vec<f64>, _> = s.split(',').map(|x| x.trim().parse::<f64>()).collect();
    let v = v.with_context(|| format!("'{s}' is not a comma-separated list of numbers"))?;
    if v.iter().any(|x| !x.is_finite()) {
        bail!("'{s}' has a non-finite entry");
    }
    Ok(v)
}

/// Nonempty list of positive frequencies.
pub fn sweep(s: &str) -> anyhow::Result<Vec<f64>> {
    let v = floats(s)?;
    if v.iter().any(|&k| k <= 0.0) {
        bail!("frequencies must be positive");
    }
    Ok(v)
}

/// `lo:hi` with `0 < lo < hi`.
pub fn window(s: &str) -> anyhow::Result<(f64, f64)> {
    let (a, b) = s.split_once(':').context("window must look like lo:hi")?;
    let lo: f64 = a.trim().parse().context("window start")?;
    let hi: f64 = b.trim().parse().context("window end")?;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        bail!("window needs 0 < lo < hi");
    }
    Ok((lo, hi))
}

/// `l,m` with `|m| ≤ l`.
pub fn harmonic(s: &str) -> anyhow::Result<(usize, i64)> {
    let (a, b) = s.split_once(',').context("harmonic must look like l,m")?;
    let l: usize = a.trim().parse().context("degree")?;
    let m: i64 = b.trim().parse().context("order")?;
    if m.unsigned_abs() as usize > l {
        bail!("order {m} exceeds degree {l}");
    }
    Ok((l, m))
}

pub fn direction(s: &str) -> anyhow::Result<[f64; 2]> {
    match floats(s)?.as_slice() {
        &[a, b] if a != 0.0 || b != 0.0 => Ok([a, b]),
        _ => bail!("expected a nonzero planar vector a,b"),
    }
}

/// Reads `CAUSTICA_THREADS` and sizes the global pool.
pub fn threads() -> anyhow::Result<Option<usize>> {
    let Ok(raw) = std::env::var("CAUSTICA_THREADS") else {
        return Ok(None);
    };
    let n: usize = raw.trim().parse().with_context(|| format!("CAUSTICA_THREADS='{raw}'"))?;
    if n == 0 {
        bail!("CAUSTICA_THREADS must be at least 1");
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(Some(n))
}
