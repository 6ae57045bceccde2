//! Quantities with unit suffixes and grid syntax for command-line values.
//!
//! `266nm`, `100mW`, `1e-7torr`, `45deg`, `300K` all parse to SI. Grids are
//! either a single quantity, a comma list, or `start:stop:count[:log]`
//! (the `log` flag may also precede the count, as in `1e-9torr:1torr:log:40`).

use std::f64::consts::PI;

use levitorque_core::constants::TORR;

enum Scale {
    Mul(f64),
    // divisors are exact powers of ten, so `2.5um` rounds like the literal 2.5e-6
    Div(f64),
}

use Scale::{Div, Mul};

// longest suffixes first so `mW` wins over `m`
const SUFFIXES: &[(&str, Scale)] = &[
    ("torr", Mul(TORR)),
    ("mbar", Mul(100.0)),
    ("deg", Mul(PI / 180.0)),
    ("rad", Mul(1.0)),
    ("mW", Div(1e3)),
    ("uW", Div(1e6)),
    ("kW", Mul(1e3)),
    ("mV", Div(1e3)),
    ("nm", Div(1e9)),
    ("um", Div(1e6)),
    ("µm", Div(1e6)),
    ("mm", Div(1e3)),
    ("cm", Div(1e2)),
    ("ns", Div(1e9)),
    ("us", Div(1e6)),
    ("µs", Div(1e6)),
    ("ms", Div(1e3)),
    ("Pa", Mul(1.0)),
    ("W", Mul(1.0)),
    ("V", Mul(1.0)),
    ("K", Mul(1.0)),
    ("m", Mul(1.0)),
    ("s", Mul(1.0)),
];

/// Parses a number with an optional unit suffix into SI.
pub fn parse_quantity(text: &str) -> Result<f64, String> {
    let t = text.trim();
    if t.is_empty() {
        return Err("empty value".into());
    }
    if let Ok(v) = t.parse::<f64>() {
        return finite(v, text);
    }
    for (suffix, scale) in SUFFIXES {
        if let Some(num) = t.strip_suffix(suffix) {
            if let Ok(v) = num.trim().parse::<f64>() {
                let si = match scale {
                    Mul(f) => v * f,
                    Div(f) => v / f,
                };
                return finite(si, text);
            }
        }
    }
    Err(format!("cannot parse `{text}` as a number with a known unit"))
}

fn finite(v: f64, text: &str) -> Result<f64, String> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{text}` is not finite"))
    }
}

/// Parses a grid into SI values.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let t = text.trim();
    if t.contains(':') {
        let parts: Vec<&str> = t.split(':').map(str::trim).collect();
        if parts.len() < 3 || parts.len() > 4 {
            return Err(format!("range `{text}` must look like start:stop:count[:log]"));
        }
        let start = parse_quantity(parts[0])?;
        let stop = parse_quantity(parts[1])?;
        let mut count = None;
        let mut log = false;
        for p in &parts[2..] {
            match *p {
                "log" => log = true,
                "lin" => log = false,
                other => {
                    let n: usize = other
                        .parse()
                        .map_err(|_| format!("range `{text}`: `{other}` is not a point count"))?;
                    if count.replace(n).is_some() {
                        return Err(format!("range `{text}` has two point counts"));
                    }
                }
            }
        }
        let n = count.ok_or_else(|| format!("range `{text}` has no point count"))?;
        if n == 0 {
            return Err(format!("range `{text}` needs at least one point"));
        }
        if n == 1 {
            return Ok(vec![start]);
        }
        if log {
            if !(start > 0.0 && stop > 0.0) {
                return Err(format!("log range `{text}` needs positive end points"));
            }
            Ok(levitorque_core::numerics::logspace(start, stop, n))
        } else {
            Ok(levitorque_core::numerics::linspace(start, stop, n))
        }
    } else {
        t.split(',').map(parse_quantity).collect()
    }
}

/// Parses a grid of positive integers (`1:30:30`, `1,4,16`).
pub fn parse_counts(text: &str) -> Result<Vec<usize>, String> {
    parse_grid(text)?
        .into_iter()
        .map(|v| {
            let r = v.round();
            if r >= 1.0 && (v - r).abs() < 1e-9 {
                Ok(r as usize)
            } else {
                Err(format!("`{text}`: {v} is not a positive integer"))
            }
        })
        .collect()
}

/// Replaces every string in a TOML tree that parses as a quantity with its
/// SI value, so config files may use the same suffixes as flags.
pub fn normalize_toml(value: &mut toml::Value) {
    match value {
        toml::Value::String(s) => {
            if let Ok(v) = parse_quantity(s) {
                *value = toml::Value::Float(v);
            }
        }
        toml::Value::Array(items) => items.iter_mut().for_each(normalize_toml),
        toml::Value::Table(t) => t.iter_mut().for_each(|(_, v)| normalize_toml(v)),
        _ => {}
    }
}
