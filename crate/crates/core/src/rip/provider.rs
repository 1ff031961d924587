//! Tabulated asymptotic RIP bounds `(δ, ρ) → (L̄, Ū)`.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

const DEFAULT_TABLE: &str = include_str!("../../data/bt_gaussian.csv");
const HEADER_PREFIX: &str = "# rip-table v1;";

/// A rectangular `(δ, ρ)` grid of lower and upper bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RipTable {
    pub source: String,
    pub deltas: Vec<f64>,
    pub rhos: Vec<f64>,
    /// Row-major by δ then ρ.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

fn parse_err(path: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

impl RipTable {
    /// Parses the text format: a `# rip-table v1; source=...` header,
    /// optional `delta,rho,L,U` column line and `#` comments, then one
    /// row per knot sorted by `(delta, rho)` covering a full grid.
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| parse_err(path, 1, "empty table"))?;
        let rest = header
            .strip_prefix(HEADER_PREFIX)
            .ok_or_else(|| parse_err(path, 1, format!("header must start with '{HEADER_PREFIX}'")))?;
        let source = rest
            .split(';')
            .map(str::trim)
            .find_map(|kv| kv.strip_prefix("source="))
            .ok_or_else(|| parse_err(path, 1, "header lacks source=<string>"))?
            .to_string();

        let mut rows: Vec<(usize, [f64; 4])> = Vec::new();
        for (i, raw) in lines {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line == "delta,rho,L,U" {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(parse_err(path, lineno, format!("expected 4 fields, found {}", fields.len())));
            }
            let mut vals = [0.0; 4];
            for (slot, f) in vals.iter_mut().zip(&fields) {
                *slot = f
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| parse_err(path, lineno, format!("bad number '{f}': {e}")))?;
                if !slot.is_finite() {
                    return Err(parse_err(path, lineno, "non-finite value"));
                }
            }
            let [delta, rho, l, u] = vals;
            if !(delta > 0.0 && delta <= 1.0 && rho > 0.0 && rho <= 1.0) {
                return Err(parse_err(path, lineno, "delta and rho must lie in (0, 1]"));
            }
            if !(0.0..=1.0).contains(&l) || u < 0.0 {
                return Err(parse_err(path, lineno, "bounds must satisfy 0 <= L <= 1 and U >= 0"));
            }
            if let Some((_, prev)) = rows.last() {
                if (delta, rho) <= (prev[0], prev[1]) {
                    return Err(parse_err(path, lineno, "rows must be strictly sorted by (delta, rho)"));
                }
            }
            rows.push((lineno, vals));
        }
        if rows.is_empty() {
            return Err(parse_err(path, 1, "table has no rows"));
        }

        let mut deltas: Vec<f64> = rows.iter().map(|(_, r)| r[0]).collect();
        deltas.dedup();
        let rhos: Vec<f64> = rows.iter().take_while(|(_, r)| r[0] == deltas[0]).map(|(_, r)| r[1]).collect();
        if rows.len() != deltas.len() * rhos.len() {
            return Err(parse_err(path, rows.last().map_or(1, |r| r.0), "rows do not form a full (delta, rho) grid"));
        }
        for (idx, (lineno, r)) in rows.iter().enumerate() {
            if r[1] != rhos[idx % rhos.len()] {
                return Err(parse_err(path, *lineno, "rho knots differ between delta blocks"));
            }
        }
        let table = RipTable {
            source,
            deltas,
            rhos,
            lower: rows.iter().map(|(_, r)| r[2]).collect(),
            upper: rows.iter().map(|(_, r)| r[3]).collect(),
        };
        for (i, _) in table.deltas.iter().enumerate() {
            for j in 1..table.rhos.len() {
                if table.u(i, j) < table.u(i, j - 1) {
                    let lineno = rows[i * table.rhos.len() + j].0;
                    return Err(parse_err(path, lineno, "U decreases in rho; RIP bounds must be monotone"));
                }
            }
        }
        Ok(table)
    }

    fn u(&self, i: usize, j: usize) -> f64 {
        self.upper[i * self.rhos.len() + j]
    }

    fn l(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.rhos.len() + j]
    }

    fn locate(knots: &[f64], x: f64) -> Option<(usize, f64)> {
        let n = knots.len();
        if !(x >= knots[0] && x <= knots[n - 1]) {
            return None;
        }
        if n == 1 {
            return Some((0, 0.0));
        }
        let i = match knots.binary_search_by(|k| k.total_cmp(&x)) {
            Ok(i) => return Some((i.min(n - 2), if i == n - 1 { 1.0 } else { 0.0 })),
            Err(i) => i - 1,
        };
        Some((i, (x - knots[i]) / (knots[i + 1] - knots[i])))
    }

    /// Bilinear interpolation; exact at knots.
    pub fn query(&self, delta: f64, rho: f64) -> Option<(f64, f64)> {
        let (i, s) = Self::locate(&self.deltas, delta)?;
        let (j, t) = Self::locate(&self.rhos, rho)?;
        let i1 = (i + 1).min(self.deltas.len() - 1);
        let j1 = (j + 1).min(self.rhos.len() - 1);
        let lerp = |f: &dyn Fn(usize, usize) -> f64| {
            let a = f(i, j) + t * (f(i, j1) - f(i, j));
            let b = f(i1, j) + t * (f(i1, j1) - f(i1, j));
            a + s * (b - a)
        };
        let l = lerp(&|a, b| self.l(a, b));
        let u = lerp(&|a, b| self.u(a, b));
        Some((l, u))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RipBoundProvider {
    TableFile { id: String, table: RipTable },
    ConstantOverride { lower: f64, upper: f64 },
}

impl RipBoundProvider {
    /// The shipped Gaussian table.
    pub fn default_gaussian() -> Self {
        let table = RipTable::parse(DEFAULT_TABLE, "<builtin>").expect("builtin table is valid");
        RipBoundProvider::TableFile {
            id: format!("builtin:{}", table.source),
            table,
        }
    }

    pub fn from_table_text(text: &str, path: &str) -> Result<Self> {
        let table = RipTable::parse(text, path)?;
        Ok(RipBoundProvider::TableFile {
            id: format!("{path}:{}", table.source),
            table,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_table_text(&text, &path.display().to_string())
    }

    pub fn constant(lower: f64, upper: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lower) || !(upper >= 0.0) || !upper.is_finite() {
            return Err(Error::invalid(format!(
                "constant bounds need 0 <= L < 1 and U >= 0, got ({lower}, {upper})"
            )));
        }
        Ok(RipBoundProvider::ConstantOverride { lower, upper })
    }

    /// A copy with `du` added to every upper bound.
    pub fn shifted_upper(&self, du: f64) -> Result<Self> {
        match self {
            RipBoundProvider::ConstantOverride { lower, upper } => Self::constant(*lower, upper + du),
            RipBoundProvider::TableFile { id, table } => {
                let mut table = table.clone();
                for u in &mut table.upper {
                    *u += du;
                    if *u < 0.0 {
                        return Err(Error::invalid("shift makes an upper bound negative"));
                    }
                }
                Ok(RipBoundProvider::TableFile {
                    id: format!("{id}+U{du}"),
                    table,
                })
            }
        }
    }

    pub fn id(&self) -> String {
        match self {
            RipBoundProvider::TableFile { id, .. } => id.clone(),
            RipBoundProvider::ConstantOverride { lower, upper } => format!("constant(L={lower},U={upper})"),
        }
    }

    /// `(L̄(δ, ρ), Ū(δ, ρ))`.
    pub fn query(&self, delta: f64, rho: f64) -> Result<(f64, f64)> {
        match self {
            RipBoundProvider::ConstantOverride { lower, upper } => Ok((*lower, *upper)),
            RipBoundProvider::TableFile { id, table } => table.query(delta, rho).ok_or_else(|| {
                Error::domain(format!(
                    "(delta, rho) = ({delta}, {rho}) outside the hull of RIP table {id}"
                ))
            }),
        }
    }

    pub fn upper(&self, delta: f64, rho: f64) -> Result<f64> {
        Ok(self.query(delta, rho)?.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "# rip-table v1; source=test\n\
delta,rho,L,U\n\
0.5,0.1,0.2,0.3\n\
0.5,0.2,0.3,0.5\n\
1.0,0.1,0.1,0.2\n\
1.0,0.2,0.2,0.4\n";

    #[test]
    fn knots_and_midpoints() {
        let p = RipBoundProvider::from_table_text(SMALL, "t.csv").unwrap();
        assert_eq!(p.query(0.5, 0.2).unwrap(), (0.3, 0.5));
        assert_eq!(p.query(1.0, 0.1).unwrap(), (0.1, 0.2));
        let (l, u) = p.query(0.75, 0.15).unwrap();
        assert!((l - 0.2).abs() < 1e-15 && (u - 0.35).abs() < 1e-15);
        assert!(matches!(p.query(0.4, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn constant_provider() {
        let p = RipBoundProvider::constant(0.5, 0.5).unwrap();
        assert_eq!(p.query(0.01, 0.3).unwrap(), (0.5, 0.5));
    }

    #[test]
    fn rejects_bad_tables() {
        let decreasing = SMALL.replace("0.5,0.2,0.3,0.5", "0.5,0.2,0.3,0.1");
        assert!(matches!(
            RipTable::parse(&decreasing, "t"),
            Err(Error::Parse { line: 4, .. })
        ));
        let unsorted = "# rip-table v1; source=x\n1.0,0.1,0.1,0.1\n0.5,0.1,0.1,0.1\n";
        assert!(matches!(RipTable::parse(unsorted, "t"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(RipTable::parse("delta,rho\n", "t"), Err(Error::Parse { line: 1, .. })));
        let ragged = "# rip-table v1; source=x\n0.5,0.1,0.1,0.1\n0.5,0.2,0.1,0.2\n1.0,0.1,0.1,0.1\n";
        assert!(RipTable::parse(ragged, "t").is_err());
        assert!(RipTable::parse("# rip-table v1; source=x\n0.5,0.1,abc,0.1\n", "t").is_err());
    }

    #[test]
    fn builtin_table_loads() {
        let p = RipBoundProvider::default_gaussian();
        assert!(p.id().contains("bah-tanner-2010"));
        assert!(p.query(1.0, 1e-8).is_ok());
    }
}
