//! Configuration schema for linear-form systems, lattices, regions, and
//! restriction polytopes, plus the built-in standard setup.
//!
//! File format (TOML):
//!
//! ```toml
//! lattice_basis = [1, 0, 0, 1]               # two generator columns
//! forms = [[1, 0], [0, 1], [1, 1], [-1, 1]]  # integer coefficient pairs
//! denominators = [1, 1, 1, 1]
//! region_vertices = [["0", "0"], ["1", "1"], ["0", "1"]]
//!
//! [[polytope_halfspaces]]
//! dimension = 4
//! coeffs = ["1", "1", "1", "1"]
//! bound = "1"
//! ```
//!
//! Rational entries accept integers, `"p/q"` strings, or decimal strings.

use anyhow::{anyhow, bail, Context, Result};
use dp4::divsum::{Coord, Halfspace, Region, RestrictionPolytope};
use dp4::lattice::{Lattice2, LinearFormSystem};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub lattice_basis: [i64; 4],
    pub forms: [[i64; 2]; 4],
    pub denominators: [u64; 4],
    pub region_vertices: Vec<[RationalValue; 2]>,
    #[serde(default)]
    pub polytope_halfspaces: Vec<HalfspaceConfig>,
    /// Restriction polytope dimension; defaults to 4.
    #[serde(default = "default_dim")]
    pub polytope_dimension: usize,
}

fn default_dim() -> usize {
    4
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceConfig {
    pub coeffs: Vec<RationalValue>,
    pub bound: RationalValue,
}

/// A rational in TOML: integer, `"p/q"`, or decimal string.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum RationalValue {
    Integer(i64),
    Text(String),
}

impl RationalValue {
    pub fn to_coord(&self) -> Result<Coord> {
        match self {
            RationalValue::Integer(n) => Ok(Coord::from_integer(*n as i128)),
            RationalValue::Text(s) => parse_rational(s),
        }
    }
}

/// Parse `p/q`, a plain integer, or a decimal like `-0.25` exactly.
pub fn parse_rational(s: &str) -> Result<Coord> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: i128 = num.trim().parse().context("rational numerator")?;
        let d: i128 = den.trim().parse().context("rational denominator")?;
        if d == 0 {
            bail!("rational with zero denominator: {s}");
        }
        return Ok(Coord::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let ipart: i128 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().context("decimal integer part")?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            bail!("malformed decimal: {s}");
        }
        let scale = 10i128
            .checked_pow(frac.len() as u32)
            .ok_or_else(|| anyhow!("decimal too long: {s}"))?;
        let fpart: i128 = frac.parse().context("decimal fraction part")?;
        let num = ipart * scale + if neg { -fpart } else { fpart };
        return Ok(Coord::new(num, scale));
    }
    let n: i128 = s.parse().with_context(|| format!("not a rational: {s}"))?;
    Ok(Coord::from_integer(n))
}

/// A fully assembled problem setup.
#[derive(Debug)]
pub struct Setup {
    pub lattice: Lattice2,
    pub system: LinearFormSystem,
    pub region: Region,
    pub polytope: RestrictionPolytope,
}

impl ConfigFile {
    pub fn into_setup(self) -> Result<Setup> {
        let [a, b, c, d] = self.lattice_basis;
        let lattice = Lattice2::new([[a, b], [c, d]])
            .map_err(|e| anyhow!("field lattice_basis: {e}"))?;
        let system = LinearFormSystem::new(self.forms, self.denominators)
            .map_err(|e| anyhow!("fields forms/denominators: {e}"))?;
        let mut vertices = Vec::with_capacity(self.region_vertices.len());
        for (i, v) in self.region_vertices.iter().enumerate() {
            let x = v[0]
                .to_coord()
                .with_context(|| format!("region_vertices[{i}][0]"))?;
            let y = v[1]
                .to_coord()
                .with_context(|| format!("region_vertices[{i}][1]"))?;
            vertices.push((x, y));
        }
        let region = Region::new(vertices).map_err(|e| anyhow!("field region_vertices: {e}"))?;
        let dim = self.polytope_dimension;
        let mut halfspaces = Vec::with_capacity(self.polytope_halfspaces.len());
        for (i, h) in self.polytope_halfspaces.iter().enumerate() {
            if h.coeffs.len() != dim {
                bail!(
                    "polytope_halfspaces[{i}]: expected {dim} coefficients, got {}",
                    h.coeffs.len()
                );
            }
            let coeffs = h
                .coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    c.to_coord()
                        .with_context(|| format!("polytope_halfspaces[{i}].coeffs[{j}]"))
                })
                .collect::<Result<Vec<_>>>()?;
            let bound = h
                .bound
                .to_coord()
                .with_context(|| format!("polytope_halfspaces[{i}].bound"))?;
            halfspaces.push(Halfspace { coeffs, bound });
        }
        let polytope = RestrictionPolytope::new(dim, halfspaces)
            .map_err(|e| anyhow!("field polytope_halfspaces: {e}"))?;
        Ok(Setup {
            lattice,
            system,
            region,
            polytope,
        })
    }
}

pub fn load_config(path: &std::path::Path) -> Result<Setup> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let cfg: ConfigFile = toml::from_str(&text)
        .with_context(|| format!("parsing config {}", path.display()))?;
    cfg.into_setup()
}

/// The built-in setup: the standard forms `(a, b, b+a, b-a)` on Z^2 over
/// the triangle `0 <= a <= b <= 1` (all four forms nonnegative there) with
/// the unrestricted exponent cube.
pub fn builtin_dp4() -> Setup {
    Setup {
        lattice: Lattice2::standard(),
        system: LinearFormSystem::standard(),
        region: Region::from_integer_vertices(&[(0, 0), (1, 1), (0, 1)])
            .expect("builtin region is valid"),
        polytope: RestrictionPolytope::full_cube(4).expect("cube is valid"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("3").unwrap(), Coord::from_integer(3));
        assert_eq!(parse_rational("-2/4").unwrap(), Coord::new(-1, 2));
        assert_eq!(parse_rational("0.25").unwrap(), Coord::new(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), Coord::new(-3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn builtin_is_consistent() {
        let s = builtin_dp4();
        assert!(s.system.is_standard());
        assert!(s.region.forms_nonneg(&s.system));
        assert!(s.polytope.is_unrestricted());
    }

    #[test]
    fn toml_roundtrip() {
        let text = r#"
lattice_basis = [1, 0, 0, 1]
forms = [[1, 0], [0, 1], [1, 1], [-1, 1]]
denominators = [1, 1, 1, 1]
region_vertices = [["0", "0"], ["1", "1"], ["0", "1"]]

[[polytope_halfspaces]]
coeffs = ["1", "1", "1", "1"]
bound = "1/2"
"#;
        let cfg: ConfigFile = toml::from_str(text).unwrap();
        let setup = cfg.into_setup().unwrap();
        assert!(setup.system.is_standard());
        assert_eq!(setup.polytope.halfspaces().len(), 1);
    }

    #[test]
    fn malformed_config_reports_field() {
        let text = r#"
lattice_basis = [1, 0, 0, 1]
forms = [[1, 0], [2, 0], [1, 1], [-1, 1]]
denominators = [1, 1, 1, 1]
region_vertices = [["0", "0"], ["1", "1"], ["0", "1"]]
"#;
        let cfg: ConfigFile = toml::from_str(text).unwrap();
        let err = cfg.into_setup().unwrap_err().to_string();
        assert!(err.contains("forms"), "got: {err}");
    }
}
