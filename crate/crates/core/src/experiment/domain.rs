//! Textual domain descriptions such as `joukowski:0.5` or `polygon:4`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::conformal::{
    build_disk, build_equipotential, build_interior_polynomial, build_joukowski, build_regular_polygon,
    build_sc_exterior, triangle_corners, CornerSpec, ExteriorMapSeries, InteriorMapSeries,
};
use crate::error::{invalid, Error, Result};

/// A domain family with its parameters.
///
/// Accepted forms: `disk`, `joukowski:C`, `polygon:M` (also `square`,
/// `triangle`), `triangle:A1,A2,A3` (interior angle fractions), `mixed`
/// (`triangle:0.1,0.4,0.5`), `equipotential:R:SPEC`, `interior:F1,F2,...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DomainSpec {
    Disk,
    Joukowski(f64),
    Polygon(usize),
    Triangle([f64; 3]),
    Equipotential(f64, Box<DomainSpec>),
    Interior(Vec<f64>),
}

impl DomainSpec {
    pub fn square() -> Self {
        DomainSpec::Polygon(4)
    }

    pub fn mixed() -> Self {
        DomainSpec::Triangle([0.1, 0.4, 0.5])
    }

    /// Corners of the boundary (empty for analytic curves).
    pub fn corners(&self) -> Result<Vec<CornerSpec>> {
        match self {
            DomainSpec::Polygon(m) => Ok(build_regular_polygon(*m, 1)?.corners().to_vec()),
            DomainSpec::Triangle(a) => triangle_corners(*a),
            _ => Ok(Vec::new()),
        }
    }

    pub fn has_corners(&self) -> bool {
        matches!(self, DomainSpec::Polygon(_) | DomainSpec::Triangle(_))
    }

    /// Exterior map, with `truncation` coefficients for series families.
    pub fn exterior(&self, truncation: usize) -> Result<ExteriorMapSeries> {
        match self {
            DomainSpec::Disk => Ok(build_disk()),
            DomainSpec::Joukowski(c) => build_joukowski(*c),
            DomainSpec::Polygon(m) => build_regular_polygon(*m, truncation),
            DomainSpec::Triangle(a) => build_sc_exterior(&triangle_corners(*a)?, truncation),
            DomainSpec::Equipotential(r, inner) => build_equipotential(&inner.exterior(truncation)?, *r),
            DomainSpec::Interior(_) => Err(invalid("an interior polynomial has no exterior map here")),
        }
    }

    pub fn interior(&self) -> Result<InteriorMapSeries> {
        match self {
            DomainSpec::Interior(f) => {
                let c: Vec<c64> = f.iter().map(|&x| c64::new(x, 0.0)).collect();
                build_interior_polynomial(&c)
            }
            DomainSpec::Disk => build_interior_polynomial(&[c64::new(1.0, 0.0)]),
            _ => Err(invalid(format!("`{self}` is not given by an interior polynomial"))),
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Config(format!("bad number `{t}`: {e}"))))
        .collect()
}

impl FromStr for DomainSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        let need = |what: &str| rest.ok_or_else(|| Error::Config(format!("`{head}` needs {what}, e.g. `{head}:...`")));
        match head.to_ascii_lowercase().as_str() {
            "disk" | "circle" => Ok(DomainSpec::Disk),
            "square" => Ok(DomainSpec::Polygon(4)),
            "mixed" => Ok(DomainSpec::mixed()),
            "joukowski" | "ellipse" => {
                let c = parse_list(need("a parameter")?)?;
                match c.as_slice() {
                    [c] if (0.0..1.0).contains(c) => Ok(DomainSpec::Joukowski(*c)),
                    _ => Err(Error::Config(format!("joukowski needs one parameter in [0, 1), got `{s}`"))),
                }
            }
            "polygon" => {
                let m: usize = need("a corner count")?
                    .trim()
                    .parse()
                    .map_err(|e| Error::Config(format!("bad corner count in `{s}`: {e}")))?;
                if m < 3 {
                    return Err(Error::Config("a polygon needs at least 3 corners".into()));
                }
                Ok(DomainSpec::Polygon(m))
            }
            "triangle" => match rest {
                None => Ok(DomainSpec::Polygon(3)),
                Some(r) => match parse_list(r)?.as_slice() {
                    [a, b, c] => Ok(DomainSpec::Triangle([*a, *b, *c])),
                    _ => Err(Error::Config(format!("triangle needs three angle fractions, got `{s}`"))),
                },
            },
            "equipotential" => {
                let (r, inner) = need("a radius and a domain")?
                    .split_once(':')
                    .ok_or_else(|| Error::Config(format!("expected `equipotential:R:DOMAIN`, got `{s}`")))?;
                let r: f64 = r.parse().map_err(|e| Error::Config(format!("bad radius `{r}`: {e}")))?;
                if !(r > 1.0) {
                    return Err(Error::Config(format!("equipotential radius {r} must exceed 1")));
                }
                Ok(DomainSpec::Equipotential(r, Box::new(inner.parse()?)))
            }
            "interior" => Ok(DomainSpec::Interior(parse_list(need("coefficients")?)?)),
            other => Err(Error::Config(format!("unknown domain family `{other}`"))),
        }
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainSpec::Disk => write!(f, "disk"),
            DomainSpec::Joukowski(c) => write!(f, "joukowski:{c}"),
            DomainSpec::Polygon(m) => write!(f, "polygon:{m}"),
            DomainSpec::Triangle([a, b, c]) => write!(f, "triangle:{a},{b},{c}"),
            DomainSpec::Equipotential(r, inner) => write!(f, "equipotential:{r}:{inner}"),
            DomainSpec::Interior(c) => {
                let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                write!(f, "interior:{}", parts.join(","))
            }
        }
    }
}

impl TryFrom<String> for DomainSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DomainSpec> for String {
    fn from(d: DomainSpec) -> String {
        d.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for s in ["disk", "joukowski:0.5", "polygon:4", "triangle:0.1,0.4,0.5", "equipotential:1.25:polygon:4", "interior:1,0.2"] {
            let d: DomainSpec = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert_eq!("square".parse::<DomainSpec>().unwrap(), DomainSpec::Polygon(4));
        assert_eq!("mixed".parse::<DomainSpec>().unwrap(), DomainSpec::mixed());
        assert!("joukowski:1.5".parse::<DomainSpec>().is_err());
        assert!("blob".parse::<DomainSpec>().is_err());
    }

    #[test]
    fn mixed_corners_close() {
        let c = DomainSpec::mixed().corners().unwrap();
        assert_eq!(c.len(), 3);
        assert!(DomainSpec::mixed().exterior(64).is_ok());
    }
}
