//! Value parsers and shared option groups.

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clap::{Args, ValueEnum};
use msbem::assembly::QuadratureConfig;
use msbem::geometry::{make_junction_screen, make_typeb_screen, MultiScreen};
use msbem::solver::SolveConfig;
use msbem::spaces::{Problem, Reduction};
use num_complex::Complex64 as c64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProblemArg {
    Dirichlet,
    Neumann,
}

impl From<ProblemArg> for Problem {
    fn from(p: ProblemArg) -> Self {
        match p {
            ProblemArg::Dirichlet => Problem::Dirichlet,
            ProblemArg::Neumann => Problem::Neumann,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PrecondArg {
    On,
    Off,
    Both,
}

impl PrecondArg {
    /// Unpreconditioned first, matching the order rows are written in.
    pub fn modes(self) -> &'static [bool] {
        match self {
            PrecondArg::On => &[true],
            PrecondArg::Off => &[false],
            PrecondArg::Both => &[false, true],
        }
    }
}

/// Wavenumber: `re`, `re+imi`, `re-imi`, or the presets `lf` (1) and `mf` (10).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kappa(pub c64);

impl FromStr for Kappa {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let s = s.trim();
        let k = match s {
            "lf" => c64::new(1.0, 0.0),
            "mf" => c64::new(10.0, 0.0),
            _ => match s.strip_suffix('i') {
                None => c64::new(s.parse().with_context(|| format!("bad wavenumber '{s}'"))?, 0.0),
                Some(body) => {
                    // The sign separating the parts, skipping a leading sign and exponents.
                    let cut = body
                        .char_indices()
                        .skip(1)
                        .filter(|&(i, ch)| (ch == '+' || ch == '-') && !matches!(body.as_bytes()[i - 1], b'e' | b'E'))
                        .map(|(i, _)| i)
                        .last()
                        .ok_or_else(|| anyhow!("bad wavenumber '{s}': expected re+imi"))?;
                    let re: f64 = body[..cut].parse().with_context(|| format!("bad real part in '{s}'"))?;
                    let im: f64 = body[cut..].parse().with_context(|| format!("bad imaginary part in '{s}'"))?;
                    c64::new(re, im)
                }
            },
        };
        if !(k.re >= 0.0) || !k.im.is_finite() {
            bail!("wavenumber '{s}' must have a nonnegative real part");
        }
        Ok(Kappa(k))
    }
}

impl fmt::Display for Kappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.0;
        if k.im == 0.0 {
            write!(f, "{}", k.re)
        } else if k.im > 0.0 {
            write!(f, "{}+{}i", k.re, k.im)
        } else {
            write!(f, "{}{}i", k.re, k.im)
        }
    }
}

/// `trijunction`, `mjunction:m` or `typeb`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    Junction(usize),
    TypeB,
}

impl Geometry {
    pub fn build(self, h: f64) -> msbem::Result<MultiScreen> {
        match self {
            Geometry::Junction(m) => make_junction_screen(m, 1.0, h),
            Geometry::TypeB => make_typeb_screen(h),
        }
    }
}

impl FromStr for Geometry {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "trijunction" => Ok(Geometry::Junction(3)),
            "typeb" => Ok(Geometry::TypeB),
            _ => {
                let m: usize = s
                    .strip_prefix("mjunction:")
                    .ok_or_else(|| anyhow!("unknown geometry '{s}' (trijunction, mjunction:m, typeb)"))?
                    .parse()
                    .with_context(|| format!("bad sheet count in '{s}'"))?;
                if m < 3 {
                    bail!("mjunction needs at least 3 sheets, got {m}");
                }
                Ok(Geometry::Junction(m))
            }
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::Junction(3) => f.write_str("trijunction"),
            Geometry::Junction(m) => write!(f, "mjunction:{m}"),
            Geometry::TypeB => f.write_str("typeb"),
        }
    }
}

/// A reduction name; bare `fixed-overlap` takes a quarter of the unit side.
pub fn parse_reduction(s: &str) -> anyhow::Result<Reduction> {
    if s == "fixed-overlap" {
        return Ok(Reduction::FixedOverlap(0.25));
    }
    Ok(s.parse::<Reduction>()?)
}

pub fn parse_h(s: &str) -> anyhow::Result<f64> {
    let h: f64 = s.parse().with_context(|| format!("bad mesh width '{s}'"))?;
    if !(h > 0.0 && h <= 1.0) {
        bail!("mesh width {h} must lie in (0, 1]");
    }
    Ok(h)
}

pub fn check_decreasing(hs: &[f64]) -> anyhow::Result<()> {
    if hs.is_empty() {
        bail!("h list is empty");
    }
    if hs.windows(2).any(|w| w[1] >= w[0]) {
        bail!("h list must be strictly decreasing, got {hs:?}");
    }
    Ok(())
}

/// A point `x,y,z`.
pub fn parse_point(s: &str) -> anyhow::Result<[f64; 3]> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad point '{s}'"))?;
    match v[..] {
        [x, y, z] => Ok([x, y, z]),
        _ => bail!("point '{s}' needs three coordinates"),
    }
}

/// Tolerances, iteration caps and quadrature shared by the solving verbs.
#[derive(Args, Clone, Debug)]
pub struct SolverOpts {
    /// Outer GMRES relative residual tolerance.
    #[arg(long, default_value_t = 2.0e-5)]
    pub tol: f64,
    /// Relative tolerance of the inner Gram solves.
    #[arg(long, default_value_t = 2.0e-12)]
    pub inner_tol: f64,
    #[arg(long, default_value_t = 2000)]
    pub max_outer: usize,
    #[arg(long, default_value_t = 2000)]
    pub max_inner: usize,
    /// Gauss order of singular and near-singular pairs of the system matrix.
    #[arg(long, default_value_t = 5)]
    pub order: usize,
    /// Gauss order of well-separated pairs of the system matrix.
    #[arg(long, default_value_t = 3)]
    pub regular_order: usize,
    /// Gauss order of singular pairs in the preconditioner blocks.
    #[arg(long, default_value_t = 4)]
    pub precond_order: usize,
    /// Incident direction `x,y,z` (unit length); defaults to -z on typeb, +z otherwise.
    #[arg(long, value_parser = parse_point)]
    pub direction: Option<[f64; 3]>,
}

impl SolverOpts {
    pub fn config(&self, geometry: Geometry) -> anyhow::Result<SolveConfig> {
        let base = SolveConfig::default();
        let direction = self.direction.unwrap_or(match geometry {
            Geometry::TypeB => [0.0, 0.0, -1.0],
            Geometry::Junction(_) => [0.0, 0.0, 1.0],
        });
        let cfg = SolveConfig {
            outer_tol: self.tol,
            inner_tol: self.inner_tol,
            max_outer: self.max_outer,
            max_inner: self.max_inner,
            quadrature: QuadratureConfig {
                order: self.order,
                regular_order: self.regular_order,
                ..base.quadrature
            },
            precond_quadrature: QuadratureConfig {
                order: self.precond_order,
                ..base.precond_quadrature
            },
            direction,
            ..base
        };
        cfg.validate()?;
        cfg.wave(c64::new(1.0, 0.0))?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_forms() {
        assert_eq!("lf".parse::<Kappa>().unwrap().0, c64::new(1.0, 0.0));
        assert_eq!("mf".parse::<Kappa>().unwrap().0, c64::new(10.0, 0.0));
        assert_eq!("2.5".parse::<Kappa>().unwrap().0, c64::new(2.5, 0.0));
        assert_eq!("1+0.5i".parse::<Kappa>().unwrap().0, c64::new(1.0, 0.5));
        assert_eq!("1-0.5i".parse::<Kappa>().unwrap().0, c64::new(1.0, -0.5));
        assert_eq!("1e1+2e-1i".parse::<Kappa>().unwrap().0, c64::new(10.0, 0.2));
        assert!("-1".parse::<Kappa>().is_err());
        assert!("abc".parse::<Kappa>().is_err());
        assert!("1+i".parse::<Kappa>().is_err());
        for s in ["1", "1+0.5i", "3-2i"] {
            assert_eq!(s.parse::<Kappa>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn geometry_forms() {
        assert_eq!("trijunction".parse::<Geometry>().unwrap(), Geometry::Junction(3));
        assert_eq!("mjunction:5".parse::<Geometry>().unwrap(), Geometry::Junction(5));
        assert_eq!("typeb".parse::<Geometry>().unwrap(), Geometry::TypeB);
        assert!("mjunction:2".parse::<Geometry>().is_err());
        assert!("cube".parse::<Geometry>().is_err());
        assert_eq!(Geometry::Junction(5).to_string(), "mjunction:5");
    }

    #[test]
    fn h_lists() {
        assert!(check_decreasing(&[0.4, 0.2, 0.1]).is_ok());
        assert!(check_decreasing(&[0.2, 0.2]).is_err());
        assert!(check_decreasing(&[]).is_err());
        assert!(parse_h("0").is_err());
        assert!(parse_point("1,2").is_err());
        assert_eq!(parse_point("1, 2, -3").unwrap(), [1.0, 2.0, -3.0]);
    }
}
