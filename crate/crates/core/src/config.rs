//! Run configuration: flat INI-style `key = value` lines with dotted sections.
//!
//! A key may be written in full (`grid.n = 128`) or inside a section header (`[grid]` then
//! `n = 128`). Blank lines and lines starting with `#` or `;` are ignored. Every diagnostic names
//! the line and the key.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::clifford::{MAX_DIM, MIN_DIM};
use crate::error::{Error, Result};
use crate::fields::{LatticeMatrixField, LatticeVectorField, MagneticSpec, PotentialKind, PotentialSpec, RadialProfile, SampledProfile};
use crate::hardy::{EpsilonBundle, Method, Theorem};
use crate::radial3d::{PersistenceCriteria, RadialGrid, SolveMethod};

/// Every accepted key with a one-line description (used for diagnostics and documentation).
pub const KEYS: &[(&str, &str)] = &[
    ("dimension", "space dimension d, 3..=9"),
    ("mass", "mass m >= 0"),
    ("seed", "random seed"),
    ("theorem", "general | electric | massless-electric | scalar | anomalous | anomalous-3d"),
    ("potential.family", "zero | matrix-coulomb | electric | scalar | anomalous | anomalous-3d | custom"),
    ("potential.nu", "matrix-coulomb coupling nu"),
    ("potential.mu", "matrix-coulomb coupling mu"),
    ("potential.delta", "matrix-coulomb coupling delta"),
    ("potential.profile", "power-law | sampled"),
    ("potential.c", "power-law amplitude c"),
    ("potential.sigma", "power-law exponent sigma >= 0"),
    ("potential.profile_path", "CSV with columns r,value"),
    ("potential.path", "CSV with columns x,y,z,row,col,re,im"),
    ("magnetic.family", "zero | rotational | custom"),
    ("magnetic.a", "rotational amplitude a"),
    ("magnetic.p", "rotational decay exponent p >= 0"),
    ("magnetic.path", "CSV with columns x,y,z,ax,ay,az"),
    ("eps.eps1", "user-supplied epsilon 1"),
    ("eps.eps2", "user-supplied epsilon 2"),
    ("eps.eps3", "user-supplied epsilon 3"),
    ("eps.eps4", "user-supplied epsilon 4"),
    ("eps.eps5", "user-supplied epsilon 5"),
    ("grid.L", "box half-extent for gridded checks"),
    ("grid.n", "points per axis for gridded checks, >= 32"),
    ("grid.r_min", "radial truncation near the origin"),
    ("grid.r_max", "radial truncation far out"),
    ("grid.radial_n", "radial cells, >= 64"),
    ("grid.staggered", "true | false"),
    ("spectrum.kappa", "partial-wave index, nonzero integer"),
    ("spectrum.window_lo", "lower end of the eigenvalue window"),
    ("spectrum.window_hi", "upper end of the eigenvalue window"),
    ("spectrum.drift", "largest relative drift for persistence"),
    ("spectrum.localization", "smallest localization for persistence"),
    ("spectrum.method", "auto | dense | sturm"),
    ("spectrum.oracle_tolerance", "relative tolerance for oracle agreement"),
    ("threshold.family", "coulomb-electric | coulomb-scalar | coulomb-anomalous | magnetic-inverse-square"),
    ("threshold.method", "auto | closed-form | bisection"),
    ("identities.spinors", "number of random spinors in the Hardy check"),
    ("sweep.kappa", "list of kappa values, e.g. -2,-1,1,2"),
    ("sweep.nu", "list or start:stop:count"),
    ("sweep.mu", "list or start:stop:count"),
    ("sweep.delta", "list or start:stop:count"),
    ("output.dir", "directory for report files"),
];

/// Raw `key → (value, line)` table.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
    base_dir: PathBuf,
}

fn config_error(line: usize, key: &str, msg: impl Into<String>) -> Error {
    Error::Config { line, key: key.into(), msg: msg.into() }
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') || s.starts_with(';') {
                continue;
            }
            if let Some(rest) = s.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| config_error(line, s, "section header is missing `]`"))?.trim();
                if name.is_empty() || name.contains(char::is_whitespace) {
                    return Err(config_error(line, name, "invalid section name"));
                }
                section = name.to_string();
                continue;
            }
            let (k, v) = s.split_once('=').ok_or_else(|| config_error(line, s, "expected `key = value`"))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(config_error(line, "", "empty key"));
            }
            let key = if section.is_empty() { k.to_string() } else { format!("{section}.{k}") };
            if !KEYS.iter().any(|(name, _)| *name == key) {
                return Err(config_error(line, &key, "unknown key"));
            }
            let value = v.split(" #").next().unwrap_or("").trim().to_string();
            if let Some((_, first)) = entries.get(&key) {
                return Err(config_error(line, &key, format!("duplicate key (first set on line {first})")));
            }
            entries.insert(key, (value, line));
        }
        Ok(RawConfig { entries, base_dir: PathBuf::from(".") })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config { line: 0, key: "--config".into(), msg: format!("cannot read {}: {e}", path.display()) })?;
        let mut raw = Self::parse(&text)?;
        raw.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(raw)
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |(_, l)| *l)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<T>().map(Some).map_err(|e| config_error(*line, key, format!("cannot parse `{v}`: {e}"))),
        }
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn path(&self, key: &str) -> Result<Option<PathBuf>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => {
                let p = self.base_dir.join(v);
                if !p.is_file() {
                    return Err(config_error(*line, key, format!("file `{}` does not exist", p.display())));
                }
                Ok(Some(p))
            }
        }
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        let Some((v, line)) = self.entries.get(key) else { return Ok(None) };
        let items: Vec<&str> = v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        if items.is_empty() {
            return Err(config_error(*line, key, "empty list"));
        }
        items
            .iter()
            .map(|s| s.parse::<T>().map_err(|e| config_error(*line, key, format!("cannot parse `{s}`: {e}"))))
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    /// A list `a,b,c` or an inclusive range `start:stop:count`.
    fn grid_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some((v, line)) = self.entries.get(key) else { return Ok(None) };
        if v.contains(':') {
            let parts: Vec<&str> = v.split(':').map(str::trim).collect();
            let bad = || config_error(*line, key, format!("expected start:stop:count, got `{v}`"));
            if parts.len() != 3 {
                return Err(bad());
            }
            let a: f64 = parts[0].parse().map_err(|_| bad())?;
            let b: f64 = parts[1].parse().map_err(|_| bad())?;
            let n: usize = parts[2].parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(bad());
            }
            if n == 1 {
                return Ok(Some(vec![a]));
            }
            return Ok(Some((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()));
        }
        self.list(key)
    }

    fn require_range(&self, key: &str, ok: bool, msg: &str) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(config_error(self.line_of(key), key, msg))
        }
    }
}

/// Potential section.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PotentialConfig {
    pub family: String,
    pub nu: f64,
    pub mu: f64,
    pub delta: f64,
    pub profile: String,
    pub c: f64,
    pub sigma: f64,
    pub profile_path: Option<PathBuf>,
    pub path: Option<PathBuf>,
}

/// Magnetic section.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MagneticConfig {
    pub family: String,
    pub a: f64,
    pub p: f64,
    pub path: Option<PathBuf>,
}

/// Spectrum section.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumConfig {
    pub kappa: i32,
    pub window: Option<(f64, f64)>,
    pub criteria: PersistenceCriteria,
    pub method: SolveMethod,
    pub oracle_tolerance: f64,
}

/// Sweep section.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepConfig {
    pub kappa: Vec<i32>,
    pub nu: Vec<f64>,
    pub mu: Vec<f64>,
    pub delta: Vec<f64>,
}

/// Fully typed configuration with defaults applied.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub dimension: usize,
    pub mass: f64,
    pub seed: u64,
    pub theorem: Theorem,
    pub potential: PotentialConfig,
    pub magnetic: MagneticConfig,
    pub eps: Option<[Option<f64>; 5]>,
    pub box_l: f64,
    pub box_n: usize,
    pub radial: RadialGrid,
    pub spectrum: SpectrumConfig,
    pub threshold_family: String,
    pub threshold_method: Method,
    pub spinors: usize,
    pub sweep: SweepConfig,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_raw(&RawConfig::default()).expect("defaults are valid")
    }
}

const POTENTIAL_FAMILIES: &[&str] = &["zero", "matrix-coulomb", "electric", "scalar", "anomalous", "anomalous-3d", "custom"];
const MAGNETIC_FAMILIES: &[&str] = &["zero", "rotational", "custom"];

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_raw(&RawConfig::parse(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_raw(&RawConfig::load(path)?)
    }

    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let dimension: usize = raw.get_or("dimension", 3)?;
        raw.require_range("dimension", (MIN_DIM..=MAX_DIM).contains(&dimension), "must lie in 3..=9")?;
        let mass: f64 = raw.get_or("mass", 0.0)?;
        raw.require_range("mass", mass >= 0.0 && mass.is_finite(), "must be finite and >= 0")?;
        let theorem = raw.get_or("theorem", Theorem::General)?;

        let family: String = raw.get_or("potential.family", "zero".to_string())?;
        raw.require_range("potential.family", POTENTIAL_FAMILIES.contains(&family.as_str()), &format!("expected one of {}", POTENTIAL_FAMILIES.join(", ")))?;
        let profile: String = raw.get_or("potential.profile", "power-law".to_string())?;
        raw.require_range("potential.profile", profile == "power-law" || profile == "sampled", "expected power-law or sampled")?;
        let sigma: f64 = raw.get_or("potential.sigma", 1.0)?;
        raw.require_range("potential.sigma", sigma >= 0.0 && sigma.is_finite(), "must be finite and >= 0")?;
        let potential = PotentialConfig {
            family,
            nu: raw.get_or("potential.nu", 0.0)?,
            mu: raw.get_or("potential.mu", 0.0)?,
            delta: raw.get_or("potential.delta", 0.0)?,
            c: raw.get_or("potential.c", 0.0)?,
            sigma,
            profile_path: raw.path("potential.profile_path")?,
            path: raw.path("potential.path")?,
            profile,
        };
        if potential.profile == "sampled" && potential.profile_path.is_none() && ["electric", "scalar", "anomalous", "anomalous-3d"].contains(&potential.family.as_str()) {
            return Err(config_error(raw.line_of("potential.profile"), "potential.profile_path", "required for a sampled profile"));
        }
        if potential.family == "custom" && potential.path.is_none() {
            return Err(config_error(raw.line_of("potential.family"), "potential.path", "required for the custom family"));
        }

        let mfamily: String = raw.get_or("magnetic.family", "zero".to_string())?;
        raw.require_range("magnetic.family", MAGNETIC_FAMILIES.contains(&mfamily.as_str()), "expected zero, rotational or custom")?;
        let p: f64 = raw.get_or("magnetic.p", 0.0)?;
        raw.require_range("magnetic.p", p >= 0.0 && p.is_finite(), "must be finite and >= 0")?;
        let magnetic = MagneticConfig { family: mfamily, a: raw.get_or("magnetic.a", 0.0)?, p, path: raw.path("magnetic.path")? };
        if magnetic.family == "custom" && magnetic.path.is_none() {
            return Err(config_error(raw.line_of("magnetic.family"), "magnetic.path", "required for the custom family"));
        }

        let mut eps = [None; 5];
        let mut any = false;
        for (slot, e) in eps.iter_mut().enumerate() {
            let key = format!("eps.eps{}", slot + 1);
            if let Some(v) = raw.get::<f64>(&key)? {
                raw.require_range(&key, v >= 0.0, "must be >= 0 (inf allowed)")?;
                *e = Some(v);
                any = true;
            }
        }

        let box_l: f64 = raw.get_or("grid.L", 8.0)?;
        raw.require_range("grid.L", box_l > 0.0 && box_l.is_finite(), "must be positive")?;
        let box_n: usize = raw.get_or("grid.n", 128)?;
        raw.require_range("grid.n", box_n >= 32, "must be >= 32")?;
        let defaults = RadialGrid::default();
        let radial = RadialGrid {
            r_min: raw.get_or("grid.r_min", defaults.r_min)?,
            r_max: raw.get_or("grid.r_max", defaults.r_max)?,
            n: raw.get_or("grid.radial_n", defaults.n)?,
            staggered: raw.get_or("grid.staggered", true)?,
        };
        raw.require_range("grid.r_min", radial.r_min > 0.0, "must be positive")?;
        raw.require_range("grid.r_max", radial.r_max > radial.r_min && radial.r_max.is_finite(), "must exceed grid.r_min")?;
        raw.require_range("grid.radial_n", radial.n >= 64, "must be >= 64")?;

        let kappa: i32 = raw.get_or("spectrum.kappa", -1)?;
        raw.require_range("spectrum.kappa", kappa != 0, "must be nonzero")?;
        let lo: Option<f64> = raw.get("spectrum.window_lo")?;
        let hi: Option<f64> = raw.get("spectrum.window_hi")?;
        let window = match (lo, hi) {
            (None, None) => None,
            (Some(a), Some(b)) if a < b => Some((a, b)),
            (Some(_), Some(_)) => return Err(config_error(raw.line_of("spectrum.window_hi"), "spectrum.window_hi", "must exceed spectrum.window_lo")),
            (Some(_), None) => return Err(config_error(raw.line_of("spectrum.window_lo"), "spectrum.window_hi", "both window ends are required")),
            (None, Some(_)) => return Err(config_error(raw.line_of("spectrum.window_hi"), "spectrum.window_lo", "both window ends are required")),
        };
        let dc = PersistenceCriteria::default();
        let criteria = PersistenceCriteria { drift: raw.get_or("spectrum.drift", dc.drift)?, localization: raw.get_or("spectrum.localization", dc.localization)? };
        raw.require_range("spectrum.drift", criteria.drift > 0.0, "must be positive")?;
        raw.require_range("spectrum.localization", (0.0..=1.0).contains(&criteria.localization), "must lie in [0, 1]")?;
        let method = match raw.get_or("spectrum.method", "auto".to_string())?.as_str() {
            "auto" => SolveMethod::Auto,
            "dense" => SolveMethod::Dense,
            "sturm" => SolveMethod::Sturm,
            other => return Err(config_error(raw.line_of("spectrum.method"), "spectrum.method", format!("unknown method `{other}`"))),
        };
        let oracle_tolerance: f64 = raw.get_or("spectrum.oracle_tolerance", 1e-3)?;
        raw.require_range("spectrum.oracle_tolerance", oracle_tolerance > 0.0, "must be positive")?;

        let spinors: usize = raw.get_or("identities.spinors", 20)?;
        raw.require_range("identities.spinors", spinors >= 1, "must be >= 1")?;

        let sweep = SweepConfig {
            kappa: raw.list("sweep.kappa")?.unwrap_or_else(|| vec![kappa]),
            nu: raw.grid_list("sweep.nu")?.unwrap_or_else(|| vec![potential.nu]),
            mu: raw.grid_list("sweep.mu")?.unwrap_or_else(|| vec![potential.mu]),
            delta: raw.grid_list("sweep.delta")?.unwrap_or_else(|| vec![potential.delta]),
        };
        raw.require_range("sweep.kappa", sweep.kappa.iter().all(|k| *k != 0), "kappa values must be nonzero")?;

        Ok(RunConfig {
            dimension,
            mass,
            seed: raw.get_or("seed", 0)?,
            theorem,
            potential,
            magnetic,
            eps: any.then_some(eps),
            box_l,
            box_n,
            radial,
            spectrum: SpectrumConfig { kappa, window, criteria, method, oracle_tolerance },
            threshold_family: raw.get_or("threshold.family", "coulomb-electric".to_string())?,
            threshold_method: raw.get_or("threshold.method", Method::Auto)?,
            spinors,
            sweep,
            output_dir: raw.get::<String>("output.dir")?.map(|d| raw.base_dir.join(d)),
        })
    }

    fn profile(&self, power_c: f64) -> Result<RadialProfile> {
        match &self.potential.profile_path {
            Some(p) if self.potential.profile == "sampled" => Ok(RadialProfile::Sampled(SampledProfile::from_csv(p)?)),
            _ => RadialProfile::power_law(power_c, self.potential.sigma),
        }
    }

    pub fn magnetic_spec(&self) -> Result<MagneticSpec> {
        match self.magnetic.family.as_str() {
            "zero" => Ok(MagneticSpec::zero(self.dimension)),
            "rotational" => {
                if self.dimension != 3 {
                    return Err(Error::Mismatch("the rotational field needs dimension = 3".into()));
                }
                MagneticSpec::rotational(self.magnetic.a, self.magnetic.p)
            }
            _ => {
                let path = self.magnetic.path.as_ref().expect("validated");
                let spec = MagneticSpec { d: self.dimension, kind: crate::fields::MagneticKind::Custom(LatticeVectorField::from_csv(path)?), gauge: None };
                spec.validate()?;
                Ok(spec)
            }
        }
    }

    pub fn potential_spec(&self) -> Result<PotentialSpec> {
        let p = &self.potential;
        let kind = match p.family.as_str() {
            "zero" => PotentialKind::Zero,
            "matrix-coulomb" => PotentialKind::MatrixCoulomb { nu: p.nu, mu: p.mu, delta: p.delta },
            "electric" => PotentialKind::Electric(self.profile(p.c)?),
            "scalar" => PotentialKind::Scalar(self.profile(p.c)?),
            "anomalous" => PotentialKind::Anomalous(self.profile(p.c)?),
            "anomalous-3d" => PotentialKind::Anomalous3d { phi_prime: self.profile(p.c)?, magnetic: self.magnetic_spec()? },
            _ => PotentialKind::Custom(LatticeMatrixField::from_csv(p.path.as_ref().expect("validated"), 4)?),
        };
        PotentialSpec::new(self.dimension, kind)
    }

    pub fn supplied_eps(&self) -> Result<Option<EpsilonBundle>> {
        self.eps.map(EpsilonBundle::supplied).transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_apply() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c.dimension, 3);
        assert_eq!(c.potential.family, "zero");
        assert_eq!(c.radial, RadialGrid::default());
        assert_eq!(c.spectrum.kappa, -1);
        assert_eq!(c.spectrum.criteria, PersistenceCriteria::default());
    }

    #[test]
    fn sections_and_dotted_keys_are_equivalent() {
        let a = RunConfig::parse("[potential]\nfamily = matrix-coulomb\nnu = -0.5\n[grid]\nradial_n = 512\n").unwrap();
        let b = RunConfig::parse("potential.family = matrix-coulomb\npotential.nu = -0.5 # comment\ngrid.radial_n = 512\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.potential.nu, -0.5);
        assert_eq!(a.radial.n, 512);
    }

    #[test]
    fn diagnostics_name_line_and_key() {
        let err = RunConfig::parse("mass = 1\n\n[grid]\nn = many\n").unwrap_err();
        match err {
            Error::Config { line, key, .. } => {
                assert_eq!(line, 4);
                assert_eq!(key, "grid.n");
            }
            e => panic!("{e}"),
        }
        let err = RunConfig::parse("# c\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, ref key, .. } if key == "bogus"));
        let err = RunConfig::parse("mass = 1\nmass = 2\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }));
        let err = RunConfig::parse("dimension = 12\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, ref key, .. } if key == "dimension"));
        let err = RunConfig::parse("potential.profile_path = /no/such/file.csv\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }));
        assert!(RunConfig::parse("[grid\n").is_err());
        assert!(RunConfig::parse("just words\n").is_err());
    }

    #[test]
    fn sweep_lists_and_ranges() {
        let c = RunConfig::parse("sweep.kappa = -2, -1, 1, 2\nsweep.nu = -0.5:-0.1:5\n").unwrap();
        assert_eq!(c.sweep.kappa, vec![-2, -1, 1, 2]);
        assert_eq!(c.sweep.nu.len(), 5);
        assert!((c.sweep.nu[4] + 0.1).abs() < 1e-15);
        assert!(RunConfig::parse("sweep.nu = 1:2\n").is_err());
        assert!(RunConfig::parse("sweep.kappa = 0\n").is_err());
    }

    #[test]
    fn epsilon_overrides_and_field_families() {
        let c = RunConfig::parse("eps.eps2 = 0.2\neps.eps4 = inf\ntheorem = massless-electric\n").unwrap();
        let b = c.supplied_eps().unwrap().unwrap();
        assert_eq!(b.value(1), Some(0.2));
        assert_eq!(b.value(3), Some(f64::INFINITY));
        assert_eq!(b.value(0), None);
        assert_eq!(c.theorem, Theorem::MasslessElectric);
        let c = RunConfig::parse("potential.family = matrix-coulomb\npotential.nu = 0.1\nmagnetic.family = rotational\nmagnetic.a = 0.2\n").unwrap();
        assert!(c.potential_spec().is_ok());
        assert!(c.magnetic_spec().is_ok());
    }
}
