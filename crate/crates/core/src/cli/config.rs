//! Sectioned `key = value` experiment configuration.
//!
//! Sections and keys are closed sets; anything else is rejected. Values are
//! kept as text until a command asks for them, so a command only validates
//! the sections it actually uses.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::{Ini, ParseOption};
use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::dynamics::{Translation, TorusFibration};
use crate::error::{Error, Result};
use crate::fit::geometric_grid;
use crate::geometry::{DensitySpec, DensityTerm, FamilyConfig};
use crate::node_integral::{default_t_grid, parse_eta, EtaSpec, QuadSettings};
use crate::spectral::{SpectrumOptions, DEFAULT_K_PER_MODE, DEFAULT_M_MAX};

pub const SCHEMA: &[(&str, &[&str])] = &[
    ("family", &["n", "areas", "neck_length", "fat_circumference", "smoothing_width", "necks", "neck_law_factor"]),
    ("density.alpha", &["fat", "neck", "terms", "random"]),
    ("density.beta", &["fat", "neck", "terms", "random"]),
    ("solver", &["resolution", "m_max", "k_per_mode", "project", "seed", "green_tail"]),
    ("sweep", &["l", "l_grid", "fit_window"]),
    ("output", &["dir", "precision"]),
    (
        "dynamics",
        &[
            "tau", "translation", "r_min", "r_max", "n_radial", "n_angular", "fiber_res", "allow_constant", "checkpoints", "n_list", "s0",
            "step", "rho", "phi", "alpha", "u",
        ],
    ),
    ("node", &["e11", "e22", "e21", "e12", "cutoff", "per_decade", "angular", "tol", "t_grid"]),
];

fn allowed(section: &str, key: &str) -> Result<()> {
    let keys = SCHEMA
        .iter()
        .find(|(s, _)| *s == section)
        .map(|(_, k)| *k)
        .ok_or_else(|| Error::Parse(format!("unknown config section [{section}]")))?;
    if !keys.contains(&key) {
        return Err(Error::Parse(format!("unknown key '{key}' in section [{section}]")));
    }
    Ok(())
}

/// Raw configuration: section → key → value, after overrides.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let opt = ParseOption { enabled_quote: false, enabled_escape: false, ..ParseOption::default() };
        let ini = Ini::load_from_str_opt(text, opt).map_err(|e| Error::Parse(format!("config: {e}")))?;
        let mut cfg = Config::default();
        let mut seen_sections = std::collections::BTreeSet::new();
        for (name, props) in ini.iter() {
            let Some(name) = name else {
                if let Some((k, _)) = props.iter().next() {
                    return Err(Error::Parse(format!("key '{k}' appears before any section")));
                }
                continue;
            };
            if !seen_sections.insert(name.to_string()) {
                return Err(Error::Parse(format!("duplicate section [{name}]")));
            }
            for (key, value) in props.iter() {
                allowed(name, key)?;
                if props.get_all(key).count() > 1 {
                    return Err(Error::Parse(format!("duplicate key '{key}' in section [{name}]")));
                }
                cfg.sections.entry(name.to_string()).or_default().insert(key.to_string(), value.trim().to_string());
            }
            cfg.sections.entry(name.to_string()).or_default();
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies `section.key=value`; the section is everything before the last
    /// dot of the left-hand side.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (lhs, value) = spec.split_once('=').ok_or_else(|| Error::Parse(format!("override '{spec}' is not section.key=value")))?;
        let (section, key) = lhs.trim().rsplit_once('.').ok_or_else(|| Error::Parse(format!("override '{spec}' has no section")))?;
        allowed(section, key)?;
        self.set(section, key, value.trim());
        Ok(())
    }

    pub fn set(&mut self, section: &str, key: &str, value: &str) {
        self.sections.entry(section.to_string()).or_default().insert(key.to_string(), value.to_string());
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| Error::Parse(format!("[{section}] {key} = '{v}' is not a valid value"))),
        }
    }

    fn parsed_or<T: FromStr>(&self, section: &str, key: &str, default: T) -> Result<T> {
        Ok(self.parsed(section, key)?.unwrap_or(default))
    }

    fn list<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<Vec<T>>> {
        self.get(section, key).map(|v| parse_list(v).map_err(|e| Error::Parse(format!("[{section}] {key}: {e}")))).transpose()
    }

    /// Canonical `section.key=value` lines in sorted order, without the
    /// output directory.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (s, keys) in &self.sections {
            for (k, v) in keys {
                if s == "output" && k == "dir" {
                    continue;
                }
                out.push_str(&format!("{s}.{k}={v}\n"));
            }
        }
        out
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn family(&self) -> Result<FamilyConfig> {
        let s = "family";
        let mut fam = match (self.list::<f64>(s, "areas")?, self.parsed::<usize>(s, "n")?) {
            (Some(a), None) => FamilyConfig::with_areas(a),
            (Some(a), Some(n)) if a.len() == n => FamilyConfig::with_areas(a),
            (Some(a), Some(n)) => return Err(Error::Validation(format!("[family] n = {n} but {} areas given", a.len()))),
            (None, n) => FamilyConfig::reduced_cycle(n.unwrap_or(2)),
        };
        fam.neck_length = self.parsed_or(s, "neck_length", fam.neck_length)?;
        fam.fat_circumference = self.parsed_or(s, "fat_circumference", fam.fat_circumference)?;
        fam.smoothing_width = self.parsed_or(s, "smoothing_width", fam.smoothing_width)?;
        fam.necks = self.parsed_or(s, "necks", fam.necks)?;
        fam.neck_law_factor = self.parsed_or(s, "neck_law_factor", fam.neck_law_factor)?;
        fam.validate()?;
        Ok(fam)
    }

    pub fn density(&self, which: &str) -> Result<DensityInput> {
        let s = format!("density.{which}");
        if !self.has_section(&s) {
            return Err(Error::Validation(format!("command needs section [{s}]")));
        }
        if let Some(r) = self.get(&s, "random") {
            let condition2 = match r {
                "c1" => false,
                "c2" => true,
                other => return Err(Error::Parse(format!("[{s}] random must be c1 or c2, got '{other}'"))),
            };
            if self.get(&s, "fat").is_some() || self.get(&s, "neck").is_some() || self.get(&s, "terms").is_some() {
                return Err(Error::Validation(format!("[{s}] random cannot be combined with explicit entries")));
            }
            return Ok(DensityInput::Random { condition2 });
        }
        let fat = self.list::<f64>(&s, "fat")?.unwrap_or_default();
        let neck = self.list::<f64>(&s, "neck")?.unwrap_or_default();
        let terms = match self.get(&s, "terms") {
            Some(t) => parse_density_terms(t)?,
            None => Vec::new(),
        };
        Ok(DensityInput::Explicit(DensitySpec { fat, neck, terms }))
    }

    pub fn solver(&self) -> Result<SolverSettings> {
        let s = "solver";
        let k_per_mode = match self.get(s, "k_per_mode") {
            None | Some("all") => DEFAULT_K_PER_MODE,
            Some(_) => self.parsed::<usize>(s, "k_per_mode")?.unwrap_or(DEFAULT_K_PER_MODE),
        };
        let out = SolverSettings {
            resolution: self.parsed_or(s, "resolution", 32)?,
            spectrum: SpectrumOptions { m_max: self.parsed_or(s, "m_max", DEFAULT_M_MAX)?, k_per_mode },
            project: self.parsed_or(s, "project", false)?,
            seed: self.parsed(s, "seed")?,
            green_tail: self.parsed(s, "green_tail")?,
        };
        if out.resolution < 2 {
            return Err(Error::Validation("[solver] resolution must be at least 2".into()));
        }
        Ok(out)
    }

    pub fn l_param(&self) -> Result<f64> {
        self.parsed::<f64>("sweep", "l")?.ok_or_else(|| Error::Validation("command needs [sweep] l".into()))
    }

    pub fn l_grid(&self) -> Result<Vec<f64>> {
        let v = self.get("sweep", "l_grid").ok_or_else(|| Error::Validation("command needs [sweep] l_grid".into()))?;
        parse_grid(v, false)
    }

    pub fn fit_window(&self) -> Result<Option<(f64, f64)>> {
        match self.get("sweep", "fit_window") {
            None => Ok(None),
            Some(v) => parse_window(v).map(Some),
        }
    }

    pub fn output(&self) -> Result<OutputSettings> {
        let precision = self.parsed_or("output", "precision", 17usize)?;
        if !(1..=17).contains(&precision) {
            return Err(Error::Validation("[output] precision must be between 1 and 17 significant digits".into()));
        }
        Ok(OutputSettings { dir: self.get("output", "dir").map(PathBuf::from), precision })
    }

    pub fn fibration(&self) -> Result<TorusFibration> {
        let s = "dynamics";
        let d = TorusFibration::default();
        let translation = match self.list::<Complex64>(s, "translation")? {
            Some(c) if !c.is_empty() => Translation { coeffs: c },
            Some(_) => return Err(Error::Parse("[dynamics] translation needs at least one coefficient".into())),
            None => d.translation.clone(),
        };
        let fib = TorusFibration {
            tau: self.parsed_or(s, "tau", d.tau)?,
            translation,
            r_min: self.parsed_or(s, "r_min", d.r_min)?,
            r_max: self.parsed_or(s, "r_max", d.r_max)?,
            n_radial: self.parsed_or(s, "n_radial", d.n_radial)?,
            n_angular: self.parsed_or(s, "n_angular", d.n_angular)?,
            fiber_res: self.parsed_or(s, "fiber_res", d.fiber_res)?,
            allow_constant: self.parsed_or(s, "allow_constant", d.allow_constant)?,
        };
        fib.validate()?;
        Ok(fib)
    }

    pub fn dynamics(&self) -> Result<DynamicsSettings> {
        let s = "dynamics";
        let terms = |key: &str, default: &str| parse_trig_terms(self.get(s, key).unwrap_or(default));
        let u = match self.get(s, "u").unwrap_or("re") {
            "re" => BaseFunction::Re,
            "im" => BaseFunction::Im,
            "abs2" => BaseFunction::Abs2,
            "zero" => BaseFunction::Zero,
            other => return Err(Error::Parse(format!("[dynamics] u must be re, im, abs2 or zero, got '{other}'"))),
        };
        Ok(DynamicsSettings {
            checkpoints: self.list(s, "checkpoints")?.unwrap_or_else(|| vec![100, 200, 1000, 2000, 10_000]),
            n_list: self.list(s, "n_list")?.unwrap_or_else(|| vec![64, 128, 256, 512, 1024]),
            s0: self.parsed_or(s, "s0", Complex64::new(0.5, 0.3))?,
            step: self.parsed(s, "step")?,
            rho: terms("rho", "1 sin 1 0 * sin 0 1")?,
            phi: terms("phi", "0.3 sin 1 0 * cos 0 1")?,
            alpha: terms("alpha", "1 cos 1 0 re, 0.5 sin 1 1 im")?,
            u,
        })
    }

    pub fn eta(&self) -> Result<EtaSpec> {
        let parts: Vec<String> = ["e11", "e22", "e21", "e12", "cutoff"]
            .iter()
            .filter_map(|k| self.get("node", k).map(|v| format!("{k} = {v}")))
            .collect();
        if parts.is_empty() {
            return Err(Error::Validation("command needs η: pass --eta or set [node] e11/e22/e21".into()));
        }
        parse_eta(&parts.join("; "))
    }

    pub fn quad(&self) -> Result<QuadSettings> {
        let d = QuadSettings::default();
        Ok(QuadSettings {
            per_decade: self.parsed_or("node", "per_decade", d.per_decade)?,
            angular: self.parsed_or("node", "angular", d.angular)?,
            tol: self.parsed_or("node", "tol", d.tol)?,
        })
    }

    pub fn t_grid(&self) -> Result<Vec<Complex64>> {
        let v = self.get("node", "t_grid").unwrap_or("1e-6:1e-2:13");
        if let Some((lo, hi, n)) = parse_range(v)? {
            return Ok(default_t_grid(lo.min(hi), lo.max(hi), n));
        }
        let mut t = parse_list::<f64>(v).map_err(|e| Error::Parse(format!("[node] t_grid: {e}")))?;
        t.sort_by(|a, b| b.total_cmp(a));
        Ok(t.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DensityInput {
    Explicit(DensitySpec),
    /// Seeded random density; Condition 2 when `condition2`.
    Random { condition2: bool },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings {
    pub resolution: usize,
    pub spectrum: SpectrumOptions,
    pub project: bool,
    pub seed: Option<u64>,
    pub green_tail: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSettings {
    pub dir: Option<PathBuf>,
    /// Significant digits of numeric CSV cells.
    pub precision: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseFunction {
    Re,
    Im,
    Abs2,
    Zero,
}

impl BaseFunction {
    pub fn eval(self, s: Complex64) -> f64 {
        match self {
            BaseFunction::Re => s.re,
            BaseFunction::Im => s.im,
            BaseFunction::Abs2 => s.norm_sqr(),
            BaseFunction::Zero => 0.0,
        }
    }
}

/// `cos(2π(jx + ky))` or `sin(2π(jx + ky))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wave {
    pub sine: bool,
    pub j: i64,
    pub k: i64,
}

impl Wave {
    fn eval(&self, x: f64, y: f64) -> f64 {
        let a = 2.0 * std::f64::consts::PI * (self.j as f64 * x + self.k as f64 * y);
        if self.sine {
            a.sin()
        } else {
            a.cos()
        }
    }
}

/// `amp · Π waves`, optionally multiplied by a base function.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigTerm {
    pub amplitude: f64,
    pub waves: Vec<Wave>,
    pub base: Option<BaseFunction>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrigSum(pub Vec<TrigTerm>);

impl TrigSum {
    pub fn eval(&self, s: Complex64, x: f64, y: f64) -> f64 {
        self.0
            .iter()
            .map(|t| t.amplitude * t.base.map_or(1.0, |b| b.eval(s)) * t.waves.iter().map(|w| w.eval(x, y)).product::<f64>())
            .sum()
    }

    pub fn fiber(&self, x: f64, y: f64) -> f64 {
        self.eval(Complex64::new(1.0, 0.0), x, y)
    }

    pub fn depends_on_base(&self) -> bool {
        self.0.iter().any(|t| t.base.is_some())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsSettings {
    pub checkpoints: Vec<usize>,
    pub n_list: Vec<usize>,
    pub s0: Complex64,
    pub step: Option<f64>,
    pub rho: TrigSum,
    pub phi: TrigSum,
    pub alpha: TrigSum,
    pub u: BaseFunction,
}

/// Comma-separated list.
pub fn parse_list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| format!("cannot parse '{s}'")))
        .collect()
}

fn parse_range(v: &str) -> Result<Option<(f64, f64, usize)>> {
    let parts: Vec<&str> = v.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [a, b, n] => {
            let bad = || Error::Parse(format!("grid '{v}' is not lo:hi:n"));
            let lo: f64 = a.parse().map_err(|_| bad())?;
            let hi: f64 = b.parse().map_err(|_| bad())?;
            let n: usize = n.parse().map_err(|_| bad())?;
            if !(lo > 0.0 && hi > 0.0) || n < 2 {
                return Err(Error::Validation(format!("grid '{v}' needs positive bounds and n ≥ 2")));
            }
            Ok(Some((lo, hi, n)))
        }
        _ => Ok(None),
    }
}

/// `lo:hi:n` (geometric) or an explicit comma list, returned increasing
/// unless `keep_order`.
pub fn parse_grid(v: &str, keep_order: bool) -> Result<Vec<f64>> {
    if let Some((lo, hi, n)) = parse_range(v)? {
        return Ok(geometric_grid(lo.min(hi), lo.max(hi), n));
    }
    let mut g: Vec<f64> = parse_list(v).map_err(|e| Error::Parse(format!("grid: {e}")))?;
    if g.is_empty() {
        return Err(Error::Validation("grid is empty".into()));
    }
    if !keep_order {
        g.sort_by(f64::total_cmp);
    }
    Ok(g)
}

pub fn parse_window(v: &str) -> Result<(f64, f64)> {
    let parts: Vec<f64> = v
        .split([':', ','])
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("fit window '{v}' is not lo:hi"))))
        .collect::<Result<_>>()?;
    match parts.as_slice() {
        [a, b] if a < b => Ok((*a, *b)),
        _ => Err(Error::Parse(format!("fit window '{v}' is not lo:hi with lo < hi"))),
    }
}

/// `fatsine c amp k`, `fatcos c amp k`, `globalcos amp f`, `globalsin amp f`,
/// comma separated.
pub fn parse_density_terms(v: &str) -> Result<Vec<DensityTerm>> {
    let mut out = Vec::new();
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let tok: Vec<&str> = item.split_whitespace().collect();
        let bad = || Error::Parse(format!("density term '{item}' is malformed"));
        let f = |i: usize| tok.get(i).and_then(|s| s.parse::<f64>().ok()).ok_or_else(bad);
        let u = |i: usize| tok.get(i).and_then(|s| s.parse::<usize>().ok()).ok_or_else(bad);
        let term = match (tok.first().copied(), tok.len()) {
            (Some("fatsine"), 4) => DensityTerm::FatSine { component: u(1)?, amplitude: f(2)?, wavenumber: u(3)? as u32 },
            (Some("fatcos"), 4) => DensityTerm::FatCos { component: u(1)?, amplitude: f(2)?, wavenumber: u(3)? as u32 },
            (Some("globalcos"), 3) => DensityTerm::GlobalCos { amplitude: f(1)?, frequency: f(2)? },
            (Some("globalsin"), 3) => DensityTerm::GlobalSin { amplitude: f(1)?, frequency: f(2)? },
            _ => return Err(bad()),
        };
        out.push(term);
    }
    Ok(out)
}

/// Comma-separated terms `amp cos|sin j k [* cos|sin j k …] [re|im|abs2]`.
pub fn parse_trig_terms(v: &str) -> Result<TrigSum> {
    let mut out = Vec::new();
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || Error::Parse(format!("trigonometric term '{item}' is malformed"));
        let mut tok: Vec<&str> = item.split_whitespace().filter(|t| *t != "*").collect();
        let base = match tok.last().copied() {
            Some("re") => Some(BaseFunction::Re),
            Some("im") => Some(BaseFunction::Im),
            Some("abs2") => Some(BaseFunction::Abs2),
            _ => None,
        };
        if base.is_some() {
            tok.pop();
        }
        let amplitude: f64 = tok.first().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let rest = &tok[1..];
        if rest.is_empty() || rest.len() % 3 != 0 {
            return Err(bad());
        }
        let waves = rest
            .chunks(3)
            .map(|c| {
                let sine = match c[0] {
                    "sin" => true,
                    "cos" => false,
                    _ => return Err(bad()),
                };
                Ok(Wave { sine, j: c[1].parse().map_err(|_| bad())?, k: c[2].parse().map_err(|_| bad())? })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(TrigTerm { amplitude, waves, base });
    }
    Ok(TrigSum(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unknown_sections_and_keys() {
        assert!(Config::parse("[bogus]\nx = 1\n").is_err());
        assert!(Config::parse("[family]\nwidth = 1\n").is_err());
        assert!(Config::parse("x = 1\n[family]\nn = 2\n").is_err());
        assert!(Config::parse("[family]\nn = 2\nn = 3\n").is_err());
    }

    #[test]
    fn reads_family_and_overrides() {
        let mut c = Config::parse("[family]\nn = 3\nneck_length = 0.5\n").unwrap();
        c.apply_override("family.neck_law_factor=2").unwrap();
        let f = c.family().unwrap();
        assert_eq!(f.areas.len(), 3);
        assert_eq!(f.neck_length, 0.5);
        assert_eq!(f.neck_law_factor, 2.0);
        assert!(c.apply_override("family.nope=1").is_err());
    }

    #[test]
    fn dotted_section_override() {
        let mut c = Config::default();
        c.apply_override("density.alpha.fat = 1, -1").unwrap();
        match c.density("alpha").unwrap() {
            DensityInput::Explicit(s) => assert_eq!(s.fat, vec![1.0, -1.0]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hash_ignores_key_order() {
        let a = Config::parse("[family]\nn = 2\nneck_length = 1\n").unwrap();
        let b = Config::parse("[family]\nneck_length = 1\nn = 2\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("200, 50, 100", false).unwrap(), vec![50.0, 100.0, 200.0]);
        let g = parse_grid("50:200:3", false).unwrap();
        assert!((g[1] - 100.0).abs() < 1e-12);
        assert_eq!(parse_window("50:200").unwrap(), (50.0, 200.0));
        assert!(parse_window("200:50").is_err());
    }

    #[test]
    fn trig_terms() {
        let t = parse_trig_terms("2 sin 1 0 * cos 0 1 re, 0.5 cos 0 2").unwrap();
        let s = Complex64::new(0.5, 0.0);
        let v = t.eval(s, 0.25, 0.0);
        assert!((v - (2.0 * 0.5 + 0.5)).abs() < 1e-12);
        assert!(t.depends_on_base());
        assert!(parse_trig_terms("1 tan 1 0").is_err());
    }

    #[test]
    fn density_terms() {
        let t = parse_density_terms("fatsine 0 1.5 2, globalcos 1 1").unwrap();
        assert_eq!(t[0], DensityTerm::FatSine { component: 0, amplitude: 1.5, wavenumber: 2 });
        assert!(parse_density_terms("fatsine 0 1.5").is_err());
    }
}
