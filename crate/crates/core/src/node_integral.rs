//! Fiber integrals of `log|z₁|² η` over `{z₁z₂ = t}` in the closed unit polydisk.
//!
//! The fiber is the annulus `|t| ≤ |z₁| ≤ 1`. It is cut at `|z₁| = ρ` into
//! `V₁ = {|z₁| ≥ ρ}` (chart `z₁`) and `V₂ = {|z₂| ≥ |t|/ρ}` (chart `z₂`);
//! the default cut is `ρ = |t|^{1/2}`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{validation, Error, Result};
use nalgebra::{DMatrix, DVector};

use crate::fit::{scan_fit, LineFit};
use crate::quadrature::{gauss_legendre, gauss_legendre_on};

/// Monomial `c · z₁^a z̄₁^b z₂^c z̄₂^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: Complex64,
    pub powers: [u32; 4],
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    pub terms: Vec<Term>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self { terms: vec![Term { coeff: Complex64::new(c, 0.0), powers: [0; 4] }] }
    }

    pub fn monomial(c: Complex64, powers: [u32; 4]) -> Self {
        Self { terms: vec![Term { coeff: c, powers }] }
    }

    pub fn eval(&self, z1: Complex64, z2: Complex64) -> Complex64 {
        let vars = [z1, z1.conj(), z2, z2.conj()];
        self.terms
            .iter()
            .map(|t| t.powers.iter().zip(&vars).fold(t.coeff, |acc, (&p, v)| acc * v.powi(p as i32)))
            .sum()
    }

    /// Complex conjugate polynomial.
    pub fn conj(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term { coeff: t.coeff.conj(), powers: [t.powers[1], t.powers[0], t.powers[3], t.powers[2]] })
            .collect();
        Self { terms }
    }

    /// Merges equal monomials and drops zeros.
    pub fn canonical(&self) -> Self {
        let mut terms: Vec<Term> = Vec::new();
        for t in &self.terms {
            match terms.iter_mut().find(|u| u.powers == t.powers) {
                Some(u) => u.coeff += t.coeff,
                None => terms.push(t.clone()),
            }
        }
        terms.retain(|t| t.coeff.norm() != 0.0);
        terms.sort_by_key(|t| t.powers);
        Self { terms }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { terms: self.terms.iter().map(|t| Term { coeff: t.coeff * c, powers: t.powers }).collect() }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { terms }.canonical()
    }

    pub fn is_zero(&self) -> bool {
        self.canonical().terms.is_empty()
    }

    /// True when the polynomial takes real values.
    pub fn is_real(&self) -> bool {
        let a = self.canonical();
        let b = self.conj().canonical();
        a.terms.len() == b.terms.len()
            && a.terms.iter().zip(&b.terms).all(|(x, y)| x.powers == y.powers && (x.coeff - y.coeff).norm() <= 1e-14 * x.coeff.norm().max(1.0))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.canonical();
        if c.terms.is_empty() {
            return write!(f, "0");
        }
        const NAMES: [&str; 4] = ["z1", "zb1", "z2", "zb2"];
        let mut first = true;
        for t in &c.terms {
            let parts = [(t.coeff.re, ""), (t.coeff.im, "i")];
            for (v, suffix) in parts.iter().filter(|(v, s)| *v != 0.0 || (s.is_empty() && t.coeff.im == 0.0)) {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "{v}{suffix}")?;
                for (p, name) in t.powers.iter().zip(NAMES) {
                    match p {
                        0 => {}
                        1 => write!(f, "*{name}")?,
                        _ => write!(f, "*{name}^{p}")?,
                    }
                }
            }
        }
        Ok(())
    }
}

/// Parses `term + term + …` where a term is a `*`-product of real numbers,
/// imaginary numbers (`0.5i`) and variables `z1 zb1 z2 zb2` with optional `^k`.
pub fn parse_poly(src: &str) -> Result<Poly> {
    let mut terms = Vec::new();
    let src = src.trim().replace(" - ", " + -");
    if src.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    for raw in src.split('+') {
        let raw = raw.trim();
        if raw.is_empty() {
            return Err(Error::Parse(format!("empty term in '{src}'")));
        }
        let mut coeff = Complex64::new(1.0, 0.0);
        let mut powers = [0u32; 4];
        for factor in raw.split('*') {
            let factor = factor.trim();
            let (base, exp) = match factor.split_once('^') {
                Some((b, e)) => (b.trim(), e.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad exponent in '{factor}'")))?),
                None => (factor, 1),
            };
            let slot = match base {
                "z1" => Some(0),
                "zb1" => Some(1),
                "z2" => Some(2),
                "zb2" => Some(3),
                _ => None,
            };
            if let Some(k) = slot {
                powers[k] += exp;
                continue;
            }
            let value = if let Some(im) = base.strip_suffix('i') {
                let v = if im.is_empty() || im == "-" { if im == "-" { -1.0 } else { 1.0 } } else { im.parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{base}'")))? };
                Complex64::new(0.0, v)
            } else {
                Complex64::new(base.parse::<f64>().map_err(|_| Error::Parse(format!("bad factor '{base}'")))?, 0.0)
            };
            coeff *= value.powi(exp as i32);
        }
        terms.push(Term { coeff, powers });
    }
    Ok(Poly { terms }.canonical())
}

/// Radial cutoff `χ(|z₁|)χ(|z₂|)` with `χ = 1` on `[0, inner]` and a `C^∞`
/// transition to 0 at 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cutoff {
    pub inner: f64,
}

impl Cutoff {
    fn chi(&self, r: f64) -> f64 {
        if r <= self.inner {
            1.0
        } else if r >= 1.0 {
            0.0
        } else {
            let x = (1.0 - r) / (1.0 - self.inner);
            let psi = |u: f64| if u > 0.0 { (-1.0 / u).exp() } else { 0.0 };
            psi(x) / (psi(x) + psi(1.0 - x))
        }
    }
}

/// `η = (i/2) Σ η_{kl̄} dz_k ∧ dz̄_l`, stored as `η_{11̄}`, `η_{22̄}`, `η_{21̄}`
/// with `η_{12̄} = conj(η_{21̄})`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EtaSpec {
    pub e11: Poly,
    pub e22: Poly,
    pub e21: Poly,
    pub cutoff: Option<Cutoff>,
}

impl EtaSpec {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `η_{22̄} = 1`, others zero.
    pub fn constant_22() -> Self {
        Self { e22: Poly::constant(1.0), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.e11.is_real() || !self.e22.is_real() {
            return validation("η_{11̄} and η_{22̄} must be real-valued (Hermitian symmetry)");
        }
        if let Some(c) = self.cutoff {
            if !(0.0..1.0).contains(&c.inner) {
                return validation("cutoff inner radius must lie in [0, 1)");
            }
        }
        Ok(())
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self { e11: self.e11.plus(&other.e11), e22: self.e22.plus(&other.e22), e21: self.e21.plus(&other.e21), cutoff: self.cutoff.or(other.cutoff) }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { e11: self.e11.scaled(c), e22: self.e22.scaled(c), e21: self.e21.scaled(c), cutoff: self.cutoff }
    }

    /// Radii where the cutoff changes regime, in either chart.
    fn breaks(&self, t: Complex64) -> Vec<f64> {
        match self.cutoff {
            Some(c) if c.inner > 0.0 => vec![c.inner, t.norm() / c.inner],
            _ => Vec::new(),
        }
    }

    fn weight(&self, z1: Complex64, z2: Complex64) -> f64 {
        self.cutoff.map_or(1.0, |c| c.chi(z1.norm()) * c.chi(z2.norm()))
    }

    /// Density of `η|_{z₁z₂=t}` w.r.t. `dA(z₁)` at `z₁`.
    pub fn density_chart1(&self, z1: Complex64, t: Complex64) -> f64 {
        let z2 = t / z1;
        let dz2 = -t / (z1 * z1);
        let v = self.e11.eval(z1, z2).re + 2.0 * (self.e21.eval(z1, z2) * dz2).re + self.e22.eval(z1, z2).re * dz2.norm_sqr();
        v * self.weight(z1, z2)
    }

    /// Density of `η|_{z₁z₂=t}` w.r.t. `dA(z₂)` at `z₂`.
    pub fn density_chart2(&self, z2: Complex64, t: Complex64) -> f64 {
        let z1 = t / z2;
        let dz1 = -t / (z2 * z2);
        let v = self.e22.eval(z1, z2).re + 2.0 * (self.e21.eval(z1, z2).conj() * dz1).re + self.e11.eval(z1, z2).re * dz1.norm_sqr();
        v * self.weight(z1, z2)
    }
}

/// Parses `e11=…; e22=…; e21=…` (missing entries are zero).
pub fn parse_eta(src: &str) -> Result<EtaSpec> {
    let mut eta = EtaSpec::zero();
    for part in src.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, val) = part.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=poly in '{part}'")))?;
        let poly = parse_poly(val)?;
        match key.trim() {
            "e11" => eta.e11 = poly,
            "e22" => eta.e22 = poly,
            "e21" => eta.e21 = poly,
            "e12" => eta.e21 = poly.conj(),
            "cutoff" => {
                let c = poly.canonical();
                let inner = match c.terms.as_slice() {
                    [] => 0.0,
                    [t] if t.powers == [0; 4] && t.coeff.im == 0.0 => t.coeff.re,
                    _ => return Err(Error::Parse("cutoff expects a real number".into())),
                };
                eta.cutoff = Some(Cutoff { inner });
            }
            other => return Err(Error::Parse(format!("unknown η entry '{other}'"))),
        }
    }
    eta.validate()?;
    Ok(eta)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadSettings {
    /// Radial Gauss–Legendre nodes per decade of `|z|`.
    pub per_decade: usize,
    pub angular: usize,
    /// Relative tolerance for the node-doubling check.
    pub tol: f64,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self { per_decade: 32, angular: 64, tol: 1e-8 }
    }
}

const PANEL: usize = 8;

/// `∫_{r_a ≤ |z| ≤ r_b} g(z) dA` on log-spaced Gauss panels and a trapezoid in θ.
/// Interior `breaks` start new panel runs.
fn annulus_integral(r_a: f64, r_b: f64, breaks: &[f64], q: &QuadSettings, g: impl Fn(Complex64, f64) -> f64) -> f64 {
    if r_b <= r_a {
        return 0.0;
    }
    let mut cuts: Vec<f64> = vec![r_a.ln()];
    cuts.extend(breaks.iter().filter(|&&b| r_a < b && b < r_b).map(|b| b.ln()));
    cuts.push(r_b.ln());
    cuts.sort_by(f64::total_cmp);
    let (nodes, weights) = gauss_legendre(PANEL);
    let na = q.angular;
    let dtheta = 2.0 * PI / na as f64;
    let rays: Vec<Complex64> = (0..na).map(|k| Complex64::from_polar(1.0, k as f64 * dtheta)).collect();
    let min_panels = if breaks.is_empty() { 1 } else { q.per_decade / 2 };
    let mut total = 0.0;
    for seg in cuts.windows(2) {
        let (xa, xb) = (seg[0], seg[1]);
        let decades = (xb - xa) / std::f64::consts::LN_10;
        let panels = ((decades * q.per_decade as f64 / PANEL as f64).ceil() as usize).max(min_panels);
        let h = (xb - xa) / panels as f64;
        for p in 0..panels {
            let lo = xa + p as f64 * h;
            for (x, w) in nodes.iter().zip(&weights) {
                let lx = lo + 0.5 * h * (x + 1.0);
                let r = lx.exp();
                let ring: f64 = rays.iter().map(|e| g(e * r, r)).sum::<f64>() * dtheta;
                total += 0.5 * h * w * r * r * ring;
            }
        }
    }
    total
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeSample {
    pub t: Complex64,
    pub value: f64,
    pub v1: f64,
    pub v2: f64,
    /// Change of `value` when radial nodes are doubled.
    pub refinement_change: f64,
}

fn check_t(t: Complex64) -> Result<()> {
    if !(t.norm() > 0.0 && t.norm() < 1.0) {
        return validation(format!("node parameter needs 0 < |t| < 1, got |t| = {}", t.norm()));
    }
    Ok(())
}

fn split_parts(eta: &EtaSpec, t: Complex64, split: f64, q: &QuadSettings, with_log: bool) -> (f64, f64) {
    let at = t.norm();
    let lt = at.ln() * 2.0;
    let breaks = eta.breaks(t);
    let v1 = annulus_integral(split, 1.0, &breaks, q, |z1, r| {
        let w = if with_log { 2.0 * r.ln() } else { 1.0 };
        w * eta.density_chart1(z1, t)
    });
    let v2 = annulus_integral(at / split, 1.0, &breaks, q, |z2, r| {
        let w = if with_log { lt - 2.0 * r.ln() } else { 1.0 };
        w * eta.density_chart2(z2, t)
    });
    (v1, v2)
}

fn refined(q: &QuadSettings) -> QuadSettings {
    QuadSettings { per_decade: 2 * q.per_decade, ..*q }
}

fn sample(eta: &EtaSpec, t: Complex64, split_factor: f64, q: &QuadSettings, with_log: bool) -> Result<NodeSample> {
    eta.validate()?;
    check_t(t)?;
    let split = split_factor * t.norm().sqrt();
    if !(t.norm() < split && split <= 1.0) {
        return validation("split radius must lie in (|t|, 1]");
    }
    let (v1, v2) = split_parts(eta, t, split, q, with_log);
    let (w1, w2) = split_parts(eta, t, split, &refined(q), with_log);
    let value = v1 + v2;
    let refinement_change = ((w1 + w2) - value).abs();
    if refinement_change > q.tol * value.abs().max(1.0) {
        return Err(Error::NonConvergence(format!("node integral at |t| = {:.3e}: node doubling changed the value by {refinement_change:.3e}", t.norm())));
    }
    Ok(NodeSample { t, value, v1, v2, refinement_change })
}

/// `I(t) = ∫_{z₁z₂=t} log|z₁|² η` split at `|z₁| = |t|^{1/2}`.
pub fn fiber_annulus_integral(eta: &EtaSpec, t: Complex64, q: &QuadSettings) -> Result<NodeSample> {
    sample(eta, t, 1.0, q, true)
}

/// Same integral with the cut at `split_factor · |t|^{1/2}`.
pub fn fiber_annulus_integral_split(eta: &EtaSpec, t: Complex64, split_factor: f64, q: &QuadSettings) -> Result<NodeSample> {
    sample(eta, t, split_factor, q, true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chart {
    Z1,
    Z2,
}

/// `I(t)` over the whole fiber in a single chart.
pub fn fiber_integral_single_chart(eta: &EtaSpec, t: Complex64, chart: Chart, q: &QuadSettings) -> Result<f64> {
    eta.validate()?;
    check_t(t)?;
    let at = t.norm();
    let lt = 2.0 * at.ln();
    Ok(match chart {
        Chart::Z1 => annulus_integral(at, 1.0, &eta.breaks(t), q, |z1, r| 2.0 * r.ln() * eta.density_chart1(z1, t)),
        Chart::Z2 => annulus_integral(at, 1.0, &eta.breaks(t), q, |z2, r| (lt - 2.0 * r.ln()) * eta.density_chart2(z2, t)),
    })
}

/// `A_ref = ∫_{z₁=0} η = ∫_{|z₂|≤1} η_{22̄}(0, z₂) dA` by a tensor Gauss rule in `(r, θ)`.
pub fn reference_log_coefficient(eta: &EtaSpec, n: usize) -> f64 {
    let radial = gauss_legendre_on(n, 0.0, 1.0);
    let angular = gauss_legendre_on(2 * n, 0.0, 2.0 * PI);
    let zero = Complex64::new(0.0, 0.0);
    let mut acc = 0.0;
    for &(r, wr) in &radial {
        for &(th, wt) in &angular {
            let z2 = Complex64::from_polar(r, th);
            acc += wr * wt * r * eta.e22.eval(zero, z2).re * eta.weight(zero, z2);
        }
    }
    acc
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeIntegralCurve {
    pub samples: Vec<NodeSample>,
}

pub fn node_curve(eta: &EtaSpec, t_grid: &[Complex64], q: &QuadSettings) -> Result<NodeIntegralCurve> {
    let samples = t_grid.par_iter().map(|&t| fiber_annulus_integral(eta, t, q)).collect::<Result<Vec<_>>>()?;
    for w in samples.windows(2) {
        if !(w[1].t.norm() < w[0].t.norm()) {
            return validation("t grid must be strictly decreasing in |t|");
        }
    }
    Ok(NodeIntegralCurve { samples })
}

/// `n` real values of `t` from `hi` down to `lo`, log-spaced.
pub fn default_t_grid(lo: f64, hi: f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|i| {
            let x = hi.ln() + (lo.ln() - hi.ln()) * i as f64 / (n.max(2) - 1) as f64;
            Complex64::new(x.exp(), 0.0)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoteFit {
    pub a_fit: f64,
    pub b_fit: f64,
    pub a_ref: f64,
    /// `I − A log|t|² − B` per sample.
    pub remainders: Vec<f64>,
    /// `|remainder| / (|t| log²|t|)` per sample.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

pub fn asymptote_fit(curve: &NodeIntegralCurve, eta: &EtaSpec) -> Result<AsymptoteFit> {
    let s = &curve.samples;
    if s.len() < 6 {
        return validation("asymptote fit needs at least 6 samples");
    }
    let (tmax, tmin) = (s[0].t.norm(), s[s.len() - 1].t.norm());
    if (tmax / tmin).log10() < 3.0 - 1e-9 {
        return validation("asymptote fit needs samples spanning at least 3 decades of t");
    }
    let x: Vec<f64> = s.iter().map(|p| 2.0 * p.t.norm().ln()).collect();
    let y: Vec<f64> = s.iter().map(|p| p.value).collect();
    // Weighted by 1/(|t| log²|t|), so A and B come from the samples where the remainder is smallest.
    let scale: Vec<f64> = s.iter().zip(&x).map(|(p, xi)| p.t.norm() * (0.5 * xi).powi(2)).collect();
    let design = DMatrix::from_fn(s.len(), 2, |i, j| if j == 0 { x[i] / scale[i] } else { 1.0 / scale[i] });
    let rhs = DVector::from_iterator(s.len(), y.iter().zip(&scale).map(|(yi, w)| yi / w));
    let coef = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|_| Error::Validation("degenerate sample set for the asymptote fit".into()))?;
    let line = LineFit { slope: coef[0], intercept: coef[1], rms: 0.0 };
    let remainders: Vec<f64> = x.iter().zip(&y).map(|(xi, yi)| yi - line.slope * xi - line.intercept).collect();
    let ratios: Vec<f64> = s
        .iter()
        .zip(&remainders)
        .map(|(p, r)| {
            let at = p.t.norm();
            r.abs() / (at * at.ln().powi(2))
        })
        .collect();
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(AsymptoteFit { a_fit: line.slope, b_fit: line.intercept, a_ref: reference_log_coefficient(eta, 48), remainders, ratios, max_ratio })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuityReport {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
    pub j_extrap: f64,
    /// Best exponent in `J(t) − J₀ ≈ C|t|^a` over the scanned range.
    pub exponent: Option<f64>,
    /// `min(exponent, 1)`.
    pub holder_exponent: Option<f64>,
    pub max_refinement_change: f64,
}

/// Samples `J(t) = ∫_{fiber} η` and fits `J(t) − J₀` against `|t|^a`.
pub fn smooth_fiber_continuity(eta: &EtaSpec, t_grid: &[Complex64], q: &QuadSettings) -> Result<ContinuityReport> {
    let samples = t_grid.par_iter().map(|&t| sample(eta, t, 1.0, q, false)).collect::<Result<Vec<_>>>()?;
    let t: Vec<f64> = samples.iter().map(|p| p.t.norm()).collect();
    let values: Vec<f64> = samples.iter().map(|p| p.value).collect();
    let max_refinement_change = samples.iter().map(|p| p.refinement_change).fold(0.0, f64::max);
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - values.iter().cloned().fold(f64::INFINITY, f64::min);
    if values.len() < 3 || spread <= 1e-13 * scale.max(1e-300) {
        let j = values.last().copied().unwrap_or(0.0);
        return Ok(ContinuityReport { t, values, j_extrap: j, exponent: None, holder_exponent: None, max_refinement_change });
    }
    let grid = (1..=300).map(|k| k as f64 / 100.0);
    let (a, j0, _, _) = scan_fit(&t, &values, grid, |x, p| x.powf(p)).ok_or_else(|| Error::Validation("degenerate sample set".into()))?;
    Ok(ContinuityReport { t, values, j_extrap: j0, exponent: Some(a), holder_exponent: Some(a.min(1.0)), max_refinement_change })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(t: f64) -> Complex64 {
        Complex64::new(t, 0.0)
    }

    // For η_{22̄} = 1 the two chart pieces integrate in closed form.
    fn constant_case(t: f64) -> f64 {
        let lt = 2.0 * t.ln();
        PI * lt + PI - PI * t * t
    }

    #[test]
    fn zero_eta_gives_zero() {
        let s = fiber_annulus_integral(&EtaSpec::zero(), real(1e-3), &QuadSettings::default()).unwrap();
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn constant_eta_matches_closed_form() {
        for t in [1e-2, 1e-4, 1e-6] {
            let s = fiber_annulus_integral(&EtaSpec::constant_22(), real(t), &QuadSettings::default()).unwrap();
            assert!((s.value - constant_case(t)).abs() < 1e-9, "{t}: {} vs {}", s.value, constant_case(t));
        }
    }

    #[test]
    fn rejects_large_t() {
        assert!(fiber_annulus_integral(&EtaSpec::constant_22(), real(1.0), &QuadSettings::default()).is_err());
    }

    #[test]
    fn chart_swap_and_split_agree() {
        let eta = parse_eta("e11 = 1 + z1*zb1; e22 = 2 + 0.5*z2*zb2; e21 = 0.3*z1 + 0.2i*zb2").unwrap();
        let q = QuadSettings::default();
        let t = Complex64::new(3e-4, 1e-4);
        let split = fiber_annulus_integral(&eta, t, &q).unwrap().value;
        let c1 = fiber_integral_single_chart(&eta, t, Chart::Z1, &q).unwrap();
        let c2 = fiber_integral_single_chart(&eta, t, Chart::Z2, &q).unwrap();
        let moved = fiber_annulus_integral_split(&eta, t, 2.0, &q).unwrap().value;
        for v in [c1, c2, moved] {
            assert!((v - split).abs() < 1e-8 * split.abs().max(1.0), "{v} vs {split}");
        }
    }

    #[test]
    fn hermitian_check() {
        assert!(parse_eta("e11 = z1").is_err());
        assert!(parse_eta("e11 = z1*zb2 + z2*zb1").is_ok());
    }

    #[test]
    fn parse_roundtrip() {
        let p = parse_poly("1 - 2*z1^2*zb1 + 0.5i*z2 + 0.25*z2").unwrap();
        let q = parse_poly(&p.to_string()).unwrap();
        assert_eq!(p, q);
        let z = Complex64::new(0.3, -0.2);
        let w = Complex64::new(-0.1, 0.4);
        let direct = 1.0 - 2.0 * z * z * z.conj() + Complex64::new(0.25, 0.5) * w;
        assert!((p.eval(z, w) - direct).norm() < 1e-15);
    }

    #[test]
    fn reference_coefficient() {
        assert!((reference_log_coefficient(&EtaSpec::constant_22(), 48) - PI).abs() < 1e-13);
        let eta = parse_eta("e22 = z2*zb2").unwrap();
        assert!((reference_log_coefficient(&eta, 48) - PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn constant_eta_fit_and_continuity() {
        let eta = EtaSpec::constant_22();
        let q = QuadSettings::default();
        let curve = node_curve(&eta, &default_t_grid(1e-6, 1e-2, 9), &q).unwrap();
        let fit = asymptote_fit(&curve, &eta).unwrap();
        assert!((fit.a_fit - PI).abs() < 0.01 * PI);
        let cont = smooth_fiber_continuity(&eta, &default_t_grid(1e-6, 1e-2, 9), &q).unwrap();
        // J(t) = π − π|t|².
        assert!((cont.j_extrap - PI).abs() < 1e-8);
        assert!(cont.exponent.unwrap() > 0.0);
    }
}
