//! The height pairing `⟨α,β⟩(s) = ∫ φ_α β` on the model family and its
//! logarithmic asymptotics.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dual_graph::{build_intersection_matrix, pairing_constant, pseudoinverse, DualGraph, ZERO_SUM_TOL};
use crate::error::{validation, Error, Result, CONDITION_GENERAL_FIBERS};
use crate::fit::{fit_line, geometric_grid, scan_fit};
use crate::geometry::{DensityField, DensitySpec, DensityTerm, FamilyConfig, WarpedChain};
use crate::potential::solve_direct_with;
use crate::spectral::{assemble_mode_operator, dot};

pub const DEFAULT_WINDOW: (f64, f64) = (50.0, 200.0);

#[derive(Clone, Debug, PartialEq)]
pub struct PairingValue {
    /// `∫ φ_α β dA`.
    pub value: f64,
    /// `∫ φ_β α dA`.
    pub swapped: f64,
    /// `(1/4π) ∫ |dφ_α|² dA`.
    pub energy_alpha: f64,
}

/// Pairing of two mean-zero densities on one chain, evaluated in both orders.
pub fn pairing_value(chain: &WarpedChain, a: &DensityField, b: &DensityField) -> Result<PairingValue> {
    let op = assemble_mode_operator(chain, 0);
    let pa = solve_direct_with(&op, a)?;
    let pb = solve_direct_with(&op, b)?;
    let value = 2.0 * PI * dot(&pa.phi, &b.load);
    let swapped = 2.0 * PI * dot(&pb.phi, &a.load);
    let energy_alpha = 0.5 * dot(&pa.phi, &op.stiffness.mul_vec(&pa.phi));
    Ok(PairingValue { value, swapped, energy_alpha })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairingSample {
    pub l_param: f64,
    pub s: f64,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct PairingCurve {
    pub samples: Vec<PairingSample>,
    pub alpha: DensitySpec,
    pub beta: DensitySpec,
}

impl PairingCurve {
    pub fn l_values(&self) -> Vec<f64> {
        self.samples.iter().map(|p| p.l_param).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|p| p.value).collect()
    }

    pub fn scale(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, p| m.max(p.value.abs()))
    }

    pub fn from_values(l: &[f64], values: &[f64]) -> Self {
        let samples = l.iter().zip(values).map(|(&l, &v)| PairingSample { l_param: l, s: (-l).exp(), value: v }).collect();
        Self { samples, alpha: DensitySpec::zero(), beta: DensitySpec::zero() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSettings {
    pub resolution: usize,
    /// Remove the constant part of each density before pairing.
    pub project: bool,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self { resolution: 32, project: true }
    }
}

pub fn pairing_sweep(
    cfg: &FamilyConfig,
    alpha: &DensitySpec,
    beta: &DensitySpec,
    l_grid: &[f64],
    settings: SweepSettings,
) -> Result<PairingCurve> {
    if l_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return validation("L grid must be strictly increasing");
    }
    let samples = l_grid
        .par_iter()
        .map(|&l| {
            let chain = WarpedChain::build(cfg, l, settings.resolution)?;
            let a = DensityField::from_spec(alpha, &chain, settings.project)?;
            let b = DensityField::from_spec(beta, &chain, settings.project)?;
            let v = pairing_value(&chain, &a, &b)?;
            Ok(PairingSample { l_param: l, s: chain.s_modulus(), value: v.value })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PairingCurve { samples, alpha: alpha.clone(), beta: beta.clone() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    /// Coefficient of `log|s|² = −2L`.
    pub c_fit: f64,
    pub intercept: f64,
    pub rms: f64,
    pub window: (f64, f64),
    pub n_points: usize,
    /// Largest change of `c_fit` when refitting on either half of the window.
    pub stability_delta: f64,
    /// Largest change of the intercept on either half.
    pub intercept_delta: f64,
    /// Mean value over the window and over each half (a constant fit).
    pub constant_fit: f64,
    pub constant_delta: f64,
}

impl FitResult {
    pub fn predict(&self, l: f64) -> f64 {
        self.intercept + self.c_fit * (-2.0 * l)
    }
}

/// Least-squares fit `value ≈ intercept + c_fit·(−2L)` over `window`.
pub fn fit_log_asymptote(curve: &PairingCurve, window: (f64, f64)) -> Result<FitResult> {
    let pts: Vec<&PairingSample> = curve
        .samples
        .iter()
        .filter(|p| p.l_param >= window.0 * (1.0 - 1e-12) && p.l_param <= window.1 * (1.0 + 1e-12))
        .collect();
    if pts.len() < 4 {
        return validation(format!("fit window [{}, {}] holds {} samples, need at least 4", window.0, window.1, pts.len()));
    }
    let fit = |ps: &[&PairingSample]| {
        let x: Vec<f64> = ps.iter().map(|p| -2.0 * p.l_param).collect();
        let y: Vec<f64> = ps.iter().map(|p| p.value).collect();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        fit_line(&x, &y).map(|f| (f, mean))
    };
    let (full, mean) = fit(&pts).ok_or_else(|| Error::Validation("degenerate fit window".into()))?;
    let half = pts.len() / 2;
    let mut delta = 0.0f64;
    let mut idelta = 0.0f64;
    let mut cdelta = 0.0f64;
    for part in [&pts[..half.max(2)], &pts[pts.len() - half.max(2)..]] {
        if let Some((f, m)) = fit(part) {
            delta = delta.max((f.slope - full.slope).abs());
            idelta = idelta.max((f.intercept - full.intercept).abs());
            cdelta = cdelta.max((m - mean).abs());
        }
    }
    Ok(FitResult {
        c_fit: full.slope,
        intercept: full.intercept,
        rms: full.rms,
        window,
        n_points: pts.len(),
        stability_delta: delta,
        intercept_delta: idelta,
        constant_fit: mean,
        constant_delta: cdelta,
    })
}

/// `v_i = ∫_{C_i} a dA` on the limit fiber: fat-segment integrals of the
/// unprojected density (they do not depend on `L`).
pub fn limit_component_vector(spec: &DensitySpec, chain: &WarpedChain) -> Result<Vec<f64>> {
    Ok(DensityField::from_spec(spec, chain, false)?.component_integrals)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    /// `v_αᵀ M⁺ v_β` from the limit component integrals.
    pub value: f64,
    pub v_alpha: Vec<f64>,
    pub v_beta: Vec<f64>,
    /// Same with the projected fat-only vectors (mean removed).
    pub fat_only: f64,
    /// Same with neck integrals split evenly between neighbours.
    pub neck_inclusive: f64,
}

/// Pseudoinverse prediction for the slope of `⟨α,β⟩` against `log|s|²`.
pub fn predicted_constant(g: &DualGraph, alpha: &DensitySpec, beta: &DensitySpec, chain: &WarpedChain) -> Result<Prediction> {
    let m_plus = pseudoinverse(&build_intersection_matrix(g)?)?;
    let va = limit_component_vector(alpha, chain)?;
    let vb = limit_component_vector(beta, chain)?;
    let value = pairing_constant(&m_plus, &va, &vb)?.value;
    let fa = DensityField::from_spec(alpha, chain, true)?;
    let fb = DensityField::from_spec(beta, chain, true)?;
    let centre = |v: Vec<f64>| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.into_iter().map(|x| x - m).collect::<Vec<_>>()
    };
    let fat_only = pairing_constant(&m_plus, &centre(fa.component_integrals.clone()), &centre(fb.component_integrals.clone()))?.value;
    let neck_inclusive = pairing_constant(
        &m_plus,
        &centre(fa.component_integrals_with_necks()),
        &centre(fb.component_integrals_with_necks()),
    )?
    .value;
    Ok(Prediction { value, v_alpha: va, v_beta: vb, fat_only, neck_inclusive })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaseChangeReport {
    pub d: u32,
    /// Largest `|⟨α,β⟩(s = t^d) − ⟨α,β⟩ on the family with L = d·L_t|`.
    pub max_discrepancy: f64,
    /// Slope against `log|t|²` and `d ×` the slope against `log|s|²`.
    pub slope_t: f64,
    pub d_times_slope_s: f64,
}

/// Pairing along `s = t^d`, computed once through `|s| = |t|^d` and once on
/// the family whose neck parameter is set to `d·L_t` directly.
pub fn base_change_consistency(
    cfg: &FamilyConfig,
    alpha: &DensitySpec,
    beta: &DensitySpec,
    d: u32,
    t_l_grid: &[f64],
    settings: SweepSettings,
) -> Result<BaseChangeReport> {
    if d == 0 {
        return validation("base-change degree must be positive");
    }
    let via_s: Vec<f64> = t_l_grid
        .iter()
        .map(|&lt| {
            let s = (-lt).exp().powi(d as i32);
            if !(s > 0.0) {
                return Err(Error::ModelValidity(format!("|t|^{d} underflows at L_t = {lt}")));
            }
            Ok(-s.ln())
        })
        .collect::<Result<_>>()?;
    let direct: Vec<f64> = t_l_grid.iter().map(|lt| d as f64 * lt).collect();
    let ca = pairing_sweep(cfg, alpha, beta, &via_s, settings)?;
    let cb = pairing_sweep(cfg, alpha, beta, &direct, settings)?;
    let max_discrepancy = ca.samples.iter().zip(&cb.samples).map(|(a, b)| (a.value - b.value).abs()).fold(0.0, f64::max);
    let x_t: Vec<f64> = t_l_grid.iter().map(|l| -2.0 * l).collect();
    let x_s: Vec<f64> = direct.iter().map(|l| -2.0 * l).collect();
    let y = cb.values();
    let slope_t = fit_line(&x_t, &y).map_or(f64::NAN, |f| f.slope);
    let slope_s = fit_line(&x_s, &y).map_or(f64::NAN, |f| f.slope);
    Ok(BaseChangeReport { d, max_discrepancy, slope_t, d_times_slope_s: d as f64 * slope_s })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayFamily {
    PowerLaw,
    Exponential,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolderReport {
    /// `(p, value_inf, C, rms)` of `value ≈ value_inf + C·L^{−p}`.
    pub power: Option<(f64, f64, f64, f64)>,
    /// `(a, value_inf, C, rms)` of `value ≈ value_inf + C·e^{−aL}`.
    pub exponential: Option<(f64, f64, f64, f64)>,
    pub best: Option<DecayFamily>,
    /// Set when successive differences do not shrink.
    pub non_convergent: bool,
}

/// Exploratory decay fit of a Cauchy curve.
pub fn holder_probe(curve: &PairingCurve) -> Result<HolderReport> {
    let l = curve.l_values();
    let y = curve.values();
    if l.len() < 4 {
        return validation("decay probe needs at least 4 samples");
    }
    let diffs: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let non_convergent = diffs.last() > diffs.first() && diffs.first().is_some_and(|d| *d > 0.0);
    let power = scan_fit(&l, &y, geometric_grid(0.05, 8.0, 400).into_iter(), |x, p| x.powf(-p));
    let span = l[l.len() - 1] - l[0];
    let exponential = scan_fit(&l, &y, geometric_grid(0.05 / span, 40.0 / span, 400).into_iter(), |x, a| (-a * (x - l[0])).exp())
        .map(|(a, yinf, c, rms)| (a, yinf, c * (a * l[0]).exp(), rms));
    let best = match (power, exponential) {
        (Some(p), Some(e)) => Some(if p.3 <= e.3 { DecayFamily::PowerLaw } else { DecayFamily::Exponential }),
        (Some(_), None) => Some(DecayFamily::PowerLaw),
        (None, Some(_)) => Some(DecayFamily::Exponential),
        (None, None) => None,
    };
    Ok(HolderReport { power, exponential, best, non_convergent })
}

/// Random Condition-1 density carried by the fat segments of an Iₙ family:
/// area-weighted zero-sum constants plus a zero-mean bump on one segment.
/// With `condition2` the constants vanish, leaving only the bump.
pub fn random_density(cfg: &FamilyConfig, rng: &mut ChaCha8Rng, condition2: bool) -> DensitySpec {
    let n = cfg.n_components();
    let mut fat: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let total: f64 = fat.iter().zip(&cfg.areas).map(|(f, a)| f * a).sum();
    let area: f64 = cfg.areas.iter().sum();
    for f in &mut fat {
        *f -= total / area;
    }
    if condition2 {
        fat.iter_mut().for_each(|f| *f = 0.0);
    }
    let term = DensityTerm::FatSine {
        component: rng.random_range(0..n),
        amplitude: rng.random_range(0.5..2.0),
        wavenumber: rng.random_range(1..3),
    };
    DensitySpec { fat, neck: vec![], terms: vec![term] }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Density whose fiber integral is checked against the general-fiber condition.
pub fn require_condition1(a: &DensityField) -> Result<()> {
    if a.total_integral.abs() > 1e-10 * a.integral_scale() {
        return validation(format!("{CONDITION_GENERAL_FIBERS} violated: fiber integral {:.6e}", a.total_integral));
    }
    Ok(())
}

/// `Σ v_i` must vanish for the limit vector of a Condition-1 density.
pub fn require_zero_sum(v: &[f64]) -> Result<()> {
    let scale = v.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
    if v.iter().sum::<f64>().abs() > ZERO_SUM_TOL * scale {
        return validation(format!("component integrals {v:?} do not sum to zero; {CONDITION_GENERAL_FIBERS}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i2(l: f64) -> WarpedChain {
        WarpedChain::build(&FamilyConfig::reduced_cycle(2), l, 32).unwrap()
    }

    #[test]
    fn zero_beta_gives_zero() {
        let chain = i2(80.0);
        let a = DensityField::from_spec(&DensitySpec::fat_constants(vec![2.0, -2.0]), &chain, true).unwrap();
        let b = DensityField::from_spec(&DensitySpec::zero(), &chain, true).unwrap();
        assert_eq!(pairing_value(&chain, &a, &b).unwrap().value, 0.0);
    }

    #[test]
    fn step_pairing_near_l_and_energy_identity() {
        let chain = i2(100.0);
        let a = DensityField::from_spec(&DensitySpec::fat_constants(vec![2.0, -2.0]), &chain, true).unwrap();
        let v = pairing_value(&chain, &a, &a).unwrap();
        assert!((v.value / 100.0 - 1.0).abs() < 0.1);
        assert!((v.value - v.energy_alpha).abs() < 1e-8 * v.value);
        assert!((v.value - v.swapped).abs() < 1e-10 * v.value);
    }

    #[test]
    fn synthetic_fit_recovers_generator() {
        let l = geometric_grid(50.0, 200.0, 8);
        let y: Vec<f64> = l.iter().map(|l| 3.0 - 2.0 * l * 0.25).collect();
        let f = fit_log_asymptote(&PairingCurve::from_values(&l, &y), DEFAULT_WINDOW).unwrap();
        assert!((f.c_fit - 0.25).abs() < 1e-12);
        assert!((f.intercept - 3.0).abs() < 1e-10);
        assert!(f.rms < 1e-10);
        assert!(fit_log_asymptote(&PairingCurve::from_values(&l[..3], &y[..3]), DEFAULT_WINDOW).is_err());
    }

    #[test]
    fn holder_probe_families() {
        let l = geometric_grid(20.0, 200.0, 12);
        let pw: Vec<f64> = l.iter().map(|l| 5.0 + 1.0 / l).collect();
        let r = holder_probe(&PairingCurve::from_values(&l, &pw)).unwrap();
        assert_eq!(r.best, Some(DecayFamily::PowerLaw));
        assert!((r.power.unwrap().0 - 1.0).abs() < 0.05);
        let lin: Vec<f64> = (0..12).map(|i| 5.0 + 2.0 * i as f64).collect();
        let ex: Vec<f64> = lin.iter().map(|l| 5.0 + (-0.3 * l).exp()).collect();
        let r = holder_probe(&PairingCurve::from_values(&lin, &ex)).unwrap();
        assert_eq!(r.best, Some(DecayFamily::Exponential));
    }

    #[test]
    fn hand_case_prediction() {
        let chain = i2(100.0);
        let g = DualGraph::cycle(&[0.5, 0.5]).unwrap();
        let spec = DensitySpec::fat_constants(vec![2.0, -2.0]);
        let p = predicted_constant(&g, &spec, &spec, &chain).unwrap();
        assert!((p.value + 0.5).abs() < 1e-12);
        assert!((p.v_alpha[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn base_change_identity() {
        let cfg = FamilyConfig::reduced_cycle(2);
        let spec = DensitySpec::fat_constants(vec![2.0, -2.0]);
        for d in 1..4 {
            let r = base_change_consistency(&cfg, &spec, &spec, d, &[20.0, 30.0, 40.0, 60.0], SweepSettings::default()).unwrap();
            assert!(r.max_discrepancy <= 1e-12 * 400.0);
            assert!((r.slope_t - r.d_times_slope_s).abs() < 1e-9 * r.slope_t.abs());
        }
    }
}
