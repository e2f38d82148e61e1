//! Preferred potentials: the mean-zero solution of `Δφ = −4πa` on a fiber.
//!
//! With `ddᶜφ = (Δφ/4π) dA` the equation `α + ddᶜφ = 0` for `α = a dA` reads
//! `Δφ = −4πa`, and `⟨α,α⟩ = (1/4π) ∫|dφ|² dA`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{validation, Error, Result, CONDITION_GENERAL_FIBERS};
use crate::geometry::{DensityField, DensitySpec, FamilyConfig, WarpedChain};
use crate::linalg::max_abs;
use crate::spectral::{assemble_mode_operator, dot, full_spectrum, weighted_dot, Angular, EigenSystem, ModeOperator, SpectrumOptions};

/// Relative size of `∫ a dA` tolerated as zero.
pub const MEAN_ZERO_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    Direct,
    Spectral,
}

#[derive(Clone, Debug)]
pub struct FrequencySplit {
    /// Component along `Φ₁ … Φ_{N−1}`.
    pub low: Vec<f64>,
    /// Remainder, orthogonal to `Φ₀ … Φ_{N−1}`.
    pub high: Vec<f64>,
    /// `(Φ_k, φ)` for `k = 1..N−1`.
    pub low_coefficients: Vec<f64>,
    /// Mean of `φ` w.r.t. the area measure.
    pub mean: f64,
}

#[derive(Clone, Debug)]
pub struct PreferredPotential {
    pub phi: Vec<f64>,
    pub mean: f64,
    pub method: SolveMethod,
    /// `‖Kφ − 4π·load‖ / ‖4π·load‖` (zero for a zero source).
    pub residual: f64,
    pub split: Option<FrequencySplit>,
}

impl PreferredPotential {
    pub fn sup_norm(&self) -> f64 {
        max_abs(&self.phi)
    }

    pub fn with_split(mut self, op: &ModeOperator, eigsys: &EigenSystem) -> Result<Self> {
        self.split = Some(split_low_high(op, &self.phi, eigsys)?);
        Ok(self)
    }
}

fn check_mean_zero(a: &DensityField) -> Result<()> {
    if a.total_integral.abs() > MEAN_ZERO_TOL * a.integral_scale() {
        return validation(format!(
            "density has fiber integral {:.6e}; {CONDITION_GENERAL_FIBERS} requires zero (enable projection)",
            a.total_integral
        ));
    }
    Ok(())
}

fn residual(op: &ModeOperator, phi: &[f64], load: &[f64]) -> f64 {
    let kphi = op.stiffness.mul_vec(phi);
    let rhs_norm = 4.0 * PI * load.iter().map(|v| v * v).sum::<f64>().sqrt();
    if rhs_norm == 0.0 {
        return max_abs(&kphi);
    }
    kphi.iter().zip(load).map(|(k, l)| (k - 4.0 * PI * l).powi(2)).sum::<f64>().sqrt() / rhs_norm
}

/// Direct solve of the bordered system `[[K, w], [wᵀ, 0]]·(φ, μ) = (4π·load, 0)`
/// with `w = M·1`, so that `∫ φ dA = 0` without pinning a node.
pub fn solve_direct(chain: &WarpedChain, a: &DensityField) -> Result<PreferredPotential> {
    let op = assemble_mode_operator(chain, 0);
    solve_direct_with(&op, a)
}

pub fn solve_direct_with(op: &ModeOperator, a: &DensityField) -> Result<PreferredPotential> {
    check_mean_zero(a)?;
    let n = op.stiffness.len();
    if a.load.len() != n {
        return Err(Error::Structural("density was sampled on a different chain".into()));
    }
    let w = op.mass.mul_vec(&vec![1.0; n]);
    let mut sys = DMatrix::zeros(n + 1, n + 1);
    sys.view_mut((0, 0), (n, n)).copy_from(&op.stiffness.to_dense());
    for i in 0..n {
        sys[(i, n)] = w[i];
        sys[(n, i)] = w[i];
    }
    let mut rhs = DVector::zeros(n + 1);
    for i in 0..n {
        rhs[i] = 4.0 * PI * a.load[i];
    }
    let sol = sys
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NonConvergence("bordered Poisson system is singular".into()))?;
    let phi: Vec<f64> = sol.iter().take(n).copied().collect();
    let area = 2.0 * PI * w.iter().sum::<f64>();
    let mean = 2.0 * PI * dot(&w, &phi) / area;
    let residual = residual(op, &phi, &a.load);
    Ok(PreferredPotential { phi, mean, method: SolveMethod::Direct, residual, split: None })
}

/// `b_i = ∫ Φ_i a dA` and `c_i = b_i / λ̃_i` with `λ̃ = λ/(4π)`, so that
/// `φ = Σ c_i Φ_i` for `Δφ = −4πa`.
#[derive(Clone, Debug)]
pub struct SpectralCoefficients {
    /// Positions of the used entries in the eigen-system.
    pub indices: Vec<usize>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// `λ̃_i = λ_i / 4π`.
    pub lambda_tilde: Vec<f64>,
    pub truncation: usize,
}

/// Spectral expansion over the mode-0 eigenpairs `Φ₁ … Φ_K` (θ-invariant data
/// has no component along `m ≥ 1`). `k_trunc = None` uses every computed pair.
pub fn solve_spectral(
    chain: &WarpedChain,
    a: &DensityField,
    eigsys: &EigenSystem,
    k_trunc: Option<usize>,
) -> Result<(PreferredPotential, SpectralCoefficients)> {
    check_mean_zero(a)?;
    let op = &eigsys.mode0;
    if op.stiffness.len() != chain.n_nodes() || a.load.len() != chain.n_nodes() {
        return Err(Error::Structural("eigen-system, density and chain disagree on the grid".into()));
    }
    let available: Vec<usize> = eigsys
        .entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.angular == Angular::Zero && e.index_in_mode >= 1)
        .map(|(i, _)| i)
        .collect();
    let k = k_trunc.unwrap_or(available.len());
    if k > available.len() {
        return validation(format!("spectral truncation {k} exceeds the {} computed mode-0 eigenpairs", available.len()));
    }
    let mut indices: Vec<usize> = available;
    indices.sort_by_key(|&i| eigsys.entries[i].index_in_mode);
    indices.truncate(k);
    let n = chain.n_nodes();
    let mut phi = vec![0.0; n];
    let (mut b, mut c, mut lt) = (Vec::with_capacity(k), Vec::with_capacity(k), Vec::with_capacity(k));
    for &i in &indices {
        let e = &eigsys.entries[i];
        let bi = 2.0 * PI * dot(&e.radial, &a.load);
        let lambda_tilde = e.lambda / (4.0 * PI);
        let ci = bi / lambda_tilde;
        for (p, u) in phi.iter_mut().zip(&e.radial) {
            *p += ci * u;
        }
        b.push(bi);
        c.push(ci);
        lt.push(lambda_tilde);
    }
    let w = op.mass.mul_vec(&vec![1.0; n]);
    let area = 2.0 * PI * w.iter().sum::<f64>();
    let mean = 2.0 * PI * dot(&w, &phi) / area;
    let residual = residual(op, &phi, &a.load);
    Ok((
        PreferredPotential { phi, mean, method: SolveMethod::Spectral, residual, split: None },
        SpectralCoefficients { indices, b, c, lambda_tilde: lt, truncation: k },
    ))
}

/// Orthogonal split `φ = mean + low + high` in the `L²(dA)` product.
pub fn split_low_high(op: &ModeOperator, phi: &[f64], eigsys: &EigenSystem) -> Result<FrequencySplit> {
    if eigsys.certified_count < eigsys.low_count + 1 {
        return validation("low part of the eigen-system is not certified");
    }
    let n = phi.len();
    let ones = vec![1.0; n];
    let area = weighted_dot(&op.mass, &ones, &ones);
    let mean = weighted_dot(&op.mass, phi, &ones) / area;
    let mut low = vec![0.0; n];
    let mut coeffs = Vec::with_capacity(eigsys.low_count);
    for e in eigsys.low_entries() {
        let coef = if e.angular == Angular::Zero { weighted_dot(&op.mass, &e.radial, phi) } else { 0.0 };
        for (l, u) in low.iter_mut().zip(&e.radial) {
            *l += coef * u;
        }
        coeffs.push(coef);
    }
    let high = phi.iter().zip(&low).map(|(p, l)| p - mean - l).collect();
    Ok(FrequencySplit { low, high, low_coefficients: coeffs, mean })
}

/// Fluxes `2π c φ'` leaving fat segment `i` through its two necks, summed.
pub fn net_outflux(chain: &WarpedChain, phi: &[f64], i: usize) -> f64 {
    let n = chain.n_nodes();
    let fat = chain.fat_segment(i);
    let slope = |e: usize| {
        let (x0, x1) = chain.element_bounds(e);
        (phi[(e + 1) % n] - phi[e]) / (x1 - x0)
    };
    let right = (fat.first_node + fat.n_elements) % n;
    let left = (fat.first_node + n - 1) % n;
    let c_right = chain.element_segment(right).circumference;
    let c_left = chain.element_segment(left).circumference;
    2.0 * PI * (c_right * slope(right) - c_left * slope(left))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateRow {
    pub l_param: f64,
    pub high_sup: f64,
    pub low_sup: f64,
    pub low_over_l: f64,
    pub low_over_sqrt_l: f64,
    pub a_sup: f64,
    /// `∫|a| dA` over fat segments and over the whole fiber.
    pub a_l1_fat: f64,
    pub a_l1_total: f64,
}

#[derive(Clone, Debug)]
pub struct EstimateReport {
    pub rows: Vec<EstimateRow>,
    /// `(‖φ_high‖_∞/‖a‖_∞)` at the last L divided by the value at the first.
    pub high_ratio: f64,
    /// `(‖φ_low‖_∞/L)` last over first.
    pub low_over_l_ratio: f64,
    /// `(‖φ_low‖_∞/√L)` first over last.
    pub low_sqrt_decrease: f64,
}

/// Potentials of one density along an L-sweep, with the sup-norm columns of
/// the low/high estimates.
pub fn estimate_report(
    cfg: &FamilyConfig,
    spec: &DensitySpec,
    l_grid: &[f64],
    resolution: usize,
    opts: SpectrumOptions,
) -> Result<EstimateReport> {
    use rayon::prelude::*;
    if l_grid.len() < 2 {
        return validation("estimate sweep needs at least two L values");
    }
    let rows: Vec<EstimateRow> = l_grid
        .par_iter()
        .map(|&l| {
            let chain = WarpedChain::build(cfg, l, resolution)?;
            let a = DensityField::from_spec(spec, &chain, true)?;
            let sys = full_spectrum(&chain, opts)?;
            let pot = solve_direct_with(&sys.mode0, &a)?;
            let split = split_low_high(&sys.mode0, &pot.phi, &sys)?;
            let low_sup = max_abs(&split.low);
            Ok(EstimateRow {
                l_param: l,
                high_sup: max_abs(&split.high),
                low_sup,
                low_over_l: low_sup / l,
                low_over_sqrt_l: low_sup / l.sqrt(),
                a_sup: a.sup_norm,
                a_l1_fat: a.l1_fat,
                a_l1_total: a.l1_total,
            })
        })
        .collect::<Result<_>>()?;
    let first = &rows[0];
    let last = &rows[rows.len() - 1];
    let safe = |num: f64, den: f64| if den == 0.0 { if num == 0.0 { 1.0 } else { f64::INFINITY } } else { num / den };
    Ok(EstimateReport {
        high_ratio: safe(safe(last.high_sup, last.a_sup), safe(first.high_sup, first.a_sup)),
        low_over_l_ratio: safe(last.low_over_l, first.low_over_l),
        low_sqrt_decrease: safe(first.low_over_sqrt_l, last.low_over_sqrt_l),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DensityTerm;

    fn i2(l: f64) -> WarpedChain {
        WarpedChain::build(&FamilyConfig::reduced_cycle(2), l, 32).unwrap()
    }

    #[test]
    fn zero_density_gives_zero_potential() {
        let chain = i2(50.0);
        let a = DensityField::from_spec(&DensitySpec::zero(), &chain, true).unwrap();
        let p = solve_direct(&chain, &a).unwrap();
        assert!(p.phi.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn flat_torus_cosine_closed_form() {
        let chain = WarpedChain::build(&FamilyConfig::flat_torus(), 10.0, 256).unwrap();
        let spec = DensitySpec::zero().with_term(DensityTerm::GlobalCos { amplitude: 1.0, frequency: 1.0 });
        let a = DensityField::from_spec(&spec, &chain, true).unwrap();
        let p = solve_direct(&chain, &a).unwrap();
        let err = chain.nodes.iter().zip(&p.phi).map(|(x, v)| (v - (2.0 * PI * x).cos() / PI).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn non_mean_zero_source_names_condition() {
        let chain = i2(50.0);
        let a = DensityField::from_spec(&DensitySpec::constant(2, 1.0), &chain, false).unwrap();
        match solve_direct(&chain, &a) {
            Err(Error::Validation(msg)) => assert!(msg.contains("integrability on general fibers")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn step_density_circuit_oracle() {
        let chain = i2(100.0);
        let a = DensityField::from_spec(&DensitySpec::fat_constants(vec![2.0, -2.0]), &chain, true).unwrap();
        let p = solve_direct(&chain, &a).unwrap();
        assert!((p.sup_norm() / 50.0 - 1.0).abs() < 0.1);
        assert!(p.mean.abs() < 1e-10);
        assert!(p.residual < 1e-8);
        for i in 0..2 {
            let flux = net_outflux(&chain, &p.phi, i);
            let v = a.component_integrals[i];
            assert!((flux + 4.0 * PI * v).abs() <= 0.01 * 4.0 * PI * v.abs(), "{flux} {v}");
        }
    }

    #[test]
    fn spectral_matches_direct_and_split_is_orthogonal() {
        let chain = WarpedChain::build(&FamilyConfig::reduced_cycle(3), 100.0, 32).unwrap();
        let sys = full_spectrum(&chain, SpectrumOptions { m_max: 2, k_per_mode: usize::MAX }).unwrap();
        let spec = DensitySpec::fat_constants(vec![1.0, -0.3, 0.2])
            .with_term(DensityTerm::GlobalSin { amplitude: 0.7, frequency: 2.0 });
        let a = DensityField::from_spec(&spec, &chain, true).unwrap();
        let d = solve_direct(&chain, &a).unwrap();
        let (s, coef) = solve_spectral(&chain, &a, &sys, None).unwrap();
        let diff: Vec<f64> = d.phi.iter().zip(&s.phi).map(|(x, y)| x - y).collect();
        let rel = (weighted_dot(&sys.mode0.mass, &diff, &diff) / weighted_dot(&sys.mode0.mass, &d.phi, &d.phi)).sqrt();
        assert!(rel < 1e-8, "{rel}");
        for ((c, l), b) in coef.c.iter().zip(&coef.lambda_tilde).zip(&coef.b) {
            assert!((c * l - b).abs() <= 1e-14 * b.abs());
        }
        let split = split_low_high(&sys.mode0, &d.phi, &sys).unwrap();
        let norm2 = |v: &[f64]| weighted_dot(&sys.mode0.mass, v, v);
        let area = chain.total_area();
        let lhs = norm2(&d.phi);
        let rhs = norm2(&split.low) + norm2(&split.high) + split.mean * split.mean * area;
        assert!((lhs - rhs).abs() < 1e-10 * lhs);
        let (low_only, _) = solve_spectral(&chain, &a, &sys, Some(2)).unwrap();
        for (x, y) in low_only.phi.iter().zip(&split.low) {
            assert!((x - y).abs() < 1e-8 * max_abs(&split.low));
        }
    }

    #[test]
    fn linearity() {
        let chain = i2(60.0);
        let s1 = DensitySpec::fat_constants(vec![1.0, -1.0]);
        let s2 = DensitySpec::zero().with_term(DensityTerm::FatSine { component: 0, amplitude: 1.0, wavenumber: 2 });
        let p1 = solve_direct(&chain, &DensityField::from_spec(&s1, &chain, true).unwrap()).unwrap();
        let p2 = solve_direct(&chain, &DensityField::from_spec(&s2, &chain, true).unwrap()).unwrap();
        let p12 = solve_direct(&chain, &DensityField::from_spec(&s1.plus(&s2), &chain, true).unwrap()).unwrap();
        for i in 0..chain.n_nodes() {
            assert!((p12.phi[i] - p1.phi[i] - p2.phi[i]).abs() < 1e-10 * (1.0 + p12.phi[i].abs()));
        }
    }
}
