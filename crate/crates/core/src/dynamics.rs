//! Fiberwise translations on a torus fibration over an annulus.
//!
//! Fibers are `C/(Z + τZ)` sampled on an `n × n` grid in lattice coordinates
//! `z = p + qτ`. Functions are handled through their Fourier coefficients, so
//! a translation `z ↦ z + T` acts diagonally and is exact for band-limited
//! data. `T_*g = g(· − T)` and `T^*g = g(· + T)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{validation, Error, Result};
use crate::fit::fit_line;

/// Polynomial `T(s) = Σ c_k s^k` giving the translation on the fiber over `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct Translation {
    pub coeffs: Vec<Complex64>,
}

impl Translation {
    pub fn constant(c: Complex64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// `T(s) = s`.
    pub fn identity() -> Self {
        Self { coeffs: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)] }
    }

    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = Complex64::new(1.0, 0.0);
        Self { coeffs }
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * s + c)
    }

    pub fn derivative(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, (k, c)| acc * s + c * k as f64)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().skip(1).all(|c| c.norm() == 0.0)
    }
}

#[derive(Clone, Debug)]
pub struct TorusFibration {
    pub tau: Complex64,
    pub translation: Translation,
    pub r_min: f64,
    pub r_max: f64,
    pub n_radial: usize,
    pub n_angular: usize,
    /// Fiber grid size per direction.
    pub fiber_res: usize,
    /// Allows a constant `T`, which is otherwise rejected.
    pub allow_constant: bool,
}

impl Default for TorusFibration {
    fn default() -> Self {
        Self {
            tau: Complex64::new(0.0, 1.0),
            translation: Translation::identity(),
            r_min: 0.2,
            r_max: 0.8,
            n_radial: 4,
            n_angular: 8,
            fiber_res: 32,
            allow_constant: false,
        }
    }
}

impl TorusFibration {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau.im > 0.0) {
            return validation("lattice parameter τ must lie in the upper half plane");
        }
        if !(0.0 < self.r_min && self.r_min <= self.r_max) {
            return validation("base annulus needs 0 < r_min ≤ r_max");
        }
        if self.fiber_res < 4 || self.fiber_res % 2 != 0 {
            return validation("fiber resolution must be an even number ≥ 4");
        }
        if self.n_radial == 0 || self.n_angular == 0 {
            return validation("base grid must be nonempty");
        }
        if self.translation.is_constant() && !self.allow_constant {
            return validation("translation T is constant; enable the constant-T flag to allow it");
        }
        Ok(())
    }

    /// Base sample points, radius-major.
    pub fn base_grid(&self) -> Vec<Complex64> {
        let mut pts = Vec::with_capacity(self.n_radial * self.n_angular);
        for i in 0..self.n_radial {
            let r = if self.n_radial == 1 {
                self.r_min
            } else {
                self.r_min + (self.r_max - self.r_min) * i as f64 / (self.n_radial - 1) as f64
            };
            for j in 0..self.n_angular {
                pts.push(Complex64::from_polar(r, 2.0 * PI * j as f64 / self.n_angular as f64));
            }
        }
        pts
    }

    pub fn fiber_area(&self) -> f64 {
        self.tau.im
    }

    /// Lattice coordinates `(a, b)` of `w = a + bτ` (not reduced).
    pub fn lattice_coords(&self, w: Complex64) -> (f64, f64) {
        let b = w.im / self.tau.im;
        (w.re - b * self.tau.re, b)
    }

    /// Point `p + qτ` as `(x, y)`.
    pub fn point(&self, p: f64, q: f64) -> (f64, f64) {
        (p + q * self.tau.re, q * self.tau.im)
    }

    /// Eigenvalue of `−Δ` on the Fourier mode `e^{2πi(jp + kq)}`.
    pub fn laplace_symbol(&self, j: i64, k: i64) -> f64 {
        let (j, k) = (j as f64, k as f64);
        let ky = (k - j * self.tau.re) / self.tau.im;
        4.0 * PI * PI * (j * j + ky * ky)
    }
}

/// Real function on one fiber, stored as Fourier coefficients `ĝ[jk]`
/// (row `j` ↔ frequency in `p`, column `k` ↔ frequency in `q`).
#[derive(Clone, Debug)]
pub struct FiberFunction {
    pub n: usize,
    pub coeffs: Vec<Complex64>,
}

/// 2D FFT on an `n × n` fiber grid.
pub struct FiberFft {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl FiberFft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        for row in data.chunks_mut(n) {
            plan.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            for j in 0..n {
                col[j] = data[j * n + k];
            }
            plan.process(&mut col);
            for j in 0..n {
                data[j * n + k] = col[j];
            }
        }
    }

    /// Samples `values[j·n + k] = g(p_j, q_k)` to coefficients.
    pub fn forward(&self, values: &[f64]) -> FiberFunction {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.fwd);
        let scale = 1.0 / (self.n * self.n) as f64;
        data.iter_mut().for_each(|c| *c *= scale);
        FiberFunction { n: self.n, coeffs: data }
    }

    pub fn inverse(&self, f: &FiberFunction) -> Vec<f64> {
        let mut data = f.coeffs.clone();
        self.transform(&mut data, &self.inv);
        data.iter().map(|c| c.re).collect()
    }
}

/// Signed frequency of FFT index `i` on an `n`-point grid.
pub fn frequency(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl FiberFunction {
    pub fn zero(n: usize) -> Self {
        Self { n, coeffs: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    /// Mean over the fiber (`∫ g dA / area`).
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// `g(· − w)` for `w` with lattice coordinates `(a, b)`.
    pub fn shifted(&self, a: f64, b: f64) -> Self {
        let n = self.n;
        let mut out = self.clone();
        for j in 0..n {
            let fj = frequency(j, n) as f64;
            for k in 0..n {
                let fk = frequency(k, n) as f64;
                let phase = -2.0 * PI * (fj * a + fk * b);
                out.coeffs[j * n + k] *= Complex64::from_polar(1.0, phase);
            }
        }
        out
    }

    pub fn add_scaled(&mut self, other: &Self, t: f64) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * t;
        }
    }

    pub fn add_constant(&mut self, c: f64) {
        self.coeffs[0] += c;
    }

    /// Applies a Fourier multiplier `m(j, k)`.
    pub fn multiplied(&self, m: impl Fn(i64, i64) -> f64) -> Self {
        let n = self.n;
        let mut out = self.clone();
        for j in 0..n {
            for k in 0..n {
                out.coeffs[j * n + k] *= m(frequency(j, n), frequency(k, n));
            }
        }
        out
    }

    /// `Δg` for the flat metric of the fiber.
    pub fn laplacian(&self, fib: &TorusFibration) -> Self {
        self.multiplied(|j, k| -fib.laplace_symbol(j, k))
    }

    /// Mean-zero solution of `Δφ = −4π ξ` (the mean of `ξ` is ignored).
    pub fn poisson(&self, fib: &TorusFibration) -> Self {
        self.multiplied(|j, k| if j == 0 && k == 0 { 0.0 } else { 4.0 * PI / fib.laplace_symbol(j, k) })
    }

    /// `∫ g h dA / area` for real `g`, `h` (Parseval).
    pub fn mean_product(&self, other: &Self) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for j in 0..n {
            let jn = (n - j) % n;
            for k in 0..n {
                let kn = (n - k) % n;
                acc += (self.coeffs[j * n + k] * other.coeffs[jn * n + kn]).re;
            }
        }
        acc
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }
}

/// Samples `g(x, y)` on the fiber grid and checks periodicity across the seams.
pub fn sample_fiber(fib: &TorusFibration, fft: &FiberFft, g: impl Fn(f64, f64) -> f64) -> Result<FiberFunction> {
    let n = fib.fiber_res;
    let mut values = Vec::with_capacity(n * n);
    let mut scale = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            let (x, y) = fib.point(j as f64 / n as f64, k as f64 / n as f64);
            let v = g(x, y);
            scale = scale.max(v.abs());
            values.push(v);
        }
    }
    let mut seam = 0.0f64;
    for i in 0..n {
        let t = i as f64 / n as f64;
        let (x0, y0) = fib.point(0.0, t);
        let (x1, y1) = fib.point(1.0, t);
        seam = seam.max((g(x0, y0) - g(x1, y1)).abs());
        let (x0, y0) = fib.point(t, 0.0);
        let (x1, y1) = fib.point(t, 1.0);
        seam = seam.max((g(x0, y0) - g(x1, y1)).abs());
    }
    if seam > 1e-9 * scale.max(1.0) {
        return validation(format!("sampled function is not fiber-periodic: seam mismatch {seam:.3e}"));
    }
    Ok(fft.forward(&values))
}

/// Fractional part of `x·m`, accurate to rounding in the result.
fn frac_mul(x: f64, m: usize) -> f64 {
    let m = m as f64;
    let p = x * m;
    let err = x.mul_add(m, -p);
    let r = p - p.round();
    (r + err).rem_euclid(1.0)
}

fn sup(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BirkhoffCheckpoint {
    pub k: usize,
    /// `max_s sup_fiber |S_k/k − u(s)|`.
    pub max_error: f64,
    /// `2‖φ‖_∞ / k`.
    pub bound: f64,
    /// `max_s sup_fiber |u_k − u_{2k}|` when `2k` is also a checkpoint.
    pub cauchy: Option<f64>,
    /// `max_s sup_fiber |S_k − k π*u − φ + T^k_*φ|`.
    pub telescoping: f64,
    /// `max_s (max_fiber u_k − min_fiber u_k)`.
    pub constancy_defect: f64,
}

#[derive(Clone, Debug)]
pub struct LimitPotentialRun {
    pub base: Vec<Complex64>,
    /// Fiber mean of `S_{k_max}/k_max` per base point.
    pub u_estimate: Vec<f64>,
    pub u_exact: Vec<f64>,
    pub checkpoints: Vec<BirkhoffCheckpoint>,
    pub f_sup: f64,
    pub phi_sup: f64,
    /// `max_s |u(s)| ≤ ‖f‖_∞` holds.
    pub tate_bound_holds: bool,
}

/// Synthetic Birkhoff run: `f = π*u − T_*φ + φ` for the given `u` and `φ`,
/// then `S_k(T, f)/k → u`.
pub fn birkhoff_limit(
    fib: &TorusFibration,
    u: impl Fn(Complex64) -> f64 + Sync,
    phi: impl Fn(f64, f64) -> f64 + Sync,
    checkpoints: &[usize],
) -> Result<LimitPotentialRun> {
    fib.validate()?;
    if checkpoints.is_empty() || checkpoints.contains(&0) {
        return validation("Birkhoff checkpoints must be positive");
    }
    let mut cps = checkpoints.to_vec();
    cps.sort_unstable();
    cps.dedup();
    let k_max = *cps.last().expect("nonempty");
    let fft = FiberFft::new(fib.fiber_res);
    let phi_hat = sample_fiber(fib, &fft, &phi)?;
    let phi_grid = fft.inverse(&phi_hat);
    let phi_sup = sup(&phi_grid);
    let base = fib.base_grid();
    let n = fib.fiber_res;

    struct PointResult {
        f_sup: f64,
        u_est: f64,
        per_k: Vec<(f64, f64, f64, Vec<f64>)>,
    }

    let results: Vec<PointResult> = base
        .par_iter()
        .map(|&s| {
            let fft = FiberFft::new(n);
            let (a, b) = fib.lattice_coords(fib.translation.eval(s));
            let us = u(s);
            let mut f_hat = phi_hat.clone();
            f_hat.add_scaled(&phi_hat.shifted(a, b), -1.0);
            f_hat.add_constant(us);
            let f_sup = sup(&fft.inverse(&f_hat));
            let active: Vec<usize> = (0..n * n).filter(|&i| f_hat.coeffs[i].norm() > 1e-15 * f_hat.max_abs_coeff()).collect();
            let freqs: Vec<(f64, f64)> = active.iter().map(|&i| (frequency(i / n, n) as f64, frequency(i % n, n) as f64)).collect();
            let mut sum = FiberFunction::zero(n);
            let mut carry = vec![Complex64::new(0.0, 0.0); n * n];
            let mut per_k = Vec::with_capacity(cps.len());
            let mut next = 0;
            for it in 0..k_max {
                let (pa, pb) = (frac_mul(a, it), frac_mul(b, it));
                for (&i, &(fj, fk)) in active.iter().zip(&freqs) {
                    let phase = -2.0 * PI * (fj * pa + fk * pb);
                    let y = f_hat.coeffs[i] * Complex64::from_polar(1.0, phase) - carry[i];
                    let t = sum.coeffs[i] + y;
                    carry[i] = (t - sum.coeffs[i]) - y;
                    sum.coeffs[i] = t;
                }
                if it + 1 == cps[next] {
                    let k = cps[next];
                    let s_k = fft.inverse(&sum);
                    let uk: Vec<f64> = s_k.iter().map(|v| v / k as f64).collect();
                    let err = uk.iter().fold(0.0f64, |m, v| m.max((v - us).abs()));
                    let defect = uk.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - uk.iter().cloned().fold(f64::INFINITY, f64::min);
                    let mut tel = FiberFunction::zero(n);
                    let (ka, kb) = (frac_mul(a, k), frac_mul(b, k));
                    tel.add_scaled(&phi_hat.shifted(ka, kb), 1.0);
                    tel.add_scaled(&phi_hat, -1.0);
                    tel.add_constant(-(k as f64) * us);
                    tel.add_scaled(&sum, 1.0);
                    let telescoping = sup(&fft.inverse(&tel));
                    per_k.push((err, defect, telescoping, uk));
                    next += 1;
                }
            }
            let u_est = sum.mean() / k_max as f64;
            PointResult { f_sup, u_est, per_k }
        })
        .collect();

    let f_sup = results.iter().map(|r| r.f_sup).fold(0.0, f64::max);
    let mut out = Vec::with_capacity(cps.len());
    for (idx, &k) in cps.iter().enumerate() {
        let max_error = results.iter().map(|r| r.per_k[idx].0).fold(0.0, f64::max);
        let constancy_defect = results.iter().map(|r| r.per_k[idx].1).fold(0.0, f64::max);
        let telescoping = results.iter().map(|r| r.per_k[idx].2).fold(0.0, f64::max);
        let cauchy = cps.iter().position(|&c| c == 2 * k).map(|j2| {
            results
                .iter()
                .map(|r| r.per_k[idx].3.iter().zip(&r.per_k[j2].3).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())))
                .fold(0.0, f64::max)
        });
        out.push(BirkhoffCheckpoint { k, max_error, bound: 2.0 * phi_sup / k as f64, cauchy, telescoping, constancy_defect });
    }
    let u_estimate: Vec<f64> = results.iter().map(|r| r.u_est).collect();
    let u_exact: Vec<f64> = base.iter().map(|&s| u(s)).collect();
    let tate_bound_holds = u_estimate.iter().all(|v| v.abs() <= f_sup + 1e-9);
    Ok(LimitPotentialRun { base, u_estimate, u_exact, checkpoints: out, f_sup, phi_sup, tate_bound_holds })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthSample {
    pub n: usize,
    /// `sup_z |∂_s∂̄_s T̃ⁿ_*ρ̃|` after Richardson extrapolation.
    pub value: f64,
    /// Plain step-`h` estimate.
    pub raw: f64,
    /// Richardson estimate from steps `2h`, `4h`.
    pub coarse: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthReport {
    pub s0: Complex64,
    pub step: f64,
    pub samples: Vec<GrowthSample>,
    /// `None` when every value is below the finite-difference noise floor.
    pub exponent: Option<f64>,
    pub coefficient: Option<f64>,
    /// `|∂_sT(s0)|² · sup|∂_z∂̄_zρ|`.
    pub expected_coefficient: f64,
    pub noise_floor: f64,
    /// Relative change of the largest-`n` value when the step is doubled.
    pub refinement_change: f64,
}

/// `∂_s∂̄_s` of `T̃ⁿ_*ρ̃(s, z) = ρ(z − nT(s))` at `s0`, by the five-point complex
/// stencil with Richardson extrapolation, over the fiber grid.
pub fn pushforward_growth(
    fib: &TorusFibration,
    rho: impl Fn(f64, f64) -> f64,
    n_list: &[usize],
    s0: Complex64,
    step: Option<f64>,
) -> Result<GrowthReport> {
    if fib.translation.is_constant() && !fib.allow_constant {
        return validation("translation T is constant; enable the constant-T flag to allow it");
    }
    if !(fib.tau.im > 0.0) || fib.fiber_res < 4 {
        return validation("invalid fibration");
    }
    if n_list.is_empty() {
        return validation("growth run needs at least one n");
    }
    let fft = FiberFft::new(fib.fiber_res);
    let rho_hat = sample_fiber(fib, &fft, &rho)?;
    let rho_sup = sup(&fft.inverse(&rho_hat));
    let ddbar_sup = sup(&fft.inverse(&rho_hat.laplacian(fib))) / 4.0;
    let h = step.unwrap_or(1e-4 * if s0.norm() > 0.0 { s0.norm() } else { 1.0 });
    if !(h > 0.0) {
        return validation("finite-difference step must be positive");
    }
    let eval = |n: usize, s: Complex64| -> Vec<f64> {
        let (a, b) = fib.lattice_coords(fib.translation.eval(s) * n as f64);
        fft.inverse(&rho_hat.shifted(a.rem_euclid(1.0), b.rem_euclid(1.0)))
    };
    let stencil = |n: usize, h: f64, centre: &[f64]| -> Vec<f64> {
        let mut acc: Vec<f64> = centre.iter().map(|c| -4.0 * c).collect();
        for d in [Complex64::new(h, 0.0), Complex64::new(-h, 0.0), Complex64::new(0.0, h), Complex64::new(0.0, -h)] {
            for (a, v) in acc.iter_mut().zip(eval(n, s0 + d)) {
                *a += v;
            }
        }
        acc.iter().map(|v| v / (4.0 * h * h)).collect()
    };
    let richardson = |fine: &[f64], coarse: &[f64]| -> Vec<f64> { fine.iter().zip(coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect() };
    let mut samples = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let centre = eval(n, s0);
        let l1 = stencil(n, h, &centre);
        let l2 = stencil(n, 2.0 * h, &centre);
        let l4 = stencil(n, 4.0 * h, &centre);
        samples.push(GrowthSample { n, value: sup(&richardson(&l1, &l2)), raw: sup(&l1), coarse: sup(&richardson(&l2, &l4)) });
    }
    let noise_floor = 1e3 * f64::EPSILON * rho_sup.max(f64::MIN_POSITIVE) / (h * h);
    let live: Vec<&GrowthSample> = samples.iter().filter(|g| g.value > noise_floor).collect();
    let (exponent, coefficient) = if live.len() >= 2 {
        let x: Vec<f64> = live.iter().map(|g| (g.n as f64).ln()).collect();
        let y: Vec<f64> = live.iter().map(|g| g.value.ln()).collect();
        match fit_line(&x, &y) {
            Some(f) => (Some(f.slope), Some(f.intercept.exp())),
            None => (None, None),
        }
    } else {
        (None, None)
    };
    let last = samples.last().expect("nonempty");
    let refinement_change = if last.value > noise_floor { (last.coarse - last.value).abs() / last.value } else { 0.0 };
    let d = fib.translation.derivative(s0).norm_sqr();
    Ok(GrowthReport {
        s0,
        step: h,
        exponent,
        coefficient,
        expected_coefficient: d * ddbar_sup,
        noise_floor,
        refinement_change,
        samples,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatIdentityReport {
    /// `max|φ − (T_*ρ − ρ + c)| / max|T_*ρ − ρ|` over base points (absolute when the
    /// reference vanishes).
    pub max_defect: f64,
    pub per_point: Vec<f64>,
}

/// Density of `ω = ω_flat + ddᶜρ` w.r.t. `dA`: `1/Im τ − Δρ/4π`.
fn metric_density(fib: &TorusFibration, rho_hat: &FiberFunction) -> FiberFunction {
    let mut w = rho_hat.laplacian(fib);
    w.coeffs.iter_mut().for_each(|c| *c *= -1.0 / (4.0 * PI));
    w.add_constant(1.0 / fib.fiber_area());
    w
}

/// Preferred potential of `ξ = T_*ω − ω` for `ω = ω_flat + ddᶜρ`, compared
/// with `T_*ρ − ρ` after matching means against `ω`.
pub fn flat_potential_identity(fib: &TorusFibration, rho: impl Fn(f64, f64) -> f64) -> Result<FlatIdentityReport> {
    fib.validate()?;
    let fft = FiberFft::new(fib.fiber_res);
    let rho_hat = sample_fiber(fib, &fft, &rho)?;
    let w = metric_density(fib, &rho_hat);
    let w_total = w.mean();
    let mut per_point = Vec::new();
    for s in fib.base_grid() {
        let (a, b) = fib.lattice_coords(fib.translation.eval(s));
        let mut xi = w.shifted(a, b);
        xi.add_scaled(&w, -1.0);
        if xi.mean().abs() > 1e-12 {
            return Err(Error::NonConvergence(format!("ξ has nonzero fiber integral {:.3e}", xi.mean())));
        }
        let mut phi = xi.poisson(fib);
        let mut reference = rho_hat.shifted(a, b);
        reference.add_scaled(&rho_hat, -1.0);
        for g in [&mut phi, &mut reference] {
            let m = g.mean_product(&w) / w_total;
            g.add_constant(-m);
        }
        let mut diff = phi.clone();
        diff.add_scaled(&reference, -1.0);
        let d = sup(&fft.inverse(&diff));
        let r = sup(&fft.inverse(&reference));
        per_point.push(if r > 0.0 { d / r } else { d });
    }
    let max_defect = per_point.iter().cloned().fold(0.0, f64::max);
    Ok(FlatIdentityReport { max_defect, per_point })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitRelationReport {
    pub base: Vec<Complex64>,
    /// `u(s) = ∫ (f + T_*φ − φ) ω_s`.
    pub u: Vec<f64>,
    /// `∫ f ω_s + ⟨α, (T^* − I)ω⟩(s)`.
    pub rhs: Vec<f64>,
    pub max_discrepancy: f64,
    /// Largest `sup_fiber(f + T_*φ − φ) − inf_fiber(…)` (zero for consistent data).
    pub constancy_defect: f64,
    /// Largest jump of `u` between neighbouring base samples, per unit distance.
    pub max_jump_rate: f64,
    /// Matching Lipschitz estimate from `f` and `T_*φ − φ`.
    pub lipschitz_estimate: f64,
}

/// Synthetic check of `u(s) = ∫ f ω_s + ⟨α, (T^* − I)ω⟩` for
/// `α = a(s, ·) dA`, `ω = ω_flat + ddᶜρ` and `f = g(s) + φ − T_*φ`.
pub fn limit_potential_relation(
    fib: &TorusFibration,
    alpha: impl Fn(Complex64, f64, f64) -> f64,
    rho: impl Fn(f64, f64) -> f64,
    g: impl Fn(Complex64) -> f64,
) -> Result<LimitRelationReport> {
    fib.validate()?;
    let fft = FiberFft::new(fib.fiber_res);
    let rho_hat = sample_fiber(fib, &fft, &rho)?;
    let w = metric_density(fib, &rho_hat);
    let base = fib.base_grid();
    let area = fib.fiber_area();
    let mut u = Vec::with_capacity(base.len());
    let mut rhs = Vec::with_capacity(base.len());
    let mut fields = Vec::with_capacity(base.len());
    let mut constancy_defect = 0.0f64;
    for &s in &base {
        let a_hat = sample_fiber(fib, &fft, |x, y| alpha(s, x, y))?;
        if a_hat.mean().abs() > 1e-12 * a_hat.max_abs_coeff().max(1.0) {
            return validation("α must have zero fiber integral");
        }
        let (ta, tb) = fib.lattice_coords(fib.translation.eval(s));
        // Construction: f = g(s) + φ − T_*φ with φ mean-zero for dA.
        let phi_c = a_hat.poisson(fib);
        let mut f = phi_c.clone();
        f.add_scaled(&phi_c.shifted(ta, tb), -1.0);
        f.add_constant(g(s));
        // Evaluation: preferred potential normalised against ω.
        let mut phi = a_hat.poisson(fib);
        let m = phi.mean_product(&w) / w.mean();
        phi.add_constant(-m);
        let mut total = f.clone();
        total.add_scaled(&phi.shifted(ta, tb), 1.0);
        total.add_scaled(&phi, -1.0);
        let grid = fft.inverse(&total);
        let hi = grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = grid.iter().cloned().fold(f64::INFINITY, f64::min);
        constancy_defect = constancy_defect.max(hi - lo);
        u.push(area * total.mean_product(&w));
        let mut beta = w.shifted(-ta, -tb);
        beta.add_scaled(&w, -1.0);
        rhs.push(area * (f.mean_product(&w) + phi.mean_product(&beta)));
        let mut tphi = phi.shifted(ta, tb);
        tphi.add_scaled(&phi, -1.0);
        fields.push((fft.inverse(&f), fft.inverse(&tphi)));
    }
    if constancy_defect > 1e-8 * u.iter().fold(1.0f64, |m, v| m.max(v.abs())) {
        return validation(format!("inconsistent synthetic construction: f + T_*φ − φ varies by {constancy_defect:.3e} on a fiber"));
    }
    let max_discrepancy = u.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut max_jump_rate = 0.0f64;
    let mut lipschitz_estimate = 0.0f64;
    let na = fib.n_angular;
    for i in 0..base.len() {
        let r = i / na;
        let j = i % na;
        let mut neighbours = vec![r * na + (j + 1) % na];
        if r + 1 < fib.n_radial {
            neighbours.push(i + na);
        }
        for k in neighbours {
            if k == i {
                continue;
            }
            let dist = (base[i] - base[k]).norm();
            max_jump_rate = max_jump_rate.max((u[i] - u[k]).abs() / dist);
            let df = fields[i].0.iter().zip(&fields[k].0).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let dp = fields[i].1.iter().zip(&fields[k].1).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            lipschitz_estimate = lipschitz_estimate.max((df + dp) / dist);
        }
    }
    Ok(LimitRelationReport { base, u, rhs, max_discrepancy, constancy_defect, max_jump_rate, lipschitz_estimate })
}

/// Largest `|∫ T_*g − ∫ g|` over the base grid for a sampled `g`.
pub fn translation_invariance_defect(fib: &TorusFibration, g: impl Fn(f64, f64) -> f64) -> Result<f64> {
    let fft = FiberFft::new(fib.fiber_res);
    let gh = sample_fiber(fib, &fft, &g)?;
    let mut worst = 0.0f64;
    for s in fib.base_grid() {
        let (a, b) = fib.lattice_coords(fib.translation.eval(s));
        let shifted = fft.inverse(&gh.shifted(a, b));
        let plain = fft.inverse(&gh);
        let n2 = (fib.fiber_res * fib.fiber_res) as f64;
        let d = (shifted.iter().sum::<f64>() - plain.iter().sum::<f64>()) / n2 * fib.fiber_area();
        worst = worst.max(d.abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi_ref(x: f64, y: f64) -> f64 {
        0.3 * (2.0 * PI * x).sin() * (2.0 * PI * y).cos()
    }

    #[test]
    fn fft_roundtrip_and_shift_group_law() {
        let fib = TorusFibration { tau: Complex64::new(0.3, 1.1), ..TorusFibration::default() };
        let fft = FiberFft::new(fib.fiber_res);
        let g = sample_fiber(&fib, &fft, |x, y| {
            let (p, q) = ((x - y * 0.3 / 1.1), y / 1.1);
            (2.0 * PI * p).cos() + 0.5 * (2.0 * PI * (p + 2.0 * q)).sin()
        })
        .unwrap();
        let back = fft.forward(&fft.inverse(&g));
        for (a, b) in g.coeffs.iter().zip(&back.coeffs) {
            assert!((a - b).norm() < 1e-14);
        }
        let ab = g.shifted(0.13, 0.4).shifted(0.21, -0.05);
        let direct = g.shifted(0.34, 0.35);
        for (a, b) in ab.coeffs.iter().zip(&direct.coeffs) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn non_periodic_sampling_is_rejected() {
        let fib = TorusFibration::default();
        let fft = FiberFft::new(fib.fiber_res);
        assert!(sample_fiber(&fib, &fft, |x, _| x).is_err());
    }

    #[test]
    fn constant_translation_needs_flag() {
        let fib = TorusFibration { translation: Translation::constant(Complex64::new(0.1, 0.0)), ..TorusFibration::default() };
        assert!(fib.validate().is_err());
        let ok = TorusFibration { allow_constant: true, ..fib };
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn birkhoff_with_zero_phi_is_exact() {
        let fib = TorusFibration::default();
        let run = birkhoff_limit(&fib, |s| s.re, |_, _| 0.0, &[1, 7, 50]).unwrap();
        for cp in &run.checkpoints {
            assert!(cp.max_error < 1e-13);
        }
    }

    #[test]
    fn birkhoff_synthetic_bound() {
        let fib = TorusFibration { n_radial: 2, n_angular: 4, ..TorusFibration::default() };
        let run = birkhoff_limit(&fib, |s| s.re, phi_ref, &[100, 200, 1000]).unwrap();
        for cp in &run.checkpoints {
            assert!(cp.max_error <= cp.bound * (1.0 + 1e-9));
            assert!(cp.telescoping < 1e-10);
        }
        assert!(run.checkpoints[0].cauchy.unwrap() <= 3.0 * run.phi_sup / 100.0);
        assert!(run.tate_bound_holds);
    }

    #[test]
    fn growth_constant_translation_vanishes() {
        let fib = TorusFibration { translation: Translation::constant(Complex64::new(0.2, 0.1)), allow_constant: true, ..TorusFibration::default() };
        let r = pushforward_growth(&fib, |x, y| (2.0 * PI * x).sin() * (2.0 * PI * y).sin(), &[4, 8, 16], Complex64::new(0.5, 0.0), None).unwrap();
        assert!(r.samples.iter().all(|g| g.value <= r.noise_floor));
        assert!(r.exponent.is_none());
    }

    #[test]
    fn flat_identity_examples() {
        let fib = TorusFibration { n_radial: 2, n_angular: 3, ..TorusFibration::default() };
        assert_eq!(flat_potential_identity(&fib, |_, _| 0.0).unwrap().max_defect, 0.0);
        let r = flat_potential_identity(&fib, |x, _| 0.1 * (2.0 * PI * x).cos()).unwrap();
        assert!(r.max_defect < 1e-6);
    }

    #[test]
    fn limit_relation_zero_alpha() {
        let fib = TorusFibration { n_radial: 2, n_angular: 3, ..TorusFibration::default() };
        let r = limit_potential_relation(&fib, |_, _, _| 0.0, |x, y| 0.05 * (2.0 * PI * (x + y)).cos(), |s| s.norm_sqr()).unwrap();
        for (u, s) in r.u.iter().zip(&r.base) {
            assert!((u - s.norm_sqr()).abs() < 1e-12);
        }
        assert!(r.max_discrepancy < 1e-12);
    }

    #[test]
    fn translation_preserves_fiber_integrals() {
        let fib = TorusFibration::default();
        let d = translation_invariance_defect(&fib, |x, y| 1.0 + (2.0 * PI * x).cos() * (4.0 * PI * y).sin()).unwrap();
        assert!(d < 1e-12);
    }
}
