//! Laplace spectrum of a warped chain.
//!
//! Separating `u(x) e^{imθ}` turns `Δ = c⁻¹∂ₓ(c∂ₓ) + c⁻²∂²_θ` into one
//! Sturm–Liouville problem per angular mode,
//! `∫ c u'v' + m² ∫ uv/c = λ ∫ c uv`, discretised with periodic P1 elements.
//! Radial vectors are normalised by `2π uᵀ M u = 1`; a mode `m ≥ 1` radial
//! vector stands for the two eigenfunctions `√2 u cos mθ` and `√2 u sin mθ`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::dual_graph::DualGraph;
use crate::error::{validation, Error, Result};
use crate::geometry::{SegmentKind, WarpedChain};
use crate::linalg::{generalized_sym_eigen, sym_eigen, CyclicTridiag};

pub const DEFAULT_M_MAX: u32 = 16;
/// Per-mode count; the default keeps every eigenpair of the grid.
pub const DEFAULT_K_PER_MODE: usize = usize::MAX;
/// Relative residual accepted from the dense generalized solver.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Relative width of an eigenvalue cluster (degenerate pairs are kept together).
pub const CLUSTER_TOL: f64 = 1e-3;

/// Stiffness and mass of one angular mode (both without the `2π` factor).
#[derive(Clone, Debug)]
pub struct ModeOperator {
    pub m: u32,
    pub stiffness: CyclicTridiag,
    pub mass: CyclicTridiag,
}

pub fn assemble_mode_operator(chain: &WarpedChain, m: u32) -> ModeOperator {
    let n = chain.n_nodes();
    let mut k = CyclicTridiag::zeros(n);
    let mut mm = CyclicTridiag::zeros(n);
    let m2 = (m as f64) * (m as f64);
    for e in 0..n {
        let (x0, x1) = chain.element_bounds(e);
        let h = x1 - x0;
        let j = (e + 1) % n;
        for (x, w, c) in chain.element_quadrature(e) {
            let t = (x - x0) / h;
            let (pa, pb) = (1.0 - t, t);
            let grad = w * c / (h * h);
            let pot = m2 * w / c;
            let mass = w * c;
            k.diag[e] += grad + pot * pa * pa;
            k.diag[j] += grad + pot * pb * pb;
            k.off[e] += -grad + pot * pa * pb;
            mm.diag[e] += mass * pa * pa;
            mm.diag[j] += mass * pb * pb;
            mm.off[e] += mass * pa * pb;
        }
    }
    ModeOperator { m, stiffness: k, mass: mm }
}

/// `2π uᵀ M v`, the `L²(dA)` product of two θ-independent grid functions.
pub fn weighted_dot(mass: &CyclicTridiag, u: &[f64], v: &[f64]) -> f64 {
    2.0 * PI * dot(u, &mass.mul_vec(v))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Debug)]
pub struct ModeSolution {
    pub m: u32,
    pub eigenvalues: Vec<f64>,
    /// Radial vectors with `2π uᵀ M u = 1`.
    pub vectors: Vec<Vec<f64>>,
    /// Largest `‖Ku − λMu‖ / ((‖K‖ + |λ|‖M‖)‖u‖)` over the returned pairs.
    pub max_residual: f64,
    /// Smallest eigenvalue of this mode that was not returned, if any.
    pub first_excluded: Option<f64>,
}

/// The `k` smallest eigenpairs of mode `m`.
pub fn solve_modes(chain: &WarpedChain, m: u32, k: usize) -> Result<ModeSolution> {
    let op = assemble_mode_operator(chain, m);
    solve_operator(&op, k)
}

pub fn solve_operator(op: &ModeOperator, k: usize) -> Result<ModeSolution> {
    let n = op.stiffness.len();
    if k == 0 || k > n {
        return validation(format!("requested {k} eigenpairs from a grid of {n} nodes"));
    }
    let kd = op.stiffness.to_dense();
    let md = op.mass.to_dense();
    let (values, u) = generalized_sym_eigen(&kd, &md)?;
    let knorm = kd.norm();
    let mnorm = md.norm();
    let mut vectors = Vec::with_capacity(k);
    let mut max_residual = 0.0f64;
    for (i, &lam) in values.iter().take(k).enumerate() {
        let col: Vec<f64> = u.column(i).iter().map(|v| v / (2.0 * PI).sqrt()).collect();
        let ku = op.stiffness.mul_vec(&col);
        let mu = op.mass.mul_vec(&col);
        let res = ku.iter().zip(&mu).map(|(a, b)| (a - lam * b).powi(2)).sum::<f64>().sqrt();
        let unorm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        max_residual = max_residual.max(res / ((knorm + lam.abs() * mnorm) * unorm));
        vectors.push(col);
    }
    if !(max_residual <= RESIDUAL_TOL) {
        return Err(Error::NonConvergence(format!(
            "mode {} eigen-residual {max_residual:.3e} exceeds {RESIDUAL_TOL:e}",
            op.m
        )));
    }
    let mut eigenvalues: Vec<f64> = values[..k].to_vec();
    if op.m == 0 {
        eigenvalues[0] = eigenvalues[0].max(0.0);
    }
    Ok(ModeSolution { m: op.m, eigenvalues, vectors, max_residual, first_excluded: values.get(k).copied() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Angular {
    Zero,
    Cos(u32),
    Sin(u32),
}

impl Angular {
    pub fn mode(self) -> u32 {
        match self {
            Angular::Zero => 0,
            Angular::Cos(m) | Angular::Sin(m) => m,
        }
    }

    /// Angular factor of the normalised eigenfunction.
    pub fn factor(self, theta: f64) -> f64 {
        match self {
            Angular::Zero => 1.0,
            Angular::Cos(m) => 2f64.sqrt() * (m as f64 * theta).cos(),
            Angular::Sin(m) => 2f64.sqrt() * (m as f64 * theta).sin(),
        }
    }

    pub fn sup_factor(self) -> f64 {
        if self == Angular::Zero {
            1.0
        } else {
            2f64.sqrt()
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenEntry {
    pub lambda: f64,
    pub angular: Angular,
    /// Position inside its angular mode (0 = lowest).
    pub index_in_mode: usize,
    pub radial: Vec<f64>,
    pub certified: bool,
}

impl EigenEntry {
    pub fn mode(&self) -> u32 {
        self.angular.mode()
    }

    pub fn sup_norm(&self) -> f64 {
        self.angular.sup_factor() * self.radial.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumOptions {
    pub m_max: u32,
    pub k_per_mode: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { m_max: DEFAULT_M_MAX, k_per_mode: DEFAULT_K_PER_MODE }
    }
}

#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub l_param: f64,
    pub n_components: usize,
    /// Sorted by `(λ, angular)`.
    pub entries: Vec<EigenEntry>,
    /// `N − 1`.
    pub low_count: usize,
    /// `λ_N`.
    pub gap_value: f64,
    /// Every eigenvalue below this value is present.
    pub threshold: f64,
    pub certified_count: usize,
    pub warning: Option<String>,
    pub max_residual: f64,
    /// Mode-0 operator, reused by potentials and correlations.
    pub mode0: ModeOperator,
}

impl EigenSystem {
    pub fn lambdas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    /// `Φ₁ … Φ_{N−1}`.
    pub fn low_entries(&self) -> &[EigenEntry] {
        &self.entries[1..=self.low_count]
    }

    /// Number of eigenvalues strictly below `gap/2` (excluding `λ₀`).
    pub fn count_below_half_gap(&self) -> usize {
        self.entries.iter().skip(1).filter(|e| e.lambda < 0.5 * self.gap_value).count()
    }

    pub fn low_sup_norm(&self) -> f64 {
        self.low_entries().iter().map(EigenEntry::sup_norm).fold(0.0, f64::max)
    }
}

/// Merged spectrum over modes `0..=m_max` with a completeness certificate.
pub fn full_spectrum(chain: &WarpedChain, opts: SpectrumOptions) -> Result<EigenSystem> {
    if opts.m_max < 1 {
        return validation("m_max must be at least 1");
    }
    let k = opts.k_per_mode.min(chain.n_nodes());
    let sols: Vec<(ModeOperator, ModeSolution)> = (0..=opts.m_max)
        .into_par_iter()
        .map(|m| {
            let op = assemble_mode_operator(chain, m);
            let sol = solve_operator(&op, k)?;
            Ok((op, sol))
        })
        .collect::<Result<_>>()?;

    let c_max = chain.c_max();
    let next_mode = (opts.m_max + 1) as f64;
    let mut threshold = next_mode * next_mode / (c_max * c_max);
    for (_, s) in &sols {
        if let Some(l) = s.first_excluded {
            threshold = threshold.min(l);
        }
    }

    let mut entries = Vec::new();
    let mut max_residual = 0.0f64;
    for (_, s) in &sols {
        max_residual = max_residual.max(s.max_residual);
        for (i, (&lambda, u)) in s.eigenvalues.iter().zip(&s.vectors).enumerate() {
            let angulars = if s.m == 0 { vec![Angular::Zero] } else { vec![Angular::Cos(s.m), Angular::Sin(s.m)] };
            for angular in angulars {
                entries.push(EigenEntry { lambda, angular, index_in_mode: i, radial: u.clone(), certified: lambda < threshold });
            }
        }
    }
    entries.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.angular.cmp(&b.angular)));

    let n = chain.n_components();
    let certified_count = entries.iter().filter(|e| e.certified).count();
    let warning = (certified_count < n + 1).then(|| {
        format!("only {certified_count} eigenvalues certified below {threshold:.6e}; increase m_max or k_per_mode")
    });
    let gap_value = entries.get(n).map_or(f64::NAN, |e| e.lambda);
    let mode0 = sols.into_iter().next().expect("mode 0").0;
    Ok(EigenSystem {
        l_param: chain.l_param,
        n_components: n,
        entries,
        low_count: n - 1,
        gap_value,
        threshold,
        certified_count,
        warning,
        max_residual,
        mode0,
    })
}

/// Small eigenvalues predicted by the graph limit: nonzero eigenvalues of
/// `diag(A)⁻¹ L_G`, each edge carrying conductance `2π/L`.
pub fn graph_limit_eigs(g: &DualGraph, l_param: f64) -> Result<Vec<f64>> {
    graph_limit_eigs_with_conductance(g, 2.0 * PI / l_param)
}

pub fn graph_limit_eigs_with_conductance(g: &DualGraph, conductance: f64) -> Result<Vec<f64>> {
    g.validate()?;
    if !g.is_reduced() {
        return validation("graph limit needs a reduced fiber");
    }
    let n = g.len();
    let mut lap = DMatrix::<f64>::zeros(n, n);
    for &(i, j) in &g.edges {
        if i != j {
            lap[(i, i)] += conductance;
            lap[(j, j)] += conductance;
            lap[(i, j)] -= conductance;
            lap[(j, i)] -= conductance;
        }
    }
    let s: Vec<f64> = g.areas().iter().map(|a| 1.0 / a.sqrt()).collect();
    let sym = DMatrix::from_fn(n, n, |i, j| s[i] * lap[(i, j)] * s[j]);
    let (values, _) = sym_eigen(&sym);
    Ok(values.into_iter().skip(1).collect())
}

/// Graph limit with the neck area lumped in by the linear-element mass matrix:
/// each edge adds `neck_area·[[1/3, 1/6], [1/6, 1/3]]` to `diag(A)`.
pub fn graph_limit_eigs_with_neck_mass(g: &DualGraph, conductance: f64, neck_area: f64) -> Result<Vec<f64>> {
    g.validate()?;
    if !g.is_reduced() {
        return validation("graph limit needs a reduced fiber");
    }
    let n = g.len();
    let mut lap = DMatrix::<f64>::zeros(n, n);
    let mut mass = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(g.areas()));
    for &(i, j) in &g.edges {
        if i != j {
            lap[(i, i)] += conductance;
            lap[(j, j)] += conductance;
            lap[(i, j)] -= conductance;
            lap[(j, i)] -= conductance;
        }
        mass[(i, i)] += neck_area / 3.0;
        mass[(j, j)] += neck_area / 3.0;
        mass[(i, j)] += neck_area / 6.0;
        mass[(j, i)] += neck_area / 6.0;
    }
    let (values, _) = generalized_sym_eigen(&lap, &mass)?;
    Ok(values.into_iter().skip(1).collect())
}

/// Shape of the model-function ramps on the necks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RampStyle {
    /// Linear ramp across the whole neck; neighbouring functions overlap there.
    #[default]
    FullNeck,
    /// Linear ramp across the near half of the neck; supports are disjoint.
    HalfNeck,
}

#[derive(Clone, Debug)]
pub struct ModelFunctionSet {
    pub style: RampStyle,
    pub functions: Vec<Vec<f64>>,
    /// `‖dΥ⁽ⁱ⁾‖²`.
    pub energies: Vec<f64>,
    /// `‖Υ⁽ⁱ⁾‖²`.
    pub norms: Vec<f64>,
    /// `‖dΥ⁽ⁱ⁾‖²` predicted for the linear ramp.
    pub closed_form_energies: Vec<f64>,
    /// Per function: `(start, end)` of its support on the circle.
    pub supports: Vec<(f64, f64)>,
}

/// Model functions: `1/√A_i` on fat segment `i`, linear ramps to zero across
/// the adjacent necks, zero elsewhere.
pub fn model_functions(chain: &WarpedChain, style: RampStyle) -> Result<ModelFunctionSet> {
    let n = chain.n_components();
    if n < 2 || !chain.config.necks {
        return Err(Error::Structural("model functions need N ≥ 2: a single component's ramps would overlap on its own neck".into()));
    }
    if chain.config.smoothing_width > 0.0 {
        return validation("model functions are defined for sharp interfaces");
    }
    let op = assemble_mode_operator(chain, 0);
    let ell = chain.config.neck_length;
    let reach = match style {
        RampStyle::FullNeck => ell,
        RampStyle::HalfNeck => 0.5 * ell,
    };
    let mut functions = Vec::with_capacity(n);
    let mut supports = Vec::with_capacity(n);
    let mut closed = Vec::with_capacity(n);
    for i in 0..n {
        let amp = 1.0 / chain.config.areas[i].sqrt();
        let after = chain.neck_segment(i).expect("neck");
        let before = chain.neck_segment((i + n - 1) % n).expect("neck");
        let v: Vec<f64> = (0..chain.n_nodes())
            .map(|k| {
                let x = chain.nodes[k];
                let seg = chain.element_segment(k);
                let ramp = |d: f64| amp * (1.0 - d / reach).max(0.0);
                match seg.kind {
                    SegmentKind::Fat if seg.index == i => amp,
                    SegmentKind::Neck if seg.index == i => ramp(x - after.start),
                    SegmentKind::Neck if seg.index == before.index => ramp(before.end - x),
                    _ => 0.0,
                }
            })
            .collect();
        functions.push(v);
        let p = chain.total_length;
        supports.push(((before.end - reach).rem_euclid(p), (after.start + reach).rem_euclid(p)));
        closed.push(2.0 * 2.0 * PI * chain.c_thin * amp * amp / reach);
    }
    let energies = functions.iter().map(|f| weighted_dot(&op.stiffness, f, f)).collect();
    let norms = functions.iter().map(|f| weighted_dot(&op.mass, f, f)).collect();
    Ok(ModelFunctionSet { style, functions, energies, norms, closed_form_energies: closed, supports })
}

#[derive(Clone, Debug)]
pub struct CorrelationReport {
    pub l_param: f64,
    /// `C_ij = (Υ⁽ⁱ⁾, Φ_j)`, `j = 0..N−1` with `Φ₀` the normalised constant.
    pub c: DMatrix<f64>,
    /// `CCᵀ − I`.
    pub e: DMatrix<f64>,
    pub e_frobenius: f64,
    /// `‖R_j‖²` and `‖dR_j‖²` for `R_j = Φ_j − Σ_l C_lj Υ⁽ˡ⁾`.
    pub residual_norms: Vec<f64>,
    pub residual_energies: Vec<f64>,
}

impl CorrelationReport {
    pub fn e_times_sqrt_l(&self) -> f64 {
        self.e_frobenius * self.l_param.sqrt()
    }

    pub fn residuals_times_l(&self) -> Vec<f64> {
        self.residual_norms.iter().map(|r| r * self.l_param).collect()
    }
}

pub fn correlation_matrix(eigsys: &EigenSystem, mfs: &ModelFunctionSet) -> Result<CorrelationReport> {
    let n = eigsys.n_components;
    if mfs.functions.len() != n {
        return Err(Error::Structural("model functions and eigen-system disagree on N".into()));
    }
    if eigsys.certified_count < n {
        return validation("eigen-system low part is not certified");
    }
    let op = &eigsys.mode0;
    let phis: Vec<&EigenEntry> = eigsys.entries[..n].iter().collect();
    let c = DMatrix::from_fn(n, n, |i, j| {
        if phis[j].angular == Angular::Zero {
            weighted_dot(&op.mass, &mfs.functions[i], &phis[j].radial)
        } else {
            0.0
        }
    });
    let e = &c * c.transpose() - DMatrix::identity(n, n);
    let mut residual_norms = Vec::with_capacity(n);
    let mut residual_energies = Vec::with_capacity(n);
    for (j, phi) in phis.iter().enumerate() {
        let mut r = phi.radial.clone();
        for l in 0..n {
            for (rk, uk) in r.iter_mut().zip(&mfs.functions[l]) {
                *rk -= c[(l, j)] * uk;
            }
        }
        let (mass, energy) = if phi.angular == Angular::Zero {
            (weighted_dot(&op.mass, &r, &r), weighted_dot(&op.stiffness, &r, &r))
        } else {
            (1.0, phi.lambda)
        };
        residual_norms.push(mass);
        residual_energies.push(energy);
    }
    Ok(CorrelationReport { l_param: eigsys.l_param, e_frobenius: e.norm(), c, e, residual_norms, residual_energies })
}

#[derive(Clone, Debug)]
pub struct GreenReport {
    /// Lower bound of `G^N` over all grid pairs and all angle offsets.
    pub min: f64,
    pub argmin: (usize, usize),
    /// Lower bound of `G^N(z, z)` over the grid.
    pub diagonal_min: f64,
    pub included: usize,
    pub lambda_last: f64,
    /// `(remaining certified count)·(sup |Φ|)²/λ_cutoff`.
    pub tail_bound: f64,
}

/// Entries used by the truncated Green sum: `Φ_N …` up to `tail_count` of them
/// (all certified ones when `None`), extended to the end of the last
/// eigenvalue cluster.
pub fn green_entries(eigsys: &EigenSystem, tail_count: Option<usize>) -> Result<&[EigenEntry]> {
    let start = eigsys.low_count + 1;
    let tail_count = tail_count.unwrap_or_else(|| eigsys.certified_count.saturating_sub(start));
    let mut end = start + tail_count;
    if tail_count == 0 || end > eigsys.entries.len() {
        return validation(format!("truncated Green sum needs {} eigenpairs, {} available", end, eigsys.entries.len()));
    }
    while end < eigsys.entries.len() {
        let last = eigsys.entries[end - 1].lambda;
        if (eigsys.entries[end].lambda - last).abs() <= CLUSTER_TOL * last.abs() {
            end += 1;
        } else {
            break;
        }
    }
    let slice = &eigsys.entries[start..end];
    if slice.iter().any(|e| !e.certified) {
        return validation(format!(
            "truncated Green sum reaches uncertified eigenvalues (threshold {:.6e})",
            eigsys.threshold
        ));
    }
    Ok(slice)
}

/// Minimum of `G^N(z₁,z₂) = Σ_{k≥N} Φ_k(z₁)Φ_k(z₂)/λ_k` over grid pairs; each
/// angular mode is taken at its worst-case alignment.
pub fn truncated_green_min(eigsys: &EigenSystem, tail_count: Option<usize>) -> Result<GreenReport> {
    let used = green_entries(eigsys, tail_count)?;
    let terms: Vec<(Angular, f64, &[f64])> = used.iter().map(|e| (e.angular, e.lambda, e.radial.as_slice())).collect();
    let (min, argmin, diagonal_min) = worst_case_green(&terms);
    let lambda_last = used.last().map_or(f64::NAN, |e| e.lambda);
    let rest: Vec<&EigenEntry> = eigsys.entries[eigsys.low_count + 1 + used.len()..].iter().filter(|e| e.certified).collect();
    let tail_bound = match rest.first() {
        Some(first) => {
            let sup = rest.iter().map(|e| e.sup_norm()).fold(0.0, f64::max);
            rest.len() as f64 * sup * sup / first.lambda
        }
        None => 0.0,
    };
    Ok(GreenReport { min, argmin, diagonal_min, included: used.len(), lambda_last, tail_bound })
}

/// Lower bounds of a mode sum `Σ f_k(x₁)f_k(x₂)·a_k(θ₁)a_k(θ₂)/λ_k` over all
/// pairs `(x₁, x₂)` and over the diagonal. Returns `(min, argmin, diag_min)`.
pub fn worst_case_green(terms: &[(Angular, f64, &[f64])]) -> (f64, (usize, usize), f64) {
    let n = terms.first().map_or(0, |t| t.2.len());
    let m_top = terms.iter().map(|t| t.0.mode()).max().unwrap_or(0) as usize;
    let mut g0 = DMatrix::<f64>::zeros(n, n);
    let mut cos = vec![DMatrix::<f64>::zeros(n, n); m_top + 1];
    let mut sin = vec![DMatrix::<f64>::zeros(n, n); m_top + 1];
    for &(ang, lambda, u) in terms {
        let target = match ang {
            Angular::Zero => &mut g0,
            Angular::Cos(m) => &mut cos[m as usize],
            Angular::Sin(m) => &mut sin[m as usize],
        };
        for i in 0..n {
            let ui = u[i] / lambda;
            for j in 0..n {
                target[(i, j)] += ui * u[j];
            }
        }
    }
    let mut best = (f64::INFINITY, (0, 0));
    let mut diag = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            let mut v = g0[(i, j)];
            for m in 1..=m_top {
                v -= 2.0 * cos[m][(i, j)].abs().max(sin[m][(i, j)].abs());
            }
            if v < best.0 {
                best = (v, (i, j));
            }
        }
        let mut d = g0[(i, i)];
        for m in 1..=m_top {
            d += 2.0 * cos[m][(i, i)].min(sin[m][(i, i)]);
        }
        diag = diag.min(d);
    }
    (best.0, best.1, diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FamilyConfig;

    fn i2(l: f64) -> WarpedChain {
        WarpedChain::build(&FamilyConfig::reduced_cycle(2), l, 32).unwrap()
    }

    #[test]
    fn operator_basic_properties() {
        let chain = i2(100.0);
        let op0 = assemble_mode_operator(&chain, 0);
        let ones = vec![1.0; chain.n_nodes()];
        assert!(op0.stiffness.mul_vec(&ones).iter().all(|v| v.abs() < 1e-12));
        let total: f64 = 2.0 * PI * op0.mass.mul_vec(&ones).iter().sum::<f64>();
        assert!((total - chain.total_area()).abs() < 1e-12);
        let mw = chain.mass_weights();
        for (a, b) in op0.mass.mul_vec(&ones).iter().zip(&mw) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn mode_one_rayleigh_bound_on_uniform_profile() {
        let chain = WarpedChain::build(&FamilyConfig::flat_torus(), 10.0, 32).unwrap();
        let sol = solve_modes(&chain, 1, 5).unwrap();
        let c = chain.c_max();
        assert!(sol.eigenvalues[0] >= 1.0 / (c * c) * (1.0 - 1e-12));
    }

    #[test]
    fn flat_torus_spectrum() {
        let chain = WarpedChain::build(&FamilyConfig::flat_torus(), 10.0, 64).unwrap();
        let sys = full_spectrum(&chain, SpectrumOptions { m_max: 2, k_per_mode: 8 }).unwrap();
        assert!(sys.entries[0].lambda.abs() < 1e-9);
        let lam1 = 4.0 * PI * PI;
        assert!((sys.entries[1].lambda / lam1 - 1.0).abs() < 2e-3);
        // Four-fold: (±1, 0) in x and (0, ±1) in θ.
        assert!((sys.entries[4].lambda / lam1 - 1.0).abs() < 2e-3);
        assert!(sys.entries[5].lambda > 1.5 * lam1);
    }

    #[test]
    fn graph_limit_examples() {
        let l = 100.0;
        let e2 = graph_limit_eigs(&DualGraph::cycle(&[0.5, 0.5]).unwrap(), l).unwrap();
        assert_eq!(e2.len(), 1);
        assert!((e2[0] - 16.0 * PI / l).abs() < 1e-12);
        let third = 1.0 / 3.0;
        let e3 = graph_limit_eigs(&DualGraph::cycle(&[third; 3]).unwrap(), l).unwrap();
        for v in e3 {
            assert!((v - 18.0 * PI / l).abs() < 1e-12);
        }
    }

    #[test]
    fn small_eigenvalue_near_graph_limit() {
        let chain = i2(100.0);
        let sol = solve_modes(&chain, 0, 3).unwrap();
        let pred = 16.0 * PI / 100.0;
        assert!((sol.eigenvalues[1] / pred - 1.0).abs() < 0.1);
        let fine = WarpedChain::build(&FamilyConfig::reduced_cycle(2), 100.0, 64).unwrap();
        let sf = solve_modes(&fine, 0, 3).unwrap();
        assert!((sf.eigenvalues[1] / sol.eigenvalues[1] - 1.0).abs() < 5e-3);
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        let chain = i2(50.0);
        let op = assemble_mode_operator(&chain, 0);
        let sol = solve_operator(&op, 10).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let g = weighted_dot(&op.mass, &sol.vectors[i], &sol.vectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn model_functions_i2() {
        let chain = i2(100.0);
        let full = model_functions(&chain, RampStyle::FullNeck).unwrap();
        for (e, n) in full.energies.iter().zip(&full.norms) {
            assert!((e * 100.0 / (8.0 * PI) - 1.0).abs() < 1e-10);
            assert!(*n >= 1.0 && *n <= 1.0 + 8.0 * PI / 100.0);
        }
        let half = model_functions(&chain, RampStyle::HalfNeck).unwrap();
        for k in 0..chain.n_nodes() {
            assert_eq!(half.functions[0][k] * half.functions[1][k], 0.0);
        }
        for (e, c) in half.energies.iter().zip(&half.closed_form_energies) {
            assert!((e / c - 1.0).abs() < 1e-10);
        }
        let one = WarpedChain::build(&FamilyConfig::reduced_cycle(1), 100.0, 32).unwrap();
        assert!(matches!(model_functions(&one, RampStyle::FullNeck), Err(Error::Structural(_))));
    }

    #[test]
    fn correlation_is_sign_invariant() {
        let chain = i2(100.0);
        let mut sys = full_spectrum(&chain, SpectrumOptions { m_max: 2, k_per_mode: 8 }).unwrap();
        let mfs = model_functions(&chain, RampStyle::FullNeck).unwrap();
        let a = correlation_matrix(&sys, &mfs).unwrap();
        for v in &mut sys.entries[1].radial {
            *v = -*v;
        }
        let b = correlation_matrix(&sys, &mfs).unwrap();
        assert!((a.e_frobenius - b.e_frobenius).abs() < 1e-14);
        for (x, y) in a.residual_norms.iter().zip(&b.residual_norms) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn green_diagonal_dominates_minimum() {
        let chain = i2(40.0);
        let sys = full_spectrum(&chain, SpectrumOptions { m_max: 4, ..SpectrumOptions::default() }).unwrap();
        let g = truncated_green_min(&sys, Some(40)).unwrap();
        let all = truncated_green_min(&sys, None).unwrap();
        assert!(all.included > g.included);
        assert!(g.min.is_finite());
        assert!(g.diagonal_min >= g.min);
        assert!(truncated_green_min(&sys, Some(10_000)).is_err());
    }
}
