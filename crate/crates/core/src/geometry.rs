//! Warped-cylinder model of an Iₙ degeneration.
//!
//! A fiber is the circle `[0, P)` with metric `dx² + c(x)² dθ²`. The circle is
//! cut into `2N` alternating segments: fat segment `i` (circumference
//! `c_fat`, area `A_i`) followed by neck `i` (circumference `c_thin`, length
//! `ℓ₀`). Neck `i` joins fat segments `i` and `i+1 mod N`, so the dual graph is
//! the `N`-cycle. The neck parameter is `L = log(1/|s|)` and
//! `c_thin = κ ℓ₀ / L` with `κ = 1` unless a perturbed neck law is requested;
//! the conductance of every neck is then `2π c_thin / ℓ₀ = 2πκ / L`.

use std::f64::consts::PI;

use crate::dual_graph::{Component, DualGraph};
use crate::error::{validation, Error, Result};
use crate::quadrature::gauss_legendre;

/// Gauss points per element for all element integrals.
pub(crate) const ELEMENT_QUAD: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyConfig {
    pub areas: Vec<f64>,
    pub neck_length: f64,
    pub fat_circumference: f64,
    pub smoothing_width: f64,
    /// `false` gives the undegenerate single-component torus.
    pub necks: bool,
    /// Multiplier `κ` in `c_thin = κ ℓ₀ / L`; `1` is the flat-annulus law.
    pub neck_law_factor: f64,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self::reduced_cycle(2)
    }
}

impl FamilyConfig {
    /// Iₙ family with equal areas summing to one.
    pub fn reduced_cycle(n: usize) -> Self {
        Self::with_areas(vec![1.0 / n.max(1) as f64; n])
    }

    pub fn with_areas(areas: Vec<f64>) -> Self {
        Self {
            areas,
            neck_length: 1.0,
            fat_circumference: 1.0 / (2.0 * PI),
            smoothing_width: 0.0,
            necks: true,
            neck_law_factor: 1.0,
        }
    }

    /// Flat torus of area one (no neck).
    pub fn flat_torus() -> Self {
        Self { necks: false, ..Self::with_areas(vec![1.0]) }
    }

    pub fn n_components(&self) -> usize {
        self.areas.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.areas.is_empty() {
            return Err(Error::Structural("family needs at least one component".into()));
        }
        if let Some(a) = self.areas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return validation(format!("component area must be positive, got {a}"));
        }
        if !(self.fat_circumference > 0.0) || !(self.neck_length > 0.0) || !(self.neck_law_factor > 0.0) {
            return validation("fat_circumference, neck_length and neck_law_factor must be positive");
        }
        if !(self.smoothing_width >= 0.0) {
            return validation("smoothing_width must be nonnegative");
        }
        if !self.necks && self.n_components() != 1 {
            return Err(Error::Structural("a family without necks must have exactly one component".into()));
        }
        Ok(())
    }

    pub fn fat_length(&self, i: usize) -> f64 {
        self.areas[i] / (2.0 * PI * self.fat_circumference)
    }

    pub fn total_length(&self) -> f64 {
        let fat: f64 = (0..self.n_components()).map(|i| self.fat_length(i)).sum();
        if self.necks {
            fat + self.n_components() as f64 * self.neck_length
        } else {
            fat
        }
    }

    /// Dual graph of the limiting fiber (the `N`-cycle; a bare vertex without necks).
    pub fn dual_graph(&self) -> Result<DualGraph> {
        if self.necks {
            DualGraph::cycle(&self.areas)
        } else {
            DualGraph::new(
                vec![Component { label: "C1".into(), area: self.areas[0], multiplicity: 1 }],
                vec![],
            )
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentKind {
    Fat,
    Neck,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub kind: SegmentKind,
    /// Component index for fat segments, neck index for necks.
    pub index: usize,
    pub start: f64,
    pub end: f64,
    pub circumference: f64,
    /// Index of the first grid node (the node sitting at `start`).
    pub first_node: usize,
    pub n_elements: usize,
}

impl Segment {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

/// Discretised fiber at one value of `L`.
#[derive(Clone, Debug)]
pub struct WarpedChain {
    pub config: FamilyConfig,
    pub l_param: f64,
    pub c_thin: f64,
    pub total_length: f64,
    pub segments: Vec<Segment>,
    /// Node coordinates in `[0, P)`; element `e` spans `nodes[e]..nodes[e+1]`
    /// (the last element wraps to `P`).
    pub nodes: Vec<f64>,
    element_segment: Vec<usize>,
}

impl WarpedChain {
    /// Builds the chain at `L` with `resolution` nodes per unit length. Every
    /// interface is a grid node and every segment gets at least four elements.
    pub fn build(cfg: &FamilyConfig, l_param: f64, resolution: usize) -> Result<Self> {
        cfg.validate()?;
        if resolution < 8 {
            return validation(format!("resolution must be at least 8 nodes per unit length, got {resolution}"));
        }
        let c_thin = cfg.neck_law_factor * cfg.neck_length / l_param;
        if cfg.necks {
            if !(l_param > 2.0 * PI) {
                return Err(Error::ModelValidity(format!("L = {l_param} must exceed 2π")));
            }
            if c_thin >= cfg.fat_circumference {
                return Err(Error::ModelValidity(format!(
                    "neck circumference {c_thin} is not thinner than c_fat = {}",
                    cfg.fat_circumference
                )));
            }
        } else if !(l_param > 0.0) {
            return Err(Error::ModelValidity(format!("L = {l_param} must be positive")));
        }

        let mut layout = Vec::new();
        for i in 0..cfg.n_components() {
            layout.push((SegmentKind::Fat, i, cfg.fat_length(i), cfg.fat_circumference));
            if cfg.necks {
                layout.push((SegmentKind::Neck, i, cfg.neck_length, c_thin));
            }
        }
        let min_len = layout.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
        if cfg.smoothing_width >= min_len {
            return validation(format!(
                "smoothing_width {} must be smaller than the shortest segment {min_len}",
                cfg.smoothing_width
            ));
        }

        let mut segments = Vec::with_capacity(layout.len());
        let mut nodes = Vec::new();
        let mut element_segment = Vec::new();
        let mut x = 0.0;
        for (si, &(kind, index, len, c)) in layout.iter().enumerate() {
            if !(len > 0.0) {
                return Err(Error::Structural(format!("degenerate segment length {len}")));
            }
            let n_el = ((len * resolution as f64).ceil() as usize).max(4);
            let first_node = nodes.len();
            for k in 0..n_el {
                nodes.push(x + len * k as f64 / n_el as f64);
                element_segment.push(si);
            }
            segments.push(Segment { kind, index, start: x, end: x + len, circumference: c, first_node, n_elements: n_el });
            x += len;
        }
        Ok(Self {
            config: cfg.clone(),
            l_param,
            c_thin,
            total_length: x,
            segments,
            nodes,
            element_segment,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_components(&self) -> usize {
        self.config.n_components()
    }

    /// `|s| = e^{-L}`.
    pub fn s_modulus(&self) -> f64 {
        (-self.l_param).exp()
    }

    pub fn element_bounds(&self, e: usize) -> (f64, f64) {
        let x0 = self.nodes[e];
        let x1 = if e + 1 == self.nodes.len() { self.total_length } else { self.nodes[e + 1] };
        (x0, x1)
    }

    pub fn element_segment(&self, e: usize) -> &Segment {
        &self.segments[self.element_segment[e]]
    }

    pub fn fat_segment(&self, i: usize) -> &Segment {
        self.segments.iter().find(|s| s.kind == SegmentKind::Fat && s.index == i).expect("fat segment")
    }

    pub fn neck_segment(&self, i: usize) -> Option<&Segment> {
        self.segments.iter().find(|s| s.kind == SegmentKind::Neck && s.index == i)
    }

    /// Node indices `first..=last` of a segment (`last` may wrap to 0).
    pub fn segment_node_range(&self, seg: &Segment) -> (usize, usize) {
        (seg.first_node, (seg.first_node + seg.n_elements) % self.n_nodes())
    }

    /// `c(x)` for `x` inside element `e`. With sharp interfaces this is the
    /// element's segment value; with smoothing the two values across the
    /// nearest interface are blended by a smoothstep of width `w`.
    pub fn circumference_in_element(&self, e: usize, x: f64) -> f64 {
        let seg = self.element_segment(e);
        let w = self.config.smoothing_width;
        if w == 0.0 {
            return seg.circumference;
        }
        let n = self.segments.len();
        let si = self.element_segment[e];
        let prev = &self.segments[(si + n - 1) % n];
        let next = &self.segments[(si + 1) % n];
        if x - seg.start < 0.5 * w {
            let t = (x - seg.start + 0.5 * w) / w;
            prev.circumference + (seg.circumference - prev.circumference) * smoothstep(t)
        } else if seg.end - x < 0.5 * w {
            let t = (x - seg.end + 0.5 * w) / w;
            seg.circumference + (next.circumference - seg.circumference) * smoothstep(t)
        } else {
            seg.circumference
        }
    }

    /// Largest circumference on the chain.
    pub fn c_max(&self) -> f64 {
        self.segments.iter().map(|s| s.circumference).fold(0.0, f64::max)
    }

    /// Quadrature points `(x, weight, c(x))` on element `e`.
    pub(crate) fn element_quadrature(&self, e: usize) -> Vec<(f64, f64, f64)> {
        let (x0, x1) = self.element_bounds(e);
        let (gx, gw) = gauss_legendre(ELEMENT_QUAD);
        let h = x1 - x0;
        gx.iter()
            .zip(&gw)
            .map(|(xi, wi)| {
                let x = x0 + 0.5 * h * (xi + 1.0);
                (x, 0.5 * h * wi, self.circumference_in_element(e, x))
            })
            .collect()
    }

    /// `∫ φ_i c dx` for every nodal hat function (no `2π` factor).
    pub fn mass_weights(&self) -> Vec<f64> {
        let n = self.n_nodes();
        let mut w = vec![0.0; n];
        for e in 0..n {
            let (x0, x1) = self.element_bounds(e);
            let h = x1 - x0;
            for (x, qw, c) in self.element_quadrature(e) {
                let t = (x - x0) / h;
                w[e] += qw * c * (1.0 - t);
                w[(e + 1) % n] += qw * c * t;
            }
        }
        w
    }

    /// Conductance `2π c_thin / ℓ₀` of neck `i`.
    pub fn neck_conductance(&self) -> f64 {
        2.0 * PI * self.c_thin / self.config.neck_length
    }

    pub fn area_report(&self) -> AreaReport {
        let mut fat = vec![0.0; self.n_components()];
        let mut thin = 0.0;
        for e in 0..self.n_nodes() {
            let seg = *self.element_segment(e);
            let a: f64 = self.element_quadrature(e).iter().map(|(_, w, c)| 2.0 * PI * w * c).sum();
            match seg.kind {
                SegmentKind::Fat => fat[seg.index] += a,
                SegmentKind::Neck => thin += a,
            }
        }
        let total = fat.iter().sum::<f64>() + thin;
        AreaReport { fat_areas: fat, thin_total: thin, total }
    }

    pub fn total_area(&self) -> f64 {
        self.area_report().total
    }

    pub fn dual_graph(&self) -> Result<DualGraph> {
        self.config.dual_graph()
    }
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AreaReport {
    pub fat_areas: Vec<f64>,
    pub thin_total: f64,
    pub total: f64,
}

/// One term of a θ-invariant density `a(x)`.
#[derive(Clone, Debug, PartialEq)]
pub enum DensityTerm {
    /// `amplitude · cos(2π f x / P)` on the whole circle.
    GlobalCos { amplitude: f64, frequency: f64 },
    /// `amplitude · sin(2π f x / P)` on the whole circle.
    GlobalSin { amplitude: f64, frequency: f64 },
    /// `amplitude · sin(2π k (x − start) / len)` on fat segment `component`;
    /// integrates to zero over that segment.
    FatSine { component: usize, amplitude: f64, wavenumber: u32 },
    /// `amplitude · cos(2π k (x − start) / len)` on fat segment `component`.
    FatCos { component: usize, amplitude: f64, wavenumber: u32 },
}

/// Symbolic density: per-segment constants plus trigonometric terms.
/// Empty constant lists mean zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DensitySpec {
    pub fat: Vec<f64>,
    pub neck: Vec<f64>,
    pub terms: Vec<DensityTerm>,
}

impl DensitySpec {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn fat_constants(values: Vec<f64>) -> Self {
        Self { fat: values, ..Self::default() }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self { fat: vec![value; n], neck: vec![value; n], terms: vec![] }
    }

    pub fn with_term(mut self, t: DensityTerm) -> Self {
        self.terms.push(t);
        self
    }

    pub fn scaled(&self, t: f64) -> Self {
        let scale_term = |term: &DensityTerm| match *term {
            DensityTerm::GlobalCos { amplitude, frequency } => DensityTerm::GlobalCos { amplitude: t * amplitude, frequency },
            DensityTerm::GlobalSin { amplitude, frequency } => DensityTerm::GlobalSin { amplitude: t * amplitude, frequency },
            DensityTerm::FatSine { component, amplitude, wavenumber } => DensityTerm::FatSine { component, amplitude: t * amplitude, wavenumber },
            DensityTerm::FatCos { component, amplitude, wavenumber } => DensityTerm::FatCos { component, amplitude: t * amplitude, wavenumber },
        };
        Self {
            fat: self.fat.iter().map(|v| t * v).collect(),
            neck: self.neck.iter().map(|v| t * v).collect(),
            terms: self.terms.iter().map(scale_term).collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let add = |a: &[f64], b: &[f64]| -> Vec<f64> {
            let n = a.len().max(b.len());
            (0..n).map(|i| a.get(i).copied().unwrap_or(0.0) + b.get(i).copied().unwrap_or(0.0)).collect()
        };
        Self {
            fat: add(&self.fat, &other.fat),
            neck: add(&self.neck, &other.neck),
            terms: self.terms.iter().chain(&other.terms).cloned().collect(),
        }
    }

    fn check(&self, chain: &WarpedChain) -> Result<()> {
        let n = chain.n_components();
        let necks = if chain.config.necks { n } else { 0 };
        if self.fat.len() > n && self.fat[n..].iter().any(|v| *v != 0.0) {
            return Err(Error::Structural(format!("density references fat segment {} of {n}", self.fat.len())));
        }
        if self.neck.len() > necks && self.neck[necks..].iter().any(|v| *v != 0.0) {
            return Err(Error::Structural(format!("density references neck {} of {necks}", self.neck.len())));
        }
        for t in &self.terms {
            if let DensityTerm::FatSine { component, .. } | DensityTerm::FatCos { component, .. } = t {
                if *component >= n {
                    return Err(Error::Structural(format!("density term references fat segment {component} of {n}")));
                }
            }
        }
        Ok(())
    }

    /// Value at `x` inside segment `seg` (the segment disambiguates interfaces).
    pub fn eval(&self, chain: &WarpedChain, seg: &Segment, x: f64) -> f64 {
        let mut v = match seg.kind {
            SegmentKind::Fat => self.fat.get(seg.index).copied().unwrap_or(0.0),
            SegmentKind::Neck => self.neck.get(seg.index).copied().unwrap_or(0.0),
        };
        let p = chain.total_length;
        for t in &self.terms {
            v += match *t {
                DensityTerm::GlobalCos { amplitude, frequency } => amplitude * (2.0 * PI * frequency * x / p).cos(),
                DensityTerm::GlobalSin { amplitude, frequency } => amplitude * (2.0 * PI * frequency * x / p).sin(),
                DensityTerm::FatSine { component, amplitude, wavenumber } if seg.kind == SegmentKind::Fat && seg.index == component => {
                    amplitude * (2.0 * PI * wavenumber as f64 * (x - seg.start) / seg.length()).sin()
                }
                DensityTerm::FatCos { component, amplitude, wavenumber } if seg.kind == SegmentKind::Fat && seg.index == component => {
                    amplitude * (2.0 * PI * wavenumber as f64 * (x - seg.start) / seg.length()).cos()
                }
                _ => 0.0,
            };
        }
        v
    }
}

/// θ-invariant form `α = a dA` sampled on a chain.
#[derive(Clone, Debug)]
pub struct DensityField {
    pub spec: DensitySpec,
    /// Constant subtracted to make `∫ a dA = 0` (zero when not projected).
    pub projection_shift: f64,
    /// `∫ a dA` before projection.
    pub raw_total_integral: f64,
    /// `∫ a dA` as stored.
    pub total_integral: f64,
    /// Nodal samples (the segment starting at a node decides interface values).
    pub samples: Vec<f64>,
    /// Load vector `∫ a φ_i c dx` (no `2π`).
    pub load: Vec<f64>,
    /// `v_i = ∫_{fat i} a dA`.
    pub component_integrals: Vec<f64>,
    /// `∫_{neck i} a dA`.
    pub neck_integrals: Vec<f64>,
    pub sup_norm: f64,
    /// `∫ |a| dA` over fat segments only and over the whole fiber.
    pub l1_fat: f64,
    pub l1_total: f64,
}

impl DensityField {
    /// Samples `spec` on `chain`; with `project` the constant is removed so the
    /// fiber integral vanishes.
    pub fn from_spec(spec: &DensitySpec, chain: &WarpedChain, project: bool) -> Result<Self> {
        spec.check(chain)?;
        let n = chain.n_nodes();
        let mut load = vec![0.0; n];
        for e in 0..n {
            let seg = *chain.element_segment(e);
            let (x0, x1) = chain.element_bounds(e);
            for (x, w, c) in chain.element_quadrature(e) {
                let t = (x - x0) / (x1 - x0);
                let a = spec.eval(chain, &seg, x);
                load[e] += w * c * a * (1.0 - t);
                load[(e + 1) % n] += w * c * a * t;
            }
        }
        let raw_total_integral = 2.0 * PI * load.iter().sum::<f64>();
        let shift = if project { raw_total_integral / chain.total_area() } else { 0.0 };
        if shift != 0.0 {
            for (l, m) in load.iter_mut().zip(chain.mass_weights()) {
                *l -= shift * m;
            }
        }
        let mut comp = vec![0.0; chain.n_components()];
        let mut neck = vec![0.0; if chain.config.necks { chain.n_components() } else { 0 }];
        let (mut sup, mut l1_fat, mut l1_total) = (0.0f64, 0.0, 0.0);
        for e in 0..n {
            let seg = *chain.element_segment(e);
            for (x, w, c) in chain.element_quadrature(e) {
                let a = spec.eval(chain, &seg, x) - shift;
                let da = 2.0 * PI * w * c;
                sup = sup.max(a.abs());
                l1_total += a.abs() * da;
                match seg.kind {
                    SegmentKind::Fat => {
                        comp[seg.index] += a * da;
                        l1_fat += a.abs() * da;
                    }
                    SegmentKind::Neck => neck[seg.index] += a * da,
                }
            }
        }
        let samples = (0..n)
            .map(|i| {
                let seg = *chain.element_segment(i);
                let v = spec.eval(chain, &seg, chain.nodes[i]) - shift;
                sup = sup.max(v.abs());
                v
            })
            .collect();
        Ok(Self {
            spec: spec.clone(),
            projection_shift: shift,
            raw_total_integral,
            total_integral: 2.0 * PI * load.iter().sum::<f64>(),
            samples,
            load,
            component_integrals: comp,
            neck_integrals: neck,
            sup_norm: sup,
            l1_fat,
            l1_total,
        })
    }

    /// Component integrals with each neck's integral split evenly between its
    /// two end components.
    pub fn component_integrals_with_necks(&self) -> Vec<f64> {
        let n = self.component_integrals.len();
        let mut v = self.component_integrals.clone();
        for (i, m) in self.neck_integrals.iter().enumerate() {
            v[i] += 0.5 * m;
            v[(i + 1) % n] += 0.5 * m;
        }
        v
    }

    /// Scale used when judging `∫ a dA ≈ 0`.
    pub fn integral_scale(&self) -> f64 {
        self.l1_total.max(self.sup_norm).max(f64::MIN_POSITIVE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn i2_defaults_at_l100() {
        let chain = WarpedChain::build(&FamilyConfig::reduced_cycle(2), 100.0, 32).unwrap();
        assert!((chain.c_thin - 0.01).abs() < 1e-15);
        assert!((chain.config.fat_length(0) - 0.5).abs() < 1e-15);
        assert!((chain.total_length - 3.0).abs() < 1e-14);
        let r = chain.area_report();
        assert!((r.thin_total - 0.125_663_706_143_591_7).abs() < 1e-12);
        assert!((r.total - (1.0 + 4.0 * PI / 100.0)).abs() < 1e-12);
        assert!((2.0 * PI * 0.01 - 0.06283).abs() < 1e-5);
        for a in &r.fat_areas {
            assert!((a - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn thin_area_scales_with_inverse_l() {
        let cfg = FamilyConfig::reduced_cycle(3);
        let a = WarpedChain::build(&cfg, 40.0, 16).unwrap().area_report().thin_total;
        let b = WarpedChain::build(&cfg, 400.0, 16).unwrap().area_report().thin_total;
        assert!((a / b - 10.0).abs() < 1e-10);
    }

    #[test]
    fn flat_torus_has_no_thin_part() {
        let chain = WarpedChain::build(&FamilyConfig::flat_torus(), 50.0, 16).unwrap();
        let r = chain.area_report();
        assert_eq!(r.thin_total, 0.0);
        assert!((r.total - 1.0).abs() < 1e-12);
        assert!((chain.total_length - 1.0).abs() < 1e-15);
    }

    #[test]
    fn model_validity_and_resolution_errors() {
        let cfg = FamilyConfig::reduced_cycle(2);
        assert!(matches!(WarpedChain::build(&cfg, 2.0 * PI, 16), Err(Error::ModelValidity(_))));
        assert!(matches!(WarpedChain::build(&cfg, 50.0, 4), Err(Error::Validation(_))));
        let bad = FamilyConfig { areas: vec![0.5, -0.1], ..cfg };
        assert!(WarpedChain::build(&bad, 50.0, 16).is_err());
    }

    #[test]
    fn interfaces_are_nodes_and_conductance_law_holds() {
        for n in 1..5 {
            for l in [20.0, 77.0, 300.0] {
                let chain = WarpedChain::build(&FamilyConfig::reduced_cycle(n), l, 24).unwrap();
                for seg in &chain.segments {
                    assert_eq!(chain.nodes[seg.first_node], seg.start);
                }
                assert!((chain.neck_conductance() - 2.0 * PI / l).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn density_examples() {
        let chain = WarpedChain::build(&FamilyConfig::reduced_cycle(2), 100.0, 32).unwrap();
        let one = DensityField::from_spec(&DensitySpec::constant(2, 1.0), &chain, true).unwrap();
        assert!(one.samples.iter().all(|v| v.abs() < 1e-12));
        assert!(one.load.iter().all(|v| v.abs() < 1e-14));

        let step = DensityField::from_spec(&DensitySpec::fat_constants(vec![2.0, -2.0]), &chain, true).unwrap();
        assert!((step.component_integrals[0] - 1.0).abs() < 1e-12);
        assert!((step.component_integrals[1] + 1.0).abs() < 1e-12);

        let cos = DensitySpec::zero().with_term(DensityTerm::GlobalCos { amplitude: 1.0, frequency: 1.0 });
        let f = DensityField::from_spec(&cos, &chain, true).unwrap();
        assert!(f.total_integral.abs() < 1e-10);

        let bad = DensitySpec::fat_constants(vec![1.0, 2.0, 3.0]);
        assert!(matches!(DensityField::from_spec(&bad, &chain, true), Err(Error::Structural(_))));
    }

    #[test]
    fn fat_sine_has_zero_component_integral() {
        let chain = WarpedChain::build(&FamilyConfig::reduced_cycle(3), 60.0, 32).unwrap();
        let spec = DensitySpec::zero().with_term(DensityTerm::FatSine { component: 1, amplitude: 3.0, wavenumber: 1 });
        let f = DensityField::from_spec(&spec, &chain, false).unwrap();
        assert!(f.raw_total_integral.abs() < 1e-13);
        assert!(f.component_integrals.iter().all(|v| v.abs() < 1e-13));
        assert!((f.sup_norm - 3.0).abs() < 1e-2);
    }

    #[test]
    fn smoothing_keeps_areas_close() {
        let sharp = WarpedChain::build(&FamilyConfig::reduced_cycle(2), 100.0, 64).unwrap();
        let cfg = FamilyConfig { smoothing_width: 0.05, ..FamilyConfig::reduced_cycle(2) };
        let smooth = WarpedChain::build(&cfg, 100.0, 64).unwrap();
        assert!((smooth.total_area() - sharp.total_area()).abs() < 1e-6);
    }
}
