//! Dual graphs of singular fibers, their intersection matrices, and the
//! pseudoinverse formula for the logarithmic slope of the height pairing.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{validation, Error, Result};
use crate::linalg::{pinv_sym, sym_eigen};

/// Tolerance for every symmetric-eigenvalue decision on intersection matrices.
pub const ZARISKI_TOL: f64 = 1e-10;
/// Relative eigenvalue cutoff of the pseudoinverse.
pub const PINV_CUTOFF: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub label: String,
    pub area: f64,
    pub multiplicity: u32,
}

/// Combinatorial singular fiber. One edge per node; a self-loop is a node of
/// an irreducible component, parallel edges are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct DualGraph {
    pub components: Vec<Component>,
    pub edges: Vec<(usize, usize)>,
}

impl DualGraph {
    pub fn new(components: Vec<Component>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let g = Self { components, edges };
        g.validate()?;
        Ok(g)
    }

    /// The `n`-cycle of an Iₙ fiber: edge `i` joins components `i` and `i+1 mod n`.
    pub fn cycle(areas: &[f64]) -> Result<Self> {
        let n = areas.len();
        let components = areas
            .iter()
            .enumerate()
            .map(|(i, &a)| Component { label: format!("C{}", i + 1), area: a, multiplicity: 1 })
            .collect();
        let edges = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::new(components, edges)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn multiplicities(&self) -> Vec<u32> {
        self.components.iter().map(|c| c.multiplicity).collect()
    }

    pub fn areas(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.area).collect()
    }

    pub fn is_reduced(&self) -> bool {
        self.components.iter().all(|c| c.multiplicity == 1)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if n == 0 {
            return Err(Error::Structural("dual graph needs at least one component".into()));
        }
        for c in &self.components {
            if !(c.area > 0.0) || !c.area.is_finite() {
                return validation(format!("component {} has non-positive area {}", c.label, c.area));
            }
            if c.multiplicity == 0 {
                return validation(format!("component {} has zero multiplicity", c.label));
            }
        }
        for &(i, j) in &self.edges {
            if i >= n || j >= n {
                return Err(Error::Structural(format!("edge ({i}, {j}) references a missing component")));
            }
        }
        if !self.is_connected() {
            return Err(Error::Structural("dual graph is disconnected".into()));
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(i, j) in &self.edges {
                let w = if i == v { j } else if j == v { i } else { continue };
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Plain-text form: `component <label> area=<r> mult=<n>` and `edge <i> <j>` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.components {
            let _ = writeln!(out, "component {} area={} mult={}", c.label, c.area, c.multiplicity);
        }
        for &(i, j) in &self.edges {
            let _ = writeln!(out, "edge {i} {j}");
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut components = Vec::new();
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse(format!("line {}: {msg}: {raw:?}", lineno + 1));
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("component") => {
                    let label = parts.next().ok_or_else(|| err("missing label"))?.to_string();
                    let (mut area, mut mult) = (None, None);
                    for kv in parts {
                        match kv.split_once('=') {
                            Some(("area", v)) => area = Some(v.parse::<f64>().map_err(|_| err("bad area"))?),
                            Some(("mult", v)) => mult = Some(v.parse::<u32>().map_err(|_| err("bad mult"))?),
                            _ => return Err(err("unknown component field")),
                        }
                    }
                    components.push(Component {
                        label,
                        area: area.ok_or_else(|| err("missing area"))?,
                        multiplicity: mult.unwrap_or(1),
                    });
                }
                Some("edge") => {
                    let i = parts.next().and_then(|v| v.parse().ok()).ok_or_else(|| err("bad edge"))?;
                    let j = parts.next().and_then(|v| v.parse().ok()).ok_or_else(|| err("bad edge"))?;
                    if parts.next().is_some() {
                        return Err(err("trailing tokens"));
                    }
                    edges.push((i, j));
                }
                _ => return Err(err("unknown record")),
            }
        }
        Self::new(components, edges)
    }
}

/// `M_ij = C_i · C_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntersectionMatrix {
    pub entries: DMatrix<f64>,
}

impl IntersectionMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

/// Off-diagonal entries count edges; the diagonal is forced by `M · m = 0`.
/// Self-loops add 2 to both the degree and the node count of their vertex and
/// therefore drop out.
pub fn build_intersection_matrix(g: &DualGraph) -> Result<IntersectionMatrix> {
    g.validate()?;
    let n = g.len();
    let mut counts = vec![vec![0i64; n]; n];
    for &(i, j) in &g.edges {
        if i != j {
            counts[i][j] += 1;
            counts[j][i] += 1;
        }
    }
    let mult: Vec<i64> = g.components.iter().map(|c| c.multiplicity as i64).collect();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut weighted = 0i64;
        for j in 0..n {
            if i != j {
                m[(i, j)] = counts[i][j] as f64;
                weighted += mult[j] * counts[i][j];
            }
        }
        m[(i, i)] = if weighted % mult[i] == 0 {
            -((weighted / mult[i]) as f64)
        } else {
            -(weighted as f64) / mult[i] as f64
        };
    }
    Ok(IntersectionMatrix { entries: m })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZariskiReport {
    pub max_eigenvalue: f64,
    pub kernel_dim: usize,
    pub kernel_residual: f64,
    pub symmetric: bool,
    pub pass: bool,
}

/// Checks negative semidefiniteness and that the kernel is the line through
/// the multiplicity vector. Failures are reported, never raised.
pub fn validate_zariski(m: &IntersectionMatrix, mult: &[u32]) -> ZariskiReport {
    let a = &m.entries;
    let symmetric = crate::linalg::asymmetry(a) <= ZARISKI_TOL;
    let (values, _) = sym_eigen(a);
    let max_eigenvalue = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = values.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let kernel_dim = values.iter().filter(|v| v.abs() <= ZARISKI_TOL * scale).count();
    let kernel_residual = if mult.len() == a.nrows() {
        let v = DVector::from_iterator(mult.len(), mult.iter().map(|&x| x as f64));
        (a * v).norm()
    } else {
        f64::INFINITY
    };
    let pass = symmetric && max_eigenvalue <= ZARISKI_TOL && kernel_dim == 1 && kernel_residual <= ZARISKI_TOL;
    ZariskiReport { max_eigenvalue, kernel_dim, kernel_residual, symmetric, pass }
}

pub fn pseudoinverse(m: &IntersectionMatrix) -> Result<DMatrix<f64>> {
    let asym = crate::linalg::asymmetry(&m.entries);
    if asym > ZARISKI_TOL {
        return validation(format!("intersection matrix is not symmetric (‖M − Mᵀ‖ = {asym:e})"));
    }
    Ok(pinv_sym(&m.entries, PINV_CUTOFF))
}

/// Residual norms of the four Penrose identities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenroseResiduals {
    pub mpm: f64,
    pub pmp: f64,
    pub mp_asym: f64,
    pub pm_asym: f64,
}

impl PenroseResiduals {
    pub fn max(&self) -> f64 {
        self.mpm.max(self.pmp).max(self.mp_asym).max(self.pm_asym)
    }
}

pub fn penrose_residuals(m: &DMatrix<f64>, p: &DMatrix<f64>) -> PenroseResiduals {
    let mp = m * p;
    let pm = p * m;
    PenroseResiduals {
        mpm: (&mp * m - m).norm(),
        pmp: (&pm * p - p).norm(),
        mp_asym: (&mp - mp.transpose()).norm(),
        pm_asym: (&pm - pm.transpose()).norm(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairingConstant {
    pub value: f64,
    pub v_alpha: Vec<f64>,
    pub v_beta: Vec<f64>,
}

/// Tolerance on `Σ v_i` for component-integral vectors.
pub const ZERO_SUM_TOL: f64 = 1e-8;

/// `c = v_αᵀ (M⁺)ᵀ v_β`.
pub fn pairing_constant(m_plus: &DMatrix<f64>, v_alpha: &[f64], v_beta: &[f64]) -> Result<PairingConstant> {
    let n = m_plus.nrows();
    if v_alpha.len() != n || v_beta.len() != n {
        return validation(format!(
            "dimension mismatch: M⁺ is {n}×{n}, vectors have lengths {} and {}",
            v_alpha.len(),
            v_beta.len()
        ));
    }
    for (name, v) in [("v_alpha", v_alpha), ("v_beta", v_beta)] {
        let sum: f64 = v.iter().sum();
        let scale = v.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        if sum.abs() > ZERO_SUM_TOL * scale {
            return validation(format!(
                "{name} sums to {sum:e}; the form violates Condition \"integrability on general fibers\""
            ));
        }
    }
    let a = DVector::from_column_slice(v_alpha);
    let b = DVector::from_column_slice(v_beta);
    let value = (a.transpose() * m_plus.transpose() * b)[(0, 0)];
    Ok(PairingConstant { value, v_alpha: v_alpha.to_vec(), v_beta: v_beta.to_vec() })
}

/// Catalog of Kodaira fiber types used as test data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KodairaType {
    I(u32),
    I0Star,
    II,
    III,
    IV,
}

impl FromStr for KodairaType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "I_0*" | "I0*" => return Ok(Self::I0Star),
            "II" => return Ok(Self::II),
            "III" => return Ok(Self::III),
            "IV" => return Ok(Self::IV),
            _ => {}
        }
        let digits = t.strip_prefix("I_").or_else(|| t.strip_prefix('I'));
        match digits.and_then(|d| d.parse::<u32>().ok()) {
            Some(n) if n >= 1 => Ok(Self::I(n)),
            _ => Err(Error::Parse(format!("unknown Kodaira type {s:?}"))),
        }
    }
}

impl std::fmt::Display for KodairaType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::I(n) => write!(f, "I_{n}"),
            Self::I0Star => write!(f, "I_0*"),
            Self::II => write!(f, "II"),
            Self::III => write!(f, "III"),
            Self::IV => write!(f, "IV"),
        }
    }
}

/// Dual graph with multiplicities for a catalog type; areas are split evenly.
///
/// Edges record intersection numbers, so the tangency of type III appears as
/// two parallel edges and the triple point of type IV as three edges.
pub fn kodaira_catalog(t: KodairaType) -> Result<DualGraph> {
    let comp = |i: usize, area: f64, mult: u32| Component { label: format!("C{i}"), area, multiplicity: mult };
    match t {
        KodairaType::I(0) => Err(Error::Parse("I_n requires n ≥ 1".into())),
        KodairaType::I(n) => DualGraph::cycle(&vec![1.0 / n as f64; n as usize]),
        KodairaType::II => DualGraph::new(vec![comp(1, 1.0, 1)], vec![]),
        KodairaType::III => DualGraph::new(vec![comp(1, 0.5, 1), comp(2, 0.5, 1)], vec![(0, 1), (0, 1)]),
        KodairaType::IV => DualGraph::new(
            (1..=3).map(|i| comp(i, 1.0 / 3.0, 1)).collect(),
            vec![(0, 1), (1, 2), (0, 2)],
        ),
        KodairaType::I0Star => {
            let mut comps = vec![comp(0, 2.0 / 6.0, 2)];
            comps.extend((1..=4).map(|i| comp(i, 1.0 / 6.0, 1)));
            DualGraph::new(comps, (1..=4).map(|i| (0, i)).collect())
        }
    }
}

/// Seeded random connected reduced graph on `n` vertices: a random spanning
/// tree plus up to `n` extra edges (parallel edges and self-loops allowed).
pub fn random_reduced_graph(seed: u64, n: usize) -> Result<DualGraph> {
    if n == 0 {
        return Err(Error::Structural("random graph needs n ≥ 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.push((u, v));
    }
    let extra = rng.random_range(0..=n);
    for _ in 0..extra {
        edges.push((rng.random_range(0..n), rng.random_range(0..n)));
    }
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let components = raw
        .iter()
        .enumerate()
        .map(|(i, a)| Component { label: format!("C{}", i + 1), area: a / total, multiplicity: 1 })
        .collect();
    DualGraph::new(components, edges)
}

/// Tab-separated, one row per line.
pub fn format_matrix(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eigen;

    fn mat(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), rows.len(), |i, j| rows[i][j])
    }

    #[test]
    fn i1_is_zero() {
        let g = kodaira_catalog(KodairaType::I(1)).unwrap();
        assert_eq!(g.edges, vec![(0, 0)]);
        let m = build_intersection_matrix(&g).unwrap();
        assert_eq!(m.entries, mat(&[&[0.0]]));
    }

    #[test]
    fn i2_and_i3_matrices() {
        let m2 = build_intersection_matrix(&kodaira_catalog(KodairaType::I(2)).unwrap()).unwrap();
        assert_eq!(m2.entries, mat(&[&[-2.0, 2.0], &[2.0, -2.0]]));
        let m3 = build_intersection_matrix(&kodaira_catalog(KodairaType::I(3)).unwrap()).unwrap();
        assert_eq!(m3.entries, mat(&[&[-2.0, 1.0, 1.0], &[1.0, -2.0, 1.0], &[1.0, 1.0, -2.0]]));
        // dense oracle: eigenvalues 0, -3, -3
        let (vals, _) = sym_eigen(&m3.entries);
        assert!((vals[0] + 3.0).abs() < 1e-12 && (vals[1] + 3.0).abs() < 1e-12 && vals[2].abs() < 1e-12);
    }

    #[test]
    fn zariski_examples() {
        let m3 = build_intersection_matrix(&kodaira_catalog(KodairaType::I(3)).unwrap()).unwrap();
        let r = validate_zariski(&m3, &[1, 1, 1]);
        assert!(r.pass && r.kernel_dim == 1);
        let zero = IntersectionMatrix { entries: mat(&[&[0.0]]) };
        assert!(validate_zariski(&zero, &[1]).pass);
        let pos = IntersectionMatrix { entries: mat(&[&[1.0]]) };
        let r = validate_zariski(&pos, &[1]);
        assert!(!r.pass && r.max_eigenvalue > 0.0);
    }

    #[test]
    fn pseudoinverse_examples() {
        let m2 = IntersectionMatrix { entries: mat(&[&[-2.0, 2.0], &[2.0, -2.0]]) };
        let p = pseudoinverse(&m2).unwrap();
        let expect = mat(&[&[-0.125, 0.125], &[0.125, -0.125]]);
        assert!((&p - expect).amax() < 1e-14);
        let zero = IntersectionMatrix { entries: mat(&[&[0.0]]) };
        assert_eq!(pseudoinverse(&zero).unwrap(), mat(&[&[0.0]]));
        let m3 = build_intersection_matrix(&kodaira_catalog(KodairaType::I(3)).unwrap()).unwrap();
        let p3 = pseudoinverse(&m3).unwrap();
        assert!((&p3 * DVector::from_element(3, 1.0)).norm() < 1e-12);
        assert!(penrose_residuals(&m3.entries, &p3).mpm < 1e-12);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let m = IntersectionMatrix { entries: mat(&[&[-1.0, 2.0], &[0.0, -1.0]]) };
        assert!(matches!(pseudoinverse(&m), Err(Error::Validation(_))));
    }

    #[test]
    fn pairing_constant_examples() {
        let p = mat(&[&[-0.125, 0.125], &[0.125, -0.125]]);
        let c = pairing_constant(&p, &[1.0, -1.0], &[1.0, -1.0]).unwrap();
        assert!((c.value + 0.5).abs() < 1e-15);
        assert_eq!(pairing_constant(&p, &[0.0, 0.0], &[1.0, -1.0]).unwrap().value, 0.0);
        let err = pairing_constant(&p, &[1.0, 0.0], &[1.0, -1.0]).unwrap_err();
        assert!(err.to_string().contains("integrability on general fibers"));
    }

    #[test]
    fn catalog_entries() {
        let g = kodaira_catalog(KodairaType::I(4)).unwrap();
        assert_eq!(g.multiplicities(), vec![1, 1, 1, 1]);
        assert_eq!(g.edges.len(), 4);
        let star = kodaira_catalog(KodairaType::I0Star).unwrap();
        let m = build_intersection_matrix(&star).unwrap();
        let v = DVector::from_vec(vec![2.0, 1.0, 1.0, 1.0, 1.0]);
        assert!((&m.entries * v).norm() == 0.0);
        assert_eq!(m.entries[(0, 0)], -2.0);
        for t in ["I_1", "I_2", "I_7", "I_0*", "II", "III", "IV"] {
            let t: KodairaType = t.parse().unwrap();
            let g = kodaira_catalog(t).unwrap();
            let m = build_intersection_matrix(&g).unwrap();
            assert!(validate_zariski(&m, &g.multiplicities()).pass, "{t}");
        }
        assert!("I_x".parse::<KodairaType>().is_err());
        assert!("V".parse::<KodairaType>().is_err());
    }

    #[test]
    fn disconnected_and_bad_area() {
        let c = |a| Component { label: "C".into(), area: a, multiplicity: 1 };
        assert!(matches!(DualGraph::new(vec![c(0.5), c(0.5)], vec![]), Err(Error::Structural(_))));
        assert!(matches!(DualGraph::new(vec![c(0.0)], vec![]), Err(Error::Validation(_))));
    }

    #[test]
    fn text_format_round_trip() {
        let g = kodaira_catalog(KodairaType::I0Star).unwrap();
        let back = DualGraph::parse_text(&g.to_text()).unwrap();
        assert_eq!(g, back);
        assert!(DualGraph::parse_text("vertex a").is_err());
        assert_eq!(format_matrix(&mat(&[&[-2.0, 2.0], &[2.0, -2.0]])), "-2\t2\n2\t-2\n");
    }

    #[test]
    fn random_graphs_are_seeded() {
        assert_eq!(random_reduced_graph(5, 6).unwrap(), random_reduced_graph(5, 6).unwrap());
    }
}
