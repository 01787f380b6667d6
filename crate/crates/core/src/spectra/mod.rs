//! Mixed Dirichlet/Neumann eigenproblems on the half disk for the eight
//! characters of the symmetry group, and the index/nullity bookkeeping built
//! on them.

pub mod eigen;
pub mod fem;
pub mod mesh;

use std::fmt;

use serde::{Deserialize, Serialize};
use sprs::CsMat;

use crate::error::{Error, Result};
use crate::theta::ThetaParam;

pub use eigen::{smallest_eigenpairs, EigenPairs};
pub use mesh::{mesh_fundamental_domain, BoundaryArc, Mesh, DEFAULT_H};

/// Eigenvalues per sector when not specified.
pub const DEFAULT_K: usize = 8;
/// Floor of the cluster tolerance around 2.
pub const CLUSTER_TOL_FLOOR: f64 = 5e-3;
/// Multiple of the extrapolation error added to the cluster tolerance.
pub const CLUSTER_ERR_FACTOR: f64 = 3.0;
/// Window around 2 whose extrapolation errors feed the cluster tolerance.
pub const CLUSTER_WINDOW: f64 = 0.05;
/// Eigenvalues below this are treated as the constant mode.
pub const ZERO_MODE_TOL: f64 = 1e-6;
/// Slack allowed when testing a tracked branch for monotonicity.
pub const MONOTONE_SLACK: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bc {
    Neumann,
    Dirichlet,
}

impl Bc {
    fn from_sign(s: i8) -> Bc {
        if s > 0 {
            Bc::Neumann
        } else {
            Bc::Dirichlet
        }
    }

    pub fn letter(self) -> char {
        match self {
            Bc::Neumann => 'N',
            Bc::Dirichlet => 'D',
        }
    }
}

/// A character of the group, given by its signs on `s₁`, `j`, `s₃`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectorSpec {
    pub s1: i8,
    pub j: i8,
    pub s3: i8,
}

impl SectorSpec {
    pub fn new(s1: i8, j: i8, s3: i8) -> Result<Self> {
        if [s1, j, s3].iter().any(|s| s.abs() != 1) {
            return Err(Error::InvalidArgument(format!("sector signs must be +-1, got ({s1}, {j}, {s3})")));
        }
        Ok(SectorSpec { s1, j, s3 })
    }

    pub const V1: SectorSpec = SectorSpec { s1: 1, j: -1, s3: 1 };
    pub const V2: SectorSpec = SectorSpec { s1: -1, j: -1, s3: 1 };
    pub const ALL_NEUMANN: SectorSpec = SectorSpec { s1: 1, j: 1, s3: 1 };

    /// Conditions on `Γ₁..Γ₄`.
    pub fn conditions(&self) -> [Bc; 4] {
        [
            Bc::from_sign(self.s1),
            Bc::from_sign(self.j * self.s1),
            Bc::from_sign(self.s3),
            Bc::from_sign(self.j * self.s3),
        ]
    }

    pub fn condition(&self, arc: BoundaryArc) -> Bc {
        self.conditions()[arc as usize]
    }

    /// Sign string such as `+-+`.
    pub fn label(&self) -> String {
        [self.s1, self.j, self.s3].iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
    }

    pub fn bc_string(&self) -> String {
        self.conditions().iter().map(|b| b.letter()).collect()
    }

    /// Parses `+-+`, `v1`, `v2` or a four-letter condition string like `NDND`.
    pub fn parse(s: &str) -> Result<SectorSpec> {
        let t = s.trim();
        match t {
            "v1" => return Ok(SectorSpec::V1),
            "v2" => return Ok(SectorSpec::V2),
            _ => {}
        }
        if t.len() == 3 && t.chars().all(|c| c == '+' || c == '-') {
            let v: Vec<i8> = t.chars().map(|c| if c == '+' { 1 } else { -1 }).collect();
            return SectorSpec::new(v[0], v[1], v[2]);
        }
        sector_table()
            .into_iter()
            .find(|sec| sec.bc_string() == t.to_ascii_uppercase())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown sector '{s}'")))
    }
}

impl fmt::Display for SectorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// All eight characters, ordered by `(s₁, j, s₃)` with `+` first.
pub fn sector_table() -> Vec<SectorSpec> {
    let mut out = Vec::with_capacity(8);
    for s1 in [1, -1] {
        for j in [1, -1] {
            for s3 in [1, -1] {
                out.push(SectorSpec { s1, j, s3 });
            }
        }
    }
    out
}

/// A mesh with its assembled matrices, shared by all sectors.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub stiffness: CsMat<f64>,
    pub mass: CsMat<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectorSolution {
    pub sector: SectorSpec,
    pub values: Vec<f64>,
    /// Eigenvectors on all mesh vertices (zero on Dirichlet vertices).
    #[serde(skip)]
    pub vectors: Option<Vec<Vec<f64>>>,
    pub dofs: usize,
}

impl Discretization {
    pub fn new(theta: &ThetaParam, h: f64) -> Result<Self> {
        let mesh = mesh_fundamental_domain(theta, h, true)?;
        let (stiffness, mass) = fem::assemble(&mesh);
        Ok(Discretization { mesh, stiffness, mass })
    }

    /// Indices of vertices not on a Dirichlet arc of the sector.
    pub fn free_dofs(&self, sector: &SectorSpec) -> Vec<usize> {
        let dirichlet: u8 = BoundaryArc::ALL
            .iter()
            .filter(|a| sector.condition(**a) == Bc::Dirichlet)
            .map(|a| a.bit())
            .fold(0, |x, y| x | y);
        (0..self.mesh.num_vertices()).filter(|&i| self.mesh.vertex_arcs[i] & dirichlet == 0).collect()
    }

    pub fn solve(&self, sector: &SectorSpec, k: usize, with_vectors: bool) -> Result<SectorSolution> {
        if k == 0 {
            return Err(Error::InvalidArgument("need at least one eigenvalue".into()));
        }
        let free = self.free_dofs(sector);
        let kk = fem::restrict(&self.stiffness, &free);
        let mm = fem::restrict(&self.mass, &free);
        let pairs = smallest_eigenpairs(&kk, &mm, k.min(free.len()))?;
        let vectors = with_vectors.then(|| {
            pairs
                .vectors
                .iter()
                .map(|x| {
                    let mut full = vec![0.0; self.mesh.num_vertices()];
                    for (v, &i) in x.iter().zip(&free) {
                        full[i] = *v;
                    }
                    full
                })
                .collect()
        });
        Ok(SectorSolution { sector: *sector, values: pairs.values, vectors, dofs: free.len() })
    }
}

pub fn solve_sector(theta: &ThetaParam, sector: &SectorSpec, k: usize, h: f64) -> Result<SectorSolution> {
    Discretization::new(theta, h)?.solve(sector, k, true)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectorEigenvalues {
    pub sector: String,
    pub conditions: String,
    pub values: Vec<f64>,
    /// Values on the coarse and fine meshes when extrapolated.
    pub coarse: Option<Vec<f64>>,
    pub fine: Option<Vec<f64>>,
    pub extrapolation_err: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaggedEigenvalue {
    pub value: f64,
    pub sector: String,
    pub index: usize,
    pub err: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub theta: f64,
    pub h: f64,
    pub k_per_sector: usize,
    pub richardson: bool,
    pub sectors: Vec<SectorEigenvalues>,
    pub merged: Vec<TaggedEigenvalue>,
    pub tol_cluster: f64,
    pub ind: usize,
    pub nul: usize,
    /// Weighted area of the finest mesh; the full surface has eight copies.
    pub weighted_area: f64,
    pub vertices: Vec<usize>,
}

impl SpectrumResult {
    /// Smallest merged eigenvalue above the constant mode.
    pub fn lambda1(&self) -> Option<f64> {
        self.merged.iter().map(|e| e.value).find(|&v| v > ZERO_MODE_TOL)
    }

    pub fn sector(&self, spec: &SectorSpec) -> Option<&SectorEigenvalues> {
        let label = spec.label();
        self.sectors.iter().find(|s| s.sector == label)
    }

    pub fn cluster(&self) -> Vec<&TaggedEigenvalue> {
        self.merged.iter().filter(|e| (e.value - 2.0).abs() <= self.tol_cluster).collect()
    }
}

/// Cluster tolerance from per-eigenvalue extrapolation errors.
pub fn cluster_tolerance(floor: f64, values_and_errs: impl Iterator<Item = (f64, f64)>) -> f64 {
    let err = values_and_errs
        .filter(|(v, _)| (v - 2.0).abs() <= CLUSTER_WINDOW)
        .map(|(_, e)| e)
        .fold(0.0, f64::max);
    floor.max(CLUSTER_ERR_FACTOR * err)
}

/// Discretization and counting parameters shared by the spectral drivers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub k: usize,
    pub h: f64,
    pub richardson: bool,
    pub cluster_floor: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { k: DEFAULT_K, h: DEFAULT_H, richardson: true, cluster_floor: CLUSTER_TOL_FLOOR }
    }
}

impl SpectrumOptions {
    pub fn new(k: usize, h: f64, richardson: bool) -> Self {
        SpectrumOptions { k, h, richardson, cluster_floor: CLUSTER_TOL_FLOOR }
    }
}

/// `(4 λ_{h/2} − λ_h) / 3` with the difference to the fine value as error.
pub fn richardson(coarse: f64, fine: f64) -> (f64, f64) {
    let ext = (4.0 * fine - coarse) / 3.0;
    (ext, (ext - fine).abs())
}

pub fn spectrum_for(theta: &ThetaParam, sectors: &[SectorSpec], opts: &SpectrumOptions) -> Result<SpectrumResult> {
    let SpectrumOptions { k, h, richardson: extrapolate, cluster_floor } = *opts;
    let fine_h = if extrapolate { 0.5 * h } else { h };
    let coarse = extrapolate.then(|| Discretization::new(theta, h)).transpose()?;
    let fine = Discretization::new(theta, fine_h)?;
    let mut out = Vec::with_capacity(sectors.len());
    for sec in sectors {
        let f = fine.solve(sec, k, false)?.values;
        let (values, errs, c) = match &coarse {
            Some(cd) => {
                let c = cd.solve(sec, k, false)?.values;
                let (v, e): (Vec<f64>, Vec<f64>) =
                    c.iter().zip(&f).map(|(a, b)| richardson(*a, *b)).unzip();
                (v, e, Some(c))
            }
            None => (f.clone(), vec![0.0; f.len()], None),
        };
        out.push(SectorEigenvalues {
            sector: sec.label(),
            conditions: sec.bc_string(),
            values,
            fine: c.as_ref().map(|_| f.clone()),
            coarse: c,
            extrapolation_err: errs,
        });
    }
    let mut merged: Vec<TaggedEigenvalue> = out
        .iter()
        .flat_map(|s| {
            s.values.iter().zip(&s.extrapolation_err).enumerate().map(|(i, (v, e))| TaggedEigenvalue {
                value: *v,
                sector: s.sector.clone(),
                index: i,
                err: *e,
            })
        })
        .collect();
    merged.sort_by(|a, b| a.value.total_cmp(&b.value).then_with(|| a.sector.cmp(&b.sector)));
    let tol_cluster = cluster_tolerance(cluster_floor, merged.iter().map(|e| (e.value, e.err)));
    let ind = merged.iter().filter(|e| e.value < 2.0 - tol_cluster).count();
    let nul = merged.iter().filter(|e| (e.value - 2.0).abs() <= tol_cluster).count();
    let mut vertices = Vec::new();
    if let Some(c) = &coarse {
        vertices.push(c.mesh.num_vertices());
    }
    vertices.push(fine.mesh.num_vertices());
    Ok(SpectrumResult {
        theta: theta.theta(),
        h,
        k_per_sector: k,
        richardson: extrapolate,
        sectors: out,
        merged,
        tol_cluster,
        ind,
        nul,
        weighted_area: fine.mesh.weighted_area(),
        vertices,
    })
}

/// The full eight-sector spectrum.
pub fn spectrum(theta: &ThetaParam, opts: &SpectrumOptions) -> Result<SpectrumResult> {
    spectrum_for(theta, &sector_table(), opts)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    pub sector: String,
    pub branch_index: usize,
    pub eigenvalue: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Crossing {
    pub sector: String,
    pub branch_index: usize,
    pub theta: f64,
    pub upward: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchMonotonicity {
    pub sector: String,
    pub branch_index: usize,
    pub nondecreasing: bool,
    /// Largest decrease between consecutive samples.
    pub max_drop: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub thetas: Vec<f64>,
    pub rows: Vec<SweepRow>,
    pub crossings: Vec<Crossing>,
    pub monotonicity: Vec<BranchMonotonicity>,
    /// `(Ind, Nul, tol_cluster)` per sample; meaningful when all sectors are swept.
    pub counts: Vec<(usize, usize, f64)>,
}

impl SweepResult {
    pub fn branch(&self, sector: &SectorSpec, index: usize) -> Vec<(f64, f64)> {
        let label = sector.label();
        self.rows
            .iter()
            .filter(|r| r.sector == label && r.branch_index == index)
            .map(|r| (r.theta, r.eigenvalue))
            .collect()
    }
}

/// Equispaced samples including both ends.
pub fn sweep_grid(from: f64, to: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![from];
    }
    (0..steps).map(|i| from + (to - from) * i as f64 / (steps - 1) as f64).collect()
}

/// Level crossings of 2 by a sampled branch, by linear inverse interpolation.
/// Sign changes where both samples sit within `flat_tol` of 2 are ignored,
/// since branches pinned at 2 flip sign from discretization noise alone.
pub fn level_crossings(branch: &[(f64, f64)], level: f64, flat_tol: f64) -> Vec<(f64, bool)> {
    let mut out = Vec::new();
    for w in branch.windows(2) {
        let ((t0, v0), (t1, v1)) = (w[0], w[1]);
        let (d0, d1) = (v0 - level, v1 - level);
        if d0 * d1 < 0.0 && d0.abs().max(d1.abs()) > flat_tol {
            out.push((t0 + (t1 - t0) * d0 / (d0 - d1), d1 > d0));
        }
    }
    out
}

pub fn monotonicity(branch: &[(f64, f64)], slack: f64) -> (bool, f64) {
    let drop = branch.windows(2).map(|w| w[0].1 - w[1].1).fold(0.0, f64::max);
    (drop <= slack, drop)
}

pub fn sweep(from: f64, to: f64, steps: usize, sectors: &[SectorSpec], opts: &SpectrumOptions) -> Result<SweepResult> {
    if !(from > 0.0 && from < to && to < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!("sweep range ({from}, {to}) must satisfy 0 < from < to < pi/2")));
    }
    if sectors.is_empty() || steps == 0 {
        return Err(Error::InvalidArgument("sweep needs at least one sector and one step".into()));
    }
    let thetas = sweep_grid(from, to, steps);
    let mut rows = Vec::new();
    let mut counts = Vec::new();
    for &th in &thetas {
        let res = spectrum_for(&ThetaParam::new(th)?, sectors, opts)?;
        for s in &res.sectors {
            for (i, v) in s.values.iter().enumerate() {
                rows.push(SweepRow { theta: th, sector: s.sector.clone(), branch_index: i, eigenvalue: *v });
            }
        }
        counts.push((res.ind, res.nul, res.tol_cluster));
    }
    let mut result = SweepResult { thetas, rows, crossings: Vec::new(), monotonicity: Vec::new(), counts };
    for sec in sectors {
        for i in 0..opts.k {
            let b = result.branch(sec, i);
            if b.len() < 2 {
                continue;
            }
            for (t, up) in level_crossings(&b, 2.0, 1e-3) {
                result.crossings.push(Crossing { sector: sec.label(), branch_index: i, theta: t, upward: up });
            }
        }
        for tracked in [SectorSpec::V1, SectorSpec::V2] {
            if *sec == tracked {
                let (ok, drop) = monotonicity(&result.branch(sec, 0), MONOTONE_SLACK);
                result.monotonicity.push(BranchMonotonicity {
                    sector: sec.label(),
                    branch_index: 0,
                    nondecreasing: ok,
                    max_drop: drop,
                });
            }
        }
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexRow {
    pub theta: f64,
    pub ind: usize,
    pub nul: usize,
    pub tol_cluster: f64,
}

pub fn index_table(thetas: &[f64], opts: &SpectrumOptions) -> Result<Vec<IndexRow>> {
    thetas
        .iter()
        .map(|&t| {
            let r = spectrum(&ThetaParam::new(t)?, opts)?;
            Ok(IndexRow { theta: t, ind: r.ind, nul: r.nul, tol_cluster: r.tol_cluster })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eight_distinct_sectors() {
        let t = sector_table();
        assert_eq!(t.len(), 8);
        let mut bcs: Vec<String> = t.iter().map(|s| s.bc_string()).collect();
        bcs.sort();
        bcs.dedup();
        assert_eq!(bcs.len(), 8);
        assert_eq!(SectorSpec::ALL_NEUMANN.bc_string(), "NNNN");
        assert_eq!(SectorSpec::V1.bc_string(), "NDND");
        assert_eq!(SectorSpec::V2.bc_string(), "DNND");
    }

    #[test]
    fn parse_round_trip() {
        for s in sector_table() {
            assert_eq!(SectorSpec::parse(&s.label()).unwrap(), s);
            assert_eq!(SectorSpec::parse(&s.bc_string()).unwrap(), s);
        }
        assert_eq!(SectorSpec::parse("v2").unwrap(), SectorSpec::V2);
        assert!(SectorSpec::parse("x").is_err());
    }

    #[test]
    fn neumann_sector_has_constant_and_harmonic() {
        let t = ThetaParam::new(0.5).unwrap();
        let d = Discretization::new(&t, 0.05).unwrap();
        let s = d.solve(&SectorSpec::ALL_NEUMANN, 4, true).unwrap();
        assert!(s.values[0].abs() < 1e-8, "{:?}", s.values);
        let v = &s.vectors.unwrap()[0];
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        assert!(v.iter().all(|x| (x - mean).abs() < 1e-6 * mean.abs()));
        assert!(s.values.iter().any(|x| (x - 2.0).abs() < 2e-2), "{:?}", s.values);
        let s = d.solve(&SectorSpec::new(1, 1, -1).unwrap(), 3, false).unwrap();
        assert!(s.values.iter().any(|x| (x - 2.0).abs() < 2e-2), "{:?}", s.values);
    }

    #[test]
    fn crossings_and_monotonicity() {
        let b = [(0.0, 1.9), (1.0, 1.95), (2.0, 2.05), (3.0, 2.1)];
        let c = level_crossings(&b, 2.0, 1e-3);
        assert_eq!(c.len(), 1);
        assert!((c[0].0 - 1.5).abs() < 1e-12 && c[0].1);
        assert!(monotonicity(&b, 0.0).0);
        let flat = [(0.0, 2.0001), (1.0, 1.9999)];
        assert!(level_crossings(&flat, 2.0, 1e-3).is_empty());
    }

    #[test]
    fn richardson_is_exact_for_quadratic_error() {
        let (v, e) = richardson(2.0 + 4.0 * 0.01, 2.0 + 0.01);
        assert!((v - 2.0).abs() < 1e-14 && (e - 0.01).abs() < 1e-14);
    }
}
