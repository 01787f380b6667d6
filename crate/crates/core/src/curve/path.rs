use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{branch_distance, curve_rhs, CurvePoint, Locus};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::theta::ThetaParam;

/// Initial continuation steps per segment.
pub const CONTINUATION_STEPS: usize = 256;
/// Cap on continuation steps per segment.
pub const MAX_CONTINUATION_STEPS: usize = 1 << 16;

/// A smooth arc in the z-plane, parametrized over `s ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Segment {
    Line { from: Complex64, to: Complex64 },
    /// `center + radius e^{i(start + s (end - start))}`; `end < start` runs clockwise.
    Arc { center: Complex64, radius: f64, start: f64, end: f64 },
}

impl Segment {
    pub fn point(&self, s: f64) -> Complex64 {
        match *self {
            Segment::Line { from, to } => from + (to - from) * s,
            Segment::Arc { center, radius, start, end } => {
                center + Complex64::from_polar(radius, start + s * (end - start))
            }
        }
    }

    /// `dz/ds`
    pub fn derivative(&self, s: f64) -> Complex64 {
        match *self {
            Segment::Line { from, to } => to - from,
            Segment::Arc { radius, start, end, .. } => {
                let a = start + s * (end - start);
                Complex64::i() * Complex64::from_polar(radius, a) * (end - start)
            }
        }
    }

    pub fn start(&self) -> Complex64 {
        self.point(0.0)
    }

    pub fn end(&self) -> Complex64 {
        self.point(1.0)
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { from, to } => (to - from).norm(),
            Segment::Arc { radius, start, end, .. } => radius * (end - start).abs(),
        }
    }

    pub fn reversed(&self) -> Segment {
        match *self {
            Segment::Line { from, to } => Segment::Line { from: to, to: from },
            Segment::Arc { center, radius, start, end } => Segment::Arc {
                center,
                radius,
                start: end,
                end: start,
            },
        }
    }

    /// Image under `z ↦ factor · z` for a unimodular `factor`.
    pub fn rotated(&self, factor: Complex64) -> Segment {
        match *self {
            Segment::Line { from, to } => Segment::Line {
                from: from * factor,
                to: to * factor,
            },
            Segment::Arc { center, radius, start, end } => {
                let a = factor.arg();
                Segment::Arc {
                    center: center * factor,
                    radius: radius * factor.norm(),
                    start: start + a,
                    end: end + a,
                }
            }
        }
    }

    /// Sampled lower bound on the distance to the finite branch values.
    pub fn branch_clearance(&self, theta: &ThetaParam) -> f64 {
        let n = 128;
        (0..=n)
            .map(|k| branch_distance(theta, self.point(k as f64 / n as f64)))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A piecewise-smooth path in the z-plane.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Path {
    segments: Vec<Segment>,
}

const JOIN_TOL: f64 = 1e-12;

impl Path {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        for pair in segments.windows(2) {
            let gap = (pair[0].end() - pair[1].start()).norm();
            if gap > JOIN_TOL * (1.0 + pair[1].start().norm()) {
                return Err(Error::Geometry(format!(
                    "consecutive segments do not share endpoints (gap {gap:e})"
                )));
            }
        }
        Ok(Path { segments })
    }

    pub fn empty() -> Self {
        Path::default()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn start(&self) -> Option<Complex64> {
        self.segments.first().map(Segment::start)
    }

    pub fn end(&self) -> Option<Complex64> {
        self.segments.last().map(Segment::end)
    }

    pub fn is_closed(&self) -> bool {
        match (self.start(), self.end()) {
            (Some(a), Some(b)) => (a - b).norm() <= JOIN_TOL * (1.0 + a.norm()),
            _ => true,
        }
    }

    pub fn then(mut self, other: &Path) -> Result<Self> {
        let mut segs = std::mem::take(&mut self.segments);
        segs.extend_from_slice(&other.segments);
        Path::new(segs)
    }

    pub fn reversed(&self) -> Path {
        Path {
            segments: self.segments.iter().rev().map(Segment::reversed).collect(),
        }
    }

    pub fn rotated(&self, factor: Complex64) -> Path {
        Path {
            segments: self.segments.iter().map(|s| s.rotated(factor)).collect(),
        }
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }
}

/// Continuation record: the z values and tracked w values along a path.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub points: Vec<(Complex64, Complex64)>,
}

/// Picks the square root of `z(z^4 + 2cos2θ z^2 + 1)` nearest to the
/// predicted value. Fails when the step is too coarse to tell the roots apart.
pub fn track_root(theta: &ThetaParam, z: Complex64, predicted: Complex64) -> Result<Complex64> {
    let r = curve_rhs(theta, z).sqrt();
    let (near, far) = if (r - predicted).norm() <= (r + predicted).norm() {
        (r, -r)
    } else {
        (-r, r)
    };
    let sep = (near - far).norm();
    let miss = (near - predicted).norm();
    if sep == 0.0 {
        return Ok(near);
    }
    if miss > 0.3 * sep {
        return Err(Error::ContinuationAmbiguous { z: format!("{z}") });
    }
    Ok(near)
}

fn continue_segment(
    theta: &ThetaParam,
    seg: &Segment,
    w0: Complex64,
    steps: usize,
    trace: &mut Vec<(Complex64, Complex64)>,
) -> Result<Complex64> {
    let mut n = steps.max(1);
    loop {
        let mut local = Vec::with_capacity(n + 1);
        let mut prev = w0;
        let mut prev2: Option<Complex64> = None;
        let mut ok = true;
        for k in 1..=n {
            let z = seg.point(k as f64 / n as f64);
            let pred = match prev2 {
                Some(p2) => 2.0 * prev - p2,
                None => prev,
            };
            match track_root(theta, z, pred) {
                Ok(w) => {
                    prev2 = Some(prev);
                    prev = w;
                    local.push((z, w));
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            trace.extend(local);
            return Ok(prev);
        }
        if n >= MAX_CONTINUATION_STEPS {
            return Err(Error::ContinuationAmbiguous {
                z: format!("{}", seg.start()),
            });
        }
        n *= 2;
    }
}

/// Analytic continuation of `w` along `path` from `start` by nearest-root
/// tracking, with `steps` initial steps per segment (doubled on ambiguity).
pub fn continue_sheet(path: &Path, start: &CurvePoint, steps: usize) -> Result<(CurvePoint, Trace)> {
    let theta = start.theta;
    let (z0, w0) = match start.locus {
        Locus::Finite { z, w } => (z, w),
        Locus::Infinity => {
            return Err(Error::Geometry("continuation must start at a finite point".into()))
        }
    };
    if let Some(ps) = path.start() {
        if (ps - z0).norm() > JOIN_TOL * (1.0 + z0.norm()) {
            return Err(Error::Geometry(format!(
                "start point z = {z0} does not lie over the path start {ps}"
            )));
        }
    }
    let mut trace = vec![(z0, w0)];
    let mut w = w0;
    for seg in path.segments() {
        w = continue_segment(&theta, seg, w, steps, &mut trace)?;
    }
    let z = path.end().unwrap_or(z0);
    Ok((
        CurvePoint {
            theta,
            locus: Locus::Finite { z, w },
        },
        Trace { points: trace },
    ))
}

/// Result of integrating a density along a lifted path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathIntegral<const N: usize> {
    pub values: [Complex64; N],
    /// The sheet value at the end of the path.
    pub end_w: Complex64,
    /// Largest change between the base panel count and its doubling.
    pub err: f64,
}

const PANEL_NODES: usize = 16;

fn integrate_once<F, const N: usize>(
    theta: &ThetaParam,
    path: &Path,
    start_w: Complex64,
    refine: usize,
    gl: &GaussLegendre,
    density: &F,
) -> Result<([Complex64; N], Complex64)>
where
    F: Fn(Complex64, Complex64) -> [Complex64; N],
{
    let mut acc = [Complex64::new(0.0, 0.0); N];
    let mut w = start_w;
    for seg in path.segments() {
        let clearance = seg.branch_clearance(theta);
        if clearance < 1e-9 {
            return Err(Error::Geometry(format!(
                "segment from {} to {} touches a branch point",
                seg.start(),
                seg.end()
            )));
        }
        let base = (seg.length() / (0.5 * clearance)).ceil().max(4.0) as usize;
        let panels = base * refine;
        for p in 0..panels {
            let (s0, s1) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
            let half = 0.5 * (s1 - s0);
            let mid = 0.5 * (s1 + s0);
            let mut prev = w;
            for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
                let s = mid + half * x;
                let z = seg.point(s);
                let wz = track_root(theta, z, prev)?;
                prev = wz;
                let dz = seg.derivative(s);
                let f = density(z, wz);
                for (a, v) in acc.iter_mut().zip(f) {
                    *a += v * dz * (wt * half);
                }
            }
            w = track_root(theta, seg.point(s1), prev)?;
        }
    }
    Ok((acc, w))
}

/// Integrates `density(z, w) dz` along `path` lifted from `start_w`, using
/// Gauss–Legendre panels no longer than half the clearance to the nearest
/// branch point. The integral is recomputed with doubled panels and the
/// difference reported as `err`.
pub fn integrate_path<F, const N: usize>(
    theta: &ThetaParam,
    path: &Path,
    start_w: Complex64,
    density: F,
) -> Result<PathIntegral<N>>
where
    F: Fn(Complex64, Complex64) -> [Complex64; N],
{
    let gl = GaussLegendre::new(PANEL_NODES);
    let (coarse, end_w) = integrate_once(theta, path, start_w, 1, &gl, &density)?;
    let (fine, end_fine) = integrate_once(theta, path, start_w, 2, &gl, &density)?;
    if (end_w - end_fine).norm() > 1e-8 * (1.0 + end_w.norm()) {
        return Err(Error::ContinuationAmbiguous {
            z: format!("{:?}", path.end()),
        });
    }
    let err = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(PathIntegral {
        values: fine,
        end_w: end_fine,
        err,
    })
}
