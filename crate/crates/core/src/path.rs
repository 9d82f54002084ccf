//! Piecewise-linear paths in parameter space and loss/error profiles
//! along them.

use std::io::Write;
use std::path::Path;

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::model::{classification_error, empirical_loss, Network};

/// Parameter types that can be mixed linearly, `(1−s)·a + s·b`.
pub trait Interpolate: Sized {
    fn interpolate(a: &Self, b: &Self, s: f64) -> Result<Self>;
    fn compatible(&self, other: &Self) -> bool;
}

/// Path through `vertices`, each consecutive pair joined by a straight
/// segment. Segments are traversed at uniform speed in `t ∈ [0, 1]`.
#[derive(Debug, Clone)]
pub struct PiecewisePath<P> {
    vertices: Vec<P>,
    labels: Vec<String>,
}

impl<P: Interpolate> PiecewisePath<P> {
    pub fn new(vertices: Vec<P>, labels: Vec<String>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidArgument("a path needs at least two vertices".into()));
        }
        if labels.len() != vertices.len() {
            return Err(Error::shape("path labels", vertices.len(), labels.len()));
        }
        if vertices.windows(2).any(|w| !w[0].compatible(&w[1])) {
            return Err(Error::InvalidArgument("path vertices have different shapes".into()));
        }
        Ok(Self { vertices, labels })
    }

    pub fn vertices(&self) -> &[P] {
        &self.vertices
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn segments(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn start(&self) -> &P {
        &self.vertices[0]
    }

    pub fn end(&self) -> &P {
        &self.vertices[self.vertices.len() - 1]
    }

    /// Point at local coordinate `s ∈ [0, 1]` of segment `seg`.
    pub fn point(&self, seg: usize, s: f64) -> Result<P> {
        if seg >= self.segments() {
            return Err(Error::InvalidArgument(format!("segment {seg} out of range ({} segments)", self.segments())));
        }
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidArgument(format!("segment coordinate {s} outside [0, 1]")));
        }
        P::interpolate(&self.vertices[seg], &self.vertices[seg + 1], s)
    }

    /// Concatenation; `other` must start where `self` ends (the shared
    /// vertex is kept once, with the label from `self`).
    pub fn then(mut self, other: PiecewisePath<P>) -> Result<Self> {
        if !self.end().compatible(other.start()) {
            return Err(Error::InvalidArgument("cannot join paths of different shapes".into()));
        }
        self.vertices.extend(other.vertices.into_iter().skip(1));
        self.labels.extend(other.labels.into_iter().skip(1));
        Ok(self)
    }
}

/// Point at global parameter `t ∈ [0, 1]`.
pub fn path_eval<P: Interpolate>(path: &PiecewisePath<P>, t: f64) -> Result<P> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("path parameter {t} outside [0, 1]")));
    }
    let segs = path.segments();
    let scaled = t * segs as f64;
    let seg = (scaled.floor() as usize).min(segs - 1);
    let s = (scaled - seg as f64).clamp(0.0, 1.0);
    path.point(seg, s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub segment: usize,
    /// Local coordinate within the segment.
    pub s: f64,
    /// Global coordinate in `[0, 1]`.
    pub t: f64,
    pub value: f64,
}

/// Values of some metric on a uniform grid along a path: `points` per
/// segment including both ends, shared vertices evaluated once.
#[derive(Debug, Clone, PartialEq)]
pub struct PathProfile {
    pub metric: String,
    pub segments: usize,
    pub points_per_segment: usize,
    pub rows: Vec<ProfileRow>,
}

impl PathProfile {
    pub fn max(&self) -> f64 {
        self.rows.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn start_value(&self) -> f64 {
        self.rows[0].value
    }

    pub fn end_value(&self) -> f64 {
        self.rows[self.rows.len() - 1].value
    }

    /// Values at the path's vertices, in order.
    pub fn vertex_values(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.rows.iter().filter(|r| r.s == 0.0).map(|r| r.value).collect();
        out.push(self.end_value());
        out
    }

    /// `max(0, max_t value − max(value(0), value(1)))`.
    pub fn eps_c(&self) -> f64 {
        (self.max() - self.start_value().max(self.end_value())).max(0.0)
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "t,{}", self.metric)?;
        for r in &self.rows {
            writeln!(out, "{:.16e},{:.16e}", r.t, r.value)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).map_err(|e| Error::io(path, e))?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

/// Profiles `metric` along `path` at `points` grid points per segment.
pub fn profile_with<P: Interpolate>(
    path: &PiecewisePath<P>,
    points: usize,
    name: &str,
    mut metric: impl FnMut(&P) -> Result<f64>,
) -> Result<PathProfile> {
    if points < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 points per segment, got {points}")));
    }
    let segs = path.segments();
    let mut rows = Vec::with_capacity(segs * points - (segs - 1));
    for seg in 0..segs {
        let first = if seg == 0 { 0 } else { 1 };
        for j in first..points {
            let s = j as f64 / (points - 1) as f64;
            let p = path.point(seg, s)?;
            let t = (seg as f64 + s) / segs as f64;
            rows.push(ProfileRow { segment: seg, s, t, value: metric(&p)? });
        }
    }
    // Segments after the first start at s > 0; keep the vertex rows
    // discoverable by labelling the shared point as the next segment's start.
    for r in rows.iter_mut() {
        if r.s == 1.0 && r.segment + 1 < segs {
            r.segment += 1;
            r.s = 0.0;
        }
    }
    Ok(PathProfile {
        metric: name.to_string(),
        segments: segs,
        points_per_segment: points,
        rows,
    })
}

pub fn profile_loss<P: Interpolate + Network>(
    path: &PiecewisePath<P>,
    ds: &LabeledDataset,
    loss: LossKind,
    points: usize,
) -> Result<PathProfile> {
    profile_with(path, points, "loss", |p| empirical_loss(p, ds, loss))
}

pub fn profile_error<P: Interpolate + Network>(path: &PiecewisePath<P>, ds: &LabeledDataset, points: usize) -> Result<PathProfile> {
    profile_with(path, points, "error", |p| classification_error(p, ds))
}
