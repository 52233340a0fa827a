//! Set machinery for candidate and failure regions: hyperrectangles, 2-D
//! convex polytopes in vertex + half-space form, convex hulls, clipping.
//!
//! Polytope support is deliberately 2-D only; higher-dimensional sets are
//! handled as cross products of a 2-D polytope with box dimensions, which
//! keeps every volume computation closed-form.

use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Half-space `normal . x <= offset` with unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: [f64; 2],
    pub offset: f64,
}

/// Tolerance for boundary membership, in geometric distance units.
pub const CONTAINS_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// HyperRect
// ---------------------------------------------------------------------------

/// Axis-aligned box with strictly positive side lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperRect {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl HyperRect {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::InvalidParameter {
                name: "dim",
                value: 0.0,
                reason: "box must have at least one dimension",
            });
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("box bound in dimension {i}"),
                });
            }
            if lo >= hi {
                return Err(Error::InvalidParameter {
                    name: "bounds",
                    value: hi - lo,
                    reason: "lower bound must be strictly below upper bound",
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// Unit box `[0,1]^d`.
    pub fn unit(dim: usize) -> Self {
        Self::new(vec![0.0; dim], vec![1.0; dim]).expect("unit box is valid")
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| 0.5 * (lo + hi))
            .collect()
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| hi - lo)
            .product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| v >= lo - CONTAINS_TOL && v <= hi + CONTAINS_TOL)
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| lo + rng.random::<f64>() * (hi - lo))
            .collect()
    }

    /// 2-D box spanned by dimensions `dims.0` and `dims.1`.
    pub fn project2(&self, dims: (usize, usize)) -> Result<HyperRect> {
        let d = self.dim();
        if dims.0 >= d || dims.1 >= d || dims.0 == dims.1 {
            return Err(Error::InvalidParameter {
                name: "projection_dims",
                value: dims.1 as f64,
                reason: "projection dimensions must be distinct and in range",
            });
        }
        HyperRect::new(
            vec![self.lower[dims.0], self.lower[dims.1]],
            vec![self.upper[dims.0], self.upper[dims.1]],
        )
    }

    /// Product of side lengths over every dimension not in `dims`.
    pub fn remaining_volume(&self, dims: (usize, usize)) -> f64 {
        (0..self.dim())
            .filter(|&i| i != dims.0 && i != dims.1)
            .map(|i| self.width(i))
            .product()
    }
}

// ---------------------------------------------------------------------------
// Polytope2D
// ---------------------------------------------------------------------------

/// Bounded convex polygon; vertices counterclockwise, half-spaces derived
/// from the edges with unit outward normals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope2D {
    vertices: Vec<[f64; 2]>,
    halfspaces: Vec<Halfspace>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl Polytope2D {
    /// Build from counterclockwise convex vertices. Collinear and duplicate
    /// vertices are removed; fewer than 3 surviving vertices is an error.
    pub fn from_vertices(vertices: Vec<[f64; 2]>) -> Result<Self> {
        for v in &vertices {
            if !v[0].is_finite() || !v[1].is_finite() {
                return Err(Error::NonFinite {
                    context: "polytope vertex".into(),
                });
            }
        }
        let verts = canonicalize(vertices);
        if verts.len() < 3 {
            return Err(Error::DegenerateHull {
                n_points: verts.len(),
            });
        }
        let n = verts.len();
        // Convexity + orientation: every turn must be a (non-strict) left turn
        // and the signed area positive.
        for i in 0..n {
            let c = cross(verts[i], verts[(i + 1) % n], verts[(i + 2) % n]);
            if c < -CONTAINS_TOL {
                return Err(Error::InvalidParameter {
                    name: "vertices",
                    value: c,
                    reason: "vertices must be convex in counterclockwise order",
                });
            }
        }
        if signed_area(&verts) <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "vertices",
                value: signed_area(&verts),
                reason: "vertex ring must have positive area",
            });
        }
        let halfspaces = edges_to_halfspaces(&verts);
        Ok(Self {
            vertices: verts,
            halfspaces,
        })
    }

    /// Axis-aligned rectangle as a polytope.
    pub fn rect(rect: &HyperRect) -> Result<Self> {
        if rect.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: rect.dim(),
            });
        }
        let (lo, hi) = (rect.lower(), rect.upper());
        Self::from_vertices(vec![
            [lo[0], lo[1]],
            [hi[0], lo[1]],
            [hi[0], hi[1]],
            [lo[0], hi[1]],
        ])
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    /// Shoelace area of the vertex ring.
    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    /// True iff `x` satisfies every half-space within `CONTAINS_TOL`
    /// (boundary counts as inside).
    pub fn contains(&self, x: [f64; 2]) -> bool {
        self.halfspaces
            .iter()
            .all(|h| h.normal[0] * x[0] + h.normal[1] * x[1] <= h.offset + CONTAINS_TOL)
    }

    pub fn bounding_box(&self) -> HyperRect {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        HyperRect::new(lo.to_vec(), hi.to_vec()).expect("positive-area polytope has a valid bbox")
    }

    pub fn centroid(&self) -> [f64; 2] {
        // Polygon centroid via the standard signed-area decomposition.
        let n = self.vertices.len();
        let mut cx = 0.0;
        let mut cy = 0.0;
        let mut a = 0.0;
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let w = p[0] * q[1] - q[0] * p[1];
            a += w;
            cx += (p[0] + q[0]) * w;
            cy += (p[1] + q[1]) * w;
        }
        a *= 0.5;
        [cx / (6.0 * a), cy / (6.0 * a)]
    }

    /// Sutherland-Hodgman intersection with a convex clip polygon.
    pub fn clip_to_convex(&self, clip: &Polytope2D) -> Result<Polytope2D> {
        let mut subject: Vec<[f64; 2]> = self.vertices.clone();
        for h in &clip.halfspaces {
            if subject.is_empty() {
                break;
            }
            subject = clip_against_halfspace(&subject, h);
        }
        if subject.len() < 3 {
            return Err(Error::EmptyIntersection);
        }
        Polytope2D::from_vertices(subject).map_err(|_| Error::EmptyIntersection)
    }

    /// Intersection with a 2-D box.
    pub fn clip_to_box(&self, rect: &HyperRect) -> Result<Polytope2D> {
        self.clip_to_convex(&Polytope2D::rect(rect)?)
    }

    /// Offsets every edge outward by `margin` along its unit normal and
    /// rebuilds the vertices from adjacent edge intersections.
    pub fn inflate(&self, margin: f64) -> Result<Polytope2D> {
        if margin < 0.0 {
            return Err(Error::InvalidParameter {
                name: "margin",
                value: margin,
                reason: "inflation margin must be nonnegative",
            });
        }
        if margin == 0.0 {
            return Ok(self.clone());
        }
        let n = self.halfspaces.len();
        let mut verts = Vec::with_capacity(n);
        for i in 0..n {
            let a = &self.halfspaces[i];
            let b = &self.halfspaces[(i + 1) % n];
            let det = a.normal[0] * b.normal[1] - a.normal[1] * b.normal[0];
            if det.abs() < 1e-12 {
                continue; // parallel adjacent edges cannot occur in a canonical ring
            }
            let oa = a.offset + margin;
            let ob = b.offset + margin;
            verts.push([
                (oa * b.normal[1] - ob * a.normal[1]) / det,
                (ob * a.normal[0] - oa * b.normal[0]) / det,
            ]);
        }
        // Edge i meets edge i+1 at the vertex after edge i's start; rotate so
        // the ring stays counterclockwise starting from vertex 1.
        Polytope2D::from_vertices(verts)
    }
}

fn signed_area(verts: &[[f64; 2]]) -> f64 {
    let n = verts.len();
    let mut a = 0.0;
    for i in 0..n {
        let p = verts[i];
        let q = verts[(i + 1) % n];
        a += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * a
}

/// Drop duplicate and collinear vertices (scale-aware tolerance).
fn canonicalize(verts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    if verts.is_empty() {
        return verts;
    }
    let scale = verts
        .iter()
        .map(|v| v[0].abs().max(v[1].abs()))
        .fold(1.0f64, f64::max);
    let dup_tol = 1e-12 * scale;
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(verts.len());
    for v in verts {
        if out
            .last()
            .is_some_and(|u| (u[0] - v[0]).abs() <= dup_tol && (u[1] - v[1]).abs() <= dup_tol)
        {
            continue;
        }
        out.push(v);
    }
    while out.len() > 1 {
        let first = out[0];
        let last = out[out.len() - 1];
        if (first[0] - last[0]).abs() <= dup_tol && (first[1] - last[1]).abs() <= dup_tol {
            out.pop();
        } else {
            break;
        }
    }
    // Remove collinear interior vertices.
    let mut i = 0;
    while out.len() >= 3 && i < out.len() {
        let n = out.len();
        let prev = out[(i + n - 1) % n];
        let cur = out[i];
        let next = out[(i + 1) % n];
        if cross(prev, cur, next).abs() <= dup_tol * scale {
            out.remove(i);
        } else {
            i += 1;
        }
    }
    out
}

fn edges_to_halfspaces(verts: &[[f64; 2]]) -> Vec<Halfspace> {
    let n = verts.len();
    (0..n)
        .map(|i| {
            let p = verts[i];
            let q = verts[(i + 1) % n];
            // Outward normal of a CCW edge is the right-hand normal.
            let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
            let len = (dx * dx + dy * dy).sqrt();
            let normal = [dy / len, -dx / len];
            Halfspace {
                normal,
                offset: normal[0] * p[0] + normal[1] * p[1],
            }
        })
        .collect()
}

fn clip_against_halfspace(subject: &[[f64; 2]], h: &Halfspace) -> Vec<[f64; 2]> {
    let eval = |p: [f64; 2]| h.normal[0] * p[0] + h.normal[1] * p[1] - h.offset;
    let mut out = Vec::with_capacity(subject.len() + 2);
    let n = subject.len();
    for i in 0..n {
        let cur = subject[i];
        let next = subject[(i + 1) % n];
        let (dc, dn) = (eval(cur), eval(next));
        let inside_cur = dc <= CONTAINS_TOL;
        let inside_next = dn <= CONTAINS_TOL;
        if inside_cur {
            out.push(cur);
        }
        if inside_cur != inside_next {
            let t = dc / (dc - dn);
            out.push([
                cur[0] + t * (next[0] - cur[0]),
                cur[1] + t * (next[1] - cur[1]),
            ]);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Convex hull
// ---------------------------------------------------------------------------

/// Andrew monotone-chain convex hull; counterclockwise minimal vertex set.
pub fn convex_hull(points: &[[f64; 2]]) -> Result<Polytope2D> {
    if points.len() < 3 {
        return Err(Error::DegenerateHull {
            n_points: points.len(),
        });
    }
    for p in points {
        if !p[0].is_finite() || !p[1].is_finite() {
            return Err(Error::NonFinite {
                context: "hull input point".into(),
            });
        }
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite points are totally ordered"));
    pts.dedup();
    if pts.len() < 3 {
        return Err(Error::DegenerateHull {
            n_points: pts.len(),
        });
    }

    let grow = |chain: &mut Vec<[f64; 2]>, p: [f64; 2]| {
        while chain.len() >= 2 && cross(chain[chain.len() - 2], chain[chain.len() - 1], p) <= 0.0 {
            chain.pop();
        }
        chain.push(p);
    };

    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        grow(&mut lower, p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        grow(&mut upper, p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Err(Error::DegenerateHull {
            n_points: lower.len(),
        });
    }
    Polytope2D::from_vertices(lower)
}

// ---------------------------------------------------------------------------
// FailureSet
// ---------------------------------------------------------------------------

/// Learned failure-prone region: a 2-D polytope on a pair of projected
/// dimensions, embedded in the candidate box `ambient`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureSet {
    pub projection_dims: (usize, usize),
    pub polytope: Polytope2D,
    pub ambient: HyperRect,
}

impl FailureSet {
    /// Validates that the polytope lies inside the projection of `ambient`.
    pub fn new(
        projection_dims: (usize, usize),
        polytope: Polytope2D,
        ambient: HyperRect,
    ) -> Result<Self> {
        let face = ambient.project2(projection_dims)?;
        for &v in polytope.vertices() {
            if !face.contains(&v) {
                return Err(Error::InvalidParameter {
                    name: "polytope",
                    value: v[0],
                    reason: "failure polytope must lie inside the candidate projection",
                });
            }
        }
        Ok(Self {
            projection_dims,
            polytope,
            ambient,
        })
    }

    /// Projection of a full-dimensional point onto the failure plane.
    pub fn project(&self, theta: &[f64]) -> [f64; 2] {
        [theta[self.projection_dims.0], theta[self.projection_dims.1]]
    }
}
