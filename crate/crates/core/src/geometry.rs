//! Parametric model families: point-to-model error, minimal-sample
//! estimation and least-squares refits for 2D lines, 2D circles and 3D planes.
//!
//! Lines and planes are stored as `(unit normal, offset)` with the canonical
//! sign convention `offset >= 0`; when the offset is exactly zero the first
//! nonzero component of the normal is made positive. Circles are stored as
//! `(center, radius)` with `radius > 0`.

use nalgebra::{DMatrix, Matrix2, Matrix3, SymmetricEigen, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold below which a sample is considered rank deficient.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// An ordered collection of points in `R^d`, stored row-major.
///
/// The position of a point in the collection is its element index.
#[derive(Clone, Debug, PartialEq)]
pub struct DataSet {
    dim: usize,
    coords: Vec<f64>,
}

impl DataSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dataset dimension must be positive".into()));
        }
        if coords.len() % dim != 0 {
            return Err(Error::Config(format!(
                "coordinate buffer of length {} is not a multiple of dimension {dim}",
                coords.len()
            )));
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite coordinate in element {}",
                pos / dim
            )));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let dim = points.first().map(|p| p.as_ref().len()).unwrap_or(2);
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::Data(format!(
                    "element {i} has dimension {} but expected {dim}",
                    p.len()
                )));
            }
            coords.extend_from_slice(p);
        }
        Self::new(dim, coords)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, index: usize) -> &[f64] {
        &self.coords[index * self.dim..(index + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn select(&self, indices: &[usize]) -> Vec<&[f64]> {
        indices.iter().map(|&i| self.point(i)).collect()
    }

    /// Returns the subset of points given by `indices`, re-indexed from zero.
    pub fn subset(&self, indices: &[usize]) -> DataSet {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        DataSet {
            dim: self.dim,
            coords,
        }
    }
}

/// The model families supported by the estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelFamily {
    #[serde(rename = "line2d")]
    Line2D,
    #[serde(rename = "circle2d")]
    Circle2D,
    #[serde(rename = "plane3d")]
    Plane3D,
}

/// Returned when a sample does not determine a unique model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("degenerate sample: model is not uniquely determined")]
pub struct Degenerate;

/// A concrete model instance (a parameter vector tied to its family).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum Model {
    #[serde(rename = "line2d")]
    Line2D { normal: [f64; 2], offset: f64 },
    #[serde(rename = "circle2d")]
    Circle2D { center: [f64; 2], radius: f64 },
    #[serde(rename = "plane3d")]
    Plane3D { normal: [f64; 3], offset: f64 },
}

impl ModelFamily {
    /// Number of elements in a minimal sample set.
    pub fn min_sample_size(self) -> usize {
        match self {
            ModelFamily::Line2D => 2,
            ModelFamily::Circle2D | ModelFamily::Plane3D => 3,
        }
    }

    /// Ambient dimension of the elements this family is fitted to.
    pub fn dim(self) -> usize {
        match self {
            ModelFamily::Line2D | ModelFamily::Circle2D => 2,
            ModelFamily::Plane3D => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::Line2D => "line2d",
            ModelFamily::Circle2D => "circle2d",
            ModelFamily::Plane3D => "plane3d",
        }
    }

    /// Exact model through a minimal sample.
    ///
    /// Panics if the sample size or the point dimensions do not match the
    /// family.
    pub fn fit_minimal(self, sample: &[&[f64]]) -> std::result::Result<Model, Degenerate> {
        assert_eq!(
            sample.len(),
            self.min_sample_size(),
            "minimal sample for {} must have {} elements",
            self.name(),
            self.min_sample_size()
        );
        self.check_dims(sample);
        match self {
            ModelFamily::Line2D => {
                let p = Vector2::new(sample[0][0], sample[0][1]);
                let q = Vector2::new(sample[1][0], sample[1][1]);
                let d = q - p;
                let scale = p.amax().max(q.amax());
                if d.norm() <= DEGENERACY_TOL * scale {
                    return Err(Degenerate);
                }
                let normal = Vector2::new(-d.y, d.x);
                Model::line(normal, normal.dot(&p)).ok_or(Degenerate)
            }
            ModelFamily::Circle2D => {
                let a = Vector2::new(sample[0][0], sample[0][1]);
                let b = Vector2::new(sample[1][0], sample[1][1]) - a;
                let c = Vector2::new(sample[2][0], sample[2][1]) - a;
                let scale = b.norm().max(c.norm());
                let det = 2.0 * (b.x * c.y - b.y * c.x);
                if !(det.abs() > DEGENERACY_TOL * scale * scale) {
                    return Err(Degenerate);
                }
                let b2 = b.norm_squared();
                let c2 = c.norm_squared();
                let offset = Vector2::new((c.y * b2 - b.y * c2) / det, (b.x * c2 - c.x * b2) / det);
                let center = a + offset;
                Model::circle(center, offset.norm()).ok_or(Degenerate)
            }
            ModelFamily::Plane3D => {
                let p = Vector3::new(sample[0][0], sample[0][1], sample[0][2]);
                let u = Vector3::new(sample[1][0], sample[1][1], sample[1][2]) - p;
                let v = Vector3::new(sample[2][0], sample[2][1], sample[2][2]) - p;
                let scale = u.norm().max(v.norm());
                let normal = u.cross(&v);
                if !(normal.norm() > DEGENERACY_TOL * scale * scale) {
                    return Err(Degenerate);
                }
                Model::plane(normal, normal.dot(&p)).ok_or(Degenerate)
            }
        }
    }

    /// Least-squares model for a set of at least `b` elements.
    ///
    /// Lines and planes use orthogonal regression on centered coordinates;
    /// circles use the algebraic (Kåsa) fit.
    pub fn fit_least_squares(self, points: &[&[f64]]) -> std::result::Result<Model, Degenerate> {
        if points.len() < self.min_sample_size() {
            return Err(Degenerate);
        }
        self.check_dims(points);
        match self {
            ModelFamily::Line2D => fit_line_ls(points),
            ModelFamily::Circle2D => fit_circle_kasa(points),
            ModelFamily::Plane3D => fit_plane_ls(points),
        }
    }

    /// Least-squares refit on a subset of a dataset.
    pub fn fit_subset(
        self,
        data: &DataSet,
        indices: &[usize],
    ) -> std::result::Result<Model, Degenerate> {
        self.fit_least_squares(&data.select(indices))
    }

    fn check_dims(self, points: &[&[f64]]) {
        for p in points {
            assert_eq!(
                p.len(),
                self.dim(),
                "element dimension does not match {}",
                self.name()
            );
        }
    }
}

fn coordinate_scale(points: &[&[f64]]) -> f64 {
    points
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0_f64, |acc, c| acc.max(c.abs()))
}

fn fit_line_ls(points: &[&[f64]]) -> std::result::Result<Model, Degenerate> {
    let n = points.len() as f64;
    let mut mean = Vector2::zeros();
    for p in points {
        mean += Vector2::new(p[0], p[1]);
    }
    mean /= n;
    let mut cov = Matrix2::zeros();
    for p in points {
        let d = Vector2::new(p[0], p[1]) - mean;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = SymmetricEigen::new(cov);
    let (imin, imax) = if eig.eigenvalues[0] <= eig.eigenvalues[1] {
        (0, 1)
    } else {
        (1, 0)
    };
    let spread = eig.eigenvalues[imax].max(0.0).sqrt();
    if !(spread > DEGENERACY_TOL * coordinate_scale(points)) {
        return Err(Degenerate);
    }
    let normal: Vector2<f64> = eig.eigenvectors.column(imin).into_owned();
    Model::line(normal, normal.dot(&mean)).ok_or(Degenerate)
}

fn fit_plane_ls(points: &[&[f64]]) -> std::result::Result<Model, Degenerate> {
    let n = points.len() as f64;
    let mut mean = Vector3::zeros();
    for p in points {
        mean += Vector3::new(p[0], p[1], p[2]);
    }
    mean /= n;
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = Vector3::new(p[0], p[1], p[2]) - mean;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    // Collinear or coincident points leave the two largest directions
    // without a well-defined plane.
    let second = eig.eigenvalues[order[1]].max(0.0).sqrt();
    if !(second > DEGENERACY_TOL * coordinate_scale(points)) {
        return Err(Degenerate);
    }
    let normal: Vector3<f64> = eig.eigenvectors.column(order[0]).into_owned();
    Model::plane(normal, normal.dot(&mean)).ok_or(Degenerate)
}

fn fit_circle_kasa(points: &[&[f64]]) -> std::result::Result<Model, Degenerate> {
    let n = points.len();
    let mut mean = Vector2::zeros();
    for p in points {
        mean += Vector2::new(p[0], p[1]);
    }
    mean /= n as f64;
    let rms = (points
        .iter()
        .map(|p| (Vector2::new(p[0], p[1]) - mean).norm_squared())
        .sum::<f64>()
        / n as f64)
        .sqrt();
    if !(rms > DEGENERACY_TOL * coordinate_scale(points)) {
        return Err(Degenerate);
    }
    // x^2 + y^2 + D x + E y + F = 0 on centered, scaled coordinates.
    let mut design = DMatrix::zeros(n, 3);
    let mut rhs = DMatrix::zeros(n, 1);
    for (i, p) in points.iter().enumerate() {
        let q = (Vector2::new(p[0], p[1]) - mean) / rms;
        design[(i, 0)] = q.x;
        design[(i, 1)] = q.y;
        design[(i, 2)] = 1.0;
        rhs[(i, 0)] = -q.norm_squared();
    }
    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > DEGENERACY_TOL * smax) {
        return Err(Degenerate);
    }
    let sol = svd.solve(&rhs, 0.0).map_err(|_| Degenerate)?;
    let (d, e, f) = (sol[(0, 0)], sol[(1, 0)], sol[(2, 0)]);
    let c = Vector2::new(-d / 2.0, -e / 2.0);
    let r2 = c.norm_squared() - f;
    if !(r2 > 0.0) {
        return Err(Degenerate);
    }
    Model::circle(mean + c * rms, r2.sqrt() * rms).ok_or(Degenerate)
}

impl Model {
    /// Canonical line from an unnormalized normal and offset (`n . x = c`).
    pub fn line(normal: Vector2<f64>, offset: f64) -> Option<Model> {
        let (normal, offset) = canonical_hyperplane(normal.as_slice(), offset)?;
        Some(Model::Line2D {
            normal: [normal[0], normal[1]],
            offset,
        })
    }

    /// Canonical plane from an unnormalized normal and offset (`n . x = c`).
    pub fn plane(normal: Vector3<f64>, offset: f64) -> Option<Model> {
        let (normal, offset) = canonical_hyperplane(normal.as_slice(), offset)?;
        Some(Model::Plane3D {
            normal: [normal[0], normal[1], normal[2]],
            offset,
        })
    }

    pub fn circle(center: Vector2<f64>, radius: f64) -> Option<Model> {
        (radius > 0.0 && radius.is_finite() && center.iter().all(|c| c.is_finite())).then_some(
            Model::Circle2D {
                center: [center.x, center.y],
                radius,
            },
        )
    }

    pub fn family(&self) -> ModelFamily {
        match self {
            Model::Line2D { .. } => ModelFamily::Line2D,
            Model::Circle2D { .. } => ModelFamily::Circle2D,
            Model::Plane3D { .. } => ModelFamily::Plane3D,
        }
    }

    /// Flat parameter vector: `(normal, offset)` or `(center, radius)`.
    pub fn theta(&self) -> Vec<f64> {
        match *self {
            Model::Line2D { normal, offset } => vec![normal[0], normal[1], offset],
            Model::Circle2D { center, radius } => vec![center[0], center[1], radius],
            Model::Plane3D { normal, offset } => vec![normal[0], normal[1], normal[2], offset],
        }
    }

    /// Inverse of [`Model::theta`]; re-canonicalizes the parameters.
    pub fn from_theta(family: ModelFamily, theta: &[f64]) -> Option<Model> {
        match (family, theta) {
            (ModelFamily::Line2D, &[a, b, c]) => Model::line(Vector2::new(a, b), c),
            (ModelFamily::Circle2D, &[x, y, r]) => Model::circle(Vector2::new(x, y), r),
            (ModelFamily::Plane3D, &[a, b, c, d]) => Model::plane(Vector3::new(a, b, c), d),
            _ => None,
        }
    }

    /// Euclidean distance from `x` to the zero level set of the model.
    ///
    /// Panics on a dimension mismatch.
    #[inline]
    pub fn error(&self, x: &[f64]) -> f64 {
        match self {
            Model::Line2D { normal, offset } => {
                assert_eq!(x.len(), 2, "line2d error needs a 2D element");
                (normal[0] * x[0] + normal[1] * x[1] - offset).abs()
            }
            Model::Circle2D { center, radius } => {
                assert_eq!(x.len(), 2, "circle2d error needs a 2D element");
                ((x[0] - center[0]).hypot(x[1] - center[1]) - radius).abs()
            }
            Model::Plane3D { normal, offset } => {
                assert_eq!(x.len(), 3, "plane3d error needs a 3D element");
                (normal[0] * x[0] + normal[1] * x[1] + normal[2] * x[2] - offset).abs()
            }
        }
    }

    /// Sum of squared errors over `points`.
    pub fn residual_sum(&self, points: &[&[f64]]) -> f64 {
        points.iter().map(|p| self.error(p).powi(2)).sum()
    }
}

fn canonical_hyperplane(normal: &[f64], offset: f64) -> Option<(Vec<f64>, f64)> {
    let norm = normal.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() || !offset.is_finite() {
        return None;
    }
    let mut n: Vec<f64> = normal.iter().map(|c| c / norm).collect();
    let mut c = offset / norm;
    let flip = if c != 0.0 {
        c < 0.0
    } else {
        n.iter().find(|v| **v != 0.0).is_some_and(|v| *v < 0.0)
    };
    if flip {
        n.iter_mut().for_each(|v| *v = -*v);
        c = -c;
    }
    // Avoid a signed zero offset leaking into serialized output.
    if c == 0.0 {
        c = 0.0;
    }
    Some((n, c))
}

/// Indices `{ i : error(model, x_i) <= delta }` in ascending order.
pub fn consensus_set(model: &Model, data: &DataSet, delta: f64) -> Vec<usize> {
    assert!(delta >= 0.0, "inlier threshold must be nonnegative");
    data.points()
        .enumerate()
        .filter(|(_, p)| model.error(p) <= delta)
        .map(|(i, _)| i)
        .collect()
}

/// Counts the elements within `delta` and within `wide_delta` in one pass.
pub fn band_counts(model: &Model, data: &DataSet, delta: f64, wide_delta: f64) -> (usize, usize) {
    let mut narrow = 0;
    let mut wide = 0;
    for p in data.points() {
        let e = model.error(p);
        if e <= wide_delta {
            wide += 1;
        }
        if e <= delta {
            narrow += 1;
        }
    }
    (narrow, wide)
}
