//! Seeded synthetic datasets: stars of lines, stairs of parallel segments,
//! non-intersecting circles and uniform noise, with ground-truth covers.
//!
//! Structures are laid out in unit coordinates and mapped onto the
//! generation box, `[-1, 1]^2` by default. Lines and segments carry Gaussian
//! noise along their normal, circles along the radius.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::GroupCover;
use crate::geometry::{consensus_set, DataSet, Model, ModelFamily};

/// Default generation box, `[xmin, ymin, xmax, ymax]`.
pub const DEFAULT_DOMAIN: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];
/// Center of the star configuration, in unit coordinates of the domain.
pub const STAR_CENTER: [f64; 2] = [0.5, 0.5];
/// Half-length of every star segment, in unit coordinates of the domain.
pub const STAR_HALF_LENGTH: f64 = 0.45;
/// Horizontal length of every stairs segment, in unit coordinates.
pub const STAIRS_WIDTH: f64 = 0.4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    /// Segments through a common center at equal angles.
    Star,
    /// Parallel horizontal segments with increasing height and offset.
    Stairs,
    /// Disjoint circles on a grid.
    Circles,
    /// Uniform background only.
    Noise,
}

impl Structure {
    pub fn family(self) -> ModelFamily {
        match self {
            Structure::Circles => ModelFamily::Circle2D,
            _ => ModelFamily::Line2D,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub structure: Structure,
    pub num_models: usize,
    pub points_per_model: usize,
    pub noise_sigma: f64,
    /// Fraction of all elements that are uniform outliers.
    pub outlier_fraction: f64,
    /// `[xmin, ymin, xmax, ymax]` of the outlier box.
    pub domain: [f64; 4],
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(structure: Structure, num_models: usize, points_per_model: usize) -> Self {
        Self {
            structure,
            num_models,
            points_per_model,
            noise_sigma: 0.0,
            outlier_fraction: 0.0,
            domain: DEFAULT_DOMAIN,
            seed: 0,
        }
    }

    pub fn sigma(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn outliers(mut self, fraction: f64) -> Self {
        self.outlier_fraction = fraction;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.outlier_fraction) {
            return Err(Error::Config(format!(
                "outlier fraction must lie in [0, 1], got {}",
                self.outlier_fraction
            )));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::Config(format!("sigma must be finite and nonnegative, got {}", self.noise_sigma)));
        }
        let [x0, y0, x1, y1] = self.domain;
        if !(x0 < x1 && y0 < y1) {
            return Err(Error::Config(format!("empty domain {:?}", self.domain)));
        }
        Ok(())
    }

    /// Number of uniform outliers, `round(f / (1 - f) * structured)`. With
    /// `f = 1` or [`Structure::Noise`] the dataset holds
    /// `num_models * points_per_model` outliers.
    pub fn outlier_count(&self) -> usize {
        let structured = (self.num_models * self.points_per_model) as f64;
        let f = self.outlier_fraction;
        if f >= 1.0 || self.structure == Structure::Noise {
            structured as usize
        } else {
            (f / (1.0 - f) * structured).round() as usize
        }
    }
}

/// A generated dataset with its ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct Synthetic {
    pub data: DataSet,
    pub models: Vec<Model>,
    /// Generating model of each element; `None` for outliers.
    pub labels: Vec<Option<usize>>,
    /// Per-model membership. Structured points lying within `3 sigma` of
    /// another model belong to that model too.
    pub truth: GroupCover,
}

enum Shape {
    Segment { a: Vector2<f64>, b: Vector2<f64> },
    Circle { center: Vector2<f64>, radius: f64 },
}

impl Shape {
    fn model(&self) -> Model {
        match self {
            Shape::Segment { a, b } => {
                let d = b - a;
                let n = Vector2::new(-d.y, d.x).normalize();
                Model::line(n, n.dot(a)).expect("segment endpoints differ")
            }
            Shape::Circle { center, radius } => Model::circle(*center, *radius).expect("positive radius"),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng, noise: &Normal<f64>) -> [f64; 2] {
        let e = noise.sample(rng);
        match self {
            Shape::Segment { a, b } => {
                let d = b - a;
                let n = Vector2::new(-d.y, d.x).normalize();
                let p = a + d * rng.random::<f64>() + n * e;
                [p.x, p.y]
            }
            Shape::Circle { center, radius } => {
                let t = 2.0 * PI * rng.random::<f64>();
                let p = center + Vector2::new(t.cos(), t.sin()) * (radius + e);
                [p.x, p.y]
            }
        }
    }
}

fn shapes(spec: &SyntheticSpec) -> Vec<Shape> {
    let k = spec.num_models;
    let [x0, y0, x1, y1] = spec.domain;
    let (w, h) = (x1 - x0, y1 - y0);
    // Layouts are defined in unit coordinates and mapped onto the domain.
    let at = |x: f64, y: f64| Vector2::new(x0 + x * w, y0 + y * h);
    match spec.structure {
        Structure::Noise => Vec::new(),
        Structure::Star => (0..k)
            .map(|i| {
                let t = PI * i as f64 / k as f64;
                let (dx, dy) = (t.cos() * STAR_HALF_LENGTH, t.sin() * STAR_HALF_LENGTH);
                let [cx, cy] = STAR_CENTER;
                Shape::Segment {
                    a: at(cx - dx, cy - dy),
                    b: at(cx + dx, cy + dy),
                }
            })
            .collect(),
        Structure::Stairs => (0..k)
            .map(|i| {
                let frac = if k > 1 { i as f64 / (k - 1) as f64 } else { 0.5 };
                let y = 0.15 + 0.7 * frac;
                let x = 0.1 + (0.8 - STAIRS_WIDTH) * frac;
                Shape::Segment {
                    a: at(x, y),
                    b: at(x + STAIRS_WIDTH, y),
                }
            })
            .collect(),
        Structure::Circles => {
            let cols = (k as f64).sqrt().ceil().max(1.0) as usize;
            let rows = k.div_ceil(cols).max(1);
            let (cw, ch) = (1.0 / cols as f64, 1.0 / rows as f64);
            (0..k)
                .map(|i| Shape::Circle {
                    center: at((i % cols) as f64 * cw + 0.5 * cw, (i / cols) as f64 * ch + 0.5 * ch),
                    radius: 0.35 * (cw * w).min(ch * h),
                })
                .collect()
        }
    }
}

/// Generates the dataset described by `spec`.
///
/// Elements are ordered model by model, followed by the outliers.
pub fn generate(spec: &SyntheticSpec) -> Result<Synthetic> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::Config(e.to_string()))?;
    let shapes = if spec.outlier_fraction >= 1.0 {
        Vec::new()
    } else {
        shapes(spec)
    };
    let models: Vec<Model> = shapes.iter().map(Shape::model).collect();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (t, shape) in shapes.iter().enumerate() {
        for _ in 0..spec.points_per_model {
            points.push(shape.sample(&mut rng, &noise));
            labels.push(Some(t));
        }
    }
    let [x0, y0, x1, y1] = spec.domain;
    for _ in 0..spec.outlier_count() {
        points.push([rng.random_range(x0..x1), rng.random_range(y0..y1)]);
        labels.push(None);
    }
    let data = DataSet::from_points(&points)?;
    let truth = membership_cover(&data, &models, &labels, 3.0 * spec.noise_sigma);
    Ok(Synthetic {
        data,
        models,
        labels,
        truth,
    })
}

/// Generator labels, extended so that a structured element within `band`
/// of another model also joins that model's group.
fn membership_cover(data: &DataSet, models: &[Model], labels: &[Option<usize>], band: f64) -> GroupCover {
    let mut groups = vec![Vec::new(); models.len()];
    for (i, label) in labels.iter().enumerate() {
        let Some(own) = label else { continue };
        for (t, model) in models.iter().enumerate() {
            if t == *own || model.error(data.point(i)) <= band {
                groups[t].push(i);
            }
        }
    }
    groups.retain(|g| !g.is_empty());
    GroupCover::new(data.len(), groups).expect("indices come from the dataset")
}

/// Ground truth re-estimated from the generating models: the consensus set of
/// each true model at `delta`, outliers that happen to fit included.
pub fn reestimate_truth(data: &DataSet, models: &[Model], delta: f64) -> GroupCover {
    let groups: Vec<Vec<usize>> = models
        .iter()
        .map(|m| consensus_set(m, data, delta))
        .filter(|g| !g.is_empty())
        .collect();
    GroupCover::new(data.len(), groups).expect("indices come from the dataset")
}

fn uniform_in(rng: &mut ChaCha8Rng, x: (f64, f64), y: (f64, f64), count: usize, out: &mut Vec<[f64; 2]>) {
    for _ in 0..count {
        out.push([rng.random_range(x.0..x.1), rng.random_range(y.0..y.1)]);
    }
}

/// Two thin vertical strips, each crossed by a small dense square at mid
/// height, over a uniform background (400 points).
///
/// The two strips are the planted structures (`x = 0.3` and `x = 0.7`). The
/// horizontal line `y = 0.5` through both squares is a spurious structure
/// that only gains support from elements already explained by the strips.
/// Meant to be fitted with `delta = 0.01`.
pub fn exclusion_fixture(seed: u64) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(400);
    let mut labels = Vec::with_capacity(400);
    uniform_in(&mut rng, (0.29, 0.31), (0.0, 1.0), 100, &mut points);
    uniform_in(&mut rng, (0.29, 0.31), (0.49, 0.51), 50, &mut points);
    labels.extend(std::iter::repeat_n(Some(0), 150));
    uniform_in(&mut rng, (0.69, 0.71), (0.0, 1.0), 100, &mut points);
    uniform_in(&mut rng, (0.69, 0.71), (0.49, 0.51), 50, &mut points);
    labels.extend(std::iter::repeat_n(Some(1), 150));
    uniform_in(&mut rng, (0.0, 1.0), (0.0, 1.0), 100, &mut points);
    labels.extend(std::iter::repeat_n(None, 100));
    let data = DataSet::from_points(&points).expect("2D points");
    let models = vec![
        Model::line(Vector2::new(1.0, 0.0), 0.3).expect("unit normal"),
        Model::line(Vector2::new(1.0, 0.0), 0.7).expect("unit normal"),
    ];
    let truth = GroupCover::from_labels(&labels);
    Synthetic {
        data,
        models,
        labels,
        truth,
    }
}

/// The spurious horizontal line of [`exclusion_fixture`].
pub fn exclusion_fixture_spurious() -> Model {
    Model::line(Vector2::new(0.0, 1.0), 0.5).expect("unit normal")
}

/// Two segments crossing at the center of the unit box at right angles,
/// `per_line` points each plus `crossing` extra points at the intersection,
/// with uniform outliers. Intersection points belong to both groups.
pub fn crossing_lines(per_line: usize, crossing: usize, sigma: f64, outliers: usize, seed: u64) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).expect("finite sigma");
    let c = Vector2::new(0.5, 0.5);
    let dirs = [Vector2::new(1.0, 1.0).normalize(), Vector2::new(1.0, -1.0).normalize()];
    let shapes: Vec<Shape> = dirs
        .iter()
        .map(|d| Shape::Segment {
            a: c - d * 0.45,
            b: c + d * 0.45,
        })
        .collect();
    let models: Vec<Model> = shapes.iter().map(Shape::model).collect();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (t, shape) in shapes.iter().enumerate() {
        for _ in 0..per_line {
            points.push(shape.sample(&mut rng, &noise));
            labels.push(Some(t));
        }
    }
    for _ in 0..crossing {
        let p = c + Vector2::new(noise.sample(&mut rng), noise.sample(&mut rng)) * 0.5;
        points.push([p.x, p.y]);
        labels.push(Some(0));
    }
    uniform_in(&mut rng, (0.0, 1.0), (0.0, 1.0), outliers, &mut points);
    labels.extend(std::iter::repeat_n(None, outliers));
    let data = DataSet::from_points(&points).expect("2D points");
    let truth = membership_cover(&data, &models, &labels, (3.0 * sigma).max(1e-12));
    Synthetic {
        data,
        models,
        labels,
        truth,
    }
}

/// Parallel planes `z = c` for a few heights with uniform outliers in the
/// unit cube.
pub fn parallel_planes(heights: &[f64], per_plane: usize, sigma: f64, outliers: usize, seed: u64) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).expect("finite sigma");
    let models: Vec<Model> = heights
        .iter()
        .map(|&h| Model::plane(Vector3::new(0.0, 0.0, 1.0), h).expect("unit normal"))
        .collect();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (t, &h) in heights.iter().enumerate() {
        for _ in 0..per_plane {
            points.push([rng.random::<f64>(), rng.random::<f64>(), h + noise.sample(&mut rng)]);
            labels.push(Some(t));
        }
    }
    for _ in 0..outliers {
        points.push([rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()]);
        labels.push(None);
    }
    let data = DataSet::from_points(&points).expect("3D points");
    let truth = membership_cover(&data, &models, &labels, (3.0 * sigma).max(1e-12));
    Synthetic {
        data,
        models,
        labels,
        truth,
    }
}

/// A binary matrix with planted dense blocks on disjoint rows and columns.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedMatrix {
    pub matrix: DMatrix<f64>,
    pub rows: Vec<Vec<usize>>,
    pub cols: Vec<Vec<usize>>,
}

/// Preference-like matrix with `blocks` planted biclusters.
///
/// Half of the rows and four fifths of the columns are split evenly among
/// the blocks. Block entries are one with probability `fill`, all other
/// entries with probability `background`.
pub fn planted_preference(m: usize, n: usize, blocks: usize, fill: f64, background: f64, seed: u64) -> PlantedMatrix {
    assert!(blocks >= 1 && m >= 2 * blocks && n >= 2 * blocks, "matrix too small for the blocks");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (rb, cb) = (m / 2 / blocks, n * 4 / 5 / blocks);
    let rows: Vec<Vec<usize>> = (0..blocks).map(|t| (t * rb..(t + 1) * rb).collect()).collect();
    let cols: Vec<Vec<usize>> = (0..blocks).map(|t| (t * cb..(t + 1) * cb).collect()).collect();
    let mut matrix = DMatrix::zeros(m, n);
    for j in 0..n {
        let block = (j / cb.max(1) < blocks).then(|| j / cb);
        for i in 0..m {
            let inside = block.is_some_and(|t| i / rb == t && i < blocks * rb);
            let p = if inside { fill } else { background };
            if rng.random::<f64>() < p {
                matrix[(i, j)] = 1.0;
            }
        }
    }
    PlantedMatrix { matrix, rows, cols }
}
