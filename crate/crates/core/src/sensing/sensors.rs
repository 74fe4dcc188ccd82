use crate::error::{Error, Result};
use crate::fem::Point;

/// Default bound on `d_max / d_min` for quasi-uniform layouts.
pub const DEFAULT_QUASI_UNIFORMITY: f64 = 4.0;

/// Sensor locations `x_1 … x_n` in the closed unit square.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorSet {
    points: Vec<Point>,
    d_max: f64,
    d_min: f64,
}

impl SensorSet {
    /// Validates the points and computes the fill distance `d_max` (largest
    /// distance from a point of Ω to its nearest sensor, evaluated on a
    /// lattice of spacing at most `1 / (2⌈√n⌉)`) and the separation `d_min`
    /// (smallest pairwise distance).
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::arg("sensor list is empty"));
        }
        for (i, &[x, y]) in points.iter().enumerate() {
            if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
                return Err(Error::arg(format!(
                    "sensor {i} at ({x}, {y}) lies outside the unit square"
                )));
            }
        }
        let grid = BucketGrid::new(&points);
        let d_min = if points.len() == 1 {
            f64::INFINITY
        } else {
            (0..points.len())
                .map(|i| grid.nearest(points[i], Some(i)).1)
                .fold(f64::INFINITY, f64::min)
        };
        if d_min == 0.0 {
            return Err(Error::arg("sensor locations must be pairwise distinct"));
        }
        let side = 2 * (points.len() as f64).sqrt().ceil() as usize;
        let side = side.max(64);
        let mut d_max: f64 = 0.0;
        for j in 0..=side {
            for i in 0..=side {
                let p = [i as f64 / side as f64, j as f64 / side as f64];
                d_max = d_max.max(grid.nearest(p, None).1);
            }
        }
        Ok(Self {
            points,
            d_max,
            d_min,
        })
    }

    /// `k × k` cell-centred grid `((i + ½)/k, (j + ½)/k)`, ordered by `y`
    /// then `x`.
    pub fn uniform(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::arg(format!("need k >= 2 sensors per side, got {k}")));
        }
        let kf = k as f64;
        let points = (0..k)
            .flat_map(|j| (0..k).map(move |i| [(i as f64 + 0.5) / kf, (j as f64 + 0.5) / kf]))
            .collect();
        let set = Self::new(points)?;
        set.check_quasi_uniform(DEFAULT_QUASI_UNIFORMITY)?;
        Ok(set)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    /// `B = d_max / d_min`.
    pub fn quasi_uniformity(&self) -> f64 {
        self.d_max / self.d_min
    }

    pub fn check_quasi_uniform(&self, bound: f64) -> Result<()> {
        let b = self.quasi_uniformity();
        if b <= bound {
            Ok(())
        } else {
            Err(Error::arg(format!(
                "sensor layout has d_max/d_min = {b:.3} above the bound {bound}"
            )))
        }
    }
}

/// Uniform bucket grid over the unit square for nearest-neighbour queries.
struct BucketGrid<'a> {
    points: &'a [Point],
    side: usize,
    starts: Vec<usize>,
    members: Vec<usize>,
}

impl<'a> BucketGrid<'a> {
    fn new(points: &'a [Point]) -> Self {
        let side = ((points.len() as f64).sqrt().ceil() as usize).max(1);
        let mut counts = vec![0usize; side * side + 1];
        let buckets: Vec<usize> = points.iter().map(|&p| Self::bucket_of(side, p)).collect();
        for &b in &buckets {
            counts[b + 1] += 1;
        }
        for i in 0..side * side {
            counts[i + 1] += counts[i];
        }
        let mut cursor = counts.clone();
        let mut members = vec![0; points.len()];
        for (i, &b) in buckets.iter().enumerate() {
            members[cursor[b]] = i;
            cursor[b] += 1;
        }
        Self {
            points,
            side,
            starts: counts,
            members,
        }
    }

    fn cell(side: usize, v: f64) -> usize {
        ((v * side as f64).floor() as usize).min(side - 1)
    }

    fn bucket_of(side: usize, p: Point) -> usize {
        Self::cell(side, p[1]) * side + Self::cell(side, p[0])
    }

    /// Index and distance of the sensor nearest to `p`, skipping `exclude`.
    fn nearest(&self, p: Point, exclude: Option<usize>) -> (usize, f64) {
        let s = self.side as isize;
        let (ci, cj) = (Self::cell(self.side, p[0]) as isize, Self::cell(self.side, p[1]) as isize);
        let width = 1.0 / self.side as f64;
        let mut best = (usize::MAX, f64::INFINITY);
        for r in 0..s {
            for dj in -r..=r {
                for di in -r..=r {
                    if di.abs() != r && dj.abs() != r {
                        continue;
                    }
                    let (i, j) = (ci + di, cj + dj);
                    if i < 0 || j < 0 || i >= s || j >= s {
                        continue;
                    }
                    let b = (j * s + i) as usize;
                    for &m in &self.members[self.starts[b]..self.starts[b + 1]] {
                        if Some(m) == exclude {
                            continue;
                        }
                        let q = self.points[m];
                        let d = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
                        if d < best.1 {
                            best = (m, d);
                        }
                    }
                }
            }
            // every bucket at ring r + 1 is at least r · width away
            if best.1 <= r as f64 * width {
                break;
            }
        }
        best
    }
}
