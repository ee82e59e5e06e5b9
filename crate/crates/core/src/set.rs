//! Compact convex feasible sets with exact Euclidean projection and
//! linear-minimization oracles.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vector;

/// A non-empty, convex, compact subset of R^n.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    /// Axis-aligned box `lower <= x <= upper`.
    Box { lower: Vector, upper: Vector },
    /// Closed Euclidean ball.
    Ball { center: Vector, radius: f64 },
    /// Probability simplex `{x >= 0, sum x = 1}` in `dimension` coordinates.
    Simplex { dimension: usize },
    /// Cartesian product; coordinates are concatenated in order.
    Product(Vec<FeasibleSet>),
}

impl FeasibleSet {
    pub fn new_box(lower: Vector, upper: Vector) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::InvalidSet("box must have positive dimension".into()));
        }
        for i in 0..lower.len() {
            if !lower[i].is_finite() || !upper[i].is_finite() {
                return Err(Error::InvalidSet("box bounds must be finite".into()));
            }
            if lower[i] > upper[i] {
                return Err(Error::InvalidSet(format!(
                    "box lower bound {} exceeds upper bound {} in coordinate {i}",
                    lower[i], upper[i]
                )));
            }
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    /// The cube `[lo, hi]^n`.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new_box(DVector::from_element(n, lo), DVector::from_element(n, hi))
    }

    pub fn new_ball(center: Vector, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidSet("ball must have positive dimension".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidSet(format!("ball radius must be positive, got {radius}")));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSet("ball center must be finite".into()));
        }
        Ok(FeasibleSet::Ball { center, radius })
    }

    /// Ball of the given radius centred at the origin.
    pub fn unit_ball(n: usize, radius: f64) -> Result<Self> {
        Self::new_ball(DVector::zeros(n), radius)
    }

    pub fn new_simplex(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidSet("simplex must have positive dimension".into()));
        }
        Ok(FeasibleSet::Simplex { dimension })
    }

    pub fn new_product(parts: Vec<FeasibleSet>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidSet("product needs at least one component".into()));
        }
        Ok(FeasibleSet::Product(parts))
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::Box { lower, .. } => lower.len(),
            FeasibleSet::Ball { center, .. } => center.len(),
            FeasibleSet::Simplex { dimension } => *dimension,
            FeasibleSet::Product(parts) => parts.iter().map(FeasibleSet::dim).sum(),
        }
    }

    /// Exact diameter `max ||x - x'||` over the set.
    ///
    /// The one-coordinate simplex is the single point `{1}` and has diameter 0.
    pub fn diameter(&self) -> f64 {
        match self {
            FeasibleSet::Box { lower, upper } => (upper - lower).norm(),
            FeasibleSet::Ball { radius, .. } => 2.0 * radius,
            FeasibleSet::Simplex { dimension } => {
                if *dimension >= 2 {
                    std::f64::consts::SQRT_2
                } else {
                    0.0
                }
            }
            FeasibleSet::Product(parts) => parts
                .iter()
                .map(|p| p.diameter().powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Coordinatewise bounding box of the set.
    pub fn bounding_box(&self) -> (Vector, Vector) {
        match self {
            FeasibleSet::Box { lower, upper } => (lower.clone(), upper.clone()),
            FeasibleSet::Ball { center, radius } => (center.add_scalar(-radius), center.add_scalar(*radius)),
            FeasibleSet::Simplex { dimension } => {
                (DVector::zeros(*dimension), DVector::from_element(*dimension, 1.0))
            }
            FeasibleSet::Product(parts) => {
                let (lo, hi): (Vec<_>, Vec<_>) = parts.iter().map(FeasibleSet::bounding_box).unzip();
                (concat(&lo), concat(&hi))
            }
        }
    }

    /// A feasible central point: box midpoint, ball center, simplex barycenter.
    pub fn center(&self) -> Vector {
        match self {
            FeasibleSet::Box { lower, upper } => (lower + upper) * 0.5,
            FeasibleSet::Ball { center, .. } => center.clone(),
            FeasibleSet::Simplex { dimension } => DVector::from_element(*dimension, 1.0 / *dimension as f64),
            FeasibleSet::Product(parts) => concat(&parts.iter().map(FeasibleSet::center).collect::<Vec<_>>()),
        }
    }

    fn check_input(&self, point: &Vector) -> Result<()> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: point.len(),
            });
        }
        if point.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "projection input".into(),
            });
        }
        Ok(())
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, point: &Vector) -> Result<Vector> {
        self.check_input(point)?;
        Ok(self.project_unchecked(point))
    }

    fn project_unchecked(&self, point: &Vector) -> Vector {
        match self {
            FeasibleSet::Box { lower, upper } => {
                DVector::from_fn(point.len(), |i, _| point[i].clamp(lower[i], upper[i]))
            }
            FeasibleSet::Ball { center, radius } => {
                let offset = point - center;
                let dist = offset.norm();
                if dist <= *radius {
                    point.clone()
                } else {
                    center + offset * (radius / dist)
                }
            }
            FeasibleSet::Simplex { .. } => project_simplex(point),
            FeasibleSet::Product(parts) => {
                let mut out = Vec::with_capacity(parts.len());
                let mut offset = 0;
                for part in parts {
                    let n = part.dim();
                    out.push(part.project_unchecked(&point.rows(offset, n).into_owned()));
                    offset += n;
                }
                concat(&out)
            }
        }
    }

    /// Minimizer and minimum of `<direction, y>` over the set.
    ///
    /// Zero direction components resolve to the lower bound (box) or the
    /// first minimizing vertex (simplex); a zero direction on a ball returns
    /// the center.
    pub fn linear_minimize(&self, direction: &Vector) -> Result<(Vector, f64)> {
        if direction.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: direction.len(),
            });
        }
        if direction.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "linear minimization direction".into(),
            });
        }
        let arg = self.linear_minimize_unchecked(direction);
        let value = direction.dot(&arg);
        Ok((arg, value))
    }

    fn linear_minimize_unchecked(&self, direction: &Vector) -> Vector {
        match self {
            FeasibleSet::Box { lower, upper } => DVector::from_fn(direction.len(), |i, _| {
                if direction[i] < 0.0 {
                    upper[i]
                } else {
                    lower[i]
                }
            }),
            FeasibleSet::Ball { center, radius } => {
                let norm = direction.norm();
                if norm == 0.0 {
                    center.clone()
                } else {
                    center - direction * (radius / norm)
                }
            }
            FeasibleSet::Simplex { dimension } => {
                let mut best = 0;
                for i in 1..*dimension {
                    if direction[i] < direction[best] {
                        best = i;
                    }
                }
                let mut v = DVector::zeros(*dimension);
                v[best] = 1.0;
                v
            }
            FeasibleSet::Product(parts) => {
                let mut out = Vec::with_capacity(parts.len());
                let mut offset = 0;
                for part in parts {
                    let n = part.dim();
                    out.push(part.linear_minimize_unchecked(&direction.rows(offset, n).into_owned()));
                    offset += n;
                }
                concat(&out)
            }
        }
    }

    /// Euclidean distance from `point` to the set.
    pub fn distance(&self, point: &Vector) -> Result<f64> {
        Ok((self.project(point)? - point).norm())
    }

    /// Errors unless `point` lies within `tolerance` of the set.
    pub fn ensure_contains(&self, point: &Vector, tolerance: f64) -> Result<()> {
        let distance = self.distance(point)?;
        if distance > tolerance {
            return Err(Error::Infeasible { distance, tolerance });
        }
        Ok(())
    }

    /// Draws a point uniformly from the set (componentwise uniform for products).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        match self {
            FeasibleSet::Box { lower, upper } => DVector::from_fn(lower.len(), |i, _| {
                if lower[i] == upper[i] {
                    lower[i]
                } else {
                    rng.random_range(lower[i]..=upper[i])
                }
            }),
            FeasibleSet::Ball { center, radius } => {
                let n = center.len();
                let mut dir: Vector = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
                let norm = dir.norm();
                if norm == 0.0 {
                    return center.clone();
                }
                dir /= norm;
                let u: f64 = rng.random();
                center + dir * (radius * u.powf(1.0 / n as f64))
            }
            FeasibleSet::Simplex { dimension } => {
                let e: Vector = DVector::from_fn(*dimension, |_, _| Exp1.sample(rng));
                let total = e.sum();
                e / total
            }
            FeasibleSet::Product(parts) => {
                let pieces: Vec<Vector> = parts.iter().map(|p| p.sample(rng)).collect();
                concat(&pieces)
            }
        }
    }

    /// Deterministic grid over the bounding box, projected onto the set.
    ///
    /// Uses `floor(budget^(1/n))` points per axis, rounded down to an odd
    /// count so the midpoint is included (at least 2, or 1 for a degenerate
    /// axis). With `budget = 2001` on `[-1, 1]` the spacing is 1e-3.
    pub fn grid(&self, budget: usize) -> Vec<Vector> {
        let n = self.dim();
        let (lo, hi) = self.bounding_box();
        let per_axis = ((budget.max(1) as f64).powf(1.0 / n as f64) + 1e-9).floor() as usize;
        let per_axis = match per_axis.max(2) {
            m if m > 2 && m % 2 == 0 => m - 1,
            m => m,
        };
        let axes: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                if lo[i] == hi[i] {
                    vec![lo[i]]
                } else {
                    let h = (hi[i] - lo[i]) / (per_axis - 1) as f64;
                    (0..per_axis)
                        .map(|j| if j + 1 == per_axis { hi[i] } else { lo[i] + h * j as f64 })
                        .collect()
                }
            })
            .collect();
        let total: usize = axes.iter().map(Vec::len).product();
        let mut points = Vec::with_capacity(total);
        let mut idx = vec![0usize; n];
        for _ in 0..total {
            let p = DVector::from_fn(n, |i, _| axes[i][idx[i]]);
            points.push(self.project_unchecked(&p));
            for i in 0..n {
                idx[i] += 1;
                if idx[i] < axes[i].len() {
                    break;
                }
                idx[i] = 0;
            }
        }
        points
    }

    /// Serializable description of the set.
    pub fn to_spec(&self) -> SetSpec {
        match self {
            FeasibleSet::Box { lower, upper } => SetSpec::Box {
                lower: lower.iter().copied().collect(),
                upper: upper.iter().copied().collect(),
            },
            FeasibleSet::Ball { center, radius } => SetSpec::Ball {
                center: center.iter().copied().collect(),
                radius: *radius,
            },
            FeasibleSet::Simplex { dimension } => SetSpec::Simplex { dimension: *dimension },
            FeasibleSet::Product(parts) => SetSpec::Product(parts.iter().map(FeasibleSet::to_spec).collect()),
        }
    }

    pub fn from_spec(spec: &SetSpec) -> Result<Self> {
        match spec {
            SetSpec::Box { lower, upper } => {
                Self::new_box(DVector::from_vec(lower.clone()), DVector::from_vec(upper.clone()))
            }
            SetSpec::Ball { center, radius } => Self::new_ball(DVector::from_vec(center.clone()), *radius),
            SetSpec::Simplex { dimension } => Self::new_simplex(*dimension),
            SetSpec::Product(parts) => {
                Self::new_product(parts.iter().map(Self::from_spec).collect::<Result<_>>()?)
            }
        }
    }
}

/// JSON form: `{"variant": "box", "params": {"lower": [..], "upper": [..]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "params", rename_all = "snake_case")]
pub enum SetSpec {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Simplex { dimension: usize },
    Product(Vec<SetSpec>),
}

/// Sort-based exact projection onto the probability simplex.
fn project_simplex(v: &Vector) -> Vector {
    let mut u: Vec<f64> = v.iter().copied().collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let candidate = (cumsum - 1.0) / (j + 1) as f64;
        if uj - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.map(|x| (x - theta).max(0.0))
}

pub(crate) fn concat(parts: &[Vector]) -> Vector {
    let data: Vec<f64> = parts.iter().flat_map(|p| p.iter().copied()).collect();
    DVector::from_vec(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn interval() -> FeasibleSet {
        FeasibleSet::cube(1, -1.0, 1.0).unwrap()
    }

    #[test]
    fn box_projection_clamps() {
        assert_eq!(interval().project(&dvector![1.5]).unwrap(), dvector![1.0]);
    }

    #[test]
    fn ball_interior_point_is_fixed() {
        let ball = FeasibleSet::unit_ball(2, 1.0).unwrap();
        assert_eq!(ball.project(&dvector![0.3, 0.4]).unwrap(), dvector![0.3, 0.4]);
        let p = ball.project(&dvector![3.0, 4.0]).unwrap();
        assert!((p - dvector![0.6, 0.8]).norm() < 1e-15);
    }

    #[test]
    fn simplex_projection_matches_grid_search() {
        let simplex = FeasibleSet::new_simplex(3).unwrap();
        let target = dvector![0.5, 0.5, 0.5];
        // brute force over the simplex at resolution 1e-3
        let steps = 1000;
        let mut best = (f64::INFINITY, DVector::zeros(3));
        for i in 0..=steps {
            for j in 0..=(steps - i) {
                let y = dvector![
                    i as f64 / steps as f64,
                    j as f64 / steps as f64,
                    (steps - i - j) as f64 / steps as f64
                ];
                let d = (&y - &target).norm_squared();
                if d < best.0 {
                    best = (d, y);
                }
            }
        }
        let p = simplex.project(&target).unwrap();
        assert!((&p - dvector![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).norm() < 1e-15);
        assert!((&p - &best.1).norm() < 1e-3);
    }

    #[test]
    fn projection_errors() {
        assert!(matches!(
            interval().project(&dvector![1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
        assert!(matches!(interval().project(&dvector![f64::NAN]), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn linear_minimization_examples() {
        let square = FeasibleSet::cube(2, -1.0, 1.0).unwrap();
        let (arg, val) = square.linear_minimize(&dvector![1.0, -2.0]).unwrap();
        assert_eq!(arg, dvector![-1.0, 1.0]);
        assert_eq!(val, -3.0);

        let ball = FeasibleSet::unit_ball(2, 1.0).unwrap();
        let (arg, val) = ball.linear_minimize(&dvector![3.0, 4.0]).unwrap();
        assert!((arg - dvector![-0.6, -0.8]).norm() < 1e-15);
        assert!((val + 5.0).abs() < 1e-14);

        let simplex = FeasibleSet::new_simplex(3).unwrap();
        let (arg, val) = simplex.linear_minimize(&dvector![0.2, -0.1, 0.5]).unwrap();
        assert_eq!(arg, dvector![0.0, 1.0, 0.0]);
        assert_eq!(val, -0.1);
    }

    #[test]
    fn linear_minimization_ties() {
        let square = FeasibleSet::cube(2, -1.0, 1.0).unwrap();
        let (arg, _) = square.linear_minimize(&dvector![0.0, 0.0]).unwrap();
        assert_eq!(arg, dvector![-1.0, -1.0]);
        let simplex = FeasibleSet::new_simplex(3).unwrap();
        let (arg, _) = simplex.linear_minimize(&dvector![0.0, 0.0, 0.0]).unwrap();
        assert_eq!(arg, dvector![1.0, 0.0, 0.0]);
        let ball = FeasibleSet::new_ball(dvector![0.5, 0.0], 1.0).unwrap();
        assert_eq!(ball.linear_minimize(&dvector![0.0, 0.0]).unwrap().0, dvector![0.5, 0.0]);
    }

    #[test]
    fn diameters() {
        assert_eq!(interval().diameter(), 2.0);
        assert_eq!(FeasibleSet::unit_ball(2, 1.0).unwrap().diameter(), 2.0);
        // brute force over vertex pairs
        let mut max = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let mut a = DVector::<f64>::zeros(3);
                let mut b = DVector::<f64>::zeros(3);
                a[i] = 1.0;
                b[j] = 1.0;
                max = max.max((a - b).norm());
            }
        }
        assert_eq!(FeasibleSet::new_simplex(3).unwrap().diameter(), max);
        let prod = FeasibleSet::new_product(vec![interval(), FeasibleSet::unit_ball(2, 1.0).unwrap()]).unwrap();
        assert_eq!(prod.dim(), 3);
        assert!((prod.diameter() - 8f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn invalid_sets_rejected() {
        assert!(FeasibleSet::new_box(dvector![1.0], dvector![0.0]).is_err());
        assert!(FeasibleSet::new_ball(dvector![0.0], 0.0).is_err());
        assert!(FeasibleSet::new_simplex(0).is_err());
        assert!(FeasibleSet::new_product(vec![]).is_err());
    }

    #[test]
    fn samples_and_grid_are_feasible() {
        let sets = vec![
            interval(),
            FeasibleSet::unit_ball(3, 2.0).unwrap(),
            FeasibleSet::new_simplex(4).unwrap(),
            FeasibleSet::new_product(vec![interval(), FeasibleSet::new_simplex(2).unwrap()]).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for set in &sets {
            for _ in 0..200 {
                let x = set.sample(&mut rng);
                assert!(set.distance(&x).unwrap() < 1e-12);
            }
            for x in set.grid(500) {
                assert!(set.distance(&x).unwrap() < 1e-12);
            }
        }
        let grid = interval().grid(2001);
        assert_eq!(grid.len(), 2001);
        assert!((grid[1][0] - grid[0][0] - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn spec_round_trip() {
        let set = FeasibleSet::new_product(vec![interval(), FeasibleSet::unit_ball(2, 1.0).unwrap()]).unwrap();
        let json = serde_json::to_string(&set.to_spec()).unwrap();
        assert!(json.contains("\"variant\":\"product\""));
        let back = FeasibleSet::from_spec(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, set);
    }
}
