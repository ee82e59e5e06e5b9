//! The variational inequality problem `VI(F; X)`: find `x* in X` with
//! `<F(x*), x - x*> >= 0` for every `x in X`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::{FeasibleSet, SetSpec};
use crate::{Matrix, Vector};

pub type OperatorFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>;

/// Tolerance for accepting a declared solution: distance to the set.
pub const DECLARED_FEASIBILITY_TOL: f64 = 1e-12;
/// Tolerance for accepting a declared solution: gap function value.
pub const DECLARED_GAP_TOL: f64 = 1e-8;

/// The mapping `F`.
#[derive(Clone)]
pub enum Operator {
    /// `F(x) = Q x + c`; its Jacobian is `Q`.
    Affine { matrix: Matrix, offset: Vector },
    /// Arbitrary mapping. Only operators carrying a registry `id` can be
    /// written to the JSON problem format.
    Nonlinear {
        id: Option<String>,
        map: OperatorFn,
        jacobian: Option<JacobianFn>,
    },
}

impl Operator {
    pub fn affine(matrix: Matrix, offset: Vector) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() != offset.len() {
            return Err(Error::InvalidProblem(format!(
                "affine operator needs a square matrix matching the offset, got {}x{} and {}",
                matrix.nrows(),
                matrix.ncols(),
                offset.len()
            )));
        }
        Ok(Operator::Affine { matrix, offset })
    }

    /// Linear operator `F(x) = Q x`.
    pub fn linear(matrix: Matrix) -> Result<Self> {
        let n = matrix.nrows();
        Self::affine(matrix, DVector::zeros(n))
    }

    pub fn nonlinear<F>(map: F) -> Self
    where
        F: Fn(&Vector) -> Vector + Send + Sync + 'static,
    {
        Operator::Nonlinear {
            id: None,
            map: Arc::new(map),
            jacobian: None,
        }
    }

    pub fn with_jacobian<J>(self, jac: J) -> Self
    where
        J: Fn(&Vector) -> Matrix + Send + Sync + 'static,
    {
        match self {
            Operator::Nonlinear { id, map, .. } => Operator::Nonlinear {
                id,
                map,
                jacobian: Some(Arc::new(jac)),
            },
            affine => affine,
        }
    }

    pub fn with_id(self, new_id: impl Into<String>) -> Self {
        match self {
            Operator::Nonlinear { map, jacobian, .. } => Operator::Nonlinear {
                id: Some(new_id.into()),
                map,
                jacobian,
            },
            affine => affine,
        }
    }

    fn apply(&self, x: &Vector) -> Vector {
        match self {
            Operator::Affine { matrix, offset } => matrix * x + offset,
            Operator::Nonlinear { map, .. } => map(x),
        }
    }

    fn jacobian_at(&self, x: &Vector) -> Option<Matrix> {
        match self {
            Operator::Affine { matrix, .. } => Some(matrix.clone()),
            Operator::Nonlinear { jacobian, .. } => jacobian.as_ref().map(|j| j(x)),
        }
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operator::Affine { matrix, offset } => f
                .debug_struct("Affine")
                .field("matrix", matrix)
                .field("offset", offset)
                .finish(),
            Operator::Nonlinear { id, jacobian, .. } => f
                .debug_struct("Nonlinear")
                .field("id", id)
                .field("has_jacobian", &jacobian.is_some())
                .finish(),
        }
    }
}

/// A VI instance: operator, feasible set, optional Lipschitz data and a
/// finite list of known solutions.
#[derive(Clone, Debug)]
pub struct VIProblem {
    name: String,
    operator: Operator,
    set: FeasibleSet,
    lipschitz: Option<f64>,
    lipschitz_p: Option<f64>,
    declared_solutions: Vec<Vector>,
}

impl VIProblem {
    pub fn new(name: impl Into<String>, operator: Operator, set: FeasibleSet) -> Result<Self> {
        let problem = VIProblem {
            name: name.into(),
            operator,
            set,
            lipschitz: None,
            lipschitz_p: None,
            declared_solutions: Vec::new(),
        };
        if let Operator::Affine { matrix, .. } = &problem.operator {
            if matrix.nrows() != problem.set.dim() {
                return Err(Error::DimensionMismatch {
                    expected: problem.set.dim(),
                    got: matrix.nrows(),
                });
            }
        }
        // probe the operator once so dimension errors surface at construction
        let probe = problem.set.center();
        let probe = problem.set.project(&probe)?;
        problem.eval(&probe)?;
        Ok(problem)
    }

    pub fn with_lipschitz(mut self, lipschitz: f64) -> Result<Self> {
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(Error::InvalidProblem(format!("lipschitz constant must be positive, got {lipschitz}")));
        }
        self.lipschitz = Some(lipschitz);
        Ok(self)
    }

    /// Lipschitz constant of the Jacobian (used by the second-order scheme).
    pub fn with_lipschitz_p(mut self, lipschitz_p: f64) -> Result<Self> {
        if !(lipschitz_p > 0.0 && lipschitz_p.is_finite()) {
            return Err(Error::InvalidProblem(format!(
                "jacobian lipschitz constant must be positive, got {lipschitz_p}"
            )));
        }
        self.lipschitz_p = Some(lipschitz_p);
        Ok(self)
    }

    /// Attaches known solutions; each must be feasible and have a vanishing gap.
    pub fn with_declared_solutions(mut self, solutions: Vec<Vector>) -> Result<Self> {
        for sol in &solutions {
            let distance = self.set.distance(sol)?;
            if distance > DECLARED_FEASIBILITY_TOL {
                return Err(Error::InvalidProblem(format!(
                    "declared solution {:?} lies {distance:e} outside the set",
                    sol.as_slice()
                )));
            }
            let f = self.eval(sol)?;
            let (_, min) = self.set.linear_minimize(&f)?;
            let gap = f.dot(sol) - min;
            if gap > DECLARED_GAP_TOL {
                return Err(Error::InvalidProblem(format!(
                    "declared solution {:?} has gap {gap:e}",
                    sol.as_slice()
                )));
            }
        }
        self.declared_solutions = solutions;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn operator(&self) -> &Operator {
        &self.operator
    }

    pub fn set(&self) -> &FeasibleSet {
        &self.set
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn lipschitz_p(&self) -> Option<f64> {
        self.lipschitz_p
    }

    pub fn declared_solutions(&self) -> &[Vector] {
        &self.declared_solutions
    }

    pub fn is_affine(&self) -> bool {
        matches!(self.operator, Operator::Affine { .. })
    }

    pub fn has_jacobian(&self) -> bool {
        match &self.operator {
            Operator::Affine { .. } => true,
            Operator::Nonlinear { jacobian, .. } => jacobian.is_some(),
        }
    }

    /// Evaluates `F(x)`, checking dimensions and finiteness.
    pub fn eval(&self, x: &Vector) -> Result<Vector> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        let fx = self.operator.apply(x);
        if fx.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: fx.len() });
        }
        if fx.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: format!("operator value of `{}`", self.name),
            });
        }
        Ok(fx)
    }

    pub fn jacobian(&self, x: &Vector) -> Option<Matrix> {
        self.operator.jacobian_at(x)
    }

    /// The declared Lipschitz constant, or an estimate.
    ///
    /// Affine operators use the spectral norm of the matrix. Otherwise the
    /// largest difference quotient over 10^4 seeded feasible pairs is
    /// inflated by 1.2.
    pub fn lipschitz_or_estimate(&self, seed: u64) -> Result<f64> {
        if let Some(l) = self.lipschitz {
            return Ok(l);
        }
        if let Operator::Affine { matrix, .. } = &self.operator {
            return Ok(spectral_norm(matrix).max(f64::MIN_POSITIVE));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = 0.0f64;
        for _ in 0..10_000 {
            let a = self.set.sample(&mut rng);
            let b = self.set.sample(&mut rng);
            let d = (&a - &b).norm();
            if d > 1e-12 {
                let ratio = (self.eval(&a)? - self.eval(&b)?).norm() / d;
                best = best.max(ratio);
            }
        }
        Ok((1.2 * best).max(f64::MIN_POSITIVE))
    }

    pub fn to_spec(&self) -> Result<ProblemSpec> {
        let operator = match &self.operator {
            Operator::Affine { matrix, offset } => OperatorSpec::Affine {
                matrix: (0..matrix.nrows())
                    .map(|i| matrix.row(i).iter().copied().collect())
                    .collect(),
                offset: offset.iter().copied().collect(),
            },
            Operator::Nonlinear { id: Some(id), .. } => OperatorSpec::Builtin { id: id.clone() },
            Operator::Nonlinear { id: None, .. } => {
                return Err(Error::InvalidProblem(format!(
                    "operator of `{}` has no registry id and cannot be serialized",
                    self.name
                )))
            }
        };
        Ok(ProblemSpec {
            name: self.name.clone(),
            set: self.set.to_spec(),
            operator,
            lipschitz: self.lipschitz,
            lipschitz_p: self.lipschitz_p,
            declared_solutions: self
                .declared_solutions
                .iter()
                .map(|s| s.iter().copied().collect())
                .collect(),
        })
    }

    pub fn from_spec(spec: &ProblemSpec) -> Result<Self> {
        let set = FeasibleSet::from_spec(&spec.set)?;
        let operator = match &spec.operator {
            OperatorSpec::Affine { matrix, offset } => {
                let n = offset.len();
                if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
                    return Err(Error::InvalidProblem(format!(
                        "affine matrix must be {n}x{n} to match the offset"
                    )));
                }
                Operator::affine(
                    DMatrix::from_fn(n, n, |i, j| matrix[i][j]),
                    DVector::from_vec(offset.clone()),
                )?
            }
            OperatorSpec::Builtin { id } => crate::problems::builtin_operator(id)?,
        };
        let mut problem = VIProblem::new(spec.name.clone(), operator, set)?;
        if let Some(l) = spec.lipschitz {
            problem = problem.with_lipschitz(l)?;
        }
        if let Some(l) = spec.lipschitz_p {
            problem = problem.with_lipschitz_p(l)?;
        }
        problem.with_declared_solutions(
            spec.declared_solutions
                .iter()
                .map(|s| DVector::from_vec(s.clone()))
                .collect(),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_spec()?)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Self::from_spec(&serde_json::from_str(json)?)
    }
}

/// JSON problem document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: String,
    pub set: SetSpec,
    pub operator: OperatorSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz_p: Option<f64>,
    #[serde(default)]
    pub declared_solutions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorSpec {
    Builtin { id: String },
    /// Row-major matrix `Q` and offset `c` of `F(x) = Q x + c`.
    Affine { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |a, &b| a.max(b))
}
