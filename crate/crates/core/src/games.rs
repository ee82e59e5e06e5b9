//! Two-player games, their VI form, and sampled classification of points as
//! quasi-Nash (first-order), Nash (global) and Minty-Nash equilibria.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conditions::Verdict;
use crate::error::{Error, Result};
use crate::merit::GRID_MAX_DIM;
use crate::problem::{Operator, VIProblem};
use crate::projection::FEASIBILITY_TOL;
use crate::set::{concat, FeasibleSet};
use crate::Vector;

/// First-order stationarity: the per-player gaps must sum to at most this.
pub const QNE_TOL: f64 = 1e-8;
/// Slack for sampled global minimality `f(u) >= f(c) - GLOBAL_TOL`.
pub const GLOBAL_TOL: f64 = 1e-8;
/// Slack for the sampled Minty inequality.
pub const MINTY_TOL: f64 = 1e-10;
/// Central-difference step for games without analytic gradients.
pub const FD_STEP: f64 = 1e-6;

/// Fractions along the segment from the candidate toward each probe.
const SEGMENT_STEPS: usize = 16;

pub type PayoffFn = Arc<dyn Fn(&Vector, &Vector) -> f64 + Send + Sync>;
pub type PartialGradFn = Arc<dyn Fn(&Vector, &Vector) -> Vector + Send + Sync>;
pub type ObjectiveFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;

fn central_difference(f: impl Fn(&Vector) -> f64, x: &Vector) -> Vector {
    let mut g = Vector::zeros(x.len());
    let mut e = x.clone();
    for i in 0..x.len() {
        e[i] = x[i] + FD_STEP;
        let plus = f(&e);
        e[i] = x[i] - FD_STEP;
        let minus = f(&e);
        e[i] = x[i];
        g[i] = (plus - minus) / (2.0 * FD_STEP);
    }
    g
}

/// A differentiable objective over a feasible set.
#[derive(Clone)]
pub struct Objective {
    value: ObjectiveFn,
    gradient: Option<GradientFn>,
}

impl Objective {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&Vector) -> f64 + Send + Sync + 'static,
    {
        Objective {
            value: Arc::new(f),
            gradient: None,
        }
    }

    pub fn with_gradient<G>(mut self, g: G) -> Self
    where
        G: Fn(&Vector) -> Vector + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }

    /// Analytic gradient, or central differences when none was supplied.
    pub fn gradient(&self, x: &Vector) -> Vector {
        match &self.gradient {
            Some(g) => g(x),
            None => central_difference(|z| (self.value)(z), x),
        }
    }
}

#[derive(Clone)]
pub struct TwoPlayerGame {
    name: String,
    theta_x: PayoffFn,
    theta_y: PayoffFn,
    grad_x: Option<PartialGradFn>,
    grad_y: Option<PartialGradFn>,
    set_x: FeasibleSet,
    set_y: FeasibleSet,
}

impl std::fmt::Debug for TwoPlayerGame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TwoPlayerGame")
            .field("name", &self.name)
            .field("set_x", &self.set_x)
            .field("set_y", &self.set_y)
            .field("analytic_gradients", &(self.grad_x.is_some() && self.grad_y.is_some()))
            .finish()
    }
}

impl TwoPlayerGame {
    /// A game whose partial gradients come from central differences until
    /// [`TwoPlayerGame::with_gradients`] supplies analytic ones.
    pub fn new<A, B>(name: impl Into<String>, theta_x: A, theta_y: B, set_x: FeasibleSet, set_y: FeasibleSet) -> Self
    where
        A: Fn(&Vector, &Vector) -> f64 + Send + Sync + 'static,
        B: Fn(&Vector, &Vector) -> f64 + Send + Sync + 'static,
    {
        TwoPlayerGame {
            name: name.into(),
            theta_x: Arc::new(theta_x),
            theta_y: Arc::new(theta_y),
            grad_x: None,
            grad_y: None,
            set_x,
            set_y,
        }
    }

    /// `gx(x, y)` is the gradient of `theta_x` in `x`, `gy(x, y)` that of `theta_y` in `y`.
    pub fn with_gradients<A, B>(mut self, gx: A, gy: B) -> Self
    where
        A: Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
        B: Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
    {
        self.grad_x = Some(Arc::new(gx));
        self.grad_y = Some(Arc::new(gy));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_x(&self) -> &FeasibleSet {
        &self.set_x
    }

    pub fn set_y(&self) -> &FeasibleSet {
        &self.set_y
    }

    pub fn theta_x(&self, x: &Vector, y: &Vector) -> f64 {
        (self.theta_x)(x, y)
    }

    pub fn theta_y(&self, x: &Vector, y: &Vector) -> f64 {
        (self.theta_y)(x, y)
    }

    pub fn grad_x(&self, x: &Vector, y: &Vector) -> Vector {
        match &self.grad_x {
            Some(g) => g(x, y),
            None => central_difference(|u| (self.theta_x)(u, y), x),
        }
    }

    pub fn grad_y(&self, x: &Vector, y: &Vector) -> Vector {
        match &self.grad_y {
            Some(g) => g(x, y),
            None => central_difference(|v| (self.theta_y)(x, v), y),
        }
    }

    /// Splits a stacked point `z = (x, y)`.
    pub fn split(&self, z: &Vector) -> (Vector, Vector) {
        let n = self.set_x.dim();
        (z.rows(0, n).into_owned(), z.rows(n, self.set_y.dim()).into_owned())
    }

    /// Largest relative error between the supplied gradients and central
    /// differences at 10 seeded feasible points. Zero without analytic gradients.
    pub fn gradient_check(&self, seed: u64) -> f64 {
        if self.grad_x.is_none() && self.grad_y.is_none() {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let x = self.set_x.sample(&mut rng);
            let y = self.set_y.sample(&mut rng);
            let pairs = [
                (self.grad_x(&x, &y), central_difference(|u| self.theta_x(u, &y), &x)),
                (self.grad_y(&x, &y), central_difference(|v| self.theta_y(&x, v), &y)),
            ];
            for (analytic, numeric) in pairs {
                let err = (&analytic - &numeric).norm() / analytic.norm().max(1.0);
                worst = worst.max(err);
            }
        }
        worst
    }
}

/// `F(x, y) = (grad_x theta_x, grad_y theta_y)` on `X x Y`.
pub fn game_to_vi(game: &TwoPlayerGame) -> Result<VIProblem> {
    let g = game.clone();
    let set = FeasibleSet::new_product(vec![game.set_x.clone(), game.set_y.clone()])?;
    let operator = Operator::nonlinear(move |z: &Vector| {
        let (x, y) = g.split(z);
        concat(&[g.grad_x(&x, &y), g.grad_y(&x, &y)])
    });
    VIProblem::new(game.name.clone(), operator, set)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Player {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameWitness {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub player: Option<Player>,
    /// The deviation (NE, first-order) or probe point (Minty).
    pub point: Vec<f64>,
    /// `f(u) - f(c)` for a global probe, `<grad f(u), u - c>` for a Minty
    /// probe, minus the gap for a first-order failure.
    pub value: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<GameWitness>,
}

impl Check {
    fn pass() -> Self {
        Check {
            verdict: Verdict::SatisfiedOnSamples,
            witness: None,
        }
    }

    fn fail(witness: GameWitness) -> Self {
        Check {
            verdict: Verdict::Violated,
            witness: Some(witness),
        }
    }

    fn with_player(mut self, player: Player) -> Self {
        if let Some(w) = &mut self.witness {
            w.player = Some(player);
        }
        self
    }

    fn and(self, other: Check) -> Check {
        if self.verdict.is_satisfied() {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Per-player gaps `(G_x, G_y)`; their sum is the VI gap of the stacked point.
    pub player_gaps: (f64, f64),
    pub is_qne: Check,
    pub is_ne: Check,
    pub is_mne: Check,
    pub sample_count: usize,
}

/// The probe set at candidate `c` for an objective with gradient `g` at `c`:
/// set probes, the linear-minimization vertex and short steps toward it.
fn probe_set(set: &FeasibleSet, c: &Vector, g: &Vector, samples: usize, seed: u64) -> Result<(Vec<Vector>, Vector, f64)> {
    let mut probes = if set.dim() <= GRID_MAX_DIM {
        set.grid(samples)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples).map(|_| set.sample(&mut rng)).collect()
    };
    let (v, min) = set.linear_minimize(g)?;
    let gap = (g.dot(c) - min).max(0.0);
    for e in 1..=8 {
        let s = 10f64.powi(-e);
        probes.push(c + (&v - c) * s);
    }
    probes.push(v.clone());
    Ok((probes, v, gap))
}

struct PlayerOutcome {
    gap: f64,
    vertex: Vector,
    global: Check,
    minty: Check,
    probes: usize,
}

fn assess(
    value: &dyn Fn(&Vector) -> f64,
    gradient: &dyn Fn(&Vector) -> Vector,
    set: &FeasibleSet,
    c: &Vector,
    samples: usize,
    seed: u64,
) -> Result<PlayerOutcome> {
    let g = gradient(c);
    let (probes, vertex, gap) = probe_set(set, c, &g, samples, seed)?;
    let fc = value(c);

    // global minimality on the probes, plus first-order stationarity: a
    // positive gap means f decreases toward the vertex
    let mut global = if gap > QNE_TOL {
        Check::fail(GameWitness {
            player: None,
            point: vertex.iter().copied().collect(),
            value: -gap,
            reason: "descent direction toward the linear-minimization vertex".into(),
        })
    } else {
        Check::pass()
    };
    if global.verdict.is_satisfied() {
        let worst = probes
            .iter()
            .map(|u| (u, value(u) - fc))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((u, d)) = worst {
            if d < -GLOBAL_TOL {
                global = Check::fail(GameWitness {
                    player: None,
                    point: u.iter().copied().collect(),
                    value: d,
                    reason: "lower objective value".into(),
                });
            }
        }
    }

    let mut minty = Check::pass();
    let mut worst = -MINTY_TOL;
    let mut visit = |u: &Vector| {
        let m = gradient(u).dot(&(u - c));
        if m < worst {
            worst = m;
            minty = Check::fail(GameWitness {
                player: None,
                point: u.iter().copied().collect(),
                value: m,
                reason: "Minty inequality fails".into(),
            });
        }
    };
    for u in &probes {
        visit(u);
        let d = u - c;
        for k in 1..SEGMENT_STEPS {
            visit(&(c + &d * (k as f64 / SEGMENT_STEPS as f64)));
        }
    }
    Ok(PlayerOutcome {
        gap,
        vertex,
        global,
        minty,
        probes: probes.len(),
    })
}

/// Classifies `(x, y)` against the quasi-Nash, Nash and Minty-Nash
/// definitions, each player's deviations sampled over its own set.
pub fn classify_equilibrium(
    game: &TwoPlayerGame,
    point: (&Vector, &Vector),
    samples: usize,
    seed: u64,
) -> Result<EquilibriumReport> {
    if samples == 0 {
        return Err(Error::InvalidConfig("equilibrium classification needs samples".into()));
    }
    let (x, y) = point;
    for (set, p) in [(&game.set_x, x), (&game.set_y, y)] {
        if p.len() != set.dim() {
            return Err(Error::DimensionMismatch {
                expected: set.dim(),
                got: p.len(),
            });
        }
        set.ensure_contains(p, FEASIBILITY_TOL)?;
    }
    let px = assess(
        &|u| game.theta_x(u, y),
        &|u| game.grad_x(u, y),
        &game.set_x,
        x,
        samples,
        seed,
    )?;
    let py = assess(
        &|v| game.theta_y(x, v),
        &|v| game.grad_y(x, v),
        &game.set_y,
        y,
        samples,
        seed.wrapping_add(1),
    )?;

    let is_qne = if px.gap + py.gap <= QNE_TOL {
        Check::pass()
    } else {
        let (player, o) = if px.gap >= py.gap { (Player::X, &px) } else { (Player::Y, &py) };
        Check::fail(GameWitness {
            player: Some(player),
            point: o.vertex.iter().copied().collect(),
            value: -o.gap,
            reason: "first-order stationarity fails".into(),
        })
    };
    let first_order = |o: &PlayerOutcome, p: Player| {
        if o.gap > 0.0 && px.gap + py.gap > QNE_TOL {
            Check::fail(GameWitness {
                player: Some(p),
                point: o.vertex.iter().copied().collect(),
                value: -o.gap,
                reason: "descent direction toward the linear-minimization vertex".into(),
            })
        } else {
            Check::pass()
        }
    };
    let is_ne = first_order(&px, Player::X)
        .and(first_order(&py, Player::Y))
        .and(px.global.clone().with_player(Player::X))
        .and(py.global.clone().with_player(Player::Y));
    let is_mne = px
        .minty
        .clone()
        .with_player(Player::X)
        .and(py.minty.clone().with_player(Player::Y));
    Ok(EquilibriumReport {
        x: x.iter().copied().collect(),
        y: y.iter().copied().collect(),
        player_gaps: (px.gap, py.gap),
        is_qne,
        is_ne,
        is_mne,
        sample_count: px.probes + py.probes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MintyOptimalityReport {
    pub candidate: Vec<f64>,
    pub minty_pass: Check,
    pub global_pass: Check,
}

impl MintyOptimalityReport {
    /// A Minty pass with a global failure would contradict the theorem that
    /// Minty solutions are global minimizers.
    pub fn is_consistent(&self) -> bool {
        !(self.minty_pass.verdict.is_satisfied() && !self.global_pass.verdict.is_satisfied())
    }
}

/// Sampled Minty inequality for `grad f` at `candidate`, and sampled global
/// minimality of `f(candidate)`, over the same probes.
pub fn check_minty_optimality(
    f: &Objective,
    set: &FeasibleSet,
    candidate: &Vector,
    samples: usize,
    seed: u64,
) -> Result<MintyOptimalityReport> {
    if samples == 0 {
        return Err(Error::InvalidConfig("optimality check needs samples".into()));
    }
    if candidate.len() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            got: candidate.len(),
        });
    }
    set.ensure_contains(candidate, FEASIBILITY_TOL)?;
    let o = assess(&|u| f.value(u), &|u| f.gradient(u), set, candidate, samples, seed)?;
    Ok(MintyOptimalityReport {
        candidate: candidate.iter().copied().collect(),
        minty_pass: o.minty,
        global_pass: o.global,
    })
}

fn scalar(v: f64) -> Vector {
    Vector::from_element(1, v)
}

/// Games with analytic gradients.
pub fn game_library() -> Vec<TwoPlayerGame> {
    let unit = || FeasibleSet::cube(1, -1.0, 1.0).expect("valid box");
    vec![
        TwoPlayerGame::new(
            "bilinear-saddle",
            |x: &Vector, y: &Vector| x[0] * y[0],
            |x: &Vector, y: &Vector| -x[0] * y[0],
            unit(),
            unit(),
        )
        .with_gradients(|_: &Vector, y: &Vector| scalar(y[0]), |x: &Vector, _: &Vector| scalar(-x[0])),
        TwoPlayerGame::new(
            "decoupled-convex",
            |x: &Vector, _: &Vector| x[0] * x[0],
            |_: &Vector, y: &Vector| y[0] * y[0],
            unit(),
            unit(),
        )
        .with_gradients(|x: &Vector, _: &Vector| scalar(2.0 * x[0]), |_: &Vector, y: &Vector| scalar(2.0 * y[0])),
        TwoPlayerGame::new(
            "coupled-convex",
            |x: &Vector, y: &Vector| (x[0] - y[0]).powi(2),
            |x: &Vector, y: &Vector| (y[0] + 0.5 * x[0]).powi(2),
            unit(),
            unit(),
        )
        .with_gradients(
            |x: &Vector, y: &Vector| scalar(2.0 * (x[0] - y[0])),
            |x: &Vector, y: &Vector| scalar(2.0 * (y[0] + 0.5 * x[0])),
        ),
        // single decision maker: the y-player has a one-point set and no payoff
        TwoPlayerGame::new(
            "neg-square-degenerate",
            |x: &Vector, _: &Vector| -x[0] * x[0],
            |_: &Vector, _: &Vector| 0.0,
            unit(),
            FeasibleSet::cube(1, 0.0, 0.0).expect("valid box"),
        )
        .with_gradients(|x: &Vector, _: &Vector| scalar(-2.0 * x[0]), |_: &Vector, _: &Vector| scalar(0.0)),
    ]
}

/// A named objective on a set, for the Minty-optimality check.
#[derive(Clone)]
pub struct OptimizationInstance {
    pub name: String,
    pub objective: Objective,
    pub set: FeasibleSet,
}

pub fn optimization_library() -> Vec<OptimizationInstance> {
    let unit = |n| FeasibleSet::cube(n, -1.0, 1.0).expect("valid box");
    vec![
        OptimizationInstance {
            name: "square".into(),
            objective: Objective::new(|x: &Vector| x[0] * x[0]).with_gradient(|x: &Vector| scalar(2.0 * x[0])),
            set: unit(1),
        },
        OptimizationInstance {
            name: "neg-square-opt".into(),
            objective: Objective::new(|x: &Vector| -x[0] * x[0]).with_gradient(|x: &Vector| scalar(-2.0 * x[0])),
            set: unit(1),
        },
        OptimizationInstance {
            name: "double-well".into(),
            objective: Objective::new(|x: &Vector| x[0].powi(4) - x[0] * x[0])
                .with_gradient(|x: &Vector| scalar(4.0 * x[0].powi(3) - 2.0 * x[0])),
            set: FeasibleSet::cube(1, -1.5, 1.5).expect("valid box"),
        },
        OptimizationInstance {
            name: "saddle-2d".into(),
            objective: Objective::new(|x: &Vector| x[0] * x[0] - x[1] * x[1])
                .with_gradient(|x: &Vector| Vector::from_vec(vec![2.0 * x[0], -2.0 * x[1]])),
            set: unit(2),
        },
        OptimizationInstance {
            name: "tilted-bowl-2d".into(),
            objective: Objective::new(|x: &Vector| (x[0] - 0.3).powi(2) + 2.0 * (x[1] + 0.2).powi(2) + 0.5 * x[0] * x[1])
                .with_gradient(|x: &Vector| {
                    Vector::from_vec(vec![2.0 * (x[0] - 0.3) + 0.5 * x[1], 4.0 * (x[1] + 0.2) + 0.5 * x[0]])
                }),
            set: unit(2),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::merit::gap;
    use nalgebra::dvector;

    fn game(name: &str) -> TwoPlayerGame {
        game_library().into_iter().find(|g| g.name() == name).unwrap()
    }

    #[test]
    fn vi_forms() {
        let p = game_to_vi(&game("bilinear-saddle")).unwrap();
        assert_eq!(p.eval(&dvector![0.3, -0.6]).unwrap(), dvector![-0.6, -0.3]);
        let p = game_to_vi(&game("decoupled-convex")).unwrap();
        assert_eq!(p.eval(&dvector![0.3, -0.6]).unwrap(), dvector![0.6, -1.2]);
        assert_eq!(gap(&p, &dvector![0.0, 0.0]).unwrap(), 0.0);
        let p = game_to_vi(&game("neg-square-degenerate")).unwrap();
        assert_eq!(p.eval(&dvector![0.25, 0.0]).unwrap(), dvector![-0.5, 0.0]);
    }

    #[test]
    fn library_gradients_match_differences() {
        for g in game_library() {
            assert!(g.gradient_check(3) < 1e-6, "{}", g.name());
        }
    }

    #[test]
    fn numerical_gradients_fallback() {
        let g = TwoPlayerGame::new(
            "fd",
            |x: &Vector, y: &Vector| x[0] * x[0] * y[0],
            |x: &Vector, y: &Vector| x[0] * y[0].sin(),
            FeasibleSet::cube(1, -1.0, 1.0).unwrap(),
            FeasibleSet::cube(1, -1.0, 1.0).unwrap(),
        );
        let (x, y) = (dvector![0.4], dvector![0.7]);
        assert!((g.grad_x(&x, &y)[0] - 0.56).abs() < 1e-8);
        assert!((g.grad_y(&x, &y)[0] - 0.4 * 0.7f64.cos()).abs() < 1e-8);
    }

    #[test]
    fn saddle_origin_is_all_three() {
        let r = classify_equilibrium(&game("bilinear-saddle"), (&dvector![0.0], &dvector![0.0]), 1001, 0).unwrap();
        assert!(r.is_qne.verdict.is_satisfied());
        assert!(r.is_ne.verdict.is_satisfied());
        assert!(r.is_mne.verdict.is_satisfied());
    }

    #[test]
    fn decoupled_origin_is_all_three() {
        let r = classify_equilibrium(&game("decoupled-convex"), (&dvector![0.0], &dvector![0.0]), 1001, 0).unwrap();
        assert!(r.is_qne.verdict.is_satisfied() && r.is_ne.verdict.is_satisfied() && r.is_mne.verdict.is_satisfied());
    }

    #[test]
    fn degenerate_game_at_one() {
        let r = classify_equilibrium(&game("neg-square-degenerate"), (&dvector![1.0], &dvector![0.0]), 1001, 0).unwrap();
        assert!(r.is_qne.verdict.is_satisfied());
        assert!(r.is_ne.verdict.is_satisfied());
        assert_eq!(r.is_mne.verdict, Verdict::Violated);
        let w = r.is_mne.witness.unwrap();
        assert!(w.point[0] < 0.0 && w.point[0] >= -1.0);
        // <-2u, u - 1>
        assert!((w.value - (-2.0 * w.point[0] * (w.point[0] - 1.0))).abs() < 1e-12);
    }

    #[test]
    fn minty_optimality_examples() {
        let lib = optimization_library();
        let by_name = |n: &str| lib.iter().find(|o| o.name == n).unwrap();
        let sq = by_name("square");
        let r = check_minty_optimality(&sq.objective, &sq.set, &dvector![0.0], 1001, 0).unwrap();
        assert!(r.minty_pass.verdict.is_satisfied() && r.global_pass.verdict.is_satisfied());
        let neg = by_name("neg-square-opt");
        let r = check_minty_optimality(&neg.objective, &neg.set, &dvector![1.0], 1001, 0).unwrap();
        assert_eq!(r.minty_pass.verdict, Verdict::Violated);
        let w = r.minty_pass.witness.as_ref().unwrap();
        assert!(w.point[0] > -1.0 - 1e-12 && w.point[0] < 0.0);
        assert!(r.global_pass.verdict.is_satisfied());
        let r = check_minty_optimality(&neg.objective, &neg.set, &dvector![0.0], 1001, 0).unwrap();
        assert_eq!(r.minty_pass.verdict, Verdict::Violated);
        assert_eq!(r.global_pass.verdict, Verdict::Violated);
    }

    #[test]
    fn infeasible_point_rejected() {
        assert!(classify_equilibrium(&game("bilinear-saddle"), (&dvector![2.0], &dvector![0.0]), 10, 0).is_err());
    }
}
