//! Pendulum and cart-pole swing-up problems and their QP linearization.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::blocktri::BlockVector;
use crate::error::{dim_mismatch, Error, Result};
use crate::schur::TrajoptLinearization;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemName {
    Pendulum,
    CartPole,
}

impl ProblemName {
    pub fn state_dim(self) -> usize {
        match self {
            ProblemName::Pendulum => 2,
            ProblemName::CartPole => 4,
        }
    }

    pub fn control_dim(self) -> usize {
        1
    }
}

impl fmt::Display for ProblemName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemName::Pendulum => "pendulum",
            ProblemName::CartPole => "cartpole",
        })
    }
}

impl FromStr for ProblemName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pendulum" => Ok(ProblemName::Pendulum),
            "cartpole" | "cart-pole" => Ok(ProblemName::CartPole),
            other => Err(Error::InvalidInput(format!("unknown problem `{other}`"))),
        }
    }
}

/// Damped pendulum, `θ = 0` hanging down. State `(θ, θ̇)`, control torque.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumParams {
    pub mass: f64,
    pub length: f64,
    pub damping: f64,
    pub gravity: f64,
}

impl Default for PendulumParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            length: 1.0,
            damping: 0.1,
            gravity: 9.81,
        }
    }
}

/// Cart-pole, `θ = 0` hanging down. State `(x, θ, ẋ, θ̇)`, control force on the cart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartPoleParams {
    pub cart_mass: f64,
    pub pole_mass: f64,
    pub length: f64,
    pub gravity: f64,
}

impl Default for CartPoleParams {
    fn default() -> Self {
        Self {
            cart_mass: 1.0,
            pole_mass: 0.5,
            length: 0.5,
            gravity: 9.81,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PhysicalParams {
    Pendulum(PendulumParams),
    CartPole(CartPoleParams),
}

impl PhysicalParams {
    pub fn default_for(name: ProblemName) -> Self {
        match name {
            ProblemName::Pendulum => PhysicalParams::Pendulum(PendulumParams::default()),
            ProblemName::CartPole => PhysicalParams::CartPole(CartPoleParams::default()),
        }
    }

    pub fn name(&self) -> ProblemName {
        match self {
            PhysicalParams::Pendulum(_) => ProblemName::Pendulum,
            PhysicalParams::CartPole(_) => ProblemName::CartPole,
        }
    }
}

/// Diagonal weights of `Q_k` (`k < N−1`), `Q_{N−1}` and `R_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub state: f64,
    pub control: f64,
    pub terminal: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            state: 1.0,
            control: 0.1,
            terminal: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Integrator {
    /// `x⁺ = x + h ẋ`
    #[default]
    ExplicitEuler,
    /// Velocities first, then positions with the new velocities.
    SemiImplicitEuler,
}

/// `ẋ` with its Jacobians.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousDynamics {
    pub xdot: DVector<f64>,
    pub jx: DMatrix<f64>,
    pub ju: DMatrix<f64>,
}

/// Continuous-time dynamics and analytic Jacobians.
pub fn continuous_dynamics(params: &PhysicalParams, x: &DVector<f64>, u: &DVector<f64>) -> Result<ContinuousDynamics> {
    let name = params.name();
    if x.len() != name.state_dim() || u.len() != name.control_dim() {
        return Err(dim_mismatch(
            format!("state {} / control {}", name.state_dim(), name.control_dim()),
            format!("state {} / control {}", x.len(), u.len()),
        ));
    }
    Ok(match params {
        PhysicalParams::Pendulum(p) => pendulum(p, x, u[0]),
        PhysicalParams::CartPole(p) => cart_pole(p, x, u[0]),
    })
}

fn pendulum(p: &PendulumParams, x: &DVector<f64>, u: f64) -> ContinuousDynamics {
    let (theta, omega) = (x[0], x[1]);
    let inertia = p.mass * p.length * p.length;
    let alpha = (u - p.mass * p.gravity * p.length * theta.sin() - p.damping * omega) / inertia;
    ContinuousDynamics {
        xdot: DVector::from_vec(vec![omega, alpha]),
        jx: DMatrix::from_row_slice(
            2,
            2,
            &[
                0.0,
                1.0,
                -p.mass * p.gravity * p.length * theta.cos() / inertia,
                -p.damping / inertia,
            ],
        ),
        ju: DMatrix::from_row_slice(2, 1, &[0.0, 1.0 / inertia]),
    }
}

fn cart_pole(p: &CartPoleParams, x: &DVector<f64>, u: f64) -> ContinuousDynamics {
    let (mc, mp, l, g) = (p.cart_mass, p.pole_mass, p.length, p.gravity);
    let (theta, v, omega) = (x[1], x[2], x[3]);
    let (s, c) = theta.sin_cos();

    let den = mc + mp * s * s;
    let dden = 2.0 * mp * s * c;

    let num_x = u + mp * s * (l * omega * omega + g * c);
    let num_x_theta = mp * (l * omega * omega * c + g * (c * c - s * s));
    let num_x_omega = 2.0 * mp * l * s * omega;

    let num_t = -u * c - mp * l * omega * omega * c * s - (mc + mp) * g * s;
    let num_t_theta = u * s - mp * l * omega * omega * (c * c - s * s) - (mc + mp) * g * c;
    let num_t_omega = -2.0 * mp * l * omega * c * s;

    let xddot = num_x / den;
    let thddot = num_t / (l * den);

    let xddot_theta = (num_x_theta * den - num_x * dden) / (den * den);
    let thddot_theta = (num_t_theta * den - num_t * dden) / (l * den * den);

    ContinuousDynamics {
        xdot: DVector::from_vec(vec![v, omega, xddot, thddot]),
        jx: DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0,
                0.0,
                1.0,
                0.0, //
                0.0,
                0.0,
                0.0,
                1.0, //
                0.0,
                xddot_theta,
                0.0,
                num_x_omega / den, //
                0.0,
                thddot_theta,
                0.0,
                num_t_omega / (l * den),
            ],
        ),
        ju: DMatrix::from_row_slice(4, 1, &[0.0, 0.0, 1.0 / den, -c / (l * den)]),
    }
}

/// One discrete step with its Jacobians `A = I + hM`, `B = hN`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteStep {
    pub next: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

/// Discretizes `dynamics` over one step of length `h`.
///
/// The semi-implicit variant assumes the state is `(q, v)` with equal halves
/// and `q̇ = v`.
pub fn discretize(
    dynamics: impl Fn(&DVector<f64>, &DVector<f64>) -> Result<ContinuousDynamics>,
    x: &DVector<f64>,
    u: &DVector<f64>,
    h: f64,
    integrator: Integrator,
) -> Result<DiscreteStep> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::InvalidInput(format!("timestep must be positive, got {h}")));
    }
    let nx = x.len();
    let cd = dynamics(x, u)?;
    match integrator {
        Integrator::ExplicitEuler => Ok(DiscreteStep {
            next: x + &cd.xdot * h,
            a: DMatrix::identity(nx, nx) + &cd.jx * h,
            b: &cd.ju * h,
        }),
        Integrator::SemiImplicitEuler => {
            if !nx.is_multiple_of(2) {
                return Err(Error::InvalidInput("semi-implicit Euler needs a (q, v) state".into()));
            }
            let nq = nx / 2;
            // v⁺ = v + h a(x, u); q⁺ = q + h v⁺
            let acc_x = cd.jx.rows(nq, nq).into_owned();
            let acc_u = cd.ju.rows(nq, nq).into_owned();
            let mut next = x.clone();
            let v_next = x.rows(nq, nq) + cd.xdot.rows(nq, nq) * h;
            next.rows_mut(nq, nq).copy_from(&v_next);
            let q_next = x.rows(0, nq) + &v_next * h;
            next.rows_mut(0, nq).copy_from(&q_next);

            let mut a = DMatrix::identity(nx, nx);
            let mut v_rows = a.rows_mut(nq, nq);
            v_rows += &acc_x * h;
            let v_block = a.rows(nq, nq).into_owned();
            let mut q_rows = a.rows_mut(0, nq);
            q_rows += &v_block * h;

            let mut b = DMatrix::zeros(nx, u.len());
            b.rows_mut(nq, nq).copy_from(&(&acc_u * h));
            let bv = b.rows(nq, nq).into_owned();
            b.rows_mut(0, nq).copy_from(&(bv * h));
            Ok(DiscreteStep { next, a, b })
        }
    }
}

/// A swing-up problem: drive the system from `initial_state` to `goal_state`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkProblem {
    pub name: ProblemName,
    pub knots: usize,
    pub h: f64,
    pub initial_state: Vec<f64>,
    pub goal_state: Vec<f64>,
    pub weights: CostWeights,
    pub params: PhysicalParams,
    pub integrator: Integrator,
    /// Nominal states, one per knot.
    pub nominal_states: Vec<Vec<f64>>,
    /// Nominal controls, one per interval.
    pub nominal_controls: Vec<Vec<f64>>,
}

impl BenchmarkProblem {
    /// Default swing-up with 16 knots and `h = 0.1`.
    pub fn new(name: ProblemName) -> Self {
        Self::with_settings(name, 16, 0.1, CostWeights::default(), PhysicalParams::default_for(name))
    }

    /// Swing-up from rest at the bottom to the upright equilibrium, linearized
    /// about the straight-line state interpolation with zero controls.
    pub fn with_settings(
        name: ProblemName,
        knots: usize,
        h: f64,
        weights: CostWeights,
        params: PhysicalParams,
    ) -> Self {
        let nx = name.state_dim();
        let initial_state = vec![0.0; nx];
        let mut goal_state = vec![0.0; nx];
        match name {
            ProblemName::Pendulum => goal_state[0] = std::f64::consts::PI,
            ProblemName::CartPole => goal_state[1] = std::f64::consts::PI,
        }
        let mut p = Self {
            name,
            knots,
            h,
            initial_state,
            goal_state,
            weights,
            params,
            integrator: Integrator::default(),
            nominal_states: Vec::new(),
            nominal_controls: Vec::new(),
        };
        p.reset_nominal();
        p
    }

    /// Linear interpolation from the initial to the goal state, zero controls.
    pub fn reset_nominal(&mut self) {
        let denom = self.knots.saturating_sub(1).max(1) as f64;
        self.nominal_states = (0..self.knots)
            .map(|k| {
                let t = k as f64 / denom;
                self.initial_state
                    .iter()
                    .zip(&self.goal_state)
                    .map(|(a, b)| a + t * (b - a))
                    .collect()
            })
            .collect();
        self.nominal_controls = vec![vec![0.0; self.name.control_dim()]; self.knots.saturating_sub(1)];
    }

    pub fn validate(&self) -> Result<()> {
        let (nx, nu) = (self.name.state_dim(), self.name.control_dim());
        if self.knots < 2 {
            return Err(Error::InvalidInput("need at least two knot points".into()));
        }
        if self.h.is_nan() || self.h <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "timestep must be positive, got {}",
                self.h
            )));
        }
        let w = self.weights;
        if !(w.state > 0.0 && w.control > 0.0 && w.terminal > 0.0) {
            return Err(Error::InvalidInput("cost weights must be strictly positive".into()));
        }
        if self.params.name() != self.name {
            return Err(Error::InvalidInput(
                "physical parameters do not match the problem".into(),
            ));
        }
        if self.initial_state.len() != nx || self.goal_state.len() != nx {
            return Err(dim_mismatch(format!("states of length {nx}"), "other"));
        }
        if self.nominal_states.len() != self.knots || self.nominal_states.iter().any(|x| x.len() != nx) {
            return Err(dim_mismatch(
                format!("{} nominal states of length {nx}", self.knots),
                "other",
            ));
        }
        if self.nominal_controls.len() != self.knots - 1 || self.nominal_controls.iter().any(|u| u.len() != nu) {
            return Err(dim_mismatch(
                format!("{} nominal controls of length {nu}", self.knots - 1),
                "other",
            ));
        }
        Ok(())
    }

    pub fn dynamics(&self, x: &DVector<f64>, u: &DVector<f64>) -> Result<ContinuousDynamics> {
        continuous_dynamics(&self.params, x, u)
    }
}

/// Quadratic model of the problem around its nominal trajectory.
///
/// Stage cost `½(x − x_goal)ᵀQ(x − x_goal) + ½uᵀRu`, so `q_k = Q_k(x̄_k − x_goal)`
/// and `r_k = R ū_k`.
pub fn linearize_problem(p: &BenchmarkProblem) -> Result<TrajoptLinearization> {
    p.validate()?;
    let (n, nx, nu) = (p.knots, p.name.state_dim(), p.name.control_dim());
    let w = p.weights;
    let goal = DVector::from_column_slice(&p.goal_state);
    let xs: Vec<DVector<f64>> = p.nominal_states.iter().map(|x| DVector::from_column_slice(x)).collect();
    let us: Vec<DVector<f64>> = p
        .nominal_controls
        .iter()
        .map(|u| DVector::from_column_slice(u))
        .collect();

    let state_hessians: Vec<DMatrix<f64>> = (0..n)
        .map(|k| DMatrix::identity(nx, nx) * if k + 1 == n { w.terminal } else { w.state })
        .collect();
    let control_hessians = vec![DMatrix::identity(nu, nu) * w.control; n - 1];
    let state_gradients = xs.iter().zip(&state_hessians).map(|(x, q)| q * (x - &goal)).collect();
    let control_gradients = us.iter().map(|u| u * w.control).collect();

    let mut state_jacobians = Vec::with_capacity(n - 1);
    let mut control_jacobians = Vec::with_capacity(n - 1);
    let mut residuals = BlockVector::zeros(n, nx);
    residuals
        .segment_mut(0)
        .copy_from(&(&xs[0] - DVector::from_column_slice(&p.initial_state)));
    for k in 0..n - 1 {
        let step = discretize(|x, u| p.dynamics(x, u), &xs[k], &us[k], p.h, p.integrator)?;
        residuals.segment_mut(k + 1).copy_from(&(&xs[k + 1] - &step.next));
        state_jacobians.push(step.a);
        control_jacobians.push(step.b);
    }

    let lin = TrajoptLinearization {
        knots: n,
        nx,
        nu,
        state_hessians,
        control_hessians,
        state_gradients,
        control_gradients,
        state_jacobians,
        control_jacobians,
        residuals,
    };
    lin.validate()?;
    Ok(lin)
}
