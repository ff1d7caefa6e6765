//! Variational optimization loop: minimize <psi(theta)|H|psi(theta)> over
//! ansatz parameters from a (projected) reference state.
//!
//! Gradients are computed analytically by the adjoint method: every gate is
//! exp(i theta SWAP), so dU/dtheta = i SWAP U and one backward sweep yields
//! the full gradient at about three circuit applications. A central
//! finite-difference mode cross-checks the analytic path.
//!
//! The optimizer is a deterministic L-BFGS with Armijo backtracking;
//! identical settings and seeds reproduce traces bit-for-bit.

use std::time::Instant;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::ansatz::{swap_exponential_gate, AnsatzProgram};
use crate::error::{Error, Result};
use crate::models::SpinHamiltonian;
use crate::qstate::{expectation, Statevector};
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMode {
    Analytic,
    FiniteDifference,
}

/// Optimizer configuration. `seed` has no effect on the deterministic
/// descent itself; it is carried so run manifests can echo the full setup.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OptimizerSettings {
    /// Convergence tolerance on |delta E|.
    pub tolerance: f64,
    /// Number of consecutive accepted steps that must stay within
    /// `tolerance` before declaring convergence.
    pub stall_iterations: usize,
    pub max_iterations: usize,
    /// Central finite-difference step.
    pub fd_step: f64,
    pub gradient: GradientMode,
    pub seed: u64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            stall_iterations: 5,
            max_iterations: 2000,
            fd_step: 1e-6,
            gradient: GradientMode::Analytic,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Termination {
    Converged,
    GradientVanished,
    MaxIterations,
    LineSearchStalled,
}

/// One accepted iterate.
#[derive(Clone, Debug, Serialize)]
pub struct TracePoint<R> {
    pub iteration: usize,
    pub energy: R,
    pub gradient_norm: R,
    pub params: Vec<R>,
}

/// Record of an optimization run. Accepted energies are non-increasing.
#[derive(Clone, Debug, Serialize)]
pub struct OptimizationTrace<R> {
    pub points: Vec<TracePoint<R>>,
    pub evaluations: usize,
    pub converged: bool,
    pub termination: Termination,
    pub wall_time_ms: f64,
}

impl<R: Real> OptimizationTrace<R> {
    pub fn final_energy(&self) -> R {
        self.points.last().map(|p| p.energy).unwrap_or_else(R::zero)
    }

    /// CSV with columns iteration, energy, gradient_norm.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,energy,gradient_norm\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{:.11e},{:.11e}\n",
                p.iteration,
                p.energy.to_f64_lossy(),
                p.gradient_norm.to_f64_lossy(),
            ));
        }
        out
    }
}

/// Result of [`minimize`].
#[derive(Clone, Debug)]
pub struct MinimizeResult<R: Real> {
    pub params: Vec<R>,
    pub state: Statevector<R>,
    pub trace: OptimizationTrace<R>,
}

/// Objective context: a reference state, a program, and a Hamiltonian.
pub struct VqeProblem<'a, R: Real> {
    reference: &'a Statevector<R>,
    program: &'a AnsatzProgram,
    hamiltonian: &'a SpinHamiltonian<R>,
}

impl<'a, R: Real> VqeProblem<'a, R> {
    pub fn new(
        reference: &'a Statevector<R>,
        program: &'a AnsatzProgram,
        hamiltonian: &'a SpinHamiltonian<R>,
    ) -> Result<Self> {
        if reference.n_qubits() != program.n_qubits
            || reference.n_qubits() != hamiltonian.n_qubits()
        {
            return Err(Error::DimensionMismatch {
                expected: reference.dim(),
                found: 1 << program.n_qubits,
            });
        }
        Ok(Self {
            reference,
            program,
            hamiltonian,
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.program.parameter_count()
    }

    /// psi(theta).
    pub fn prepare(&self, params: &[R]) -> Result<Statevector<R>> {
        let mut state = self.reference.clone();
        crate::ansatz::apply_ansatz(&mut state, self.program, params)?;
        Ok(state)
    }

    /// E(theta).
    pub fn energy(&self, params: &[R]) -> Result<R> {
        expectation(&self.prepare(params)?, self.hamiltonian)
    }

    /// Analytic gradient by the adjoint method.
    pub fn gradient_analytic(&self, params: &[R]) -> Result<Vec<R>> {
        if params.len() != self.program.parameter_count() {
            return Err(Error::ParameterCountMismatch {
                expected: self.program.parameter_count(),
                found: params.len(),
            });
        }
        let mut phi = self.prepare(params)?;
        let mut lambda = self.hamiltonian.apply(&phi)?;
        let mut grad = vec![R::zero(); params.len()];
        let two = R::lit(2.0);
        for gate in self.program.gates.iter().rev() {
            let (i, j) = gate.pair;
            // g = 2 Re <lambda| i SWAP |phi> = -2 Im <lambda| SWAP |phi>
            let overlap = swapped_inner(&lambda, &phi, i, j);
            grad[gate.class] -= two * overlap.im;
            let undo = swap_exponential_gate(-params[gate.class], i, j)?;
            phi.apply_two_qubit(&undo)?;
            lambda.apply_two_qubit(&undo)?;
        }
        Ok(grad)
    }

    /// Central finite-difference gradient.
    pub fn gradient_fd(&self, params: &[R], step: R) -> Result<Vec<R>> {
        let mut grad = vec![R::zero(); params.len()];
        let mut probe = params.to_vec();
        for c in 0..params.len() {
            probe[c] = params[c] + step;
            let plus = self.energy(&probe)?;
            probe[c] = params[c] - step;
            let minus = self.energy(&probe)?;
            probe[c] = params[c];
            grad[c] = (plus - minus) / (step + step);
        }
        Ok(grad)
    }
}

/// <a | SWAP_{ij} | b> without materializing the swapped state.
fn swapped_inner<R: Real>(
    a: &Statevector<R>,
    b: &Statevector<R>,
    i: usize,
    j: usize,
) -> num_complex::Complex<R> {
    let bi = 1usize << i;
    let bj = 1usize << j;
    let mut acc = num_complex::Complex::new(R::zero(), R::zero());
    for (idx, amp_a) in a.amplitudes().iter().enumerate() {
        let ib = (idx & bi != 0) as usize;
        let jb = (idx & bj != 0) as usize;
        let mut src = idx & !(bi | bj);
        if jb != 0 {
            src |= bi;
        }
        if ib != 0 {
            src |= bj;
        }
        acc += amp_a.conj() * b.amplitudes()[src];
    }
    acc
}

/// E(theta) for the given reference, program, and Hamiltonian.
pub fn energy_objective<R: Real>(
    reference: &Statevector<R>,
    program: &AnsatzProgram,
    h: &SpinHamiltonian<R>,
    params: &[R],
) -> Result<R> {
    VqeProblem::new(reference, program, h)?.energy(params)
}

/// Gradient of the energy objective in the configured mode.
pub fn gradient<R: Real>(
    reference: &Statevector<R>,
    program: &AnsatzProgram,
    h: &SpinHamiltonian<R>,
    params: &[R],
    settings: &OptimizerSettings,
) -> Result<Vec<R>> {
    let problem = VqeProblem::new(reference, program, h)?;
    match settings.gradient {
        GradientMode::Analytic => problem.gradient_analytic(params),
        GradientMode::FiniteDifference => problem.gradient_fd(params, R::lit(settings.fd_step)),
    }
}

fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn inf_norm<R: Real>(v: &[R]) -> R {
    v.iter().fold(R::zero(), |m, &x| Float::max(m, Float::abs(x)))
}

/// Minimize the energy objective with L-BFGS (history 8) and Armijo
/// backtracking. Deterministic: identical inputs give identical traces.
pub fn minimize<R: Real>(
    reference: &Statevector<R>,
    program: &AnsatzProgram,
    h: &SpinHamiltonian<R>,
    settings: &OptimizerSettings,
) -> Result<MinimizeResult<R>> {
    let started = Instant::now();
    let problem = VqeProblem::new(reference, program, h)?;
    let grad_of = |params: &[R], evals: &mut usize| -> Result<Vec<R>> {
        *evals += 1;
        match settings.gradient {
            GradientMode::Analytic => problem.gradient_analytic(params),
            GradientMode::FiniteDifference => {
                problem.gradient_fd(params, R::lit(settings.fd_step))
            }
        }
    };

    let mut evaluations = 0usize;
    let mut x: Vec<R> = program.initial_parameters();
    let mut f = problem.energy(&x)?;
    evaluations += 1;
    let mut g = grad_of(&x, &mut evaluations)?;

    let mut points = vec![TracePoint {
        iteration: 0,
        energy: f,
        gradient_norm: inf_norm(&g),
        params: x.clone(),
    }];

    let grad_floor = R::lit(1e-12);
    let tol = R::lit(settings.tolerance);
    let c1 = R::lit(1e-4);
    const HISTORY: usize = 8;
    let mut history: Vec<(Vec<R>, Vec<R>, R)> = Vec::new(); // (s, y, 1/s.y)
    let mut stall = 0usize;
    let mut termination = Termination::MaxIterations;

    if settings.max_iterations == 0 {
        let state = problem.prepare(&x)?;
        return Ok(MinimizeResult {
            params: x,
            state,
            trace: OptimizationTrace {
                points,
                evaluations,
                converged: false,
                termination: Termination::MaxIterations,
                wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
            },
        });
    }

    'outer: for iteration in 1..=settings.max_iterations {
        if inf_norm(&g) < grad_floor {
            termination = Termination::GradientVanished;
            break;
        }
        // two-loop recursion for d = -H g
        let mut d: Vec<R> = g.iter().map(|&v| -v).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = *rho * dot(s, &d);
            for (dk, yk) in d.iter_mut().zip(y) {
                *dk -= a * *yk;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.last() {
            let gamma = dot(s, y) / dot(y, y);
            for dk in &mut d {
                *dk *= gamma;
            }
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = *rho * dot(y, &d);
            for (dk, sk) in d.iter_mut().zip(s) {
                *dk += (*a - b) * *sk;
            }
        }
        let mut slope = dot(&g, &d);
        if slope >= R::zero() {
            // not a descent direction; fall back to steepest descent
            history.clear();
            d = g.iter().map(|&v| -v).collect();
            slope = dot(&g, &d);
        }

        // Armijo backtracking
        let mut alpha = R::one();
        let mut accepted = None;
        for _ in 0..60 {
            let candidate: Vec<R> = x
                .iter()
                .zip(&d)
                .map(|(&xk, &dk)| xk + alpha * dk)
                .collect();
            let fc = problem.energy(&candidate)?;
            evaluations += 1;
            if fc <= f + c1 * alpha * slope {
                accepted = Some((candidate, fc));
                break;
            }
            alpha *= R::lit(0.5);
        }
        let (x_new, f_new) = match accepted {
            Some(v) => v,
            None => {
                if history.is_empty() {
                    termination = Termination::LineSearchStalled;
                    break 'outer;
                }
                // drop the quasi-Newton model and retry from scratch
                history.clear();
                continue;
            }
        };

        let g_new = grad_of(&x_new, &mut evaluations)?;
        let s: Vec<R> = x_new.iter().zip(&x).map(|(&a, &b)| a - b).collect();
        let y: Vec<R> = g_new.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        let sy = dot(&s, &y);
        let curvature_floor = R::lit(1e-12) * inf_norm(&s) * inf_norm(&y);
        if sy > curvature_floor {
            if history.len() == HISTORY {
                history.remove(0);
            }
            history.push((s, y, R::one() / sy));
        }

        let delta = Float::abs(f - f_new);
        x = x_new;
        f = f_new;
        g = g_new;
        points.push(TracePoint {
            iteration,
            energy: f,
            gradient_norm: inf_norm(&g),
            params: x.clone(),
        });

        if delta < tol {
            stall += 1;
            if stall >= settings.stall_iterations {
                termination = Termination::Converged;
                break;
            }
        } else {
            stall = 0;
        }
    }

    let converged = matches!(
        termination,
        Termination::Converged | Termination::GradientVanished
    );
    let state = problem.prepare(&x)?;
    Ok(MinimizeResult {
        params: x,
        state,
        trace: OptimizationTrace {
            points,
            evaluations,
            converged,
            termination,
            wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        },
    })
}
