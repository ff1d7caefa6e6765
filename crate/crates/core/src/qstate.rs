//! Dense statevector core: state construction, gate application, expectation
//! values, inner products, and post-selected (non-unitary) operator
//! application.
//!
//! Basis convention: qubit `q` is bit `q` of the basis index, i.e. qubit 0 is
//! the least-significant bit. Bit value 0 is spin up (+1/2).
//!
//! A `Statevector` follows the usual Rust aliasing rules: gates take `&mut
//! self`, while read-only queries (`expectation`, `inner_product`, ...) take
//! `&self` and are safe to run concurrently on a shared state.

use num_complex::Complex;
use num_traits::{Float, One, Zero};

use crate::error::{Error, Result};
use crate::models::SpinHamiltonian;
use crate::real::Real;

/// Hard cap on the register size: 2^26 amplitudes is 1 GiB at f64.
pub const MAX_QUBITS: usize = 26;

/// Probability floor below which a post-selected state counts as annihilated
/// rather than renormalizable noise.
pub const NORM_FLOOR: f64 = 1e-14;

pub type SingleQubitMatrix<R> = [[Complex<R>; 2]; 2];
pub type TwoQubitMatrix<R> = [[Complex<R>; 4]; 4];

/// Dense complex amplitude vector over `n_qubits` qubits.
#[derive(Clone, Debug)]
pub struct Statevector<R: Real> {
    n_qubits: usize,
    amps: Vec<Complex<R>>,
}

impl<R: Real> Statevector<R> {
    /// The all-zeros computational basis state |0...0>.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::SizeExceeded {
                requested: n_qubits,
                max: MAX_QUBITS,
            });
        }
        let mut amps = vec![Complex::zero(); 1 << n_qubits];
        amps[0] = Complex::one();
        Ok(Self { n_qubits, amps })
    }

    /// Build a state from raw amplitudes; the length must be 2^n_qubits.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex<R>>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::SizeExceeded {
                requested: n_qubits,
                max: MAX_QUBITS,
            });
        }
        if amps.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_qubits,
                found: amps.len(),
            });
        }
        Ok(Self { n_qubits, amps })
    }

    /// A single computational basis state |index>.
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        let mut state = Self::zero(n_qubits)?;
        if index >= state.dim() {
            return Err(Error::DimensionMismatch {
                expected: state.dim(),
                found: index,
            });
        }
        state.amps[0] = Complex::zero();
        state.amps[index] = Complex::one();
        Ok(state)
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex<R>] {
        &self.amps
    }

    #[inline]
    pub fn amplitudes_mut(&mut self) -> &mut [Complex<R>] {
        &mut self.amps
    }

    #[inline]
    pub fn amplitude(&self, index: usize) -> Complex<R> {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> R {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> R {
        Float::sqrt(self.norm_sqr())
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > R::zero() {
            let inv = R::one() / n;
            for a in &mut self.amps {
                *a = a.scale(inv);
            }
        }
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    /// Apply a 2x2 unitary to one qubit. The matrix is validated against
    /// U†U = 1 (tolerance 1e-12, relaxed to a few epsilon at low precision).
    pub fn apply_single_qubit(&mut self, qubit: usize, u: &SingleQubitMatrix<R>) -> Result<()> {
        self.check_qubit(qubit)?;
        check_unitary_2x2(u)?;
        self.apply_single_qubit_unchecked(qubit, u);
        Ok(())
    }

    pub(crate) fn apply_single_qubit_unchecked(&mut self, qubit: usize, u: &SingleQubitMatrix<R>) {
        let bit = 1usize << qubit;
        let dim = self.dim();
        let mut base = 0usize;
        while base < dim {
            for low in base..base + bit {
                let a0 = self.amps[low];
                let a1 = self.amps[low | bit];
                self.amps[low] = u[0][0] * a0 + u[0][1] * a1;
                self.amps[low | bit] = u[1][0] * a0 + u[1][1] * a1;
            }
            base += bit << 1;
        }
    }

    /// CNOT with the given control and target: basis states with the control
    /// bit set have the target bit flipped.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::DuplicateQubit { qubit: control });
        }
        let cbit = 1usize << control;
        let tbit = 1usize << target;
        for b in 0..self.dim() {
            if b & cbit != 0 && b & tbit == 0 {
                self.amps.swap(b, b | tbit);
            }
        }
        Ok(())
    }

    /// Apply a validated two-qubit unitary to its target pair.
    ///
    /// The 4x4 matrix acts on the pair basis |b_i b_j> with the first target
    /// qubit as the high bit: local index = 2*bit(i) + bit(j).
    pub fn apply_two_qubit(&mut self, gate: &TwoQubitUnitary<R>) -> Result<()> {
        let (i, j) = gate.targets();
        self.check_qubit(i)?;
        self.check_qubit(j)?;
        let bi = 1usize << i;
        let bj = 1usize << j;
        let m = gate.matrix();
        for b in 0..self.dim() {
            if b & bi == 0 && b & bj == 0 {
                let idx = [b, b | bj, b | bi, b | bi | bj];
                let a = [
                    self.amps[idx[0]],
                    self.amps[idx[1]],
                    self.amps[idx[2]],
                    self.amps[idx[3]],
                ];
                for (r, &out) in idx.iter().enumerate() {
                    self.amps[out] =
                        m[r][0] * a[0] + m[r][1] * a[1] + m[r][2] * a[2] + m[r][3] * a[3];
                }
            }
        }
        Ok(())
    }

    /// Multiply the whole state by exp(i*phase).
    pub fn apply_global_phase(&mut self, phase: R) {
        let f = Complex::new(Float::cos(phase), Float::sin(phase));
        for a in &mut self.amps {
            *a *= f;
        }
    }

    /// R_x(angle) applied to every qubit simultaneously.
    pub fn global_rotation_x(&mut self, angle: R) {
        let rx = gates::rx(angle);
        for q in 0..self.n_qubits {
            self.apply_single_qubit_unchecked(q, &rx);
        }
    }

    /// Multiply each amplitude by `f(obs value)`, record the survival
    /// probability, and renormalize. This simulates conditioning on an
    /// ancilla measurement outcome whose kept branch carries the diagonal
    /// Kraus factor `f`.
    pub fn post_select_diagonal(
        &mut self,
        obs: &DiagonalObservable<R>,
        f: impl Fn(R) -> R,
    ) -> Result<R> {
        if obs.values.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: obs.values.len(),
            });
        }
        for (a, &v) in self.amps.iter_mut().zip(&obs.values) {
            *a = a.scale(f(v));
        }
        let probability = self.norm_sqr();
        let floor = R::lit(NORM_FLOOR);
        if probability < floor {
            return Err(Error::AnnihilatedState {
                probability: probability.to_f64_lossy(),
                floor: NORM_FLOOR,
            });
        }
        let inv = R::one() / Float::sqrt(probability);
        for a in &mut self.amps {
            *a = a.scale(inv);
        }
        Ok(probability)
    }

    /// <self|other>.
    pub fn inner_product(&self, other: &Self) -> Result<Complex<R>> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let mut acc = Complex::zero();
        for (a, b) in self.amps.iter().zip(&other.amps) {
            acc += a.conj() * b;
        }
        Ok(acc)
    }

    /// |<self|other>|^2.
    pub fn fidelity(&self, other: &Self) -> Result<R> {
        Ok(self.inner_product(other)?.norm_sqr())
    }
}

/// Validated 4x4 unitary bound to a target qubit pair.
#[derive(Clone, Debug)]
pub struct TwoQubitUnitary<R: Real> {
    matrix: TwoQubitMatrix<R>,
    targets: (usize, usize),
}

impl<R: Real> TwoQubitUnitary<R> {
    /// Checks U†U = 1 on construction (tolerance 1e-12 at f64).
    pub fn new(matrix: TwoQubitMatrix<R>, i: usize, j: usize) -> Result<Self> {
        if i == j {
            return Err(Error::DuplicateQubit { qubit: i });
        }
        check_unitary_4x4(&matrix)?;
        Ok(Self {
            matrix,
            targets: (i, j),
        })
    }

    #[inline]
    pub fn matrix(&self) -> &TwoQubitMatrix<R> {
        &self.matrix
    }

    #[inline]
    pub fn targets(&self) -> (usize, usize) {
        self.targets
    }
}

/// Real-valued observable that is diagonal in the computational basis.
#[derive(Clone, Debug)]
pub struct DiagonalObservable<R: Real> {
    values: Vec<R>,
}

impl<R: Real> DiagonalObservable<R> {
    pub fn new(values: Vec<R>) -> Self {
        Self { values }
    }

    #[inline]
    pub fn values(&self) -> &[R] {
        &self.values
    }

    pub fn expectation(&self, state: &Statevector<R>) -> Result<R> {
        if self.values.len() != state.dim() {
            return Err(Error::DimensionMismatch {
                expected: state.dim(),
                found: self.values.len(),
            });
        }
        Ok(state
            .amplitudes()
            .iter()
            .zip(&self.values)
            .map(|(a, &v)| a.norm_sqr() * v)
            .sum())
    }
}

fn unitary_tolerance<R: Real>() -> R {
    // 1e-12 is the contract at f64; wider scalars fall back to a few ulps.
    let eps_based = R::epsilon() * R::lit(256.0);
    Float::max(R::lit(1e-12), eps_based)
}

fn check_unitary_2x2<R: Real>(u: &SingleQubitMatrix<R>) -> Result<()> {
    let mut dev = R::zero();
    for r in 0..2 {
        for c in 0..2 {
            let mut acc = Complex::<R>::zero();
            for k in 0..2 {
                acc += u[k][r].conj() * u[k][c];
            }
            let target = if r == c { Complex::one() } else { Complex::zero() };
            dev = Float::max(dev, (acc - target).norm());
        }
    }
    let tol = unitary_tolerance::<R>();
    if dev > tol {
        return Err(Error::NonUnitary {
            deviation: dev.to_f64_lossy(),
            tolerance: tol.to_f64_lossy(),
        });
    }
    Ok(())
}

fn check_unitary_4x4<R: Real>(u: &TwoQubitMatrix<R>) -> Result<()> {
    let mut dev = R::zero();
    for r in 0..4 {
        for c in 0..4 {
            let mut acc = Complex::<R>::zero();
            for k in 0..4 {
                acc += u[k][r].conj() * u[k][c];
            }
            let target = if r == c { Complex::one() } else { Complex::zero() };
            dev = Float::max(dev, (acc - target).norm());
        }
    }
    let tol = unitary_tolerance::<R>();
    if dev > tol {
        return Err(Error::NonUnitary {
            deviation: dev.to_f64_lossy(),
            tolerance: tol.to_f64_lossy(),
        });
    }
    Ok(())
}

/// <state|H|state>. The imaginary residue is asserted small and discarded.
pub fn expectation<R: Real>(state: &Statevector<R>, h: &SpinHamiltonian<R>) -> Result<R> {
    if h.n_qubits() != state.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            found: 1 << h.n_qubits(),
        });
    }
    let h_psi = h.apply(state)?;
    let val = state.inner_product(&h_psi)?;
    debug_assert!(
        Float::abs(val.im) < R::lit(1e-10) * Float::max(R::one(), Float::abs(val.re)),
        "expectation of a Hermitian operator must be real, got imaginary part {}",
        val.im
    );
    Ok(val.re)
}

/// Common 2x2 gate matrices.
pub mod gates {
    use super::{Real, SingleQubitMatrix};
    use num_complex::Complex;
    use num_traits::{Float, One, Zero};

    fn c<R: Real>(re: R, im: R) -> Complex<R> {
        Complex::new(re, im)
    }

    pub fn identity<R: Real>() -> SingleQubitMatrix<R> {
        [
            [Complex::one(), Complex::zero()],
            [Complex::zero(), Complex::one()],
        ]
    }

    pub fn pauli_x<R: Real>() -> SingleQubitMatrix<R> {
        [
            [Complex::zero(), Complex::one()],
            [Complex::one(), Complex::zero()],
        ]
    }

    pub fn pauli_z<R: Real>() -> SingleQubitMatrix<R> {
        [
            [Complex::one(), Complex::zero()],
            [Complex::zero(), -Complex::<R>::one()],
        ]
    }

    pub fn hadamard<R: Real>() -> SingleQubitMatrix<R> {
        let h = R::one() / Float::sqrt(R::lit(2.0));
        [[c(h, R::zero()), c(h, R::zero())], [c(h, R::zero()), c(-h, R::zero())]]
    }

    /// Phase gate S = diag(1, i).
    pub fn s_gate<R: Real>() -> SingleQubitMatrix<R> {
        [
            [Complex::one(), Complex::zero()],
            [Complex::zero(), c(R::zero(), R::one())],
        ]
    }

    /// R_x(theta) = exp(-i theta X / 2).
    pub fn rx<R: Real>(theta: R) -> SingleQubitMatrix<R> {
        let half = theta / R::lit(2.0);
        let (cs, sn) = (Float::cos(half), Float::sin(half));
        [[c(cs, R::zero()), c(R::zero(), -sn)], [c(R::zero(), -sn), c(cs, R::zero())]]
    }

    /// R_y(theta) = exp(-i theta Y / 2).
    pub fn ry<R: Real>(theta: R) -> SingleQubitMatrix<R> {
        let half = theta / R::lit(2.0);
        let (cs, sn) = (Float::cos(half), Float::sin(half));
        [[c(cs, R::zero()), c(-sn, R::zero())], [c(sn, R::zero()), c(cs, R::zero())]]
    }

    /// R_z(theta) = exp(-i theta Z / 2) = diag(e^{-i theta/2}, e^{+i theta/2}).
    pub fn rz<R: Real>(theta: R) -> SingleQubitMatrix<R> {
        let half = theta / R::lit(2.0);
        let (cs, sn) = (Float::cos(half), Float::sin(half));
        [
            [c(cs, -sn), Complex::zero()],
            [Complex::zero(), c(cs, sn)],
        ]
    }
}
