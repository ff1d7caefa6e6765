//! The two spin models and their initial product states.
//!
//! Both Hamiltonians are sums of two-body sigma.sigma couplings and therefore
//! commute with total J^2 and J_z. The lattice model carries translation and
//! mirror symmetry on top; the all-to-all model gets its couplings from
//! randomly sampled momentum directions.

use num_complex::Complex;
use num_traits::{Float, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{gates, Statevector};
use crate::real::Real;

/// Name of the RNG behind every stochastic choice, recorded in run manifests.
pub const RNG_ALGORITHM: &str = "ChaCha12";

/// Rectangular lattice with row-major site indexing: site (x, y) -> y*nx + x.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice2D {
    pub nx: usize,
    pub ny: usize,
    pub periodic: bool,
}

impl Lattice2D {
    pub fn new(nx: usize, ny: usize, periodic: bool) -> Self {
        assert!(nx >= 1 && ny >= 1, "lattice extents must be positive");
        Self { nx, ny, periodic }
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn site_index(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.nx && y < self.ny);
        y * self.nx + x
    }

    #[inline]
    pub fn site_coords(&self, index: usize) -> (usize, usize) {
        (index % self.nx, index / self.nx)
    }

    /// Unordered nearest-neighbor pairs (horizontal then vertical per site,
    /// row-major), with wrap-around bonds when periodic. Wrap bonds that
    /// would duplicate an existing pair (extent 2) are emitted once.
    pub fn bonds(&self) -> Result<Vec<(usize, usize)>> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::DegenerateLattice {
                nx: self.nx,
                ny: self.ny,
            });
        }
        let mut bonds = Vec::new();
        for y in 0..self.ny {
            for x in 0..self.nx {
                let s = self.site_index(x, y);
                if x + 1 < self.nx {
                    bonds.push((s, self.site_index(x + 1, y)));
                } else if self.periodic && self.nx > 2 {
                    bonds.push((s, self.site_index(0, y)));
                }
                if y + 1 < self.ny {
                    bonds.push((s, self.site_index(x, y + 1)));
                } else if self.periodic && self.ny > 2 {
                    bonds.push((s, self.site_index(x, 0)));
                }
            }
        }
        Ok(bonds)
    }

    /// Minimal periodic displacement between two sites, reduced so that
    /// |dx| <= nx/2 and |dy| <= ny/2 and the leading nonzero component is
    /// positive.
    pub fn minimal_displacement(&self, a: usize, b: usize) -> (i64, i64) {
        let (ax, ay) = self.site_coords(a);
        let (bx, by) = self.site_coords(b);
        let reduce = |d: i64, len: i64| -> i64 {
            if !self.periodic {
                return d;
            }
            let mut r = d.rem_euclid(len);
            if r > len / 2 {
                r -= len;
            }
            r
        };
        let mut dx = reduce(bx as i64 - ax as i64, self.nx as i64);
        let mut dy = reduce(by as i64 - ay as i64, self.ny as i64);
        if dx < 0 || (dx == 0 && dy < 0) {
            dx = -dx;
            dy = -dy;
        }
        (dx, dy)
    }
}

/// One sigma_i . sigma_j coupling with a real coefficient.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CouplingTerm<R> {
    pub i: usize,
    pub j: usize,
    pub coefficient: R,
}

/// Weighted list of two-body sigma.sigma terms.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpinHamiltonian<R: Real> {
    n_qubits: usize,
    terms: Vec<CouplingTerm<R>>,
    label: String,
}

impl<R: Real> SpinHamiltonian<R> {
    pub fn new(n_qubits: usize, terms: Vec<CouplingTerm<R>>, label: impl Into<String>) -> Result<Self> {
        for t in &terms {
            if t.i == t.j || t.i >= n_qubits || t.j >= n_qubits || !t.coefficient.is_finite() {
                return Err(Error::InvalidTerm {
                    i: t.i,
                    j: t.j,
                    n_qubits,
                });
            }
        }
        Ok(Self {
            n_qubits,
            terms,
            label: label.into(),
        })
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn terms(&self) -> &[CouplingTerm<R>] {
        &self.terms
    }

    #[inline]
    pub fn label(&self) -> &str {
        &self.label
    }

    /// H|psi>. Each term expands to coefficient * (X_iX_j + Y_iY_j + Z_iZ_j):
    /// a z_i z_j sign on the diagonal plus amplitude 2*coefficient between
    /// basis states whose bits differ at i and j.
    pub fn apply(&self, state: &Statevector<R>) -> Result<Statevector<R>> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.n_qubits,
                found: state.dim(),
            });
        }
        let src = state.amplitudes();
        let mut out = vec![Complex::<R>::zero(); src.len()];
        let two = R::lit(2.0);
        for t in &self.terms {
            let bi = 1usize << t.i;
            let bj = 1usize << t.j;
            let c = t.coefficient;
            for b in 0..src.len() {
                let same = (b & bi == 0) == (b & bj == 0);
                if same {
                    out[b] += src[b].scale(c);
                } else {
                    out[b] -= src[b].scale(c);
                    out[b] += src[b ^ bi ^ bj].scale(two * c);
                }
            }
        }
        Statevector::from_amplitudes(self.n_qubits, out)
    }
}

/// Nearest-neighbor Heisenberg model on a 2D lattice.
///
/// Coefficient 2 per unordered bond: the model's pair sum runs over ordered
/// pairs, which is what makes the checkerboard product state on the 4x3
/// periodic lattice sit at energy -32.
pub fn heisenberg_hamiltonian<R: Real>(lattice: &Lattice2D) -> Result<SpinHamiltonian<R>> {
    let terms = lattice
        .bonds()?
        .into_iter()
        .map(|(i, j)| CouplingTerm {
            i,
            j,
            coefficient: R::lit(2.0),
        })
        .collect();
    let label = format!(
        "heisenberg-{}x{}-{}",
        lattice.nx,
        lattice.ny,
        if lattice.periodic { "periodic" } else { "open" }
    );
    SpinHamiltonian::new(lattice.n_sites(), terms, label)
}

/// Unit momentum directions for the all-to-all model, one per particle.
#[derive(Clone, Debug)]
pub struct MomentumSet<R: Real> {
    seed: u64,
    directions: Vec<[R; 3]>,
    polar: Vec<R>,
    azimuth: Vec<R>,
}

impl<R: Real> MomentumSet<R> {
    /// Build a fixed momentum configuration from explicit unit vectors.
    pub fn from_directions(directions: Vec<[R; 3]>, seed: u64) -> Self {
        let polar = directions
            .iter()
            .map(|p| Float::acos(Float::min(Float::max(p[2], -R::one()), R::one())))
            .collect();
        let azimuth = directions.iter().map(|p| Float::atan2(p[1], p[0])).collect();
        Self {
            seed,
            directions,
            polar,
            azimuth,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    #[inline]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn directions(&self) -> &[[R; 3]] {
        &self.directions
    }

    #[inline]
    pub fn polar_angles(&self) -> &[R] {
        &self.polar
    }

    #[inline]
    pub fn azimuthal_angles(&self) -> &[R] {
        &self.azimuth
    }
}

/// Sample `n` directions uniformly on the unit sphere: the azimuthal angle is
/// uniform on [0, 2pi) and cos(theta) uniform on [-1, 1]. Deterministic for a
/// given seed; sampling happens at f64 and is converted, so every scalar type
/// sees the same directions.
pub fn sample_momenta<R: Real>(n: usize, seed: u64) -> Result<MomentumSet<R>> {
    if n == 0 {
        return Err(Error::EmptyMomentumSet);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut directions = Vec::with_capacity(n);
    let mut polar = Vec::with_capacity(n);
    let mut azimuth = Vec::with_capacity(n);
    for _ in 0..n {
        let phi: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        let cos_theta: f64 = 2.0 * rng.random::<f64>() - 1.0;
        let theta = cos_theta.clamp(-1.0, 1.0).acos();
        let sin_theta = theta.sin();
        directions.push([
            R::lit(phi.cos() * sin_theta),
            R::lit(phi.sin() * sin_theta),
            R::lit(cos_theta),
        ]);
        polar.push(R::lit(theta));
        azimuth.push(R::lit(phi));
    }
    Ok(MomentumSet {
        seed,
        directions,
        polar,
        azimuth,
    })
}

fn dot3<R: Real>(a: &[R; 3], b: &[R; 3]) -> R {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// All-to-all model: one term per unordered pair with coefficient
/// (1 - p_i . p_j), clamped into [0, 2] against rounding at the endpoints.
pub fn neutrino_hamiltonian<R: Real>(momenta: &MomentumSet<R>) -> Result<SpinHamiltonian<R>> {
    let n = momenta.len();
    if n < 2 {
        return Err(Error::EmptyMomentumSet);
    }
    let mut terms = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let c = R::one() - dot3(&momenta.directions[i], &momenta.directions[j]);
            let c = Float::min(Float::max(c, R::zero()), R::lit(2.0));
            terms.push(CouplingTerm {
                i,
                j,
                coefficient: c,
            });
        }
    }
    let label = format!("neutrino-n{}-seed{}", n, momenta.seed);
    SpinHamiltonian::new(n, terms, label)
}

/// Symmetrized Neel state: the equal superposition of the two checkerboard
/// configurations, spin up/down assigned by the parity of x + y.
pub fn neel_state<R: Real>(lattice: &Lattice2D) -> Result<Statevector<R>> {
    let n = lattice.n_sites();
    if n % 2 != 0 {
        return Err(Error::OddSiteCount { sites: n });
    }
    // Bit 0 is spin up; configuration A points odd-parity sites down.
    let mut a = 0usize;
    for y in 0..lattice.ny {
        for x in 0..lattice.nx {
            if (x + y) % 2 == 1 {
                a |= 1 << lattice.site_index(x, y);
            }
        }
    }
    let b = a ^ ((1usize << n) - 1);
    let mut amps = vec![Complex::<R>::zero(); 1 << n];
    let w = Complex::new(R::one() / Float::sqrt(R::lit(2.0)), R::zero());
    amps[a] = w;
    amps[b] = w;
    Statevector::from_amplitudes(n, amps)
}

/// Euler angles (alpha, beta, gamma) such that R_z(alpha) R_y(beta) R_z(gamma)
/// rotates |0> onto the Bloch vector `p`. Convention: gamma = 0, beta the
/// polar angle of p, alpha its azimuth.
pub fn euler_angles_for_direction<R: Real>(p: [R; 3]) -> Result<(R, R, R)> {
    let norm = Float::sqrt(dot3(&p, &p));
    if Float::abs(norm - R::one()) > R::lit(1e-9) {
        return Err(Error::NotUnitVector {
            norm: norm.to_f64_lossy(),
        });
    }
    let beta = Float::acos(Float::min(Float::max(p[2], -R::one()), R::one()));
    let alpha = if p[0] == R::zero() && p[1] == R::zero() {
        R::zero()
    } else {
        Float::atan2(p[1], p[0])
    };
    Ok((alpha, beta, R::zero()))
}

/// Product state with the Bloch vector of qubit i aligned to momentum p_i,
/// prepared through the R_z R_y R_z Euler decomposition.
pub fn coherent_product_state<R: Real>(momenta: &MomentumSet<R>) -> Result<Statevector<R>> {
    let n = momenta.len();
    let mut state = Statevector::zero(n)?;
    for (q, p) in momenta.directions.iter().enumerate() {
        let (alpha, beta, gamma) = euler_angles_for_direction(*p)?;
        state.apply_single_qubit_unchecked(q, &gates::rz(gamma));
        state.apply_single_qubit_unchecked(q, &gates::ry(beta));
        state.apply_single_qubit_unchecked(q, &gates::rz(alpha));
    }
    Ok(state)
}

/// Bloch vector (<X>, <Y>, <Z>) of one qubit.
pub fn bloch_vector<R: Real>(state: &Statevector<R>, qubit: usize) -> Result<[R; 3]> {
    if qubit >= state.n_qubits() {
        return Err(Error::QubitOutOfRange {
            qubit,
            n_qubits: state.n_qubits(),
        });
    }
    let bit = 1usize << qubit;
    let mut x = R::zero();
    let mut y = R::zero();
    let mut z = R::zero();
    let amps = state.amplitudes();
    for b in 0..amps.len() {
        let a = amps[b];
        if b & bit == 0 {
            let pair = amps[b | bit];
            let cross = a.conj() * pair;
            x += cross.re + cross.re;
            y += cross.im + cross.im;
            z += a.norm_sqr() - pair.norm_sqr();
        }
    }
    Ok([x, y, z])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::expectation;

    type C64 = Complex<f64>;

    #[test]
    fn heisenberg_4x3_periodic_has_24_terms() {
        let lattice = Lattice2D::new(4, 3, true);
        let h = heisenberg_hamiltonian::<f64>(&lattice).unwrap();
        assert_eq!(h.terms().len(), 24);
        assert_eq!(h.n_qubits(), 12);
    }

    #[test]
    fn heisenberg_2x2_open_has_4_terms() {
        let lattice = Lattice2D::new(2, 2, false);
        let h = heisenberg_hamiltonian::<f64>(&lattice).unwrap();
        assert_eq!(h.terms().len(), 4);
    }

    #[test]
    fn heisenberg_rejects_degenerate_lattice() {
        let lattice = Lattice2D::new(1, 5, true);
        assert!(matches!(
            heisenberg_hamiltonian::<f64>(&lattice),
            Err(Error::DegenerateLattice { .. })
        ));
    }

    #[test]
    fn neel_energy_on_4x3_is_minus_32() {
        let lattice = Lattice2D::new(4, 3, true);
        let h = heisenberg_hamiltonian::<f64>(&lattice).unwrap();
        let neel = neel_state::<f64>(&lattice).unwrap();
        let e = expectation(&neel, &h).unwrap();
        assert!((e + 32.0).abs() < 1e-12, "got {e}");
    }

    #[test]
    fn neel_smallest_chain() {
        let lattice = Lattice2D::new(2, 1, false);
        let neel = neel_state::<f64>(&lattice).unwrap();
        let amps = neel.amplitudes();
        let w = 1.0 / 2.0f64.sqrt();
        assert!((amps[0b01] - C64::new(w, 0.0)).norm() < 1e-15);
        assert!((amps[0b10] - C64::new(w, 0.0)).norm() < 1e-15);
        assert!(amps[0b00].norm() < 1e-15 && amps[0b11].norm() < 1e-15);
    }

    #[test]
    fn neel_4x3_has_two_nonzero_amplitudes() {
        let lattice = Lattice2D::new(4, 3, true);
        let neel = neel_state::<f64>(&lattice).unwrap();
        let nonzero: Vec<_> = neel
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 1e-15)
            .collect();
        assert_eq!(nonzero.len(), 2);
        for (_, a) in nonzero {
            assert!((a.norm() - 1.0 / 2.0f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn neel_rejects_odd_site_count() {
        let lattice = Lattice2D::new(3, 3, true);
        assert!(matches!(
            neel_state::<f64>(&lattice),
            Err(Error::OddSiteCount { sites: 9 })
        ));
    }

    #[test]
    fn momenta_are_unit_and_deterministic() {
        let a = sample_momenta::<f64>(2, 99).unwrap();
        let b = sample_momenta::<f64>(2, 99).unwrap();
        for (pa, pb) in a.directions().iter().zip(b.directions()) {
            assert_eq!(pa, pb);
            let norm = dot3(pa, pa).sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn momenta_sample_mean_vanishes() {
        let set = sample_momenta::<f64>(10_000, 7).unwrap();
        let mut mean = [0.0f64; 3];
        for p in set.directions() {
            for k in 0..3 {
                mean[k] += p[k];
            }
        }
        for m in &mut mean {
            *m /= 10_000.0;
            assert!(m.abs() < 0.05, "component mean {m}");
        }
    }

    #[test]
    fn neutrino_coefficients_from_parallel_and_antiparallel() {
        let up = [0.0, 0.0, 1.0];
        let down = [0.0, 0.0, -1.0];
        let set = MomentumSet::<f64>::from_directions(vec![up, down], 0);
        let h = neutrino_hamiltonian(&set).unwrap();
        assert_eq!(h.terms().len(), 1);
        assert!((h.terms()[0].coefficient - 2.0).abs() < 1e-15);

        let same = MomentumSet::<f64>::from_directions(vec![up, up], 0);
        let h = neutrino_hamiltonian(&same).unwrap();
        assert!(h.terms()[0].coefficient.abs() < 1e-15);
    }

    #[test]
    fn neutrino_coefficient_bounds_over_seeds() {
        for seed in 0..100 {
            let set = sample_momenta::<f64>(12, seed).unwrap();
            let h = neutrino_hamiltonian(&set).unwrap();
            assert_eq!(h.terms().len(), 66);
            for t in h.terms() {
                assert!(t.coefficient >= 0.0 && t.coefficient <= 2.0);
            }
        }
    }

    #[test]
    fn euler_angle_examples() {
        let (a, b, g) = euler_angles_for_direction([0.0, 0.0, 1.0]).unwrap();
        assert_eq!((a, b, g), (0.0, 0.0, 0.0));
        let (a, b, _) = euler_angles_for_direction([1.0, 0.0, 0.0]).unwrap();
        assert!(a.abs() < 1e-15 && (b - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let (_, b, _) = euler_angles_for_direction([0.0, 0.0, -1.0]).unwrap();
        assert!((b - std::f64::consts::PI).abs() < 1e-15);
        assert!(euler_angles_for_direction([0.5, 0.0, 0.0]).is_err());
    }

    #[test]
    fn coherent_state_aligns_bloch_vectors() {
        let set = sample_momenta::<f64>(12, 42).unwrap();
        let state = coherent_product_state(&set).unwrap();
        for (q, p) in set.directions().iter().enumerate() {
            let bloch = bloch_vector(&state, q).unwrap();
            let align = dot3(&bloch, p);
            assert!((align - 1.0).abs() < 1e-10, "qubit {q}: alignment {align}");
        }
    }

    #[test]
    fn coherent_state_special_directions() {
        let set = MomentumSet::<f64>::from_directions(vec![[0.0, 0.0, 1.0]], 0);
        let state = coherent_product_state(&set).unwrap();
        assert!((state.amplitude(0).norm() - 1.0).abs() < 1e-12);

        let set = MomentumSet::<f64>::from_directions(vec![[1.0, 0.0, 0.0]], 0);
        let state = coherent_product_state(&set).unwrap();
        let w = 1.0 / 2.0f64.sqrt();
        assert!((state.amplitude(0).norm() - w).abs() < 1e-12);
        assert!((state.amplitude(1).norm() - w).abs() < 1e-12);
    }

    #[test]
    fn hamiltonians_commute_with_total_spin() {
        // [H, J_z] and [H, J^2] vanish, checked column by column on n = 6
        let lattice = Lattice2D::new(3, 2, true);
        let heis = heisenberg_hamiltonian::<f64>(&lattice).unwrap();
        let momenta = sample_momenta::<f64>(6, 11).unwrap();
        let nu = neutrino_hamiltonian(&momenta).unwrap();
        for h in [&heis, &nu] {
            let n = h.n_qubits();
            // J^2 = 3n/4 + (1/2) sum_{i<j} sigma_i.sigma_j
            let mut pair_terms = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    pair_terms.push(CouplingTerm {
                        i,
                        j,
                        coefficient: 0.5,
                    });
                }
            }
            let j2_pairs = SpinHamiltonian::new(n, pair_terms, "j2").unwrap();
            let jz = crate::symmetry::jz_eigenvalues::<f64>(n);
            let mut worst_jz = 0.0f64;
            let mut worst_j2 = 0.0f64;
            for b in 0..1usize << n {
                let basis = Statevector::<f64>::basis_state(n, b).unwrap();
                let hv = h.apply(&basis).unwrap();

                // [H, J_z]
                let jz_hv: Vec<C64> = hv
                    .amplitudes()
                    .iter()
                    .enumerate()
                    .map(|(k, a)| a.scale(jz.values()[k]))
                    .collect();
                let mut jz_v = basis.clone();
                for (k, a) in jz_v.amplitudes_mut().iter_mut().enumerate() {
                    *a = a.scale(jz.values()[k]);
                }
                let h_jzv = h.apply(&jz_v).unwrap();
                for k in 0..1 << n {
                    worst_jz = worst_jz.max((jz_hv[k] - h_jzv.amplitude(k)).norm());
                }

                // [H, J^2]; the 3n/4 identity shift drops out of the commutator
                let j2_hv = j2_pairs.apply(&hv).unwrap();
                let h_j2v = h.apply(&j2_pairs.apply(&basis).unwrap()).unwrap();
                for k in 0..1 << n {
                    worst_j2 = worst_j2.max((j2_hv.amplitude(k) - h_j2v.amplitude(k)).norm());
                }
            }
            assert!(worst_jz < 1e-10, "[H, Jz] = {worst_jz:.3e} for {}", h.label());
            assert!(worst_j2 < 1e-10, "[H, J2] = {worst_j2:.3e} for {}", h.label());
        }
    }

    #[test]
    fn neutrino_energy_invariant_under_global_rotation() {
        // Rotating all momenta (and hence the coherent state built from
        // them) leaves the energy unchanged.
        let seed = 5;
        let set = sample_momenta::<f64>(6, seed).unwrap();
        let h = neutrino_hamiltonian(&set).unwrap();
        let psi = coherent_product_state(&set).unwrap();
        let e0 = expectation(&psi, &h).unwrap();

        // An arbitrary rotation about axis u by angle phi (Rodrigues).
        let axis = {
            let raw = [0.3, -0.7, 0.648];
            let n = (raw[0] * raw[0] + raw[1] * raw[1] + raw[2] * raw[2]).sqrt();
            [raw[0] / n, raw[1] / n, raw[2] / n]
        };
        let phi = 1.234f64;
        let rotate = |p: &[f64; 3]| -> [f64; 3] {
            let (c, s) = (phi.cos(), phi.sin());
            let dot = axis[0] * p[0] + axis[1] * p[1] + axis[2] * p[2];
            let cross = [
                axis[1] * p[2] - axis[2] * p[1],
                axis[2] * p[0] - axis[0] * p[2],
                axis[0] * p[1] - axis[1] * p[0],
            ];
            [
                p[0] * c + cross[0] * s + axis[0] * dot * (1.0 - c),
                p[1] * c + cross[1] * s + axis[1] * dot * (1.0 - c),
                p[2] * c + cross[2] * s + axis[2] * dot * (1.0 - c),
            ]
        };
        let rotated: Vec<[f64; 3]> = set.directions().iter().map(rotate).collect();
        let rot_set = MomentumSet::<f64>::from_directions(rotated, seed);
        let h_rot = neutrino_hamiltonian(&rot_set).unwrap();
        let psi_rot = coherent_product_state(&rot_set).unwrap();
        let e1 = expectation(&psi_rot, &h_rot).unwrap();
        assert!((e0 - e1).abs() < 1e-8, "{e0} vs {e1}");
    }
}
