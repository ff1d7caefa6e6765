//! Spin-projection engine (J_z = 0 and total J = 0) plus exact
//! translation/mirror group-average symmetrization.
//!
//! The J_z filter applies the kept ancilla branch cos(J_z t) as a diagonal
//! Kraus factor; the ancilla itself is never materialized. With the dyadic
//! schedule t_i = pi/2^i for i = 1..k and k = floor(log2(n/2)) + 1, every
//! nonzero J_z eigenvalue |m| <= n/2 hits an exact zero of some cos(m t_i),
//! so the projection is exact rather than approximate.

use num_traits::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{Lattice2D, SpinHamiltonian};
use crate::qstate::{DiagonalObservable, Statevector};
use crate::real::Real;

/// Filter times t_i = pi/2^i for i = 1..k.
#[derive(Clone, Debug)]
pub struct JzSchedule<R: Real> {
    exponents: Vec<u32>,
    times: Vec<R>,
}

impl<R: Real> JzSchedule<R> {
    /// Schedule with exactly `k` steps.
    pub fn with_steps(k: u32) -> Self {
        let exponents: Vec<u32> = (1..=k).collect();
        let times = exponents
            .iter()
            .map(|&i| R::PI() / R::lit(f64::from(1u32 << i)))
            .collect();
        Self { exponents, times }
    }

    /// The shortest schedule that projects an `n`-qubit state exactly:
    /// k = floor(log2(n/2)) + 1, so every integer 0 < |m| <= n/2 satisfies
    /// cos(m t_i) = 0 for some step i.
    pub fn for_qubits(n: usize) -> Self {
        assert!(n >= 2, "projection needs at least two qubits");
        let half = (n / 2) as u32;
        let k = 32 - half.leading_zeros(); // floor(log2(half)) + 1
        Self::with_steps(k)
    }

    pub fn times(&self) -> &[R] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// The diagonal factor cos(m pi / 2^i) for step `step`, with the zeros
    /// evaluated exactly: cos(m pi / 2^i) = 0 iff m = 2^(i-1) (mod 2^i).
    fn filter(&self, step: usize) -> impl Fn(R) -> R + '_ {
        let i = self.exponents[step];
        let t = self.times[step];
        move |m: R| {
            let m_int = m.to_f64_lossy().round() as i64;
            let modulus = 1i64 << i;
            if m_int.rem_euclid(modulus) == modulus / 2 {
                R::zero()
            } else {
                Float::cos(m * t)
            }
        }
    }
}

/// J_z eigenvalue per basis index: m(b) = (#up - #down)/2 with bit value 0
/// counting as spin up.
pub fn jz_eigenvalues<R: Real>(n_qubits: usize) -> DiagonalObservable<R> {
    let values = (0..1usize << n_qubits)
        .map(|b| {
            let down = b.count_ones() as i64;
            R::lit((n_qubits as i64 - 2 * down) as f64 / 2.0)
        })
        .collect();
    DiagonalObservable::new(values)
}

/// <J_z^2>.
pub fn jz_squared_expectation<R: Real>(state: &Statevector<R>) -> R {
    let n = state.n_qubits() as i64;
    state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(b, a)| {
            let m = R::lit((n - 2 * (b.count_ones() as i64)) as f64 / 2.0);
            a.norm_sqr() * m * m
        })
        .sum()
}

/// <J^2> with J = sum_i sigma_i / 2, computed as |J_x psi|^2 + |J_y psi|^2 +
/// |J_z psi|^2.
pub fn j_squared_expectation<R: Real>(state: &Statevector<R>) -> R {
    let n = state.n_qubits();
    let dim = state.dim();
    let amps = state.amplitudes();
    let half = R::lit(0.5);

    // J_z is diagonal.
    let jz2 = jz_squared_expectation(state);

    // J_x |psi> and J_y |psi>.
    let mut jx = vec![num_complex::Complex::<R>::new(R::zero(), R::zero()); dim];
    let mut jy = jx.clone();
    for b in 0..dim {
        let a = amps[b];
        if a.norm_sqr() == R::zero() {
            continue;
        }
        for q in 0..n {
            let flipped = b ^ (1 << q);
            // X|0> = |1>: amplitude moves to the flipped index.
            jx[flipped] += a.scale(half);
            // Y|b_q>: +i a for bit 0 -> 1, -i a for bit 1 -> 0, times 1/2.
            let sign = if b & (1 << q) == 0 { R::one() } else { -R::one() };
            jy[flipped] += num_complex::Complex::new(R::zero(), sign) * a.scale(half);
        }
    }
    let jx2: R = jx.iter().map(|a| a.norm_sqr()).sum();
    let jy2: R = jy.iter().map(|a| a.norm_sqr()).sum();
    jx2 + jy2 + jz2
}

/// One row of a projection trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct ProjectionStep<R> {
    pub iteration: usize,
    pub probability: R,
    pub cumulative_probability: R,
    pub energy: R,
    pub j2: R,
    pub jz2: R,
}

/// Per-iteration record of survival probability, energy, and symmetry
/// expectation values.
#[derive(Clone, Debug, Serialize)]
pub struct ProjectionReport<R> {
    pub steps: Vec<ProjectionStep<R>>,
    pub total_iterations: usize,
}

impl<R: Real> ProjectionReport<R> {
    pub fn cumulative_probability(&self) -> R {
        self.steps
            .last()
            .map(|s| s.cumulative_probability)
            .unwrap_or_else(R::one)
    }

    pub fn final_energy(&self) -> R {
        self.steps.last().map(|s| s.energy).unwrap_or_else(R::zero)
    }

    /// CSV with columns iteration, probability, cumulative_probability,
    /// energy, J2, Jz2 (floats at 12 significant digits).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,probability,cumulative_probability,energy,J2,Jz2\n");
        for s in &self.steps {
            out.push_str(&format!(
                "{},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}\n",
                s.iteration,
                s.probability.to_f64_lossy(),
                s.cumulative_probability.to_f64_lossy(),
                s.energy.to_f64_lossy(),
                s.j2.to_f64_lossy(),
                s.jz2.to_f64_lossy(),
            ));
        }
        out
    }
}

fn record<R: Real>(
    state: &Statevector<R>,
    h: &SpinHamiltonian<R>,
    iteration: usize,
    probability: R,
    cumulative: R,
) -> Result<ProjectionStep<R>> {
    Ok(ProjectionStep {
        iteration,
        probability,
        cumulative_probability: cumulative,
        energy: crate::qstate::expectation(state, h)?,
        j2: j_squared_expectation(state),
        jz2: jz_squared_expectation(state),
    })
}

/// Project onto J_z = 0 by running the full cos(J_z t_i) filter schedule.
/// Every m != 0 amplitude is annihilated exactly; the cumulative probability
/// equals the initial J_z = 0 weight.
pub fn project_jz_zero<R: Real>(
    state: &mut Statevector<R>,
    schedule: &JzSchedule<R>,
    h: &SpinHamiltonian<R>,
) -> Result<ProjectionReport<R>> {
    let obs = jz_eigenvalues::<R>(state.n_qubits());
    let mut steps = vec![record(state, h, 0, R::one(), R::one())?];
    let mut cumulative = R::one();
    for s in 0..schedule.len() {
        let p = state.post_select_diagonal(&obs, schedule.filter(s))?;
        cumulative *= p;
        steps.push(record(state, h, s + 1, p, cumulative)?);
    }
    Ok(ProjectionReport {
        steps,
        total_iterations: schedule.len(),
    })
}

/// Rotation angle between spin-zero iterations.
const ROTATION_ANGLE: f64 = std::f64::consts::FRAC_PI_2;

/// Project onto total J = 0: an initial J_z = 0 projection followed by
/// `iterations` rounds of [global R_x(pi/2) -> J_z = 0 projection]. Each
/// round multiplies the J_z = 0 amplitude of every J-multiplet by the
/// Legendre value P_J(0), so odd J dies in the first round and even J > 0
/// decays geometrically. No rotation follows the last projection.
///
/// The report starts with the unprojected input (iteration 0 in the CSV is
/// the initial state, matching the step-0 convention of the energy-versus-
/// step trajectory), then one row per projection.
pub fn project_spin_zero<R: Real>(
    state: &mut Statevector<R>,
    iterations: usize,
    h: &SpinHamiltonian<R>,
) -> Result<ProjectionReport<R>> {
    if state.n_qubits() % 2 != 0 {
        return Err(Error::OddSiteCount {
            sites: state.n_qubits(),
        });
    }
    let schedule = JzSchedule::<R>::for_qubits(state.n_qubits());
    let obs = jz_eigenvalues::<R>(state.n_qubits());
    let angle = R::lit(ROTATION_ANGLE);

    let mut steps = vec![record(state, h, 0, R::one(), R::one())?];
    let mut cumulative = R::one();

    let run_jz = |state: &mut Statevector<R>, cumulative: &mut R| -> Result<R> {
        let mut p_round = R::one();
        for s in 0..schedule.len() {
            let p = state.post_select_diagonal(&obs, schedule.filter(s))?;
            p_round *= p;
        }
        *cumulative *= p_round;
        Ok(p_round)
    };

    let p = run_jz(state, &mut cumulative)?;
    steps.push(record(state, h, 1, p, cumulative)?);

    for it in 0..iterations {
        state.global_rotation_x(angle);
        let p = run_jz(state, &mut cumulative)?;
        steps.push(record(state, h, it + 2, p, cumulative)?);
    }

    Ok(ProjectionReport {
        steps,
        total_iterations: iterations,
    })
}

/// Permutation of site indices: site s moves to `perm[s]`.
pub type SitePermutation = Vec<usize>;

/// Translation by (dx, dy) on a periodic lattice.
pub fn translation_permutation(lattice: &Lattice2D, dx: i64, dy: i64) -> Result<SitePermutation> {
    if !lattice.periodic {
        return Err(Error::NotPeriodic);
    }
    let (nx, ny) = (lattice.nx as i64, lattice.ny as i64);
    let mut perm = vec![0usize; lattice.n_sites()];
    for s in 0..lattice.n_sites() {
        let (x, y) = lattice.site_coords(s);
        let tx = (x as i64 + dx).rem_euclid(nx) as usize;
        let ty = (y as i64 + dy).rem_euclid(ny) as usize;
        perm[s] = lattice.site_index(tx, ty);
    }
    Ok(perm)
}

/// Reflection x -> nx-1-x about the lattice mid-plane.
pub fn mirror_x_permutation(lattice: &Lattice2D) -> SitePermutation {
    (0..lattice.n_sites())
        .map(|s| {
            let (x, y) = lattice.site_coords(s);
            lattice.site_index(lattice.nx - 1 - x, y)
        })
        .collect()
}

/// Reflection y -> ny-1-y.
pub fn mirror_y_permutation(lattice: &Lattice2D) -> SitePermutation {
    (0..lattice.n_sites())
        .map(|s| {
            let (x, y) = lattice.site_coords(s);
            lattice.site_index(x, lattice.ny - 1 - y)
        })
        .collect()
}

fn compose(outer: &[usize], inner: &[usize]) -> SitePermutation {
    // (outer . inner)(s) = outer[inner[s]]
    inner.iter().map(|&s| outer[s]).collect()
}

/// Apply the basis-state permutation induced by a site permutation: the bit
/// at site s moves to site perm[s].
pub fn apply_site_permutation<R: Real>(
    state: &Statevector<R>,
    perm: &[usize],
) -> Result<Statevector<R>> {
    let n = state.n_qubits();
    if perm.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: perm.len(),
        });
    }
    let mut out = vec![num_complex::Complex::<R>::new(R::zero(), R::zero()); state.dim()];
    for (b, &a) in state.amplitudes().iter().enumerate() {
        let mut target = 0usize;
        for (s, &t) in perm.iter().enumerate() {
            if b & (1 << s) != 0 {
                target |= 1 << t;
            }
        }
        out[target] = a;
    }
    Statevector::from_amplitudes(n, out)
}

/// Lattice symmetry group for the k = 0, mirror-even sector: all nx*ny
/// translations composed with the 4-element mirror group.
#[derive(Clone, Debug)]
pub struct SymmetryGroupSpec {
    lattice: Lattice2D,
}

impl SymmetryGroupSpec {
    pub fn new(lattice: Lattice2D) -> Result<Self> {
        if !lattice.periodic {
            return Err(Error::NotPeriodic);
        }
        Ok(Self { lattice })
    }

    pub fn lattice(&self) -> &Lattice2D {
        &self.lattice
    }

    /// The 4 nx ny site permutations {translation . mirror}.
    pub fn elements(&self) -> Vec<SitePermutation> {
        let identity: SitePermutation = (0..self.lattice.n_sites()).collect();
        let mx = mirror_x_permutation(&self.lattice);
        let my = mirror_y_permutation(&self.lattice);
        let mxy = compose(&mx, &my);
        let mirrors = [identity, mx, my, mxy];

        let mut elements = Vec::with_capacity(4 * self.lattice.n_sites());
        for dy in 0..self.lattice.ny as i64 {
            for dx in 0..self.lattice.nx as i64 {
                let t = translation_permutation(&self.lattice, dx, dy)
                    .expect("spec lattice is periodic");
                for m in &mirrors {
                    elements.push(compose(&t, m));
                }
            }
        }
        elements
    }

    pub fn order(&self) -> usize {
        4 * self.lattice.n_sites()
    }
}

/// Group-average projector P = (1/|G|) sum_g U_g onto the fully symmetric
/// (k = 0, mirror-even) sector, applied in place. Returns ||P psi||^2, the
/// probability of the symmetric component.
pub fn symmetrize_translations_mirrors<R: Real>(
    state: &mut Statevector<R>,
    spec: &SymmetryGroupSpec,
) -> Result<R> {
    let elements = spec.elements();
    if spec.lattice.n_sites() != state.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: 1 << spec.lattice.n_sites(),
            found: state.dim(),
        });
    }
    let weight = R::one() / R::lit(elements.len() as f64);
    let mut acc = vec![num_complex::Complex::<R>::new(R::zero(), R::zero()); state.dim()];
    for perm in &elements {
        let moved = apply_site_permutation(state, perm)?;
        for (a, m) in acc.iter_mut().zip(moved.amplitudes()) {
            *a += m.scale(weight);
        }
    }
    let projected = Statevector::from_amplitudes(state.n_qubits(), acc)?;
    let probability = projected.norm_sqr();
    let floor = R::lit(crate::qstate::NORM_FLOOR);
    if probability < floor {
        return Err(Error::AnnihilatedState {
            probability: probability.to_f64_lossy(),
            floor: crate::qstate::NORM_FLOOR,
        });
    }
    *state = projected;
    state.normalize();
    Ok(probability)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{heisenberg_hamiltonian, neel_state, CouplingTerm};
    use num_complex::Complex;

    fn two_qubit_h() -> SpinHamiltonian<f64> {
        SpinHamiltonian::new(
            2,
            vec![CouplingTerm {
                i: 0,
                j: 1,
                coefficient: 2.0,
            }],
            "pair",
        )
        .unwrap()
    }

    #[test]
    fn schedule_length_matches_register() {
        assert_eq!(JzSchedule::<f64>::for_qubits(2).len(), 1);
        assert_eq!(JzSchedule::<f64>::for_qubits(4).len(), 2);
        assert_eq!(JzSchedule::<f64>::for_qubits(12).len(), 3);
        assert_eq!(JzSchedule::<f64>::for_qubits(16).len(), 4);
    }

    #[test]
    fn jz_eigenvalues_two_qubits() {
        let obs = jz_eigenvalues::<f64>(2);
        assert_eq!(obs.values(), &[1.0, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn jz_eigenvalues_sum_to_zero() {
        let obs = jz_eigenvalues::<f64>(8);
        let total: f64 = obs.values().iter().sum();
        assert_eq!(total, 0.0);
        // all-up basis state of 12 qubits has m = 6
        let obs12 = jz_eigenvalues::<f64>(12);
        assert_eq!(obs12.values()[0], 6.0);
    }

    #[test]
    fn project_jz_zero_uniform_superposition() {
        let h = two_qubit_h();
        let w = Complex::new(0.5, 0.0);
        let mut state = Statevector::from_amplitudes(2, vec![w; 4]).unwrap();
        let schedule = JzSchedule::<f64>::for_qubits(2);
        let report = project_jz_zero(&mut state, &schedule, &h).unwrap();
        assert!((report.cumulative_probability() - 0.5).abs() < 1e-12);
        let amps = state.amplitudes();
        let val = 1.0 / 2.0f64.sqrt();
        assert_eq!(amps[0], Complex::new(0.0, 0.0));
        assert_eq!(amps[3], Complex::new(0.0, 0.0));
        assert!((amps[1].re - val).abs() < 1e-12);
        assert!((amps[2].re - val).abs() < 1e-12);
    }

    #[test]
    fn project_jz_zero_annihilates_all_up() {
        let h = two_qubit_h();
        let mut state = Statevector::<f64>::zero(2).unwrap();
        let schedule = JzSchedule::<f64>::for_qubits(2);
        let err = project_jz_zero(&mut state, &schedule, &h);
        assert!(matches!(err, Err(Error::AnnihilatedState { .. })));
    }

    #[test]
    fn project_jz_zero_is_exact_on_random_states() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(31);
        for n in [4usize, 6, 8] {
            let h = SpinHamiltonian::new(
                n,
                vec![CouplingTerm {
                    i: 0,
                    j: 1,
                    coefficient: 1.0,
                }],
                "probe",
            )
            .unwrap();
            let amps: Vec<Complex<f64>> = (0..1 << n)
                .map(|_| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let mut state = Statevector::from_amplitudes(n, amps).unwrap();
            state.normalize();
            let schedule = JzSchedule::<f64>::for_qubits(n);
            project_jz_zero(&mut state, &schedule, &h).unwrap();
            // exact annihilation: every m != 0 amplitude is identically zero
            for (b, a) in state.amplitudes().iter().enumerate() {
                if 2 * b.count_ones() as usize != n {
                    assert_eq!(a.norm_sqr(), 0.0, "m != 0 survived at {b}");
                }
            }
            assert_eq!(jz_squared_expectation(&state), 0.0);
        }
    }

    #[test]
    fn neel_is_already_jz_zero() {
        let lattice = Lattice2D::new(4, 3, true);
        let h = heisenberg_hamiltonian::<f64>(&lattice).unwrap();
        let mut state = neel_state::<f64>(&lattice).unwrap();
        assert_eq!(jz_squared_expectation(&state), 0.0);
        let schedule = JzSchedule::<f64>::for_qubits(12);
        let report = project_jz_zero(&mut state, &schedule, &h).unwrap();
        assert!((report.cumulative_probability() - 1.0).abs() < 1e-12);
        let neel = neel_state::<f64>(&lattice).unwrap();
        assert!((state.fidelity(&neel).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_state_along_x_projects_onto_triplet_m0() {
        // (|0>+|1>)(|0>+|1>)/2 keeps its m = 0 half: (|01>+|10>)/sqrt(2)
        let h = two_qubit_h();
        let set = crate::models::MomentumSet::from_directions(
            vec![[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
            0,
        );
        let mut state = crate::models::coherent_product_state(&set).unwrap();
        let schedule = JzSchedule::<f64>::for_qubits(2);
        let report = project_jz_zero(&mut state, &schedule, &h).unwrap();
        assert!((report.cumulative_probability() - 0.5).abs() < 1e-12);
        let v = 1.0 / 2.0f64.sqrt();
        let triplet = Statevector::from_amplitudes(
            2,
            vec![
                Complex::new(0.0, 0.0),
                Complex::new(v, 0.0),
                Complex::new(v, 0.0),
                Complex::new(0.0, 0.0),
            ],
        )
        .unwrap();
        assert!((state.fidelity(&triplet).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_report_probabilities_are_monotone() {
        let lattice = Lattice2D::new(4, 3, true);
        let h = heisenberg_hamiltonian::<f64>(&lattice).unwrap();
        let mut state = neel_state::<f64>(&lattice).unwrap();
        let report = project_spin_zero(&mut state, 11, &h).unwrap();
        for w in report.steps.windows(2) {
            assert!(w[1].cumulative_probability <= w[0].cumulative_probability + 1e-15);
        }
        let last = report.cumulative_probability();
        assert!(last > 0.0 && last <= 1.0 + 1e-15);
        for s in &report.steps {
            assert!(s.j2 >= 0.0);
        }
    }

    #[test]
    fn cumulative_probability_matches_exact_projector_weight() {
        // against the oracle's J = 0 projector on n = 4
        use rand::{Rng, SeedableRng};
        let lattice = Lattice2D::new(2, 2, true);
        let h = heisenberg_hamiltonian::<f64>(&lattice).unwrap();
        let spectrum = crate::oracle::full_spectrum(&h).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(13);
        for _ in 0..5 {
            let amps: Vec<Complex<f64>> = (0..16)
                .map(|_| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let mut state = Statevector::from_amplitudes(4, amps).unwrap();
            state.normalize();
            let weight: f64 = spectrum
                .fidelity_spectrum(&state)
                .unwrap()
                .iter()
                .filter(|p| p.spin == 0.0)
                .map(|p| p.fidelity)
                .sum();
            let report = project_spin_zero(&mut state, 30, &h).unwrap();
            assert!(
                (report.cumulative_probability() - weight).abs() < 1e-8,
                "cumulative {} vs projector weight {weight}",
                report.cumulative_probability()
            );
        }
    }

    #[test]
    fn symmetrization_fixes_the_symmetric_ground_state() {
        let lattice = Lattice2D::new(2, 2, true);
        let h = heisenberg_hamiltonian::<f64>(&lattice).unwrap();
        let spectrum = crate::oracle::full_spectrum(&h).unwrap();
        let ground = spectrum.eigenvector(0);
        let spec = SymmetryGroupSpec::new(lattice).unwrap();
        let mut state = ground.clone();
        let p = symmetrize_translations_mirrors(&mut state, &spec).unwrap();
        assert!((p - 1.0).abs() < 1e-10);
        assert!((state.fidelity(&ground).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn j_squared_basics() {
        // singlet: J^2 = 0
        let v = 1.0 / 2.0f64.sqrt();
        let singlet = Statevector::from_amplitudes(
            2,
            vec![
                Complex::new(0.0, 0.0),
                Complex::new(v, 0.0),
                Complex::new(-v, 0.0),
                Complex::new(0.0, 0.0),
            ],
        )
        .unwrap();
        assert!(j_squared_expectation(&singlet).abs() < 1e-12);

        // |00>: j = 1 -> j(j+1) = 2
        let up2 = Statevector::<f64>::zero(2).unwrap();
        assert!((j_squared_expectation(&up2) - 2.0).abs() < 1e-12);

        // n all-up: (n/2)(n/2+1)
        for n in [4usize, 6, 10] {
            let up = Statevector::<f64>::zero(n).unwrap();
            let j = n as f64 / 2.0;
            assert!((j_squared_expectation(&up) - j * (j + 1.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn spin_zero_leaves_singlet_alone() {
        let h = two_qubit_h();
        let v = 1.0 / 2.0f64.sqrt();
        let mut singlet = Statevector::from_amplitudes(
            2,
            vec![
                Complex::new(0.0, 0.0),
                Complex::new(v, 0.0),
                Complex::new(-v, 0.0),
                Complex::new(0.0, 0.0),
            ],
        )
        .unwrap();
        let report = project_spin_zero(&mut singlet, 3, &h).unwrap();
        assert!((report.cumulative_probability() - 1.0).abs() < 1e-10);
        assert!(j_squared_expectation(&singlet) < 1e-20);
        assert!((crate::qstate::expectation(&singlet, &h).unwrap() + 6.0).abs() < 1e-10);
    }

    #[test]
    fn spin_zero_annihilates_triplet_in_one_iteration() {
        let h = two_qubit_h();
        let v = 1.0 / 2.0f64.sqrt();
        let mut triplet = Statevector::from_amplitudes(
            2,
            vec![
                Complex::new(0.0, 0.0),
                Complex::new(v, 0.0),
                Complex::new(v, 0.0),
                Complex::new(0.0, 0.0),
            ],
        )
        .unwrap();
        let err = project_spin_zero(&mut triplet, 1, &h);
        assert!(matches!(err, Err(Error::AnnihilatedState { .. })));
    }

    #[test]
    fn spin_zero_is_idempotent() {
        // 20 iterations leave a residual J > 0 weight around 1e-12, so the
        // second pass keeps essentially everything.
        let lattice = Lattice2D::new(4, 3, true);
        let h = heisenberg_hamiltonian::<f64>(&lattice).unwrap();
        let mut state = neel_state::<f64>(&lattice).unwrap();
        project_spin_zero(&mut state, 20, &h).unwrap();
        let first = state.clone();
        let report = project_spin_zero(&mut state, 20, &h).unwrap();
        assert!(report.cumulative_probability() > 1.0 - 1e-10);
        assert!((state.fidelity(&first).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn translation_permutation_group_structure() {
        let lattice = Lattice2D::new(4, 3, true);
        let identity: Vec<usize> = (0..12).collect();
        assert_eq!(
            translation_permutation(&lattice, 4, 0).unwrap(),
            identity,
            "dx = nx is the identity"
        );
        let t = translation_permutation(&lattice, 1, 0).unwrap();
        let mut acc = identity.clone();
        for _ in 0..4 {
            acc = compose(&t, &acc);
        }
        assert_eq!(acc, identity, "dx = 1 applied nx times is the identity");

        let open = Lattice2D::new(4, 3, false);
        assert!(matches!(
            translation_permutation(&open, 1, 0),
            Err(Error::NotPeriodic)
        ));
    }

    #[test]
    fn hamiltonian_commutes_with_translation_on_2x2() {
        // explicit commutator on the 16-dim space
        let lattice = Lattice2D::new(2, 2, true);
        let h = heisenberg_hamiltonian::<f64>(&lattice).unwrap();
        let perm = translation_permutation(&lattice, 1, 0).unwrap();
        let dim = 16usize;
        let mut max_dev = 0.0f64;
        for col in 0..dim {
            let basis = Statevector::<f64>::basis_state(4, col).unwrap();
            // H U |b> and U H |b>
            let hu = h.apply(&apply_site_permutation(&basis, &perm).unwrap()).unwrap();
            let uh = apply_site_permutation(&h.apply(&basis).unwrap(), &perm).unwrap();
            for b in 0..dim {
                max_dev = max_dev.max((hu.amplitude(b) - uh.amplitude(b)).norm());
            }
        }
        assert!(max_dev < 1e-12, "commutator deviation {max_dev}");
    }

    #[test]
    fn symmetrize_single_basis_state_gives_uniform_orbit() {
        let lattice = Lattice2D::new(4, 3, true);
        let spec = SymmetryGroupSpec::new(lattice).unwrap();
        let mut state = Statevector::<f64>::basis_state(12, 1).unwrap();
        symmetrize_translations_mirrors(&mut state, &spec).unwrap();
        // orbit of a single flipped spin under translations+mirrors: all 12
        // single-bit states, uniformly weighted
        let expect = (1.0f64 / 12.0).sqrt();
        for s in 0..12 {
            let a = state.amplitude(1 << s);
            assert!((a.norm() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn group_average_is_idempotent_and_hermitian_on_2x2() {
        // On the 16-dim space the projector matrix is cheap to build exactly.
        let lattice = Lattice2D::new(2, 2, true);
        let spec = SymmetryGroupSpec::new(lattice).unwrap();
        let dim = 16usize;
        let mut p = vec![vec![0.0f64; dim]; dim];
        let elements = spec.elements();
        for perm in &elements {
            for b in 0..dim {
                let basis = Statevector::<f64>::basis_state(4, b).unwrap();
                let moved = apply_site_permutation(&basis, perm).unwrap();
                for r in 0..dim {
                    p[r][b] += moved.amplitude(r).re / elements.len() as f64;
                }
            }
        }
        // P^2 = P and P = P^T
        for r in 0..dim {
            for c in 0..dim {
                let mut acc = 0.0;
                for k in 0..dim {
                    acc += p[r][k] * p[k][c];
                }
                assert!((acc - p[r][c]).abs() < 1e-12);
                assert!((p[r][c] - p[c][r]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn group_average_idempotent_action_on_4x3() {
        use rand::{Rng, SeedableRng};
        let lattice = Lattice2D::new(4, 3, true);
        let spec = SymmetryGroupSpec::new(lattice).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(8);
        for _ in 0..5 {
            let amps: Vec<Complex<f64>> = (0..1 << 12)
                .map(|_| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let mut state = Statevector::from_amplitudes(12, amps).unwrap();
            state.normalize();
            symmetrize_translations_mirrors(&mut state, &spec).unwrap();
            let once = state.clone();
            let p = symmetrize_translations_mirrors(&mut state, &spec).unwrap();
            assert!((p - 1.0).abs() < 1e-10, "second projection must keep everything");
            assert!((state.fidelity(&once).unwrap() - 1.0).abs() < 1e-10);
        }
    }
}
