//! Classical exact-diagonalization reference: full spectra, fidelity
//! spectra, total-spin labeling, symmetry-sector dimensions, and gaps.
//!
//! Both model Hamiltonians commute with J_z, and every sigma.sigma term is
//! real in the computational basis, so the full matrix splits into real
//! symmetric blocks of fixed J_z. Each block is diagonalized densely; the
//! largest block at the reference scale (n = 12) is 924-dimensional.

use nalgebra::{DMatrix, RealField};
use num_complex::Complex;
use num_traits::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{heisenberg_hamiltonian, Lattice2D, SpinHamiltonian};
use crate::qstate::Statevector;
use crate::real::Real;
use crate::symmetry::SymmetryGroupSpec;

/// Dense diagonalization bound.
pub const MAX_DENSE_QUBITS: usize = 14;

/// Absolute eigenvalue tolerance for degeneracy detection at f64; far above
/// the diagonalization residual and far below any physical gap here. Wider
/// scalars scale it with their epsilon.
pub const CLUSTER_TOLERANCE: f64 = 1e-8;

fn cluster_tolerance<R: Real>() -> R {
    Float::max(R::lit(CLUSTER_TOLERANCE), R::epsilon() * R::lit(1e4))
}

fn label_tolerance<R: Real>() -> R {
    Float::max(R::lit(1e-6), R::epsilon() * R::lit(1e5))
}

/// Basis states of one J_z sector (fixed popcount), ascending.
fn block_basis(n_qubits: usize, down_spins: usize) -> Vec<usize> {
    (0..1usize << n_qubits)
        .filter(|b| b.count_ones() as usize == down_spins)
        .collect()
}

/// Dense real-symmetric matrix of `sum_t c_t sigma_i.sigma_j` restricted to
/// a fixed-popcount block: z_i z_j signs on the diagonal, amplitude 2c
/// between states whose bits differ at (i, j).
fn block_matrix<R: Real + RealField>(
    basis: &[usize],
    terms: &[(usize, usize, R)],
    diag_shift: R,
) -> DMatrix<R> {
    let dim = basis.len();
    let mut m = DMatrix::<R>::zeros(dim, dim);
    for (row, &b) in basis.iter().enumerate() {
        m[(row, row)] += diag_shift;
        for &(i, j, c) in terms {
            let bi = 1usize << i;
            let bj = 1usize << j;
            if (b & bi == 0) == (b & bj == 0) {
                m[(row, row)] += c;
            } else {
                m[(row, row)] -= c;
                let partner = b ^ bi ^ bj;
                let col = basis.binary_search(&partner).expect("partner stays in block");
                m[(row, col)] += c + c;
            }
        }
    }
    m
}

fn hamiltonian_terms<R: Real>(h: &SpinHamiltonian<R>) -> Vec<(usize, usize, R)> {
    h.terms().iter().map(|t| (t.i, t.j, t.coefficient)).collect()
}

/// All-pairs terms with coefficient 1/2; together with the 3n/4 diagonal
/// shift this is J^2 = (sum_i sigma_i / 2)^2.
fn j_squared_terms<R: Real>(n: usize) -> Vec<(usize, usize, R)> {
    let half = R::lit(0.5);
    let mut terms = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            terms.push((i, j, half));
        }
    }
    terms
}

/// Sorted eigen-decomposition of a real symmetric matrix.
fn eigen_sorted<R: Real + RealField>(m: DMatrix<R>) -> (Vec<R>, DMatrix<R>) {
    let dim = m.nrows();
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("eigenvalues are finite")
    });
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::<R>::zeros(dim, dim);
    for (new, &old) in order.iter().enumerate() {
        vectors.set_column(new, &eig.eigenvectors.column(old));
    }
    (values, vectors)
}

/// One J_z block of the decomposition.
#[derive(Clone, Debug)]
pub struct JzBlock<R: Real> {
    /// 2 m for the block (m = n/2 - popcount).
    pub m_twice: i32,
    pub basis: Vec<usize>,
    /// Eigenvector coefficients, one column per kept eigenstate.
    pub vectors: DMatrix<R>,
}

/// One eigenstate in the assembled spectrum.
#[derive(Clone, Copy, Debug)]
pub struct SpectrumEntry<R> {
    pub eigenvalue: R,
    /// Index into `SpectrumAnalysis::blocks`.
    pub block: usize,
    /// Column within the block's eigenvector matrix.
    pub column: usize,
    /// Degenerate-cluster id (clusters are basis-independent; individual
    /// eigenvectors inside one are not).
    pub cluster: usize,
    /// 2 S from diagonalizing J^2 within the degenerate cluster.
    pub spin_twice: u32,
}

/// Full eigen-decomposition with per-eigenstate J_z, total-spin label, and
/// degeneracy grouping.
#[derive(Clone, Debug)]
pub struct SpectrumAnalysis<R: Real> {
    n_qubits: usize,
    blocks: Vec<JzBlock<R>>,
    entries: Vec<SpectrumEntry<R>>,
    n_clusters: usize,
}

/// (eigenvalue, fidelity, total spin S) row of a fidelity spectrum.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FidelityPoint<R> {
    pub eigenvalue: R,
    pub fidelity: R,
    pub spin: R,
    pub cluster: usize,
}

impl<R: Real + RealField> SpectrumAnalysis<R> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn entries(&self) -> &[SpectrumEntry<R>] {
        &self.entries
    }

    pub fn eigenvalue(&self, k: usize) -> R {
        self.entries[k].eigenvalue
    }

    pub fn ground_energy(&self) -> R {
        self.entries[0].eigenvalue
    }

    /// Total spin S of eigenstate k.
    pub fn spin(&self, k: usize) -> R {
        R::lit(f64::from(self.entries[k].spin_twice) / 2.0)
    }

    /// J_z eigenvalue m of eigenstate k.
    pub fn jz(&self, k: usize) -> R {
        R::lit(f64::from(self.blocks[self.entries[k].block].m_twice) / 2.0)
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    /// <eigenstate_k | state>.
    pub fn overlap(&self, state: &Statevector<R>, k: usize) -> Result<Complex<R>> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.n_qubits,
                found: state.dim(),
            });
        }
        let entry = &self.entries[k];
        let block = &self.blocks[entry.block];
        let col = block.vectors.column(entry.column);
        let mut acc = Complex::new(R::zero(), R::zero());
        for (r, &b) in block.basis.iter().enumerate() {
            acc += state.amplitude(b).conj().scale(col[r]);
        }
        Ok(acc)
    }

    /// Eigenstate k embedded in the full 2^n space.
    pub fn eigenvector(&self, k: usize) -> Statevector<R> {
        let entry = &self.entries[k];
        let block = &self.blocks[entry.block];
        let col = block.vectors.column(entry.column);
        let mut amps = vec![Complex::new(R::zero(), R::zero()); 1 << self.n_qubits];
        for (r, &b) in block.basis.iter().enumerate() {
            amps[b] = Complex::new(col[r], R::zero());
        }
        Statevector::from_amplitudes(self.n_qubits, amps).expect("block basis is in range")
    }

    /// Per-eigenstate fidelities |<psi|phi_k>|^2; they sum to 1 for any
    /// normalized input.
    pub fn fidelity_spectrum(&self, state: &Statevector<R>) -> Result<Vec<FidelityPoint<R>>> {
        let mut out = Vec::with_capacity(self.len());
        for k in 0..self.len() {
            let fidelity = self.overlap(state, k)?.norm_sqr();
            out.push(FidelityPoint {
                eigenvalue: self.entries[k].eigenvalue,
                fidelity,
                spin: self.spin(k),
                cluster: self.entries[k].cluster,
            });
        }
        Ok(out)
    }

    /// Total weight on the degenerate cluster containing eigenstate k; this
    /// is the basis-independent fidelity against a possibly degenerate
    /// level.
    pub fn cluster_fidelity(&self, state: &Statevector<R>, k: usize) -> Result<R> {
        let cluster = self.entries[k].cluster;
        let mut acc = R::zero();
        for (idx, e) in self.entries.iter().enumerate() {
            if e.cluster == cluster {
                acc += self.overlap(state, idx)?.norm_sqr();
            }
        }
        Ok(acc)
    }

    /// |<ground|state>|^2 summed over the ground cluster.
    pub fn ground_fidelity(&self, state: &Statevector<R>) -> Result<R> {
        self.cluster_fidelity(state, 0)
    }

    /// Max residual ||H v - lambda v|| over all eigenpairs, block by block.
    pub fn max_residual(&self, h: &SpinHamiltonian<R>) -> R {
        let terms = hamiltonian_terms(h);
        let mut worst = R::zero();
        for block in &self.blocks {
            let m = block_matrix(&block.basis, &terms, R::zero());
            let hv = &m * &block.vectors;
            for c in 0..block.vectors.ncols() {
                // eigenvalue via Rayleigh quotient keeps this independent of
                // entry bookkeeping
                let v = block.vectors.column(c);
                let lambda = v.dot(&hv.column(c));
                let res = (hv.column(c) - v * lambda).norm();
                worst = Float::max(worst, res);
            }
        }
        worst
    }

    /// Max deviation from orthonormality within each block (cross-block
    /// pairs are orthogonal by construction).
    pub fn max_orthonormality_deviation(&self) -> R {
        let mut worst = R::zero();
        for block in &self.blocks {
            let g = block.vectors.transpose() * &block.vectors;
            for r in 0..g.nrows() {
                for c in 0..g.ncols() {
                    let want = if r == c { R::one() } else { R::zero() };
                    worst = Float::max(worst, Float::abs(g[(r, c)] - want));
                }
            }
        }
        worst
    }
}

/// Complete eigen-decomposition of a sigma.sigma Hamiltonian, assembled from
/// its J_z blocks, with degeneracy clustering and total-spin labels.
pub fn full_spectrum<R: Real + RealField>(h: &SpinHamiltonian<R>) -> Result<SpectrumAnalysis<R>> {
    let n = h.n_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(Error::SizeExceeded {
            requested: n,
            max: MAX_DENSE_QUBITS,
        });
    }
    let terms = hamiltonian_terms(h);

    let mut blocks = Vec::with_capacity(n + 1);
    let mut raw: Vec<(R, usize, usize)> = Vec::with_capacity(1 << n);
    for down in 0..=n {
        let basis = block_basis(n, down);
        let (values, vectors) = eigen_sorted(block_matrix(&basis, &terms, R::zero()));
        let block_idx = blocks.len();
        for (col, &v) in values.iter().enumerate() {
            raw.push((v, block_idx, col));
        }
        blocks.push(JzBlock {
            m_twice: n as i32 - 2 * down as i32,
            basis,
            vectors,
        });
    }
    raw.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite eigenvalues"));

    // degeneracy clustering at absolute tolerance
    let tol = cluster_tolerance::<R>();
    let mut entries: Vec<SpectrumEntry<R>> = Vec::with_capacity(raw.len());
    let mut cluster = 0usize;
    for (k, &(value, block, column)) in raw.iter().enumerate() {
        if k > 0 && value - raw[k - 1].0 > tol {
            cluster += 1;
        }
        entries.push(SpectrumEntry {
            eigenvalue: value,
            block,
            column,
            cluster,
            spin_twice: 0,
        });
    }
    let n_clusters = cluster + 1;

    let mut analysis = SpectrumAnalysis {
        n_qubits: n,
        blocks,
        entries,
        n_clusters,
    };
    label_spins(&mut analysis)?;
    Ok(analysis)
}

/// Assign S by diagonalizing J^2 within each degenerate eigenvalue cluster
/// (independently per J_z block, which J^2 preserves). Eigenvectors inside a
/// cluster are rotated so that each carries a sharp label.
fn label_spins<R: Real + RealField>(analysis: &mut SpectrumAnalysis<R>) -> Result<()> {
    let n = analysis.n_qubits;
    let j2_terms = j_squared_terms::<R>(n);
    let diag_shift = R::lit(3.0 * n as f64 / 4.0);

    // J^2 in block coordinates, built once per block
    let j2_blocks: Vec<DMatrix<R>> = analysis
        .blocks
        .iter()
        .map(|b| block_matrix(&b.basis, &j2_terms, diag_shift))
        .collect();

    let label_tol = label_tolerance::<R>();
    let entry_count = analysis.entries.len();
    for cluster in 0..analysis.n_clusters {
        let members: Vec<usize> = (0..entry_count)
            .filter(|&k| analysis.entries[k].cluster == cluster)
            .collect();
        // group members by block
        let mut by_block: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for &k in &members {
            by_block.entry(analysis.entries[k].block).or_default().push(k);
        }
        for (block_idx, group) in by_block {
            let j2m = &j2_blocks[block_idx];
            let cols: Vec<usize> = group
                .iter()
                .map(|&k| analysis.entries[k].column)
                .collect();
            let g = cols.len();
            let block = &analysis.blocks[block_idx];
            // K[p][q] = <v_p | J^2 | v_q>
            let mut k_mat = DMatrix::<R>::zeros(g, g);
            let j2_cols: Vec<_> = cols.iter().map(|&c| j2m * block.vectors.column(c)).collect();
            for p in 0..g {
                for q in 0..g {
                    k_mat[(p, q)] = block.vectors.column(cols[p]).dot(&j2_cols[q]);
                }
            }
            let (j2_values, rotation) = if g == 1 {
                (vec![k_mat[(0, 0)]], DMatrix::identity(1, 1))
            } else {
                eigen_sorted(k_mat)
            };
            // rotate the stored eigenvectors so each has sharp J^2
            if g > 1 {
                let block = &mut analysis.blocks[block_idx];
                let old: Vec<_> = cols.iter().map(|&c| block.vectors.column(c).clone_owned()).collect();
                for (e, &c) in cols.iter().enumerate() {
                    let mut new_col = nalgebra::DVector::<R>::zeros(block.basis.len());
                    for (p, v) in old.iter().enumerate() {
                        new_col += v * rotation[(p, e)];
                    }
                    block.vectors.set_column(c, &new_col);
                }
            }
            for (e, &k) in group.iter().enumerate() {
                let j2 = j2_values[e];
                let s_twice_f = Float::sqrt(R::one() + R::lit(4.0) * Float::max(j2, R::zero()))
                    - R::one();
                let s_twice = Float::round(s_twice_f).to_f64_lossy() as i64;
                let expect = R::lit((s_twice * (s_twice + 2)) as f64 / 4.0);
                if Float::abs(j2 - expect) > label_tol {
                    return Err(Error::SpinLabelResidual {
                        index: k,
                        residual: Float::abs(j2 - expect).to_f64_lossy(),
                    });
                }
                analysis.entries[k].spin_twice = s_twice as u32;
            }
        }
    }
    Ok(())
}

/// Total-spin label per eigenstate, in spectrum order.
pub fn spin_labels<R: Real + RealField>(spectrum: &SpectrumAnalysis<R>) -> Vec<R> {
    (0..spectrum.len()).map(|k| spectrum.spin(k)).collect()
}

/// Dimension and lowest energies of one nested symmetry sector.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SectorInfo<R> {
    pub dimension: usize,
    pub lowest: R,
    pub first_excited: Option<R>,
}

/// Nested sector census: full space, J_z = 0, J = 0 within J_z = 0, and the
/// fully symmetric (k = 0, mirror-even) subspace of J = 0.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SectorCensus<R> {
    pub full: SectorInfo<R>,
    pub jz_zero: SectorInfo<R>,
    pub j_zero: SectorInfo<R>,
    pub symmetric: SectorInfo<R>,
}

fn sector_info<R: Real>(dimension: usize, eigenvalues: &[R]) -> SectorInfo<R> {
    let lowest = eigenvalues[0];
    let tol = cluster_tolerance::<R>();
    let first_excited = eigenvalues
        .iter()
        .copied()
        .find(|&v| v - lowest > tol);
    SectorInfo {
        dimension,
        lowest,
        first_excited,
    }
}

/// Census of the Heisenberg model on `lattice`: dimensions come from
/// explicit projector ranks, sector minima from diagonalizing H projected
/// into each nested sector basis.
pub fn sector_census<R: Real + RealField>(lattice: &Lattice2D) -> Result<SectorCensus<R>> {
    let n = lattice.n_sites();
    if n > MAX_DENSE_QUBITS {
        return Err(Error::SizeExceeded {
            requested: n,
            max: MAX_DENSE_QUBITS,
        });
    }
    if n % 2 != 0 {
        return Err(Error::OddSiteCount { sites: n });
    }
    let h = heisenberg_hamiltonian::<R>(lattice)?;
    let terms = hamiltonian_terms(&h);

    // full spectrum for the outer two sectors
    let spectrum = full_spectrum(&h)?;
    let all_values: Vec<R> = spectrum.entries.iter().map(|e| e.eigenvalue).collect();
    let full = sector_info(1 << n, &all_values);

    // J_z = 0 block
    let basis = block_basis(n, n / 2);
    let h_block = block_matrix(&basis, &terms, R::zero());
    let (jz_values, _) = eigen_sorted(h_block.clone());
    let jz_zero = sector_info(basis.len(), &jz_values);

    // J = 0 subspace of the block: eigenvectors of J^2 with eigenvalue 0
    let j2_block = block_matrix(
        &basis,
        &j_squared_terms::<R>(n),
        R::lit(3.0 * n as f64 / 4.0),
    );
    let (j2_values, j2_vectors) = eigen_sorted(j2_block);
    let j_dim = j2_values
        .iter()
        .take_while(|&&v| Float::abs(v) < R::lit(0.5))
        .count();
    let v = j2_vectors.columns(0, j_dim).clone_owned();
    let h_j0 = v.transpose() * &h_block * &v;
    let (j0_values, _) = eigen_sorted(h_j0);
    let j_zero = sector_info(j_dim, &j0_values);

    // fully symmetric subspace: group-average projector restricted to J = 0
    let spec = SymmetryGroupSpec::new(lattice.clone())?;
    let elements = spec.elements();
    let weight = R::one() / R::lit(elements.len() as f64);
    // P * V in block coordinates (site permutations preserve popcount)
    let index_of = |b: usize| basis.binary_search(&b).expect("permutation stays in block");
    let mut pv = DMatrix::<R>::zeros(basis.len(), j_dim);
    for perm in &elements {
        for (row, &b) in basis.iter().enumerate() {
            let mut target = 0usize;
            for (s, &t) in perm.iter().enumerate() {
                if b & (1 << s) != 0 {
                    target |= 1 << t;
                }
            }
            let trow = index_of(target);
            for c in 0..j_dim {
                pv[(trow, c)] += weight * v[(row, c)];
            }
        }
    }
    // M = V^T P V is the projector in J=0 coordinates; rank = dimension
    let m = v.transpose() * &pv;
    let (m_values, m_vectors) = eigen_sorted(m);
    let rank_tol = Float::max(R::lit(1e-10), R::epsilon() * R::lit(100.0));
    let mut sym_dim = 0usize;
    for &lam in &m_values {
        let dist0 = Float::abs(lam);
        let dist1 = Float::abs(lam - R::one());
        if dist0 > rank_tol && dist1 > rank_tol {
            return Err(Error::AmbiguousClustering {
                eigenvalue: lam.to_f64_lossy(),
                gap: Float::min(dist0, dist1).to_f64_lossy(),
                tolerance: 1e-10,
            });
        }
        if dist1 <= rank_tol {
            sym_dim += 1;
        }
    }
    let y = &v * m_vectors.columns(j_dim - sym_dim, sym_dim).clone_owned();
    let h_sym = y.transpose() * &h_block * &y;
    let (sym_values, _) = eigen_sorted(h_sym);
    let symmetric = sector_info(sym_dim, &sym_values);

    Ok(SectorCensus {
        full,
        jz_zero,
        j_zero,
        symmetric,
    })
}
