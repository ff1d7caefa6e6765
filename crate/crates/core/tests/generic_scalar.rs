//! The numeric core is generic over the scalar; exercise the f32
//! instantiation end to end at loose tolerances.

use spinprep_core::models::{heisenberg_hamiltonian, neel_state, Lattice2D};
use spinprep_core::oracle::full_spectrum;
use spinprep_core::qstate::expectation;
use spinprep_core::symmetry::{j_squared_expectation, project_spin_zero};

#[test]
fn f32_pipeline_smoke() {
    let lattice = Lattice2D::new(2, 2, true);
    let h = heisenberg_hamiltonian::<f32>(&lattice).unwrap();
    let mut state = neel_state::<f32>(&lattice).unwrap();
    let e0 = expectation(&state, &h).unwrap();
    assert!((e0 + 8.0).abs() < 1e-4, "Neel energy {e0}");

    project_spin_zero(&mut state, 6, &h).unwrap();
    assert!(j_squared_expectation(&state) < 1e-3);
    let e1 = expectation(&state, &h).unwrap();
    assert!(e1 < e0, "projection must lower the energy: {e0} -> {e1}");

    let spectrum = full_spectrum(&h).unwrap();
    assert!(spectrum.max_residual(&h) < 1e-3);
    let fid = spectrum.ground_fidelity(&state).unwrap();
    assert!(fid > 0.5, "projected 2x2 ground fidelity {fid}");
}
