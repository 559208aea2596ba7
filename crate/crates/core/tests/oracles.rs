use num_complex::Complex64;
use slitsle::experiments::{fd_green_oracle, fd_harmonic_measures, mc_harmonic_measure_oracle};
use slitsle::geometry::{discretize, make_domain};
use slitsle::potential::{LayerSolver, SolverOptions};

fn probes() -> [Complex64; 4] {
    [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.25, 0.55),
        Complex64::new(-0.6, 0.1),
        Complex64::new(0.1, -0.7),
    ]
}

#[test]
fn layer_solver_agrees_with_finite_volumes() {
    let domain = make_domain(&[(0.5, 0.0, 2.0), (0.8, 3.0, 1.5)]).unwrap();
    let solver = LayerSolver::new(&discretize(&domain, 256, 64).unwrap(), SolverOptions::default()).unwrap();
    let pole = Complex64::new(-0.3, -0.2);
    let green = solver.green(pole).unwrap();
    let omega = solver.harmonic_measures().unwrap();
    let h = 1.0 / 200.0;
    let fd_green = fd_green_oracle(&domain, pole, h).unwrap();
    let fd_omega = fd_harmonic_measures(&domain, h).unwrap();
    for w in probes() {
        assert!((green.real(w) - fd_green.value(w)).abs() < 2e-3, "G at {w}");
        for j in 0..2 {
            assert!((omega.slits[j].value(w) - fd_omega[j].value(w)).abs() < 2e-3, "omega_{j} at {w}");
        }
    }
}

#[test]
fn walk_on_spheres_brackets_the_harmonic_measures() {
    let domain = make_domain(&[(0.45, 0.5, 2.5), (0.75, 3.5, 1.5)]).unwrap();
    let omega = LayerSolver::new(&discretize(&domain, 256, 64).unwrap(), SolverOptions::default())
        .unwrap()
        .harmonic_measures()
        .unwrap();
    for (i, w) in probes().into_iter().enumerate() {
        let mc = mc_harmonic_measure_oracle(&domain, w, 20_000, 100 + i as u64);
        let circle = 1.0 - omega.values(w).iter().sum::<f64>();
        assert!((mc.frequencies[0] - circle).abs() < 4.0 * mc.std_errors[0].max(1e-3), "circle at {w}");
        for j in 0..2 {
            let z = (mc.frequencies[j + 1] - omega.values(w)[j]) / mc.std_errors[j + 1].max(1e-3);
            assert!(z.abs() < 4.0, "slit {} at {w}: {z:.2} s.e.", j + 1);
        }
    }
}
