use slconvex_core::convexity::{acoustic_tensor, acoustic_tensor_fd, e_matrix_check, lh_quartic};
use slconvex_core::energy::catalog;
use slconvex_core::grid::log_spaced;
use slconvex_core::sampling::{direction_grid, random_sl2, random_unit, sample_rng};
use slconvex_core::tensor2::tangent_basis;
use slconvex_core::Mat2;

#[test]
fn analytic_tensor_matches_finite_differences() {
    let smooth: Vec<_> = catalog().into_iter().filter(|e| e.smooth).collect();
    assert!(smooth.len() >= 5);
    for e in smooth {
        let psi = e.psi();
        for k in 0..200 {
            let mut rng = sample_rng(99, k);
            let f = random_sl2(&mut rng, 2.0f64.ln());
            let eta = random_unit(&mut rng);
            let q = acoustic_tensor(&psi, &f, eta).unwrap().q;
            let fd = acoustic_tensor_fd(&psi, &f, eta).unwrap();
            let scale = q.norm().max(1.0);
            assert!(q.max_abs_diff(&fd) <= 1e-6 * scale, "{}: {q:?} vs {fd:?}", e.spec.name);
            assert!((q.a12() - q.a21()).abs() <= 1e-12 * scale);
        }
    }
}

#[test]
fn neo_hooke_tensor_is_twice_identity() {
    let psi = slconvex_core::energy::lookup("neo-hooke-inc").unwrap().psi();
    for k in 0..50 {
        let mut rng = sample_rng(5, k);
        let f = random_sl2(&mut rng, 4.0f64.ln());
        let q = acoustic_tensor(&psi, &f, random_unit(&mut rng)).unwrap().q;
        assert!(q.max_abs_diff(&(Mat2::IDENTITY * 2.0)) <= 1e-12);
    }
}

#[test]
fn unsquared_quartic_is_the_tangent_second_derivative() {
    for e in catalog().into_iter().filter(|e| e.smooth) {
        let psi = e.psi();
        for l in [1.2, 2.0, 3.5] {
            let f = Mat2::diag(l, 1.0 / l);
            for eta in direction_grid(12) {
                let xi = tangent_basis(&f, eta).unwrap();
                let dir = Mat2::outer(xi, eta);
                let g = |s: f64| psi.eval((f + dir * s).norm_sq()).unwrap();
                let h = 1e-3;
                let fd = (-g(2.0 * h) + 16.0 * g(h) - 30.0 * g(0.0) + 16.0 * g(-h) - g(-2.0 * h)) / (12.0 * h * h);
                let lh = lh_quartic(&psi, l, 1.0 / l, eta).unwrap();
                // d²/ds² ψ(‖F + sξ⊗η‖²) = 2·direct for unit η.
                assert!(
                    (2.0 * lh.direct - fd).abs() <= 1e-5 * fd.abs().max(1.0),
                    "{} {l} {eta:?}",
                    e.spec.name
                );
                assert!((lh.direct - lh.expanded).abs() <= 1e-12 * lh.direct.abs().max(1.0));
            }
        }
    }
}

#[test]
fn quartic_sign_matches_e_matrix() {
    let dirs = direction_grid(720);
    for e in catalog().into_iter().filter(|e| e.smooth) {
        let psi = e.psi();
        for l in log_spaced(1.01, 8.0, 30) {
            let Ok(check) = e_matrix_check(&psi, l, 1.0 / l, 1e-8) else {
                continue;
            };
            if check.entry_slack.abs() <= 1e-7 {
                continue;
            }
            let min = dirs
                .iter()
                .map(|&eta| lh_quartic(&psi, l, 1.0 / l, eta).unwrap().expanded)
                .fold(f64::INFINITY, f64::min);
            assert_eq!(min >= -1e-8, check.holds, "{} at {l}: {min}", e.spec.name);
        }
    }
}
