//! Property-based invariants: algebraic identities of the 2x2 complex
//! kernel, structure preservation of the plant generator, metric bounds,
//! and exact round-trips of the serialization layer.

use proptest::prelude::*;

use qdt_core::algebra::{c, commutator, hermitian_eig, sqrt_psd, DensityMatrix, Matrix2};
use qdt_core::csvio;
use qdt_core::lindblad::lgks_rhs;
use qdt_core::metrics::{bloch, fidelity_2x2, fidelity_general, von_neumann_entropy};
use qdt_core::scenario::{preset, Scenario};
use qdt_core::sim::TrajectoryRecord;
use qdt_core::sweep::{jh_cost, SweepCell};

/// Entries in the complex unit square keep absolute 1e-14 tolerances
/// meaningful for the exact identities below.
fn complex_matrix() -> impl Strategy<Value = Matrix2> {
    prop::array::uniform8(-1.0..1.0f64).prop_map(|v| {
        Matrix2::new([
            [c(v[0], v[1]), c(v[2], v[3])],
            [c(v[4], v[5]), c(v[6], v[7])],
        ])
    })
}

fn bloch_vector() -> impl Strategy<Value = (f64, f64, f64)> {
    prop::array::uniform3(-1.0..1.0f64).prop_map(|v| {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let s = if norm >= 1.0 { 0.999 / norm } else { 1.0 };
        (s * v[0], s * v[1], s * v[2])
    })
}

fn state_from_bloch(x: f64, y: f64, z: f64) -> DensityMatrix {
    DensityMatrix::new(Matrix2::new([
        [c(0.5 * (1.0 + z), 0.0), c(0.5 * x, 0.5 * y)],
        [c(0.5 * x, -0.5 * y), c(0.5 * (1.0 - z), 0.0)],
    ]))
    .expect("Bloch ball point is a state")
}

fn density() -> impl Strategy<Value = DensityMatrix> {
    bloch_vector().prop_map(|(x, y, z)| state_from_bloch(x, y, z))
}

fn finite_f64() -> impl Strategy<Value = f64> {
    any::<f64>().prop_map(|x| if x.is_finite() { x } else { 0.0 })
}

proptest! {
    #[test]
    fn adjoint_reverses_products(a in complex_matrix(), b in complex_matrix()) {
        let lhs = (a * b).adjoint();
        let rhs = b.adjoint() * a.adjoint();
        prop_assert!((lhs - rhs).frobenius_norm() <= 1e-14);
    }

    #[test]
    fn trace_is_cyclic(a in complex_matrix(), b in complex_matrix()) {
        prop_assert!(((a * b).trace() - (b * a).trace()).norm() <= 1e-14);
    }

    #[test]
    fn commutator_adjoint_swaps_arguments(a in complex_matrix(), b in complex_matrix()) {
        let lhs = commutator(&a, &b).adjoint();
        let rhs = commutator(&b.adjoint(), &a.adjoint());
        prop_assert!((lhs - rhs).frobenius_norm() <= 1e-14);
    }

    #[test]
    fn eigendecomposition_reconstructs(a in complex_matrix()) {
        let h = a.hermitize();
        let eig = hermitian_eig(&h).unwrap();
        prop_assert!(eig.values[0] <= eig.values[1]);
        let back = eig.reconstruct(|x| x);
        prop_assert!((back - h).frobenius_norm() <= 1e-12);
    }

    #[test]
    fn eigenvectors_are_orthonormal(a in complex_matrix()) {
        let eig = hermitian_eig(&a.hermitize()).unwrap();
        let v = &eig.vectors;
        let n0 = v[0][0].norm_sqr() + v[1][0].norm_sqr();
        let n1 = v[0][1].norm_sqr() + v[1][1].norm_sqr();
        let cross = (v[0][0].conj() * v[0][1] + v[1][0].conj() * v[1][1]).norm();
        prop_assert!((n0 - 1.0).abs() <= 1e-12);
        prop_assert!((n1 - 1.0).abs() <= 1e-12);
        prop_assert!(cross <= 1e-12);
    }

    #[test]
    fn sqrt_squares_back(rho in density()) {
        let s = sqrt_psd(rho.matrix()).unwrap();
        prop_assert!((s * s - *rho.matrix()).frobenius_norm() <= 1e-10);
    }

    #[test]
    fn fidelity_routes_agree(r1 in density(), r2 in density()) {
        let f_general = fidelity_general(r1.matrix(), r2.matrix()).unwrap();
        let f_closed = fidelity_2x2(r1.matrix(), r2.matrix()).unwrap();
        prop_assert!((f_general - f_closed).abs() <= 1e-10);
        prop_assert!((0.0..=1.0).contains(&f_closed));
    }

    #[test]
    fn fidelity_is_symmetric(r1 in density(), r2 in density()) {
        let ab = fidelity_2x2(r1.matrix(), r2.matrix()).unwrap();
        let ba = fidelity_2x2(r2.matrix(), r1.matrix()).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12);
    }

    #[test]
    fn self_fidelity_is_one(rho in density()) {
        let f = fidelity_2x2(rho.matrix(), rho.matrix()).unwrap();
        prop_assert!((f - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn entropy_stays_in_range(rho in density()) {
        let s = von_neumann_entropy(rho.matrix()).unwrap();
        prop_assert!(s >= 0.0);
        prop_assert!(s <= std::f64::consts::LN_2 + 1e-12);
    }

    #[test]
    fn bloch_roundtrips_and_stays_in_ball((x, y, z) in bloch_vector()) {
        let rho = state_from_bloch(x, y, z);
        let b = bloch(rho.matrix());
        prop_assert!((b.x - x).abs() <= 1e-15);
        prop_assert!((b.y - y).abs() <= 1e-15);
        prop_assert!((b.z - z).abs() <= 1e-15);
        prop_assert!(b.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn plant_generator_is_traceless_and_hermitian(rho in density(), u in -10.0..10.0f64) {
        let p = preset(Scenario::LowEntropy);
        let d = lgks_rhs(&p.plant, rho.matrix(), u);
        prop_assert!(d.trace().norm() <= 1e-13 * (1.0 + u.abs()));
        prop_assert!(d.herm_residual() <= 1e-13 * (1.0 + u.abs()));
    }

    #[test]
    fn plant_generator_is_linear_in_rho(
        a in complex_matrix(),
        b in complex_matrix(),
        alpha in -2.0..2.0f64,
        beta in -2.0..2.0f64,
        u in -10.0..10.0f64,
    ) {
        let p = preset(Scenario::LowEntropy);
        let ha = a.hermitize();
        let hb = b.hermitize();
        let mixed = lgks_rhs(&p.plant, &(ha * alpha + hb * beta), u);
        let split = lgks_rhs(&p.plant, &ha, u) * alpha + lgks_rhs(&p.plant, &hb, u) * beta;
        prop_assert!((mixed - split).frobenius_norm() <= 1e-12 * (1.0 + u.abs()));
    }

    #[test]
    fn late_window_cost_scales_linearly(
        es in prop::collection::vec(0.0..1.0f64, 2..50),
        h in 1e-3..1.0f64,
        scale in 0.0..10.0f64,
    ) {
        let make = |k: f64| -> Vec<TrajectoryRecord> {
            es.iter()
                .enumerate()
                .map(|(i, &e)| {
                    let mut v = [0.0_f64; TrajectoryRecord::FIELD_COUNT];
                    v[0] = i as f64 * h;
                    v[1] = k * e;
                    TrajectoryRecord::from_values(v)
                })
                .collect()
        };
        let window = (0.0, (es.len() - 1) as f64 * h);
        let base = jh_cost(&make(1.0), window).unwrap();
        let scaled = jh_cost(&make(scale), window).unwrap();
        prop_assert!((scaled - scale * base).abs() <= 1e-12 * (1.0 + scaled.abs()));
    }

    #[test]
    fn trajectory_csv_roundtrips_bitwise(
        rows in prop::collection::vec(prop::array::uniform17(finite_f64()), 0..20)
    ) {
        let records: Vec<_> = rows.iter().map(|&v| TrajectoryRecord::from_values(v)).collect();
        let text = csvio::trajectory_to_csv(&records);
        let back = csvio::trajectory_from_csv(&text).unwrap();
        prop_assert_eq!(back.len(), records.len());
        for (a, b) in records.iter().zip(&back) {
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn sweep_csv_roundtrips_bitwise(
        rows in prop::collection::vec(
            (1e-10..1e10f64, 0.0..3000.0f64, finite_f64(), any::<bool>()),
            0..20,
        )
    ) {
        let cells: Vec<_> = rows
            .iter()
            .map(|&(p0_scalar, beta, jh, converged)| SweepCell {
                p0_scalar,
                beta,
                jh: if converged { jh.abs() } else { f64::INFINITY },
                converged,
            })
            .collect();
        let text = csvio::sweep_to_csv(&cells);
        let back = csvio::sweep_from_csv(&text).unwrap();
        prop_assert_eq!(back, cells);
    }
}
