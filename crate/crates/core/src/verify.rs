//! Built-in self checks, runnable from the CLI.
//!
//! Each check exercises one algebraic identity or closed-loop invariant on
//! randomized inputs with a fixed seed, so a failure is reproducible. The
//! fast mode shrinks draw counts and horizons for smoke testing; the full
//! mode is the one worth trusting.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{c, commutator, hermitian_eig, sqrt_psd, DensityMatrix, Matrix2};
use crate::mat3;
use crate::metrics::{fidelity_2x2, fidelity_general, von_neumann_entropy};
use crate::rcac::filter_dot;
use crate::scenario::{preset, Scenario};
use crate::sim::{rk4_step, simulate, simulate_with_oracle, SimConfig};

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Random matrix with entries uniform in the complex unit square. Entries
/// of order one keep the 1e-14 identity tolerances meaningful.
pub fn random_complex_matrix(rng: &mut impl Rng) -> Matrix2 {
    let mut e = [[c(0.0, 0.0); 2]; 2];
    for row in &mut e {
        for x in row.iter_mut() {
            *x = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    Matrix2::new(e)
}

/// Random state drawn uniformly from the (slightly shrunken) Bloch ball.
pub fn random_density(rng: &mut impl Rng) -> DensityMatrix {
    let (x, y, z) = loop {
        let x = rng.random_range(-1.0..1.0);
        let y = rng.random_range(-1.0..1.0);
        let z = rng.random_range(-1.0..1.0);
        if x * x + y * y + z * z < 1.0 {
            break (0.9999 * x, 0.9999 * y, 0.9999 * z);
        }
    };
    let m = Matrix2::new([
        [c(0.5 * (1.0 + z), 0.0), c(0.5 * x, 0.5 * y)],
        [c(0.5 * x, -0.5 * y), c(0.5 * (1.0 - z), 0.0)],
    ]);
    DensityMatrix::new(m).expect("point inside the Bloch ball is a state")
}

fn result(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed,
        detail,
    }
}

fn check_adjoint_product_reversal(rng: &mut ChaCha8Rng, draws: usize) -> CheckResult {
    let mut worst = 0.0_f64;
    for _ in 0..draws {
        let a = random_complex_matrix(rng);
        let b = random_complex_matrix(rng);
        let lhs = (a * b).adjoint();
        let rhs = b.adjoint() * a.adjoint();
        worst = worst.max((lhs - rhs).frobenius_norm());
    }
    result(
        "adjoint-product-reversal",
        worst <= 1e-14,
        format!("max ||(AB)^H - B^H A^H|| = {worst:.2e} over {draws} draws"),
    )
}

fn check_trace_cyclicity(rng: &mut ChaCha8Rng, draws: usize) -> CheckResult {
    let mut worst = 0.0_f64;
    for _ in 0..draws {
        let a = random_complex_matrix(rng);
        let b = random_complex_matrix(rng);
        worst = worst.max(((a * b).trace() - (b * a).trace()).norm());
    }
    result(
        "trace-cyclicity",
        worst <= 1e-14,
        format!("max |tr(AB) - tr(BA)| = {worst:.2e} over {draws} draws"),
    )
}

fn check_commutator_adjoint(rng: &mut ChaCha8Rng, draws: usize) -> CheckResult {
    let mut worst = 0.0_f64;
    for _ in 0..draws {
        let a = random_complex_matrix(rng);
        let b = random_complex_matrix(rng);
        let lhs = commutator(&a, &b).adjoint();
        let rhs = commutator(&b.adjoint(), &a.adjoint());
        worst = worst.max((lhs - rhs).frobenius_norm());
    }
    result(
        "commutator-adjoint-identity",
        worst <= 1e-14,
        format!("max ||[A,B]^H - [B^H,A^H]|| = {worst:.2e} over {draws} draws"),
    )
}

fn check_eigendecomposition(rng: &mut ChaCha8Rng, draws: usize) -> CheckResult {
    let mut worst = 0.0_f64;
    let mut failures = 0usize;
    for _ in 0..draws {
        let h = random_complex_matrix(rng).hermitize();
        match hermitian_eig(&h) {
            Ok(eig) => {
                let back = eig.reconstruct(|x| x);
                worst = worst.max((back - h).frobenius_norm());
            }
            Err(_) => failures += 1,
        }
    }
    result(
        "eigendecomposition-reconstruction",
        worst <= 1e-12 && failures == 0,
        format!("max reconstruction residual {worst:.2e}, {failures} rejections, {draws} draws"),
    )
}

fn check_sqrt_reconstruction(rng: &mut ChaCha8Rng, draws: usize) -> CheckResult {
    let mut worst = 0.0_f64;
    let mut failures = 0usize;
    for _ in 0..draws {
        let rho = random_density(rng);
        match sqrt_psd(rho.matrix()) {
            Ok(s) => worst = worst.max((s * s - *rho.matrix()).frobenius_norm()),
            Err(_) => failures += 1,
        }
    }
    result(
        "psd-sqrt-reconstruction",
        worst <= 1e-10 && failures == 0,
        format!("max ||sqrt(rho)^2 - rho|| = {worst:.2e}, {failures} rejections, {draws} draws"),
    )
}

fn check_fidelity_routes(rng: &mut ChaCha8Rng, draws: usize) -> CheckResult {
    let mut worst = 0.0_f64;
    let mut bounds_ok = true;
    let mut failures = 0usize;
    for _ in 0..draws {
        let r1 = random_density(rng);
        let r2 = random_density(rng);
        let general = fidelity_general(r1.matrix(), r2.matrix());
        let closed = fidelity_2x2(r1.matrix(), r2.matrix());
        match (general, closed) {
            (Ok(f1), Ok(f2)) => {
                worst = worst.max((f1 - f2).abs());
                bounds_ok &= (0.0..=1.0).contains(&f1) && (0.0..=1.0).contains(&f2);
            }
            _ => failures += 1,
        }
    }
    result(
        "fidelity-route-agreement",
        worst <= 1e-10 && bounds_ok && failures == 0,
        format!(
            "max route disagreement {worst:.2e}, bounds {}, {failures} rejections, {draws} draws",
            if bounds_ok { "held" } else { "violated" }
        ),
    )
}

fn check_entropy_anchors() -> CheckResult {
    // Frozen reference values for the stock states.
    let pure = Matrix2::from_reals([[1.0, 0.0], [0.0, 0.0]]);
    let mixed = Matrix2::from_reals([[0.5, 0.0], [0.0, 0.5]]);
    let p = preset(Scenario::LowEntropy);
    let h = preset(Scenario::HighEntropy);
    let cases = [
        (von_neumann_entropy(&pure), 0.0),
        (von_neumann_entropy(&mixed), std::f64::consts::LN_2),
        (
            von_neumann_entropy(p.plant.rho0.matrix()),
            0.4532403215322257,
        ),
        (
            von_neumann_entropy(p.sim.rho_d.matrix()),
            0.10140694825500499,
        ),
        (
            von_neumann_entropy(h.sim.rho_d.matrix()),
            0.6693037666019499,
        ),
    ];
    let mut worst = 0.0_f64;
    let mut failures = 0usize;
    for (got, want) in cases {
        match got {
            Ok(s) => worst = worst.max((s - want).abs()),
            Err(_) => failures += 1,
        }
    }
    result(
        "entropy-anchors",
        worst <= 1e-12 && failures == 0,
        format!("max anchor deviation {worst:.2e}, {failures} rejections"),
    )
}

fn check_filter_step_response() -> CheckResult {
    // Unit step into 1/(s + beta) from rest: x(t) = (1 - exp(-beta t)) / beta.
    let beta = 2000.0;
    let dt = 1e-4;
    let mut x = [0.0_f64];
    let mut worst = 0.0_f64;
    let rhs = |y: &[f64; 1]| Ok([filter_dot(beta, y[0], 1.0)]);
    for i in 1..=50 {
        x = rk4_step(&rhs, &x, dt).expect("filter rhs is total");
        let t = i as f64 * dt;
        let exact = (1.0 - (-beta * t).exp()) / beta;
        worst = worst.max((x[0] - exact).abs() / exact);
    }
    // RK4's own truncation at beta dt = 0.2 contributes ~1e-5 early in the
    // transient; a wrong pole or gain would deviate by 1e-2 or worse.
    result(
        "filter-pole-step-response",
        worst <= 1e-4,
        format!("max relative deviation from analytic step response {worst:.2e}"),
    )
}

fn check_closed_loop_conservation(fast: bool) -> CheckResult {
    let p = preset(Scenario::LowEntropy);
    let sim = SimConfig {
        t_final: if fast { 2.0 } else { 10.0 },
        ..p.sim.clone()
    };
    match simulate(&p.plant, &p.rcac, &sim) {
        Ok(records) => {
            let max_trace = records
                .iter()
                .map(|r| r.trace_residual)
                .fold(0.0_f64, f64::max);
            let max_herm = records
                .iter()
                .map(|r| r.herm_residual)
                .fold(0.0_f64, f64::max);
            let min_eig = records
                .iter()
                .map(|r| r.min_eig_rho)
                .fold(f64::INFINITY, f64::min);
            let passed = max_trace <= crate::sim::TOL_RECORD_TRACE
                && max_herm <= crate::sim::TOL_RECORD_HERM
                && min_eig >= crate::sim::MIN_EIG_FLOOR;
            result(
                "closed-loop-conservation",
                passed,
                format!(
                    "over {:.0} s: max |tr-1| = {max_trace:.2e}, max herm drift = {max_herm:.2e}, \
min eig = {min_eig:.2e}",
                    sim.t_final
                ),
            )
        }
        Err(e) => result("closed-loop-conservation", false, format!("run failed: {e}")),
    }
}

fn check_adaptation_oracle(fast: bool) -> CheckResult {
    let p = preset(Scenario::LowEntropy);
    let sim = SimConfig {
        t_final: if fast { 2.0 } else { 10.0 },
        ..p.sim.clone()
    };
    match simulate_with_oracle(&p.plant, &p.rcac, &sim) {
        Ok((_, samples)) => {
            let mut worst_theta = 0.0_f64;
            let mut worst_pa = 0.0_f64;
            for s in &samples {
                let diff = mat3::vec_norm(&mat3::vec_sub(
                    &s.theta.as_array(),
                    &s.theta_oracle.as_array(),
                ));
                let scale = 1.0 + mat3::vec_norm(&s.theta_oracle.as_array());
                worst_theta = worst_theta.max(diff / scale);
                let pa = mat3::mat_mul(&s.p, &s.a);
                worst_pa = worst_pa.max(mat3::frobenius(&mat3::mat_sub(&pa, &mat3::identity())));
            }
            result(
                "adaptation-oracle-agreement",
                worst_theta <= 1e-6 && worst_pa <= 1e-6,
                format!(
                    "over {:.0} s: max relative gain deviation {worst_theta:.2e}, \
max ||P A - I|| = {worst_pa:.2e}",
                    sim.t_final
                ),
            )
        }
        Err(e) => result("adaptation-oracle-agreement", false, format!("run failed: {e}")),
    }
}

/// Run every check; `fast` shrinks draw counts and horizons.
pub fn run_verification(fast: bool) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cafe);
    let facts = if fast { 1000 } else { 10_000 };
    let spectral = if fast { 100 } else { 500 };
    let states = if fast { 200 } else { 1000 };
    vec![
        check_adjoint_product_reversal(&mut rng, facts),
        check_trace_cyclicity(&mut rng, facts),
        check_commutator_adjoint(&mut rng, facts),
        check_eigendecomposition(&mut rng, spectral),
        check_sqrt_reconstruction(&mut rng, states),
        check_fidelity_routes(&mut rng, states),
        check_entropy_anchors(),
        check_filter_step_response(),
        check_closed_loop_conservation(fast),
        check_adaptation_oracle(fast),
    ]
}
