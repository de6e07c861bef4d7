//! Hot-path benchmarks: the plant generator, both fidelity routes, the
//! coupled right-hand side, one RK4 step, and a short end-to-end run.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use qdt_core::lindblad::lgks_rhs;
use qdt_core::metrics::{fidelity_2x2, fidelity_general};
use qdt_core::scenario::{preset, Scenario};
use qdt_core::sim::{coupled_rhs, rk4_step, simulate, SimConfig, STATE_DIM};

fn bench_plant_rhs(c: &mut Criterion) {
    let p = preset(Scenario::LowEntropy);
    let rho = *p.plant.rho0.matrix();
    c.bench_function("lgks_rhs", |b| {
        b.iter(|| lgks_rhs(black_box(&p.plant), black_box(&rho), black_box(2.5)))
    });
}

fn bench_fidelity(c: &mut Criterion) {
    let p = preset(Scenario::LowEntropy);
    let rho = *p.plant.rho0.matrix();
    let target = *p.sim.rho_d.matrix();
    c.bench_function("fidelity_closed_form", |b| {
        b.iter(|| fidelity_2x2(black_box(&rho), black_box(&target)).unwrap())
    });
    c.bench_function("fidelity_general", |b| {
        b.iter(|| fidelity_general(black_box(&rho), black_box(&target)).unwrap())
    });
}

fn loop_state(p: &qdt_core::scenario::ScenarioPreset) -> [f64; STATE_DIM] {
    // A short burn-in produces a state with nonzero gains and filters.
    let sim = SimConfig {
        t_final: 0.1,
        ..p.sim.clone()
    };
    let recs = simulate(&p.plant, &p.rcac, &sim).unwrap();
    let last = recs.last().unwrap();
    let mut y = [0.0_f64; STATE_DIM];
    let rho = last.rho();
    y[0] = rho.e[0][0].re;
    y[2] = rho.e[0][1].re;
    y[3] = rho.e[0][1].im;
    y[4] = rho.e[1][0].re;
    y[5] = rho.e[1][0].im;
    y[6] = rho.e[1][1].re;
    y[14] = last.kp;
    y[15] = last.ki;
    y[16] = last.kd;
    for i in 0..3 {
        y[17 + 4 * i] = 1e-3;
    }
    y
}

fn bench_coupled_rhs(c: &mut Criterion) {
    let p = preset(Scenario::LowEntropy);
    let y = loop_state(&p);
    c.bench_function("coupled_rhs", |b| {
        b.iter(|| coupled_rhs(black_box(&p.plant), black_box(&p.rcac), black_box(&p.sim), black_box(&y)).unwrap())
    });
}

fn bench_rk4_step(c: &mut Criterion) {
    let p = preset(Scenario::LowEntropy);
    let y = loop_state(&p);
    let rhs = |state: &[f64; STATE_DIM]| coupled_rhs(&p.plant, &p.rcac, &p.sim, state);
    c.bench_function("rk4_step", |b| {
        b.iter(|| rk4_step(black_box(&rhs), black_box(&y), black_box(1e-4)).unwrap())
    });
}

fn bench_short_run(c: &mut Criterion) {
    let p = preset(Scenario::LowEntropy);
    let sim = SimConfig {
        t_final: 0.1,
        ..p.sim.clone()
    };
    c.bench_function("simulate_100ms", |b| {
        b.iter(|| simulate(black_box(&p.plant), black_box(&p.rcac), black_box(&sim)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_plant_rhs,
    bench_fidelity,
    bench_coupled_rhs,
    bench_rk4_step,
    bench_short_run
);
criterion_main!(benches);
