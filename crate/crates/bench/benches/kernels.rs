use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use isochiral_core::discrete::{expectation_n, ChiralParameter};
use isochiral_core::export::table_cells;
use isochiral_core::quadrature::{uniform_grid, SphereGrid};
use isochiral_core::selection::{matrix_element, sweep_state, ObservableSpec};
use isochiral_core::wavefunctions::monopole_doublet;
use isochiral_core::wigner::{big_d, EulerAngles, WignerIndex};
use isochiral_core::HalfInt;

fn rotation_functions(c: &mut Criterion) {
    let idx = WignerIndex::from_twice(7, 3, -1).unwrap();
    let ang = EulerAngles::new(0.4, 1.1, -0.7);
    c.bench_function("big_d j=7/2", |b| b.iter(|| big_d(black_box(&idx), black_box(&ang)).unwrap()));
    c.bench_function("boundary tables", |b| b.iter(|| table_cells(black_box(None)).unwrap()));
}

fn radial_and_states(c: &mut Criterion) {
    let grid = uniform_grid(0.5, 6.0, 40);
    let a = ChiralParameter::from_parts(0.3, -0.2).unwrap();
    c.bench_function("doublet state j=2", |b| {
        b.iter(|| monopole_doublet(HalfInt::int(2), HalfInt::ONE, 1, Some(1), a, 2.0, 1.0, black_box(&grid)).unwrap())
    });
}

fn observables(c: &mut Criterion) {
    let a = ChiralParameter::zero();
    let bra = sweep_state(1, 1, a).unwrap();
    let ket = sweep_state(2, 1, a).unwrap();
    let sphere = SphereGrid::new(16, 32).unwrap();
    let obs = ObservableSpec::position_density(2);
    c.bench_function("matrix element 16x32", |b| b.iter(|| matrix_element(&bra, &obs, &ket, black_box(&sphere)).unwrap()));
    let a = ChiralParameter::from_parts(0.7, 0.4).unwrap();
    c.bench_function("expectation value", |b| b.iter(|| expectation_n(&a, black_box(0.3), 0.2, 1.1, HalfInt::ONE)));
}

criterion_group!(benches, rotation_functions, radial_and_states, observables);
criterion_main!(benches);
