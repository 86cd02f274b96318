use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use wh_core::fibering::{self, HCobordismAlgebraic};
use wh_core::group::GroupSpec;
use wh_core::poincare;
use wh_core::random::{golden_unit, InstanceGen};
use wh_core::torsion;
use wh_core::whitehead::TorsionClass;

fn classify(c: &mut Criterion) {
    let g = Arc::new(GroupSpec::cyclic(5));
    let (u, _) = golden_unit(&g);
    let x = TorsionClass::from_unit(&u).unwrap();
    let zero = x.sub(&x).unwrap();
    c.bench_function("classify nontrivial unit", |b| b.iter(|| black_box(&x).classify()));
    c.bench_function("classify trivial difference", |b| b.iter(|| black_box(&zero).classify()));
}

fn acyclic(c: &mut Criterion) {
    let mut gen = InstanceGen::new(7);
    let complexes: Vec<_> = (0..8)
        .map(|_| {
            let g = gen.group();
            gen.acyclic(&g)
        })
        .collect();
    c.bench_function("acyclic torsion, 8 random complexes", |b| {
        b.iter(|| complexes.iter().map(|k| torsion::torsion_of_acyclic(k).unwrap()).collect::<Vec<_>>())
    });
}

fn poincare_rho(c: &mut Criterion) {
    let lens = poincare::lens(7, &[1, 2]).unwrap();
    c.bench_function("rho of L(7; 1,2)", |b| b.iter(|| poincare::rho(black_box(&lens)).unwrap()));
}

fn glue(c: &mut Criterion) {
    let g = Arc::new(GroupSpec::cyclic(5));
    let (u, _) = golden_unit(&g);
    let h = HCobordismAlgebraic::new(g.clone(), vec![vec![1]], 5, TorsionClass::from_unit(&u).unwrap()).unwrap();
    c.bench_function("glue h-cobordism, dim 5", |b| b.iter(|| fibering::glue_hcobordism(black_box(&h)).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = classify, acyclic, poincare_rho, glue
}
criterion_main!(benches);
