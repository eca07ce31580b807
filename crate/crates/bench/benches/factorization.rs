use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use transvect::gauss::GaussOptions;
use transvect::homotopy::{CertOptions, HomotopyMatrix};
use transvect::lifting::LiftOptions;
use transvect::near_identity::{factor_near_identity, NearIdentityInput, NearIdentityOptions};
use transvect::ring::{ApproxOptions, PositiveFunction};
use transvect::{
    approximate_smooth, factor_pointwise, homotopy_certificate, smooth_lift, Domain,
    ElementaryFactor, FactorList, RingElement, SLMatrix,
};

fn near_identity_input(n: usize) -> SLMatrix<f64> {
    let bound = 0.8 / (n as f64 - 1.0);
    let mut vals = vec![0.0f64; n * n];
    for (k, v) in vals.iter_mut().enumerate() {
        let (r, c) = (k / n, k % n);
        *v = bound
            * (0.3 + 0.5 * ((r * 7 + c * 3) % 5) as f64 / 5.0)
            * if (r + c) % 2 == 0 { 1.0 } else { -1.0 };
        if r == c {
            *v += 1.0;
        }
    }
    let mut m = SLMatrix::from_scalars(n, vals).unwrap();
    let det = match m.det_element().unwrap() {
        RingElement::Scalar(v) => v,
        _ => unreachable!(),
    };
    let fix = RingElement::scalar(1.0 / det);
    for r in 0..n {
        *m.at_mut(r, n - 1) = m.at(r, n - 1).mul(&fix).unwrap();
    }
    m
}

fn general_input(n: usize) -> SLMatrix<f64> {
    let mut fl = FactorList::<f64>::empty(n);
    for k in 0..2 * n {
        let i = 1 + k % n;
        let j = 1 + (k + 1 + k / n) % n;
        if i == j {
            continue;
        }
        fl.push(ElementaryFactor::new(i, j, RingElement::scalar(0.7 - 0.1 * k as f64)).unwrap())
            .unwrap();
    }
    fl.product().unwrap()
}

fn bench_near_identity(c: &mut Criterion) {
    let opts = NearIdentityOptions::default();
    for n in [3usize, 6] {
        let m = near_identity_input(n);
        c.bench_function(&format!("near_identity_n{n}"), |b| {
            b.iter(|| {
                let input = NearIdentityInput::new(black_box(m.clone()));
                factor_near_identity(&input, &opts).unwrap()
            })
        });
    }
}

fn bench_pointwise(c: &mut Criterion) {
    let opts = GaussOptions::default();
    let m = general_input(5);
    c.bench_function("factor_pointwise_n5", |b| {
        b.iter(|| factor_pointwise(black_box(&m), &opts).unwrap())
    });
}

fn bench_approximation(c: &mut Criterion) {
    let dom = Arc::new(Domain::line(-1.0f64, 1.0, 33).unwrap());
    let f = RingElement::grid_from_fn(&dom, |p| dom.point_coords(p)[0].abs());
    let eps = PositiveFunction::new(RingElement::scalar(0.05)).unwrap();
    let opts = ApproxOptions::default();
    c.bench_function("approximate_abs_x", |b| {
        b.iter(|| approximate_smooth(black_box(&f), &eps, &opts).unwrap())
    });
}

fn bench_smooth_lift(c: &mut Criterion) {
    let dom = Arc::new(Domain::line(-1.0f64, 1.0, 17).unwrap());
    let x = RingElement::coordinate(&dom, 0).unwrap();
    let p = x.mul(&x).unwrap().sub(&RingElement::scalar(0.5)).unwrap();
    let a = SLMatrix::from_entries(
        2,
        vec![
            RingElement::one(),
            p.clone(),
            RingElement::zero(),
            RingElement::one(),
        ],
    )
    .unwrap();
    let noisy = RingElement::grid_from_fn(&dom, |pt| {
        p.eval_flat(pt).unwrap() + 1e-6 * ((pt % 7) as f64 - 3.0)
    });
    let f = FactorList::from_factors(2, vec![ElementaryFactor::new(1, 2, noisy).unwrap()]).unwrap();
    let opts = LiftOptions {
        tol_recon: 1e-4,
        ..Default::default()
    };
    c.bench_function("smooth_lift_shear", |b| {
        b.iter(|| smooth_lift(black_box(&a), &f, &opts).unwrap())
    });
}

fn bench_certificate(c: &mut Criterion) {
    let base = Arc::new(Domain::line(0.0f64, 1.0, 9).unwrap());
    let h = HomotopyMatrix::sample(base.clone(), 17, 2, 1e-9, |x, t| {
        let xv = base.coord(0, base.multi_index(x)[0]);
        let tv = t as f64 / 16.0;
        vec![1.0, tv * xv, 0.0, 1.0]
    })
    .unwrap();
    let opts = CertOptions::default();
    c.bench_function("homotopy_certificate_shear", |b| {
        b.iter(|| homotopy_certificate(black_box(&h), &opts).unwrap())
    });
}

criterion_group!(
    benches,
    bench_near_identity,
    bench_pointwise,
    bench_approximation,
    bench_smooth_lift,
    bench_certificate
);
criterion_main!(benches);
