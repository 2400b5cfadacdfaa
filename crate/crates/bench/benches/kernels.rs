use causticwave::airy;
use causticwave::beam::{beam_value, make_incidence, Envelope};
use causticwave::field::{v_hat_exact, v_hat_gb};
use causticwave::phase::PhaseContext;
use causticwave::quad::beam_integral;
use criterion::{black_box, criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use std::f64::consts::PI;

fn airy_eval(c: &mut Criterion) {
    let points = [
        Complex64::new(1.5, 0.0),
        Complex64::new(-4.0, 0.0),
        Complex64::new(12.0, 3.0),
        Complex64::new(-2.0, 5.0),
        Complex64::new(0.3, -0.7),
    ];
    c.bench_function("airy_eval_mixed_args", |b| {
        b.iter(|| {
            for &z in &points {
                black_box(airy::eval(black_box(z)).unwrap());
            }
        })
    });
}

fn beam_point(c: &mut Criterion) {
    let inc = make_incidence(PI / 3.0).unwrap();
    let env = Envelope::new(1.0);
    c.bench_function("beam_value_single_point", |b| {
        b.iter(|| {
            black_box(
                beam_value(
                    black_box(0.2),
                    black_box(0.35),
                    black_box(0.1),
                    &inc,
                    &env,
                    black_box(400.0),
                )
                .unwrap(),
            )
        })
    });
}

fn spectral_integral(c: &mut Criterion) {
    let inc = make_incidence(PI / 3.0).unwrap();
    let ctx = PhaseContext::new(inc, 0.0, 0.01).unwrap();
    c.bench_function("beam_spectral_integral_k100", |b| {
        b.iter(|| black_box(beam_integral(&ctx, black_box(100.0), 6.0, 1e-8).unwrap()))
    });
}

fn spectral_amplitudes(c: &mut Criterion) {
    let inc = make_incidence(PI / 3.0).unwrap();
    c.bench_function("v_hat_exact_k400", |b| {
        b.iter(|| black_box(v_hat_exact(&inc, inc.x_c, black_box(400.0), 0.01).unwrap()))
    });
    c.bench_function("v_hat_gb_k400", |b| {
        b.iter(|| black_box(v_hat_gb(&inc, inc.x_c, black_box(400.0), 0.01, 1e-7).unwrap()))
    });
}

criterion_group!(kernels, airy_eval, beam_point, spectral_integral, spectral_amplitudes);
criterion_main!(kernels);
