#![allow(dead_code)]

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symspin::fedosov::{ChartModel, RicciData, SpinorField};
use symspin::fock::{EffectiveSubspace, FockModel, C64};
use symspin::killing::{characterize, killing_residual, prolongation_residual, CharacterizationOptions};

fn rc<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Random combination of smooth patch functions with effective-subspace coefficients.
pub fn smooth_sphere_field<R: Rng>(chart: &ChartModel, eff: &EffectiveSubspace, rng: &mut R) -> SpinorField {
    let idx = eff.indices();
    let coeffs: Vec<[C64; 4]> = idx.iter().map(|_| [rc(rng), rc(rng), rc(rng), rc(rng)]).collect();
    SpinorField::from_fn(chart, eff.model, |x| {
        let (t, p) = (x[0], x[1]);
        let mut v = DVector::zeros(eff.model.dim());
        for (k, &i) in idx.iter().enumerate() {
            let c = &coeffs[k];
            v[i] = c[0]
                + c[1] * t.cos()
                + c[2] * (2.0 * t).sin() * C64::from_polar(1.0, p)
                + c[3] * C64::from_polar(t.sin(), -2.0 * p);
        }
        v
    })
    .unwrap()
}

pub fn sphere_chart(h: f64, margin: f64, phi_nodes: usize) -> ChartModel {
    ChartModel::sphere(
        1.0,
        margin,
        ChartModel::sphere_theta_nodes(margin, h).unwrap(),
        phi_nodes,
    )
    .unwrap()
}

/// Coarse interior node and the fine node at the same point (θ index doubled).
pub fn matched_nodes(coarse: &ChartModel, fine: &ChartModel, layers: usize) -> Vec<(usize, usize)> {
    coarse
        .grid()
        .interior(layers)
        .into_iter()
        .map(|n| {
            let j = coarse.grid().index(n, 0);
            let k = coarse.grid().index(n, 1);
            (n, fine.grid().node(&[2 * j, k]))
        })
        .collect()
}

pub struct Corpus {
    pub name: String,
    pub fields: Vec<(String, SpinorField)>,
}

/// Flat 2-plane corpus: constants, twistor-kernel linear fields, quadratics
/// and trigonometric fields; all with polynomial degree at most two where
/// the grid derivative is exact.
pub fn flat_corpus(chart: &ChartModel, model: FockModel, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inner = EffectiveSubspace::new(model, 4);
    let mut fields = Vec::new();
    for i in 0..12 {
        let s = inner.random(&mut rng).coeffs;
        fields.push((
            format!("constant-{i}"),
            SpinorField::constant(model, &s, chart.len()).unwrap(),
        ));
    }
    for i in 0..14 {
        let a = inner.random(&mut rng).coeffs;
        let b = EffectiveSubspace::new(model, 5).random(&mut rng).coeffs;
        let e1 = model.clifford_basis(0, &b);
        let e2 = model.clifford_basis(1, &b);
        let f = SpinorField::from_fn(chart, model, |x| {
            &a + &e1 * C64::new(x[0], 0.0) + &e2 * C64::new(x[1], 0.0)
        })
        .unwrap();
        fields.push((format!("twistor-linear-{i}"), f));
    }
    for i in 0..14 {
        let a = inner.random(&mut rng).coeffs;
        let b = inner.random(&mut rng).coeffs;
        let c = inner.random(&mut rng).coeffs;
        let f = SpinorField::from_fn(chart, model, |x| {
            &a + &b * C64::new(x[0] * x[1], 0.0) + &c * C64::new(x[0] - 0.5 * x[1] * x[1], 0.0)
        })
        .unwrap();
        fields.push((format!("quadratic-{i}"), f));
    }
    for i in 0..12 {
        let a = inner.random(&mut rng).coeffs;
        let w: f64 = rng.random_range(0.5..1.5);
        let f = SpinorField::from_fn(chart, model, |x| &a * C64::from_polar(1.0, w * (x[0] + 0.3 * x[1]))).unwrap();
        fields.push((format!("plane-wave-{i}"), f));
    }
    Corpus {
        name: "flat".into(),
        fields,
    }
}

/// Sphere corpus: smooth random fields, Hermite sections with constant
/// coefficients, and Fourier-mode sections `f(θ) e^{ikϕ} h_n`.
pub fn sphere_corpus(chart: &ChartModel, model: FockModel, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eff = EffectiveSubspace::new(model, 4);
    let mut fields = Vec::new();
    for i in 0..30 {
        fields.push((format!("smooth-{i}"), smooth_sphere_field(chart, &eff, &mut rng)));
    }
    let top = eff.top_level().unwrap_or(0);
    for n in 0..=top.min(11) {
        let h = model.basis(&[n]).unwrap().coeffs;
        fields.push((
            format!("hermite-{n}"),
            SpinorField::constant(model, &h, chart.len()).unwrap(),
        ));
    }
    for i in 0..14 {
        let n = i % (top + 1);
        let k = (i as i64 % 5) - 2;
        let h = model.basis(&[n]).unwrap().coeffs;
        let f = SpinorField::from_fn(chart, model, |x| {
            &h * (C64::from_polar(1.0, k as f64 * x[1]) * (x[0].sin().powi(2) + 0.2 * (3.0 * x[0]).cos()))
        })
        .unwrap();
        fields.push((format!("mode-{n}-{k}"), f));
    }
    Corpus {
        name: "sphere".into(),
        fields,
    }
}

/// Fields violating the biconditional, and the count that are twistor-kernel but not Dirac eigen.
pub fn characterization_counterexamples(
    chart: &ChartModel,
    corpus: &Corpus,
    opts: CharacterizationOptions,
) -> (Vec<String>, usize) {
    let mut bad = Vec::new();
    let mut twistor_only = 0;
    for (name, f) in &corpus.fields {
        let r = characterize(chart, f, opts).unwrap();
        if !r.holds(1e-8) {
            bad.push(format!("{name}: {r:?}"));
        }
        if r.in_twistor_kernel && !r.is_dirac_eigen {
            twistor_only += 1;
        }
    }
    (bad, twistor_only)
}

/// Accepted (field, λ) pairs and those whose prolongation residual exceeds `10 tol`.
pub fn prolongation_violations(
    chart: &ChartModel,
    corpus: &Corpus,
    sigma: &RicciData,
    lambdas: &[C64],
    tol: f64,
) -> (usize, Vec<String>) {
    let model = corpus.fields[0].1.model;
    let eff = EffectiveSubspace::new(model, 3);
    let nodes = chart.grid().interior(1);
    let mut accepted = 0;
    let mut bad = Vec::new();
    let zero = ("zero".to_string(), SpinorField::zeros(model, chart.len()));
    for (name, f) in corpus.fields.iter().chain(std::iter::once(&zero)) {
        let fit = characterize(chart, f, CharacterizationOptions::default())
            .unwrap()
            .lambda_fit;
        for &l in lambdas.iter().chain(std::iter::once(&C64::new(fit[0], fit[1]))) {
            if killing_residual(chart, f, l, &eff).unwrap() < tol {
                accepted += 1;
                let p = prolongation_residual(f, sigma, l, &nodes, &eff).unwrap();
                if p >= 10.0 * tol {
                    bad.push(format!("{name} λ={l}: prolongation {p:e}"));
                }
            }
        }
    }
    (accepted, bad)
}
