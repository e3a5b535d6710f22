//! Symplectic Dirac and twistor operators, the Killing spinor equation
//! `∇ˢφ = λ F+φ`, its zeroth-order prolongation
//! `σ^{ij} e_i.e_j.φ = 2l λ² φ`, and the two case-study certificates.

mod certificate;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fedosov::{covariant_derivatives, sigma_action, ChartModel, RicciData, SpinorField};
use crate::fock::{EffectiveSubspace, FockModel, C64, I};
use crate::forms::{FormAlgebra, SpinorForm};

pub use certificate::{
    flat_difference_operator, flat_killing_operator, flat_rigidity, fourier_range, patch_argument,
    sphere_block_operator, sphere_nonexistence, Certificate, CertificateKind, CertificateParams, FlatRigidityOptions,
    PatchCheck, SigmaScaling, SphereOptions,
};

/// `∇ˢφ` at every node as a spinor-valued 1-form.
pub fn nabla_forms(chart: &ChartModel, field: &SpinorField) -> Result<Vec<SpinorForm>> {
    let parts = covariant_derivatives(chart, field)?;
    let model = field.model;
    Ok((0..chart.len())
        .map(|node| SpinorForm {
            degree: 1,
            model,
            components: parts.iter().map(|p| p.node(node)).collect(),
        })
        .collect())
}

fn zero_form_at(field: &SpinorField, node: usize) -> SpinorForm {
    SpinorForm {
        degree: 0,
        model: field.model,
        components: vec![field.node(node)],
    }
}

/// `𝔇φ = -F-(∇ˢφ)`.
pub fn dirac(chart: &ChartModel, field: &SpinorField) -> Result<SpinorField> {
    let alg = FormAlgebra::standard(field.model)?;
    let nabla = nabla_forms(chart, field)?;
    let cols = nabla
        .par_iter()
        .map(|f| Ok(-alg.f_minus(f)?.components.swap_remove(0)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpinorField {
        model: field.model,
        values: DMatrix::from_columns(&cols),
    })
}

/// `𝔗φ = ∇ˢφ - p10 ∇ˢφ`.
pub fn twistor(chart: &ChartModel, field: &SpinorField) -> Result<Vec<SpinorForm>> {
    let alg = FormAlgebra::standard(field.model)?;
    nabla_forms(chart, field)?
        .par_iter()
        .map(|f| f.sub(&alg.p10(f)?))
        .collect()
}

/// Max over interior nodes of `‖∇ˢφ - λ F+φ‖` on `eff`.
pub fn killing_residual(chart: &ChartModel, field: &SpinorField, lambda: C64, eff: &EffectiveSubspace) -> Result<f64> {
    let alg = FormAlgebra::standard(field.model)?;
    let nabla = nabla_forms(chart, field)?;
    let mut worst = 0.0f64;
    for node in chart.grid().interior(1) {
        let fp = alg.f_plus(&zero_form_at(field, node))?;
        let r = nabla[node].axpy(-lambda, &fp)?;
        worst = worst.max(r.norm_on(eff));
    }
    Ok(worst)
}

/// Max over `nodes` of `‖σ^{ij} e_i.e_j.φ - 2l λ² φ‖` on `eff`.
pub fn prolongation_residual(
    field: &SpinorField,
    sigma: &RicciData,
    lambda: C64,
    nodes: &[usize],
    eff: &EffectiveSubspace,
) -> Result<f64> {
    if sigma.sigma_upper.len() != field.len() {
        return Err(Error::LengthMismatch {
            expected: field.len(),
            got: sigma.sigma_upper.len(),
        });
    }
    let two_l = 2.0 * field.model.l() as f64;
    Ok(nodes
        .iter()
        .map(|&n| {
            let v = field.node(n);
            let r = sigma_action(field.model, &sigma.sigma_upper[n], &v) - &v * (lambda * lambda * two_l);
            eff.norm_on(&r)
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KillingCandidate {
    pub lambda: [f64; 2],
    pub hermite_level: usize,
    /// Eigenvalue of `σ^{ij} e_i.e_j` that produced `λ`.
    pub eigenvalue: f64,
    /// `‖σ^{ij} e_i.e_j v - μ v‖` for the eigenvector.
    pub residual: f64,
}

impl KillingCandidate {
    pub fn lambda(&self) -> C64 {
        C64::new(self.lambda[0], self.lambda[1])
    }
}

/// Dense `Σ σ^{ij} e_i e_j` on the full truncated model.
fn sigma_matrix(model: FockModel, sigma_upper: &DMatrix<f64>) -> Result<DMatrix<C64>> {
    let n = 2 * model.l();
    let e = (0..n).map(|k| model.clifford_matrix(k)).collect::<Result<Vec<_>>>()?;
    let mut m = DMatrix::zeros(model.dim(), model.dim());
    for i in 0..n {
        for j in 0..n {
            let s = sigma_upper[(i, j)];
            if s != 0.0 {
                m += (&e[i] * &e[j]) * C64::new(s, 0.0);
            }
        }
    }
    Ok(m)
}

/// Killing numbers allowed by the prolongation for a constant `σ`.
///
/// Diagonalizes `σ^{ij} e_i.e_j` on the truncated model, keeps eigenvectors
/// whose dominant basis index lies in the effective subspace (default margin),
/// groups degenerate eigenvalues, orders groups by ascending `|μ|` and returns
/// `λ = ±sqrt(μ / 2l)` for the first `count` groups, `+i` root first. `σ = 0`
/// yields the single candidate `λ = 0`.
pub fn candidate_spectrum(sigma: &RicciData, model: FockModel, count: usize) -> Result<Vec<KillingCandidate>> {
    let all: Vec<usize> = (0..sigma.sigma_upper.len()).collect();
    if all.is_empty() {
        return Err(Error::UnsupportedCurvature("empty Ricci field".into()));
    }
    let scale = sigma.sigma_upper.iter().map(|s| s.amax()).fold(0.0, f64::max);
    let s = sigma
        .constant_upper(&all, 1e-9 * scale.max(1.0))
        .ok_or_else(|| Error::UnsupportedCurvature("σ is not constant over the chart".into()))?;
    if s.nrows() != 2 * model.l() {
        return Err(Error::ModelMismatch(format!(
            "σ is {}x{}, model has l = {}",
            s.nrows(),
            s.ncols(),
            model.l()
        )));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    if s.amax() == 0.0 {
        return Ok(vec![KillingCandidate {
            lambda: [0.0, 0.0],
            hermite_level: 0,
            eigenvalue: 0.0,
            residual: 0.0,
        }]);
    }
    let m = sigma_matrix(model, &s)?;
    let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let eff = EffectiveSubspace::new(model, EffectiveSubspace::DEFAULT_MARGIN);
    let mut kept: Vec<(f64, usize, f64)> = Vec::new();
    for c in 0..model.dim() {
        let v: DVector<C64> = eig.eigenvectors.column(c).into_owned();
        let dominant = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if !eff.contains_index(dominant) {
            continue;
        }
        let mu = eig.eigenvalues[c];
        let residual = (&m * &v - &v * C64::new(mu, 0.0)).norm();
        kept.push((mu, model.total_level(dominant), residual));
    }
    kept.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()).then(a.0.total_cmp(&b.0)));
    let mut groups: Vec<(f64, usize, f64)> = Vec::new();
    for (mu, level, res) in kept {
        match groups.last_mut() {
            Some(g) if (g.0 - mu).abs() <= 1e-9 * mu.abs().max(1.0) => {
                g.1 = g.1.min(level);
                g.2 = g.2.max(res);
            }
            _ => groups.push((mu, level, res)),
        }
    }
    let two_l = 2.0 * model.l() as f64;
    let mut out = Vec::with_capacity(2 * count);
    for &(mu, level, res) in groups.iter().take(count) {
        let root = C64::new(mu / two_l, 0.0).sqrt();
        let (first, second) = if root.im > 0.0 || (root.im == 0.0 && root.re >= 0.0) {
            (root, -root)
        } else {
            (-root, root)
        };
        for l in [first, second] {
            out.push(KillingCandidate {
                lambda: [l.re + 0.0, l.im + 0.0],
                hermite_level: level,
                eigenvalue: mu,
                residual: res,
            });
        }
        if mu == 0.0 {
            out.pop();
        }
    }
    Ok(out)
}

/// Constant `σ = c I` in the frame, the form used for spectrum queries.
pub fn isotropic_sigma(l: usize, c: f64, nodes: usize) -> Result<RicciData> {
    let space = crate::symalg::SymplecticSpace::standard(l)?;
    Ok(RicciData::constant(&space, DMatrix::identity(2 * l, 2 * l) * c, nodes))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacterizationOptions {
    /// Relative threshold for each of the three conditions.
    pub tol: f64,
    /// Nodes this many steps inside the boundary are used.
    pub layers: usize,
    pub margin: usize,
}

impl Default for CharacterizationOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            layers: 1,
            margin: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterizationReport {
    pub lambda_fit: [f64; 2],
    pub mu_fit: [f64; 2],
    pub killing_residual: f64,
    pub dirac_residual: f64,
    pub twistor_residual: f64,
    pub is_killing: bool,
    pub is_dirac_eigen: bool,
    pub in_twistor_kernel: bool,
    pub biconditional: bool,
    /// `|λ + i μ / l|` when all three conditions hold.
    pub relation_defect: Option<f64>,
}

impl CharacterizationReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.biconditional && self.relation_defect.is_none_or(|d| d <= tol)
    }
}

/// Evaluates Killing, Dirac-eigen and twistor-kernel conditions with least
/// squares fits `λ = <F+φ, ∇ˢφ> / <F+φ, F+φ>` and `μ = <φ, 𝔇φ> / <φ, φ>`
/// aggregated over interior nodes, all residuals relative to the field size.
pub fn characterize(
    chart: &ChartModel,
    field: &SpinorField,
    opts: CharacterizationOptions,
) -> Result<CharacterizationReport> {
    let model = field.model;
    let alg = FormAlgebra::standard(model)?;
    let eff = EffectiveSubspace::new(model, opts.margin);
    let nodes = chart.grid().interior(opts.layers);
    let nabla = nabla_forms(chart, field)?;
    let restrict = |v: &DVector<C64>| eff.restrict(v);
    let per_node = nodes
        .par_iter()
        .map(|&n| {
            let phi = zero_form_at(field, n);
            let fp = alg.f_plus(&phi)?.restrict(&eff);
            let nb = nabla[n].restrict(&eff);
            let d = restrict(&(-alg.f_minus(&nabla[n])?.components.swap_remove(0)));
            let t = nabla[n].sub(&alg.p10(&nabla[n])?)?.restrict(&eff);
            Ok((phi.components[0].clone(), fp, nb, d, t))
        })
        .collect::<Result<Vec<_>>>()?;
    let dot = |a: &SpinorForm, b: &SpinorForm| -> C64 {
        a.components.iter().zip(&b.components).map(|(x, y)| x.dotc(y)).sum()
    };
    let mut fp_fp = 0.0;
    let mut fp_nb = C64::new(0.0, 0.0);
    let mut phi_phi = 0.0;
    let mut phi_d = C64::new(0.0, 0.0);
    let mut nb_sq = 0.0;
    for (phi, fp, nb, d, _) in &per_node {
        let phi = restrict(phi);
        fp_fp += fp.norm().powi(2);
        fp_nb += dot(fp, nb);
        phi_phi += phi.norm_squared();
        phi_d += phi.dotc(d);
        nb_sq += nb.norm().powi(2);
    }
    let lambda = if fp_fp > 0.0 { fp_nb / fp_fp } else { C64::new(0.0, 0.0) };
    let mu = if phi_phi > 0.0 {
        phi_d / phi_phi
    } else {
        C64::new(0.0, 0.0)
    };
    let scale = (nb_sq + phi_phi).sqrt().max(f64::MIN_POSITIVE);
    let mut k_sq = 0.0;
    let mut d_sq = 0.0;
    let mut t_sq = 0.0;
    for (phi, fp, nb, d, t) in &per_node {
        k_sq += nb.axpy(-lambda, fp)?.norm().powi(2);
        d_sq += (d - restrict(phi) * mu).norm_squared();
        t_sq += t.norm().powi(2);
    }
    let killing_residual = k_sq.sqrt() / scale;
    let dirac_residual = d_sq.sqrt() / scale;
    let twistor_residual = t_sq.sqrt() / scale;
    let is_killing = killing_residual < opts.tol;
    let is_dirac_eigen = dirac_residual < opts.tol;
    let in_twistor_kernel = twistor_residual < opts.tol;
    let l = model.l() as f64;
    let relation_defect = (is_killing && is_dirac_eigen && in_twistor_kernel)
        .then(|| (lambda + I * mu / l).norm() / (1.0 + lambda.norm()));
    Ok(CharacterizationReport {
        lambda_fit: [lambda.re, lambda.im],
        mu_fit: [mu.re, mu.im],
        killing_residual,
        dirac_residual,
        twistor_residual,
        is_killing,
        is_dirac_eigen,
        in_twistor_kernel,
        biconditional: is_killing == (is_dirac_eigen && in_twistor_kernel),
        relation_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fedosov::ricci;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn flat() -> (ChartModel, FockModel) {
        (ChartModel::flat(1, 7, 1.0).unwrap(), FockModel::new(1, 10).unwrap())
    }

    #[test]
    fn constant_field_on_flat_chart() {
        let (chart, model) = flat();
        let eff = EffectiveSubspace::new(model, 2);
        let s = model.basis(&[1]).unwrap().coeffs;
        let phi = SpinorField::constant(model, &s, chart.len()).unwrap();
        assert!(dirac(&chart, &phi).unwrap().values.norm() < 1e-13);
        assert!(twistor(&chart, &phi).unwrap().iter().all(|f| f.norm() < 1e-13));
        assert!(killing_residual(&chart, &phi, C64::new(0.0, 0.0), &eff).unwrap() < 1e-13);
        let fp_norm = {
            let alg = FormAlgebra::standard(model).unwrap();
            alg.f_plus(&SpinorForm::from_spinor(&model.basis(&[1]).unwrap()))
                .unwrap()
                .norm_on(&eff)
        };
        let r = killing_residual(&chart, &phi, C64::new(1.0, 0.0), &eff).unwrap();
        assert!((r - fp_norm).abs() < 1e-12 && r > 0.0);
    }

    #[test]
    fn dirac_matches_dense_assembly_at_one_node() {
        let (chart, model) = flat();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let eff = EffectiveSubspace::new(model, 3);
        let a = eff.random(&mut rng).coeffs;
        let b = eff.random(&mut rng).coeffs;
        let phi = SpinorField::from_fn(&chart, model, |x| {
            &a * C64::new(x[0], 0.0) + &b * C64::new(x[1] * x[1], 0.0)
        })
        .unwrap();
        let node = chart.grid().node(&[3, 4]);
        let x = chart.grid().coords(node);
        // ∂_1 φ = a, ∂_2 φ = 2 x2 b; 𝔇φ = -F-(ε^1 ⊗ a + ε^2 ⊗ 2 x2 b)
        //     = ω^{12} e_2.a + ω^{21} e_1.(2 x2 b) = e_2.a - 2 x2 e_1.b
        let e1 = model.clifford_matrix(0).unwrap();
        let e2 = model.clifford_matrix(1).unwrap();
        let want = &e2 * &a - &e1 * &b * C64::new(2.0 * x[1], 0.0);
        let got = dirac(&chart, &phi).unwrap().node(node);
        assert!((got - want).norm() < 1e-10);
    }

    #[test]
    fn twistor_nonzero_on_random_sphere_field() {
        let chart = ChartModel::sphere(1.0, 0.3, 17, 8).unwrap();
        let model = FockModel::new(1, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let phi = SpinorField::from_fn(&chart, model, |x| {
            let mut v = DVector::zeros(8);
            v[0] = C64::new(c[0] + c[1] * x[0].cos(), c[2] * x[1].sin());
            v[2] = C64::new(c[3], 0.0);
            v
        })
        .unwrap();
        let t = twistor(&chart, &phi).unwrap();
        assert!(t.iter().map(|f| f.norm()).fold(0.0, f64::max) > 1e-3);
    }

    #[test]
    fn candidate_spectrum_sphere_and_flat() {
        let model = FockModel::new(1, 32).unwrap();
        let sigma = isotropic_sigma(1, 1.0, 4).unwrap();
        let c = candidate_spectrum(&sigma, model, 6).unwrap();
        assert_eq!(c.len(), 12);
        for (k, pair) in c.chunks(2).enumerate() {
            assert_eq!(pair[0].hermite_level, k);
            let want = ((2 * k + 1) as f64 / 2.0).sqrt();
            assert!((pair[0].lambda() - C64::new(0.0, want)).norm() < 1e-12);
            assert!((pair[1].lambda() - C64::new(0.0, -want)).norm() < 1e-12);
            for p in pair {
                let l = p.lambda();
                assert!((l * l * 2.0 + (2 * k + 1) as f64).norm() < 1e-12);
            }
        }
        assert!((c[0].lambda().im - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let r2 = candidate_spectrum(&isotropic_sigma(1, 0.5, 1).unwrap(), model, 2).unwrap();
        assert!((r2[2].lambda() - C64::new(0.0, 0.75f64.sqrt())).norm() < 1e-12);
        let flat = candidate_spectrum(&isotropic_sigma(1, 0.0, 3).unwrap(), model, 5).unwrap();
        assert_eq!(flat.len(), 1);
        assert_eq!(flat[0].lambda(), C64::new(0.0, 0.0));
        assert!(candidate_spectrum(&sigma, model, 0).unwrap().is_empty());
    }

    #[test]
    fn candidate_spectrum_rejects_varying_sigma() {
        let chart = ChartModel::perturbed_flat(1, 5, 1.0, 0.5, 3).unwrap();
        let ric = ricci(&chart).unwrap();
        let model = FockModel::new(1, 8).unwrap();
        assert!(matches!(
            candidate_spectrum(&ric, model, 2),
            Err(Error::UnsupportedCurvature(_))
        ));
    }

    #[test]
    fn prolongation_on_hermite_sections() {
        let model = FockModel::new(1, 12).unwrap();
        let eff = EffectiveSubspace::new(model, 2);
        let r = 1.5;
        let sigma = isotropic_sigma(1, 1.0 / r, 6).unwrap();
        let nodes: Vec<usize> = (0..6).collect();
        for n in 0..5 {
            let h = model.basis(&[n]).unwrap().coeffs;
            let phi = SpinorField::constant(model, &h, 6).unwrap();
            let lam = |m: usize| C64::new(0.0, ((2 * m + 1) as f64 / (2.0 * r)).sqrt());
            assert!(prolongation_residual(&phi, &sigma, lam(n), &nodes, &eff).unwrap() < 1e-10);
            for m in 0..5 {
                let got = prolongation_residual(&phi, &sigma, lam(m), &nodes, &eff).unwrap();
                let want = ((2.0 * m as f64 + 1.0) - (2.0 * n as f64 + 1.0)).abs() / r;
                assert!((got - want).abs() < 1e-10);
            }
        }
        let zero = isotropic_sigma(1, 0.0, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let phi = SpinorField::constant(model, &eff.random(&mut rng).coeffs, 6).unwrap();
        assert_eq!(
            prolongation_residual(&phi, &zero, C64::new(0.0, 0.0), &nodes, &eff).unwrap(),
            0.0
        );
    }

    #[test]
    fn characterization_on_flat_fields() {
        let (chart, model) = flat();
        let eff = EffectiveSubspace::new(model, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let phi0 = eff.random(&mut rng).coeffs;
        let psi0 = EffectiveSubspace::new(model, 4).random(&mut rng).coeffs;
        let opts = CharacterizationOptions::default();

        let constant = SpinorField::constant(model, &phi0, chart.len()).unwrap();
        let rep = characterize(&chart, &constant, opts).unwrap();
        assert!(rep.is_killing && rep.is_dirac_eigen && rep.in_twistor_kernel);
        assert!(rep.holds(1e-8));
        assert!(rep.lambda_fit == [0.0, 0.0] || C64::new(rep.lambda_fit[0], rep.lambda_fit[1]).norm() < 1e-12);

        // twistor kernel but not a Dirac eigenspinor
        let e1 = model.clifford_basis(0, &psi0);
        let e2 = model.clifford_basis(1, &psi0);
        let linear = SpinorField::from_fn(&chart, model, |x| {
            &phi0 + &e1 * C64::new(x[0], 0.0) + &e2 * C64::new(x[1], 0.0)
        })
        .unwrap();
        let rep = characterize(&chart, &linear, opts).unwrap();
        assert!(rep.in_twistor_kernel, "{rep:?}");
        assert!(!rep.is_dirac_eigen && !rep.is_killing);
        assert!(rep.holds(1e-8));
    }
}
