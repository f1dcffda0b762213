//! Finite-rank Gaussian field models: a polynomial basis with a Gaussian
//! coefficient vector.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::poly::{multi_indices, multinomial, Monomial, Polynomial};
use crate::linalg::{pivoted_cholesky, symmetrize};
use crate::rng::stream_rng;
use crate::{Error, Result};

/// Smallest pivot kept by the coefficient factorisation.
const FACTOR_TOL: f64 = 1e-14;
/// Poles where the S² tangent-frame rule switches to its fallback.
const POLE_THRESHOLD: f64 = 1.0 - 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Unit circle in ℝ².
    Circle,
    /// Unit sphere in ℝ³.
    Sphere,
    /// The cube [0,1]ᵐ.
    Cube(usize),
}

impl Domain {
    pub fn sphere(m: usize) -> Result<Self> {
        match m {
            1 => Ok(Domain::Circle),
            2 => Ok(Domain::Sphere),
            _ => Err(Error::domain(format!(
                "spheres of dimension {m} are not supported (only 1 and 2)"
            ))),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Circle => 1,
            Domain::Sphere => 2,
            Domain::Cube(m) => *m,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Domain::Circle => 2,
            Domain::Sphere => 3,
            Domain::Cube(m) => *m,
        }
    }

    /// Orthonormal tangent frame at `p`, ambient_dim × dim.
    pub fn tangent_frame(&self, p: &[f64]) -> DMatrix<f64> {
        match self {
            Domain::Circle => DMatrix::from_column_slice(2, 1, &[-p[1], p[0]]),
            Domain::Sphere => {
                let n = nalgebra::Vector3::new(p[0], p[1], p[2]);
                let t1 = if p[2].abs() > POLE_THRESHOLD {
                    let e1 = nalgebra::Vector3::x();
                    (e1 - n * e1.dot(&n)).normalize()
                } else {
                    nalgebra::Vector3::new(-p[1], p[0], 0.0).normalize()
                };
                let t2 = n.cross(&t1);
                DMatrix::from_column_slice(3, 2, &[t1.x, t1.y, t1.z, t2.x, t2.y, t2.z])
            }
            Domain::Cube(m) => DMatrix::identity(*m, *m),
        }
    }
}

/// Isotropic polynomial kernel K(t) = Σ_ℓ A_ℓ A_ℓᵀ tˡ on Sᵐ.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropicModel {
    coeff_mats: Vec<DMatrix<f64>>,
    m: usize,
}

impl IsotropicModel {
    pub fn new(m: usize, coeff_mats: Vec<DMatrix<f64>>) -> Result<Self> {
        Domain::sphere(m)?;
        let Some(first) = coeff_mats.first() else {
            return Err(Error::domain("no coefficient matrices given"));
        };
        let k = first.nrows();
        if k == 0 {
            return Err(Error::domain("coefficient matrices must be non-empty"));
        }
        for (l, a) in coeff_mats.iter().enumerate() {
            if a.nrows() != k || a.ncols() != k {
                return Err(Error::domain(format!(
                    "coefficient matrix {l} is {}x{}, expected {k}x{k}",
                    a.nrows(),
                    a.ncols()
                )));
            }
        }
        Ok(IsotropicModel { coeff_mats, m })
    }

    pub fn coeff_mats(&self) -> &[DMatrix<f64>] {
        &self.coeff_mats
    }

    pub fn degree(&self) -> usize {
        self.coeff_mats.len() - 1
    }

    pub fn output_dim(&self) -> usize {
        self.coeff_mats[0].nrows()
    }

    pub fn sphere_dim(&self) -> usize {
        self.m
    }

    /// K(t).
    pub fn kernel_at(&self, t: f64) -> DMatrix<f64> {
        let k = self.output_dim();
        let mut acc = DMatrix::zeros(k, k);
        let mut tl = 1.0;
        for a in &self.coeff_mats {
            acc += a * a.transpose() * tl;
            tl *= t;
        }
        acc
    }

    /// F(α) = K(cos α), the kernel as a function of angular distance.
    pub fn angular_kernel(&self, alpha: f64) -> DMatrix<f64> {
        self.kernel_at(alpha.cos())
    }

    /// Σ₀ = K(1).
    pub fn sigma0(&self) -> DMatrix<f64> {
        self.kernel_at(1.0)
    }

    /// Σ₁ = K′(1).
    pub fn sigma1(&self) -> DMatrix<f64> {
        let k = self.output_dim();
        let mut acc = DMatrix::zeros(k, k);
        for (l, a) in self.coeff_mats.iter().enumerate() {
            acc += a * a.transpose() * l as f64;
        }
        acc
    }
}

/// A Gaussian field X(x) = B(x)c on a domain, with c ~ N(0, C).
///
/// Column j of the basis is a map into ℝᵏ stored as one polynomial per
/// output component.
#[derive(Debug, Clone)]
pub struct FieldModel {
    domain: Domain,
    output_dim: usize,
    basis: Vec<Vec<Polynomial>>,
    coeff_cov: DMatrix<f64>,
    coeff_factor: DMatrix<f64>,
    isotropic: Option<IsotropicModel>,
}

impl FieldModel {
    pub fn new(
        domain: Domain,
        output_dim: usize,
        basis: Vec<Vec<Polynomial>>,
        coeff_cov: DMatrix<f64>,
    ) -> Result<Self> {
        let n = basis.len();
        if output_dim == 0 {
            return Err(Error::domain("output dimension must be positive"));
        }
        if coeff_cov.nrows() != n || coeff_cov.ncols() != n {
            return Err(Error::domain(format!(
                "coefficient covariance is {}x{}, basis has {n} functions",
                coeff_cov.nrows(),
                coeff_cov.ncols()
            )));
        }
        for (j, col) in basis.iter().enumerate() {
            if col.len() != output_dim {
                return Err(Error::domain(format!(
                    "basis function {j} has {} components, expected {output_dim}",
                    col.len()
                )));
            }
            if col.iter().any(|p| !p.is_zero() && p.nvars() != domain.ambient_dim()) {
                return Err(Error::domain(format!(
                    "basis function {j} is not a polynomial in {} variables",
                    domain.ambient_dim()
                )));
            }
        }
        if coeff_cov.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("coefficient covariance has non-finite entries"));
        }
        let sym = symmetrize(&coeff_cov);
        if (&sym - &coeff_cov).amax() > 1e-12 * coeff_cov.amax().max(1.0) {
            return Err(Error::domain("coefficient covariance is not symmetric"));
        }
        if n > 0 && crate::linalg::min_eigenvalue(&sym) < -1e-10 * sym.amax().max(1.0) {
            return Err(Error::domain("coefficient covariance is not positive semidefinite"));
        }
        let coeff_factor = pivoted_cholesky(&sym, FACTOR_TOL);
        Ok(FieldModel {
            domain,
            output_dim,
            basis,
            coeff_cov: sym,
            coeff_factor,
            isotropic: None,
        })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn basis_len(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Polynomial>] {
        &self.basis
    }

    pub fn coeff_cov(&self) -> &DMatrix<f64> {
        &self.coeff_cov
    }

    /// Factor L with L Lᵀ = C (columns = numerical rank).
    pub fn coeff_factor(&self) -> &DMatrix<f64> {
        &self.coeff_factor
    }

    /// The isotropic description, when the model was built from one.
    pub fn isotropic(&self) -> Option<&IsotropicModel> {
        self.isotropic.as_ref()
    }

    /// Basis matrix B(x), k × N.
    pub fn basis_matrix(&self, x: &[f64]) -> DMatrix<f64> {
        let k = self.output_dim;
        DMatrix::from_fn(k, self.basis.len(), |o, j| self.basis[j][o].eval(x))
    }

    /// B(x) and its tangent derivatives stacked as an (mk) × N matrix whose
    /// row i·k + o is ∂ᵢ of output o.
    pub fn basis_jet(&self, x: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
        let k = self.output_dim;
        let frame = self.domain.tangent_frame(x);
        let m = frame.ncols();
        let n = self.basis.len();
        let mut b0 = DMatrix::zeros(k, n);
        let mut bd = DMatrix::zeros(m * k, n);
        for (j, col) in self.basis.iter().enumerate() {
            for (o, poly) in col.iter().enumerate() {
                let (v, g) = poly.eval_grad(x);
                b0[(o, j)] = v;
                for i in 0..m {
                    bd[(i * k + o, j)] = (0..g.len()).map(|a| g[a] * frame[(a, i)]).sum();
                }
            }
        }
        (b0, bd)
    }

    /// K(x, y) = B(x) C B(y)ᵀ.
    pub fn kernel(&self, x: &[f64], y: &[f64]) -> DMatrix<f64> {
        let lx = self.basis_matrix(x) * &self.coeff_factor;
        let ly = self.basis_matrix(y) * &self.coeff_factor;
        lx * ly.transpose()
    }
}

/// Covariance blocks of the first jet (X(p), dₚX) in the domain's tangent frame.
#[derive(Debug, Clone, PartialEq)]
pub struct JetCovariance {
    pub k0: DMatrix<f64>,
    pub k01: DMatrix<f64>,
    pub k1: DMatrix<f64>,
}

impl JetCovariance {
    pub fn output_dim(&self) -> usize {
        self.k0.nrows()
    }

    pub fn domain_dim(&self) -> usize {
        if self.k0.nrows() == 0 {
            0
        } else {
            self.k1.nrows() / self.k0.nrows()
        }
    }

    /// The full (k + mk) square covariance of the jet.
    pub fn full(&self) -> DMatrix<f64> {
        let k = self.k0.nrows();
        let mk = self.k1.nrows();
        let mut f = DMatrix::zeros(k + mk, k + mk);
        f.view_mut((0, 0), (k, k)).copy_from(&self.k0);
        f.view_mut((0, k), (k, mk)).copy_from(&self.k01);
        f.view_mut((k, 0), (mk, k)).copy_from(&self.k01.transpose());
        f.view_mut((k, k), (mk, mk)).copy_from(&self.k1);
        f
    }

    /// True when X(p) or dₚX has a degenerate law.
    pub fn is_degenerate(&self) -> bool {
        crate::linalg::min_eigenvalue(&self.k0) <= crate::linalg::NONDEGENERACY_TOL
            || crate::linalg::min_eigenvalue(&self.k1) <= crate::linalg::NONDEGENERACY_TOL
    }
}

pub fn jet_covariance(model: &FieldModel, p: &[f64]) -> JetCovariance {
    let (b0, bd) = model.basis_jet(p);
    let g0 = b0 * model.coeff_factor();
    let gd = bd * model.coeff_factor();
    JetCovariance {
        k0: &g0 * g0.transpose(),
        k01: &g0 * gd.transpose(),
        k1: symmetrize(&(&gd * gd.transpose())),
    }
}

/// Field Σ_ℓ A_ℓ ψ_ℓ on Sᵐ with ψ_ℓ independent k-vectors of degree-ℓ
/// Kostlan polynomials.
pub fn isotropic_model(iso: &IsotropicModel) -> Result<FieldModel> {
    let m = iso.sphere_dim();
    let domain = Domain::sphere(m)?;
    let k = iso.output_dim();
    let nvars = m + 1;
    let mut basis = Vec::new();
    for (l, a) in iso.coeff_mats().iter().enumerate() {
        if a.iter().all(|&v| v == 0.0) {
            continue;
        }
        for alpha in multi_indices(nvars, l as u32) {
            let scale = multinomial(&alpha).sqrt();
            for i in 0..k {
                let col = (0..k)
                    .map(|o| {
                        let c = a[(o, i)];
                        if c == 0.0 {
                            Polynomial::zero(nvars)
                        } else {
                            Polynomial::new(
                                nvars,
                                vec![Monomial {
                                    exponents: alpha.clone(),
                                    coef: c * scale,
                                }],
                            )
                        }
                    })
                    .collect::<Vec<_>>();
                if col.iter().any(|p| !p.is_zero()) {
                    basis.push(col);
                }
            }
        }
    }
    let n = basis.len();
    let mut model = FieldModel::new(domain, k, basis, DMatrix::identity(n, n))?;
    model.isotropic = Some(iso.clone());
    Ok(model)
}

/// k independent degree-d Kostlan polynomials restricted to Sᵐ.
pub fn kostlan_model(m: usize, d: usize, k: usize) -> Result<FieldModel> {
    if k == 0 {
        return Err(Error::domain("output dimension must be positive"));
    }
    let mut mats = vec![DMatrix::zeros(k, k); d + 1];
    mats[d] = DMatrix::identity(k, k);
    isotropic_model(&IsotropicModel::new(m, mats)?)
}

/// One sample path X(x) = B(x)c.
#[derive(Debug, Clone)]
pub struct Realization {
    model: Arc<FieldModel>,
    coeffs: DVector<f64>,
    seed: u64,
    components: Vec<Polynomial>,
}

impl Realization {
    pub fn from_coeffs(model: Arc<FieldModel>, coeffs: DVector<f64>, seed: u64) -> Self {
        let nvars = model.domain().ambient_dim();
        let components = (0..model.output_dim())
            .map(|o| {
                let mut acc = Polynomial::zero(nvars);
                for (j, col) in model.basis().iter().enumerate() {
                    acc.add_scaled(&col[o], coeffs[j]);
                }
                acc
            })
            .collect();
        Realization {
            model,
            coeffs,
            seed,
            components,
        }
    }

    pub fn model(&self) -> &Arc<FieldModel> {
        &self.model
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn output_dim(&self) -> usize {
        self.components.len()
    }

    /// Component `o` as a polynomial in ambient coordinates.
    pub fn component(&self, o: usize) -> &Polynomial {
        &self.components[o]
    }

    pub fn eval(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.components.len(), self.components.iter().map(|c| c.eval(x)))
    }

    /// Value and derivative in the domain's tangent frame (k × m).
    pub fn tangent_jet(&self, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let frame = self.model.domain().tangent_frame(x);
        let k = self.components.len();
        let mut v = DVector::zeros(k);
        let mut d = DMatrix::zeros(k, frame.ncols());
        for (o, c) in self.components.iter().enumerate() {
            let (val, g) = c.eval_grad(x);
            v[o] = val;
            for i in 0..frame.ncols() {
                d[(o, i)] = (0..g.len()).map(|a| g[a] * frame[(a, i)]).sum();
            }
        }
        (v, d)
    }
}

/// Standard normal vector of length n.
pub(crate) fn standard_normal_vec<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// Draws the realization on random stream 0 of `seed`.
pub fn sample(model: &Arc<FieldModel>, seed: u64) -> Realization {
    sample_stream(model, seed, 0)
}

/// Draws the realization on random stream `stream` of `seed`.
pub fn sample_stream(model: &Arc<FieldModel>, seed: u64, stream: u64) -> Realization {
    let mut rng = stream_rng(seed, stream);
    sample_with(model, &mut rng, seed)
}

pub fn sample_with<R: Rng>(model: &Arc<FieldModel>, rng: &mut R, seed: u64) -> Realization {
    let l = model.coeff_factor();
    let z = standard_normal_vec(rng, l.ncols());
    Realization::from_coeffs(model.clone(), l * z, seed)
}
