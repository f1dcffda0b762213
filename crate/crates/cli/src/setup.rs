//! Turns configuration entries into core objects.

use std::sync::Arc;

use kacrice_core::curves::SphereCurve;
use kacrice_core::grf::{isotropic_model, Domain, FieldModel, IsotropicModel, Monomial, Polynomial};
use kacrice_core::kacrice::{LevelSetW, Region};
use nalgebra::DMatrix;

use crate::config::{CurveSpec, DomainSpec, ModelSpec, NumericParams, TargetSpec};
use crate::CliError;

fn invalid(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("at `{path}`: {msg}"))
}

/// Kostlan components of the given degrees, independent of each other.
pub fn kostlan_family(m: usize, degrees: &[u32]) -> Result<FieldModel, CliError> {
    if degrees.is_empty() {
        return Err(invalid("model.degrees", "must not be empty"));
    }
    let k = degrees.len();
    let top = *degrees.iter().max().unwrap() as usize;
    let mut mats = vec![DMatrix::zeros(k, k); top + 1];
    for (i, &d) in degrees.iter().enumerate() {
        mats[d as usize][(i, i)] = 1.0;
    }
    let iso = IsotropicModel::new(m, mats).map_err(|e| invalid("model.m", e))?;
    Ok(isotropic_model(&iso)?)
}

fn matrix_from_rows(path: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>, CliError> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(invalid(path, "matrix must not be empty"));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != ncols) {
        return Err(invalid(&format!("{path}[{i}]"), format!("expected {ncols} entries")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn build_model(spec: &ModelSpec) -> Result<Arc<FieldModel>, CliError> {
    let model = match spec {
        ModelSpec::Kostlan { m, degrees } => kostlan_family(*m, degrees)?,
        ModelSpec::MixedKostlan { m, matrices } => {
            if matrices.is_empty() {
                return Err(invalid("model.matrices", "must not be empty"));
            }
            let mats = matrices
                .iter()
                .enumerate()
                .map(|(l, rows)| matrix_from_rows(&format!("model.matrices[{l}]"), rows))
                .collect::<Result<Vec<_>, _>>()?;
            let iso = IsotropicModel::new(*m, mats).map_err(|e| invalid("model", e))?;
            isotropic_model(&iso)?
        }
        ModelSpec::CustomBasis {
            domain,
            output_dim,
            basis,
            coeff_cov,
        } => {
            let domain = match domain {
                DomainSpec::Circle => Domain::Circle,
                DomainSpec::Sphere => Domain::Sphere,
                DomainSpec::Cube { m } => Domain::Cube(*m),
            };
            let nvars = domain.ambient_dim();
            let mut funcs = Vec::with_capacity(basis.len());
            for (j, terms) in basis.iter().enumerate() {
                let mut comps = vec![Vec::new(); *output_dim];
                for (t, term) in terms.iter().enumerate() {
                    let path = format!("model.basis[{j}][{t}]");
                    if term.exponents.len() != nvars {
                        return Err(invalid(&path, format!("exponents need {nvars} entries")));
                    }
                    if term.output >= *output_dim {
                        return Err(invalid(&path, format!("output must be < {output_dim}")));
                    }
                    comps[term.output].push(Monomial {
                        exponents: term.exponents.clone(),
                        coef: term.coef,
                    });
                }
                funcs.push(comps.into_iter().map(|c| Polynomial::new(nvars, c)).collect());
            }
            let cov = if basis.is_empty() {
                DMatrix::zeros(0, 0)
            } else {
                matrix_from_rows("model.coeff_cov", coeff_cov)?
            };
            FieldModel::new(domain, *output_dim, funcs, cov).map_err(|e| invalid("model", e))?
        }
    };
    Ok(Arc::new(model))
}

pub fn build_target(spec: &TargetSpec) -> Result<LevelSetW, CliError> {
    let w = match spec {
        TargetSpec::Point { y } => {
            if y.is_empty() {
                return Err(invalid("target.y", "must not be empty"));
            }
            LevelSetW::point(y)
        }
        TargetSpec::Circle { radius } => LevelSetW::circle(*radius).map_err(|e| invalid("target.radius", e))?,
        TargetSpec::Sphere { radius } => LevelSetW::sphere(*radius).map_err(|e| invalid("target.radius", e))?,
        TargetSpec::Linear { basis } => {
            // Columns are given as a list of vectors.
            let cols = matrix_from_rows("target.basis", basis)?.transpose();
            LevelSetW::linear(&cols).map_err(|e| invalid("target.basis", e))?
        }
        TargetSpec::HalfLine => LevelSetW::half_line(),
        TargetSpec::ExponentialSpiral => LevelSetW::exponential_spiral(),
    };
    Ok(w)
}

pub fn build_curve(path: &str, spec: &CurveSpec) -> Result<SphereCurve, CliError> {
    match spec {
        CurveSpec::GreatCircle { normal } => SphereCurve::great_circle(*normal),
        CurveSpec::Latitude { polar_radius } => SphereCurve::latitude(*polar_radius),
    }
    .map_err(|e| invalid(path, e))
}

/// Outer cubature over the whole domain.
pub fn full_region(domain: Domain, p: &NumericParams) -> Region {
    match domain {
        Domain::Circle => Region::Circle { nodes: p.circle_nodes },
        Domain::Sphere => Region::Sphere {
            n_polar: p.sphere_polar,
            n_azimuth: p.sphere_azimuth,
        },
        Domain::Cube(_) => Region::Cube { order: p.sphere_polar },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::TermSpec;

    #[test]
    fn kostlan_family_matches_core_kostlan() {
        let a = kostlan_family(1, &[3, 3]).unwrap();
        let b = kacrice_core::grf::kostlan_model(1, 3, 2).unwrap();
        assert_eq!(a.output_dim(), 2);
        let p = [0.6, 0.8];
        assert!((a.kernel(&p, &[1.0, 0.0]) - b.kernel(&p, &[1.0, 0.0])).amax() < 1e-12);
    }

    #[test]
    fn mixed_degrees_are_independent_components() {
        let model = kostlan_family(2, &[2, 3]).unwrap();
        let iso = model.isotropic().unwrap();
        let s1 = iso.sigma1();
        assert!((s1[(0, 0)] - 2.0).abs() < 1e-12 && (s1[(1, 1)] - 3.0).abs() < 1e-12);
        assert_eq!(s1[(0, 1)], 0.0);
    }

    #[test]
    fn custom_basis_errors_carry_paths() {
        let spec = ModelSpec::CustomBasis {
            domain: DomainSpec::Circle,
            output_dim: 1,
            basis: vec![vec![TermSpec { output: 0, exponents: vec![1], coef: 1.0 }]],
            coeff_cov: vec![vec![1.0]],
        };
        let err = build_model(&spec).unwrap_err().to_string();
        assert!(err.contains("model.basis[0][0]"), "{err}");
    }

    #[test]
    fn custom_basis_builds() {
        let spec = ModelSpec::CustomBasis {
            domain: DomainSpec::Circle,
            output_dim: 1,
            basis: vec![
                vec![TermSpec { output: 0, exponents: vec![1, 0], coef: 1.0 }],
                vec![TermSpec { output: 0, exponents: vec![0, 1], coef: 1.0 }],
            ],
            coeff_cov: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        };
        let model = build_model(&spec).unwrap();
        let k = model.kernel(&[1.0, 0.0], &[0.0, 1.0]);
        assert_eq!(k[(0, 0)], 0.0);
    }

    #[test]
    fn linear_target_takes_columns() {
        let w = build_target(&TargetSpec::Linear { basis: vec![vec![1.0, 1.0]] }).unwrap();
        assert_eq!((w.ambient_dim(), w.codim()), (2, 1));
    }
}
