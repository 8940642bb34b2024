//! State labels and observables accepted on the command line and in configs.

use nalgebra::Complex;

use dfs_core::basis::{antisym_ket, excitation_number, ground_ket, product_ket, sym_ket, Ket, Operator};
use dfs_core::control::{bloch_vector, qubit_basis, to_rotating_frame};
use dfs_core::dynamics::diagnostics;
use dfs_core::spectral::{planar_spectrum, psi_state, Symmetry};
use dfs_core::Geometry;

use crate::CliError;

fn level(s: &str, label: &str) -> Result<usize, CliError> {
    match s.parse::<usize>() {
        Ok(i) if (1..=3).contains(&i) => Ok(i),
        _ => Err(unknown(label)),
    }
}

fn unknown(label: &str) -> CliError {
    CliError::config(
        "state",
        format!("unknown state `{label}` (use ground, a1..a3, s1..s3, psi_a1.., psi_s1.., phi_a1.., phi_s1.., product:i,j)"),
    )
}

/// Resolves a state label. `psi_*` depend on the geometry, `phi_*` on the
/// splitting `delta` and need `θ = π/2`.
pub fn parse_state(label: &str, geom: &Geometry<f64>, delta: f64) -> Result<Ket<f64>, CliError> {
    let l = label.trim();
    if l == "ground" {
        return Ok(ground_ket());
    }
    if let Some(rest) = l.strip_prefix("product:") {
        let ij: Vec<&str> = rest.split(',').collect();
        let p = |s: &str| match s.trim().parse::<usize>() {
            Ok(i) if (1..=4).contains(&i) => Ok(i),
            _ => Err(unknown(label)),
        };
        if ij.len() != 2 {
            return Err(unknown(label));
        }
        return Ok(product_ket(p(ij[0])?, p(ij[1])?));
    }
    let sym_of = |c: &str| match c {
        "a" => Some(Symmetry::Antisymmetric),
        "s" => Some(Symmetry::Symmetric),
        _ => None,
    };
    if let Some(rest) = l.strip_prefix("psi_").or_else(|| l.strip_prefix("phi_")) {
        let (s, i) = rest.split_at(1.min(rest.len()));
        let sym = sym_of(s).ok_or_else(|| unknown(label))?;
        let i = level(i, label)?;
        if l.starts_with("psi_") {
            return Ok(psi_state(sym, i, geom));
        }
        if (geom.theta - std::f64::consts::FRAC_PI_2).abs() > 1e-12 {
            return Err(CliError::config("state", format!("`{label}` is only defined for theta = pi/2")));
        }
        let p = planar_spectrum(geom, delta)?;
        return Ok(match sym {
            Symmetry::Antisymmetric => p.phi_a[i - 1],
            Symmetry::Symmetric => p.phi_s[i - 1],
        });
    }
    if l.len() == 2 {
        let (s, i) = l.split_at(1);
        let i = level(i, label)?;
        return match s {
            "a" => Ok(antisym_ket(i)),
            "s" => Ok(sym_ket(i)),
            _ => Err(unknown(label)),
        };
    }
    Err(unknown(label))
}

/// 16 amplitudes given as `[re, im]` pairs.
pub fn ket_from_pairs(pairs: &[[f64; 2]]) -> Result<Ket<f64>, CliError> {
    if pairs.len() != 16 {
        return Err(CliError::config("amplitudes", format!("expected 16 amplitudes, got {}", pairs.len())));
    }
    Ok(Ket::from_iterator(pairs.iter().map(|p| Complex::new(p[0], p[1]))))
}

#[derive(Debug, Clone)]
enum Kind {
    Population(Ket<f64>),
    Trace,
    Purity,
    MinEigenvalue,
    Excited,
    Bloch,
    QubitPopulation,
}

/// One requested output quantity, evaluated on `ρ(t)`.
#[derive(Debug, Clone)]
pub struct Observable {
    name: String,
    kind: Kind,
}

impl Observable {
    pub fn parse(name: &str, geom: &Geometry<f64>, delta: f64) -> Result<Self, CliError> {
        let kind = match name {
            "trace" => Kind::Trace,
            "purity" => Kind::Purity,
            "min_eigenvalue" => Kind::MinEigenvalue,
            "excitations" => Kind::Excited,
            "qubit_population" | "bloch" => {
                if (geom.theta - std::f64::consts::FRAC_PI_2).abs() > 1e-12 || geom.phi.abs() > 1e-12 {
                    return Err(CliError::config("observables", format!("`{name}` needs theta = pi/2, phi = 0")));
                }
                if name == "bloch" {
                    Kind::Bloch
                } else {
                    Kind::QubitPopulation
                }
            }
            other => Kind::Population(parse_state(other, geom, delta).map_err(|e| match e {
                CliError::Config { message, .. } => CliError::config("observables", message),
                e => e,
            })?),
        };
        Ok(Self { name: name.to_string(), kind })
    }

    pub fn columns(&self) -> Vec<String> {
        match self.kind {
            Kind::Bloch => vec!["bloch_x".into(), "bloch_y".into(), "bloch_z".into()],
            _ => vec![self.name.clone()],
        }
    }

    /// `frame` rotates the Bloch vector into the frame turning at that frequency.
    pub fn values(&self, rho: &Operator<f64>, t: f64, frame: Option<f64>) -> Vec<f64> {
        match &self.kind {
            Kind::Population(k) => vec![k.dotc(&(rho * k)).re],
            Kind::Trace => vec![rho.trace().re],
            Kind::Purity => vec![(rho * rho).trace().re],
            Kind::MinEigenvalue => vec![diagnostics(rho).min_eigenvalue],
            Kind::Excited => vec![(excitation_number::<f64>() * rho).trace().re],
            Kind::QubitPopulation => vec![qubit_basis::<f64>().iter().map(|k| k.dotc(&(rho * k)).re).sum()],
            Kind::Bloch => {
                let b = match frame {
                    Some(w) => bloch_vector(&to_rotating_frame(rho, w, t)),
                    None => bloch_vector(rho),
                };
                vec![b.x, b.y, b.z]
            }
        }
    }
}

pub fn parse_observables(names: &[String], geom: &Geometry<f64>, delta: f64) -> Result<Vec<Observable>, CliError> {
    names.iter().map(|n| Observable::parse(n, geom, delta)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_resolve() {
        let g = Geometry::along_x(0.6);
        assert_eq!(parse_state("ground", &g, 0.0).unwrap(), ground_ket());
        assert_eq!(parse_state("a2", &g, 0.0).unwrap(), antisym_ket(2));
        assert_eq!(parse_state("product:1,4", &g, 0.0).unwrap(), product_ket(1, 4));
        assert!((parse_state("phi_a1", &g, 1.0).unwrap().norm() - 1.0).abs() < 1e-12);
        for bad in ["a4", "psi_x1", "product:0,1", "x", "phi_a"] {
            assert!(parse_state(bad, &g, 0.0).is_err(), "{bad}");
        }
        let tilted = Geometry::new(0.6, 1.0, 0.0).unwrap();
        assert!(parse_state("phi_s2", &tilted, 1.0).is_err());
        assert!(Observable::parse("bloch", &tilted, 0.0).is_err());
    }

    #[test]
    fn observables_on_ground_state() {
        let g = Geometry::along_x(0.6);
        let rho = ground_ket::<f64>() * ground_ket::<f64>().adjoint();
        let obs = parse_observables(&["trace".into(), "excitations".into(), "ground".into()], &g, 0.0).unwrap();
        let v: Vec<f64> = obs.iter().flat_map(|o| o.values(&rho, 0.0, None)).collect();
        assert_eq!(v, vec![1.0, 0.0, 1.0]);
    }
}
