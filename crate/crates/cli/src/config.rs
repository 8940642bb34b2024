//! JSON run configuration shared by all subcommands.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use dfs_core::control::RfSegment;
use dfs_core::dynamics::{IntegratorOptions, Polarization};
use dfs_core::hamiltonians::{DriveConfig, LaserPhase};
use dfs_core::Geometry;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub geometry: GeometrySpec,
    /// Static Zeeman splitting `δ` of the excited triplet.
    #[serde(default)]
    pub zeeman: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<LaserDrive>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rf: Option<RfDrive>,
    #[serde(default)]
    pub initial_state: InitialState,
    #[serde(default)]
    pub simulation: SimulationSpec,
    #[serde(default = "default_observables")]
    pub observables: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_observables() -> Vec<String> {
    vec!["psi_a1".into(), "psi_a2".into(), "psi_a3".into()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_over_lambda: Option<f64>,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default)]
    pub phi: f64,
}

fn default_theta() -> f64 {
    FRAC_PI_2
}

impl GeometrySpec {
    pub fn from_eta(eta: f64) -> Self {
        Self { eta: Some(eta), r_over_lambda: None, theta: FRAC_PI_2, phi: 0.0 }
    }

    pub fn eta(&self) -> Result<f64, CliError> {
        match (self.eta, self.r_over_lambda) {
            (Some(e), None) => Ok(e),
            (None, Some(r)) => Ok(2.0 * PI * r),
            _ => Err(CliError::config("geometry", "exactly one of `eta` and `r_over_lambda` must be given")),
        }
    }

    pub fn resolve(&self) -> Result<Geometry<f64>, CliError> {
        Geometry::new(self.eta()?, self.theta, self.phi).map_err(|e| CliError::config("geometry", e.to_string()))
    }

    pub fn is_along_x(&self) -> bool {
        (self.theta - FRAC_PI_2).abs() < 1e-12 && self.phi.abs() < 1e-12
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserDrive {
    pub polarization: Polarization,
    /// Rabi frequency in units of `γ`.
    pub rabi: f64,
    /// Detuning from the `m_j = 0` sublevel.
    #[serde(default)]
    pub detuning: f64,
    #[serde(default)]
    pub phase: LaserPhase<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RfDrive {
    pub pulses: Vec<RfPulse>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RfPulse {
    pub delta0: f64,
    #[serde(default)]
    pub phi_rf: f64,
    /// Offset of `ω_rf` from the qubit resonance `Ω_N − Ω_F`.
    #[serde(default)]
    pub detuning_rf: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Label(String),
    /// 16 amplitudes as `[re, im]` in the product basis.
    Ket(Vec<[f64; 2]>),
    /// 16×16 density matrix, row-major `[re, im]`.
    Matrix(Vec<Vec<[f64; 2]>>),
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Label("ground".into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Adaptive,
    Expm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSpec {
    pub t_end: f64,
    pub dt_out: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub method: Method,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        let o = IntegratorOptions::default();
        Self { t_end: 20.0, dt_out: 0.5, rtol: o.rtol, atol: o.atol, max_steps: o.max_steps, method: Method::Adaptive }
    }
}

impl SimulationSpec {
    pub fn options(&self) -> IntegratorOptions {
        IntegratorOptions { rtol: self.rtol, atol: self.atol, max_step: 0.0, max_steps: self.max_steps }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Eta,
    ROverLambda,
    Theta,
    Phi,
    Zeeman,
}

impl SweepParameter {
    pub fn column(self) -> &'static str {
        match self {
            SweepParameter::Eta => "sweep_eta",
            SweepParameter::ROverLambda => "sweep_r_over_lambda",
            SweepParameter::Theta => "sweep_theta",
            SweepParameter::Phi => "sweep_phi",
            SweepParameter::Zeeman => "sweep_zeeman",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Couplings,
    Spectrum,
    Dfs,
    Steady,
    /// Observables at the final time of each run.
    Evolve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.from],
            n => (0..n).map(|k| self.from + (self.to - self.from) * k as f64 / (n - 1) as f64).collect(),
        }
    }

    fn check(&self, field: &str) -> Result<(), CliError> {
        if self.points == 0 || !self.from.is_finite() || !self.to.is_finite() {
            return Err(CliError::config(field, "needs finite bounds and at least one point"));
        }
        Ok(())
    }
}

impl std::str::FromStr for GridSpec {
    type Err = String;

    /// `FROM:TO:POINTS`.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected FROM:TO:POINTS, got `{s}`"));
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}"));
        Ok(GridSpec {
            from: num(parts[0])?,
            to: num(parts[1])?,
            points: parts[2].trim().parse().map_err(|e| format!("`{}`: {e}", parts[2]))?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub analysis: Analysis,
}

impl SweepSpec {
    pub fn grid(&self) -> GridSpec {
        GridSpec { from: self.from, to: self.to, points: self.points }
    }
}

/// `(l, z)` grid in units of `λ₀`, in the plane spanned by `e_z` and `e_φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub l: GridSpec,
    pub z: GridSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
}

impl RunConfig {
    pub fn new(geometry: GeometrySpec) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: None,
            geometry,
            zeeman: 0.0,
            drive: None,
            rf: None,
            initial_state: InitialState::default(),
            simulation: SimulationSpec::default(),
            observables: default_observables(),
            sweep: None,
            surface: None,
            output: OutputSpec::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::config("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.to_path_buf(), e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config { field, message } => CliError::Config { field, message: format!("{message} (in {})", path.display()) },
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        self.geometry.resolve()?;
        if !self.zeeman.is_finite() {
            return Err(CliError::config("zeeman", "must be finite"));
        }
        if self.drive.is_some() && self.rf.is_some() {
            return Err(CliError::config("drive", "`drive` and `rf` are mutually exclusive; give at most one"));
        }
        if let Some(d) = &self.drive {
            if !d.rabi.is_finite() || !d.detuning.is_finite() {
                return Err(CliError::config("drive", "rabi and detuning must be finite"));
            }
        }
        if let Some(rf) = &self.rf {
            if rf.pulses.is_empty() {
                return Err(CliError::config("rf.pulses", "at least one pulse is required"));
            }
            for (k, p) in rf.pulses.iter().enumerate() {
                if !(p.delta0 >= 0.0 && p.duration > 0.0 && p.phi_rf.is_finite() && p.detuning_rf.is_finite()) {
                    return Err(CliError::config(
                        &format!("rf.pulses[{k}]"),
                        "delta0 must be non-negative, duration positive, phases finite",
                    ));
                }
            }
        }
        let s = &self.simulation;
        if !(s.t_end >= 0.0 && s.dt_out > 0.0 && s.t_end.is_finite()) {
            return Err(CliError::config("simulation", "t_end must be non-negative and dt_out positive"));
        }
        if !(s.rtol > 0.0 && s.atol > 0.0) || s.max_steps == 0 {
            return Err(CliError::config("simulation", "tolerances and max_steps must be positive"));
        }
        if s.method == Method::Expm && self.rf.is_some() {
            return Err(CliError::config("simulation.method", "`expm` needs a time-independent generator; rf runs must use `adaptive`"));
        }
        if let Some(sw) = &self.sweep {
            sw.grid().check("sweep")?;
        }
        if let Some(sf) = &self.surface {
            sf.l.check("surface.l")?;
            sf.z.check("surface.z")?;
        }
        match &self.initial_state {
            InitialState::Ket(k) if k.len() != 16 => {
                return Err(CliError::config("initial_state.ket", format!("expected 16 amplitudes, got {}", k.len())))
            }
            InitialState::Matrix(m) if m.len() != 16 || m.iter().any(|r| r.len() != 16) => {
                return Err(CliError::config("initial_state.matrix", "expected a 16x16 matrix"))
            }
            _ => {}
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<Geometry<f64>, CliError> {
        self.geometry.resolve()
    }

    /// Laser drive, or the undriven configuration, with this run's Zeeman splitting.
    pub fn drive_config(&self) -> DriveConfig<f64> {
        let mut d = match &self.drive {
            Some(l) => {
                let mut d = match l.polarization {
                    Polarization::X => DriveConfig::x_polarized(l.rabi),
                    Polarization::Y => DriveConfig::y_polarized(l.rabi),
                };
                d.delta2 = l.detuning;
                d.phase = l.phase;
                d
            }
            None => DriveConfig::undriven(),
        };
        d.zeeman = self.zeeman;
        d
    }

    pub fn rf_segments(&self) -> Result<Vec<RfSegment<f64>>, CliError> {
        let eta = self.geometry.eta()?;
        let Some(rf) = &self.rf else { return Ok(Vec::new()) };
        rf.pulses
            .iter()
            .map(|p| RfSegment::tuned(eta, p.delta0, p.phi_rf, p.detuning_rf, p.duration).map_err(CliError::from))
            .collect()
    }

    /// Copy with one swept parameter replaced.
    pub fn with_parameter(&self, p: SweepParameter, value: f64) -> Self {
        let mut c = self.clone();
        match p {
            SweepParameter::Eta => {
                c.geometry.eta = Some(value);
                c.geometry.r_over_lambda = None;
            }
            SweepParameter::ROverLambda => {
                c.geometry.eta = None;
                c.geometry.r_over_lambda = Some(value);
            }
            SweepParameter::Theta => c.geometry.theta = value,
            SweepParameter::Phi => c.geometry.phi = value,
            SweepParameter::Zeeman => c.zeeman = value,
        }
        c.sweep = None;
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full() -> RunConfig {
        let mut c = RunConfig::new(GeometrySpec { eta: None, r_over_lambda: Some(0.1), theta: 1.0, phi: 0.5 });
        c.name = Some("t".into());
        c.zeeman = 0.25;
        c.drive = Some(LaserDrive { polarization: Polarization::Y, rabi: 5.0, detuning: 0.1, phase: LaserPhase::Explicit(0.3) });
        c.sweep = Some(SweepSpec {
            parameter: SweepParameter::Theta,
            from: 0.0,
            to: 1.0,
            points: 3,
            analysis: Analysis::Steady,
        });
        c.surface = Some(SurfaceSpec { l: GridSpec { from: -1.0, to: 1.0, points: 4 }, z: GridSpec { from: 0.1, to: 1.0, points: 2 } });
        c.output.stem = Some("x".into());
        c
    }

    #[test]
    fn round_trip() {
        let c = full();
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
        let mut r = RunConfig::new(GeometrySpec::from_eta(1.0));
        r.rf = Some(RfDrive { pulses: vec![RfPulse { delta0: 1.0, phi_rf: 3.0, detuning_rf: 0.0, duration: 0.5 }] });
        r.initial_state = InitialState::Ket(vec![[0.0, 0.0]; 16]);
        assert_eq!(RunConfig::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn rejects_conflicting_inputs() {
        let mut c = full();
        c.geometry.eta = Some(1.0);
        assert!(matches!(c.validate(), Err(CliError::Config { field, .. }) if field == "geometry"));

        let mut c = full();
        c.rf = Some(RfDrive { pulses: vec![RfPulse { delta0: 1.0, phi_rf: 0.0, detuning_rf: 0.0, duration: 1.0 }] });
        assert!(matches!(c.validate(), Err(CliError::Config { field, .. }) if field == "drive"));

        let text = full().to_json().replace("\"schema_version\": 1", "\"schema_version\": 7");
        assert!(matches!(RunConfig::from_json(&text), Err(CliError::Config { field, .. }) if field == "schema_version"));

        let text = full().to_json().replace("\"zeeman\"", "\"zeman\"");
        assert!(RunConfig::from_json(&text).is_err());
    }

    #[test]
    fn grid_parsing() {
        let g: GridSpec = "0.1:0.5:5".parse().unwrap();
        let v = g.values();
        assert_eq!(v.len(), 5);
        assert!(v.iter().zip([0.1, 0.2, 0.3, 0.4, 0.5]).all(|(a, b)| (a - b).abs() < 1e-15));
        assert!("1:2".parse::<GridSpec>().is_err());
    }

    #[test]
    fn sweep_substitution() {
        let c = full().with_parameter(SweepParameter::Eta, 2.0);
        assert_eq!(c.geometry.eta().unwrap(), 2.0);
        assert!(c.sweep.is_none());
    }
}
