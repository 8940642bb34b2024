//! One function per analysis. Each returns a [`Table`]; sweeps reuse the single-point rows.

use nalgebra::{Complex, Vector3};
use rayon::prelude::*;
use serde_json::{json, Value};

use dfs_core::basis::{Operator, ProductBasis, DIM};
use dfs_core::control::{
    delta_for_target, rf_generator, rwa_sequence_bloch, simulate_rf_sequence, simulate_static_bloch,
    static_model_bloch,
};
use dfs_core::dfs::{default_null_tolerance, dfs_leakage_rate, dissipator_null_space};
use dfs_core::dynamics::{evolve, evolve_expm, evolve_piecewise, laser_generator, steady_state, DensityMatrix, Trajectory};
use dfs_core::entanglement::concurrence;
use dfs_core::hamiltonians::{
    build_dissipator, build_h_laser, build_h_omega, build_liouvillian, kossakowski_matrix,
};
use dfs_core::spectral::{bohr_frequency, numeric_spectrum, Symmetry};
use dfs_core::{closed_form_couplings, CouplingSet, Geometry};

use crate::config::{Analysis, InitialState, Method, RunConfig};
use crate::output::{matrix_json, Cell, Table};
use crate::states::{ket_from_pairs, parse_observables, parse_state};
use crate::CliError;

pub type Row = (Vec<String>, Vec<Cell>);

fn names(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}{i}"))
}

fn geometry_cells(g: &Geometry<f64>) -> (Vec<String>, Vec<Cell>) {
    (
        vec!["eta".into(), "theta".into(), "phi".into()],
        vec![g.eta.into(), g.theta.into(), g.phi.into()],
    )
}

pub fn single(row: Row) -> Table {
    let mut t = Table::new(row.0);
    t.push(row.1);
    t
}

pub fn couplings_row(cfg: &RunConfig) -> Result<Row, CliError> {
    let g = cfg.geometry()?;
    let cs = closed_form_couplings(&g)?;
    let (mut h, mut r) = geometry_cells(&g);
    for (tag, m) in [("omega", &cs.omega), ("gamma", &cs.gamma_cross)] {
        for i in 0..3 {
            for j in 0..3 {
                h.push(format!("{tag}_{}{}_re", i + 1, j + 1));
                h.push(format!("{tag}_{}{}_im", i + 1, j + 1));
                r.push(m[(i, j)].re.into());
                r.push(m[(i, j)].im.into());
            }
        }
    }
    h.extend(["omega_f".into(), "omega_n".into()]);
    r.extend([cs.omega_f.into(), cs.omega_n.into()]);
    h.extend(names("gamma_a", 3).chain(names("gamma_s", 3)));
    r.extend(cs.decay.antisym.iter().chain(&cs.decay.sym).map(|&x| Cell::Num(x)));
    Ok((h, r))
}

pub fn spectrum_row(cfg: &RunConfig) -> Result<Row, CliError> {
    let g = cfg.geometry()?;
    let s = numeric_spectrum(&closed_form_couplings(&g)?, cfg.zeeman);
    let (mut h, mut r) = geometry_cells(&g);
    h.push("delta".into());
    r.push(cfg.zeeman.into());
    h.extend(names("lambda_a", 3).chain(names("lambda_s", 3)));
    for sym in Symmetry::BOTH {
        r.extend(s.shifts(sym).map(Cell::Num));
    }
    h.push("omega_b".into());
    r.push(if g.eta > 0.0 { bohr_frequency(g.eta, cfg.zeeman)? } else { f64::NAN }.into());
    h.extend(names("decay_a", 3).chain(names("decay_s", 3)));
    for sym in Symmetry::BOTH {
        r.extend(s.decay_rates(sym).map(Cell::Num));
    }
    Ok((h, r))
}

fn dfs_cells(cs: &CouplingSet<f64>, tol: f64) -> (Vec<String>, Vec<Cell>) {
    let ns = dissipator_null_space(&build_dissipator(cs), tol);
    let sv = &ns.singular_values;
    let kept = if ns.dimension > 0 { sv[ns.dimension - 1] } else { f64::NAN };
    let next = sv.get(ns.dimension).copied().unwrap_or(f64::NAN);
    (
        vec![
            "kernel_dimension".into(),
            "largest_kernel_sv".into(),
            "smallest_nonkernel_sv".into(),
            "gap".into(),
            "ill_conditioned".into(),
        ],
        vec![ns.dimension.into(), kept.into(), next.into(), (next / kept).into(), ns.ill_conditioned.into()],
    )
}

pub fn dfs_row(cfg: &RunConfig, tol: f64) -> Result<Row, CliError> {
    let g = cfg.geometry()?;
    let cs = closed_form_couplings(&g)?;
    let (mut h, mut r) = geometry_cells(&g);
    let (dh, dr) = dfs_cells(&cs, tol);
    h.extend(dh);
    r.extend(dr);
    h.extend(names("leak_a", 3));
    r.extend(dfs_leakage_rate(&cs, &g).map(Cell::Num));
    Ok((h, r))
}

/// Kernel of the dissipator built from the `R → 0` rates.
pub fn dfs_limit_row(tol: f64) -> Row {
    let (mut h, mut r) = (vec!["eta".to_string()], vec![Cell::Num(0.0)]);
    let (dh, dr) = dfs_cells(&CouplingSet::zero_distance_limit(), tol);
    h.extend(dh);
    r.extend(dr);
    h.extend(names("leak_a", 3));
    r.extend([Cell::Num(0.0), Cell::Num(0.0), Cell::Num(0.0)]);
    (h, r)
}

pub fn surface_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let sf = cfg.surface.ok_or_else(|| CliError::config("surface", "a surface grid is required"))?;
    let pts = dfs_core::spectral::energy_surface(&sf.l.values(), &sf.z.values(), cfg.zeeman, cfg.geometry.phi)?;
    let mut t = Table::new(["l", "z", "lambda_a1", "lambda_a2", "lambda_a3"].map(String::from).to_vec());
    for p in pts {
        t.push(vec![p.l.into(), p.z.into(), p.lambda_a[0].into(), p.lambda_a[1].into(), p.lambda_a[2].into()]);
    }
    Ok(t)
}

fn initial_state(cfg: &RunConfig, g: &Geometry<f64>) -> Result<DensityMatrix<f64>, CliError> {
    let field = |e: dfs_core::Error| CliError::config("initial_state", e.to_string());
    match &cfg.initial_state {
        InitialState::Label(l) => DensityMatrix::pure(&parse_state(l, g, cfg.zeeman)?).map_err(field),
        InitialState::Ket(k) => DensityMatrix::pure(&ket_from_pairs(k)?).map_err(field),
        InitialState::Matrix(m) => {
            let rho = Operator::from_fn(|i, j| Complex::new(m[i][j][0], m[i][j][1]));
            DensityMatrix::new(rho).map_err(field)
        }
    }
}

/// The run's trajectory and, for RF runs, the frequency of the Bloch frame.
pub fn run_evolution(cfg: &RunConfig) -> Result<(Trajectory<f64>, Option<f64>), CliError> {
    let g = cfg.geometry()?;
    let rho0 = initial_state(cfg, &g)?;
    let sim = &cfg.simulation;
    let opts = sim.options();
    if cfg.rf.is_some() {
        let segs = cfg.rf_segments()?;
        let mut pieces = segs
            .iter()
            .map(|s| Ok((rf_generator(&g, cfg.zeeman, s)?, s.duration)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let total: f64 = segs.iter().map(|s| s.duration).sum();
        if sim.t_end > total + 1e-12 {
            pieces.push((laser_generator(&g, &cfg.drive_config())?, sim.t_end - total));
        }
        let traj = evolve_piecewise(&pieces, &rho0, sim.dt_out, &opts)?;
        return Ok((traj, Some(segs[0].omega_rf)));
    }
    let gen = laser_generator(&g, &cfg.drive_config())?;
    let traj = match sim.method {
        Method::Adaptive => evolve(&gen, &rho0, sim.t_end, sim.dt_out, &opts)?,
        Method::Expm => evolve_expm(gen.base(), &rho0, sim.t_end, sim.dt_out)?,
    };
    Ok((traj, None))
}

pub fn evolve_table(cfg: &RunConfig, traj: &Trajectory<f64>, frame: Option<f64>) -> Result<Table, CliError> {
    let g = cfg.geometry()?;
    let obs = parse_observables(&cfg.observables, &g, cfg.zeeman)?;
    let mut header = vec!["t".to_string()];
    header.extend(obs.iter().flat_map(|o| o.columns()));
    let mut t = Table::new(header);
    for (&time, rho) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![Cell::Num(time)];
        row.extend(obs.iter().flat_map(|o| o.values(rho.matrix(), time, frame)).map(Cell::Num));
        t.push(row);
    }
    Ok(t)
}

fn evolve_final_row(cfg: &RunConfig) -> Result<Row, CliError> {
    let (traj, frame) = run_evolution(cfg)?;
    let t = evolve_table(cfg, &traj, frame)?;
    let last = t.rows.last().cloned().unwrap_or_default();
    Ok((t.header, last))
}

pub fn rho_json(traj: &Trajectory<f64>) -> Value {
    let states: Vec<Value> = traj.states.iter().map(|r| matrix_json(DIM, DIM, |i, j| r.matrix()[(i, j)])).collect();
    json!({ "times": traj.times, "states": states })
}

pub fn steady_row(cfg: &RunConfig) -> Result<Row, CliError> {
    if cfg.rf.is_some() {
        return Err(CliError::config("rf", "steady states need a time-independent generator"));
    }
    let g = cfg.geometry()?;
    let gen = laser_generator(&g, &cfg.drive_config())?;
    let rho = steady_state(gen.base())?;
    let obs = parse_observables(&cfg.observables, &g, cfg.zeeman)?;
    let (mut h, mut r) = geometry_cells(&g);
    h.extend(obs.iter().flat_map(|o| o.columns()));
    r.extend(obs.iter().flat_map(|o| o.values(rho.matrix(), 0.0, None)).map(Cell::Num));
    let gamma = closed_form_couplings(&g)?.decay.antisym;
    h.extend(names("feeding_a", 3));
    for i in 0..3 {
        let k = dfs_core::spectral::psi_state(Symmetry::Antisymmetric, i + 1, &g);
        r.push(dfs_core::dynamics::feeding_rate(gamma[i], rho.population(&k)).into());
    }
    Ok((h, r))
}

/// Full-model Bloch trajectory next to its ideal two-level counterpart.
pub fn bloch_table(cfg: &RunConfig) -> Result<Table, CliError> {
    if !cfg.geometry.is_along_x() {
        return Err(CliError::config("geometry", "bloch runs need theta = pi/2, phi = 0"));
    }
    let eta = cfg.geometry.eta()?;
    let sim = &cfg.simulation;
    let opts = sim.options();
    let (run, model, tag) = if cfg.rf.is_some() {
        let segs = cfg.rf_segments()?;
        let frame = segs[0].omega_rf;
        let run = simulate_rf_sequence(eta, &segs, frame, sim.dt_out, &opts)?;
        let model = rwa_sequence_bloch(eta, &segs, frame, sim.dt_out)?.into_iter().map(|p| p.1).collect::<Vec<_>>();
        (run, model, "rwa")
    } else {
        let run = simulate_static_bloch(eta, cfg.zeeman, sim.t_end, sim.dt_out, &opts)?;
        let model = static_model_bloch(eta, cfg.zeeman, &run.trajectory.times)?;
        (run, model, "model")
    };
    let mut header: Vec<String> = ["t", "bloch_x", "bloch_y", "bloch_z", "bloch_norm", "qubit_population"].map(String::from).to_vec();
    header.extend(["x", "y", "z"].iter().map(|c| format!("{tag}_{c}")));
    let mut t = Table::new(header);
    for (k, &time) in run.trajectory.times.iter().enumerate() {
        let b = run.bloch[k];
        let m = model[k];
        t.push(vec![
            time.into(),
            b.x.into(),
            b.y.into(),
            b.z.into(),
            b.norm().into(),
            run.qubit_population[k].into(),
            m.x.into(),
            m.y.into(),
            m.z.into(),
        ]);
    }
    Ok(t)
}

pub fn target_delta(eta: f64, b: [f64; 3]) -> Result<f64, CliError> {
    Ok(delta_for_target(&Vector3::new(b[0], b[1], b[2]), eta)?)
}

pub fn concurrence_of(label: Option<&str>, amplitudes: Option<&[[f64; 2]]>, g: &Geometry<f64>, delta: f64) -> Result<f64, CliError> {
    let ket = match (label, amplitudes) {
        (Some(l), None) => parse_state(l, g, delta)?,
        (None, Some(a)) => ket_from_pairs(a)?,
        _ => return Err(CliError::config("state", "give exactly one of a state label and an amplitude vector")),
    };
    concurrence(&ket).map_err(|e| CliError::config("amplitudes", e.to_string()))
}

pub fn analysis_row(cfg: &RunConfig, a: Analysis) -> Result<Row, CliError> {
    match a {
        Analysis::Couplings => couplings_row(cfg),
        Analysis::Spectrum => spectrum_row(cfg),
        Analysis::Dfs => dfs_row(cfg, default_null_tolerance()),
        Analysis::Steady => steady_row(cfg),
        Analysis::Evolve => evolve_final_row(cfg),
    }
}

/// Runs the sweep points in parallel; rows keep the grid order.
pub fn sweep_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let sw = cfg.sweep.ok_or_else(|| CliError::config("sweep", "a sweep block is required"))?;
    let values = sw.grid().values();
    let rows: Vec<Row> = values
        .par_iter()
        .map(|&v| analysis_row(&cfg.with_parameter(sw.parameter, v), sw.analysis))
        .collect::<Result<_, _>>()?;
    let mut header = vec![sw.parameter.column().to_string()];
    header.extend(rows[0].0.iter().cloned());
    let mut t = Table::new(header);
    for (v, (_, r)) in values.iter().zip(rows) {
        let mut row = vec![Cell::Num(*v)];
        row.extend(r);
        t.push(row);
    }
    Ok(t)
}

/// Operators of the run's static generator, for debugging.
pub fn operators_json(cfg: &RunConfig) -> Result<Value, CliError> {
    let g = cfg.geometry()?;
    let cs = closed_form_couplings(&g)?;
    let h = build_h_laser(&cfg.drive_config(), &g) + build_h_omega(&cs);
    let k = kossakowski_matrix(&cs);
    let d = build_dissipator(&cs);
    let l = build_liouvillian(&h, &d);
    let labels: Vec<String> = (0..DIM).map(ProductBasis::label).collect();
    Ok(json!({
        "basis": labels,
        "hamiltonian": matrix_json(DIM, DIM, |i, j| h[(i, j)]),
        "kossakowski": matrix_json(6, 6, |i, j| k[(i, j)]),
        "dissipator": matrix_json(d.nrows(), d.ncols(), |i, j| d[(i, j)]),
        "liouvillian": matrix_json(l.nrows(), l.ncols(), |i, j| l[(i, j)]),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{GeometrySpec, SweepParameter, SweepSpec};

    #[test]
    fn couplings_row_is_complete() {
        let cfg = RunConfig::new(GeometrySpec::from_eta(1.0));
        let (h, r) = couplings_row(&cfg).unwrap();
        assert_eq!(h.len(), r.len());
        assert_eq!(h.len(), 3 + 36 + 2 + 6);
    }

    #[test]
    fn sweep_preserves_order() {
        let mut cfg = RunConfig::new(GeometrySpec::from_eta(1.0));
        cfg.sweep = Some(SweepSpec { parameter: SweepParameter::Eta, from: 0.5, to: 3.0, points: 6, analysis: Analysis::Couplings });
        let t = sweep_table(&cfg).unwrap();
        assert_eq!(t.rows.len(), 6);
        for (k, row) in t.rows.iter().enumerate() {
            assert_eq!(row[0], row[1]);
            assert_eq!(row[0], Cell::Num(0.5 + 0.5 * k as f64));
        }
    }

    #[test]
    fn limit_kernel() {
        let (_, r) = dfs_limit_row(1e-10);
        assert_eq!(r[1], Cell::Int(16));
    }
}
