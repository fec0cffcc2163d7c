use anyhow::Result;
use clap::error::ErrorKind;
use clap::CommandFactory;
use serde::Serialize;

use pu_core::dynamics::{
    integrate, integrate::interacting_charge, structure_discovery, Amplitudes, ClassicalSolution, Field, Potential,
};
use pu_core::hierarchy::{plane_coordinates, pu_polynomial, ChargeLadder};
use pu_core::numkit::Mat;
use pu_core::symmetry::{group_flow, paper_basis, GeneratorId};
use pu_core::transform::{
    build, catalog_pullback, closed_form_brackets, defining_residual, pullback_hamiltonian, pushforward_brackets,
    transform_tensor, BracketTable, DefiningResidual, FreeParams, PullbackFit, TransformKind, TransformSpec,
};
use pu_core::{PhaseState, PoissonTensor, PuParams};

use crate::args::{AmplitudeArgs, Cli, Command, Common, Format, GridArgs, TransformArgs};
use crate::output::{csv_bytes, emit, json_bytes};
use crate::report::{ReportParams, VerificationReport};
use crate::suites::{parameter_checks, resolved_readings, run_criteria};

/// Runs a parsed command. `Ok(false)` means the command ran but a
/// verification failed.
pub fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Verify(common) => verify(&common),
        Command::Hierarchy { common, n } => hierarchy(&common, n as usize).map(|_| true),
        Command::Transform { common, free } => transform(&common, &free).map(|_| true),
        Command::Flow { common, generator, s, amps, grid } => flow(&common, generator, &s, amps, grid).map(|_| true),
        Command::Simulate { common, amps, grid, potential } => {
            simulate(&common, amps, grid, potential.as_ref()).map(|_| true)
        }
        Command::Discover(common) => discover(&common).map(|_| true),
    }
}

fn params(common: &Common) -> Result<PuParams> {
    Ok(common.params.resolve()?)
}

fn write(common: &Common, default: Format, json: impl FnOnce() -> Result<Vec<u8>>, csv: impl FnOnce() -> Result<Vec<u8>>) -> Result<()> {
    let bytes = match common.format.unwrap_or(default) {
        Format::Json => json()?,
        Format::Csv => csv()?,
    };
    emit(common.output.as_deref(), &bytes)
}

/// A flag combination clap cannot express; `main` exits with status 2.
fn usage_error(msg: String) -> anyhow::Error {
    Cli::command().error(ErrorKind::ArgumentConflict, msg).into()
}

fn json_only(common: &Common, bytes: Vec<u8>) -> Result<()> {
    if common.format == Some(Format::Csv) {
        return Err(usage_error("this command only produces JSON".into()));
    }
    emit(common.output.as_deref(), &bytes)
}

fn rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

pub fn build_report(common: &Common) -> Result<VerificationReport> {
    let p = params(common)?;
    let mut checks = Vec::new();
    for criterion in run_criteria(common.seed) {
        checks.extend(criterion.checks);
    }
    let (param_checks, extra) = parameter_checks(&p, common.tol);
    checks.extend(param_checks);
    let mut resolved = resolved_readings();
    resolved.extend(extra);
    let report_params = ReportParams {
        alpha: p.alpha,
        beta: p.beta,
        omega1: common.params.omega1,
        omega2: common.params.omega2,
        tol: common.tol,
    };
    Ok(VerificationReport::new(common.seed, report_params, checks, resolved))
}

fn verify(common: &Common) -> Result<bool> {
    let report = build_report(common)?;
    json_only(common, json_bytes(&report)?)?;
    Ok(report.pass)
}

#[derive(Serialize)]
struct HierarchyRow {
    n: usize,
    c_h1: f64,
    c_h2: f64,
    p_n: f64,
}

fn hierarchy(common: &Common, n: usize) -> Result<()> {
    let p = params(common)?;
    let ladder = ChargeLadder::build(&p, n)?;
    let table: Vec<HierarchyRow> = ladder
        .charges
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let c = plane_coordinates(&p, h)?;
            Ok(HierarchyRow { n: i + 1, c_h1: c.h1, c_h2: c.h2, p_n: pu_polynomial(i + 1, &p) })
        })
        .collect::<Result<_>>()?;
    write(
        common,
        Format::Csv,
        || json_bytes(&table),
        || csv_bytes(&["n", "c_h1", "c_h2", "P_n"], &table),
    )
}

fn free_params(kind: TransformKind, a: &TransformArgs) -> Result<FreeParams> {
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| usage_error(format!("{kind} requires --{flag}")));
    Ok(match kind {
        TransformKind::Ta1(_) | TransformKind::Ta2(_) => {
            FreeParams::Ta { a_x: need(a.a_x, "a-x")?, a_y: need(a.a_y, "a-y")?, g: a.g }
        }
        TransformKind::Tb1 => FreeParams::Tb1 { a_x: need(a.a_x, "a-x")?, b_x: need(a.b_x, "b-x")?, g: a.g },
        TransformKind::Tb2(_) => FreeParams::Tb2 { a_x: need(a.a_x, "a-x")?, b_y: need(a.b_y, "b-y")?, g: a.g },
    })
}

#[derive(Serialize)]
struct Pullback {
    fit: PullbackFit,
    closed_form: (f64, f64),
}

#[derive(Serialize)]
struct TransformReport {
    spec: TransformSpec,
    determinant: f64,
    defining_residual: DefiningResidual,
    pullback: Pullback,
    /// Flow-preserving tensor in PU variables, or the reason it does not exist.
    tensor: Result<Vec<Vec<f64>>, String>,
    brackets: Option<BracketTable>,
    induced: InducedBrackets,
}

#[derive(Serialize)]
struct InducedBrackets {
    c1: f64,
    c2: f64,
    table: BracketTable,
}

fn transform(common: &Common, a: &TransformArgs) -> Result<()> {
    let p = params(common)?;
    let spec = build(a.kind, free_params(a.kind, a)?, &p)?;
    let tensor = transform_tensor(&spec, &p);
    let brackets = tensor.as_ref().ok().map(|j| pushforward_brackets(&spec, j));
    let report = TransformReport {
        determinant: spec.determinant(),
        defining_residual: defining_residual(&spec, &p),
        pullback: Pullback { fit: pullback_hamiltonian(&spec, &p)?, closed_form: catalog_pullback(&spec, &p)? },
        tensor: tensor.map(|j: PoissonTensor| rows(j.matrix())).map_err(|e| e.to_string()),
        brackets,
        induced: InducedBrackets { c1: a.c1, c2: a.c2, table: closed_form_brackets(&spec, &p, a.c1, a.c2)? },
        spec,
    };
    json_only(common, json_bytes(&report)?)
}

fn solution(p: &PuParams, amps: AmplitudeArgs) -> Result<ClassicalSolution> {
    Ok(ClassicalSolution::new(*p, Amplitudes::new(amps.a1, amps.a2, amps.b1, amps.b2))?)
}

fn grid_times(grid: GridArgs) -> Result<Vec<f64>> {
    let (n, h) = pu_core::dynamics::integrate::time_grid(grid.h, grid.t_end)?;
    Ok((0..=n).map(|k| k as f64 * h).collect())
}

fn state_row(lead: &[f64], v: &PhaseState) -> Vec<f64> {
    let mut row = lead.to_vec();
    row.extend(v.to_array());
    row
}

fn flow(common: &Common, id: GeneratorId, s_values: &[f64], amps: AmplitudeArgs, grid: GridArgs) -> Result<()> {
    let p = params(common)?;
    let sol = solution(&p, amps)?;
    let x = paper_basis(&p).get(id).clone();
    let times = grid_times(grid)?;
    let mut table = Vec::with_capacity(s_values.len() * times.len());
    for &s in s_values {
        for &t in &times {
            let v = group_flow(&x, s, &sol.eval(t))?;
            table.push(state_row(&[s, t], &v));
        }
    }
    write(
        common,
        Format::Csv,
        || json_bytes(&table),
        || csv_bytes(&["s", "t", "q", "qd", "qdd", "qddd"], table.iter().cloned()),
    )
}

fn simulate(common: &Common, amps: AmplitudeArgs, grid: GridArgs, potential: Option<&Potential>) -> Result<()> {
    let p = params(common)?;
    let v0 = solution(&p, amps)?.eval(0.0);
    let field = match potential {
        Some(pot) => Field::WithPotential(p, pot.clone()),
        None => Field::Linear(p),
    };
    let traj = integrate(&field, &v0, grid.h, grid.t_end)?;
    let ladder = ChargeLadder::build(&p, 4)?;
    let mut header = vec!["t", "q", "qd", "qdd", "qddd", "H1", "H2", "H3", "H4"];
    if potential.is_some() {
        header.push("Hint");
    }
    let interacting = potential.map(|pot| (interacting_charge(&p, pot), pot));
    let table: Vec<Vec<f64>> = traj
        .samples
        .iter()
        .map(|(t, v)| {
            let mut row = state_row(&[*t], v);
            row.extend(ladder.charges.iter().map(|h| h.value_at(v)));
            if let Some((h, pot)) = &interacting {
                row.push(h.value_at(v) + pot.value_at(v));
            }
            row
        })
        .collect();
    write(common, Format::Csv, || json_bytes(&table), || csv_bytes(&header, table.iter().cloned()))
}

fn discover(common: &Common) -> Result<()> {
    let p = params(common)?;
    let d = structure_discovery(&p)?;
    #[derive(Serialize)]
    struct Out<'a> {
        params: PuParams,
        #[serde(flatten)]
        discovery: &'a pu_core::dynamics::Discovery,
    }
    json_only(common, json_bytes(&Out { params: p, discovery: &d })?)
}
