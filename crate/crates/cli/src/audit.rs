//! `audit` subcommands. Each prints one line per check and the combined
//! verdict; a FAIL anywhere makes the process exit with 1.

use anyhow::Result;
use longrate_core::asymptotics::{
    dir_curve_audit, dir_monotonicity_audit, pareto_kernel_certificate, stratification_audit,
};
use longrate_core::montecarlo::{
    deflated_bond_martingale_check, kernel_condition_audit, simulate_paths, DeflatedBondReport,
    KernelConditionReport,
};
use longrate_core::numeric::geometric_grid;
use longrate_core::report::{Audit, Check};
use serde::Serialize;

use crate::input::{self, Source};
use crate::output::{f, maybe_json, print_audit};
use crate::{DirArgs, KernelArgs, Outcome, ParetoArgs, StratArgs};

const DEFAULT_AUDIT_TIMES: [f64; 8] = [0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0];

pub fn dir(a: &DirArgs) -> Result<Outcome> {
    let schedule = input::horizon_schedule(&a.horizon)?;
    let report = match input::source(&a.model, &a.curve)? {
        Source::Model(m) => {
            let sim = input::simulation(&a.sim, m.run.as_ref(), 100, &DEFAULT_AUDIT_TIMES)?;
            let times = input::merged_grid(&[a.times.as_deref().unwrap_or(&sim.grid)]);
            let grid = input::merged_grid(&[&sim.grid, &times]);
            let ens = simulate_paths(&m.model.drivers(), &grid, sim.n_paths, sim.seed, m.model.correlation())?;
            dir_monotonicity_audit(&m.model, &ens, &times, &schedule)?
        }
        Source::Curve(c) => {
            let times = input::merged_grid(&[a.times.as_deref().unwrap_or(&DEFAULT_AUDIT_TIMES)]);
            dir_curve_audit(&c, &times, &schedule)?
        }
    };
    println!("t,min_long_exponential,max_long_exponential");
    for r in &report.rows {
        println!("{},{},{}", f(r.t), f(r.min_long_exponential), f(r.max_long_exponential));
    }
    maybe_json(a.out.as_deref(), &report)?;
    Ok(print_audit(&report))
}

pub fn strat(a: &StratArgs) -> Result<Outcome> {
    let schedule = input::horizon_schedule(&a.horizon)?;
    let mut indices = a.indices.clone();
    let report = match input::source(&a.model, &a.curve)? {
        Source::Model(m) => {
            indices.push(m.model.lambda());
            let state = input::state(&m.model, &a.state)?;
            stratification_audit(&m.model.evaluator_at(state), state.t, &indices, &schedule)?
        }
        Source::Curve(c) => stratification_audit(&c, a.state.t, &indices, &schedule)?,
    };
    println!("convention,value,status,limit");
    for e in &report.estimates {
        println!("{},{},{},{}", e.convention, f(e.value), e.status, e.limit);
    }
    maybe_json(a.out.as_deref(), &report)?;
    Ok(print_audit(&report))
}

#[derive(Serialize)]
struct KernelAudit {
    n_paths: usize,
    seed: u64,
    conditions: KernelConditionReport,
    deflated_bond: DeflatedBondReport,
    #[serde(skip)]
    checks: Vec<Check>,
}

impl Audit for KernelAudit {
    fn checks(&self) -> &[Check] {
        &self.checks
    }
}

pub fn kernel(a: &KernelArgs) -> Result<Outcome> {
    let m = input::require_model(&a.model)?;
    let sim = input::simulation(&a.sim, m.run.as_ref(), 100_000, &[])?;
    let extra = a.sim.grid.clone().unwrap_or_default();
    let grid = input::merged_grid(&[&a.probes, &a.bond_times, &extra]);
    let ens = simulate_paths(&m.model.drivers(), &grid, sim.n_paths, sim.seed, m.model.correlation())?;
    let conditions = kernel_condition_audit(&m.model, &ens, &a.probes)?;
    let deflated_bond = deflated_bond_martingale_check(&m.model, &ens, &a.bond_times, a.maturity)?;
    println!("t,mean_kernel,std_error,expected_kernel");
    for p in &conditions.probes {
        println!("{},{},{},{}", f(p.t), f(p.mean), f(p.std_error), f(p.expected));
    }
    println!("t,mean_deflated_bond,std_error,target");
    for p in &deflated_bond.rows {
        println!("{},{},{},{}", f(p.t), f(p.mean), f(p.std_error), f(p.expected));
    }
    let checks = conditions.checks.iter().chain(&deflated_bond.checks).cloned().collect();
    let report = KernelAudit { n_paths: sim.n_paths, seed: sim.seed, conditions, deflated_bond, checks };
    maybe_json(a.out.as_deref(), &report)?;
    Ok(print_audit(&report))
}

pub fn pareto(a: &ParetoArgs) -> Result<Outcome> {
    let m = input::require_model(&a.model)?;
    let default_grid = geometric_grid(1.0, 1e4, 3);
    let sim = input::simulation(&a.sim, m.run.as_ref(), 10_000, &default_grid)?;
    let grid = input::merged_grid(&[&sim.grid]);
    let ens = simulate_paths(&m.model.drivers(), &grid, sim.n_paths, sim.seed, m.model.correlation())?;
    let index = a.index.unwrap_or_else(|| m.model.lambda());
    let report = pareto_kernel_certificate(&m.model, &ens, index)?;
    println!("index {} model_index {}", f(report.index), f(report.model_index));
    println!("t,mean_scaled_kernel,std_error");
    for r in &report.tail_means {
        println!("{},{},{}", f(r.t), f(r.mean), f(r.std_error));
    }
    maybe_json(a.out.as_deref(), &report)?;
    Ok(print_audit(&report))
}
