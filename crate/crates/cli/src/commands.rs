//! Single-point subcommands.

use fbl_eee::channel::{self, ExpectationMethod, OperatingPoint};
use fbl_eee::effcap::{self, QosConfig};
use fbl_eee::optimize::{
    epsilon_ceiling, evaluate_candidate, optimal_power_with, solve_constrained, EpsilonMode, EpsilonRule, PowerBounds,
    RateConstraint, SolveConstraints,
};
use fbl_eee::specfun::RandomStream;
use fbl_eee::{db_to_linear, linear_to_db};

use crate::config::{Bundle, Method};
use crate::table::{Cell, CsvTable};
use crate::{CliError, Report};

fn point_qos(b: &Bundle) -> Result<QosConfig, CliError> {
    match b.point_theta {
        Some(theta) => Ok(QosConfig::with_exponent(theta, b.qos.arrival_rate)?),
        None => Ok(b.qos),
    }
}

fn deterministic(b: &Bundle, command: &str) -> Result<(), CliError> {
    if b.method == Method::MonteCarlo {
        return Err(CliError::Validation(format!(
            "method monte-carlo is not available for {command}; use eval or cross-check"
        )));
    }
    Ok(())
}

pub fn eval(b: &Bundle) -> Result<Report, CliError> {
    let qos = point_qos(b)?;
    let rho = db_to_linear(b.snr_db);
    let c = evaluate_candidate(
        &b.channel,
        &qos,
        &b.power,
        rho,
        EpsilonRule::Fixed(b.epsilon),
        b.method.model(),
    )?;
    let point = OperatingPoint::new(rho, c.epsilon, c.theta)?;
    let (psi, std_error) = if b.method == Method::MonteCarlo {
        let mut stream = RandomStream::new(b.seed);
        let est = channel::rate_functional_expectation(
            &b.channel,
            &point,
            ExpectationMethod::MonteCarlo {
                stream: &mut stream,
                count: b.samples,
            },
        )?;
        (est.mean, Some(est.std_error))
    } else {
        (effcap::psi(&b.channel, &point, b.method.model())?, None)
    };
    let ec = -psi.ln() / (f64::from(b.channel.blocklength()) * c.theta);
    let eee = ec / (c.p_nb * b.power.zeta * rho + b.power.p_c);
    let outage = b.delay().map(|(delta, _)| effcap::delay_outage(c.theta, ec, delta));

    let mut t = CsvTable::new([
        "snr_db",
        "rho",
        "epsilon",
        "theta",
        "p_nb",
        "psi",
        "psi_std_error",
        "ec_bpcu",
        "eee_bpcu_per_w",
        "delay_outage",
    ]);
    t.push(vec![
        Cell::Num(b.snr_db),
        Cell::Num(rho),
        Cell::Num(c.epsilon),
        Cell::Num(c.theta),
        Cell::Num(c.p_nb),
        Cell::Num(psi),
        Cell::opt(std_error),
        Cell::Num(ec),
        Cell::Num(eee),
        Cell::opt(outage),
    ]);
    Ok(Report::ok(t))
}

pub fn opt_eps(b: &Bundle) -> Result<Report, CliError> {
    deterministic(b, "opt-eps")?;
    let qos = point_qos(b)?;
    let rho = db_to_linear(b.snr_db);
    let c = evaluate_candidate(
        &b.channel,
        &qos,
        &b.power,
        rho,
        EpsilonRule::OptimalCapped(epsilon_ceiling()),
        b.method.model(),
    )?;
    let psi = (-c.ec * f64::from(b.channel.blocklength()) * c.theta).exp();
    let mut t = CsvTable::new([
        "snr_db",
        "theta",
        "p_nb",
        "epsilon_star",
        "psi",
        "ec_bpcu",
        "eee_bpcu_per_w",
        "at_boundary",
    ]);
    t.push(vec![
        Cell::Num(b.snr_db),
        Cell::Num(c.theta),
        Cell::Num(c.p_nb),
        Cell::Num(c.epsilon),
        Cell::Num(psi),
        Cell::Num(c.ec),
        Cell::Num(c.eee),
        Cell::Flag(c.epsilon_at_boundary),
    ]);
    if c.epsilon_at_boundary {
        t.note("epsilon_star lies on the search boundary [1e-12, 1-1e-12]");
    }
    Ok(Report::ok(t))
}

pub fn opt_power(b: &Bundle, bounds: &PowerBounds) -> Result<Report, CliError> {
    deterministic(b, "opt-power")?;
    let qos = point_qos(b)?;
    let opt = optimal_power_with(&b.channel, &qos, &b.power, b.epsilon, b.method.model(), bounds)?;
    let mut t = CsvTable::new([
        "rho_star_db",
        "rho_star",
        "eee_bpcu_per_w",
        "ec_bpcu",
        "theta",
        "p_nb",
        "root_rho_db",
        "disagreement_db",
    ]);
    t.push(vec![
        Cell::Num(linear_to_db(opt.rho)),
        Cell::Num(opt.rho),
        Cell::Num(opt.eee),
        Cell::Num(opt.candidate.ec),
        Cell::Num(opt.candidate.theta),
        Cell::Num(opt.candidate.p_nb),
        Cell::opt(opt.root_rho.map(linear_to_db)),
        Cell::opt(opt.disagreement_db),
    ]);
    t.note(format!(
        "golden iterations {}, root iterations {}",
        opt.golden_iterations,
        opt.root_iterations.map_or("n/a".into(), |i| i.to_string())
    ));
    Ok(Report::ok(t))
}

pub fn solve(b: &Bundle, rate_constraint: RateConstraint, epsilon_mode: EpsilonMode) -> Result<Report, CliError> {
    deterministic(b, "solve")?;
    let cons = SolveConstraints::new(b.rho_max(), b.epsilon_t, b.qos, b.power)?
        .with_rate_model(b.method.model())
        .with_rate_constraint(rate_constraint)
        .with_epsilon_mode(epsilon_mode);
    let r = solve_constrained(&b.channel, &cons);
    let outage = b
        .delay()
        .map(|(delta, _)| r.p_nb * (-r.theta_star * b.qos.arrival_rate * delta).exp());
    let mut t = CsvTable::new([
        "rho_star_db",
        "rho_star",
        "epsilon_star",
        "theta_star",
        "eee_star",
        "ec_star",
        "p_nb",
        "delay_outage",
        "feasible",
    ]);
    t.push(vec![
        Cell::Num(linear_to_db(r.rho_star)),
        Cell::Num(r.rho_star),
        Cell::Num(r.epsilon_star),
        Cell::Num(r.theta_star),
        Cell::Num(r.eee_star),
        Cell::Num(r.ec_star),
        Cell::Num(r.p_nb),
        Cell::opt(outage),
        Cell::Flag(r.feasible),
    ]);
    let d = &r.diagnostics;
    t.note(format!(
        "grid points {}, valid {}, meeting EC >= lambda {}, refinement iterations {}",
        d.grid_points, d.valid_points, d.feasible_points, d.refine_iterations
    ));
    match r.infeasibility {
        Some(reason) => {
            t.note(format!("infeasible: {reason}"));
            Ok(Report {
                table: t,
                infeasible: Some(reason),
            })
        }
        None => Ok(Report::ok(t)),
    }
}
