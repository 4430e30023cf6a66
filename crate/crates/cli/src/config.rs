//! Configuration file: TOML sections `channel`, `power`, `qos`, `constraints`,
//! `point` and `run`. Every key can be overridden by a flag of the same name.

use fbl_eee::channel::ChannelConfig;
use fbl_eee::db_to_linear;
use fbl_eee::effcap::{BufferMode, DelayTarget, EcModel, PowerModelConfig, QosConfig};
use fbl_eee::specfun::{DEFAULT_SAMPLES, DEFAULT_SEED};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Built-in defaults, also shipped as `configs/default.toml`.
pub const BUILTIN_DEFAULTS: &str = include_str!("../../../configs/default.toml");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    channel: RawChannel,
    power: RawPower,
    qos: RawQos,
    constraints: RawConstraints,
    point: Option<RawPoint>,
    run: Option<RawRun>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    blocklength: i64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPower {
    zeta: f64,
    p_c: f64,
    buffer_mode: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQos {
    arrival_rate: f64,
    theta: Option<f64>,
    delta: Option<f64>,
    lambda_out: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraints {
    rho_max_db: f64,
    epsilon_t: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoint {
    snr_db: Option<f64>,
    epsilon: Option<f64>,
    theta: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    method: Option<String>,
    seed: Option<u64>,
    samples: Option<u64>,
    jobs: Option<u64>,
}

/// How expectations are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Oracle,
    Shannon,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::Oracle => "oracle",
            Method::Shannon => "shannon",
            Method::MonteCarlo => "monte-carlo",
        }
    }

    /// Deterministic model backing this method; Monte Carlo resolves θ and `P_nb` with
    /// the quadrature oracle.
    pub fn model(self) -> EcModel {
        match self {
            Method::ClosedForm => EcModel::ClosedForm,
            Method::Oracle | Method::MonteCarlo => EcModel::Oracle,
            Method::Shannon => EcModel::Shannon,
        }
    }
}

/// Validated parameter bundle.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub channel: ChannelConfig,
    pub power: PowerModelConfig,
    pub qos: QosConfig,
    pub rho_max_db: f64,
    pub epsilon_t: f64,
    pub snr_db: f64,
    pub epsilon: f64,
    /// Explicit θ for single-point commands; overrides the QoS target there.
    pub point_theta: Option<f64>,
    pub method: Method,
    pub seed: u64,
    pub samples: usize,
    pub jobs: usize,
    /// SHA-256 of the canonical form of the effective configuration.
    pub hash: String,
}

impl Bundle {
    pub fn rho_max(&self) -> f64 {
        db_to_linear(self.rho_max_db)
    }

    pub fn delay(&self) -> Option<(f64, f64)> {
        match self.qos.target {
            DelayTarget::Outage { delta, lambda_out } => Some((delta, lambda_out)),
            DelayTarget::Exponent(_) => None,
        }
    }
}

/// Where each overridable key lives.
pub const KEYS: &[(&str, &str)] = &[
    ("channel", "blocklength"),
    ("power", "zeta"),
    ("power", "p_c"),
    ("power", "buffer_mode"),
    ("qos", "arrival_rate"),
    ("qos", "theta"),
    ("qos", "delta"),
    ("qos", "lambda_out"),
    ("constraints", "rho_max_db"),
    ("constraints", "epsilon_t"),
    ("point", "snr_db"),
    ("point", "epsilon"),
    ("run", "method"),
    ("run", "seed"),
    ("run", "samples"),
    ("run", "jobs"),
];

/// Parse `source`, apply `overrides` (`key`, raw text) and validate.
pub fn parse_config(source: &str, overrides: &[(&str, String)]) -> Result<Bundle, CliError> {
    let mut table: toml::Table = source.parse().map_err(|e: toml::de::Error| {
        CliError::Validation(format!("config parse error: {}", e.to_string().trim_end()))
    })?;
    let mut overridden = Vec::new();
    for (key, raw) in overrides {
        let section = KEYS
            .iter()
            .find(|(_, k)| k == key)
            .map(|(s, _)| *s)
            .ok_or_else(|| CliError::Validation(format!("unknown configuration key `{key}`")))?;
        let entry = table
            .entry(section)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        let sec = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Validation(format!("`{section}` must be a table")))?;
        // A direct exponent and an outage target are exclusive; the flag wins.
        if section == "qos" {
            match *key {
                "theta" => {
                    sec.remove("delta");
                    sec.remove("lambda_out");
                }
                "delta" | "lambda_out" => {
                    sec.remove("theta");
                }
                _ => {}
            }
        }
        sec.insert(key.to_string(), parse_value(raw));
        overridden.push(*key);
    }
    // The worker count cannot change results, so it stays out of the hash.
    let mut hashed = table.clone();
    if let Some(run) = hashed.get_mut("run").and_then(toml::Value::as_table_mut) {
        run.remove("jobs");
    }
    let canonical = toml::to_string(&hashed).map_err(|e| CliError::Runtime(e.to_string()))?;
    let raw: RawFile = RawFile::deserialize(toml::Value::Table(table))
        .map_err(|e| CliError::Validation(format!("config error: {}", e.to_string().trim_end())))?;
    let locate = |section: &str, key: &str| -> String {
        if overridden.contains(&key) {
            return format!(" (from --{key})");
        }
        line_of(source, section, key).map_or_else(String::new, |l| format!(" (line {l})"))
    };
    let invalid = |section: &str, key: &str, rule: &str, value: &dyn std::fmt::Display| {
        CliError::Validation(format!("{key} {rule}, got {value}{}", locate(section, key)))
    };

    let n = raw.channel.blocklength;
    if !(2..=u32::MAX as i64).contains(&n) {
        return Err(invalid("channel", "blocklength", "must be an integer >= 2", &n));
    }
    let channel = ChannelConfig::new(n as u32).map_err(|e| CliError::Validation(e.to_string()))?;

    let p = &raw.power;
    if !(p.zeta > 0.0 && p.zeta.is_finite()) {
        return Err(invalid("power", "zeta", "must be positive", &p.zeta));
    }
    if !(p.p_c >= 0.0 && p.p_c.is_finite()) {
        return Err(invalid("power", "p_c", "must be nonnegative", &p.p_c));
    }
    let mode = match p.buffer_mode.as_str() {
        "full" => BufferMode::FullBuffer,
        "empty-buffer" => BufferMode::EmptyBufferAware,
        other => {
            return Err(invalid(
                "power",
                "buffer_mode",
                "must be \"full\" or \"empty-buffer\"",
                &other,
            ))
        }
    };
    let power = PowerModelConfig::new(p.zeta, p.p_c, mode).map_err(|e| CliError::Validation(e.to_string()))?;

    let q = &raw.qos;
    if !(q.arrival_rate > 0.0 && q.arrival_rate.is_finite()) {
        return Err(invalid("qos", "arrival_rate", "must be positive", &q.arrival_rate));
    }
    let target = match (q.theta, q.delta, q.lambda_out) {
        (Some(theta), None, None) => {
            if !(theta >= 0.0 && theta.is_finite()) {
                return Err(invalid("qos", "theta", "must be finite and nonnegative", &theta));
            }
            DelayTarget::Exponent(theta)
        }
        (None, Some(delta), Some(lambda_out)) => {
            if !(delta > 0.0 && delta.is_finite()) {
                return Err(invalid("qos", "delta", "must be positive", &delta));
            }
            if !(lambda_out > 0.0 && lambda_out < 1.0) {
                return Err(invalid("qos", "lambda_out", "must lie in (0,1)", &lambda_out));
            }
            DelayTarget::Outage { delta, lambda_out }
        }
        _ => {
            return Err(CliError::Validation(
                "qos needs either theta or both delta and lambda_out".into(),
            ))
        }
    };
    let qos = QosConfig::new(target, q.arrival_rate).map_err(|e| CliError::Validation(e.to_string()))?;

    let c = &raw.constraints;
    if !c.rho_max_db.is_finite() {
        return Err(invalid("constraints", "rho_max_db", "must be finite", &c.rho_max_db));
    }
    if !(c.epsilon_t > 0.0 && c.epsilon_t < 1.0) {
        return Err(invalid("constraints", "epsilon_t", "must lie in (0,1)", &c.epsilon_t));
    }

    let point = raw.point.unwrap_or(RawPoint {
        snr_db: None,
        epsilon: None,
        theta: None,
    });
    let snr_db = point.snr_db.unwrap_or(10.0);
    if !snr_db.is_finite() {
        return Err(invalid("point", "snr_db", "must be finite", &snr_db));
    }
    let epsilon = point.epsilon.unwrap_or(c.epsilon_t);
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid("point", "epsilon", "must lie in (0,1)", &epsilon));
    }
    if let Some(t) = point.theta {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid("point", "theta", "must be positive", &t));
        }
    }

    let run = raw.run.unwrap_or(RawRun {
        method: None,
        seed: None,
        samples: None,
        jobs: None,
    });
    let method = match run.method.as_deref().unwrap_or("closed-form") {
        "closed-form" => Method::ClosedForm,
        "oracle" => Method::Oracle,
        "shannon" => Method::Shannon,
        "monte-carlo" => Method::MonteCarlo,
        other => {
            return Err(invalid(
                "run",
                "method",
                "must be one of closed-form, oracle, shannon, monte-carlo",
                &other,
            ))
        }
    };
    let samples = run.samples.unwrap_or(DEFAULT_SAMPLES as u64);
    if samples < 10_000 {
        return Err(invalid("run", "samples", "must be at least 10000", &samples));
    }

    Ok(Bundle {
        channel,
        power,
        qos,
        rho_max_db: c.rho_max_db,
        epsilon_t: c.epsilon_t,
        snr_db,
        epsilon,
        point_theta: point.theta,
        method,
        seed: run.seed.unwrap_or(DEFAULT_SEED),
        samples: samples as usize,
        jobs: run.jobs.unwrap_or(0) as usize,
        hash: hex(&Sha256::digest(canonical.as_bytes())),
    })
}

/// TOML scalar from flag text; bare words become strings.
fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// 1-based line of `key` inside `[section]`.
fn line_of(source: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in source.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            current = name.trim().to_string();
        } else if current == section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_defaults_accepted() {
        let b = parse_config(BUILTIN_DEFAULTS, &[]).unwrap();
        assert_eq!(b.channel.blocklength(), 500);
        assert_eq!(b.delay(), Some((500.0, 1e-2)));
        assert_eq!(b.power.buffer_mode, BufferMode::FullBuffer);
        assert_eq!(b.hash.len(), 64);
    }

    #[test]
    fn epsilon_target_out_of_range() {
        let err = parse_config(BUILTIN_DEFAULTS, &[("epsilon_t", "1.5".into())]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("epsilon_t must lie in (0,1)"), "{msg}");
        assert!(msg.contains("--epsilon_t"));
        let src = BUILTIN_DEFAULTS.replace("epsilon_t = 1e-3", "epsilon_t = 1.5");
        let msg = parse_config(&src, &[]).unwrap_err().to_string();
        assert!(
            msg.contains("epsilon_t must lie in (0,1)") && msg.contains("(line "),
            "{msg}"
        );
    }

    #[test]
    fn missing_field_is_named() {
        let src = BUILTIN_DEFAULTS.replace("zeta = 0.2\n", "");
        let msg = parse_config(&src, &[]).unwrap_err().to_string();
        assert!(msg.contains("zeta"), "{msg}");
    }

    #[test]
    fn syntax_error_reports_line() {
        let src = BUILTIN_DEFAULTS.replace("zeta = 0.2", "zeta = = 0.2");
        let msg = parse_config(&src, &[]).unwrap_err().to_string();
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn overrides_replace_values_and_hash() {
        let base = parse_config(BUILTIN_DEFAULTS, &[]).unwrap();
        let b = parse_config(
            BUILTIN_DEFAULTS,
            &[("blocklength", "200".into()), ("buffer_mode", "empty-buffer".into())],
        )
        .unwrap();
        assert_eq!(b.channel.blocklength(), 200);
        assert_eq!(b.power.buffer_mode, BufferMode::EmptyBufferAware);
        assert_ne!(b.hash, base.hash);
        let t = parse_config(BUILTIN_DEFAULTS, &[("theta", "0.01".into())]).unwrap();
        assert_eq!(t.qos.target, DelayTarget::Exponent(0.01));
    }

    #[test]
    fn hash_ignores_formatting() {
        let a = parse_config(BUILTIN_DEFAULTS, &[]).unwrap();
        let src = BUILTIN_DEFAULTS.replace("zeta = 0.2", "zeta    =    0.2   # amplifier");
        assert_eq!(parse_config(&src, &[]).unwrap().hash, a.hash);
    }

    #[test]
    fn worker_count_not_hashed() {
        let a = parse_config(BUILTIN_DEFAULTS, &[]).unwrap();
        let b = parse_config(BUILTIN_DEFAULTS, &[("jobs", "4".into())]).unwrap();
        assert_eq!(b.jobs, 4);
        assert_eq!(a.hash, b.hash);
    }

    #[test]
    fn conflicting_delay_targets_rejected() {
        let src = BUILTIN_DEFAULTS.replace("arrival_rate = 1.0", "arrival_rate = 1.0\ntheta = 0.01");
        assert!(matches!(parse_config(&src, &[]), Err(CliError::Validation(_))));
        let src = BUILTIN_DEFAULTS.replace("p_c = 0.2", "p_c = 0.2\nbogus = 1");
        assert!(parse_config(&src, &[]).is_err());
    }
}
