//! Subcommand definitions and their handlers.

use std::io::BufRead;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::document::{load_document, load_system, save_system, SystemDocument};
use super::{CliError, Report};
use crate::blocks::{
    assemble_contraction, assemble_selfadjoint_ky, assemble_selfadjoint_nx,
    defect_identity_residual, extract_ky, extract_nx, fundamental_jf, GeneralBlockParam,
};
use crate::grids;
use crate::numkit::{opnorm, ComplexMatrix, RTOL_DEFAULT};
use crate::rsclass::{
    certify_rs, characteristic_fn, gamma_realize, gamma_transform, inner_test, limit_values,
    moebius_rep, omega_from_nfunction, to_nfunction, CertificateGrid,
};
use crate::seeded::{random_gaussian_matrix, rng_from_seed};
use crate::systems::{
    krylov_analysis, random_selfadjoint_system, unitary_similarity, CutPlanePoint, PassiveSystem,
};
use crate::transforms::{
    fixed_point_tests, inner_dilate, jacobi_system, m0_eval, moebius_point, omega0_eval,
    operator_moebius, phi_eval, phi_realize, pi_a_realize, redheffer, spectral_measure,
    theta_eval, xi_realize, zeta_realize, RedhefferCoupler,
};

#[derive(Parser, Debug)]
#[command(
    name = "nevschur",
    version,
    about = "Passive selfadjoint systems and their operator-valued transfer functions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a seeded random passive selfadjoint system document.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long = "dim-input")]
        dim_input: usize,
        #[arg(long = "dim-state")]
        dim_state: usize,
        /// Write the document here as well as echoing it in the report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate Omega(z), Omega'(z) and the compressed resolvent M(z).
    /// With no --at flags, points are read from stdin, one "re im" per line.
    Eval {
        #[arg(long)]
        system: PathBuf,
        /// Evaluation point like "0.3+0.4i" (repeatable).
        #[arg(long = "at")]
        at: Vec<String>,
    },
    /// Run the full analytic battery: certificates, inner detection,
    /// Krylov structure, parametrization round trips.
    Check {
        #[arg(long)]
        system: PathBuf,
    },
    /// Realize a transform of the system and report transfer residuals.
    Transform {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        kind: TransformKind,
        /// Moebius parameter in (-1, 1); required by xi/pia/eta/zeta.
        #[arg(long)]
        a: Option<f64>,
        /// Coupler document; required by redheffer.
        #[arg(long)]
        coupler: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Drive the state recursion and audit the energy balance.
    Simulate {
        #[arg(long)]
        system: PathBuf,
        /// JSON file {"h0": [[re,im],..], "inputs": [[[re,im],..],..]}.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Number of steps; padded with zero inputs or truncated.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Construct the bi-inner dilation of a minimal system.
    Dilate {
        #[arg(long)]
        system: PathBuf,
    },
    /// Extract the spectral measure atoms of the dilation.
    Measure {
        #[arg(long)]
        system: PathBuf,
    },
    /// Emit the order-N block Jacobi truncation.
    Jacobi {
        #[arg(long)]
        n: usize,
        #[arg(long = "dim-input", default_value_t = 1)]
        dim_input: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the three fixed-point identities at parameter a and report
    /// the reference fixed-point values.
    Fixedpoint {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        system: PathBuf,
    },
    /// Decide unitary similarity of two minimal selfadjoint systems.
    Similar {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        other: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        rtol: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TransformKind {
    Phi,
    Xi,
    Pia,
    Eta,
    Zeta,
    Redheffer,
}

/// Parses "a", "bi", "a+bi", "a-bi" with scientific notation supported.
pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(CliError::Invalid("empty complex literal".into()));
    }
    if let Ok(re) = t.parse::<f64>() {
        return Ok(Complex64::new(re, 0.0));
    }
    let lower_i = t.ends_with('i') || t.ends_with('I');
    if !lower_i {
        return Err(CliError::Invalid(format!("cannot parse complex {t:?}")));
    }
    let body = &t[..t.len() - 1];
    let mut split = None;
    for (idx, ch) in body.char_indices().rev() {
        if idx == 0 {
            break;
        }
        if ch == '+' || ch == '-' {
            let prev = body[..idx].chars().next_back().unwrap();
            if prev != 'e' && prev != 'E' {
                split = Some(idx);
                break;
            }
        }
    }
    let parse_imag = |chunk: &str| -> Result<f64, CliError> {
        match chunk {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            other => other
                .parse::<f64>()
                .map_err(|_| CliError::Invalid(format!("cannot parse complex {t:?}"))),
        }
    };
    match split {
        Some(idx) => {
            let re = body[..idx]
                .parse::<f64>()
                .map_err(|_| CliError::Invalid(format!("cannot parse complex {t:?}")))?;
            let im = parse_imag(&body[idx..])?;
            Ok(Complex64::new(re, im))
        }
        None => Ok(Complex64::new(0.0, parse_imag(body)?)),
    }
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn matrix_json(m: &ComplexMatrix) -> Value {
    let rows: Vec<Value> = (0..m.rows())
        .map(|i| {
            let row: Vec<Value> = (0..m.cols()).map(|j| complex_json(m[(i, j)])).collect();
            Value::Array(row)
        })
        .collect();
    Value::Array(rows)
}

fn points_json(points: &[CutPlanePoint]) -> Value {
    Value::Array(points.iter().map(|p| complex_json(p.value())).collect())
}

fn file_digest(path: &PathBuf) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher.finalize();
    Ok(hex_prefix(&digest, 16))
}

fn hex_prefix(bytes: &[u8], chars: usize) -> String {
    let mut s = String::new();
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
        if s.len() >= chars {
            break;
        }
    }
    s.truncate(chars);
    s
}

fn input_file(report: &mut Report, key: &str, path: &PathBuf) -> Result<(), CliError> {
    report.inputs.insert(
        key.to_string(),
        json!({"path": path.display().to_string(), "sha256_16": file_digest(path)?}),
    );
    Ok(())
}

fn require_a(a: Option<f64>) -> Result<f64, CliError> {
    a.ok_or_else(|| CliError::Invalid("this transform kind requires --a".into()))
}

pub fn dispatch(cmd: Command) -> Result<Report, CliError> {
    match cmd {
        Command::Gen {
            seed,
            dim_input,
            dim_state,
            out,
        } => run_gen(seed, dim_input, dim_state, out),
        Command::Eval { system, at } => run_eval(system, at),
        Command::Check { system } => run_check(system),
        Command::Transform {
            system,
            kind,
            a,
            coupler,
            out,
        } => run_transform(system, kind, a, coupler, out),
        Command::Simulate {
            system,
            input,
            steps,
        } => run_simulate(system, input, steps),
        Command::Dilate { system } => run_dilate(system),
        Command::Measure { system } => run_measure(system),
        Command::Jacobi { n, dim_input, out } => run_jacobi(n, dim_input, out),
        Command::Fixedpoint { a, system } => run_fixedpoint(a, system),
        Command::Similar {
            system,
            other,
            rtol,
        } => run_similar(system, other, rtol),
    }
}

fn run_gen(
    seed: u64,
    dim_input: usize,
    dim_state: usize,
    out: Option<PathBuf>,
) -> Result<Report, CliError> {
    if dim_input == 0 {
        return Err(CliError::Invalid("dim-input must be positive".into()));
    }
    let sys = random_selfadjoint_system(seed, dim_input, dim_state);
    let doc = SystemDocument::from_system(&sys);
    let mut report = Report::new("gen");
    report.inputs.insert("seed".into(), json!(seed));
    report.inputs.insert("dim_input".into(), json!(dim_input));
    report.inputs.insert("dim_state".into(), json!(dim_state));
    if let Some(path) = &out {
        save_system(&sys, path)?;
        input_file(&mut report, "out", path)?;
    }
    report.results = json!({
        "document": serde_json::to_value(&doc).expect("document"),
        "opnorm": opnorm(sys.matrix()),
    });
    report.verdicts = json!({ "valid_passive_selfadjoint": true });
    Ok(report)
}

fn eval_points(at: &[String]) -> Result<Vec<Complex64>, CliError> {
    if !at.is_empty() {
        return at.iter().map(|s| parse_complex(s)).collect();
    }
    let stdin = std::io::stdin();
    let mut points = Vec::new();
    for line in stdin.lock().lines() {
        let line = line.map_err(|source| CliError::Io {
            path: "<stdin>".into(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let re: f64 = parts
            .next()
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| CliError::Invalid(format!("bad stdin line {trimmed:?}")))?;
        let im: f64 = parts
            .next()
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| CliError::Invalid(format!("bad stdin line {trimmed:?}")))?;
        points.push(Complex64::new(re, im));
    }
    Ok(points)
}

fn run_eval(system: PathBuf, at: Vec<String>) -> Result<Report, CliError> {
    let sys = load_system(&system)?;
    let points = eval_points(&at)?;
    let mut report = Report::new("eval");
    input_file(&mut report, "system", &system)?;
    report
        .inputs
        .insert("points".into(), Value::Array(points.iter().copied().map(complex_json).collect()));
    report
        .tolerances
        .insert("near_singular_cond".into(), crate::numkit::COND_LIMIT);

    let nf = if sys.is_selfadjoint() {
        Some(to_nfunction(&sys)?)
    } else {
        None
    };
    let mut entries = Vec::new();
    for &zv in &points {
        let z = CutPlanePoint::new(zv).map_err(CliError::Math)?;
        let omega = sys.transfer(z).map_err(CliError::Math)?;
        let omega_prime = sys.transfer_derivative(z).map_err(CliError::Math)?;
        let resolvent_ok = zv.im != 0.0 || zv.re.abs() > 1.0;
        let m_xi = match (&nf, resolvent_ok) {
            (Some(nf), true) => Some(nf.eval(zv).map_err(CliError::Math)?),
            _ => None,
        };
        let u_round_trip = match (&nf, m_xi.is_some(), zv.norm() > 1e-14) {
            (Some(nf), _, true) => {
                let back = omega_from_nfunction(nf, z).map_err(CliError::Math)?;
                Some(opnorm(&(&back - &omega)))
            }
            _ => None,
        };
        entries.push(json!({
            "z": complex_json(zv),
            "omega": matrix_json(&omega),
            "omega_prime": matrix_json(&omega_prime),
            "m_xi": m_xi.as_ref().map(matrix_json),
            "u_round_trip_residual": u_round_trip,
        }));
    }
    report.results = Value::Array(entries);
    Ok(report)
}

fn run_check(system: PathBuf) -> Result<Report, CliError> {
    let sys = load_system(&system)?;
    let mut report = Report::new("check");
    input_file(&mut report, "system", &system)?;
    report
        .tolerances
        .insert("psd".into(), crate::rsclass::CERT_PSD_TOL);
    report
        .tolerances
        .insert("norm".into(), crate::rsclass::CERT_NORM_TOL);
    report
        .tolerances
        .insert("fit".into(), crate::rsclass::FIT_TOL);
    report.tolerances.insert("rank_rtol".into(), RTOL_DEFAULT);

    let krylov = krylov_analysis(&sys, RTOL_DEFAULT);
    let grid = CertificateGrid::default();
    report.probes = json!({
        "upper": points_json(&grid.upper),
        "lower": points_json(&grid.lower),
        "disk": points_json(&grid.disk),
    });
    let cert = certify_rs(&sys, grid);

    let mut results = serde_json::Map::new();
    results.insert(
        "krylov".into(),
        json!({
            "controllable_dim": krylov.controllable_dim,
            "observable_dim": krylov.observable_dim,
            "minimal": krylov.minimal,
            "simple": krylov.simple,
        }),
    );
    results.insert(
        "certificate".into(),
        json!({
            "min_kernel_eig": cert.min_kernel_eig,
            "min_inequality_eig": cert.min_inequality_eig,
            "schur_norm_max": cert.schur_norm_max,
            "tol_psd": cert.tol_psd,
            "tol_norm": cert.tol_norm,
        }),
    );

    let mut verdicts = serde_json::Map::new();
    verdicts.insert("certificate_pass".into(), json!(cert.verdict));
    verdicts.insert("minimal".into(), json!(krylov.minimal));

    if sys.is_selfadjoint() {
        let scale = 1.0_f64.max(opnorm(sys.matrix()));
        let ky = extract_ky(&sys).map_err(CliError::Math)?;
        let ky_residual =
            opnorm(&(assemble_selfadjoint_ky(&ky).map_err(CliError::Math)?.matrix() - sys.matrix()));
        let nx = extract_nx(&sys).map_err(CliError::Math)?;
        let nx_residual =
            opnorm(&(assemble_selfadjoint_nx(&nx).map_err(CliError::Math)?.matrix() - sys.matrix()));

        let lv = limit_values(&ky);
        let jf = fundamental_jf(ky.f()).map_err(CliError::Math)?;
        let jf_dim = jf.rows();
        let jf_residual =
            opnorm(&(&(&jf * &jf) - &ComplexMatrix::identity(jf_dim)));

        // the general parametrization of the same operator: G = N*, L = X
        let general = GeneralBlockParam::new(
            nx.d().as_matrix().clone(),
            nx.n_op().clone(),
            nx.n_op().adjoint(),
            nx.x().as_matrix().clone(),
            sys.dim_state(),
        )
        .map_err(CliError::Math)?;
        let assembled = assemble_contraction(&general);
        let assemble_residual = opnorm(&(&assembled - sys.matrix()));
        let mut rng = rng_from_seed(1);
        let probe_f = random_gaussian_matrix(&mut rng, sys.dim_input(), 1);
        let probe_h = random_gaussian_matrix(&mut rng, sys.dim_state(), 1);
        let defect_residual =
            defect_identity_residual(&general, &probe_f, &probe_h).map_err(CliError::Math)?;

        let rep = moebius_rep(&sys).map_err(CliError::Math)?;
        let mut moebius_residual: f64 = 0.0;
        for z in grids::fit_grid() {
            let direct = sys.transfer(z).map_err(CliError::Math)?;
            let recon = rep.reconstruct(z).map_err(CliError::Math)?;
            moebius_residual = moebius_residual.max(opnorm(&(&direct - &recon)));
        }

        let circle = CutPlanePoint::new(Complex64::from_polar(1.0, 0.9)).expect("circle point");
        let delta = characteristic_fn(ky.f(), circle).map_err(CliError::Math)?;
        let delta_dim = delta.cols();
        let delta_residual = opnorm(
            &(&(&delta.adjoint() * &delta) - &ComplexMatrix::identity(delta_dim)),
        );

        results.insert(
            "parametrizations".into(),
            json!({
                "ky_round_trip_residual": ky_residual,
                "nx_round_trip_residual": nx_residual,
                "general_assemble_residual": assemble_residual,
                "defect_identity_residual": defect_residual,
                "jf_unitarity_residual": jf_residual,
            }),
        );
        results.insert(
            "limit_values".into(),
            json!({
                "omega_minus": matrix_json(lv.minus.as_matrix()),
                "omega_plus": matrix_json(lv.plus.as_matrix()),
            }),
        );
        results.insert(
            "moebius_reconstruction_residual".into(),
            json!(moebius_residual),
        );
        results.insert(
            "characteristic_unimodularity_residual".into(),
            json!(delta_residual),
        );
        verdicts.insert(
            "parametrizations_faithful".into(),
            json!(ky_residual < 1e-8 * scale && nx_residual < 1e-8 * scale),
        );

        if krylov.minimal {
            let inner = inner_test(&sys).map_err(CliError::Math)?;
            results.insert(
                "inner".into(),
                json!({
                    "is_inner": inner.is_inner,
                    "fit_residual": inner.fit_residual,
                    "d_fit": inner.d_fit.as_ref().map(|d| matrix_json(d.as_matrix())),
                    "neuvaa": inner.neuvaa,
                    "thinne_at_a": inner.thinne_at_a,
                }),
            );
            verdicts.insert("is_inner".into(), json!(inner.is_inner));
        } else {
            results.insert("inner".into(), Value::Null);
        }
    }

    report.results = Value::Object(results);
    report.verdicts = Value::Object(verdicts);
    Ok(report)
}

fn run_transform(
    system: PathBuf,
    kind: TransformKind,
    a: Option<f64>,
    coupler_path: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<Report, CliError> {
    let sys = load_system(&system)?;
    let mut report = Report::new("transform");
    input_file(&mut report, "system", &system)?;
    report
        .tolerances
        .insert("transfer_match".into(), 1e-9);
    let probe = grids::probe_16();
    report.probes = points_json(&probe);

    let (kind_name, realized, coupler): (&str, PassiveSystem, Option<RedhefferCoupler>) =
        match kind {
            TransformKind::Phi => ("phi", phi_realize(&sys).map_err(CliError::Math)?, None),
            TransformKind::Xi => {
                let a = require_a(a)?;
                ("xi", xi_realize(&sys, a).map_err(CliError::Math)?, None)
            }
            TransformKind::Pia => {
                let a = require_a(a)?;
                ("pia", pi_a_realize(&sys, a).map_err(CliError::Math)?, None)
            }
            TransformKind::Eta => {
                let a = require_a(a)?;
                ("eta", operator_moebius(&sys, a).map_err(CliError::Math)?, None)
            }
            TransformKind::Zeta => {
                let a = require_a(a)?;
                ("zeta", zeta_realize(&sys, a).map_err(CliError::Math)?, None)
            }
            TransformKind::Redheffer => {
                let path = coupler_path
                    .as_ref()
                    .ok_or_else(|| CliError::Invalid("redheffer requires --coupler".into()))?;
                let doc = load_document(path)?;
                let dim = doc.dim_input + doc.dim_state;
                let mut entries = Vec::with_capacity(dim * dim);
                for row in &doc.matrix {
                    for &[re, im] in row {
                        entries.push(Complex64::new(re, im));
                    }
                }
                let k = ComplexMatrix::new(dim, dim, entries).map_err(CliError::Math)?;
                let coupler =
                    RedhefferCoupler::new(k, doc.dim_input).map_err(CliError::Math)?;
                input_file(&mut report, "coupler", path)?;
                (
                    "redheffer",
                    redheffer(&coupler, &sys).map_err(CliError::Math)?,
                    Some(coupler),
                )
            }
        };
    report.inputs.insert("kind".into(), json!(kind_name));
    if let Some(a) = a {
        report.inputs.insert("a".into(), json!(a));
    }

    let mut residual: f64 = 0.0;
    for &z in &probe {
        let via_realization = realized.transfer(z).map_err(CliError::Math)?;
        let reference = transform_reference(&sys, kind, a, coupler.as_ref(), z)?;
        residual = residual.max(opnorm(&(&via_realization - &reference)));
    }

    if let Some(path) = &out {
        save_system(&realized, path)?;
        input_file(&mut report, "out", path)?;
    }
    report.results = json!({
        "document": serde_json::to_value(SystemDocument::from_system(&realized)).expect("doc"),
        "transfer_match_residual": residual,
        "dim_state": realized.dim_state(),
    });
    report.verdicts = json!({ "transfer_match": residual < 1e-9 });
    Ok(report)
}

fn transform_reference(
    sys: &PassiveSystem,
    kind: TransformKind,
    a: Option<f64>,
    coupler: Option<&RedhefferCoupler>,
    z: CutPlanePoint,
) -> Result<ComplexMatrix, CliError> {
    let m = sys.dim_input();
    let id = ComplexMatrix::identity(m);
    Ok(match kind {
        TransformKind::Phi => phi_eval(sys, z).map_err(CliError::Math)?,
        TransformKind::Xi => {
            let a = require_a(a)?;
            sys.transfer(moebius_point(z, a).map_err(CliError::Math)?)
                .map_err(CliError::Math)?
        }
        TransformKind::Pia => {
            let a = require_a(a)?;
            let om = sys.transfer(z).map_err(CliError::Math)?;
            let denominator = &id + &om.scale_re(a);
            let numerator = &id.scale_re(a) + &om;
            &numerator * &crate::numkit::inverse(&denominator).map_err(CliError::Math)?
        }
        TransformKind::Eta => {
            let a = require_a(a)?;
            let om = sys
                .transfer(moebius_point(z, a).map_err(CliError::Math)?)
                .map_err(CliError::Math)?;
            let denominator = &id - &om.scale_re(a);
            let numerator = &om - &id.scale_re(a);
            &numerator * &crate::numkit::inverse(&denominator).map_err(CliError::Math)?
        }
        TransformKind::Zeta => {
            let a = require_a(a)?;
            let om = sys.transfer(z).map_err(CliError::Math)?;
            let denominator = &id - &om.scale_re(a);
            let numerator = &om - &id.scale_re(a);
            &numerator * &crate::numkit::inverse(&denominator).map_err(CliError::Math)?
        }
        TransformKind::Redheffer => {
            let coupler = coupler.expect("coupler present for redheffer");
            theta_eval(coupler, sys, z).map_err(CliError::Math)?
        }
    })
}

#[derive(Debug, Deserialize)]
struct SimulationInput {
    h0: Vec<[f64; 2]>,
    inputs: Vec<Vec<[f64; 2]>>,
}

fn vector_from_pairs(pairs: &[[f64; 2]]) -> ComplexMatrix {
    ComplexMatrix::from_fn(pairs.len(), 1, |i, _| {
        Complex64::new(pairs[i][0], pairs[i][1])
    })
}

fn run_simulate(
    system: PathBuf,
    input: Option<PathBuf>,
    steps: Option<usize>,
) -> Result<Report, CliError> {
    let sys = load_system(&system)?;
    let mut report = Report::new("simulate");
    input_file(&mut report, "system", &system)?;
    report.tolerances.insert("energy_defect".into(), 1e-12);

    let (h0, mut inputs) = match &input {
        Some(path) => {
            let bytes = std::fs::read(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            let parsed: SimulationInput =
                serde_json::from_slice(&bytes).map_err(|e| CliError::Parse {
                    path: path.display().to_string(),
                    line: e.line(),
                    column: e.column(),
                    message: e.to_string(),
                })?;
            input_file(&mut report, "input", path)?;
            (
                vector_from_pairs(&parsed.h0),
                parsed
                    .inputs
                    .iter()
                    .map(|v| vector_from_pairs(v))
                    .collect::<Vec<_>>(),
            )
        }
        None => (ComplexMatrix::zeros(sys.dim_state(), 1), Vec::new()),
    };
    let steps = steps.unwrap_or(if inputs.is_empty() { 10 } else { inputs.len() });
    inputs.truncate(steps);
    while inputs.len() < steps {
        inputs.push(ComplexMatrix::zeros(sys.dim_input(), 1));
    }
    report.inputs.insert("steps".into(), json!(steps));

    let traj = sys.simulate(&h0, &inputs).map_err(CliError::Math)?;
    let defects = traj.energy_defects();
    let min_defect = traj.min_energy_defect();
    report.results = json!({
        "states": traj.states.iter().map(matrix_json).collect::<Vec<_>>(),
        "outputs": traj.outputs.iter().map(matrix_json).collect::<Vec<_>>(),
        "energy_defects": defects,
        "min_energy_defect": if defects.is_empty() { Value::Null } else { json!(min_defect) },
    });
    report.verdicts = json!({
        "energy_inequality": defects.is_empty() || min_defect >= -1e-12
    });
    Ok(report)
}

fn run_dilate(system: PathBuf) -> Result<Report, CliError> {
    let sys = load_system(&system)?;
    let mut report = Report::new("dilate");
    input_file(&mut report, "system", &system)?;
    report.tolerances.insert("reconstruction".into(), 1e-9);
    let probe = grids::probe_16();
    report.probes = points_json(&probe);

    let dil = inner_dilate(&sys).map_err(CliError::Math)?;
    let mut residual: f64 = 0.0;
    for &z in &probe {
        let direct = sys.transfer(z).map_err(CliError::Math)?;
        let via_dilation = dil.reconstruct(z).map_err(CliError::Math)?;
        residual = residual.max(opnorm(&(&direct - &via_dilation)));
    }
    report.results = json!({
        "dim_ambient": dil.dim_ambient(),
        "dim_input": dil.dim_input(),
        "a_tilde": matrix_json(dil.a_tilde().as_matrix()),
        "reconstruction_residual": residual,
        "m_simple": dil.is_m_simple(RTOL_DEFAULT),
    });
    report.verdicts = json!({
        "reconstruction": residual < 1e-9,
        "inner_iff_no_enlargement": (dil.dim_ambient() == dil.dim_input())
            == (residual < 1e-9 && dil.dim_ambient() == sys.dim_input()),
    });
    Ok(report)
}

fn run_measure(system: PathBuf) -> Result<Report, CliError> {
    let sys = load_system(&system)?;
    let mut report = Report::new("measure");
    input_file(&mut report, "system", &system)?;
    report.tolerances.insert("partition_of_identity".into(), 1e-9);
    let probe = grids::probe_16();
    report.probes = points_json(&probe);

    let dil = inner_dilate(&sys).map_err(CliError::Math)?;
    let measure = spectral_measure(&dil);
    let m = sys.dim_input();
    let total_residual = opnorm(&(&measure.total() - &ComplexMatrix::identity(m)));
    let mut recon_residual: f64 = 0.0;
    for &z in &probe {
        let direct = sys.transfer(z).map_err(CliError::Math)?;
        let via_measure = measure.reconstruct(z);
        recon_residual = recon_residual.max(opnorm(&(&direct - &via_measure)));
    }
    report.results = json!({
        "atoms": measure
            .atoms
            .iter()
            .map(|(t, jump)| json!({"t": t, "jump": matrix_json(jump.as_matrix())}))
            .collect::<Vec<_>>(),
        "sum_residual": total_residual,
        "reconstruction_residual": recon_residual,
    });
    report.verdicts = json!({
        "partition_of_identity": total_residual < 1e-9,
        "reconstruction": recon_residual < 1e-9,
    });
    Ok(report)
}

fn run_jacobi(n: usize, dim_input: usize, out: Option<PathBuf>) -> Result<Report, CliError> {
    if dim_input == 0 {
        return Err(CliError::Invalid("dim-input must be positive".into()));
    }
    let sys = jacobi_system(n, dim_input);
    let mut report = Report::new("jacobi");
    report.inputs.insert("n".into(), json!(n));
    report.inputs.insert("dim_input".into(), json!(dim_input));
    if let Some(path) = &out {
        save_system(&sys, path)?;
        input_file(&mut report, "out", path)?;
    }
    let krylov = krylov_analysis(&sys, RTOL_DEFAULT);
    report.results = json!({
        "document": serde_json::to_value(SystemDocument::from_system(&sys)).expect("doc"),
        "dim_state": sys.dim_state(),
    });
    report.verdicts = json!({ "minimal": krylov.minimal });
    Ok(report)
}

fn run_fixedpoint(a: f64, system: PathBuf) -> Result<Report, CliError> {
    let sys = load_system(&system)?;
    let mut report = Report::new("fixedpoint");
    input_file(&mut report, "system", &system)?;
    report.inputs.insert("a".into(), json!(a));
    report.tolerances.insert("fit".into(), crate::rsclass::FIT_TOL);
    report.probes = points_json(&grids::fit_grid());

    let fp = fixed_point_tests(&sys, a).map_err(CliError::Math)?;

    // reference fixed points of Phi and Gamma
    let zi = CutPlanePoint::new(Complex64::new(0.0, 1.0)).expect("i is in the cut plane");
    let omega0_i = omega0_eval(zi, 1);
    let m0_i = m0_eval(Complex64::new(0.0, 1.0), 1).map_err(CliError::Math)?;
    let mut phi_fix_residual: f64 = 0.0;
    for z in grids::fit_grid().into_iter().take(6) {
        let zv = z.value();
        let om = omega0_eval(z, 1)[(0, 0)];
        let phi = (zv - om) / (Complex64::new(1.0, 0.0) - zv * om);
        phi_fix_residual = phi_fix_residual.max((phi - om).norm());
    }
    let mut gamma_fix_residual: f64 = 0.0;
    for xi in grids::xi_grid() {
        let m0 = m0_eval(xi, 1).map_err(CliError::Math)?[(0, 0)];
        let gamma = 1.0 / (m0 * (xi * xi - 1.0));
        gamma_fix_residual = gamma_fix_residual.max((gamma - m0).norm());
    }

    // Gamma is an involution on the compressed resolvent of this system
    let nf = to_nfunction(&sys).map_err(CliError::Math)?;
    let gamma_nf = gamma_realize(&nf).map_err(CliError::Math)?;
    let mut gamma_involution_residual: f64 = 0.0;
    for xi in grids::xi_grid() {
        let back = gamma_transform(&gamma_nf, xi).map_err(CliError::Math)?;
        let original = nf.eval(xi).map_err(CliError::Math)?;
        gamma_involution_residual = gamma_involution_residual.max(opnorm(&(&back - &original)));
    }

    report.results = json!({
        "xi_fixed": fp.xi_fixed,
        "infix_fixed": fp.infix_fixed,
        "cjdcyjd_fixed": fp.cjdcyjd_fixed,
        "omega0_at_i": complex_json(omega0_i[(0, 0)]),
        "m0_at_i": complex_json(m0_i[(0, 0)]),
        "phi_fixed_point_residual": phi_fix_residual,
        "gamma_fixed_point_residual": gamma_fix_residual,
        "gamma_involution_residual": gamma_involution_residual,
    });
    report.verdicts = json!({
        "xi_fixed": fp.xi_fixed,
        "infix_fixed": fp.infix_fixed,
        "cjdcyjd_fixed": fp.cjdcyjd_fixed,
    });
    Ok(report)
}

fn run_similar(system: PathBuf, other: PathBuf, rtol: f64) -> Result<Report, CliError> {
    let sys1 = load_system(&system)?;
    let sys2 = load_system(&other)?;
    let mut report = Report::new("similar");
    input_file(&mut report, "system", &system)?;
    input_file(&mut report, "other", &other)?;
    report.inputs.insert("rtol".into(), json!(rtol));
    report.probes = points_json(&grids::probe_16());

    let result = unitary_similarity(&sys1, &sys2, rtol).map_err(CliError::Math)?;
    match result {
        Some(u) => {
            let a_res = opnorm(
                &(&(&(&u * &sys1.a_block()) * &u.adjoint()) - &sys2.a_block()),
            );
            let b_res = opnorm(&(&(&u * &sys1.b_block()) - &sys2.b_block()));
            let c_res = opnorm(&(&(&sys1.c_block() * &u.adjoint()) - &sys2.c_block()));
            let d_res = opnorm(&(&sys1.d_block() - &sys2.d_block()));
            report.results = json!({
                "similar": true,
                "u": matrix_json(&u),
                "residuals": { "a": a_res, "b": b_res, "c": c_res, "d": d_res },
            });
            report.verdicts = json!({ "similar": true });
        }
        None => {
            report.results = json!({ "similar": false, "u": Value::Null });
            report.verdicts = json!({ "similar": false });
        }
    }
    Ok(report)
}
