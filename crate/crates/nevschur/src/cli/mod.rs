//! Command-line front end: every library operation is reachable through
//! exactly one subcommand, documents and reports are canonical JSON, and
//! exit codes follow the contract 0 = success, 1 = domain failure,
//! 2 = usage error.

mod commands;
mod document;

pub use commands::{dispatch, parse_complex, Cli, Command, TransformKind};
pub use document::{load_document, load_system, save_system, SystemDocument, FORMAT_VERSION};

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

/// Errors at the command boundary.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Math(#[from] crate::Error),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} at line {line}, column {column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{0}")]
    Invalid(String),
}

/// Machine-readable command report. Field order is fixed and every map is
/// ordered, so reports are deterministic bytes for fixed inputs.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: BTreeMap<String, Value>,
    pub tolerances: BTreeMap<String, f64>,
    pub probes: Value,
    pub results: Value,
    pub verdicts: Value,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            probes: Value::Null,
            results: Value::Null,
            verdicts: Value::Null,
        }
    }

    pub fn to_canonical_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Entry point used by the binary: parses arguments, dispatches, prints the
/// report (or an error object) to stdout, and returns the exit code.
pub fn main_entry<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits 0 for --help/--version and 2 for usage errors
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(report) => {
            print!("{}", report.to_canonical_string());
            0
        }
        Err(e) => {
            let error_object = serde_json::json!({
                "error": { "message": e.to_string() }
            });
            let mut s =
                serde_json::to_string_pretty(&error_object).expect("error serializes");
            s.push('\n');
            print!("{s}");
            1
        }
    }
}

/// The operations exposed by the library, by canonical name.
pub const LIBRARY_OPS: &[&str] = &[
    // numkit
    "eigh",
    "psd_sqrt",
    "pinv",
    "range_embed",
    "opnorm",
    // systems
    "validate_passive",
    "transfer",
    "transfer_derivative",
    "compressed_resolvent",
    "krylov_analysis",
    "simulate",
    "unitary_similarity",
    // blocks
    "assemble_contraction",
    "assemble_selfadjoint_ky",
    "extract_ky",
    "extract_nx",
    "fundamental_jf",
    "defect_identity_residual",
    // rsclass
    "characteristic_fn",
    "pick_kernel",
    "certify_rs",
    "limit_values",
    "moebius_rep",
    "inner_test",
    "to_nfunction",
    "from_nfunction",
    "gamma_transform",
    // transforms
    "phi_eval",
    "phi_realize",
    "xi_realize",
    "operator_moebius",
    "redheffer",
    "pi_a_realize",
    "zeta_realize",
    "omega0_eval",
    "m0_eval",
    "jacobi_system",
    "inner_dilate",
    "spectral_measure",
    "fixed_point_tests",
    // cli
    "load_system",
    "save_system",
];

/// Canonical command path for each operation; the coverage test checks
/// that this is a partition of `LIBRARY_OPS`.
pub const DISPATCH_COVERAGE: &[(&str, &[&str])] = &[
    ("gen", &["validate_passive", "opnorm", "save_system"]),
    (
        "eval",
        &[
            "load_system",
            "transfer",
            "transfer_derivative",
            "compressed_resolvent",
            "to_nfunction",
            "from_nfunction",
        ],
    ),
    (
        "check",
        &[
            "certify_rs",
            "pick_kernel",
            "characteristic_fn",
            "inner_test",
            "limit_values",
            "krylov_analysis",
            "moebius_rep",
            "extract_ky",
            "extract_nx",
            "assemble_selfadjoint_ky",
            "assemble_contraction",
            "fundamental_jf",
            "defect_identity_residual",
            "eigh",
            "psd_sqrt",
            "pinv",
        ],
    ),
    (
        "transform",
        &[
            "phi_eval",
            "phi_realize",
            "xi_realize",
            "operator_moebius",
            "pi_a_realize",
            "zeta_realize",
            "redheffer",
        ],
    ),
    ("simulate", &["simulate"]),
    ("dilate", &["inner_dilate", "range_embed"]),
    ("measure", &["spectral_measure"]),
    ("jacobi", &["jacobi_system"]),
    (
        "fixedpoint",
        &["fixed_point_tests", "omega0_eval", "m0_eval", "gamma_transform"],
    ),
    ("similar", &["unitary_similarity"]),
];
