use std::fmt;
use std::path::Path;

use incompat_core::corpus;
use incompat_core::linalg::{c, Hermitian, Projector};
use incompat_core::povm::Assemblage;
use incompat_core::steering::{self, BipartiteState, StateAssemblage};
use incompat_core::Error;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::{AssemblageSource, MeasurementSource, StateSource};

/// Failure of a CLI run, carrying its exit status.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Solver { .. }) => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(s) => write!(f, "{s}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Clone, Debug, Serialize)]
pub struct InputRecord {
    pub role: &'static str,
    /// File path, or `builtin:<key>`.
    pub source: String,
    /// SHA-256 of the file bytes, or of the compact JSON of a builtin.
    pub sha256: String,
}

pub struct Loaded<T> {
    pub value: T,
    pub record: InputRecord,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read_json<T: DeserializeOwned>(role: &'static str, path: &Path) -> CliResult<Loaded<T>> {
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let value = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(Loaded {
        value,
        record: InputRecord {
            role,
            source: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        },
    })
}

fn builtin<T: Serialize>(role: &'static str, key: &str, value: T) -> Loaded<T> {
    let bytes = serde_json::to_vec(&value).expect("builtins serialise");
    Loaded {
        value,
        record: InputRecord {
            role,
            source: format!("builtin:{key}"),
            sha256: sha256_hex(&bytes),
        },
    }
}

fn unknown(kind: &str, key: &str, known: &[&str]) -> CliError {
    CliError::Input(format!(
        "unknown builtin {kind} '{key}' (known: {})",
        known.join(", ")
    ))
}

pub const ASSEMBLAGE_KEYS: &[&str] = &[
    "sigma-xz",
    "noisy-xz",
    "qutrit-pair",
    "qubit-counterexample",
    "fully-compressible",
    "qutrit-mub",
    "peres-measurements",
];

pub fn builtin_assemblage(key: &str) -> CliResult<Assemblage> {
    Ok(match key {
        "sigma-xz" => corpus::sigma_xz(),
        "noisy-xz" => corpus::noisy_xz(std::f64::consts::FRAC_1_SQRT_2)?,
        "qutrit-pair" => {
            let (a, b) = corpus::qutrit_pair();
            Assemblage::pair(a, b)?
        }
        "qubit-counterexample" => {
            let (a, b) = corpus::qubit_counterexample_pair();
            Assemblage::pair(a, b)?
        }
        "fully-compressible" => corpus::fully_compressible_pair(),
        "qutrit-mub" => corpus::qutrit_mub_pair(),
        "peres-measurements" => corpus::peres_measurements(),
        _ => return Err(unknown("assemblage", key, ASSEMBLAGE_KEYS)),
    })
}

pub const STATE_KEYS: &[&str] = &["phi-plus-2", "phi-plus-3", "peres"];

pub fn builtin_state(key: &str) -> CliResult<BipartiteState> {
    Ok(match key {
        "phi-plus-2" => BipartiteState::maximally_entangled(2),
        "phi-plus-3" => BipartiteState::maximally_entangled(3),
        "peres" => steering::peres_state(corpus::PERES_POINT.0, corpus::PERES_POINT.1)?.0,
        _ => return Err(unknown("state", key, STATE_KEYS)),
    })
}

pub const PROJECTOR_KEYS: &[&str] = &["fourier-plane", "coordinate-01"];

pub fn builtin_projector(key: &str) -> CliResult<Projector> {
    Ok(match key {
        "fourier-plane" => corpus::fourier_plane(),
        "coordinate-01" => corpus::coordinate_projector(3, &[0, 1])?,
        _ => return Err(unknown("projector", key, PROJECTOR_KEYS)),
    })
}

pub fn assemblage(role: &'static str, src: &AssemblageSource) -> CliResult<Loaded<Assemblage>> {
    match (&src.input, &src.builtin) {
        (Some(p), _) => read_json(role, p),
        (None, Some(k)) => Ok(builtin(role, k, builtin_assemblage(k)?)),
        (None, None) => Err(CliError::Input(
            "either --input or --builtin is required".into(),
        )),
    }
}

pub fn measurements(src: &MeasurementSource) -> CliResult<Loaded<Assemblage>> {
    assemblage(
        "measurements",
        &AssemblageSource {
            input: src.measurements.clone(),
            builtin: src.builtin_measurements.clone(),
        },
    )
}

pub fn state(src: &StateSource) -> CliResult<Loaded<BipartiteState>> {
    match (&src.state, &src.builtin_state) {
        (Some(p), _) => read_json("state", p),
        (None, Some(k)) => Ok(builtin("state", k, builtin_state(k)?)),
        (None, None) => Err(CliError::Input(
            "either --state or --builtin-state is required".into(),
        )),
    }
}

pub fn state_assemblage(path: &Path) -> CliResult<Loaded<StateAssemblage>> {
    read_json("state_assemblage", path)
}

/// Projector given by its matrix or by spanning vectors (orthonormalised).
#[derive(Deserialize)]
struct ProjectorFile {
    matrix: Option<Hermitian>,
    vectors: Option<Vec<Vec<[f64; 2]>>>,
}

pub fn projector_file(path: &Path) -> CliResult<Loaded<Projector>> {
    let raw: Loaded<ProjectorFile> = read_json("projector", path)?;
    let p = match (raw.value.matrix, raw.value.vectors) {
        (Some(m), None) => Projector::from_hermitian(m)?,
        (None, Some(v)) => {
            let vecs: Vec<Vec<_>> = v
                .into_iter()
                .map(|r| r.into_iter().map(|[re, im]| c(re, im)).collect())
                .collect();
            Projector::from_span(&vecs)?
        }
        _ => {
            return Err(CliError::Input(format!(
                "{}: projector needs exactly one of \"matrix\" or \"vectors\"",
                path.display()
            )))
        }
    };
    Ok(Loaded {
        value: p,
        record: raw.record,
    })
}

pub fn projector_builtin(key: &str) -> CliResult<Loaded<Projector>> {
    Ok(builtin("projector", key, builtin_projector(key)?))
}
