use std::path::Path;

use incompat_core::coexist::{self, coexistent_parent_with};
use incompat_core::incompat::{depolarising_robustness_with, jm_parent_with, witness_with};
use incompat_core::linalg::Projector;
use incompat_core::povm::{validate, Assemblage};
use incompat_core::sdp::SdpOptions;
use incompat_core::steering::{self, StateAssemblage};
use incompat_core::subspace;
use incompat_core::{corpus, Error};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    AssemblageSource, ClassifyArgs, Command, IntegralArgs, MeasurementSource, PeresCommand,
    SeesawArgs, StateSource, SteeringCommand, SteeringInput, TruncateArgs,
};
use crate::input::{self, CliError, CliResult, InputRecord};

/// What a command hands back to the report writer.
pub struct Outcome {
    pub inputs: Vec<InputRecord>,
    pub parameters: Value,
    pub result: Value,
    pub summary: Vec<String>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialise")
}

pub fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Robustness(_) => "robustness",
        Command::Jm(_) => "jm",
        Command::Witness(_) => "witness",
        Command::Coexistence(_) => "coexistence",
        Command::Seesaw(_) => "seesaw",
        Command::Truncate(_) => "truncate",
        Command::Classify(_) => "classify",
        Command::Steering(SteeringCommand::Lhs(_)) => "steering lhs",
        Command::Steering(SteeringCommand::PrettyGood(_)) => "steering pretty-good",
        Command::Steering(SteeringCommand::Choi { .. }) => "steering choi",
        Command::Peres(PeresCommand::Construct { .. }) => "peres construct",
        Command::Peres(PeresCommand::Scan { .. }) => "peres scan",
        Command::Integrals(_) => "integrals",
        Command::MubCheck => "mub-check",
        Command::ExportCorpus { .. } => "export-corpus",
    }
}

pub fn run(cmd: &Command, seed: u64, opts: &SdpOptions) -> CliResult<Outcome> {
    match cmd {
        Command::Robustness(src) => robustness(src, opts),
        Command::Jm(src) => jm(src, opts),
        Command::Witness(src) => witness(src, opts),
        Command::Coexistence(src) => coexistence(src, opts),
        Command::Seesaw(a) => seesaw(a, seed),
        Command::Truncate(a) => truncate(a, opts),
        Command::Classify(a) => classify(a, seed),
        Command::Steering(SteeringCommand::Lhs(s)) => lhs(s, opts),
        Command::Steering(SteeringCommand::PrettyGood(s)) => pretty_good(s, opts),
        Command::Steering(SteeringCommand::Choi {
            state,
            measurements,
        }) => choi(state, measurements, opts),
        Command::Peres(PeresCommand::Construct { m1, m2 }) => peres_construct(*m1, *m2),
        Command::Peres(PeresCommand::Scan { step }) => peres_scan(*step),
        Command::Integrals(a) => integrals(a, seed),
        Command::MubCheck => mub_check(),
        Command::ExportCorpus { dir } => export_corpus(dir),
    }
}

fn shape(a: &Assemblage) -> String {
    format!("d = {}, outcomes {:?}", a.dim(), a.outcome_counts())
}

fn robustness(src: &AssemblageSource, opts: &SdpOptions) -> CliResult<Outcome> {
    let a = input::assemblage("assemblage", src)?;
    let r = depolarising_robustness_with(&a.value, opts)?;
    Ok(Outcome {
        summary: vec![
            shape(&a.value),
            format!("eta = {:.5} ({:?})", r.eta, r.verdict),
            format!(
                "solver: {} iterations, relative gap {:.1e}",
                r.iterations, r.relative_gap
            ),
        ],
        inputs: vec![a.record],
        parameters: json!({}),
        result: to_value(&r),
    })
}

fn jm(src: &AssemblageSource, opts: &SdpOptions) -> CliResult<Outcome> {
    let a = input::assemblage("assemblage", src)?;
    let r = jm_parent_with(&a.value, opts)?;
    let mut result = to_value(&r);
    if let Some(p) = &r.parent {
        result["marginal_residual"] = json!(p.marginal_residual(&a.value));
    }
    Ok(Outcome {
        summary: vec![
            shape(&a.value),
            format!("jointly measurable: {} (slack {:.3e})", r.feasible, r.slack),
        ],
        inputs: vec![a.record],
        parameters: json!({}),
        result,
    })
}

fn witness(src: &AssemblageSource, opts: &SdpOptions) -> CliResult<Outcome> {
    let a = input::assemblage("assemblage", src)?;
    let w = witness_with(&a.value, opts)?;
    let mut result = to_value(&w);
    result["constraint_violation"] = json!(w.constraint_violation());
    Ok(Outcome {
        summary: vec![
            shape(&a.value),
            format!(
                "witness value = {:.6} (> 1 certifies incompatibility)",
                w.value
            ),
        ],
        inputs: vec![a.record],
        parameters: json!({}),
        result,
    })
}

fn pair(a: &Assemblage) -> CliResult<(&incompat_core::povm::Povm, &incompat_core::povm::Povm)> {
    match a.measurements() {
        [x, y] => Ok((x, y)),
        m => Err(CliError::Core(Error::Validation(format!(
            "coexistence needs exactly two measurements, found {}",
            m.len()
        )))),
    }
}

fn coexistence(src: &AssemblageSource, opts: &SdpOptions) -> CliResult<Outcome> {
    let a = input::assemblage("assemblage", src)?;
    let (x, y) = pair(&a.value)?;
    let co = coexistent_parent_with(x, y, opts)?;
    let jm = jm_parent_with(&a.value, opts)?;
    let rob = depolarising_robustness_with(&a.value, opts)?;
    let mut summary = vec![
        shape(&a.value),
        format!(
            "coexistent: {} (slack {:.3e}, {:?}, {} columns)",
            co.feasible, co.slack, co.strategy, co.columns
        ),
        format!(
            "jointly measurable: {} (slack {:.3e})",
            jm.feasible, jm.slack
        ),
        format!("eta = {:.5} ({:?})", rob.eta, rob.verdict),
    ];
    let mut result = json!({
        "coexistent": co.feasible,
        "jm": jm.feasible,
        "jm_slack": jm.slack,
        "eta": rob.eta,
        "verdict": rob.verdict,
        "coexistence": co,
    });
    if src.builtin.as_deref() == Some("qubit-counterexample") {
        let report = coexist::qubit_counterexample()?;
        summary.push(format!(
            "coarse-grained (outcomes 0,1 merged): eta = {:.5}, coexistent: {}",
            report.coarse_eta, report.coarse_coexistent
        ));
        summary.push(format!(
            "linear dependence residual {:.1e}, Gram rank {}",
            report.lindep_residual, report.gram_rank
        ));
        result["coarse_eta"] = json!(report.coarse_eta);
        result["counterexample"] = to_value(&report);
    }
    Ok(Outcome {
        summary,
        inputs: vec![a.record],
        parameters: json!({}),
        result,
    })
}

fn seesaw(a: &SeesawArgs, seed: u64) -> CliResult<Outcome> {
    let r = coexist::seesaw_from(a.dim, a.ma, a.mb, a.seeds, a.max_iters, seed)?;
    let mut summary = vec![format!(
        "d = {}, outcomes ({}, {}): {} of {} starting pairs gave coexistent incompatible pairs",
        a.dim,
        a.ma,
        a.mb,
        r.found.len(),
        a.seeds
    )];
    for e in &r.found {
        summary.push(format!(
            "  seed {}: witness value {:.6}, jm slack {:.3e}",
            e.seed, e.witness_value, e.jm_slack
        ));
    }
    Ok(Outcome {
        summary,
        inputs: vec![],
        parameters: json!({
            "dim": a.dim, "m_a": a.ma, "m_b": a.mb, "seeds": a.seeds, "max_iters": a.max_iters,
        }),
        result: to_value(&r),
    })
}

fn truncate(a: &TruncateArgs, opts: &SdpOptions) -> CliResult<Outcome> {
    let asm = input::assemblage("assemblage", &a.source)?;
    let mut inputs = vec![asm.record];
    let p: Projector = match (&a.projector, &a.builtin_projector, &a.span) {
        (Some(path), _, _) => {
            let l = input::projector_file(path)?;
            inputs.push(l.record);
            l.value
        }
        (None, Some(k), _) => {
            let l = input::projector_builtin(k)?;
            inputs.push(l.record);
            l.value
        }
        (None, None, Some(idx)) => corpus::coordinate_projector(asm.value.dim(), idx)?,
        _ => {
            return Err(CliError::Input(
                "one of --projector, --builtin-projector or --span is required".into(),
            ))
        }
    };
    let t = asm.value.truncate(&p)?;
    let before = depolarising_robustness_with(&asm.value, opts)?;
    let after = depolarising_robustness_with(&t, opts)?;
    Ok(Outcome {
        summary: vec![
            format!("{} truncated to rank {}", shape(&asm.value), p.rank()),
            format!("eta before = {:.5} ({:?})", before.eta, before.verdict),
            format!("eta after  = {:.5} ({:?})", after.eta, after.verdict),
        ],
        inputs,
        parameters: json!({ "span": a.span }),
        result: json!({
            "projector": p,
            "truncated": t,
            "validation": validate(&t),
            "eta_before": before.eta,
            "verdict_before": before.verdict,
            "eta_after": after.eta,
            "verdict_after": after.verdict,
        }),
    })
}

fn classify(a: &ClassifyArgs, seed: u64) -> CliResult<Outcome> {
    let asm = input::assemblage("assemblage", &a.source)?;
    let r = subspace::classify(&asm.value, a.n, a.samples, seed)?;
    Ok(Outcome {
        summary: vec![
            shape(&asm.value),
            format!("original eta = {:.5} ({:?})", r.original_eta, r.original_verdict),
            format!(
                "n = {}: {} probes + {} Haar samples, {} compatible, {} incompatible, {} indeterminate",
                r.n, r.probes, r.samples, r.compatible_count, r.incompatible_count, r.indeterminate_count
            ),
            format!("verdict: {:?} (certified: {}; {})", r.verdict, r.certified, r.basis_of_verdict),
        ],
        inputs: vec![asm.record],
        parameters: json!({ "n": a.n, "samples": a.samples }),
        result: to_value(&r),
    })
}

fn steering_assemblage(s: &SteeringInput) -> CliResult<(StateAssemblage, Vec<InputRecord>)> {
    if let Some(p) = &s.assemblage {
        let l = input::state_assemblage(p)?;
        return Ok((l.value, vec![l.record]));
    }
    let rho = input::state(&StateSource {
        state: s.state.clone(),
        builtin_state: s.builtin_state.clone(),
    })?;
    let m = input::measurements(&MeasurementSource {
        measurements: s.measurements.clone(),
        builtin_measurements: s.builtin_measurements.clone(),
    })?;
    let sa = steering::assemblage_from_state(&rho.value, &m.value)?;
    Ok((sa, vec![rho.record, m.record]))
}

fn lhs(s: &SteeringInput, opts: &SdpOptions) -> CliResult<Outcome> {
    let (sa, inputs) = steering_assemblage(s)?;
    let r = steering::lhs_feasible_with(&sa, opts)?;
    let mut result = to_value(&r);
    if let Some(m) = &r.model {
        result["model_residual"] = json!(m.residual(&sa));
    }
    Ok(Outcome {
        summary: vec![
            format!("d_B = {}, outcomes {:?}", sa.db, sa.outcome_counts()),
            format!("unsteerable: {} (slack {:.3e})", r.unsteerable, r.slack),
        ],
        inputs,
        parameters: json!({}),
        result,
    })
}

fn pretty_good(s: &SteeringInput, opts: &SdpOptions) -> CliResult<Outcome> {
    let (sa, inputs) = steering_assemblage(s)?;
    let pgm = steering::pretty_good(&sa)?;
    let rob = depolarising_robustness_with(&pgm, opts)?;
    let lhs = steering::lhs_feasible_with(&sa, opts)?;
    Ok(Outcome {
        summary: vec![
            format!("pretty-good measurements: {}", shape(&pgm)),
            format!("eta = {:.5} ({:?})", rob.eta, rob.verdict),
            format!("unsteerable: {} (slack {:.3e})", lhs.unsteerable, lhs.slack),
        ],
        inputs,
        parameters: json!({}),
        result: json!({
            "pretty_good": pgm,
            "eta": rob.eta,
            "verdict": rob.verdict,
            "unsteerable": lhs.unsteerable,
            "lhs_slack": lhs.slack,
        }),
    })
}

fn choi(
    state: &StateSource,
    measurements: &MeasurementSource,
    opts: &SdpOptions,
) -> CliResult<Outcome> {
    let rho = input::state(state)?;
    let m = input::measurements(measurements)?;
    let out = steering::choi_apply(&rho.value, &m.value)?;
    let before = depolarising_robustness_with(&m.value, opts)?;
    let after = depolarising_robustness_with(&out, opts)?;
    Ok(Outcome {
        summary: vec![
            format!("channel output: {}", shape(&out)),
            format!("eta before = {:.5} ({:?})", before.eta, before.verdict),
            format!("eta after  = {:.5} ({:?})", after.eta, after.verdict),
        ],
        inputs: vec![rho.record, m.record],
        parameters: json!({}),
        result: json!({
            "output": out,
            "validation": validate(&out),
            "eta_before": before.eta,
            "eta_after": after.eta,
            "verdict_after": after.verdict,
        }),
    })
}

fn peres_construct(m1: f64, m2: f64) -> CliResult<Outcome> {
    let (rho, params) = steering::peres_state(m1, m2)?;
    let point = steering::peres_point(m1, m2);
    let mut summary = vec![
        format!("m1 = {m1}, m2 = {m2}, m3 = {:.6}", params.m3),
        format!("partial transpose residual {:.1e}", point.pt_residual),
        format!(
            "steerable: {} (LHS slack {:.3e})",
            point.steerable, point.lhs_slack
        ),
    ];
    if let (Some(eta), Some(v)) = (point.pgm_eta, point.pgm_verdict) {
        summary.push(format!("pretty-good measurements: eta = {eta:.5} ({v:?})"));
    }
    if let Some(e) = &point.error {
        summary.push(format!("error: {e}"));
    }
    Ok(Outcome {
        summary,
        inputs: vec![],
        parameters: json!({ "m1": m1, "m2": m2 }),
        result: json!({ "parameters": params, "state": rho, "point": point }),
    })
}

fn peres_scan(step: f64) -> CliResult<Outcome> {
    let s = steering::peres_scan(step)?;
    let mut summary = vec![format!(
        "{} admissible points, {} steerable, max PT residual {:.1e}",
        s.points.len(),
        s.steerable_count,
        s.max_pt_residual
    )];
    for (label, p) in [("best", &s.best), ("refined", &s.refined)] {
        if let Some(p) = p {
            summary.push(format!(
                "{label}: (m1, m2) = ({:.4}, {:.4}), LHS slack {:.3e}, pgm eta {:.5}",
                p.m1,
                p.m2,
                p.lhs_slack,
                p.pgm_eta.unwrap_or(f64::NAN)
            ));
        }
    }
    Ok(Outcome {
        summary,
        inputs: vec![],
        parameters: json!({ "step": step }),
        result: to_value(&s),
    })
}

fn integrals(a: &IntegralArgs, seed: u64) -> CliResult<Outcome> {
    let r = subspace::integral_identities_check(a.d, a.n, a.samples, seed)?;
    let mut summary = vec![format!("d = {}, n = {}, {} samples", r.d, r.n, r.samples)];
    for c in &r.checks {
        summary.push(format!(
            "{}: max relative error {:.2e}, {}/{} entries within 3 standard errors",
            c.name, c.max_relative_error, c.entries_within_3se, c.entries
        ));
    }
    summary.push(format!(
        "fit: coefficient of M {:.5} (expected {:.5}), of tr(M) 1 {:.5} (expected {:.5})",
        r.fit.coefficient_m, r.fit.expected_m, r.fit.coefficient_trace, r.fit.expected_trace
    ));
    Ok(Outcome {
        summary,
        inputs: vec![],
        parameters: json!({ "d": a.d, "n": a.n, "samples": a.samples }),
        result: to_value(&r),
    })
}

fn mub_check() -> CliResult<Outcome> {
    let r = subspace::mub_same_povm_check()?;
    Ok(Outcome {
        summary: vec![
            format!("max elementwise difference {:.1e}", r.max_difference),
            format!(
                "truncated pair: eta = {:.8} ({:?})",
                r.truncated_eta, r.truncated_verdict
            ),
            format!(
                "perturbed plane: max difference {:.3}",
                r.perturbed_max_difference
            ),
        ],
        inputs: vec![],
        parameters: json!({}),
        result: to_value(&r),
    })
}

fn write_entry(dir: &Path, file: &str, description: &str, value: Value) -> CliResult<Value> {
    let mut doc = json!({ "description": description });
    match value {
        Value::Object(map) => doc.as_object_mut().expect("object").extend(map),
        other => doc["value"] = other,
    }
    let text = serde_json::to_string_pretty(&doc).expect("serialisable") + "\n";
    let path = dir.join(file);
    std::fs::write(&path, &text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(
        json!({ "file": file, "sha256": hex::encode(<sha2::Sha256 as sha2::Digest>::digest(text.as_bytes())) }),
    )
}

fn export_corpus(dir: &Path) -> CliResult<Outcome> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    let assemblages = [
        ("sigma_xz.json", "sigma-xz", "Sharp sigma_x and sigma_z measurements; outcome 0 is +1."),
        ("noisy_xz.json", "noisy-xz", "sigma_x and sigma_z with sharpness 1/sqrt(2), the jointly measurable boundary."),
        ("qutrit_pair.json", "qutrit-pair", "A_i = (1 - |i><i|)/2 and B = {|j><j|/2, |psi_j><psi_j|/2} on a qutrit."),
        (
            "qubit_counterexample.json",
            "qubit-counterexample",
            "The qutrit pair truncated to span{psi_0, psi_1}: coexistent but not jointly measurable.",
        ),
        (
            "fully_compressible.json",
            "fully-compressible",
            "Computational basis and the real basis (1,2,3), (-5,1,1), (1,16,-11), normalised.",
        ),
        ("qutrit_mub.json", "qutrit-mub", "Computational and Fourier bases of a qutrit."),
        ("peres_measurements.json", "peres-measurements", "Alice's two qutrit bases for the Peres state."),
    ];
    for (file, key, desc) in assemblages {
        let a = input::builtin_assemblage(key)?;
        let report = validate(&a);
        if !report.valid {
            return Err(CliError::Core(Error::Validation(format!(
                "builtin {key} failed validation"
            ))));
        }
        files.push(write_entry(dir, file, desc, to_value(&a))?);
    }
    let (m1, m2) = corpus::PERES_POINT;
    let (rho, params) = steering::peres_state(m1, m2)?;
    let mut state = to_value(&rho);
    state["parameters"] = to_value(&params);
    files.push(write_entry(
        dir,
        "peres_state.json",
        "Peres bound-entangled two-qutrit state at a steerable grid point.",
        state,
    )?);
    files.push(write_entry(
        dir,
        "phi_plus_3.json",
        "Maximally entangled two-qutrit state.",
        to_value(&input::builtin_state("phi-plus-3")?),
    )?);
    for (file, key, desc) in [
        (
            "fourier_plane.json",
            "fourier-plane",
            "Projector onto span{psi_0, psi_1} of the qutrit Fourier basis.",
        ),
        (
            "coordinate_01.json",
            "coordinate-01",
            "Projector |0><0| + |1><1| on a qutrit.",
        ),
    ] {
        files.push(write_entry(
            dir,
            file,
            desc,
            to_value(&input::builtin_projector(key)?),
        )?);
    }
    Ok(Outcome {
        summary: files
            .iter()
            .map(|f| format!("wrote {}", f["file"].as_str().unwrap_or_default()))
            .collect(),
        inputs: vec![],
        parameters: json!({ "dir": dir.display().to_string() }),
        result: json!({ "files": files }),
    })
}
