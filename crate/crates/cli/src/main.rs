//! relu-ident: analyze and compare ReLU networks through their path
//! embedding, and reconstruct shallow ones from black-box evaluations.
//!
//! Every command prints one JSON report to stdout (or --out). Reports are
//! byte-identical for identical inputs and seeds; wall-clock timings are
//! only included when --timings is passed, since they break that guarantee.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Stdio;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use relu_ident_core::actspace::{
    nondegeneracy_certificate_with, sample_activation_space, shallow_activation_space,
    DegeneracyVerdict,
};
use relu_ident_core::counterexamples::standard_pairs;
use relu_ident_core::diagnostics::{
    classify_shallow, find_twins, is_irreducible, ShallowClassification, DEFAULT_SUBSET_CAP,
};
use relu_ident_core::embedding::{embed_with_budget, Embedding};
use relu_ident_core::equivalence::{
    admissibility, check_ps_equivalent, check_ps_equivalent_approx, check_scaling_equivalent,
    PsDecision, PsWitness, Rescaling, ScalingDecision, DEFAULT_PS_BUDGET,
};
use relu_ident_core::identset::{construct_identification_set, validate_identification_set};
use relu_ident_core::io::{network_from_json, network_to_json, Network};
use relu_ident_core::network::{ConstraintSet, Params};
use relu_ident_core::paths::DEFAULT_PATH_BUDGET;
use relu_ident_core::recovery::{params_oracle, recover_shallow, Oracle, RecoveredModel};
use relu_ident_core::scalar::Scalar;
use relu_ident_core::CoreError;

#[derive(Parser)]
#[command(
    name = "relu-ident",
    version,
    about = "Path-embedding identifiability toolkit for ReLU networks"
)]
struct Cli {
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Include wall-clock timings in the report (breaks byte-identical output).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the path embedding of a network.
    Embed {
        network: PathBuf,
        /// Abort when the architecture needs more than this many paths.
        #[arg(long, default_value_t = DEFAULT_PATH_BUDGET)]
        budget: u64,
    },
    /// Decide how two networks are related: S, PS, none, or inconclusive.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Compositions the PS search may examine.
        #[arg(long, default_value_t = DEFAULT_PS_BUDGET)]
        budget: u64,
        /// Relative tolerance when either input is in float mode.
        #[arg(long, default_value_t = 1e-9)]
        rtol: f64,
        /// Exit with code 2 unless the verdict matches.
        #[arg(long, value_enum)]
        expect: Option<ExpectRelation>,
    },
    /// Structural diagnostics: admissibility, twins, irreducibility,
    /// shallow classification, and the activation dimension.
    Analyze {
        network: PathBuf,
        /// Widest hidden layer the reducibility subset scan will enumerate.
        #[arg(long, default_value_t = DEFAULT_SUBSET_CAP)]
        subset_cap: usize,
        /// Samples for the activation space of deep networks.
        #[arg(long, default_value_t = 400)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sample the activation space: dimension, basis, witnesses.
    Actspace {
        network: PathBuf,
        #[arg(long, default_value_t = 400)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Minimum clearance from activation boundaries for sample points.
        #[arg(long, default_value_t = 1e-9)]
        margin: f64,
        /// Also emit a degeneracy certificate under this constraint set.
        #[arg(long, value_enum)]
        certificate: Option<ConstraintArg>,
        /// Exit with code 2 unless the certificate verdict matches.
        #[arg(long, value_enum, requires = "certificate")]
        expect: Option<ExpectVerdict>,
    },
    /// Construct a finite identification set and validate it.
    Identset {
        network: PathBuf,
        #[arg(long, default_value_t = 400)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        margin: f64,
        /// Random rescalings and perturbations thrown at the set.
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Perturbation size.
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
    },
    /// Reconstruct a shallow network from black-box evaluations, up to
    /// permutation and rescaling.
    Recover {
        /// Network JSON file served as a simulated oracle.
        #[arg(long, required_unless_present = "exec", conflicts_with = "exec")]
        target: Option<PathBuf>,
        /// Command run once per query: the input point goes to its stdin as
        /// one whitespace-separated line, the outputs are read from stdout.
        #[arg(long)]
        exec: Option<String>,
        /// Input dimension (required with --exec).
        #[arg(long, required_unless_present = "target")]
        input_dim: Option<usize>,
        /// Output dimension (required with --exec).
        #[arg(long, required_unless_present = "target")]
        output_dim: Option<usize>,
        /// Cap on line-probing queries (0 = unlimited).
        #[arg(long, default_value_t = 0)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Materialize a named example family as network JSON.
    Examples {
        /// Family name, or "list" to enumerate the available names.
        name: String,
        /// Write files under this prefix instead of inlining the networks.
        #[arg(long)]
        prefix: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExpectRelation {
    #[value(name = "S")]
    S,
    #[value(name = "PS")]
    Ps,
    None,
    Inconclusive,
}

impl ExpectRelation {
    fn as_str(self) -> &'static str {
        match self {
            ExpectRelation::S => "S",
            ExpectRelation::Ps => "PS",
            ExpectRelation::None => "none",
            ExpectRelation::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConstraintArg {
    None,
    ZeroOutputBias,
    ZeroAllBias,
}

impl ConstraintArg {
    fn to_constraint(self) -> ConstraintSet {
        match self {
            ConstraintArg::None => ConstraintSet::Unconstrained,
            ConstraintArg::ZeroOutputBias => ConstraintSet::ZeroOutputBias,
            ConstraintArg::ZeroAllBias => ConstraintSet::ZeroAllBias,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExpectVerdict {
    Degenerate,
    NonDegenerate,
    Inconclusive,
}

fn verdict_str(v: DegeneracyVerdict) -> &'static str {
    match v {
        DegeneracyVerdict::NonDegenerate => "non-degenerate",
        DegeneracyVerdict::Degenerate => "degenerate",
        DegeneracyVerdict::Inconclusive => "inconclusive",
    }
}

fn main() {
    // Cap the worker pool before any parallel code runs.
    if let Ok(v) = std::env::var("RELU_IDENT_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    let start = Instant::now();
    let (mut report, code) = match &cli.command {
        Command::Embed { network, budget } => cmd_embed(network, *budget, cli.out.as_deref())?,
        Command::Compare { a, b, budget, rtol, expect } => cmd_compare(a, b, *budget, *rtol, *expect)?,
        Command::Analyze { network, subset_cap, samples, seed } => {
            cmd_analyze(network, *subset_cap, *samples, *seed)?
        }
        Command::Actspace { network, samples, seed, margin, certificate, expect } => {
            cmd_actspace(network, *samples, *seed, *margin, *certificate, *expect)?
        }
        Command::Identset { network, samples, seed, margin, trials, eps } => {
            cmd_identset(network, *samples, *seed, *margin, *trials, *eps)?
        }
        Command::Recover { target, exec, input_dim, output_dim, budget, seed } => cmd_recover(
            target.as_deref(),
            exec.as_deref(),
            *input_dim,
            *output_dim,
            *budget,
            *seed,
        )?,
        Command::Examples { name, prefix } => cmd_examples(name, prefix.as_deref())?,
    };
    if cli.timings {
        report["timings"] = json!({ "total_ms": start.elapsed().as_secs_f64() * 1e3 });
    }
    let text = serde_json::to_string_pretty(&report)?;
    match &cli.out {
        Some(path) => std::fs::write(path, text + "\n")
            .with_context(|| format!("writing report to {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(code)
}

fn file_hash(path: &Path) -> Result<String> {
    let bytes =
        std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex_digest(&bytes))
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

fn load_network(path: &Path) -> Result<Network> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    network_from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn base_report(command: &str, inputs: Value, seed: Option<u64>) -> Value {
    let mut r = json!({
        "command": command,
        "inputs": inputs,
        "verdicts": {},
        "witnesses": {},
    });
    if let Some(s) = seed {
        r["seed"] = json!(s);
    }
    r
}

fn render_vec<S: Scalar>(v: &[S]) -> Value {
    json!(v.iter().map(|s| s.render()).collect::<Vec<_>>())
}

fn render_rescaling<S: Scalar>(r: &Rescaling<S>) -> Value {
    json!(r
        .factors()
        .iter()
        .map(|layer| layer.iter().map(|s| s.render()).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn render_ps_witness<S: Scalar>(w: &PsWitness<S>) -> Value {
    json!({
        "pi": serde_json::to_value(&w.perm).expect("permutation serializes"),
        "lambda": render_rescaling(&w.rescaling),
    })
}

// embed

fn embedding_report<S: Scalar>(p: &Params<S>, budget: u64) -> Result<(Value, Vec<Value>)> {
    let emb: Embedding<S> = embed_with_budget(p, budget)?;
    let keys: Vec<String> = (0..emb.index().total()).map(|i| emb.index().key_of(i)).collect();
    let phi: Vec<String> = emb.phi().iter().map(|s| s.render()).collect();
    let mut blocks = Vec::new();
    for eta in 0..p.arch().output_dim() {
        let input = emb.input_block(eta);
        let rows: Vec<Value> = (0..input.rows()).map(|r| render_vec(input.row(r))).collect();
        blocks.push(json!({
            "eta": eta,
            "input": rows,
            "hidden": render_vec(&emb.hidden_block(eta)),
        }));
    }
    Ok((json!({ "paths": keys, "phi": phi }), blocks))
}

fn cmd_embed(path: &Path, budget: u64, out: Option<&Path>) -> Result<(Value, i32)> {
    let net = load_network(path)?;
    let (core, blocks) = match &net {
        Network::Exact(p) => embedding_report(p, budget)?,
        Network::Float(p) => embedding_report(p, budget)?,
    };
    // One block file per output when the report itself goes to a file.
    if let Some(out) = out {
        for block in &blocks {
            let eta = block["eta"].as_u64().unwrap();
            let mut name = out.file_stem().unwrap_or_default().to_os_string();
            name.push(format!(".eta{eta}.json"));
            let target = out.with_file_name(name);
            std::fs::write(&target, serde_json::to_string_pretty(block)? + "\n")
                .with_context(|| format!("writing {}", target.display()))?;
        }
    }
    let mut report = base_report(
        "embed",
        json!({ path.display().to_string(): file_hash(path)? }),
        None,
    );
    report["verdicts"] = json!({
        "scalar_mode": net.scalar_mode(),
        "path_count": core["paths"].as_array().unwrap().len(),
    });
    report["witnesses"] = json!({
        "paths": core["paths"],
        "phi": core["phi"],
        "blocks": blocks,
    });
    Ok((report, 0))
}

// compare

fn cmd_compare(
    a_path: &Path,
    b_path: &Path,
    budget: u64,
    rtol: f64,
    expect: Option<ExpectRelation>,
) -> Result<(Value, i32)> {
    let na = load_network(a_path)?;
    let nb = load_network(b_path)?;
    let mut witness = json!({});
    let mut note = Value::Null;

    let relation = if na.arch() != nb.arch() {
        note = json!("architectures differ");
        "none"
    } else {
        match (&na, &nb) {
            (Network::Exact(a), Network::Exact(b)) => {
                match check_scaling_equivalent(a, b)? {
                    ScalingDecision::Equivalent(r) => {
                        witness = json!({ "lambda": render_rescaling(&r) });
                        "S"
                    }
                    _ => match check_ps_equivalent(a, b, budget)? {
                        PsDecision::Equivalent(w) => {
                            witness = render_ps_witness(&w);
                            "PS"
                        }
                        PsDecision::NotEquivalent => "none",
                        PsDecision::Inconclusive(why) => {
                            note = json!(why);
                            "inconclusive"
                        }
                    },
                }
            }
            _ => {
                // Mixed or float inputs: tolerance-based decision.
                let a = na.to_float();
                let b = nb.to_float();
                note = json!(format!("float comparison at rtol {rtol:e}"));
                match check_ps_equivalent_approx(&a, &b, rtol)? {
                    Some(w) => {
                        witness = render_ps_witness(&w);
                        "PS"
                    }
                    None => "none",
                }
            }
        }
    };

    let mut report = base_report(
        "compare",
        json!({
            a_path.display().to_string(): file_hash(a_path)?,
            b_path.display().to_string(): file_hash(b_path)?,
        }),
        None,
    );
    report["verdicts"] = json!({ "relation": relation, "note": note });
    report["witnesses"] = witness;

    let code = match expect {
        Some(e) if e.as_str() != relation => 2,
        _ => 0,
    };
    Ok((report, code))
}

// analyze

fn cmd_analyze(path: &Path, subset_cap: usize, samples: usize, seed: u64) -> Result<(Value, i32)> {
    let net = load_network(path)?;
    // Float files are converted losslessly (every f64 is a dyadic rational)
    // so the verdicts below are exact for them too.
    let p = net.to_exact();

    let adm = admissibility(&p, 0.0);
    let twins = find_twins(&p);
    let twin_classes: Vec<Value> = twins
        .nontrivial()
        .map(|c| {
            json!({
                "layer": c.layer,
                "members": c.members,
                "scales": render_vec(&c.scales),
                "zero_vector": c.zero_vector,
            })
        })
        .collect();
    let irr = is_irreducible(&p, subset_cap);

    let mut verdicts = json!({
        "admissible": adm.admissible,
        "twin_classes": twin_classes.len(),
        "irreducible": serde_json::to_value(&irr)?,
    });
    let mut witnesses = json!({
        "dead_neurons": serde_json::to_value(&adm.dead)?,
        "twins": twin_classes,
    });

    if p.depth() == 2 {
        let class = classify_shallow(&p)?;
        verdicts["shallow_class"] = render_shallow_class(&class);
        let space = shallow_activation_space(&p)?;
        verdicts["actdim"] = json!(space.actdim);
        witnesses["activation_rows"] = json!(space.rows);
    } else {
        let space = sample_activation_space(&p, samples, seed, 1e-9)?;
        verdicts["actdim"] = json!(space.actdim);
        verdicts["actdim_is_lower_bound"] = json!(true);
    }

    let mut report = base_report(
        "analyze",
        json!({ path.display().to_string(): file_hash(path)? }),
        Some(seed),
    );
    report["verdicts"] = verdicts;
    report["witnesses"] = witnesses;
    Ok((report, 0))
}

fn render_shallow_class<S: Scalar>(c: &ShallowClassification<S>) -> Value {
    match c {
        ShallowClassification::NotAdmissible => json!({ "kind": "not-admissible" }),
        ShallowClassification::PsIdentifiableFromBoundedSet => {
            json!({ "kind": "ps-identifiable-from-bounded-set" })
        }
        ShallowClassification::ExcludedByTwins { positive_pairs, negative_pairs, case2a } => {
            json!({
                "kind": "excluded-by-twins",
                "positive_pairs": positive_pairs,
                "negative_pairs": negative_pairs,
                "case2a": case2a.as_ref().map(|c| json!({
                    "nu1": c.nu1,
                    "nu2": c.nu2,
                    "lambda": c.lambda.render(),
                    "outgoing_ratio": c.outgoing_ratio.as_ref().map(|r| r.render()),
                })),
            })
        }
        ShallowClassification::ExcludedByReducibility(w) => json!({
            "kind": "excluded-by-reducibility",
            "witness": serde_json::to_value(w).expect("witness serializes"),
        }),
        ShallowClassification::Undetermined(why) => {
            json!({ "kind": "undetermined", "reason": why })
        }
    }
}

// actspace

fn cmd_actspace(
    path: &Path,
    samples: usize,
    seed: u64,
    margin: f64,
    certificate: Option<ConstraintArg>,
    expect: Option<ExpectVerdict>,
) -> Result<(Value, i32)> {
    let net = load_network(path)?;
    let p = net.to_exact();
    let space = sample_activation_space(&p, samples, seed, margin)?;

    let mut verdicts = json!({
        "actdim": space.actdim,
        "ambient": space.ambient,
        "sampled": space.sampled,
    });
    if p.depth() == 2 {
        verdicts["closed_form_actdim"] = json!(shallow_activation_space(&p)?.actdim);
    }
    let mut witnesses = json!({
        "basis": space.basis,
        "witnesses": space.witnesses,
        "rows": space.rows,
    });

    let mut code = 0;
    if let Some(c) = certificate {
        let cert = nondegeneracy_certificate_with(&p, &c.to_constraint(), samples, seed, 1e-9)?;
        verdicts["degeneracy"] = json!(verdict_str(cert.verdict));
        witnesses["degeneracy"] = json!({
            "reason": cert.reason,
            "dim_v": cert.dim_v,
        });
        if let Some(e) = expect {
            let want = match e {
                ExpectVerdict::Degenerate => DegeneracyVerdict::Degenerate,
                ExpectVerdict::NonDegenerate => DegeneracyVerdict::NonDegenerate,
                ExpectVerdict::Inconclusive => DegeneracyVerdict::Inconclusive,
            };
            if cert.verdict != want {
                code = 2;
            }
        }
    }

    let mut report = base_report(
        "actspace",
        json!({ path.display().to_string(): file_hash(path)? }),
        Some(seed),
    );
    report["verdicts"] = verdicts;
    report["witnesses"] = witnesses;
    Ok((report, code))
}

// identset

fn cmd_identset(
    path: &Path,
    samples: usize,
    seed: u64,
    margin: f64,
    trials: usize,
    eps: f64,
) -> Result<(Value, i32)> {
    let net = load_network(path)?;
    let p = net.to_exact();
    let space = sample_activation_space(&p, samples, seed, margin)?;
    let f_set = construct_identification_set(&p, &space)?;
    let report_inner = validate_identification_set(&p, &f_set, trials, eps, seed ^ 0x5e7)?;

    let mut report = base_report(
        "identset",
        json!({ path.display().to_string(): file_hash(path)? }),
        Some(seed),
    );
    report["verdicts"] = json!({
        "size": f_set.len(),
        "scaling_trials": report_inner.scaling_trials,
        "scaling_failures": report_inner.scaling_failures,
        "perturbation_trials": report_inner.perturbation_trials,
        "perturbations_rejected": report_inner.perturbations_rejected,
        "falsifiers": report_inner.falsifiers.len(),
        "collapse_falsifier": report_inner.collapse_falsifier.is_some(),
    });
    report["witnesses"] = json!({
        "points": f_set.iter().map(|x| render_vec(x)).collect::<Vec<_>>(),
    });
    Ok((report, 0))
}

// recover

/// Runs the --exec command once per query; the child gets the input point
/// on stdin and answers with `output_dim` numbers on stdout.
struct ExecOracle {
    command: String,
    input_dim: usize,
    output_dim: usize,
    used: AtomicU64,
}

impl Oracle for ExecOracle {
    fn input_dim(&self) -> usize {
        self.input_dim
    }
    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn query(&self, x: &[f64]) -> relu_ident_core::Result<Vec<f64>> {
        self.used.fetch_add(1, Ordering::SeqCst);
        let run = || -> Result<Vec<f64>> {
            let mut child = std::process::Command::new("sh")
                .arg("-c")
                .arg(&self.command)
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .spawn()
                .context("spawning oracle command")?;
            let line = x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
            child
                .stdin
                .take()
                .ok_or_else(|| anyhow!("oracle stdin unavailable"))?
                .write_all(format!("{line}\n").as_bytes())
                .context("writing to oracle stdin")?;
            let out = child.wait_with_output().context("waiting for oracle")?;
            if !out.status.success() {
                bail!("oracle command exited with {}", out.status);
            }
            let vals: Vec<f64> = String::from_utf8_lossy(&out.stdout)
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| anyhow!("bad oracle output {t:?}: {e}")))
                .collect::<Result<_>>()?;
            if vals.len() != self.output_dim {
                bail!("oracle returned {} values, expected {}", vals.len(), self.output_dim);
            }
            Ok(vals)
        };
        run().map_err(|e| CoreError::Construction(format!("{e:#}")))
    }

    fn queries_used(&self) -> u64 {
        self.used.load(Ordering::SeqCst)
    }
}

fn recover_report(model: &RecoveredModel) -> Result<Value> {
    let units: Vec<Value> = model
        .units
        .iter()
        .map(|u| {
            json!({
                "normal": u.normal,
                "offset": u.offset,
                "outgoing": u.outgoing,
                "flipped": u.flipped,
                "rank1_residual": u.rank1_residual,
            })
        })
        .collect();
    let network = match &model.params {
        Some(p) => serde_json::from_str::<Value>(&network_to_json(&Network::Float(p.clone())))?,
        None => Value::Null,
    };
    Ok(json!({
        "detection": {
            "hyperplanes": model.detection.hyperplanes.len(),
            "kink_points": model.detection.kink_points,
            "unclustered_points": model.detection.unclustered_points,
            "lines_probed": model.detection.lines_probed,
            "budget_exhausted": model.detection.budget_exhausted,
        },
        "units": units,
        "network": network,
        "affine": { "linear": model.linear, "constant": model.constant },
        "verification": model.verification.map(|v| json!({
            "points": v.points,
            "max_abs_err": v.max_abs_err,
            "scale": v.scale,
        })),
        "violations": model.violations,
        "probe_queries": model.probe_queries,
        "total_queries": model.total_queries,
    }))
}

fn cmd_recover(
    target: Option<&Path>,
    exec: Option<&str>,
    input_dim: Option<usize>,
    output_dim: Option<usize>,
    budget: u64,
    seed: u64,
) -> Result<(Value, i32)> {
    let (model, inputs) = match (target, exec) {
        (Some(path), None) => {
            let net = load_network(path)?;
            let p = net.to_float();
            let oracle = params_oracle(&p);
            let d = p.arch().input_dim();
            let k = p.arch().output_dim();
            let model = recover_shallow(&oracle, d, k, budget, seed)?;
            (model, json!({ path.display().to_string(): file_hash(path)? }))
        }
        (None, Some(command)) => {
            let d = input_dim.ok_or_else(|| anyhow!("--exec needs --input-dim"))?;
            let k = output_dim.ok_or_else(|| anyhow!("--exec needs --output-dim"))?;
            let oracle = ExecOracle {
                command: command.to_string(),
                input_dim: d,
                output_dim: k,
                used: AtomicU64::new(0),
            };
            let model = recover_shallow(&oracle, d, k, budget, seed)?;
            (model, json!({ "exec": hex_digest(command.as_bytes()) }))
        }
        _ => bail!("exactly one of --target or --exec is required"),
    };

    let mut report = base_report("recover", inputs, Some(seed));
    report["verdicts"] = json!({
        "units": model.units.len(),
        "clean": model.violations.is_empty(),
        "violations": model.violations,
    });
    report["witnesses"] = recover_report(&model)?;
    Ok((report, 0))
}

// examples

fn cmd_examples(name: &str, prefix: Option<&Path>) -> Result<(Value, i32)> {
    let pairs = standard_pairs();
    let mut report = base_report("examples", json!({ "name": name }), None);

    if name == "list" {
        let mut names: Vec<&str> = pairs.iter().map(|p| p.name.as_str()).collect();
        names.push("abs");
        report["verdicts"] = json!({ "families": names });
        return Ok((report, 0));
    }

    let (networks, claimed): (Vec<(&str, Network)>, Value) = if name == "abs" {
        (
            vec![("network", Network::Exact(relu_ident_core::counterexamples::abs_network()))],
            Value::Null,
        )
    } else {
        let pair = pairs
            .into_iter()
            .find(|p| p.name == name)
            .ok_or_else(|| anyhow!("unknown example {name:?}; try `relu-ident examples list`"))?;
        let claimed = json!(match pair.claimed {
            relu_ident_core::counterexamples::ClaimedRelation::NotScaling => "not-S",
            relu_ident_core::counterexamples::ClaimedRelation::NotPs => "not-PS",
        });
        (
            vec![("base", Network::Exact(pair.base)), ("other", Network::Exact(pair.other))],
            claimed,
        )
    };

    let mut emitted = serde_json::Map::new();
    let mut files = Vec::new();
    for (role, net) in &networks {
        let text = network_to_json(net);
        match prefix {
            Some(prefix) => {
                let mut file = prefix.as_os_str().to_os_string();
                file.push(format!(".{role}.json"));
                let path = PathBuf::from(file);
                std::fs::write(&path, text + "\n")
                    .with_context(|| format!("writing {}", path.display()))?;
                files.push(path.display().to_string());
            }
            None => {
                emitted.insert(role.to_string(), serde_json::from_str(&text)?);
            }
        }
    }
    report["verdicts"] = json!({ "claimed": claimed, "files": files });
    report["witnesses"] = Value::Object(emitted);
    Ok((report, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relation_names_match_the_report_vocabulary() {
        assert_eq!(ExpectRelation::S.as_str(), "S");
        assert_eq!(ExpectRelation::Ps.as_str(), "PS");
        assert_eq!(ExpectRelation::None.as_str(), "none");
        assert_eq!(ExpectRelation::Inconclusive.as_str(), "inconclusive");
    }

    #[test]
    fn cli_declaration_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
