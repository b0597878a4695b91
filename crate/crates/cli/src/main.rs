use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use mloop_core::loop_core::{gen_from_spec, parse_loop};
use mloop_core::normalizer::{normalizer, normalizer_oracle};
use mloop_core::structure::{
    associator_subloop, center, cube_subloop, frattini_subloop, generate_subloop,
    upper_central_series, Subloop,
};
use mloop_core::verify::{run_suite, suite_names, Status};
use mloop_core::{CayleyLoop, Error, Guards, MultGroupBundle};

#[derive(Parser)]
#[command(
    name = "mloop",
    version,
    about = "Exact computations on finite commutative Moufang loops"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a loop and report which laws it satisfies
    Check(Common),
    /// Print the structural invariants of a CML and its multiplication group
    Invariants(Common),
    /// Compute the normalizer of a subloop, stage by stage
    Normalizer {
        #[command(flatten)]
        common: Common,
        /// Generators of the subloop H
        #[arg(long, value_delimiter = ',', required = true)]
        subloop: Vec<usize>,
        /// Generators of the ambient subloop K (default: the whole loop)
        #[arg(long, value_delimiter = ',')]
        within: Option<Vec<usize>>,
        /// Cross-check against greedy saturation
        #[arg(long)]
        oracle: bool,
    },
    /// Run a verification suite
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

#[derive(Args)]
struct Common {
    /// Loop file
    #[arg(long, conflicts_with = "gen", required_unless_present = "gen")]
    input: Option<PathBuf>,
    /// Generator spec: trivial, zassenhaus81, abelian:3,3 or product:AxB
    #[arg(long)]
    gen: Option<String>,
    /// Write the report as JSON
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest loop order accepted
    #[arg(long, env = "MLOOP_MAX_ORDER", default_value_t = Guards::DEFAULT.max_order)]
    max_order: usize,
    /// Largest loop order whose full subloop lattice may be enumerated
    #[arg(long, env = "MLOOP_MAX_LATTICE", default_value_t = Guards::DEFAULT.lattice)]
    max_lattice: usize,
}

impl Common {
    fn guards(&self) -> Guards {
        Guards {
            max_order: self.max_order,
            lattice: self.max_lattice,
            ..Guards::DEFAULT
        }
    }

    fn load(&self) -> anyhow::Result<CayleyLoop> {
        let l = match (&self.input, &self.gen) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let l = parse_loop(&text)?;
                if l.order() > self.max_order {
                    return Err(Error::OrderOverflow {
                        guard: "max-order",
                        what: "loop file".into(),
                        requested: l.order() as u128,
                        limit: self.max_order as u128,
                    }
                    .into());
                }
                if l.name().is_some() {
                    l
                } else {
                    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
                    l.with_name(stem.unwrap_or_else(|| "input".into()))
                }
            }
            (None, Some(spec)) => gen_from_spec(spec, self.max_order)?,
            (None, None) => anyhow::bail!("one of --input or --gen is required"),
        };
        Ok(l)
    }
}

fn write_json(path: Option<&Path>, value: &impl serde::Serialize) -> anyhow::Result<()> {
    if let Some(path) = path {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn check(common: &Common) -> anyhow::Result<ExitCode> {
    let l = common.load()?;
    let d = l.diagnose();
    println!("loop: {} (order {})", l.label(), l.order());
    println!("is_latin: {}", d.is_latin);
    println!("has_identity: {}", d.has_identity);
    println!("is_commutative: {}", d.is_commutative);
    println!("is_cml: {}", d.is_cml);
    println!("is_associative: {}", d.is_associative);
    if let Some(v) = &d.first_violation {
        println!("first_violation: {:?} at {:?}", v.law, v.triple);
    }
    write_json(
        common.json.as_deref(),
        &json!({ "loop": { "name": l.label(), "order": l.order() }, "diagnostics": d }),
    )?;
    Ok(if d.is_cml {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn invariants(common: &Common) -> anyhow::Result<ExitCode> {
    let l = common.load()?;
    let guards = common.guards();
    let z = center(&l);
    let lp = associator_subloop(&l)?;
    let cubes = cube_subloop(&l)?;
    let class = upper_central_series(&l)?.class;
    let phi = if l.order() == 1 {
        Subloop::whole(&l)
    } else {
        frattini_subloop(&l)?
    };
    let bundle = MultGroupBundle::new(&l)?;
    let m = bundle.mult_group();
    let zm = m.center_of_group(&guards)?;
    let derived = m.derived_subgroup()?;
    let phi_m = m.frattini_subgroup(&guards)?;
    let rows: Vec<(&str, serde_json::Value)> = vec![
        ("order", json!(l.order())),
        ("center", json!(z.len())),
        ("associator_subloop", json!(lp.len())),
        ("cubes", json!(cubes.len())),
        ("nilpotency_class", json!(class)),
        ("frattini_subloop", json!(phi.len())),
        ("mult_group", json!(m.order() as u64)),
        (
            "inner_mapping_group",
            json!(bundle.inner_group().order() as u64),
        ),
        ("mult_group_center", json!(zm.order() as u64)),
        ("mult_group_derived", json!(derived.order() as u64)),
        ("mult_group_frattini", json!(phi_m.order() as u64)),
    ];
    println!("loop: {} (order {})", l.label(), l.order());
    for (key, value) in &rows {
        println!("{key}: {value}");
    }
    let invariants: serde_json::Map<String, serde_json::Value> =
        rows.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    let report = json!({
        "loop": { "name": l.label(), "order": l.order() },
        "invariants": invariants,
    });
    write_json(common.json.as_deref(), &report)?;
    Ok(ExitCode::SUCCESS)
}

fn normalizer_cmd(
    common: &Common,
    subloop: &[usize],
    within: Option<&[usize]>,
    oracle: bool,
) -> anyhow::Result<ExitCode> {
    let l = common.load()?;
    let h = generate_subloop(&l, subloop)?;
    let k = match within {
        Some(gens) => generate_subloop(&l, gens)?,
        None => Subloop::whole(&l),
    };
    let trace = normalizer(&l, &k, &h)?;
    println!("loop: {} (order {})", l.label(), l.order());
    println!("H: {h} (order {})", h.len());
    println!("K: order {}", k.len());
    for (i, (p, d)) in trace.p_stages.iter().zip(&trace.d_stages).enumerate() {
        println!("stage {}: |P| = {}, |D| = {}", i + 1, p.len(), d.len());
    }
    println!("N: {} (order {})", trace.result, trace.result.len());
    let post = &trace.postconditions;
    let mut ok = post.hold();
    if !post.stages_agree {
        println!("warning: final P and D stages differ");
    }
    if !post.h_normal {
        println!("warning: H is not normal in N");
    }
    if let Some(x) = post.normal_extension_outside {
        println!("warning: H is normal in <H, {x}> although {x} is outside N");
    }
    let mut oracle_value = serde_json::Value::Null;
    if oracle {
        match normalizer_oracle(&l, &k, &h, common.seed, 5) {
            Ok(s) => {
                let agrees = s == trace.result;
                ok &= agrees;
                println!(
                    "oracle: {s} ({})",
                    if agrees { "agrees" } else { "DIFFERS" }
                );
                oracle_value = json!({ "result": s, "agrees": agrees });
            }
            Err(Error::Postcondition(msg)) => {
                ok = false;
                println!("oracle: runs disagree: {msg}");
                oracle_value = json!({ "error": msg });
            }
            Err(e) => return Err(e.into()),
        }
    }
    write_json(
        common.json.as_deref(),
        &json!({
            "loop": { "name": l.label(), "order": l.order() },
            "H": h,
            "K": k,
            "trace": trace,
            "oracle": oracle_value,
        }),
    )?;
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn verify(common: &Common, suite: &str) -> anyhow::Result<ExitCode> {
    if !suite_names().contains(&suite) {
        return Err(Error::InvalidSpec(format!(
            "unknown suite '{suite}' (expected one of {})",
            suite_names().join(", ")
        ))
        .into());
    }
    let l = common.load()?;
    let report = run_suite(&l, suite, common.seed, common.guards())?;
    println!("loop: {} (order {})", l.label(), l.order());
    for c in &report.checks {
        let tag = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        println!("{tag} {} ({} ms)", c.name, c.millis);
        if c.status != Status::Pass {
            println!("     {}", c.witness);
        }
    }
    write_json(common.json.as_deref(), &report)?;
    Ok(if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Check(common) => check(common),
        Command::Invariants(common) => invariants(common),
        Command::Normalizer {
            common,
            subloop,
            within,
            oracle,
        } => normalizer_cmd(common, subloop, within.as_deref(), *oracle),
        Command::Verify { common, suite } => verify(common, suite),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
