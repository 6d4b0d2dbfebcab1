//! `fso`: batch matching, FSO role resolution and diffusion simulations.
//!
//! Exit codes: 0 on success, 2 when an input is missing or invalid,
//! 1 on any other failure.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use fso_core::community::{Community, CommunityEvent, GroupActivity, MatchPolicy, MemberKind};
use fso_core::descriptions::parse_descriptions;
use fso_core::diffusion::{self, monte_carlo, ScenarioSpec, Topology};
use fso_core::fractal::{FsoFixture, Resolution};
use fso_core::taxonomy::{parse_taxonomy, Taxonomy};
use fso_core::ServiceDescription;
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "fso", version, about = "Service-oriented communities and fractal organizations")]
struct Cli {
    /// Seed for stochastic commands; overrides the scenario's own seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Publish description files into one community and report the matches.
    Match {
        /// Subsumption file, one `Child subClassOf Parent` per line.
        #[arg(long)]
        taxonomy: Option<PathBuf>,
        /// Turtle files; each file's stem is the publishing member's id.
        descriptions: Vec<PathBuf>,
        /// Community document listing members and their description files.
        #[arg(long, conflicts_with = "descriptions")]
        community: Option<PathBuf>,
        /// Let providers of a supertype serve subtype requests.
        #[arg(long)]
        allow_specialization: bool,
        /// Match descriptions regardless of their time windows.
        #[arg(long)]
        no_time_overlap: bool,
        /// Write the JSON report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Resolve the triggering conditions of an FSO fixture.
    Resolve {
        fixture: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run Monte-Carlo diffusion scenarios and write CSV traces.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 100)]
        replicates: usize,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also write every replicate's trace.
        #[arg(long)]
        dump_replicates: bool,
    },
}

/// An error caused by the user's input rather than by the program.
#[derive(Debug)]
struct InputError(String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input_err(msg: impl fmt::Display) -> anyhow::Error {
    InputError(msg.to_string()).into()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("FSO_LOG")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<InputError>()) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Match {
            taxonomy,
            descriptions,
            community,
            allow_specialization,
            no_time_overlap,
            out,
        } => {
            let mut policy = MatchPolicy {
                allow_specialization,
                require_time_overlap: !no_time_overlap,
            };
            let setup = match community {
                Some(path) => CommunitySetup::load(&path, taxonomy.as_deref(), &mut policy)?,
                None => CommunitySetup::from_files(taxonomy.as_deref(), &descriptions)?,
            };
            let report = setup.publish_all(policy)?;
            emit(&report, out.as_deref())
        }
        Command::Resolve { fixture, out } => {
            let fx = FsoFixture::from_json(&read(&fixture)?)
                .map_err(|e| input_err(format!("{}: {e}", fixture.display())))?;
            let resolutions = fx.run().map_err(|e| input_err(format!("{}: {e}", fixture.display())))?;
            emit(&ResolveReport { resolutions }, out.as_deref())
        }
        Command::Simulate {
            scenario,
            replicates,
            out,
            dump_replicates,
        } => simulate(&scenario, replicates, &out, dump_replicates, cli.seed),
    }
}

fn emit<T: Serialize>(report: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report).context("serializing report")?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing report"),
    }
}

fn load_taxonomy(path: Option<&Path>) -> Result<Taxonomy> {
    match path {
        Some(p) => parse_taxonomy(&read(p)?).map_err(|e| input_err(format!("{}: {e}", p.display()))),
        None => Ok(Taxonomy::new()),
    }
}

fn load_descriptions(path: &Path) -> Result<Vec<ServiceDescription>> {
    parse_descriptions(&read(path)?).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CommunityFile {
    #[serde(default = "default_community_id")]
    id: String,
    taxonomy: Option<PathBuf>,
    #[serde(default)]
    allow_specialization: Option<bool>,
    #[serde(default)]
    require_time_overlap: Option<bool>,
    #[serde(default = "default_true")]
    group_promotion: bool,
    /// Residual request per activity type; `null` means none.
    #[serde(default)]
    residuals: BTreeMap<String, Option<String>>,
    members: Vec<MemberFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MemberFile {
    id: String,
    #[serde(default)]
    descriptions: Vec<PathBuf>,
}

fn default_community_id() -> String {
    "community".into()
}

fn default_true() -> bool {
    true
}

struct CommunitySetup {
    id: String,
    taxonomy: Taxonomy,
    group_promotion: bool,
    residuals: BTreeMap<String, Option<String>>,
    /// Members in registration order.
    members: Vec<String>,
    /// Publications in order.
    publications: Vec<(String, ServiceDescription)>,
}

impl CommunitySetup {
    fn from_files(taxonomy: Option<&Path>, files: &[PathBuf]) -> Result<Self> {
        let mut setup = CommunitySetup {
            id: default_community_id(),
            taxonomy: load_taxonomy(taxonomy)?,
            group_promotion: true,
            residuals: BTreeMap::new(),
            members: Vec::new(),
            publications: Vec::new(),
        };
        for path in files {
            let member = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .ok_or_else(|| input_err(format!("{}: no file name", path.display())))?;
            if !setup.members.contains(&member) {
                setup.members.push(member.clone());
            }
            for d in load_descriptions(path)? {
                setup.publications.push((member.clone(), d));
            }
        }
        Ok(setup)
    }

    /// Relative paths in the document resolve against its directory. A
    /// taxonomy given on the command line wins over the document's.
    fn load(path: &Path, taxonomy: Option<&Path>, policy: &mut MatchPolicy) -> Result<Self> {
        let doc: CommunityFile =
            serde_json::from_str(&read(path)?).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let tax_path = taxonomy.map(Path::to_path_buf).or_else(|| doc.taxonomy.map(|t| base.join(t)));
        if let Some(v) = doc.allow_specialization {
            policy.allow_specialization |= v;
        }
        if let Some(v) = doc.require_time_overlap {
            policy.require_time_overlap &= v;
        }
        let mut setup = CommunitySetup {
            id: doc.id,
            taxonomy: load_taxonomy(tax_path.as_deref())?,
            group_promotion: doc.group_promotion,
            residuals: doc.residuals,
            members: Vec::new(),
            publications: Vec::new(),
        };
        for m in doc.members {
            for file in &m.descriptions {
                for d in load_descriptions(&base.join(file))? {
                    setup.publications.push((m.id.clone(), d));
                }
            }
            setup.members.push(m.id);
        }
        Ok(setup)
    }

    fn publish_all(self, policy: MatchPolicy) -> Result<MatchReport> {
        let mut c = Community::new(self.id, self.taxonomy, policy).with_group_promotion(self.group_promotion);
        for (t, r) in self.residuals {
            c.set_residual_request(&t, r);
        }
        for m in &self.members {
            c.add_member(m.clone(), MemberKind::Person).map_err(input_err)?;
        }
        let mut events = Vec::new();
        for (member, d) in self.publications {
            events.extend(c.publish(&member, d)?);
        }
        Ok(MatchReport {
            policy,
            events,
            activities: c.activities().to_vec(),
            pending: c
                .pending()
                .into_iter()
                .map(|p| PendingEntry {
                    id: p.id.0,
                    member: p.member.clone(),
                    description: p.description.clone(),
                })
                .collect(),
        })
    }
}

#[derive(Serialize)]
struct MatchReport {
    policy: MatchPolicy,
    events: Vec<CommunityEvent>,
    activities: Vec<GroupActivity>,
    pending: Vec<PendingEntry>,
}

#[derive(Serialize)]
struct PendingEntry {
    id: usize,
    member: String,
    description: ServiceDescription,
}

#[derive(Serialize)]
struct ResolveReport {
    resolutions: Vec<Resolution>,
}

/// Reads a scenario file: a scenario spec whose `topology` may be replaced
/// by a `topologies` list, producing one spec per topology.
fn load_scenarios(path: &Path) -> Result<Vec<ScenarioSpec>> {
    let bad = |e: &dyn fmt::Display| input_err(format!("{}: {e}", path.display()));
    let mut value: serde_json::Value = serde_json::from_str(&read(path)?).map_err(|e| bad(&e))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| bad(&"scenario must be a JSON object"))?;
    let topologies: Option<Vec<Topology>> = obj
        .remove("topologies")
        .map(serde_json::from_value)
        .transpose()
        .map_err(|e| bad(&e))?;
    let spec: ScenarioSpec = serde_json::from_value(value).map_err(|e| bad(&e))?;
    let specs: Vec<ScenarioSpec> = match topologies {
        Some(ts) if ts.is_empty() => return Err(bad(&"`topologies` is empty")),
        Some(ts) => ts
            .into_iter()
            .map(|topology| ScenarioSpec { topology, ..spec.clone() })
            .collect(),
        None => vec![spec],
    };
    for s in &specs {
        s.validate().map_err(|e| bad(&e))?;
    }
    Ok(specs)
}

fn simulate(path: &Path, replicates: usize, out: &Path, dump: bool, seed: Option<u64>) -> Result<()> {
    if replicates == 0 {
        return Err(input_err("--replicates must be at least 1"));
    }
    let specs = load_scenarios(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());

    let mut results = Vec::new();
    for mut spec in specs {
        if let Some(s) = seed {
            spec.seed = s;
        }
        log::info!("{name}: {} x{replicates}", spec.topology.name());
        let mc = monte_carlo(&spec, replicates).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
        results.push((spec.topology, mc));
    }

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for (topology, mc) in &results {
        let stem = format!("{name}-{}", topology.name());
        let file = out.join(format!("{stem}.csv"));
        let w = fs::File::create(&file).with_context(|| format!("creating {}", file.display()))?;
        diffusion::write_aggregate_csv(w, &mc.aggregate).with_context(|| format!("writing {}", file.display()))?;
        if dump {
            let file = out.join(format!("{stem}-replicates.csv"));
            let w = fs::File::create(&file).with_context(|| format!("creating {}", file.display()))?;
            diffusion::write_replicates_csv(w, &mc.traces).with_context(|| format!("writing {}", file.display()))?;
        }
        println!(
            "{name} {}: final mean diffusion {} over {} replicates",
            topology.name(),
            mc.aggregate.final_mean(),
            mc.aggregate.replicates
        );
    }
    Ok(())
}
