// Copyright 2026 The fragshadow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fragshadow::bounds::{theorem2_quote, ComplexityQuote};
use fragshadow::cutter::{CutFile, FragmentGraph};
use fragshadow::experiment::{
    collect_fragment_shadows, gen_clustered_ansatz, random_pauli_observable, read_csv, run_experiment_partial,
    unobserved_stats, write_csv, ExperimentConfig, ExperimentMetadata,
};
use fragshadow::oracle::{exact_cut_identity_check, exact_observable};
use fragshadow::shadows::{collect_state_shadow, read_jsonl, write_jsonl, ChoiRegisterLayout};
use fragshadow::{
    cut_circuit, partition_for_observable, recombine_estimate, reduce, Circuit, CutSpec, Error, Observable,
    ReducedGraph, Result, SeedStream, ShadowEnsemble,
};

#[derive(Parser)]
#[command(name = "fragshadow", version, about = "Fragmented classical shadows on cut circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

#[derive(clap::Args)]
struct CircuitArgs {
    /// Circuit JSON file.
    #[arg(long)]
    circuit: PathBuf,
    /// Cut list JSON file (`{"cuts":[{"wire":..,"after_gate":..}]}`); omitted means no cuts.
    #[arg(long)]
    cuts: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a clustered Haar ansatz and the cut list for a fragment count.
    GenAnsatz {
        #[arg(long, default_value_t = 3)]
        clusters: usize,
        #[arg(long, default_value_t = 3)]
        cluster_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fragment count the written cut list produces.
        #[arg(long)]
        fragments: Option<usize>,
        /// Circuit output path (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        cuts_out: Option<PathBuf>,
        /// Also print a random Pauli observable of this size.
        #[arg(long)]
        obs_size: Option<usize>,
    },
    /// Cut a circuit and print the fragment graph (and partition for `--obs`).
    Cut {
        #[command(flatten)]
        input: CircuitArgs,
        #[arg(long)]
        obs: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample shadows of the circuit or of each fragment's Choi state as JSON lines.
    Shadow {
        #[command(flatten)]
        input: CircuitArgs,
        /// Restrict to fragments that matter for this observable.
        #[arg(long)]
        obs: Option<String>,
        /// Total shots across sampled fragments.
        #[arg(long, default_value_t = 10_000)]
        shots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate an observable from fragment shadows.
    Estimate {
        #[command(flatten)]
        input: CircuitArgs,
        #[arg(long)]
        obs: String,
        #[arg(long, default_value_t = 10_000)]
        shots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Reuse shadows written by `shadow` instead of sampling.
        #[arg(long)]
        shadows: Option<PathBuf>,
        /// Include the exact value in the report.
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact expectation value, and the cut-identity check when cuts are given.
    Oracle {
        #[command(flatten)]
        input: CircuitArgs,
        #[arg(long)]
        obs: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-fragment sample-complexity quotes.
    Bounds {
        #[command(flatten)]
        input: CircuitArgs,
        #[arg(long)]
        obs: String,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fragmented versus unfragmented estimation over a grid of settings.
    Experiment {
        #[arg(long, default_value_t = 3)]
        clusters: usize,
        #[arg(long, default_value_t = 3)]
        cluster_size: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        fragments: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,5,9")]
        obs_size: Vec<usize>,
        /// Total shots per setting, summed over fragments.
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
        shots: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        /// Record abs_error = 1 whenever the observable was not observed.
        #[arg(long)]
        penalty: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical versus analytic unobserved probability from an experiment CSV.
    UnobservedStats {
        /// Experiment CSV file.
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        e if e.is_size_limit() => 3,
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn load_circuit(args: &CircuitArgs) -> Result<(Circuit, Vec<CutSpec>)> {
    let circuit = Circuit::from_json(&std::fs::read_to_string(&args.circuit)?)?;
    let cuts = match &args.cuts {
        Some(p) => serde_json::from_str::<CutFile>(&std::fs::read_to_string(p)?)?.cuts,
        None => Vec::new(),
    };
    Ok((circuit, cuts))
}

fn reduced_for(graph: &FragmentGraph, obs: &Observable) -> Result<ReducedGraph> {
    let partition = partition_for_observable(graph, &obs.support_qubits())?;
    Ok(reduce(graph, &partition))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::GenAnsatz { clusters, cluster_size, seed, fragments, out, cuts_out, obs_size } => {
            let stream = SeedStream::new(seed);
            let ansatz = gen_clustered_ansatz(clusters, cluster_size, stream.child(0))?;
            let mut w = output(out.as_deref())?;
            writeln!(w, "{}", ansatz.circuit.to_json()?)?;
            w.flush()?;
            if let Some(path) = cuts_out {
                let cuts = ansatz.cuts_for(fragments.unwrap_or(clusters))?.to_vec();
                write_json(Some(&path), &CutFile { cuts })?;
            }
            if let Some(size) = obs_size {
                let p = random_pauli_observable(ansatz.circuit.n_qubits(), size, stream.child(1))?;
                eprintln!("observable: {p}");
            }
            Ok(())
        }
        Command::Cut { input, obs, out } => {
            let (circuit, cuts) = load_circuit(&input)?;
            let graph = cut_circuit(&circuit, &cuts)?;
            #[derive(Serialize)]
            struct CutReport<'a> {
                acyclic: bool,
                graph: &'a FragmentGraph,
                #[serde(skip_serializing_if = "Option::is_none")]
                partition: Option<fragshadow::Partition>,
            }
            let partition = match obs {
                Some(o) => Some(partition_for_observable(&graph, &o.parse::<Observable>()?.support_qubits())?),
                None => None,
            };
            write_json(out.as_deref(), &CutReport { acyclic: graph.is_acyclic(), graph: &graph, partition })
        }
        Command::Shadow { input, obs, shots, seed, out } => {
            let (circuit, cuts) = load_circuit(&input)?;
            let stream = SeedStream::new(seed);
            let mut w = output(out.as_deref())?;
            if cuts.is_empty() && obs.is_none() {
                write_jsonl(&mut w, &collect_state_shadow(&circuit, shots, stream)?, None)?;
            } else {
                let graph = cut_circuit(&circuit, &cuts)?;
                let reduced = match obs {
                    Some(o) => reduced_for(&graph, &o.parse()?)?,
                    // full support keeps every fragment
                    None => reduce(&graph, &partition_for_observable(&graph, &(0..circuit.n_qubits()).collect())?),
                };
                let ensembles = collect_fragment_shadows(&reduced, shots, stream)?;
                for f in &reduced.fragments {
                    write_jsonl(&mut w, &ensembles[&f.id], Some(&ChoiRegisterLayout::for_fragment(f)))?;
                }
            }
            w.flush()?;
            Ok(())
        }
        Command::Estimate { input, obs, shots, seed, shadows, exact, out } => {
            let (circuit, cuts) = load_circuit(&input)?;
            let obs: Observable = obs.parse()?;
            let graph = cut_circuit(&circuit, &cuts)?;
            let reduced = reduced_for(&graph, &obs)?;
            let ensembles: BTreeMap<usize, ShadowEnsemble> = match shadows {
                Some(p) => read_jsonl(BufReader::new(File::open(p)?))?
                    .into_iter()
                    .map(|(h, e)| (h.provenance.fragment.unwrap_or(0), e))
                    .collect(),
                None => collect_fragment_shadows(&reduced, shots, SeedStream::new(seed))?,
            };
            let mut report = recombine_estimate(&reduced, &ensembles, &obs)?;
            if exact {
                report.exact = Some(exact_observable(&circuit, &obs)?);
            }
            write_json(out.as_deref(), &report)
        }
        Command::Oracle { input, obs, out } => {
            let (circuit, cuts) = load_circuit(&input)?;
            let obs: Observable = obs.parse()?;
            if cuts.is_empty() {
                #[derive(Serialize)]
                struct Exact {
                    exact: f64,
                }
                write_json(out.as_deref(), &Exact { exact: exact_observable(&circuit, &obs)? })
            } else {
                write_json(out.as_deref(), &exact_cut_identity_check(&circuit, &cuts, &obs)?)
            }
        }
        Command::Bounds { input, obs, epsilon, delta, format, out } => {
            let (circuit, cuts) = load_circuit(&input)?;
            let obs: Observable = obs.parse()?;
            let graph = cut_circuit(&circuit, &cuts)?;
            let reduced = reduced_for(&graph, &obs)?;
            let k_size = obs.support_qubits().len();
            let quotes = reduced
                .fragments
                .iter()
                .map(|f| Ok((f.id, theorem2_quote(&reduced, f, epsilon, delta, obs.norm_bound(), k_size)?)))
                .collect::<Result<BTreeMap<usize, ComplexityQuote>>>()?;
            match format {
                Format::Json => write_json(out.as_deref(), &quotes),
                Format::Csv | Format::Text => {
                    let mut w = output(out.as_deref())?;
                    writeln!(
                        w,
                        "{:>8} {:>4} {:>4} {:>12} {:>12} {:>16} {:>16}",
                        "fragment", "deg", "qdeg", "K", "K(proof)", "N", "N*K"
                    )?;
                    for (id, q) in &quotes {
                        writeln!(
                            w,
                            "{:>8} {:>4} {:>4} {:>12.4} {:>12.4} {:>16.0} {:>16.0}",
                            id, q.inputs.deg, q.inputs.qdeg, q.groups, q.groups_proof_form, q.per_group, q.total_shots
                        )?;
                    }
                    w.flush()?;
                    Ok(())
                }
            }
        }
        Command::Experiment {
            clusters,
            cluster_size,
            fragments,
            obs_size,
            shots,
            trials,
            penalty,
            seed,
            format,
            out,
        } => {
            let config = ExperimentConfig {
                clusters,
                cluster_size,
                fragment_counts: fragments,
                obs_sizes: obs_size,
                shot_grid: shots,
                trials,
                penalty_mode: penalty,
                base_seed: seed,
            };
            config.validate()?;
            let (rows, failure) = run_experiment_partial(&config);
            match format {
                Format::Json => write_json(out.as_deref(), &rows)?,
                Format::Csv | Format::Text => {
                    let mut w = output(out.as_deref())?;
                    write_csv(&mut w, &rows)?;
                    w.flush()?;
                }
            }
            if let Some(path) = &out {
                let mut meta = path.clone().into_os_string();
                meta.push(".meta.json");
                write_json(Some(Path::new(&meta)), &ExperimentMetadata::new(&config))?;
            }
            match failure {
                Some(e) => Err(e),
                None => Ok(()),
            }
        }
        Command::UnobservedStats { input, format, out } => {
            let rows = read_csv(File::open(input)?)?;
            let stats = unobserved_stats(&rows);
            match format {
                Format::Json => write_json(out.as_deref(), &stats),
                Format::Csv | Format::Text => {
                    let mut w = output(out.as_deref())?;
                    writeln!(w, "shots,obs_size,trials,empirical,analytic")?;
                    for s in &stats {
                        writeln!(w, "{},{},{},{},{}", s.shots, s.obs_size, s.trials, s.empirical, s.analytic)?;
                    }
                    w.flush()?;
                    Ok(())
                }
            }
        }
    }
}
