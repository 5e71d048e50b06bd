use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use partial_repair::exact::ExactSecureSystem;
use partial_repair::harness::{self as h, HarnessError, HarnessResult, PatternSpec, RunConfig};
use partial_repair::secrecy::{Precoder, Scope, SecretPartition, SecurityMode};
use partial_repair::{CachingSystem, ErasurePattern, RepairPlan};
use serde::Serialize;

/// Secure partial repair toolkit.
#[derive(Parser)]
#[command(name = "spr", version)]
struct Cli {
    /// Directory for outputs when `--out` is not given; stdout otherwise.
    #[arg(long, global = true, env = h::OUT_DIR_ENV)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a caching system with a random payload.
    Build {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Erase packets from a system.
    Erase {
        #[arg(long)]
        system: PathBuf,
        /// `counts:2,2,1,1`, `random:0.25` or `surviving:0 1;0 1;0;1`.
        #[arg(long)]
        pattern: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimum budget, allocation and cut-set table; writes the plan.
    Plan {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        pattern: PathBuf,
        /// Where to write the plan (the report goes to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repair erased packets.
    Repair {
        #[arg(long, value_enum, default_value_t = RepairMode::Functional)]
        mode: RepairMode,
        /// System JSON (an exact-secure system for `exact-uv`).
        #[arg(long)]
        system: PathBuf,
        #[arg(long, required_if_eq("mode", "functional"))]
        pattern: Option<PathBuf>,
        #[arg(long, required_if_eq("mode", "functional"))]
        plan: Option<PathBuf>,
        #[arg(long, required_if_eq("mode", "exact-uv"))]
        u: Option<usize>,
        #[arg(long, required_if_eq("mode", "exact-uv"))]
        v: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the plan with its chosen broadcasts, for `audit`.
        #[arg(long)]
        plan_out: Option<PathBuf>,
    },
    /// Audit a plan's broadcasts; exits non-zero when the mode is not met.
    Audit {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[command(flatten)]
        part: PartitionArgs,
        #[arg(long, default_value = "strong")]
        mode: String,
        #[arg(long, default_value = "fixed")]
        scope: String,
        #[arg(long)]
        precoder: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search a security precoder.
    Precode {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[command(flatten)]
        part: PartitionArgs,
        #[arg(long, default_value = "strong")]
        mode: String,
        #[arg(long, default_value = "fixed")]
        scope: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the bare precoder, for `audit --precoder`.
        #[arg(long)]
        precoder_out: Option<PathBuf>,
    },
    /// Secrecy capacities and field-size bounds.
    Capacity {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        gamma: usize,
        #[arg(long)]
        gamma_min: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run repeated episodes and write per-episode CSV.
    Simulate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        /// CSV path; a summary JSON is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the explicit n = 2k exact-repair system.
    Exact {
        #[arg(long)]
        k: usize,
        /// Defaults to the smallest prime above k.
        #[arg(long)]
        field: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RepairMode {
    Functional,
    ExactUv,
}

#[derive(Args)]
struct ConfigArgs {
    /// Run configuration JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    n: Option<usize>,
    #[arg(long, required_unless_present = "config")]
    k: Option<usize>,
    #[arg(long, required_unless_present = "config")]
    t: Option<usize>,
    /// Field size; overrides the configuration.
    #[arg(long)]
    field: Option<u64>,
    #[arg(long)]
    erase_prob: Option<f64>,
    #[arg(long)]
    keys: Option<usize>,
}

impl ConfigArgs {
    fn load(&self) -> HarnessResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => h::read_json::<RunConfig>(p)?,
            None => RunConfig::new(
                self.n.unwrap_or_default(),
                self.k.unwrap_or_default(),
                self.t.unwrap_or_default(),
                self.field.unwrap_or(65537),
            ),
        };
        if let Some(q) = self.field {
            cfg.q = q;
        }
        if let Some(p) = self.erase_prob {
            cfg.erase_prob = p;
        }
        if let Some(k) = self.keys {
            cfg.keys = k;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct PartitionArgs {
    /// Partition JSON (`m`, `secret_indices`, `key_indices`).
    #[arg(long, conflicts_with = "keys")]
    partition: Option<PathBuf>,
    /// Number of trailing key coordinates.
    #[arg(long, default_value_t = 0)]
    keys: usize,
}

impl PartitionArgs {
    fn load(&self, m: usize) -> HarnessResult<SecretPartition> {
        match &self.partition {
            Some(p) => Ok(h::read_json(p)?),
            None => Ok(SecretPartition::trailing_keys(m, self.keys)?),
        }
    }
}

fn emit<T: Serialize>(
    out: Option<&Path>,
    out_dir: Option<&Path>,
    name: &str,
    value: &T,
) -> HarnessResult<()> {
    emit_text(out, out_dir, name, &h::to_json(value))
}

fn emit_text(
    out: Option<&Path>,
    out_dir: Option<&Path>,
    name: &str,
    text: &str,
) -> HarnessResult<()> {
    match (out, out_dir) {
        (Some(p), _) => h::write_text(p, text),
        (None, Some(d)) => h::write_text(&d.join(name), text),
        (None, None) => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> HarnessResult<()> {
    let dir = cli.out_dir.as_deref();
    match cli.cmd {
        Cmd::Build { cfg, seed, out } => {
            let sys = h::cmd_build(&cfg.load()?, seed)?;
            emit(out.as_deref(), dir, "system.json", &sys)
        }
        Cmd::Erase {
            system,
            pattern,
            seed,
            out,
        } => {
            let sys: CachingSystem = h::read_json(&system)?;
            let spec: PatternSpec = pattern.parse()?;
            let pat = h::cmd_erase(&sys, &spec, seed)?;
            emit(out.as_deref(), dir, "pattern.json", &pat)
        }
        Cmd::Plan {
            system,
            pattern,
            out,
        } => {
            let sys: CachingSystem = h::read_json(&system)?;
            let pat: ErasurePattern = h::read_json(&pattern)?;
            let (report, plan) = h::cmd_plan(&sys, &pat)?;
            print!("{}", h::to_json(&report));
            match (out.as_deref(), dir) {
                (Some(p), _) => h::write_json(p, &plan),
                (None, Some(d)) => h::write_json(&d.join("plan.json"), &plan),
                (None, None) => Ok(()),
            }
        }
        Cmd::Repair {
            mode,
            system,
            pattern,
            plan,
            u,
            v,
            seed,
            out,
            plan_out,
        } => match mode {
            RepairMode::Functional => {
                let sys: CachingSystem = h::read_json(&system)?;
                let pat: ErasurePattern = h::read_json(&pattern.expect("required by clap"))?;
                let plan: RepairPlan = h::read_json(&plan.expect("required by clap"))?;
                let report = h::cmd_repair_functional(&sys, &pat, &plan, seed)?;
                if let Some(p) = &plan_out {
                    h::write_json(p, &report.plan)?;
                }
                emit(out.as_deref(), dir, "repair.json", &report)
            }
            RepairMode::ExactUv => {
                let sys: ExactSecureSystem = h::read_json(&system)?;
                let report = h::cmd_repair_exact(&sys, u.unwrap_or(0), v.unwrap_or(0))?;
                emit(out.as_deref(), dir, "repair.json", &report)
            }
        },
        Cmd::Audit {
            system,
            plan,
            part,
            mode,
            scope,
            precoder,
            out,
        } => {
            let sys: CachingSystem = h::read_json(&system)?;
            let plan: RepairPlan = h::read_json(&plan)?;
            let partition = part.load(sys.config().m())?;
            let mode: SecurityMode = mode.parse()?;
            let scope: Scope = scope.parse()?;
            let precoder: Option<Precoder> = precoder.map(|p| h::read_json(&p)).transpose()?;
            let audit = h::cmd_audit(&sys, &plan, &partition, scope, precoder.as_ref())?;
            emit(out.as_deref(), dir, "audit.json", &audit)?;
            if h::audit_passes(&audit, mode) {
                Ok(())
            } else {
                Err(HarnessError::AuditFailed(format!(
                    "leakage {} with weak flags {:?}",
                    audit.leakage_qary, audit.weak_flags
                )))
            }
        }
        Cmd::Precode {
            system,
            plan,
            part,
            mode,
            scope,
            seed,
            out,
            precoder_out,
        } => {
            let sys: CachingSystem = h::read_json(&system)?;
            let plan: RepairPlan = h::read_json(&plan)?;
            let partition = part.load(sys.config().m())?;
            let report =
                h::cmd_precode(&sys, &plan, &partition, mode.parse()?, scope.parse()?, seed)?;
            if let Some(p) = &precoder_out {
                h::write_json(p, &report.precoder)?;
            }
            emit(out.as_deref(), dir, "precoder.json", &report)
        }
        Cmd::Capacity {
            m,
            gamma,
            gamma_min,
            out,
        } => emit(
            out.as_deref(),
            dir,
            "capacity.json",
            &h::cmd_capacity(m, gamma, gamma_min),
        ),
        Cmd::Simulate {
            cfg,
            seed,
            episodes,
            out,
        } => {
            let sim = h::cmd_simulate(&cfg.load()?, seed, episodes)?;
            let csv = h::simulate_csv(&sim);
            let csv_path = out.or_else(|| dir.map(|d| d.join("simulate.csv")));
            match csv_path {
                Some(p) => {
                    h::write_text(&p, &csv)?;
                    h::write_json(&p.with_extension("json"), &sim)
                }
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
        Cmd::Exact {
            k,
            field,
            seed,
            out,
        } => {
            let sys = h::cmd_exact_build(k, field, seed)?;
            let failures = sys.mds_failures()?;
            if !failures.is_empty() {
                eprintln!(
                    "warning: {} of the node subsets of size {k} cannot rebuild the file over GF({}); first: {:?}",
                    failures.len(),
                    sys.field().p(),
                    failures[0]
                );
            }
            emit(out.as_deref(), dir, "exact.json", &sys)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprint!("{}", h::to_json(&e.record()));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
