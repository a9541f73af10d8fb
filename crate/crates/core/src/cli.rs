//! Command-line front end. [`run`] does all the work so it can be driven from
//! tests with in-memory output.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::constants::{beta_closed, beta_series, positivity_scan, AlphaTable, SeriesId};
use crate::correlator::{parse_taus, Cache, CorrelatorKey, Engine, EngineSet};
use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;
use crate::par::Execution;
use crate::verify::{run_suite, Bounds, Suite, SuiteConfig};
use crate::volumes::volume_polynomial;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_CACHE: i32 = 4;
pub const EXIT_ENGINE: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "kappa-psi", version, about = "Exact psi/kappa intersection numbers on moduli of curves")]
struct Cli {
    /// Memo file loaded before and written after the command.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    format: Format,
    /// Print cache statistics to stderr.
    #[arg(long, global = true)]
    stats: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Plain,
    Tsv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One intersection number, under one engine or all of them.
    Corr {
        #[arg(long)]
        g: u32,
        /// Kappa exponents as `index:exponent,...`, or `-` for none.
        #[arg(long, default_value = "-")]
        kappas: String,
        /// Comma-separated psi exponents; empty for no marked points.
        #[arg(long, num_args = 0..=1, default_value = "", default_missing_value = "")]
        taus: String,
        #[arg(long, default_value = "all")]
        engine: String,
    },
    /// Weil-Petersson volume polynomial.
    Volume {
        #[arg(long)]
        g: u32,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "ALPHA")]
        engine: String,
    },
    /// Table of the alpha constants.
    Alpha {
        #[arg(long)]
        max_weight: u32,
    },
    /// Table of the beta constants, computed two ways.
    Beta {
        #[arg(long)]
        max: u32,
    },
    /// Signs of the inverse of a candidate series.
    Positivity {
        #[arg(long, default_value = "recursion-kernel")]
        series: String,
        #[arg(long, default_value_t = 10)]
        max_weight: u32,
    },
    /// Exact verification batteries.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// virasoro, shift, iz, propositions or all.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value = "ALPHA")]
    engine: String,
    #[arg(long, default_value_t = 8)]
    t_max: u32,
    #[arg(long, default_value_t = 5)]
    s_max: u32,
    #[arg(long, default_value_t = 8)]
    degree_max: u32,
    #[arg(long, default_value_t = 3)]
    g_max: u32,
    #[arg(long, default_value_t = 3)]
    basis_degree: u32,
    #[arg(long, default_value_t = 6)]
    iz_g_max: u32,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Run on the current thread only.
    #[arg(long)]
    sequential: bool,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) => EXIT_USAGE,
        Error::Domain(_) | Error::Unstable(_) => EXIT_DOMAIN,
        Error::UnsupportedEngine { .. } => EXIT_ENGINE,
        Error::Consistency(_) => EXIT_VERIFY,
        Error::CacheCorrupt(_) | Error::Io(_) => EXIT_CACHE,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if code == EXIT_OK { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn parse_engine(s: &str) -> Result<Engine> {
    s.parse()
}

fn load_cache(path: Option<&Path>) -> Result<EngineSet> {
    let set = EngineSet::new();
    if let Some(p) = path.filter(|p| p.exists()) {
        let cache = Cache::load(p)?;
        set.seed_from(&cache)?;
    }
    Ok(set)
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    // reject bad engine and suite names before any computation
    let engine_arg = match &cli.command {
        Command::Corr { engine, .. } if engine.eq_ignore_ascii_case("all") => None,
        Command::Corr { engine, .. } | Command::Volume { engine, .. } => Some(parse_engine(engine)?),
        Command::Verify(v) => {
            v.suite.parse::<Suite>()?;
            Some(parse_engine(&v.engine)?)
        }
        _ => None,
    };
    let set = load_cache(cli.cache.as_deref())?;
    let code = match &cli.command {
        Command::Corr { g, kappas, taus, .. } => {
            let kappa: MultiIndex = kappas.parse()?;
            let key = CorrelatorKey::new(*g, kappa, parse_taus(taus)?);
            corr(&set, &key, engine_arg, cli.format, out)?
        }
        Command::Volume { g, n, .. } => {
            let p = volume_polynomial(*g, *n, set.get(engine_arg.unwrap()))?;
            let text = match cli.format {
                Format::Plain => p.render_plain(),
                Format::Tsv => p.render_tsv(),
                Format::Json => p.render_json(),
            };
            out.write_all(text.as_bytes())?;
            EXIT_OK
        }
        Command::Alpha { max_weight } => alpha(*max_weight, cli.format, out)?,
        Command::Beta { max } => beta(*max, cli.format, out)?,
        Command::Positivity { series, max_weight } => {
            positivity(series.parse()?, *max_weight, cli.format, out)?
        }
        Command::Verify(v) => verify(v, &set, engine_arg.unwrap(), cli.format, out)?,
    };
    if let Some(p) = &cli.cache {
        set.merged_cache()?.save(p)?;
    }
    if cli.stats {
        let (hits, misses) = set
            .iter()
            .fold((0, 0), |(h, m), e| (h + e.cache().hits(), m + e.cache().misses()));
        let entries = set.merged_cache()?.len();
        writeln!(err, "cache entries={entries} hits={hits} misses={misses}")?;
    }
    Ok(code)
}

fn corr(
    set: &EngineSet,
    key: &CorrelatorKey,
    engine: Option<Engine>,
    format: Format,
    out: &mut dyn Write,
) -> Result<i32> {
    key.check_stable()?;
    let values = match engine {
        Some(e) => vec![(e, set.get(e).evaluate(key)?)],
        None => set.evaluate_all(key)?,
    };
    let agree = values.windows(2).all(|w| w[0].1 == w[1].1);
    match format {
        Format::Plain => {
            for (_, v) in &values {
                writeln!(out, "{v}")?;
            }
        }
        Format::Tsv => {
            writeln!(out, "engine\tkey\tvalue")?;
            for (e, v) in &values {
                writeln!(out, "{e}\t{}\t{v}", key.record())?;
            }
        }
        Format::Json => {
            let vals: serde_json::Map<String, serde_json::Value> =
                values.iter().map(|(e, v)| (e.name().to_string(), json!(v.to_string()))).collect();
            writeln!(out, "{}", json!({"key": key.record(), "values": vals, "agree": agree}))?;
        }
    }
    Ok(if agree { EXIT_OK } else { EXIT_VERIFY })
}

fn alpha(max_weight: u32, format: Format, out: &mut dyn Write) -> Result<i32> {
    let table = AlphaTable::build(max_weight);
    let positive = table.iter().all(|(_, v)| v > &num_traits::Zero::zero());
    match format {
        Format::Plain => {
            for (l, v) in table.iter() {
                writeln!(out, "{l} {v}")?;
            }
            writeln!(
                out,
                "# {} entries, {}",
                table.len(),
                if positive { "all positive" } else { "not all positive" }
            )?;
        }
        Format::Tsv => {
            writeln!(out, "L\talpha")?;
            out.write_all(table.dump().as_bytes())?;
        }
        Format::Json => {
            let rows: Vec<_> =
                table.iter().map(|(l, v)| json!({"L": l.to_string(), "alpha": v.to_string()})).collect();
            writeln!(out, "{}", json!({"max_weight": max_weight, "all_positive": positive, "entries": rows}))?;
        }
    }
    Ok(EXIT_OK)
}

fn beta(max: u32, format: Format, out: &mut dyn Write) -> Result<i32> {
    let series = beta_series(max as usize);
    let mut agree = true;
    let mut rows = Vec::new();
    for (b, s) in series.iter().enumerate() {
        let c = beta_closed(b as u32);
        agree &= &c == s;
        rows.push((b, c, s.clone()));
    }
    match format {
        Format::Plain => {
            for (b, c, s) in &rows {
                let mark = if c == s { "" } else { " MISMATCH" };
                writeln!(out, "{b} {c}{mark}")?;
            }
        }
        Format::Tsv => {
            writeln!(out, "b\tclosed\tseries")?;
            for (b, c, s) in &rows {
                writeln!(out, "{b}\t{c}\t{s}")?;
            }
        }
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|(b, c, s)| json!({"b": b, "closed": c.to_string(), "series": s.to_string()}))
                .collect();
            writeln!(out, "{}", json!({"agree": agree, "entries": v}))?;
        }
    }
    Ok(if agree { EXIT_OK } else { EXIT_VERIFY })
}

fn positivity(series: SeriesId, max_weight: u32, format: Format, out: &mut dyn Write) -> Result<i32> {
    let report = positivity_scan(series, max_weight);
    match format {
        Format::Plain => {
            for (l, v, s) in &report.entries {
                writeln!(out, "{} {l} {v}", s.symbol())?;
            }
            let bad = report.non_positive().count();
            writeln!(out, "# {series}: {} entries, {bad} not positive", report.entries.len())?;
        }
        Format::Tsv => {
            writeln!(out, "L\tinverse\tsign")?;
            for (l, v, s) in &report.entries {
                writeln!(out, "{l}\t{v}\t{}", s.symbol())?;
            }
        }
        Format::Json => {
            let rows: Vec<_> = report
                .entries
                .iter()
                .map(|(l, v, s)| json!({"L": l.to_string(), "inverse": v.to_string(), "sign": s.symbol().to_string()}))
                .collect();
            writeln!(
                out,
                "{}",
                json!({"series": series.name(), "all_positive": report.all_positive(), "entries": rows})
            )?;
        }
    }
    Ok(EXIT_OK)
}

fn verify(v: &VerifyArgs, set: &EngineSet, engine: Engine, format: Format, out: &mut dyn Write) -> Result<i32> {
    let cfg = SuiteConfig {
        bounds: Bounds { max_t: v.t_max, max_s_weight: v.s_max, max_degree: v.degree_max },
        g_max: v.g_max,
        basis_degree: v.basis_degree,
        iz_g_max: v.iz_g_max.max(2),
        trials: v.trials,
        seed: v.seed,
        exec: if v.sequential { Execution::Sequential } else { Execution::Parallel },
    };
    let reports = run_suite(v.suite.parse()?, &cfg, set.get(engine))?;
    let pass = reports.iter().all(|r| r.passed());
    match format {
        Format::Plain => {
            for r in &reports {
                writeln!(out, "{r}")?;
            }
        }
        Format::Tsv => {
            writeln!(out, "name\tparams\tstatus\tchecked\tskipped_bounds\tskipped_genus")?;
            for r in &reports {
                let status = if r.passed() { "PASS" } else { "FAIL" };
                writeln!(
                    out,
                    "{}\t{}\t{status}\t{}\t{}\t{}",
                    r.name, r.params, r.checked, r.skipped_bounds, r.skipped_genus
                )?;
            }
        }
        Format::Json => {
            let rows: Vec<_> = reports
                .iter()
                .map(|r| {
                    json!({
                        "name": r.name, "params": r.params, "pass": r.passed(), "checked": r.checked,
                        "skipped_bounds": r.skipped_bounds, "skipped_genus": r.skipped_genus,
                        "failures": r.failures,
                    })
                })
                .collect();
            writeln!(out, "{}", json!({"pass": pass, "checks": rows}))?;
        }
    }
    Ok(if pass { EXIT_OK } else { EXIT_VERIFY })
}
