//! `redspec`: corpus synthesis, spectrum analysis and theorem verification.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use redspec_core::classes::FunctionClass;
use redspec_core::config::Config;
use redspec_core::corpus::{self, default_params, SynthParams};
use redspec_core::kernel::Family;
use redspec_core::report::to_canonical_string;
use redspec_core::spectra::{
    beurling_spectrum, carleman_spectrum, laplace_spectrum, reduced_spectrum, weak_laplace_spectrum, ReducedOptions, SpectrumEstimate,
};
use redspec_core::theorems::{run_evolution_checks, run_signal_checks, tally, CheckResult, CheckStatus};
use redspec_core::SampledSignal;

#[derive(Parser)]
#[command(name = "redspec", version, about = "Reduced, Carleman, Laplace and weak-Laplace spectra of sampled signals")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Reduced,
    Beurling,
    Carleman,
    Laplace,
    WeakLaplace,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    D,
    S,
    L1,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a corpus signal as CSV plus a JSON metadata sidecar.
    Synth {
        /// Corpus signal name (zero, const, exp_i1, chirp, sinc, ...)
        name: String,
        /// Record length; defaults depend on the signal
        #[arg(long)]
        tmax: Option<f64>,
        /// Sample spacing
        #[arg(long)]
        dt: Option<f64>,
        /// CSV path; the sidecar goes next to it with extension .json
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate one spectrum of a signal file.
    Analyze {
        /// Signal CSV with header t,re0,im0[,re1,im1,...]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Function class for --kind reduced (c0, aap, ap, ergodic, ...)
        #[arg(long)]
        class: Option<String>,
        /// Kernel family for --kind reduced; D when the signal has no growth bound
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        /// min:max:step
        #[arg(long)]
        grid: Option<String>,
        /// Flat JSON config; flags override it
        #[arg(long)]
        config: Option<PathBuf>,
        /// Report JSON; plot data goes to the same stem with .plot.csv
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the theorem checks on the built-in corpus or a directory of signals.
    Verify {
        /// Directory of signal CSV files (with optional .json sidecars)
        corpus_dir: Option<PathBuf>,
        /// Use the built-in corpus
        #[arg(long, conflicts_with = "corpus_dir")]
        builtin: bool,
        /// Run one check: inclusion-chain, ergodic, tauberian, regular-ft, evolution
        #[arg(long)]
        only: Option<String>,
        /// min:max:step
        #[arg(long)]
        grid: Option<String>,
        /// Flat JSON config; flags override it
        #[arg(long)]
        config: Option<PathBuf>,
        /// Results JSON; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Input problems exit with 2, failed checks with 1.
enum Failure {
    Input(anyhow::Error),
    Checks(usize),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.into())
    }
}

fn load_config(path: Option<&Path>, grid: Option<&str>) -> anyhow::Result<Config> {
    let mut c = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            Config::from_json(&text).with_context(|| format!("config {}", p.display()))?
        }
        None => Config::default(),
    };
    if let Some(g) = grid {
        c.grid = g.to_string();
    }
    c.validate()?;
    Ok(c)
}

fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn read_signal(path: &Path) -> anyhow::Result<(SampledSignal, Option<serde_json::Value>)> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let s = SampledSignal::read_csv(file).with_context(|| format!("reading {}", path.display()))?;
    let side = sidecar_path(path);
    let meta = if side.exists() {
        let text = fs::read_to_string(&side)?;
        Some(serde_json::from_str(&text).with_context(|| format!("sidecar {}", side.display()))?)
    } else {
        None
    };
    Ok((s, meta))
}

fn write_out(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn synth(name: &str, tmax: Option<f64>, dt: Option<f64>, out: Option<PathBuf>) -> Result<(), Failure> {
    if !corpus::NAMES.contains(&name) {
        return Err(Failure::Input(anyhow!("unknown corpus signal {name:?}; known: {}", corpus::NAMES.join(", "))));
    }
    let d = default_params(name);
    let cs = corpus::synth(name, SynthParams { tmax: tmax.unwrap_or(d.tmax), dt: dt.unwrap_or(d.dt) })?;
    let path = out.unwrap_or_else(|| PathBuf::from(format!("{name}.csv")));
    let mut buf = Vec::new();
    cs.signal.write_csv(&mut buf)?;
    fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
    fs::write(sidecar_path(&path), to_canonical_string(&cs.metadata())?)?;
    eprintln!("wrote {} ({} samples) and {}", path.display(), cs.signal.len(), sidecar_path(&path).display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn analyze(
    input: &Path,
    kind: Kind,
    class: Option<&str>,
    family: Option<FamilyArg>,
    grid: Option<&str>,
    config: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let cfg = load_config(config, grid)?;
    let g = cfg.frequency_grid()?;
    let (signal, meta) = read_signal(input)?;
    let name = input.file_stem().and_then(|s| s.to_str()).unwrap_or("signal");
    let cs = corpus::from_record(name, signal, meta.as_ref())?;
    let f = &cs.signal;
    let to = cfg.transform_options();
    let half = || cs.half_line();
    let est: SpectrumEstimate = match kind {
        Kind::Reduced => {
            let c = class.ok_or_else(|| anyhow!("--class is required for --kind reduced"))?;
            let c = FunctionClass::parse(c).ok_or_else(|| anyhow!("unknown class {c:?}"))?;
            let fam = match family {
                Some(FamilyArg::D) => Family::D,
                Some(FamilyArg::S) => Family::S,
                Some(FamilyArg::L1) => Family::L1,
                None if f.growth_exponent().is_none() => Family::D,
                None => Family::S,
            };
            let mut o = ReducedOptions::new(c, fam);
            o.delta_seq = cfg.delta_seq.clone();
            o.classes = cfg.class_config();
            o.registered = cs.registered.clone();
            redspec_core::spectra::ReducedEngine::new(f, o.clone())?;
            reduced_spectrum(f, &g, o)
        }
        Kind::Beurling => beurling_spectrum(f, &g),
        Kind::Carleman => carleman_spectrum(f, &g, &to)?,
        Kind::Laplace => laplace_spectrum(&half()?, &g, &to)?,
        Kind::WeakLaplace => weak_laplace_spectrum(&half()?, &g, &to)?,
    };
    write_out(out, &to_canonical_string(&est.to_json())?)?;
    if let Some(p) = out {
        let plot = p.with_extension("plot.csv");
        fs::write(&plot, est.plot_csv())?;
    }
    eprintln!(
        "{}: {} regular, {} singular, {} undecided",
        est.kind_name(),
        est.count(redspec_core::spectra::Status::Regular),
        est.count(redspec_core::spectra::Status::Singular),
        est.count(redspec_core::spectra::Status::Undecided)
    );
    Ok(())
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned()).unwrap_or_else(|| "panic".into())
}

fn load_dir(dir: &Path) -> anyhow::Result<Vec<corpus::CorpusSignal>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading corpus directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv") && !p.to_string_lossy().ends_with(".plot.csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .csv signals in {}", dir.display());
    }
    files
        .iter()
        .map(|p| {
            let (s, meta) = read_signal(p)?;
            let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or("signal");
            Ok(corpus::from_record(name, s, meta.as_ref())?)
        })
        .collect()
}

fn verify(
    corpus_dir: Option<&Path>,
    builtin: bool,
    only: Option<&str>,
    grid: Option<&str>,
    config: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let cfg = load_config(config, grid)?;
    let suite = cfg.suite_config()?;
    if let Some(o) = only {
        if !redspec_core::theorems::CHECK_IDS.contains(&o) {
            return Err(Failure::Input(anyhow!("unknown check {o:?}; known: {}", redspec_core::theorems::CHECK_IDS.join(", "))));
        }
    }
    let signals = match (corpus_dir, builtin) {
        (Some(d), false) => load_dir(d)?,
        (None, true) => corpus::builtin_corpus()?,
        _ => return Err(Failure::Input(anyhow!("give a corpus directory or --builtin"))),
    };
    // engine panics become Fail results carrying the message
    std::panic::set_hook(Box::new(|_| {}));
    let mut results: Vec<CheckResult> = Vec::new();
    for cs in &signals {
        match catch_unwind(AssertUnwindSafe(|| run_signal_checks(cs, &suite, only))) {
            Ok(r) => results.extend(r?),
            Err(p) => results.push(CheckResult::failure(
                only.unwrap_or("suite"),
                &cs.name,
                serde_json::json!({ "panic": panic_message(p), "params": cs.params }),
            )),
        }
    }
    if only.map_or(true, |o| o == "evolution") {
        match catch_unwind(AssertUnwindSafe(|| run_evolution_checks(&suite))) {
            Ok(r) => results.extend(r?),
            Err(p) => results.push(CheckResult::failure("evolution", "evolution", serde_json::json!({ "panic": panic_message(p) }))),
        }
    }
    write_out(out, &to_canonical_string(&results)?)?;
    let (pass, fail, vac) = tally(&results);
    eprintln!("{pass} pass, {fail} fail, {vac} vacuous");
    for r in results.iter().filter(|r| r.status == CheckStatus::Fail) {
        eprintln!("FAIL {} on {}", r.theorem, r.signal);
    }
    if fail > 0 {
        return Err(Failure::Checks(fail));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Synth { name, tmax, dt, out } => synth(&name, tmax, dt, out),
        Cmd::Analyze { input, kind, class, family, grid, config, out } => {
            analyze(&input, kind, class.as_deref(), family, grid.as_deref(), config.as_deref(), out.as_deref())
        }
        Cmd::Verify { corpus_dir, builtin, only, grid, config, out } => {
            verify(corpus_dir.as_deref(), builtin, only.as_deref(), grid.as_deref(), config.as_deref(), out.as_deref())
        }
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks(n)) => {
            eprintln!("{n} check(s) failed");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
