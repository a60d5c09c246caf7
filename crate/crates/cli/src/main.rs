use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eggunital::config::{self, fv_preset};
use eggunital::egg::{build_egg, check_psi_family, is_good_at, verify_egg, verify_flock, verify_tangents, EggId, Flock, GoodnessMode, VerifyMode};
use eggunital::plane::{verify_plane_axioms, CoordinatePlane};
use eggunital::polarity::{non_polar_certificate, verify_polarity_family};
use eggunital::sampling::Shard;
use eggunital::spread::{
    dickson_correspondence_check, nuclei, spread_from_spread_set, spread_set_from_tau, verify_semifield, verify_spread,
    verify_spread_set, CheckMode, DicksonSemifield,
};
use eggunital::unital::{
    build_cone, check_ie_equals_iv, cone_matches_unital, cone_sample_check, full_blocking_check, pw_closed_form_roots,
    solvability_criterion, verify_unital, BlockingInstance, BlockingMode, Coverage, FVConfig, UnitalMode, UnitalModel,
};
use eggunital::{Certificate, Error, GoodEggSpec};
use serde_json::json;

#[derive(Parser)]
#[command(name = "eggunital", version, about = "Verification campaigns for eggs, semifield planes and unitals")]
struct Cli {
    /// Campaign seed; every sampled stage derives its own stream from it.
    #[arg(long, global = true, env = "EGGUNITAL_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "EGGUNITAL_THREADS")]
    threads: Option<usize>,
    /// Directory receiving `certificates.jsonl`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Shard `I/N` of a sweep.
    #[arg(long, global = true, value_parser = parse_shard)]
    shard: Option<Shard>,
    #[command(subcommand)]
    command: Command,
}

fn parse_shard(s: &str) -> Result<Shard, String> {
    let (i, n) = s.split_once('/').ok_or("expected I/N")?;
    let i: u32 = i.parse().map_err(|e| format!("{e}"))?;
    let n: u32 = n.parse().map_err(|e| format!("{e}"))?;
    Shard::new(i, n).ok_or_else(|| "need N > 0 and I < N".into())
}

#[derive(Subcommand)]
enum Command {
    #[command(subcommand)]
    Egg(EggCmd),
    #[command(subcommand)]
    Flock(FlockCmd),
    #[command(subcommand)]
    Semifield(SemifieldCmd),
    #[command(subcommand)]
    Spread(SpreadCmd),
    #[command(subcommand)]
    Plane(PlaneCmd),
    #[command(subcommand)]
    Blocking(BlockingCmd),
    #[command(subcommand)]
    Unital(UnitalCmd),
    #[command(subcommand)]
    Polar(PolarCmd),
    /// The whole chain from the egg to the non-polar certificate.
    Pipeline(PipelineArgs),
}

#[derive(Args, Clone)]
struct EggSource {
    /// Egg spec file (.toml or .json).
    #[arg(long, conflicts_with = "preset")]
    spec: Option<PathBuf>,
    /// pw, elliptic-q3, bm-q3 or kk-q3-m2.
    #[arg(long, default_value = "pw")]
    preset: String,
}

impl EggSource {
    fn load(&self) -> eggunital::Result<GoodEggSpec> {
        match &self.spec {
            Some(p) => config::load_egg(p),
            None => config::egg_preset(&self.preset),
        }
    }
}

#[derive(Args, Clone)]
struct SemifieldSource {
    /// Semifield spec file (.toml or .json).
    #[arg(long, conflicts_with = "preset")]
    spec: Option<PathBuf>,
    /// pw, d81 or d9.
    #[arg(long, default_value = "pw")]
    preset: String,
}

impl SemifieldSource {
    fn load(&self) -> eggunital::Result<DicksonSemifield> {
        match &self.spec {
            Some(p) => config::load_semifield(p),
            None => config::semifield_preset(&self.preset),
        }
    }
}

#[derive(Args, Clone)]
struct PlaneSource {
    /// pw or d9.
    #[arg(long, default_value = "pw")]
    plane: String,
    /// F(V) spec file `{ semifield, kappa }`, used with `--egg-spec`.
    #[arg(long, requires = "egg_spec")]
    fv_spec: Option<PathBuf>,
    #[arg(long, requires = "fv_spec")]
    egg_spec: Option<PathBuf>,
}

impl PlaneSource {
    fn load(&self) -> eggunital::Result<(GoodEggSpec, FVConfig)> {
        match (&self.fv_spec, &self.egg_spec) {
            (Some(fv), Some(egg)) => Ok((config::load_egg(egg)?, config::load::<config::FvRecord>(fv)?.build()?)),
            _ => fv_preset(&self.plane),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exhaustive,
    Reduced,
    Sampled,
}

#[derive(Subcommand)]
enum EggCmd {
    /// Constructs the elements and tangent spaces.
    Build(EggSource),
    /// Egg axioms and tangent spaces.
    Verify {
        #[command(flatten)]
        src: EggSource,
        #[arg(long, value_enum, default_value = "reduced")]
        mode: Mode,
        #[arg(long, default_value_t = 100_000)]
        triples: u64,
        #[arg(long, default_value_t = 200)]
        psi_trials: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
    },
    /// Goodness at an element: `inf` or `a,b` as field indices.
    Goodness {
        #[command(flatten)]
        src: EggSource,
        #[arg(long, default_value = "inf")]
        at: String,
        #[arg(long)]
        samples: Option<u64>,
    },
}

#[derive(Subcommand)]
enum FlockCmd {
    Verify(EggSource),
}

#[derive(Subcommand)]
enum SemifieldCmd {
    Verify {
        #[command(flatten)]
        src: SemifieldSource,
        /// Sampled triples; exhaustive when omitted.
        #[arg(long)]
        samples: Option<u64>,
    },
    Nuclei(SemifieldSource),
}

#[derive(Subcommand)]
enum SpreadCmd {
    /// Spread set of `phi tau` and the spread it defines.
    Verify {
        #[command(flatten)]
        src: SemifieldSource,
        #[arg(long, default_value_t = 10_000)]
        random_sums: u64,
        /// Sampled points for the cover check; exhaustive when omitted.
        #[arg(long)]
        samples: Option<u64>,
    },
    /// `phi tau_(a,b)` against right multiplication on basis vectors.
    Correspondence(SemifieldSource),
}

#[derive(Subcommand)]
enum PlaneCmd {
    Axioms(SemifieldSource),
}

#[derive(Subcommand)]
enum BlockingCmd {
    Check {
        #[command(flatten)]
        src: PlaneSource,
        #[arg(long, value_enum, default_value = "reduced")]
        mode: Mode,
        #[arg(long, default_value_t = 200)]
        psi_trials: u64,
        /// Sampled minimality checks; exhaustive when omitted.
        #[arg(long)]
        minimality_samples: Option<u64>,
    },
    Solvability(EggSource),
}

#[derive(Subcommand)]
enum UnitalCmd {
    /// Counts the unital; on small planes also builds the cone.
    Build {
        #[command(flatten)]
        src: PlaneSource,
        /// Writes every point index, one per line.
        #[arg(long)]
        materialize: Option<PathBuf>,
    },
    Verify {
        #[command(flatten)]
        src: PlaneSource,
        #[arg(long, value_enum, default_value = "sampled")]
        mode: Mode,
        #[arg(long, default_value_t = 10_000)]
        lines: u64,
    },
}

#[derive(Subcommand)]
enum PolarCmd {
    Check {
        #[command(flatten)]
        src: PlaneSource,
        /// Accepted for clarity; every nonzero parameter is always checked.
        #[arg(long)]
        all_params: bool,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
}

#[derive(Args)]
struct PipelineArgs {
    /// pw or d9.
    #[arg(default_value = "pw")]
    target: String,
    #[arg(long, default_value_t = 10_000)]
    lines: u64,
    #[arg(long, default_value_t = 100_000)]
    triples: u64,
    #[arg(long, default_value_t = 200)]
    psi_trials: u64,
}

struct Sink {
    out: Option<BufWriter<File>>,
    failed: bool,
}

impl Sink {
    fn emit(&mut self, cert: &Certificate) -> bool {
        let line = cert.to_json_line();
        let _ = writeln!(std::io::stdout().lock(), "{line}");
        if let Some(f) = &mut self.out {
            let _ = writeln!(f, "{line}");
        }
        self.failed |= !cert.passed();
        cert.passed()
    }
}

fn parse_id(spec: &GoodEggSpec, at: &str) -> eggunital::Result<EggId> {
    if at == "inf" {
        return Ok(EggId::Infinity);
    }
    let bad = || Error::InvalidInput(format!("--at expects inf or a,b, got {at:?}"));
    let (a, b) = at.split_once(',').ok_or_else(bad)?;
    let f = spec.field();
    let a = f.element(a.trim().parse().map_err(|_| bad())?)?;
    let b = f.element(b.trim().parse().map_err(|_| bad())?)?;
    Ok(EggId::Affine(a, b))
}

fn verify_mode(mode: Mode, triples: u64, psi_trials: u64, samples: u64) -> VerifyMode {
    match mode {
        Mode::Exhaustive => VerifyMode::Exhaustive,
        Mode::Reduced => VerifyMode::SymmetryReduced { triples, psi_trials },
        Mode::Sampled => VerifyMode::Sampled { samples },
    }
}

fn check_mode(samples: Option<u64>) -> CheckMode {
    samples.map_or(CheckMode::Exhaustive, |samples| CheckMode::Sampled { samples })
}

fn run(cli: Cli, sink: &mut Sink) -> eggunital::Result<()> {
    let seed = cli.seed;
    let shard = cli.shard.unwrap_or(Shard::ALL);
    match cli.command {
        Command::Egg(EggCmd::Build(src)) => {
            let started = Instant::now();
            let spec = src.load()?;
            let egg = build_egg(&spec)?;
            let mut cert = Certificate::new("egg_build", "construction").with_spec(&spec.record());
            cert.add_checks(egg.len() as u64);
            cert.detail("elements", egg.len());
            cert.detail("ambient_dim", egg.ambient_dim());
            sink.emit(&cert.finish(started));
        }
        Command::Egg(EggCmd::Verify { src, mode, triples, psi_trials, samples }) => {
            let egg = build_egg(&src.load()?)?;
            let mode = verify_mode(mode, triples, psi_trials, samples);
            sink.emit(&verify_egg(&egg, mode, seed, shard)?);
            sink.emit(&verify_tangents(&egg, mode, seed, shard)?);
        }
        Command::Egg(EggCmd::Goodness { src, at, samples }) => {
            let spec = src.load()?;
            let egg = build_egg(&spec)?;
            let mode = samples.map_or(GoodnessMode::Exhaustive, |samples| GoodnessMode::Sampled { samples });
            sink.emit(&is_good_at(&egg, parse_id(&spec, &at)?, mode, seed, shard)?);
        }
        Command::Flock(FlockCmd::Verify(src)) => {
            sink.emit(&verify_flock(&Flock::from_spec(&src.load()?)));
        }
        Command::Semifield(SemifieldCmd::Verify { src, samples }) => {
            sink.emit(&verify_semifield(&src.load()?, check_mode(samples), seed, shard));
        }
        Command::Semifield(SemifieldCmd::Nuclei(src)) => {
            let started = Instant::now();
            let d = src.load()?;
            let n = nuclei(&d);
            let mut cert = Certificate::new("nuclei", "exhaustive").with_spec(&d.record());
            cert.add_checks(d.order().pow(3));
            cert.detail("sizes", json!({ "left": n.left.len(), "middle": n.middle.len(), "right": n.right.len(), "center": n.center.len() }));
            cert.detail("nuclei", &n);
            sink.emit(&cert.finish(started));
        }
        Command::Spread(SpreadCmd::Verify { src, random_sums, samples }) => {
            let d = src.load()?;
            let set = spread_set_from_tau(&d);
            if sink.emit(&verify_spread_set(&set, false, random_sums, seed)) {
                sink.emit(&verify_spread(&spread_from_spread_set(&set), check_mode(samples), seed));
            }
        }
        Command::Spread(SpreadCmd::Correspondence(src)) => {
            sink.emit(&dickson_correspondence_check(&src.load()?, shard));
        }
        Command::Plane(PlaneCmd::Axioms(src)) => {
            sink.emit(&verify_plane_axioms(&CoordinatePlane::new(src.load()?))?);
        }
        Command::Blocking(BlockingCmd::Check { src, mode, psi_trials, minimality_samples }) => {
            let (spec, cfg) = src.load()?;
            let inst = BlockingInstance::from_egg(&build_egg(&spec)?, &cfg)?;
            let mode = match mode {
                Mode::Exhaustive => BlockingMode::Exhaustive,
                _ => BlockingMode::Reduced { psi_trials },
            };
            let coverage = minimality_samples.map_or(Coverage::Exhaustive, |samples| Coverage::Sampled { samples });
            sink.emit(&full_blocking_check(&inst, mode, coverage, seed));
        }
        Command::Blocking(BlockingCmd::Solvability(src)) => {
            let spec = src.load()?;
            sink.emit(&solvability_criterion(&spec));
            let pw = GoodEggSpec::penttila_williams();
            if spec.field() == pw.field() && spec.b() == pw.b() && spec.c() == pw.c() {
                sink.emit(&pw_closed_form_roots(&spec)?);
            }
        }
        Command::Unital(UnitalCmd::Build { src, materialize }) => {
            let (spec, cfg) = src.load()?;
            let u = UnitalModel::from_config(spec.clone(), &cfg)?;
            sink.emit(&count_unital(&u));
            let egg = build_egg(&spec)?;
            let inst = BlockingInstance::from_egg(&egg, &cfg)?;
            let b: Vec<Vec<u32>> = inst.points().iter().map(|(_, v)| v.clone()).collect();
            match build_cone(&cfg, &b) {
                Ok(cone) => {
                    sink.emit(&cone_matches_unital(&cfg, &cone, &u)?);
                }
                Err(_) => {
                    sink.emit(&cone_sample_check(&cfg, &inst, &u, 100_000, seed));
                }
            }
            if let Some(path) = materialize {
                let mut w = BufWriter::new(File::create(path)?);
                for idx in u.materialize() {
                    writeln!(w, "{idx}")?;
                }
            }
        }
        Command::Unital(UnitalCmd::Verify { src, mode, lines }) => {
            let (spec, cfg) = src.load()?;
            let u = UnitalModel::from_config(spec, &cfg)?;
            let mode = match mode {
                Mode::Exhaustive => UnitalMode::Exhaustive,
                _ => UnitalMode::Sampled { lines },
            };
            sink.emit(&verify_unital(&u, mode, seed, shard));
        }
        Command::Polar(PolarCmd::Check { src, all_params: _, trials }) => {
            let (spec, cfg) = src.load()?;
            let u = UnitalModel::from_config(spec, &cfg)?;
            sink.emit(&verify_polarity_family(cfg.semifield(), trials, seed, shard));
            sink.emit(&non_polar_certificate(&u));
        }
        Command::Pipeline(args) => pipeline(&args, seed, sink)?,
    }
    Ok(())
}

/// Streams the enumerator and checks each point against the predicate.
fn count_unital(u: &UnitalModel) -> Certificate {
    let started = Instant::now();
    let mut cert = Certificate::new("unital_count", "exhaustive").with_spec(&u.spec().record());
    let mut n = 0u64;
    let mut bad = 0u64;
    for p in u.points() {
        n += 1;
        if !u.contains(&p) {
            bad += 1;
            if bad <= 8 {
                cert.fail(json!({ "point": p }));
            }
        }
    }
    cert.add_checks(n + 1);
    if n != u.len() {
        cert.fail(json!({ "check": "size", "enumerated": n, "expected": u.len() }));
    }
    cert.detail("points", n);
    cert.finish(started)
}

fn pipeline(args: &PipelineArgs, seed: u64, sink: &mut Sink) -> eggunital::Result<()> {
    let (spec, cfg) = fv_preset(&args.target)?;
    let small = spec.field().order() <= 9;
    let egg = build_egg(&spec)?;
    let egg_mode = if small {
        VerifyMode::Exhaustive
    } else {
        VerifyMode::SymmetryReduced { triples: args.triples, psi_trials: args.psi_trials }
    };
    macro_rules! stage {
        ($cert:expr) => {
            if !sink.emit(&$cert) {
                eprintln!("pipeline stopped: upstream certificate failed");
                return Ok(());
            }
        };
    }
    stage!(verify_egg(&egg, egg_mode, seed, Shard::ALL)?);
    stage!(check_psi_family(&spec, args.psi_trials, seed));
    stage!(verify_spread_set(&spread_set_from_tau(cfg.semifield()), small, 10_000, seed));
    stage!(check_ie_equals_iv(&egg, &cfg)?);
    stage!(solvability_criterion(&spec));
    let inst = BlockingInstance::from_egg(&egg, &cfg)?;
    let u = UnitalModel::from_config(spec.clone(), &cfg)?;
    if small {
        let b: Vec<Vec<u32>> = inst.points().iter().map(|(_, v)| v.clone()).collect();
        stage!(cone_matches_unital(&cfg, &build_cone(&cfg, &b)?, &u)?);
        stage!(verify_unital(&u, UnitalMode::Exhaustive, seed, Shard::ALL));
    } else {
        stage!(cone_sample_check(&cfg, &inst, &u, 100_000, seed));
        stage!(verify_unital(&u, UnitalMode::Sampled { lines: args.lines }, seed, Shard::ALL));
    }
    stage!(non_polar_certificate(&u));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let out = match &cli.out {
        Some(dir) => match fs::create_dir_all(dir).and_then(|_| {
            File::options().create(true).append(true).open(dir.join("certificates.jsonl"))
        }) {
            Ok(f) => Some(BufWriter::new(f)),
            Err(e) => {
                eprintln!("error: {}: {e}", dir.display());
                return ExitCode::from(2);
            }
        },
        None => None,
    };
    let mut sink = Sink { out, failed: false };
    let result = run(cli, &mut sink);
    if let Some(f) = &mut sink.out {
        let _ = f.flush();
    }
    match result {
        Err(e @ (Error::Config(_) | Error::InvalidInput(_) | Error::Io(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Ok(()) if sink.failed => ExitCode::from(1),
        Ok(()) => ExitCode::SUCCESS,
    }
}
