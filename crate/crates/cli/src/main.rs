use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use fintype::classes::{ClassError, ClassGraph};
use fintype::config::{render, ConfigError, SystemConfig};
use fintype::constructions::{
    block_components, multiinterval, multipoint, select_probabilities, verify_requirements,
    ConstructionError, ConstructionKind, RequirementViolation, Targets,
};
use fintype::dimensions::{attainable_set, DimError, DimParams, DimensionSet};
use fintype::ifs::{ValidationError, Violation};
use fintype::net::{closure, NetError, Omega, DEFAULT_CAP};
use fintype::oracle::{
    default_depths, default_lq_depths, empirical_local_dim, empirical_lq, OracleError,
};
use fintype::rational::{fmt_rat, parse_rat, ParseRatError, Rat};
use fintype::spectra::{
    assemble_f, crossings, fmt_g, tau_mu, SpectraError, SpectrumModel, DEFAULT_QMAX, DEFAULT_QMIN,
    DEFAULT_QSTEP,
};

#[derive(Parser)]
#[command(name = "fintype", version, about = "Local dimensions and L^q spectra of finite-type self-similar measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Analysis {
    /// System description (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Block length for outer brackets
    #[arg(long = "L")]
    l: Option<usize>,
    /// Maximal cycle length for inner brackets
    #[arg(long = "Lc")]
    lc: Option<usize>,
    /// Maximal number of characteristic vectors
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Write omega.txt, classes.txt and dimset.txt
    Analyze {
        #[command(flatten)]
        a: Analysis,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Write tau.csv, f.csv and crossings.txt
    Spectra {
        #[command(flatten)]
        a: Analysis,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_QMIN, allow_hyphen_values = true)]
        qmin: f64,
        #[arg(long, default_value_t = DEFAULT_QMAX, allow_hyphen_values = true)]
        qmax: f64,
        #[arg(long, default_value_t = DEFAULT_QSTEP)]
        qstep: f64,
    },
    /// Emit the config of a multipoint or multi-interval construction
    Construct {
        kind: Kind,
        #[arg(long = "R")]
        r: u64,
        /// Comma-separated block probabilities; chosen automatically when absent
        #[arg(long = "block-probs", value_delimiter = ',')]
        block_probs: Option<Vec<String>>,
        #[arg(long = "p-star")]
        p_star: Option<String>,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        /// Output file; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the characteristic vectors and their children
    DumpOmega {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Print the loop classes
    DumpClasses {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Print the attainable local dimensions
    Dimset {
        #[command(flatten)]
        a: Analysis,
    },
    /// Brute-force local dimension and L^q estimates
    Oracle {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated points
        #[arg(long, value_delimiter = ',', default_value = "0,1/2,1")]
        x: Vec<String>,
        /// Comma-separated exponents
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,1")]
        q: Vec<f64>,
        /// Window depth range for local dimensions, as lo,hi
        #[arg(long, value_delimiter = ',')]
        depths: Option<Vec<usize>>,
        /// Net-interval generations for tau, as lo,hi
        #[arg(long = "lq-depths", value_delimiter = ',')]
        lq_depths: Option<Vec<usize>>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Multipoint,
    Multiinterval,
}

struct Pipeline {
    cfg: SystemConfig,
    omega: Omega,
    graph: ClassGraph,
    dims: DimensionSet,
}

fn load(path: &Path) -> Result<SystemConfig> {
    Ok(SystemConfig::from_path(path)?)
}

fn structure(cfg: &SystemConfig, cap: usize) -> Result<(Omega, ClassGraph)> {
    let omega = closure(&cfg.ifs, cap)?;
    let graph = ClassGraph::build(&omega)?;
    Ok((omega, graph))
}

fn run_pipeline(a: &Analysis) -> Result<Pipeline> {
    let cfg = load(&a.config)?;
    let (omega, graph) = structure(&cfg, a.cap)?;
    let mut params = DimParams::for_ifs(&cfg.ifs);
    if let Some(l) = a.l {
        params.l = l;
    }
    if let Some(lc) = a.lc {
        params.lc = lc;
    }
    if params.l == 0 || params.lc == 0 {
        return Err(anyhow!("InvalidDepths: --L and --Lc must be positive"));
    }
    let dims = attainable_set(&omega, &graph, &params)?;
    Ok(Pipeline {
        cfg,
        omega,
        graph,
        dims,
    })
}

fn dimset_text(p: &Pipeline) -> String {
    let mut s = p.dims.dump();
    if let Some(spec) = &p.cfg.construction {
        for b in block_components(&p.omega, &p.graph, spec, &p.dims) {
            s.push_str(&format!("{b}\n"));
        }
    }
    s
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn parse_all(values: &[String]) -> Result<Vec<Rat>> {
    values
        .iter()
        .map(|v| Ok(parse_rat(v.trim())?))
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze { a, out } => {
            let p = run_pipeline(&a)?;
            write(&out, "omega.txt", &p.omega.dump())?;
            write(&out, "classes.txt", &p.graph.dump())?;
            write(&out, "dimset.txt", &dimset_text(&p))?;
            println!(
                "{} vectors, {} components, {} loop classes",
                p.omega.len(),
                p.graph.components().len(),
                p.dims.components.len()
            );
            if let Some(spec) = &p.cfg.construction {
                let report = verify_requirements(&p.cfg.ifs, spec, a.cap)?;
                print!("{report}");
                report.into_result()?;
            }
        }
        Command::Spectra {
            a,
            out,
            qmin,
            qmax,
            qstep,
        } => {
            let p = run_pipeline(&a)?;
            let model = match &p.cfg.construction {
                Some(spec) => SpectrumModel::from_construction(spec, &p.dims),
                None => SpectrumModel::from_dimension_set(&p.dims, p.cfg.ifs.ratio())?,
            };
            let curve = tau_mu(&model, qmin, qmax, qstep)?;
            let f = assemble_f(&model, &curve.q);
            let cross: String = crossings(&curve).iter().map(|c| format!("{c}\n")).collect();
            write(&out, "tau.csv", &curve.to_csv())?;
            write(&out, "f.csv", &f.to_csv())?;
            write(&out, "crossings.txt", &cross)?;
            print!("{cross}");
            println!("concave={}", f.concave);
        }
        Command::Construct {
            kind,
            r,
            block_probs,
            p_star,
            cap,
            out,
        } => {
            let kind = match kind {
                Kind::Multipoint => ConstructionKind::Multipoint,
                Kind::Multiinterval => ConstructionKind::Multiinterval,
            };
            let p_star = p_star.map(|s| parse_rat(&s)).transpose()?;
            let (ifs, spec) = match block_probs {
                Some(bp) => {
                    let bp = parse_all(&bp)?;
                    match kind {
                        ConstructionKind::Multipoint => multipoint(r, &bp, p_star)?,
                        ConstructionKind::Multiinterval => multiinterval(r, &bp, p_star)?,
                    }
                }
                None => {
                    let sel = select_probabilities(kind, r, &Targets::distinct(kind, r), None, cap)?;
                    (sel.ifs, sel.spec)
                }
            };
            let text = render(&ifs, Some(&spec));
            match out {
                Some(path) => fs::write(&path, &text)
                    .with_context(|| format!("cannot write {}", path.display()))?,
                None => print!("{text}"),
            }
        }
        Command::DumpOmega { config, cap } => {
            let cfg = load(&config)?;
            print!("{}", closure(&cfg.ifs, cap)?.dump());
        }
        Command::DumpClasses { config, cap } => {
            let cfg = load(&config)?;
            print!("{}", structure(&cfg, cap)?.1.dump());
        }
        Command::Dimset { a } => {
            print!("{}", dimset_text(&run_pipeline(&a)?));
        }
        Command::Oracle {
            config,
            x,
            q,
            depths,
            lq_depths,
        } => {
            let cfg = load(&config)?;
            let depths = match depths.as_deref() {
                None => default_depths(&cfg.ifs),
                Some([lo, hi]) => (*lo, *hi),
                Some(_) => return Err(anyhow!("InvalidDepths: --depths takes lo,hi")),
            };
            for point in parse_all(&x)? {
                let e = empirical_local_dim(&cfg.ifs, &point, depths)?;
                println!(
                    "x={} local_dim={} spread={}",
                    fmt_rat(&point),
                    fmt_g(e.value),
                    fmt_g(e.spread)
                );
            }
            let lq_depths = match lq_depths.as_deref() {
                None => default_lq_depths(&cfg.ifs),
                Some([lo, hi]) => (*lo, *hi),
                Some(_) => return Err(anyhow!("InvalidDepths: --lq-depths takes lo,hi")),
            };
            for qv in q {
                let e = empirical_lq(&cfg.ifs, qv, lq_depths, 20_000_000)?;
                println!("q={} tau={}", fmt_g(qv), fmt_g(e.value));
            }
        }
    }
    Ok(())
}

fn validation_code(e: &ValidationError) -> u8 {
    match e.0.first() {
        Some(Violation::RatioOutOfRange) => 10,
        Some(Violation::TooFewMaps) => 11,
        Some(Violation::LengthMismatch { .. }) => 12,
        Some(Violation::DigitsNotIncreasing { .. }) => 13,
        Some(Violation::HullViolation { .. }) => 14,
        Some(Violation::SupportGap { .. }) => 15,
        Some(Violation::NonPositiveProbability { .. }) => 16,
        Some(Violation::ProbabilitySum { .. }) => 17,
        Some(Violation::StandardAssumptionViolation { .. }) => 18,
        None => 19,
    }
}

fn net_code(e: &NetError) -> u8 {
    match e {
        NetError::CapExceeded(_) => 40,
        NetError::BudgetExceeded(_) => 41,
        NetError::OutOfRange(_) => 42,
        NetError::Transition(_) => 43,
    }
}

fn class_code(e: &ClassError) -> u8 {
    match e {
        ClassError::Net(n) => net_code(n),
        _ => 50,
    }
}

fn dim_code(e: &DimError) -> u8 {
    match e {
        DimError::BudgetExceeded { .. } => 60,
        DimError::Overlap => 61,
        _ => 62,
    }
}

fn construction_code(e: &ConstructionError) -> u8 {
    match e {
        ConstructionError::Parity(_) => 30,
        ConstructionError::Congruence(_) => 31,
        ConstructionError::Probability(_) => 32,
        ConstructionError::Infeasible(_) => 33,
        ConstructionError::Validation(v) => validation_code(v),
        ConstructionError::Net(n) => net_code(n),
        ConstructionError::Class(c) => class_code(c),
        ConstructionError::Dim(d) => dim_code(d),
    }
}

/// Exit status by error family; see the README for the table.
fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<ConfigError>() {
        return match e {
            ConfigError::Validation(v) => validation_code(v),
            ConfigError::Construction(c) => construction_code(c),
            _ => 2,
        };
    }
    if err.downcast_ref::<ParseRatError>().is_some() {
        return 2;
    }
    if let Some(e) = err.downcast_ref::<ConstructionError>() {
        return construction_code(e);
    }
    if err.downcast_ref::<RequirementViolation>().is_some() {
        return 34;
    }
    if let Some(e) = err.downcast_ref::<NetError>() {
        return net_code(e);
    }
    if let Some(e) = err.downcast_ref::<ClassError>() {
        return class_code(e);
    }
    if let Some(e) = err.downcast_ref::<DimError>() {
        return dim_code(e);
    }
    if err.downcast_ref::<SpectraError>().is_some() {
        return 70;
    }
    if let Some(e) = err.downcast_ref::<OracleError>() {
        return match e {
            OracleError::Net(n) => net_code(n),
            _ => 80,
        };
    }
    1
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
