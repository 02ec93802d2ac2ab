use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use scheme_forge::constructions::{
    bipartite_double, from_srg_decomposition, hemisystem_krein_array, Decomposition,
};
use scheme_forge::feasibility::{
    compare_golden, render_facsimile, render_tsv, scan, Annotations, DEFAULT_NMAX, DEFAULT_WMAX,
};
use scheme_forge::imprimitivity::find_imprimitivity_systems;
use scheme_forge::schemes::verify_scheme;
use scheme_forge::spectral::{eigendata, krein_tensor, FieldPolicy};
use scheme_forge::uniformity::dismantle;

mod report;
mod sources;

/// Error carrying its exit code.
#[derive(Debug)]
pub struct Exit {
    pub code: u8,
    pub msg: String,
}

impl Exit {
    pub fn negative(msg: impl Into<String>) -> Self {
        Exit {
            code: 2,
            msg: msg.into(),
        }
    }
    pub fn io(msg: impl Into<String>) -> Self {
        Exit {
            code: 3,
            msg: msg.into(),
        }
    }
    pub fn field(msg: impl Into<String>) -> Self {
        Exit {
            code: 4,
            msg: format!("unsupported field: {}", msg.into()),
        }
    }
    pub fn golden(msg: impl Into<String>) -> Self {
        Exit {
            code: 5,
            msg: msg.into(),
        }
    }
    pub fn usage(msg: impl Into<String>) -> Self {
        Exit {
            code: 1,
            msg: msg.into(),
        }
    }
    pub fn internal(msg: impl Into<String>) -> Self {
        Exit {
            code: 1,
            msg: format!("internal error: {}", msg.into()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "scheme-forge",
    version,
    about = "Exact analysis of symmetric association schemes"
)]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the scheme axioms and print the intersection numbers.
    Verify { source: String },
    /// Eigenmatrices, Krein parameters, orderings, imprimitivity and uniformity.
    Analyze {
        source: String,
        #[arg(long)]
        json: bool,
        /// auto, rational, or a square-free D for Q(sqrt D).
        #[arg(long, default_value = "auto")]
        field: String,
        /// Exit 2 unless some imprimitivity system is uniform.
        #[arg(long)]
        assert_uniform: bool,
    },
    /// Feasible four-class cometric Q-antipodal parameter sets.
    Scan {
        #[arg(long, default_value_t = DEFAULT_NMAX)]
        nmax: u64,
        #[arg(long, default_value_t = DEFAULT_WMAX)]
        wmax: u64,
        /// Compare the table with this file; exit 5 on any difference.
        #[arg(long)]
        golden: Option<String>,
        #[arg(long)]
        out: Option<String>,
        #[arg(long)]
        tsv: bool,
        /// Annotation file (default: the bundled one).
        #[arg(long)]
        annotations: Option<String>,
    },
    /// Restrict to a union of fibres of an imprimitivity system.
    Dismantle {
        source: String,
        /// Fibre indices, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        fibres: Vec<usize>,
        /// Relations of the system, comma separated (default: the system with most fibres).
        #[arg(long, value_delimiter = ',')]
        relations: Option<Vec<usize>>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Build a scheme or parameter set.
    Construct {
        #[command(subcommand)]
        what: Construct,
        #[arg(long, global = true)]
        out: Option<String>,
    },
}

#[derive(Subcommand)]
enum Construct {
    /// Hoffman-Singleton graph as a two-class scheme.
    Hosi,
    /// 150-vertex scheme on the graph's vertices and its 15-cocliques.
    LinkedHosi,
    /// Hamming scheme H(d,q).
    Hamming { d: usize, q: usize },
    /// Rectangular scheme R(w,n) on w x n grid points.
    Rectangular { w: usize, n: usize },
    /// Two linked copies of the (16,6,2) biplane.
    Biplane16,
    /// Bipartite double of a scheme.
    Double { source: String },
    /// Scheme from a strongly regular graph split into two halves.
    SrgDecomp { source: String },
    /// Krein array of the hemisystem scheme for odd t >= 3.
    HemisystemParams { t: u64 },
}

fn emit(out: &Option<String>, text: &str) -> Result<(), Exit> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Exit::io(format!("{path}: {e}"))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())
                .map_err(|e| Exit::io(e.to_string()))
        }
    }
}

fn field_policy(s: &str) -> Result<FieldPolicy, Exit> {
    match s {
        "auto" => Ok(FieldPolicy::Auto),
        "rational" | "1" => Ok(FieldPolicy::Rational),
        d => d
            .parse::<u64>()
            .ok()
            .filter(|&d| d >= 2)
            .map(FieldPolicy::Quadratic)
            .ok_or_else(|| {
                Exit::usage(format!(
                    "--field expects auto, rational or an integer D >= 2, got `{d}`"
                ))
            }),
    }
}

fn cmd_verify(source: &str) -> Result<(), Exit> {
    let t = sources::load(source)?;
    let p = verify_scheme(&t).map_err(|e| Exit::negative(e.to_string()))?;
    let d = p.d();
    let mut s = format!(
        "scheme v={} d={}\nvalencies: {:?}\n",
        t.v(),
        d,
        p.valencies()
    );
    for h in 0..=d {
        for i in 0..=d {
            let row: Vec<String> = (0..=d).map(|j| p.p(h, i, j).to_string()).collect();
            s.push_str(&format!("p^{h}_{i}*: {}\n", row.join(" ")));
        }
    }
    emit(&None, &s)
}

fn cmd_analyze(source: &str, json: bool, field: &str, assert_uniform: bool) -> Result<(), Exit> {
    let policy = field_policy(field)?;
    let t = sources::load(source)?;
    let r = report::analyze(&t, policy)?;
    let text = if json {
        let mut s = serde_json::to_string_pretty(&r).map_err(|e| Exit::internal(e.to_string()))?;
        s.push('\n');
        s
    } else {
        report::render_text(&r)
    };
    emit(&None, &text)?;
    if assert_uniform && !r.systems.iter().any(|s| s.uniform) {
        return Err(Exit::negative("no uniform imprimitivity system"));
    }
    Ok(())
}

fn cmd_scan(
    nmax: u64,
    wmax: u64,
    golden: Option<String>,
    out: Option<String>,
    tsv: bool,
    annotations: Option<String>,
) -> Result<(), Exit> {
    let ann = match annotations {
        Some(path) => Annotations::parse(&sources::read_file(&path)?)
            .map_err(|e| Exit::usage(e.to_string()))?,
        None => Annotations::bundled(),
    };
    let groups = scan(nmax, wmax, &ann);
    let facsimile = render_facsimile(&groups);
    let text = if tsv {
        render_tsv(&groups)
    } else {
        facsimile.clone()
    };
    emit(&out, &text)?;
    let rows: usize = groups.iter().map(|g| g.rows.len()).sum();
    eprintln!("{} groups, {} rows", groups.len(), rows);
    if let Some(path) = golden {
        let expected = sources::read_file(&path)?;
        let diffs =
            compare_golden(&expected, &facsimile).map_err(|e| Exit::io(format!("{path}: {e}")))?;
        for d in &diffs {
            eprintln!("{d}");
        }
        if !diffs.is_empty() {
            return Err(Exit::golden(format!(
                "{} differences against {path}",
                diffs.len()
            )));
        }
        eprintln!("golden: identical");
    }
    Ok(())
}

fn cmd_dismantle(
    source: &str,
    fibres: &[usize],
    relations: Option<Vec<usize>>,
    out: Option<String>,
) -> Result<(), Exit> {
    let t = sources::load(source)?;
    let p = verify_scheme(&t).map_err(|e| Exit::negative(e.to_string()))?;
    let e = eigendata(&p).map_err(|e| Exit::internal(e.to_string()))?;
    let k = krein_tensor(&e).map_err(|e| Exit::internal(e.to_string()))?;
    let systems =
        find_imprimitivity_systems(&t, &p, &e, &k).map_err(|e| Exit::internal(e.to_string()))?;
    let sys = match relations {
        Some(mut rel) => {
            rel.sort_unstable();
            rel.dedup();
            if !rel.contains(&0) {
                rel.insert(0, 0);
            }
            systems
                .iter()
                .find(|s| s.i_set() == rel.as_slice())
                .ok_or_else(|| {
                    Exit::negative(format!("no imprimitivity system with relations {rel:?}"))
                })?
        }
        None => systems
            .iter()
            .max_by_key(|s| (s.w(), std::cmp::Reverse(s.i_set().to_vec())))
            .ok_or_else(|| Exit::negative("the scheme is primitive"))?,
    };
    let dis = dismantle(&t, &sys.base, fibres).map_err(|e| Exit::negative(e.to_string()))?;
    eprintln!(
        "system I={:?} w={}: fibres {:?} give v={} d={}",
        sys.i_set(),
        sys.w(),
        dis.fibres,
        dis.restriction.table.v(),
        dis.restriction.table.d()
    );
    emit(&out, &dis.restriction.table.to_text())
}

fn cmd_construct(what: Construct, out: Option<String>) -> Result<(), Exit> {
    let named = |name: &str| sources::named(name).expect("built-in name");
    let t = match what {
        Construct::Hosi => named("hoffman-singleton")?,
        Construct::LinkedHosi => named("linked-hosi")?,
        Construct::Hamming { d, q } => named(&format!("hamming-{d}-{q}"))?,
        Construct::Rectangular { w, n } => {
            if w < 2 || n < 2 {
                return Err(Exit::usage("rectangular needs w, n >= 2"));
            }
            named(&format!("rectangular-{w}-{n}"))?
        }
        Construct::Biplane16 => named("linked-biplanes")?,
        Construct::Double { source } => bipartite_double(&sources::load(&source)?),
        Construct::SrgDecomp { source } => {
            let inp = sources::decomposition_input(&source)?;
            match from_srg_decomposition(&inp).map_err(|e| Exit::negative(e.to_string()))? {
                Decomposition::Exceptional { ambient, fibre } => {
                    return emit(
                        &out,
                        &format!("exceptional: {ambient} into two copies of {fibre}, no scheme\n"),
                    );
                }
                Decomposition::Scheme {
                    table,
                    ambient,
                    fibre,
                    ..
                } => {
                    eprintln!("{ambient} into two copies of {fibre}");
                    table
                }
            }
        }
        Construct::HemisystemParams { t } => {
            let h = hemisystem_krein_array(t).map_err(|e| Exit::usage(e.to_string()))?;
            let text = format!(
                "krein array: {}\nexact: {}\nfibre: {}\ntable row: {}\n",
                h.array,
                h.array.exact_string(),
                h.fibre,
                h.table_srg
            );
            return emit(&out, &text);
        }
    };
    emit(&out, &t.to_text())
}

fn run(cli: Cli) -> Result<(), Exit> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Exit::usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Exit::internal(e.to_string()))?;
    }
    match cli.cmd {
        Cmd::Verify { source } => cmd_verify(&source),
        Cmd::Analyze {
            source,
            json,
            field,
            assert_uniform,
        } => cmd_analyze(&source, json, &field, assert_uniform),
        Cmd::Scan {
            nmax,
            wmax,
            golden,
            out,
            tsv,
            annotations,
        } => cmd_scan(nmax, wmax, golden, out, tsv, annotations),
        Cmd::Dismantle {
            source,
            fibres,
            relations,
            out,
        } => cmd_dismantle(&source, &fibres, relations, out),
        Cmd::Construct { what, out } => cmd_construct(what, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}
