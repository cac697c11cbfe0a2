use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use refpoly::classify::{self, ClassifyOptions};
use refpoly::fibration;
use refpoly::hodge;
use refpoly::lattices::{enumerate_lattices, vpm_invariants};
use refpoly::polytope::{self, dual, format_points, format_polytope, hull, is_reflexive, normal_form, Polytope};
use refpoly::weights::{self, Cws, EnumerationMode, WeightSystem};

/// Reflexive polytopes, weight systems, Hodge data and fibrations.
#[derive(Parser)]
#[command(name = "refpoly", version)]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "REFPOLY_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Input {
    /// Input file; standard input when absent or `-`.
    input: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// All lattice points of each polytope.
    Points(Input),
    /// Vertices of the dual polytope.
    Dual(Input),
    /// `true` or `false` per polytope.
    Reflexive(Input),
    /// Vertices in normal form.
    Normalform(Input),
    /// Hodge numbers h11 .. h1,n-2 of the Calabi-Yau hypersurface.
    Hodge(Input),
    /// Picard number of the K3 surface of a 3d reflexive polytope.
    Picard(Input),
    /// Weight systems with the given number of weights.
    WeightsEnum {
        #[arg(long)]
        nweights: usize,
        /// Keep only systems whose polytope has the origin in its interior.
        #[arg(long)]
        ip: bool,
    },
    /// IP combined weight systems of the given dimension.
    CwsEnum {
        #[arg(long)]
        dim: usize,
    },
    /// The polytope of each weight-system line.
    Delta {
        #[command(flatten)]
        input: Input,
        /// Print vertices instead of all lattice points.
        #[arg(long)]
        vertices: bool,
    },
    /// Every lattice on which each polytope is reflexive.
    Lattices(Input),
    /// Reflexive sections of the dual polytope for each weight-system line.
    Fibrations {
        #[command(flatten)]
        input: Input,
        /// Fiber dimension; codimension one when absent.
        #[arg(long)]
        fiber_dim: Option<usize>,
    },
    /// Enumerate reflexive polytopes of dimension 2 or 3.
    Classify {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        with_lattices: bool,
        /// Checkpoint log to create or continue.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Log records between fsyncs.
        #[arg(long, default_value_t = 4096)]
        sync_every: usize,
        /// Print every class as a polytope block.
        #[arg(long)]
        dump: bool,
        /// Allow dimension 4.
        #[arg(long)]
        unsafe_huge: bool,
    },
    /// Table-style report per weight-system line or polytope block.
    Analyze {
        #[command(flatten)]
        input: Input,
        /// Read polytope blocks instead of weight-system lines.
        #[arg(long)]
        polytope: bool,
    },
}

enum Failure {
    Usage(String),
    Parse(String),
    Io(io::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<polytope::ParseError> for Failure {
    fn from(e: polytope::ParseError) -> Self {
        Failure::Parse(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("refpoly: --jobs must be positive");
            return ExitCode::from(1);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let res = run(cli.cmd, &mut out).and_then(|()| out.flush().map_err(Failure::from));
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("refpoly: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Parse(m)) => {
            eprintln!("refpoly: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("refpoly: {e}");
            ExitCode::from(3)
        }
    }
}

fn read_input(input: &Input) -> Result<String, Failure> {
    match &input.input {
        Some(p) if p.as_os_str() != "-" => Ok(fs::read_to_string(p)?),
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

/// Weight-system lines with their line numbers; comments and blanks skipped.
fn read_cws(input: &Input) -> Result<Vec<(String, Cws)>, Failure> {
    let text = read_input(input)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let q = weights::parse_cws_line(line, None).map_err(|e| Failure::Parse(format!("line {}: {e}", i + 1)))?;
        out.push((line.to_string(), q));
    }
    Ok(out)
}

/// Runs `f` on every polytope block in parallel and prints the results in
/// input order, each preceded by the block's comments.
fn per_block<W: Write>(input: &Input, out: &mut W, f: impl Fn(&Polytope) -> Result<String, String> + Sync) -> Result<(), Failure> {
    let blocks = polytope::parse_polytopes(&read_input(input)?)?;
    let results: Vec<String> = blocks
        .par_iter()
        .map(|b| match hull(&b.points) {
            Ok(p) => f(&p).unwrap_or_else(|e| format!("ERR {e}\n")),
            Err(e) => format!("ERR {e}\n"),
        })
        .collect();
    for (b, r) in blocks.iter().zip(results) {
        for c in &b.comments {
            writeln!(out, "{c}")?;
        }
        out.write_all(r.as_bytes())?;
    }
    Ok(())
}

fn per_line<W: Write>(input: &Input, out: &mut W, f: impl Fn(&Cws) -> Result<String, String> + Sync) -> Result<(), Failure> {
    let records = read_cws(input)?;
    let results: Vec<String> = records.par_iter().map(|(_, q)| f(q).unwrap_or_else(|e| format!("ERR {e}\n"))).collect();
    for r in results {
        out.write_all(r.as_bytes())?;
    }
    Ok(())
}

fn err<E: ToString>(e: E) -> String {
    e.to_string()
}

fn run<W: Write>(cmd: Cmd, out: &mut W) -> Result<(), Failure> {
    match cmd {
        Cmd::Points(input) => per_block(&input, out, |p| Ok(format_points(p.lattice_points(), p.dim()))),
        Cmd::Dual(input) => per_block(&input, out, |p| dual(p).map(|d| format_polytope(&d)).map_err(err)),
        Cmd::Reflexive(input) => per_block(&input, out, |p| Ok(format!("{}\n", is_reflexive(p)))),
        Cmd::Normalform(input) => per_block(&input, out, |p| {
            let nf = normal_form(p);
            Ok(format_points(&nf.vertices(), nf.dim()))
        }),
        Cmd::Hodge(input) => per_block(&input, out, |p| {
            let h = hodge::hodge_numbers(p).map_err(err)?;
            Ok(format!("{}\n", join(&h.h)))
        }),
        Cmd::Picard(input) => per_block(&input, out, |p| Ok(format!("{}\n", hodge::picard(p).map_err(err)?))),
        Cmd::WeightsEnum { nweights, ip } => {
            let mode = if ip { EnumerationMode::Ip } else { EnumerationMode::Candidates };
            let mut ws = weights::enumerate_single_ws(nweights, mode).map_err(|e| Failure::Usage(e.to_string()))?;
            ws.sort_by(|a, b| (a.degree(), a.weights()).cmp(&(b.degree(), b.weights())));
            for w in ws {
                writeln!(out, "{w}")?;
            }
            Ok(())
        }
        Cmd::CwsEnum { dim } => {
            let mut qs = weights::enumerate_cws(dim).map_err(|e| Failure::Usage(e.to_string()))?;
            qs.sort_by_key(|q| (q.systems().len(), q.degrees(), q.systems().to_vec()));
            for q in qs {
                writeln!(out, "{q}")?;
            }
            Ok(())
        }
        Cmd::Delta { input, vertices } => per_line(&input, out, |q| {
            let d = weights::delta_of_q(q).map_err(err)?;
            Ok(if vertices { format_polytope(&d) } else { format_points(d.lattice_points(), d.dim()) })
        }),
        Cmd::Lattices(input) => per_block(&input, out, |p| {
            let d = vpm_invariants(p).map_err(err)?;
            let reals = enumerate_lattices(p).map_err(err)?;
            let mut s = format!("# invariants {} realizations {}\n", join(&d), reals.len());
            for r in reals {
                let _ = writeln!(s, "# index {}", r.index);
                s.push_str(&format_points(&r.vertices, p.dim()));
            }
            Ok(s)
        }),
        Cmd::Fibrations { input, fiber_dim } => per_line(&input, out, |q| fibrations(q, fiber_dim)),
        Cmd::Classify { dim, with_lattices, resume, sync_every, dump, unsafe_huge } => {
            if dim == 4 && !unsafe_huge {
                return Err(Failure::Usage("dimension 4 does not finish at desk scale; pass --unsafe-huge to try".into()));
            }
            let seeds = classify::default_seeds(dim).map_err(|e| Failure::Usage(e.to_string()))?;
            let opts = ClassifyOptions { with_lattices, checkpoint: resume, sync_every, allow_huge: unsafe_huge };
            let run = classify::classify(dim, &seeds, &opts).map_err(|e| match e {
                classify::ClassifyError::Io(e) => Failure::Io(e),
                classify::ClassifyError::Corrupt(_) => Failure::Parse(e.to_string()),
                e => Failure::Usage(e.to_string()),
            })?;
            let c = classify::connectedness_report(&run);
            writeln!(out, "seeds {}", seeds.len())?;
            if with_lattices {
                writeln!(out, "classes before lattices {}", run.before_lattices)?;
            }
            writeln!(out, "classes {}", run.store.len())?;
            writeln!(out, "processed {}", run.store.processed())?;
            writeln!(out, "connected {} components {}", c.connected, c.components)?;
            if dump {
                for nf in run.store.normal_forms() {
                    out.write_all(format_points(&nf.vertices(), nf.dim()).as_bytes())?;
                }
            }
            Ok(())
        }
        Cmd::Analyze { input, polytope: true } => per_block(&input, out, |p| Ok(format!("{}\n", report(p)?))),
        Cmd::Analyze { input, polytope: false } => {
            let records = read_cws(&input)?;
            let results: Vec<String> = records
                .par_iter()
                .map(|(line, q)| analyze_cws(q).map(|r| format!("{line}  {r}\n")).unwrap_or_else(|e| format!("ERR {e}\n")))
                .collect();
            for r in results {
                out.write_all(r.as_bytes())?;
            }
            Ok(())
        }
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Point and vertex counts of `p` and its dual, Hodge data and the
/// number of reflexive codimension-one projections.
fn report(p: &Polytope) -> Result<String, String> {
    let d = dual(p).map_err(err)?;
    let mut s = format!(
        "P={} V={} dualP={} dualV={}",
        p.lattice_points().len(),
        p.vertices().len(),
        d.lattice_points().len(),
        d.vertices().len()
    );
    if (3..=5).contains(&p.dim()) {
        let h = hodge::hodge_numbers(p).map_err(err)?;
        for (i, x) in h.h.iter().enumerate() {
            let _ = write!(s, " h1{}={x}", i + 1);
        }
        if let Some(pic) = h.picard {
            let _ = write!(s, " pic={pic}");
        }
        if let Some(chi) = h.chi {
            let _ = write!(s, " chi={chi}");
        }
    }
    if p.dim() <= 4 {
        let _ = write!(s, " Pi={}", fibration::count_reflexive_projections(p));
    }
    Ok(s)
}

fn analyze_cws(q: &Cws) -> Result<String, String> {
    let p = weights::delta_of_q(q).map_err(err)?;
    let mut s = report(&p)?;
    if q.dim() <= 4 {
        let t = weights::minimality_type(q).map_err(err)?;
        let _ = write!(s, " type={}", t.tag());
    }
    if let [w] = q.systems() {
        let ws = WeightSystem::new(w).map_err(err)?;
        let _ = write!(s, " F={}", fibration::count_facet_projections(&ws));
    }
    Ok(s)
}

/// One header line per input, then one line per reflexive section.
fn fibrations(q: &Cws, fiber_dim: Option<usize>) -> Result<String, String> {
    // Partitions index the sorted weights, so build Δ in that order too.
    let single = match q.systems() {
        [w] => Some(WeightSystem::new(w).map_err(err)?),
        _ => None,
    };
    let q = &single.as_ref().map_or_else(|| q.clone(), |w| w.to_cws());
    let delta = weights::delta_of_q(q).map_err(err)?;
    let dstar = dual(&delta).map_err(err)?;
    let n = delta.dim();
    let k = fiber_dim.unwrap_or(n.saturating_sub(1));
    let sections = fibration::reflexive_sections(&dstar, k);
    // Fiber weights are known for sections that come from unique partitions.
    let mut facet: Vec<(Vec<Vec<i64>>, WeightSystem)> = Vec::new();
    let mut s = q.to_string();
    if let Some(ws) = &single {
        for part in fibration::unique_partitions(ws) {
            if let (Some(f), Some(fw)) = (fibration::facet_fibration(ws, &part), fibration::facet_projection(ws, &part)) {
                facet.push((f.basis, fw));
            }
        }
        let _ = write!(s, "  F={}", fibration::count_facet_projections(ws));
    }
    if k + 1 == n {
        let _ = write!(s, " Pi={}", sections.len());
    }
    s.push('\n');
    for f in &sections {
        let weights = facet.iter().find(|(b, _)| *b == f.basis).map_or("-".to_string(), |(_, w)| join(w.weights()));
        let reducible: Vec<String> = f.base.reducible().iter().map(|&r| if r { "1" } else { "0" }.to_string()).collect();
        let _ = writeln!(
            s,
            "  fiber_dim={} fiber_points={} weights={} rays={} reducible={}",
            f.fiber_dim,
            f.fiber.lattice_points().len(),
            weights.replace(' ', ","),
            f.base.rays.len(),
            reducible.join("")
        );
    }
    Ok(s)
}
