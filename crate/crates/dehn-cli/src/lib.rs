//! Command-line front end. `run` is the whole program; `main` only wires
//! it to the process streams.

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use dehn::alexander::{equivalent_up_to_unit, twist_knot_alexander, LaurentPoly};
use dehn::catalog::{
    builtin_paper_catalog, load_catalog, query, Catalog, Entry, ManifoldProfile, Query, Rational, Resolved, SetKind,
};
use dehn::engine::{Engine, EngineError, RigidityVerdict, Status};
use dehn::homology::{boundary_kernel, first_homology, BoundaryKernel, SurgeryDiagram};
use dehn::lemmas;
use dehn::slope::{self, enumerate_bounded_distance, find_pair_maps, Slope};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "dehn", version, about = "Slopes, surgery homology and rigidity checks for cusped 3-manifolds")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Catalog JSON file. Defaults to the catalog compiled into the binary.
    #[arg(long, global = true, value_name = "FILE")]
    catalog: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Slope arithmetic.
    #[command(subcommand)]
    Slope(SlopeCmd),
    /// First homology of a surgery diagram and its boundary kernels.
    Homology(HomologyArgs),
    /// Alexander polynomials.
    #[command(subcommand)]
    Alexander(AlexanderCmd),
    /// Inspect the catalog.
    #[command(subcommand)]
    Catalog(CatalogCmd),
    /// Rule-based rigidity checks.
    #[command(subcommand)]
    Rigidity(RigidityCmd),
    /// Brute-force oracles.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Debug, Subcommand)]
enum SlopeCmd {
    /// Geometric intersection number of two slopes.
    Delta {
        #[arg(allow_hyphen_values = true)]
        r1: String,
        #[arg(allow_hyphen_values = true)]
        r2: String,
    },
    /// Boundary map classes carrying one distance-4 pair onto another.
    Maps {
        #[arg(allow_hyphen_values = true)]
        c1: String,
        #[arg(allow_hyphen_values = true)]
        c2: String,
        #[arg(allow_hyphen_values = true)]
        c1p: String,
        #[arg(allow_hyphen_values = true)]
        c2p: String,
    },
    /// Slopes within distance DMAX of both given slopes.
    Enum {
        #[arg(allow_hyphen_values = true)]
        c1: String,
        #[arg(allow_hyphen_values = true)]
        c2: String,
        #[arg(long)]
        dmax: i64,
    },
}

#[derive(Debug, Args)]
struct HomologyArgs {
    /// JSON file `{"lk": [[..]], "fill": ["p/q" | null, ..]}`.
    #[arg(long, value_name = "FILE")]
    diagram: PathBuf,
    /// Fill component `i` (0-based) with slope `p/q`; repeatable.
    #[arg(long = "fill", value_name = "i=p/q", allow_hyphen_values = true)]
    fills: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum AlexanderCmd {
    /// Alexander polynomial of the twist knot with parameter M.
    Twist {
        #[arg(allow_hyphen_values = true)]
        m: i64,
    },
    /// Whether two polynomials agree up to a unit `+-t^k`.
    Eq {
        #[arg(allow_hyphen_values = true)]
        f: String,
        #[arg(allow_hyphen_values = true)]
        g: String,
    },
}

#[derive(Debug, Subcommand)]
enum CatalogCmd {
    /// List entries, or show one entry, alias or family instance.
    Show { id: Option<String> },
    /// Filter entries.
    Query {
        #[arg(long)]
        cusps: Option<usize>,
        /// `KIND=D`, e.g. `E_t=7`.
        #[arg(long, value_name = "KIND=D")]
        max_delta: Option<String>,
        #[arg(long)]
        knot: Option<bool>,
        #[arg(long)]
        link: Option<bool>,
        #[arg(long)]
        family: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
enum RigidityCmd {
    /// Apply the first matching rule to a profile read from FILE.
    Decide {
        #[arg(long, value_name = "FILE")]
        profile: PathBuf,
    },
    /// Run the rigidity argument for a catalog manifold.
    Verify {
        #[arg(required_unless_present = "all", conflicts_with = "all")]
        id: Option<String>,
        /// Every covered target, in a fixed order.
        #[arg(long)]
        all: bool,
    },
}

#[derive(Debug, Subcommand)]
enum VerifyCmd {
    /// Run the brute-force lemma oracles.
    Lemmas,
}

enum Failure {
    Usage(String),
    Data(String),
    /// The reader went away (`dehn ... | head`); not an error.
    ClosedPipe,
}

fn io(e: std::io::Error) -> Failure {
    if e.kind() == std::io::ErrorKind::BrokenPipe {
        Failure::ClosedPipe
    } else {
        Failure::Data(e.to_string())
    }
}

fn data(e: impl Display) -> Failure {
    Failure::Data(e.to_string())
}

fn usage(e: impl Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn engine_failure(e: EngineError) -> Failure {
    Failure::Data(e.to_string())
}

type Out<'a> = &'a mut dyn Write;

struct Ctx<'a> {
    format: Format,
    out: Out<'a>,
}

impl Ctx<'_> {
    fn emit(&mut self, text: impl Display, json: impl Serialize) -> Result<(), Failure> {
        match self.format {
            Format::Text => writeln!(self.out, "{text}"),
            Format::Json => writeln!(self.out, "{}", serde_json::to_string_pretty(&json).map_err(data)?),
        }
        .map_err(io)
    }
}

/// Runs the program on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let mut ctx = Ctx { format: cli.format, out };
    match dispatch(&cli, &mut ctx) {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Data(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_DATA
        }
        Err(Failure::ClosedPipe) => EXIT_OK,
    }
}

fn open_catalog(path: Option<&Path>) -> Result<Catalog, Failure> {
    match path {
        None => Ok(builtin_paper_catalog()),
        Some(p) => load_catalog(p).map_err(data),
    }
}

fn dispatch(cli: &Cli, ctx: &mut Ctx) -> Result<i32, Failure> {
    match &cli.command {
        Command::Slope(c) => slope_cmd(c, ctx),
        Command::Homology(a) => homology_cmd(a, ctx),
        Command::Alexander(c) => alexander_cmd(c, ctx),
        Command::Catalog(c) => catalog_cmd(c, &open_catalog(cli.catalog.as_deref())?, ctx),
        Command::Rigidity(c) => rigidity_cmd(c, &open_catalog(cli.catalog.as_deref())?, ctx),
        Command::Verify(VerifyCmd::Lemmas) => lemmas_cmd(ctx),
    }
}

fn parse_rational(s: &str) -> Result<Rational, Failure> {
    s.parse().map_err(usage)
}

fn parse_slope(s: &str) -> Result<Slope<i64>, Failure> {
    Ok(slope::from_rational(&parse_rational(s)?))
}

fn slope_cmd(c: &SlopeCmd, ctx: &mut Ctx) -> Result<i32, Failure> {
    match c {
        SlopeCmd::Delta { r1, r2 } => {
            let d = parse_slope(r1)?.delta(&parse_slope(r2)?).map_err(data)?;
            ctx.emit(d, json!({ "r1": r1, "r2": r2, "delta": d }))?;
        }
        SlopeCmd::Maps { c1, c2, c1p, c2p } => {
            let (a, b) = (parse_slope(c1)?, parse_slope(c2)?);
            let (ap, bp) = (parse_slope(c1p)?, parse_slope(c2p)?);
            let maps = find_pair_maps(&a, &b, &ap, &bp).map_err(data)?;
            let text = maps.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("\n");
            ctx.emit(text, json!({ "maps": maps }))?;
        }
        SlopeCmd::Enum { c1, c2, dmax } => {
            let set = enumerate_bounded_distance(&parse_slope(c1)?, &parse_slope(c2)?, *dmax).map_err(data)?;
            let mut values: Vec<Rational> = set.iter().map(slope::to_rational).collect();
            values.sort();
            let text = values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\n");
            ctx.emit(text, json!({ "count": values.len(), "slopes": values }))?;
        }
    }
    Ok(EXIT_OK)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn kernel_text(k: &BoundaryKernel<i64>) -> String {
    match k {
        BoundaryKernel::Injective => "injective (no null-homologous slope)".into(),
        BoundaryKernel::Line(s) => format!("null-homologous slope {s}"),
        BoundaryKernel::Full => "every slope is null-homologous".into(),
    }
}

fn homology_cmd(a: &HomologyArgs, ctx: &mut Ctx) -> Result<i32, Failure> {
    let mut d: SurgeryDiagram<i64> = read_json(&a.diagram)?;
    for f in &a.fills {
        let (i, r) = f
            .split_once('=')
            .ok_or_else(|| usage(format!("--fill expects i=p/q, got `{f}`")))?;
        let i: usize = i.trim().parse().map_err(|_| usage(format!("bad component index `{i}`")))?;
        d = d.with_fill(i, Some(parse_rational(r.trim())?)).map_err(data)?;
    }
    let h = first_homology(&d).map_err(data)?;
    let mut text = format!("H1 = {h}");
    let mut boundaries = Vec::new();
    for i in d.unfilled() {
        let k = boundary_kernel(&d, i).map_err(data)?;
        text += &format!("\ncomponent {i}: {}", kernel_text(&k));
        boundaries.push(json!({ "component": i, "kernel": k }));
    }
    ctx.emit(text, json!({ "homology": h, "boundaries": boundaries }))?;
    Ok(EXIT_OK)
}

fn alexander_cmd(c: &AlexanderCmd, ctx: &mut Ctx) -> Result<i32, Failure> {
    match c {
        AlexanderCmd::Twist { m } => {
            let p = twist_knot_alexander(*m).map_err(data)?;
            ctx.emit(&p, json!({ "m": m, "polynomial": p }))?;
        }
        AlexanderCmd::Eq { f, g } => {
            let pf: LaurentPoly<i64> = f.parse().map_err(usage)?;
            let pg: LaurentPoly<i64> = g.parse().map_err(usage)?;
            let eq = equivalent_up_to_unit(&pf, &pg);
            let text = if eq { "equivalent" } else { "not equivalent" };
            ctx.emit(text, json!({ "f": pf, "g": pg, "equivalent": eq }))?;
        }
    }
    Ok(EXIT_OK)
}

fn parse_kind(s: &str) -> Result<SetKind, Failure> {
    let norm = |x: &str| x.to_ascii_lowercase().replace('_', "");
    SetKind::ALL
        .into_iter()
        .find(|k| norm(k.name()) == norm(s))
        .or_else(|| serde_json::from_value(json!(s.to_ascii_lowercase())).ok())
        .ok_or_else(|| usage(format!("unknown slope set `{s}`")))
}

fn profile_text(p: &ManifoldProfile) -> String {
    let mut out = format!("cusps: {}", p.cusps.len());
    for (i, c) in p.cusps.iter().enumerate() {
        for kind in SetKind::ALL {
            let Some(s) = c.set(kind) else { continue };
            let mut items: Vec<String> = s.slopes.iter().map(|x| x.to_string()).collect();
            items.extend(s.opaque.iter().cloned());
            let max = s.known_max_delta().map(|d| format!(", max distance {d}")).unwrap_or_default();
            out += &format!(
                "\n  cusp {i} {}: {:?} {{{}}}{max}  [{}]",
                kind.name(),
                s.completeness,
                items.join(", "),
                s.provenance
            );
        }
        if let Some(h) = &c.half_integral_toroidal {
            out += &format!("\n  cusp {i} half-integral toroidal slope: {}  [{}]", h.value, h.provenance);
        }
    }
    if let Some(h) = p.homology_value() {
        out += &format!("\nH1: {h}");
    }
    let f = &p.flags;
    if let Some(k) = f.is_knot_complement() {
        out += &format!("\nknot complement: {k}");
    }
    if let Some(k) = f.is_link_complement() {
        out += &format!("\nlink complement: {k}");
    }
    if let Some(a) = &p.alexander {
        out += &format!("\nAlexander polynomial: {}", a.value);
    }
    out
}

fn catalog_cmd(c: &CatalogCmd, cat: &Catalog, ctx: &mut Ctx) -> Result<i32, Failure> {
    match c {
        CatalogCmd::Show { id: None } => {
            let text = cat
                .entries()
                .map(|e| match e {
                    Entry::Manifold(m) => format!("{:<16} manifold  {}", m.id, m.description),
                    Entry::Family(f) => format!("{:<16} family    {}", f.id, f.description),
                })
                .collect::<Vec<_>>()
                .join("\n");
            match ctx.format {
                Format::Text => writeln!(ctx.out, "{text}").map_err(io)?,
                Format::Json => write!(ctx.out, "{}", cat.to_json()).map_err(io)?,
            }
        }
        CatalogCmd::Show { id: Some(id) } => match cat.resolve(id).map_err(data)? {
            Resolved::Manifold { entry, .. } => {
                ctx.emit(format!("{}\n{}", entry.id, profile_text(&entry.profile)), Entry::Manifold(entry.clone()))?
            }
            Resolved::Family(f) => ctx.emit(
                format!("{} (family, parameter {})\n{}", f.id, f.parameter.name, f.description),
                Entry::Family(f.clone()),
            )?,
            Resolved::Instance {
                id, family, parameter, profile,
            } => ctx.emit(
                format!("{id} ({} at {} = {parameter})\n{}", family.id, family.parameter.name, profile_text(&profile)),
                json!({ "id": id, "family": family.id, "parameter": parameter, "profile": profile }),
            )?,
        },
        CatalogCmd::Query {
            cusps, max_delta, knot, link, family,
        } => {
            let max_delta = match max_delta {
                None => None,
                Some(s) => {
                    let (k, d) = s
                        .split_once('=')
                        .ok_or_else(|| usage(format!("--max-delta expects KIND=D, got `{s}`")))?;
                    Some((parse_kind(k)?, d.parse().map_err(|_| usage(format!("bad distance `{d}`")))?))
                }
            };
            let q = Query {
                cusps: *cusps,
                max_delta,
                knot_complement: *knot,
                link_complement: *link,
                family: family.clone(),
            };
            let ids: Vec<&str> = query(cat, &q).into_iter().map(|e| e.id()).collect();
            ctx.emit(ids.join("\n"), &ids)?;
        }
    }
    Ok(EXIT_OK)
}

fn verdict_out(ctx: &mut Ctx, v: &RigidityVerdict) -> Result<(), Failure> {
    match ctx.format {
        Format::Text => write!(ctx.out, "{}", v.to_text()),
        Format::Json => write!(ctx.out, "{}", v.to_json()),
    }
    .map_err(io)
}

fn rigidity_cmd(c: &RigidityCmd, cat: &Catalog, ctx: &mut Ctx) -> Result<i32, Failure> {
    let engine = Engine::new(cat);
    match c {
        RigidityCmd::Decide { profile } => {
            let p: ManifoldProfile = read_json(profile)?;
            let label = profile.display().to_string();
            let v = engine.decide(&p, &label).map_err(engine_failure)?;
            verdict_out(ctx, &v)?;
            Ok(EXIT_OK)
        }
        RigidityCmd::Verify { id: Some(id), .. } => {
            let v = engine.verify_rigidity_theorem(id).map_err(engine_failure)?;
            verdict_out(ctx, &v)?;
            Ok(if v.status == Status::Rigid { EXIT_OK } else { EXIT_VERIFY_FAILED })
        }
        RigidityCmd::Verify { id: None, .. } => {
            let results: Vec<Result<RigidityVerdict, EngineError>> = Engine::covered_targets()
                .par_iter()
                .map(|id| engine.verify_rigidity_theorem(id))
                .collect();
            let verdicts = results.into_iter().collect::<Result<Vec<_>, _>>().map_err(engine_failure)?;
            let rigid = verdicts.iter().filter(|v| v.status == Status::Rigid).count();
            match ctx.format {
                Format::Text => {
                    for v in &verdicts {
                        writeln!(ctx.out, "{}", v.to_text()).map_err(io)?;
                    }
                    writeln!(ctx.out, "{rigid}/{} targets rigid", verdicts.len()).map_err(io)?;
                }
                Format::Json => {
                    writeln!(ctx.out, "{}", serde_json::to_string_pretty(&verdicts).map_err(data)?).map_err(io)?
                }
            }
            Ok(if rigid == verdicts.len() { EXIT_OK } else { EXIT_VERIFY_FAILED })
        }
    }
}

fn lemmas_cmd(ctx: &mut Ctx) -> Result<i32, Failure> {
    let reports = lemmas::run_all();
    let text = reports
        .iter()
        .map(|r| {
            format!(
                "{} {} ({} checked): {}",
                if r.passed { "PASS" } else { "FAIL" },
                r.name,
                r.checked,
                r.detail
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    ctx.emit(text, &reports)?;
    Ok(if reports.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

/// Convenience for tests and the acceptance harness: runs `args` and
/// returns `(exit code, stdout, stderr)`.
pub fn run_capture(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("dehn").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}

