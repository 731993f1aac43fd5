use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gga_core::analysis::{self, Verdict};
use gga_core::covering::CoveringTree;
use gga_core::scaffold::Scaffolding;
use gga_core::text::{self, Format};
use gga_core::universal::{self, Mode, UniversalElement};
use gga_core::{corpus, Gga};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gga", version, about = "Graphs of group actions: trees, scaffoldings and universal groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Truncation {
    /// Root vertex id of the base graph (default: first vertex).
    #[arg(long)]
    root: Option<String>,
    #[arg(long, default_value_t = 2)]
    radius: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Check the gga axioms and report every violation.
    Validate { file: String },
    /// Print the augmented base digraph as a table.
    Augment { file: String },
    /// Build the truncated covering tree.
    Tree {
        file: String,
        #[command(flatten)]
        at: Truncation,
        /// Write DOT to this path (`-` for stdout).
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Build the canonical scaffolding.
    Scaffold {
        file: String,
        #[command(flatten)]
        at: Truncation,
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Write the scaffolding in text form.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Enumerate the universal group on the truncation.
    Enumerate {
        file: String,
        #[command(flatten)]
        at: Truncation,
        /// Only elements fixing the root.
        #[arg(long)]
        stabilize_root: bool,
        #[arg(long, default_value_t = 1_000_000)]
        cap: usize,
        /// Skip the element table.
        #[arg(long)]
        summary: bool,
    },
    /// Compare the vertex orbits of the group with the base graph.
    Quotient {
        file: String,
        #[command(flatten)]
        at: Truncation,
    },
    /// Check a scaffolding file against a gga.
    CheckScaffolding { file: String, scaffolding: PathBuf },
    /// Restrict each vertex action to the union of its adhesion sets.
    Reduce {
        file: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Make every point lie in exactly one adhesion set.
    ArcReduce {
        file: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Replace self-reverse arcs by subdivision vertices.
    Subdivide {
        file: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Convert another input format to gga text.
    Convert {
        #[arg(long, value_enum)]
        from: InputFormat,
        file: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run one analysis.
    Analyze {
        #[arg(value_enum)]
        what: Analysis,
        file: String,
        #[command(flatten)]
        at: Truncation,
        #[arg(long, default_value_t = 1_000_000)]
        cap: usize,
    },
    /// Write a DOT picture.
    Render {
        file: String,
        #[arg(long, value_enum)]
        what: Picture,
        #[command(flatten)]
        at: Truncation,
        #[arg(long)]
        dot: PathBuf,
    },
    /// List the bundled examples, or print one.
    Corpus { name: Option<String> },
}

#[derive(Clone, Copy, ValueEnum)]
enum InputFormat {
    Bm,
    Box,
    Gog,
    Lad,
}

#[derive(Clone, Copy, ValueEnum)]
enum Analysis {
    P,
    Ipk,
    Subdeg,
    Parity,
    ConstantLocal,
}

#[derive(Clone, Copy, ValueEnum)]
enum Picture {
    Base,
    Augmented,
    Tree,
    Scaffold,
    Tplus,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// A path on disk, or else the name of a bundled example.
fn read_source(file: &str) -> Result<String> {
    let p = Path::new(file);
    if p.exists() {
        return std::fs::read_to_string(p).with_context(|| format!("reading {file}"));
    }
    match corpus::text(file) {
        Ok(t) => Ok(t.to_string()),
        Err(_) => bail!("no such file or bundled example: {file}"),
    }
}

fn load(file: &str) -> Result<Gga> {
    let g = text::parse_any(&read_source(file)?).with_context(|| format!("parsing {file}"))?;
    Ok(g)
}

fn load_valid(file: &str) -> Result<Gga> {
    let g = load(file)?;
    g.require_valid()?;
    Ok(g)
}

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(p) if p != Path::new("-") => {
            std::fs::write(p, content).with_context(|| format!("writing {}", p.display()))
        }
        _ => {
            print!("{content}");
            Ok(())
        }
    }
}

fn tree_at(g: &Gga, at: &Truncation) -> Result<CoveringTree> {
    let root = match &at.root {
        Some(id) => g.vertex_index(id)?,
        None => 0,
    };
    Ok(CoveringTree::build(g, root, at.radius)?)
}

fn scaffold_at(g: &Gga, at: &Truncation) -> Result<Scaffolding> {
    Ok(Scaffolding::canonical(g, &tree_at(g, at)?)?)
}

/// Full group when the tree is finite and complete, otherwise the root stabilizer.
fn elements(s: &Scaffolding, stabilize_root: bool, cap: usize) -> Result<(Mode, Vec<UniversalElement>)> {
    let mode = if stabilize_root || !s.tree().is_complete() { Mode::RootStabilizer } else { Mode::FullIfFinite };
    Ok((mode, universal::enumerate(s, mode, cap)?))
}

fn run(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Validate { file } => {
            let g = load(&file)?;
            let diags = g.validate();
            for d in &diags {
                println!("{d}");
            }
            if diags.is_empty() {
                println!("valid");
                Ok(0)
            } else {
                Ok(1)
            }
        }
        Command::Augment { file } => {
            let g = load_valid(&file)?;
            let aug = g.augmented();
            let base = g.base();
            println!("arc\tfrom\tto\tbase-arc\tadhesion\tgamma");
            for b in 0..aug.arc_count() {
                let t = aug.terminus(b);
                let act = g.vertex_action(t);
                let set: Vec<&str> = aug.adhesion[b].iter().map(|&x| act.points().name(x)).collect();
                println!(
                    "{}\t{}\t{}\t{}\t{{{}}}\t{}",
                    aug.arc_id(b),
                    base.vertex_id(aug.origin(b)),
                    base.vertex_id(t),
                    base.arc_id(aug.rho[b]),
                    set.join(" "),
                    act.fmt_element(&aug.transversal[b])
                );
            }
            Ok(0)
        }
        Command::Tree { file, at, dot } => {
            let g = load_valid(&file)?;
            let t = tree_at(&g, &at)?;
            if let Some(p) = dot {
                return emit(Some(&p), &t.to_dot(&g)).map(|_| 0);
            }
            println!(
                "vertices {}, edges {}, complete {}",
                t.vertex_count(),
                t.arc_count() / 2,
                t.is_complete()
            );
            for x in t.bfs_order() {
                println!("{}\tdepth {}\tlabel {}", t.vertex_id(x), t.depth(x), g.base().vertex_id(t.vertex_label(x)));
            }
            Ok(0)
        }
        Command::Scaffold { file, at, dot, output } => {
            let g = load_valid(&file)?;
            let s = scaffold_at(&g, &at)?;
            if let Some(p) = &dot {
                emit(Some(p), &s.to_dot())?;
            }
            if let Some(p) = &output {
                emit(Some(p), &s.to_text())?;
            }
            if dot.is_none() && output.is_none() {
                println!(
                    "tree vertices {}, scaffolding vertices {}, scaffolding edges {}",
                    s.tree().vertex_count(),
                    s.graph().vertex_count(),
                    s.graph().arc_count() / 2
                );
                for c in 0..s.tree().arc_count() {
                    if let Some((_, class)) = s.factor(c) {
                        println!("{}\t{class}", s.tree().arc_id(c));
                    }
                }
            }
            let diags = s.check();
            for d in &diags {
                eprintln!("{d}");
            }
            Ok(i32::from(!diags.is_empty()))
        }
        Command::Enumerate { file, at, stabilize_root, cap, summary } => {
            let g = load_valid(&file)?;
            let s = scaffold_at(&g, &at)?;
            let (mode, els) = elements(&s, stabilize_root, cap)?;
            println!(
                "mode {}",
                match mode {
                    Mode::FullIfFinite => "full",
                    Mode::RootStabilizer => "root-stabilizer",
                }
            );
            println!("{}", universal::group_summary(&els)?);
            let mut involutions = 0;
            for e in &els {
                if universal::element_order(e)? == 2 {
                    involutions += 1;
                }
            }
            println!("order {}, elements of order 2: {involutions}", els.len());
            if !summary {
                for (i, e) in els.iter().enumerate() {
                    println!("element {}", i + 1);
                    for line in universal::format_element(&s, &s, e).lines() {
                        println!("  {line}");
                    }
                }
            }
            Ok(0)
        }
        Command::Quotient { file, at } => {
            let g = load_valid(&file)?;
            let s = scaffold_at(&g, &at)?;
            let els = universal::orbit_witnesses(&s)?;
            let r = universal::quotient_check(&s, &els);
            let t = s.tree();
            for orbit in &r.vertex_orbits {
                let ids: Vec<&str> = orbit.iter().map(|&u| t.vertex_id(u)).collect();
                println!("orbit {}: {}", g.base().vertex_id(t.vertex_label(orbit[0])), ids.join(" "));
            }
            println!("orbits are fibres: {}", r.orbits_are_fibres);
            println!("quotient isomorphic to base: {}", r.isomorphic_to_base);
            let v = Verdict::of(r.holds());
            println!("[QUOTIENT] {v}");
            Ok(v.exit_code())
        }
        Command::CheckScaffolding { file, scaffolding } => {
            let g = load_valid(&file)?;
            let text = std::fs::read_to_string(&scaffolding)
                .with_context(|| format!("reading {}", scaffolding.display()))?;
            let s = Scaffolding::parse(&g, &text)?;
            let diags = s.check();
            for d in &diags {
                println!("{d}");
            }
            if diags.is_empty() {
                println!("valid");
            }
            Ok(i32::from(!diags.is_empty()))
        }
        Command::Reduce { file, output } => {
            let g = load_valid(&file)?;
            emit(output.as_deref(), &text::to_text(&g.reduce()?)).map(|_| 0)
        }
        Command::ArcReduce { file, output } => {
            let g = load_valid(&file)?;
            emit(output.as_deref(), &text::to_text(&g.arc_reduce()?)).map(|_| 0)
        }
        Command::Subdivide { file, output } => {
            let g = load_valid(&file)?;
            let (h, _) = g.subdivide_self_reverse()?;
            emit(output.as_deref(), &text::to_text(&h)).map(|_| 0)
        }
        Command::Convert { from, file, output } => {
            let src = read_source(&file)?;
            let want = match from {
                InputFormat::Bm => Format::Bm,
                InputFormat::Box => Format::Box,
                InputFormat::Gog => Format::Gog,
                InputFormat::Lad => Format::Lad,
            };
            let got = text::detect_format(&src)?;
            if got != want {
                bail!("{file} is a `{}` document, not `{}`", got.name(), want.name());
            }
            let g = text::parse_any(&src)?;
            g.require_valid()?;
            emit(output.as_deref(), &text::to_text(&g)).map(|_| 0)
        }
        Command::Analyze { what, file, at, cap } => {
            let g = load_valid(&file)?;
            analyze(what, &g, &at, cap).map(Verdict::exit_code)
        }
        Command::Render { file, what, at, dot } => {
            let g = load_valid(&file)?;
            let out = match what {
                Picture::Base => g.base().to_dot(g.name()),
                Picture::Augmented => {
                    let aug = g.augmented();
                    let labels: Vec<String> = (0..aug.arc_count())
                        .map(|b| {
                            let act = g.vertex_action(aug.terminus(b));
                            let set: Vec<&str> = aug.adhesion[b].iter().map(|&x| act.points().name(x)).collect();
                            format!("{{{}}}", set.join(" "))
                        })
                        .collect();
                    aug.plus.to_dot(g.name(), Some(&labels))
                }
                Picture::Tree => tree_at(&g, &at)?.to_dot(&g),
                Picture::Scaffold => scaffold_at(&g, &at)?.to_dot(),
                Picture::Tplus => scaffold_at(&g, &at)?.collapse_to_t_plus()?.graph.to_dot(g.name()),
            };
            emit(Some(&dot), &out).map(|_| 0)
        }
        Command::Corpus { name } => {
            match name {
                Some(n) => print!("{}", corpus::text(&n)?),
                None => {
                    for (f, _) in corpus::FILES {
                        println!("{f}");
                    }
                }
            }
            Ok(0)
        }
    }
}

fn analyze(what: Analysis, g: &Gga, at: &Truncation, cap: usize) -> Result<Verdict> {
    match what {
        Analysis::Subdeg => {
            let r = analysis::subdegree_report(g)?;
            for l in &r.lines {
                println!("[SUBDEG] {l}");
            }
            println!("[SUBDEG] tree subdegrees finite: {}", Verdict::of(r.tree_finite));
            println!("[SUBDEG] scaffolding subdegrees finite: {}", Verdict::of(r.scaffolding_finite));
            let v = Verdict::of(r.tree_finite && r.scaffolding_finite);
            println!("[SUBDEG] {v}");
            Ok(v)
        }
        Analysis::P => {
            let s = scaffold_at(g, at)?;
            let (_, els) = elements(&s, false, cap)?;
            let t = s.tree();
            let paths = analysis::interior_paths_through_root(&s);
            let mut v = if paths.is_empty() { Verdict::Undecided } else { Verdict::Pass };
            for path in &paths {
                let r = analysis::property_p_check(&s, &els, path);
                let ids: Vec<&str> = path.iter().map(|&u| t.vertex_id(u)).collect();
                println!(
                    "[P] {} path {} fixator {} product {}",
                    r.verdict,
                    ids.join(" - "),
                    r.fixator_size,
                    r.product_size
                );
                if let Some((u, _)) = &r.counterexample {
                    println!("[P] unrealized branch action at {}", t.vertex_id(*u));
                }
                v = v.and(r.verdict);
            }
            println!("[P] {v}");
            Ok(v)
        }
        Analysis::Ipk => {
            let s = scaffold_at(g, at)?;
            let (_, els) = elements(&s, false, cap)?;
            let t = s.tree();
            let root = t.root();
            let arcs: Vec<usize> = (0..t.arc_count()).filter(|&c| t.graph().terminus(c) == root).collect();
            let mut v = if arcs.is_empty() { Verdict::Undecided } else { Verdict::Pass };
            for c in arcs {
                let chain = analysis::ipk_detect(&s, &els, c, at.radius.max(1))?;
                let sizes: Vec<String> = chain.chain.iter().map(|h| h.len().to_string()).collect();
                let k = chain.k.map_or("-".to_string(), |k| k.to_string());
                println!("[IPK] {} arc {} chain {} k {}", chain.verdict(), t.arc_id(c), sizes.join(","), k);
                v = v.and(chain.verdict());
            }
            println!("[IPK] {v}");
            Ok(v)
        }
        Analysis::Parity => {
            let s = scaffold_at(g, at)?;
            let (_, els) = elements(&s, false, cap)?;
            let signs = analysis::parities_present(&els, s.tree().root());
            let names: Vec<&str> = signs.iter().map(|&e| if e { "even" } else { "odd" }).collect();
            println!("[PARITY] elements {}, root parities {}", els.len(), names.join(" "));
            let v = Verdict::of(analysis::parity_check(&els));
            println!("[PARITY] {v}");
            Ok(v)
        }
        Analysis::ConstantLocal => {
            let s = scaffold_at(g, at)?;
            let (_, els) = elements(&s, false, cap)?;
            let reg = analysis::regularity_check(&s, &els, true)?;
            println!(
                "[CONST] trivial-local elements: nontrivial root stabilizer {}, reached {}/{}",
                reg.nontrivial_stabilizer, reg.reached, reg.targets
            );
            let v = Verdict::of(analysis::constant_local_action_check(&els));
            println!("[CONST] {v}");
            Ok(v)
        }
    }
}
