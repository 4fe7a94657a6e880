use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use motivic_ext::chart::render;
use motivic_ext::fixtures::{builtin_names, builtin_text, named_chart, parse_fixture, ring_for, verify, Report};
use motivic_ext::hfpss::{e_infinity, einfty_report, CoeffRing, Window};
use motivic_ext::modules::{builtin, parse_module, validate, SteenrodModule};
use motivic_ext::products::{presentation, product_edges, ModuleExt, Ring};
use motivic_ext::resolution::{ext_chart, resolve, Tri};
use motivic_ext::steenrod::{algebra, SubalgebraId};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "motivic-ext",
    version,
    about = "Ext over A(1) and the Z/2 homotopy fixed point spectral sequence"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct ModuleArgs {
    /// `builtin:NAME`, a builtin name such as `DQ(14)`, or a module file.
    #[arg(long)]
    module: String,
    #[arg(long, default_value_t = 12)]
    smax: usize,
    #[arg(long, default_value_t = 36)]
    tmax: i32,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the normal-form basis of an algebra.
    Basis {
        #[arg(long, default_value = "A1")]
        algebra: String,
    },
    /// Compute a minimal resolution.
    Resolve {
        #[command(flatten)]
        m: ModuleArgs,
        /// `text` or `json`
        #[arg(long, default_value = "text")]
        out: String,
    },
    /// Print Ext, optionally with products and the presentation.
    Ext {
        #[command(flatten)]
        m: ModuleArgs,
        #[arg(long)]
        products: bool,
        #[arg(long)]
        presentation: bool,
        #[arg(long)]
        json: bool,
    },
    /// Draw the Ext chart.
    Chart {
        #[command(flatten)]
        m: ModuleArgs,
        #[arg(long, default_value = "ascii")]
        format: String,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pages of the homotopy fixed point spectral sequence.
    Hfpss {
        /// `KGL` or `kgl`
        #[arg(long, default_value = "KGL")]
        ring: String,
        /// `n_lo,n_hi,p_max`
        #[arg(long, default_value = "-10,10,9", allow_hyphen_values = true)]
        window: String,
        /// `report`, `ascii`, `svg` or `json`
        #[arg(long, default_value = "report")]
        format: String,
        /// `e2`, `e4` or `einf` (ignored for `report`)
        #[arg(long, default_value = "einf")]
        page: String,
    },
    /// Check computed results against the embedded fixtures.
    Verify {
        /// Fixture name or `all`.
        #[arg(long, default_value = "all")]
        fixture: String,
        /// Verify a fixture file instead.
        #[arg(long)]
        fixture_file: Option<PathBuf>,
        /// Also print the computed presentation or page report.
        #[arg(long)]
        verbose: bool,
    },
}

/// Write to stdout; a closed pipe (`| head`) ends the program quietly.
fn emit(s: &str) {
    use std::io::Write;
    if let Err(e) = std::io::stdout().lock().write_all(s.as_bytes()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: writing output: {e}");
        std::process::exit(2);
    }
}

macro_rules! out {
    ($($t:tt)*) => { emit(&format!($($t)*)) };
}

macro_rules! outln {
    ($($t:tt)*) => { emit(&(format!($($t)*) + "\n")) };
}

/// Input problems exit with 2, failed checks with 1.
struct Failed;

fn load_module(spec: &str, t_max: i32) -> Result<SteenrodModule> {
    let name = spec.strip_prefix("builtin:").unwrap_or(spec);
    if spec.starts_with("builtin:") || !std::path::Path::new(spec).exists() {
        return builtin(name, t_max).with_context(|| format!("module {spec}"));
    }
    let text = std::fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
    let m = parse_module(&text).with_context(|| format!("parsing {spec}"))?;
    let v = validate(&m);
    if !v.ok() {
        bail!("{spec} is not a module:\n  {}", v.failures.join("\n  "));
    }
    Ok(m)
}

#[derive(Serialize)]
struct StageJson {
    s: usize,
    generators: Vec<[i32; 2]>,
}

#[derive(Serialize)]
struct ResolutionJson {
    module: String,
    s_max: usize,
    t_max: i32,
    valid_t: i32,
    stages: Vec<StageJson>,
}

fn cmd_resolve(m: &ModuleArgs, out: &str) -> Result<()> {
    let module = load_module(&m.module, m.tmax)?;
    let r = resolve(&module, m.smax, m.tmax)?;
    let stages: Vec<StageJson> = r
        .stages
        .iter()
        .take(m.smax + 1)
        .map(|st| StageJson {
            s: st.s,
            generators: st.gens.iter().map(|g| [g.degree.a, g.degree.b]).collect(),
        })
        .collect();
    match out {
        "json" => {
            let j = ResolutionJson {
                module: module.name.clone(),
                s_max: r.s_max,
                t_max: r.t_max,
                valid_t: r.valid_t,
                stages,
            };
            outln!("{}", serde_json::to_string_pretty(&j)?);
        }
        "text" => {
            outln!(
                "# {} resolved to s = {}, certified through a = {}",
                module.name,
                r.s_max,
                r.valid_t
            );
            for st in &stages {
                let gens: Vec<String> = st.generators.iter().map(|g| format!("({},{})", g[0], g[1])).collect();
                outln!("F{}: {}", st.s, gens.join(" "));
            }
        }
        o => bail!("unknown output format {o}"),
    }
    Ok(())
}

fn cmd_ext(m: &ModuleArgs, products: bool, pres: bool, json: bool) -> Result<()> {
    let module = load_module(&m.module, m.tmax)?;
    if !products && !pres {
        let r = resolve(&module, m.smax, m.tmax)?;
        let chart = ext_chart(&r);
        if json {
            outln!("{}", chart.to_json());
        } else {
            outln!("# Ext({}) for s <= {}, a <= {}", module.name, r.s_max, r.valid_t);
            for c in &chart.cells {
                let tors: Vec<String> = c.torsion.iter().map(|k| format!("M2/tau^{k}")).collect();
                let mut parts = Vec::new();
                if c.free > 0 {
                    parts.push(format!("M2^{}", c.free));
                }
                parts.extend(tors);
                outln!("({},{},{}) {}", c.n, c.s, c.w, parts.join(" + "));
            }
        }
        return Ok(());
    }
    let ring = ring_for(m.smax, m.tmax, module.min_degree().unwrap_or(0)).map_err(|e| anyhow!(e))?;
    let mut me = ModuleExt::new(&module, m.smax, m.tmax, &ring)?;
    if products {
        let names = generator_names(&ring, &mut me)?;
        let chart = named_chart(&ring, &mut me, &names).map_err(|e| anyhow!(e))?;
        if json {
            outln!("{}", chart.to_json());
        } else {
            for e in product_edges(&ring, &mut me)? {
                let tau = if e.tau > 0 {
                    format!("tau^{} ", e.tau)
                } else {
                    String::new()
                };
                outln!(
                    "{} ({},{},{})[{}] = {tau}({},{},{})[{}]",
                    e.op,
                    e.from[0],
                    e.from[1],
                    e.from[2],
                    e.from[3],
                    e.to[0],
                    e.to[1],
                    e.to[2],
                    e.to[3]
                );
            }
        }
    }
    if pres {
        let p = presentation(&ring, &mut me, &|_| None)?;
        if json {
            outln!("{}", p.to_json());
        } else {
            out!("{}", p.to_text());
        }
    }
    Ok(())
}

/// Names of the presentation generators, by tridegree.
fn generator_names(ring: &Ring, me: &mut ModuleExt) -> Result<BTreeMap<Tri, String>> {
    let p = presentation(ring, me, &|_| None)?;
    let mut names: BTreeMap<Tri, String> = p.generators.iter().map(|g| ((g.n, g.s, g.w), g.name.clone())).collect();
    if p.module == "M2" {
        names.insert((0, 0, 0), "1".into());
    }
    Ok(names)
}

fn cmd_chart(m: &ModuleArgs, format: &str, out: Option<&PathBuf>) -> Result<()> {
    let module = load_module(&m.module, m.tmax)?;
    let bottom = module.min_degree().unwrap_or(0);
    let r = resolve(&module, m.smax, m.tmax)?;
    // Products need the ring's resolution; skip them when nothing is certified.
    let chart = if r.valid_t < bottom {
        ext_chart(&r)
    } else {
        let ring = ring_for(m.smax, m.tmax, bottom).map_err(|e| anyhow!(e))?;
        let mut me = ModuleExt::new(&module, m.smax, m.tmax, &ring)?;
        let names = generator_names(&ring, &mut me)?;
        named_chart(&ring, &mut me, &names).map_err(|e| anyhow!(e))?
    };
    let text = render(&chart, format)?;
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => out!("{text}"),
    }
    Ok(())
}

fn parse_window(s: &str) -> Result<Window> {
    let v: Vec<i32> = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| anyhow!("bad window {s}: expected n_lo,n_hi,p_max"))
        })
        .collect::<Result<_>>()?;
    let [n_lo, n_hi, p_max] = v[..] else {
        bail!("bad window {s}: expected n_lo,n_hi,p_max");
    };
    Ok(Window {
        n_lo,
        n_hi,
        p_max,
        ..Window::default()
    })
}

fn cmd_hfpss(ring: &str, window: &str, format: &str, page: &str) -> Result<()> {
    let window = parse_window(window)?;
    let coeff: CoeffRing = ring.parse()?;
    if format == "report" {
        let spectrum = match coeff {
            CoeffRing::Kgl => "KO",
            CoeffRing::Connective => "kgl",
        };
        out!("{}", einfty_report(spectrum, window)?.to_text());
        return Ok(());
    }
    let (e2, e4, einf) = e_infinity(coeff, window)?;
    let p = match page {
        "e2" => e2,
        "e4" => e4,
        "einf" => einf,
        x => bail!("unknown page {x}: use e2, e4 or einf"),
    };
    match format {
        "json" => outln!("{}", p.to_json()),
        "ascii" => out!("{}", motivic_ext::chart::render_ascii(&p.drawing())),
        "svg" => out!("{}", motivic_ext::chart::render_svg(&p.drawing())),
        f => bail!("unknown format {f}"),
    }
    Ok(())
}

fn thread_count() -> usize {
    std::env::var("MOTIVIC_EXT_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n: &usize| n >= 1)
        .unwrap_or(1)
}

fn cmd_verify(fixture: &str, file: Option<&PathBuf>, verbose: bool) -> Result<std::result::Result<(), Failed>> {
    let fixtures = match file {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            vec![parse_fixture(&text)?]
        }
        None if fixture == "all" => builtin_names()
            .into_iter()
            .map(|n| parse_fixture(builtin_text(n).expect("listed")))
            .collect::<std::result::Result<_, _>>()?,
        None => {
            let text = builtin_text(fixture)
                .ok_or_else(|| anyhow!("unknown fixture {fixture}; known: {}", builtin_names().join(", ")))?;
            vec![parse_fixture(text)?]
        }
    };
    let threads = thread_count().min(fixtures.len()).max(1);
    let mut reports: Vec<Option<Report>> = vec![None; fixtures.len()];
    std::thread::scope(|sc| {
        let chunks: Vec<_> = reports.chunks_mut(fixtures.len().div_ceil(threads)).collect();
        let mut start = 0;
        for chunk in chunks {
            let fx = &fixtures[start..start + chunk.len()];
            start += chunk.len();
            sc.spawn(move || {
                for (slot, f) in chunk.iter_mut().zip(fx) {
                    *slot = Some(verify(f));
                }
            });
        }
    });
    let mut all_ok = true;
    for r in reports.into_iter().flatten() {
        out!("{}", r.to_text());
        if verbose && !r.detail.is_empty() {
            outln!("{}", r.detail.trim_end());
        }
        all_ok &= r.ok();
    }
    Ok(if all_ok { Ok(()) } else { Err(Failed) })
}

fn cmd_basis(name: &str) -> Result<()> {
    let id: SubalgebraId = name.parse()?;
    let t = algebra(id);
    for m in &t.basis {
        let word = if m.name.is_empty() { "1" } else { &m.name };
        outln!("{word} {}", m.degree);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<std::result::Result<(), Failed>> {
    match &cli.cmd {
        Cmd::Basis { algebra } => cmd_basis(algebra)?,
        Cmd::Resolve { m, out } => cmd_resolve(m, out)?,
        Cmd::Ext {
            m,
            products,
            presentation,
            json,
        } => cmd_ext(m, *products, *presentation, *json)?,
        Cmd::Chart { m, format, out } => cmd_chart(m, format, out.as_ref())?,
        Cmd::Hfpss {
            ring,
            window,
            format,
            page,
        } => cmd_hfpss(ring, window, format, page)?,
        Cmd::Verify {
            fixture,
            fixture_file,
            verbose,
        } => return cmd_verify(fixture, fixture_file.as_ref(), *verbose),
    }
    Ok(Ok(()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failed)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
