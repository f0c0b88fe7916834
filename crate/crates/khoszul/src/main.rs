//! Command-line front end: Khovanov homology, pointed variants, Koszul
//! homology of the basepoint action, the filtration spectral sequence,
//! and the instanton-dimension inequality harness.
//!
//! JSON reports go to stdout; human-readable tables to stderr.
//! Exit codes: 0 success, 1 violated verification, 2 input error,
//! 3 internal invariant failure.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use khoszul::catalog;
use khoszul::cube::{self, KhovanovCube};
use khoszul::error::KhError;
use khoszul::field::{PrimeField, Rationals};
use khoszul::group::{change_coefficients, Coefficients, Invariants};
use khoszul::koszul;
use khoszul::link::{LinkDiagram, Marking};
use khoszul::pointed::{self, Variant};
use khoszul::report::{render_table, Report, Timings};
use khoszul::ss;

#[derive(Parser)]
#[command(
    name = "khoszul",
    version,
    about = "Khovanov homology, pointed variants, Koszul complexes, and their spectral sequences"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Suppress the human-readable table on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    /// Omit wall-clock timings from the JSON report.
    #[arg(long, global = true)]
    no_timings: bool,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// PD code, e.g. "X[1,3,2,4] X[3,1,4,2]", or the JSON diagram form.
    #[arg(long)]
    pd: Option<String>,
    /// Braid word over s1..s(k-1); inverses as -s1.
    #[arg(long)]
    braid: Option<String>,
    /// Strand count for --braid.
    #[arg(long)]
    strands: Option<usize>,
    /// Catalog link name (e.g. unknot, unlink:2, hopf, trefoil).
    #[arg(long)]
    link: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Khovanov homology of a link diagram.
    Kh {
        #[command(flatten)]
        input: InputArgs,
        /// Coefficients: Z, Q, F2, F3, F5, or Zhalf.
        #[arg(long, default_value = "Z")]
        coeff: String,
        /// Compute the reduced homology (requires --basepoint).
        #[arg(long)]
        reduced: bool,
        /// Basepoint as arc or arc:offset.
        #[arg(long)]
        basepoint: Option<String>,
    },
    /// Pointed homology: exterior algebra on markings tensored in.
    Pointed {
        #[command(flatten)]
        input: InputArgs,
        /// Markings as arc:offset[,arc:offset...] or one-per-component.
        #[arg(long)]
        points: String,
        /// standard (X) or doubled (2X) differential.
        #[arg(long, default_value = "standard")]
        variant: String,
        #[arg(long, default_value = "Z")]
        coeff: String,
        #[arg(long)]
        reduced: bool,
        #[arg(long)]
        basepoint: Option<String>,
    },
    /// Koszul homology of the marking operators acting on homology.
    Koszul {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        points: String,
        #[arg(long)]
        reduced: bool,
        #[arg(long)]
        basepoint: Option<String>,
    },
    /// Spectral sequence of the exterior-degree filtration (field only).
    Ss {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        points: String,
        #[arg(long, default_value = "standard")]
        variant: String,
        #[arg(long, default_value = "Q")]
        coeff: String,
    },
    /// Check the instanton-dimension inequalities on a catalog link.
    Verify {
        /// Catalog link name.
        #[arg(long)]
        link: String,
        /// Externally sourced KHI dimension override.
        #[arg(long)]
        khi_dim: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    check_thread_env();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                KhError::Parse(_) | KhError::Validation(_) => 2,
                KhError::Internal(_) => 3,
            };
            ExitCode::from(code)
        }
    }
}

/// `KHOSZUL_THREADS` caps internal parallelism; the pipeline currently
/// runs on one thread, which satisfies any positive cap.
fn check_thread_env() {
    if let Ok(v) = std::env::var("KHOSZUL_THREADS") {
        if v.parse::<usize>().map(|n| n >= 1) != Ok(true) {
            eprintln!("warning: ignoring invalid KHOSZUL_THREADS={v}");
        }
    }
}

fn run(cli: &Cli) -> Result<u8, KhError> {
    let mut timings = Timings::new(!cli.no_timings);
    match &cli.cmd {
        Cmd::Kh { input, coeff, reduced, basepoint } => {
            cmd_kh(cli, input, coeff, *reduced, basepoint.as_deref(), &mut timings)
        }
        Cmd::Pointed { input, points, variant, coeff, reduced, basepoint } => cmd_pointed(
            cli,
            input,
            points,
            variant,
            coeff,
            *reduced,
            basepoint.as_deref(),
            &mut timings,
        ),
        Cmd::Koszul { input, points, reduced, basepoint } => {
            cmd_koszul(cli, input, points, *reduced, basepoint.as_deref(), &mut timings)
        }
        Cmd::Ss { input, points, variant, coeff } => {
            cmd_ss(cli, input, points, variant, coeff, &mut timings)
        }
        Cmd::Verify { link, khi_dim } => cmd_verify(cli, link, *khi_dim, &mut timings),
    }
}

// ---------------------------------------------------------------------
// shared input handling

fn resolve_diagram(input: &InputArgs, report: &mut Report) -> Result<LinkDiagram, KhError> {
    let sources =
        [input.pd.is_some(), input.braid.is_some(), input.link.is_some()].iter().filter(|b| **b).count();
    if sources != 1 {
        return Err(KhError::Parse("provide exactly one of --pd, --braid, --link".into()));
    }
    if let Some(pd) = &input.pd {
        report.echo("pd", pd);
        return LinkDiagram::parse_pd(pd);
    }
    if let Some(braid) = &input.braid {
        let strands = input
            .strands
            .ok_or_else(|| KhError::Parse("--braid requires --strands".into()))?;
        report.echo("braid", braid);
        report.echo("strands", strands);
        return LinkDiagram::parse_braid(braid, strands);
    }
    let name = input.link.as_deref().unwrap();
    report.echo("link", name);
    catalog::lookup(name)?.diagram()
}

fn parse_point(text: &str) -> Result<Marking, KhError> {
    let mut parts = text.split(':');
    let arc = parts
        .next()
        .unwrap()
        .trim()
        .parse::<usize>()
        .map_err(|_| KhError::Parse(format!("bad marking `{text}` (want arc or arc:offset)")))?;
    let offset = match parts.next() {
        Some(o) => o
            .trim()
            .parse::<usize>()
            .map_err(|_| KhError::Parse(format!("bad marking offset in `{text}`")))?,
        None => 0,
    };
    if parts.next().is_some() {
        return Err(KhError::Parse(format!("bad marking `{text}`")));
    }
    Ok(Marking { arc, offset })
}

fn parse_points(text: &str, d: &LinkDiagram) -> Result<Vec<Marking>, KhError> {
    if text.trim() == "one-per-component" {
        return Ok(catalog::one_per_component(d));
    }
    text.split(',').map(parse_point).collect()
}

fn with_points(
    d: LinkDiagram,
    points: &str,
    basepoint: Option<&str>,
    report: &mut Report,
) -> Result<LinkDiagram, KhError> {
    let markings = parse_points(points, &d)?;
    let bp = basepoint.map(parse_point).transpose()?;
    report.echo("points", markings.iter().map(|m| format!("{}:{}", m.arc, m.offset)).collect::<Vec<_>>());
    if let Some(b) = &bp {
        report.echo("basepoint", format!("{}:{}", b.arc, b.offset));
    }
    d.with_markings(markings, bp)
}

fn invariants_json(inv: &Invariants) -> serde_json::Value {
    json!({
        "rank": inv.free_rank,
        "torsion": inv.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        "display": inv.display(),
    })
}

fn emit(cli: &Cli, report: &Report, table: String) {
    if !cli.quiet && !table.is_empty() {
        eprint!("{table}");
    }
    println!("{}", report.to_json());
}

// ---------------------------------------------------------------------
// kh

fn kh_graded(
    d: &LinkDiagram,
    reduced: bool,
) -> Result<(KhovanovCube, khoszul::complex::GradedComplex), KhError> {
    let cube = KhovanovCube::build(d)?;
    let graded = if reduced {
        cube::reduced_complex(&cube)?.graded
    } else {
        cube.graded.clone()
    };
    Ok((cube, graded))
}

fn cmd_kh(
    cli: &Cli,
    input: &InputArgs,
    coeff: &str,
    reduced: bool,
    basepoint: Option<&str>,
    timings: &mut Timings,
) -> Result<u8, KhError> {
    let mut report = Report::new("kh");
    let c = Coefficients::parse(coeff)?;
    report.echo("coeff", coeff);
    report.echo("reduced", reduced);
    let mut d = resolve_diagram(input, &mut report)?;
    if reduced {
        let bp = basepoint
            .ok_or_else(|| KhError::Parse("--reduced requires --basepoint".into()))?;
        d = d.with_markings(vec![], Some(parse_point(bp)?))?;
        report.echo("basepoint", bp);
    }
    let (_cube, graded) = kh_graded(&d, reduced)?;
    timings.mark("build");

    let mut rows = vec![];
    let results = match c {
        Coefficients::Rationals | Coefficients::PrimeField(_) => {
            let dims = match c {
                Coefficients::Rationals => cube::homology_field(&graded, &Rationals),
                Coefficients::PrimeField(p) => cube::homology_field(&graded, &PrimeField(p)),
                _ => unreachable!(),
            };
            let total: usize = dims.values().sum();
            let entries: Vec<_> = dims
                .iter()
                .map(|(&(i, j), &dim)| {
                    rows.push(vec![i.to_string(), j.to_string(), format!("dim {dim}")]);
                    json!({"i": i, "j": j, "dim": dim})
                })
                .collect();
            json!({"coefficients": coeff, "dims": entries, "total_dim": total})
        }
        Coefficients::Integers | Coefficients::LocalAwayTwo => {
            let h = cube::homology_integral(&graded)?;
            let mut entries = vec![];
            let mut total_rank = 0usize;
            let mut torsion: Vec<String> = vec![];
            for (&(i, j), g) in &h.groups {
                let inv = match c {
                    Coefficients::Integers => g.invariants.clone(),
                    _ => {
                        let sr = change_coefficients(&g.invariants, &c);
                        Invariants { free_rank: sr.rank, torsion: sr.torsion }
                    }
                };
                if inv.is_trivial() {
                    continue;
                }
                total_rank += inv.free_rank;
                torsion.extend(inv.torsion.iter().map(|t| t.to_string()));
                rows.push(vec![i.to_string(), j.to_string(), inv.display()]);
                entries.push(json!({"i": i, "j": j, "group": invariants_json(&inv)}));
            }
            torsion.sort();
            json!({
                "coefficients": coeff,
                "groups": entries,
                "total_free_rank": total_rank,
                "torsion_divisors": torsion,
            })
        }
    };
    timings.mark("homology");

    report.results = results;
    std::mem::replace(timings, Timings::new(false)).finish(&mut report);
    emit(cli, &report, render_table(&["i", "j", "group"], &rows));
    Ok(0)
}

// ---------------------------------------------------------------------
// pointed

#[allow(clippy::too_many_arguments)]
fn cmd_pointed(
    cli: &Cli,
    input: &InputArgs,
    points: &str,
    variant: &str,
    coeff: &str,
    reduced: bool,
    basepoint: Option<&str>,
    timings: &mut Timings,
) -> Result<u8, KhError> {
    let mut report = Report::new("pointed");
    let var = Variant::parse(variant)?;
    let c = Coefficients::parse(coeff)?;
    report.echo("variant", variant);
    report.echo("coeff", coeff);
    report.echo("reduced", reduced);
    let d = resolve_diagram(input, &mut report)?;
    let d = with_points(d, points, basepoint, &mut report)?;
    if reduced && d.basepoint().is_none() {
        return Err(KhError::Parse("--reduced requires --basepoint".into()));
    }
    let build = if reduced {
        pointed::build_reduced_pointed(&d, var)?
    } else {
        pointed::build_pointed(&d, var)?
    };
    timings.mark("build");
    let pc = &build.pointed;

    let chain_dims: Vec<_> = pc
        .chain_dims()
        .iter()
        .map(|(&(k, t), &dim)| json!({"k": k, "t": t, "dim": dim}))
        .collect();

    let mut rows = vec![];
    let degrees: Vec<i64> = pc.complex.degrees().collect();
    let results = match c {
        Coefficients::Rationals | Coefficients::PrimeField(_) => {
            let mut entries = vec![];
            let mut total = 0usize;
            for &t in &degrees {
                let dim = match c {
                    Coefficients::Rationals => pc.complex.homology_dim_field(&Rationals, t),
                    Coefficients::PrimeField(p) => pc.complex.homology_dim_field(&PrimeField(p), t),
                    _ => unreachable!(),
                };
                if dim > 0 {
                    rows.push(vec![t.to_string(), format!("dim {dim}")]);
                    entries.push(json!({"t": t, "dim": dim}));
                    total += dim;
                }
            }
            json!({
                "coefficients": coeff,
                "variant": variant,
                "reduced": reduced,
                "dims": entries,
                "total_dim": total,
                "chain_dims": chain_dims,
            })
        }
        Coefficients::Integers | Coefficients::LocalAwayTwo => {
            let mut entries = vec![];
            let mut total_rank = 0usize;
            let mut torsion = vec![];
            for &t in &degrees {
                let (g, _) = pc.complex.homology(t)?;
                let inv = match c {
                    Coefficients::Integers => g.invariants,
                    _ => {
                        let sr = change_coefficients(&g.invariants, &c);
                        Invariants { free_rank: sr.rank, torsion: sr.torsion }
                    }
                };
                if inv.is_trivial() {
                    continue;
                }
                total_rank += inv.free_rank;
                torsion.extend(inv.torsion.iter().map(|t| t.to_string()));
                rows.push(vec![t.to_string(), inv.display()]);
                entries.push(json!({"t": t, "group": invariants_json(&inv)}));
            }
            torsion.sort();
            json!({
                "coefficients": coeff,
                "variant": variant,
                "reduced": reduced,
                "groups": entries,
                "total_free_rank": total_rank,
                "torsion_divisors": torsion,
                "chain_dims": chain_dims,
            })
        }
    };
    timings.mark("homology");

    report.results = results;
    std::mem::replace(timings, Timings::new(false)).finish(&mut report);
    emit(cli, &report, render_table(&["t", "group"], &rows));
    Ok(0)
}

// ---------------------------------------------------------------------
// koszul

/// The homology module (full or reduced) with its induced marking
/// endomorphisms, run through the Koszul construction.
fn koszul_of_diagram(d: &LinkDiagram, reduced: bool) -> Result<(usize, Vec<Invariants>), KhError> {
    let cube = KhovanovCube::build(d)?;
    let (graded, ops) = if reduced {
        let red = cube::reduced_complex(&cube)?;
        let ops = (0..d.markings().len())
            .map(|mi| {
                let full = cube::basepoint_operator(&cube, mi)?.op;
                cube::restrict_operator(&cube.graded, &red.kept, &full)
            })
            .collect::<Result<Vec<_>, _>>()?;
        (red.graded, ops)
    } else {
        let ops = (0..d.markings().len())
            .map(|mi| cube::basepoint_operator(&cube, mi).map(|b| b.op))
            .collect::<Result<Vec<_>, _>>()?;
        (cube.graded.clone(), ops)
    };
    let h = cube::homology_integral(&graded)?;
    let module = cube::homology_module(&graded, &h, &ops)?;
    let kc = koszul::koszul(&module.total, &module.endos)?;
    let homs = kc.homology_all()?;
    let module_rank = module.total.invariants().free_rank;
    let _ = module_rank;
    Ok((h.total_free_rank(), homs))
}

fn cmd_koszul(
    cli: &Cli,
    input: &InputArgs,
    points: &str,
    reduced: bool,
    basepoint: Option<&str>,
    timings: &mut Timings,
) -> Result<u8, KhError> {
    let mut report = Report::new("koszul");
    report.echo("reduced", reduced);
    let d = resolve_diagram(input, &mut report)?;
    let d = with_points(d, points, basepoint, &mut report)?;
    if d.markings().is_empty() {
        return Err(KhError::Parse("koszul needs at least one marking (--points)".into()));
    }
    if reduced && d.basepoint().is_none() {
        return Err(KhError::Parse("--reduced requires --basepoint".into()));
    }
    let (module_rank, homs) = koszul_of_diagram(&d, reduced)?;
    timings.mark("koszul");

    let mut rows = vec![];
    let mut total_rank = 0usize;
    let entries: Vec<_> = homs
        .iter()
        .enumerate()
        .map(|(k, inv)| {
            total_rank += inv.free_rank;
            rows.push(vec![k.to_string(), inv.display()]);
            json!({"k": k, "group": invariants_json(inv)})
        })
        .collect();
    report.results = json!({
        "module_free_rank": module_rank,
        "exterior": entries,
        "total_z_rank": total_rank,
    });
    std::mem::replace(timings, Timings::new(false)).finish(&mut report);
    emit(cli, &report, render_table(&["k", "group"], &rows));
    Ok(0)
}

// ---------------------------------------------------------------------
// ss

fn cmd_ss(
    cli: &Cli,
    input: &InputArgs,
    points: &str,
    variant: &str,
    coeff: &str,
    timings: &mut Timings,
) -> Result<u8, KhError> {
    let mut report = Report::new("ss");
    let var = Variant::parse(variant)?;
    let c = Coefficients::parse(coeff)?;
    if !c.is_field() {
        return Err(KhError::Parse(format!(
            "spectral sequence needs field coefficients (Q, F2, F3, F5), got {coeff}"
        )));
    }
    report.echo("variant", variant);
    report.echo("coeff", coeff);
    let d = resolve_diagram(input, &mut report)?;
    let d = with_points(d, points, None, &mut report)?;
    let build = pointed::build_pointed(&d, var)?;
    timings.mark("build");

    let (sequence, conv) = match c {
        Coefficients::Rationals => {
            let f = Rationals;
            let s = ss::filtration_ss(&f, &build.pointed)?;
            let cv = ss::verify_convergence(&f, &build, &s)?;
            (s, cv)
        }
        Coefficients::PrimeField(p) => {
            let f = PrimeField(p);
            let s = ss::filtration_ss(&f, &build.pointed)?;
            let cv = ss::verify_convergence(&f, &build, &s)?;
            (s, cv)
        }
        _ => unreachable!(),
    };
    timings.mark("pages");

    let mut rows = vec![];
    let pages: Vec<_> = sequence
        .pages
        .iter()
        .map(|p| {
            for (&(fp, t), &dim) in &p.entries {
                rows.push(vec![p.r.to_string(), fp.to_string(), t.to_string(), dim.to_string()]);
            }
            json!({
                "r": p.r,
                "final": p.is_final,
                "entries": p.entries.iter().map(|(&(fp, t), &dim)| json!({"p": fp, "t": t, "dim": dim})).collect::<Vec<_>>(),
                "d_ranks": p.d_ranks.iter().map(|(&(fp, t), &rk)| json!({"p": fp, "t": t, "rank": rk})).collect::<Vec<_>>(),
            })
        })
        .collect();
    let checks: Vec<_> = conv
        .checks
        .iter()
        .map(|c| json!({"name": c.name, "ok": c.ok, "detail": c.detail}))
        .collect();
    report.results = json!({
        "field": coeff,
        "pages": pages,
        "convergence": {"ok": conv.ok(), "checks": checks},
    });
    std::mem::replace(timings, Timings::new(false)).finish(&mut report);
    emit(cli, &report, render_table(&["r", "p", "t", "dim"], &rows));
    if !conv.ok() {
        return Err(KhError::Internal("spectral sequence failed its convergence checks".into()));
    }
    Ok(0)
}

// ---------------------------------------------------------------------
// verify

fn cmd_verify(
    cli: &Cli,
    link: &str,
    khi_override: Option<usize>,
    timings: &mut Timings,
) -> Result<u8, KhError> {
    let mut report = Report::new("verify");
    report.echo("link", link);
    let entry = catalog::lookup(link)?;
    let khi = khi_override.or(entry.khi_dim);
    if let Some(k) = khi_override {
        if k == 0 {
            return Err(KhError::Parse("--khi-dim must be positive".into()));
        }
        report.echo("khi_dim_override", k);
    }

    let base = entry.diagram()?;

    // unreduced: one marking per component, 2 * dim KHI <= rank_Z
    let d_full = base
        .clone()
        .with_markings(catalog::one_per_component(&base), None)?;
    let (_, full_homs) = koszul_of_diagram(&d_full, false)?;
    let full_rank: usize = full_homs.iter().map(|i| i.free_rank).sum();
    timings.mark("unreduced");

    // reduced: basepoint on the last component, markings on the others,
    // dim KHI <= rank_Z
    let (others, bp) = catalog::reduced_markings(&base);
    let d_red = base.with_markings(others, Some(bp))?;
    let red_rank: usize = if d_red.markings().is_empty() {
        // no operators left: the Koszul complex is the module itself
        let cube = KhovanovCube::build(&d_red)?;
        let red = cube::reduced_complex(&cube)?;
        cube::homology_integral(&red.graded)?.total_free_rank()
    } else {
        let (_, homs) = koszul_of_diagram(&d_red, true)?;
        homs.iter().map(|i| i.free_rank).sum()
    };
    timings.mark("reduced");

    let verdict = |rank: usize, bound: Option<usize>| -> (String, Option<i64>) {
        match bound {
            None => ("unknown".into(), None),
            Some(b) => {
                let slack = rank as i64 - b as i64;
                let v = if slack < 0 {
                    "violated"
                } else if slack == 0 {
                    "sharp"
                } else {
                    "pass"
                };
                (v.into(), Some(slack))
            }
        }
    };
    let (v_full, s_full) = verdict(full_rank, khi.map(|k| 2 * k));
    let (v_red, s_red) = verdict(red_rank, khi);

    let mut rows = vec![
        vec!["unreduced".into(), full_rank.to_string(), fmt_opt(khi.map(|k| 2 * k)), v_full.clone()],
        vec!["reduced".into(), red_rank.to_string(), fmt_opt(khi), v_red.clone()],
    ];
    for r in &mut rows {
        r.insert(0, link.to_string());
    }
    report.results = json!({
        "khi_dim": khi,
        "khi_source": entry.khi_source,
        "unreduced": {"rank": full_rank, "bound": khi.map(|k| 2 * k), "slack": s_full, "verdict": v_full},
        "reduced": {"rank": red_rank, "bound": khi, "slack": s_red, "verdict": v_red},
    });
    std::mem::replace(timings, Timings::new(false)).finish(&mut report);
    emit(cli, &report, render_table(&["link", "side", "rank", "bound", "verdict"], &rows));

    if v_full == "violated" || v_red == "violated" {
        return Ok(1);
    }
    Ok(0)
}

fn fmt_opt(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}
