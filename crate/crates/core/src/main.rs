//! Command-line front end: ingest one instance file, run a verification
//! command, and print a deterministic report.
//!
//! Reports are line-oriented records with a stable field order; identical
//! inputs produce byte-identical output. Exit codes: 0 when every check
//! passes, 1 when a check fails, 2 for unreadable or malformed instances,
//! and 3 when an enumeration cannot certify its answer within its bound.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use twistgraph::algebra::{
    check_covariance, check_toeplitz, convolve, gauge_degree, matrix_model,
    verify_main_isomorphism, AlgebraContext, GaugeDegree,
};
use twistgraph::boundary::{boundary_path_set, is_boundary, is_yeend_boundary, YeendMode};
use twistgraph::corpus;
use twistgraph::error::{Error, Result};
use twistgraph::factor::{
    boundary_factor_map, check_hat_functoriality, check_induced_hom_star, edge_surjective,
    is_regular, pullback_context, validate_factor_map, vertex_surjective,
};
use twistgraph::graph::{classify_vertices, paths_up_to, TopGraph, VertexId};
use twistgraph::groupoid::{boundary_groupoid_elements, inverse, GroupoidElement};
use twistgraph::instance::{parse_instance, InstanceFile};
use twistgraph::report::Report;
use twistgraph::twist::verify_twist_axioms;

#[derive(Parser)]
#[command(
    name = "twistgraph",
    version,
    about = "Desk-scale verification of twisted graph algebras and their groupoid models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the vertex classification of the instance graph.
    Classify { path: PathBuf },
    /// List the boundary path space and sweep the boundary oracle.
    Boundary {
        path: PathBuf,
        /// Longest finite path fed to the oracle sweep.
        #[arg(long, default_value_t = 4)]
        max_len: usize,
    },
    /// Enumerate groupoid elements and check their closure properties.
    Groupoid { path: PathBuf },
    /// Verify the cocycle and twist axioms of the instance.
    TwistVerify { path: PathBuf },
    /// Check the module relations: inner products, actions, covariance.
    Relations { path: PathBuf },
    /// Verify the main isomorphism over the instance.
    Iso { path: PathBuf },
    /// Validate the factor maps of the instance and their induced maps.
    Factor { path: PathBuf },
    /// Sweep a generated corpus of small instances.
    Corpus {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 25)]
        count: usize,
    },
}

fn read_instance(path: &Path) -> Result<InstanceFile> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_instance(&text)
}

fn instance_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".to_string())
}

fn name_list(g: &TopGraph, vs: impl IntoIterator<Item = VertexId>) -> String {
    let names: Vec<&str> = vs.into_iter().map(|v| g.vertex_name(v)).collect();
    if names.is_empty() {
        "(empty)".to_string()
    } else {
        names.join(",")
    }
}

fn cmd_classify(inst: &InstanceFile, label: &str) -> Result<Report> {
    let g = inst.to_graph()?;
    let c = classify_vertices(&g);
    let mut rep = Report::new();
    rep.add("finite_vertices", label, true, name_list(&g, c.finite.iter().copied()));
    rep.add("source_vertices", label, true, name_list(&g, c.sources.iter().copied()));
    rep.add("regular_vertices", label, true, name_list(&g, c.regular.iter().copied()));
    rep.add("singular_vertices", label, true, name_list(&g, c.singular.iter().copied()));
    let partitioned = c.regular.is_disjoint(&c.singular)
        && c.regular.union(&c.singular).count() == g.vertex_count()
        && c.sources.is_subset(&c.singular);
    rep.add("classification_partitions", label, partitioned, "");
    Ok(rep)
}

/// The oracle length bound used everywhere a sweep compares the two boundary
/// definitions.
fn oracle_len_bound(g: &TopGraph, p_len: usize) -> usize {
    g.vertex_count() * g.edge_count() + p_len + 1
}

fn yeend_sweep(g: &TopGraph, label: &str, max_len: usize, work_cap: u64) -> Result<Report> {
    let mut rep = Report::new();
    let mut checked = 0usize;
    let mut fail = String::new();
    for p in paths_up_to(g, max_len) {
        let direct = is_boundary(g, &p);
        let oracle = is_yeend_boundary(
            g,
            &p,
            oracle_len_bound(g, p.len()),
            YeendMode::Exhaustive { work_cap },
        )?;
        if direct != oracle && fail.is_empty() {
            fail = format!(
                "path {} splits the definitions (direct {direct}, oracle {oracle})",
                p.display(g)
            );
        }
        checked += 1;
    }
    rep.add(
        "yeend_agreement",
        label,
        fail.is_empty(),
        if fail.is_empty() {
            format!("{checked} paths agree")
        } else {
            fail
        },
    );
    Ok(rep)
}

fn cmd_boundary(inst: &InstanceFile, label: &str, max_len: usize) -> Result<Report> {
    let g = inst.to_graph()?;
    let bound = if g.is_acyclic() {
        None
    } else {
        Some(inst.options.bound.ok_or_else(|| {
            Error::BoundExceeded("cyclic instance needs options.bound for its boundary".into())
        })?)
    };
    let bset = boundary_path_set(&g, bound)?;
    let mut rep = Report::new();
    let listing: Vec<String> = bset.paths.iter().map(|p| p.display(&g)).collect();
    rep.add(
        "boundary_points",
        label,
        true,
        format!(
            "{} point(s), complete={}: {}",
            listing.len(),
            bset.complete,
            if listing.is_empty() {
                "(none)".to_string()
            } else {
                listing.join("; ")
            }
        ),
    );
    rep.extend(yeend_sweep(&g, label, max_len, 1_000_000)?);
    Ok(rep)
}

fn cmd_groupoid(inst: &InstanceFile, label: &str) -> Result<Report> {
    let g = inst.to_graph()?;
    let bound = if g.is_acyclic() {
        None
    } else {
        Some(inst.options.bound.ok_or_else(|| {
            Error::BoundExceeded("cyclic instance needs options.bound for its groupoid".into())
        })?)
    };
    let (els, complete) = boundary_groupoid_elements(&g, bound)?;
    let mut rep = Report::new();
    rep.add(
        "groupoid_elements",
        label,
        true,
        format!("{} element(s), complete={complete}", els.len()),
    );
    let member: std::collections::BTreeSet<&GroupoidElement> = els.iter().collect();
    let inv_closed = els.iter().all(|el| member.contains(&inverse(&g, el)));
    rep.add("inverse_closed", label, inv_closed, "");
    let units_ok = els
        .iter()
        .all(|el| member.contains(&GroupoidElement { x: el.x.clone(), n: 0, y: el.x.clone(), k1: 0, k2: 0 }));
    rep.add("units_present", label, units_ok, "");
    Ok(rep)
}

fn twist_bound(inst: &InstanceFile, g: &TopGraph) -> Option<usize> {
    if g.is_acyclic() {
        None
    } else {
        Some(inst.options.bound.unwrap_or(2))
    }
}

fn cmd_twist_verify(inst: &InstanceFile, label: &str) -> Result<Report> {
    let g = inst.to_graph()?;
    let cc = inst.to_cocycle(&g)?;
    verify_twist_axioms(&g, &cc, label, twist_bound(inst, &g), 64)
}

fn cmd_relations(inst: &InstanceFile, label: &str) -> Result<Report> {
    let g = inst.to_graph()?;
    let cc = inst.to_cocycle(&g)?;
    let ctx = AlgebraContext::new(g, cc)?;
    let mut rep = Report::new();
    rep.extend(check_toeplitz(&ctx, label)?);
    rep.extend(check_covariance(&ctx, label)?);

    let bound = inst.options.bound.unwrap_or(2);
    let mut grading_ok = true;
    let mut detail = String::new();
    let seed = inst.options.seed.unwrap_or(7);
    for (a, b) in corpus::seeded_homogeneous_pairs(&ctx, bound.min(2), seed, 25) {
        let GaugeDegree::Homogeneous(da) = gauge_degree(&a) else {
            continue;
        };
        let GaugeDegree::Homogeneous(db) = gauge_degree(&b) else {
            continue;
        };
        let prod = convolve(&ctx, &a, &b)?;
        let expected = GaugeDegree::Homogeneous(da + db);
        let got = gauge_degree(&prod);
        if got != expected && got != GaugeDegree::Zero && grading_ok {
            grading_ok = false;
            detail = format!("degrees {da} + {db} produced {got:?}");
        }
    }
    rep.add("grading_additive", label, grading_ok, detail);
    Ok(rep)
}

fn cmd_iso(inst: &InstanceFile, label: &str) -> Result<Report> {
    let g = inst.to_graph()?;
    let cc = inst.to_cocycle(&g)?;
    let ctx = AlgebraContext::new(g, cc)?;
    let bound = inst.options.bound.unwrap_or(3);
    let mut rep = Report::new();
    if ctx.g.is_acyclic() {
        let mm = matrix_model(&ctx)?;
        let blocks: Vec<String> = mm
            .orbits
            .iter()
            .map(|o| format!("{}x{}", o.len(), o.len()))
            .collect();
        rep.add(
            "matrix_model_blocks",
            label,
            true,
            format!(
                "generator side and groupoid side both carry {}",
                blocks.join(" + ")
            ),
        );
    }
    rep.extend(verify_main_isomorphism(&ctx, label, bound)?);
    Ok(rep)
}

fn cmd_factor(inst: &InstanceFile, label: &str) -> Result<Report> {
    let g = inst.to_graph()?;
    let mut rep = Report::new();
    for (name, f, fm) in inst.to_factor_maps(&g)? {
        let sub = format!("{label}/{name}");
        rep.extend(validate_factor_map(&fm, &f, &g, &sub)?);
        let (_, reg_rep) = is_regular(&fm, &f, &g, &sub)?;
        rep.extend(reg_rep);
    }
    if g.is_acyclic() {
        let (hat, fm) = boundary_factor_map(&g)?;
        let sub = format!("{label}/shift-cover");
        rep.extend(validate_factor_map(&fm, &hat.graph, &g, &sub)?);
        let (reg, reg_rep) = is_regular(&fm, &hat.graph, &g, &sub)?;
        rep.extend(reg_rep);
        rep.add(
            "shift_cover_surjective",
            &sub,
            vertex_surjective(&fm, &g) && edge_surjective(&fm, &g),
            "",
        );
        if reg {
            let cc = inst.to_cocycle(&g)?;
            let e_ctx = AlgebraContext::new(g.clone(), cc)?;
            let f_ctx = pullback_context(&e_ctx, hat.graph.clone(), &fm)?;
            rep.extend(check_induced_hom_star(&e_ctx, &f_ctx, &fm, &sub)?);
        }
        rep.extend(check_hat_functoriality(&g, &sub)?);
    } else {
        rep.skip(
            "shift_cover",
            label,
            "cyclic graphs have no finite shift cover",
        );
    }
    Ok(rep)
}

fn cmd_corpus(seed: u64, count: usize) -> Result<Report> {
    let mut rep = Report::new();
    for g in corpus::seeded_graphs(seed, count, 4, 5) {
        let label = corpus::graph_label(&g);
        rep.extend(yeend_sweep(&g, &label, 3, 200_000)?);
        for nc in corpus::cocycle_family(&g, seed, 1) {
            let sub = format!("{label}/{}", nc.name);
            let bound = if g.is_acyclic() { None } else { Some(2) };
            rep.extend(verify_twist_axioms(&g, &nc.cc, &sub, bound, 24)?);
        }
    }
    for sys in corpus::exhaustive_systems(2) {
        let g = sys.to_graph();
        let label = format!("sgds-{}", corpus::system_label(&sys));
        for nc in corpus::cocycle_family(&g, seed, 1) {
            let sub = format!("{label}/{}", nc.name);
            let ctx = AlgebraContext::new(g.clone(), nc.cc.clone())?;
            rep.extend(check_toeplitz(&ctx, &sub)?);
            rep.extend(check_covariance(&ctx, &sub)?);
        }
    }
    Ok(rep)
}

fn run(cli: Cli) -> Result<Report> {
    match &cli.command {
        Command::Classify { path } => cmd_classify(&read_instance(path)?, &instance_label(path)),
        Command::Boundary { path, max_len } => {
            cmd_boundary(&read_instance(path)?, &instance_label(path), *max_len)
        }
        Command::Groupoid { path } => cmd_groupoid(&read_instance(path)?, &instance_label(path)),
        Command::TwistVerify { path } => {
            cmd_twist_verify(&read_instance(path)?, &instance_label(path))
        }
        Command::Relations { path } => cmd_relations(&read_instance(path)?, &instance_label(path)),
        Command::Iso { path } => cmd_iso(&read_instance(path)?, &instance_label(path)),
        Command::Factor { path } => cmd_factor(&read_instance(path)?, &instance_label(path)),
        Command::Corpus { seed, count } => cmd_corpus(*seed, *count),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(rep) => {
            print!("{}", rep.render());
            if rep.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::BoundExceeded(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
