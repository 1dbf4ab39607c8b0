//! `tractor` — curvature reports, tractor holonomy classification,
//! parallel transport, and cone/product verification for closed-form
//! metrics, from the catalogue or from manifest files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tractor_core::geometry::MetricSpec;
use tractor_core::nalgebra::{DMatrix, DVector};
use tractor_core::holonomy::{AlgebraBasis, Bundle, EstimatorOptions};
use tractor_core::report::{fmt_float, Value};
use tractor_core::{catalogue, cone, curvature, holonomy, product, tractor};

/// Conformal tractor calculus on closed-form metrics.
#[derive(Parser)]
#[command(name = "tractor", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Sorted-key JSON with fixed-precision floats.
    Json,
    /// Indented key/value lines.
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum BundleArg {
    /// The rank-(n+2) tractor connection.
    Tractor,
    /// The Levi-Civita connection on the tangent bundle.
    Metric,
}

impl From<BundleArg> for Bundle {
    fn from(b: BundleArg) -> Bundle {
        match b {
            BundleArg::Tractor => Bundle::Tractor,
            BundleArg::Metric => Bundle::Metric,
        }
    }
}

#[derive(Args)]
struct Output {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Curvature summary: Einstein fit, scalar range, Weyl/Cotton-York
    /// maxima, and invariant residuals over seeded sample points.
    Curvature {
        /// Catalogue name or path to a manifest file.
        source: String,
        /// Seeded sample points beyond the chart base point.
        #[arg(long, default_value_t = 20)]
        points: usize,
        /// Sampling seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Estimate a holonomy algebra and classify it.
    Classify {
        /// Catalogue name or path to a manifest file.
        source: String,
        /// Estimation strategy (`infinitesimal` or `loop`).
        #[arg(long, default_value = "infinitesimal")]
        method: String,
        /// Bundle whose holonomy is estimated.
        #[arg(long, value_enum, default_value_t = BundleArg::Tractor)]
        bundle: BundleArg,
        /// Covariant-derivative depth for the infinitesimal method (max 3).
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Relative singular-value rank threshold.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// RK4 steps per loop for the loop method.
        #[arg(long, default_value_t = 240)]
        steps: usize,
        /// Evaluate at this comma-separated point instead of the chart
        /// base point (useful for detecting non-generic loci).
        #[arg(long)]
        point: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Parallel-transport tractor components along a curve.
    Transport {
        /// Catalogue name or path to a manifest file.
        source: String,
        /// Tractor components: n+2 comma-separated numbers in slot
        /// order (x, Y, z).
        #[arg(long)]
        components: String,
        /// Closed coordinate rectangle `i,j,s` (1-based coordinate
        /// indices, side length s) based at the chart base point.
        #[arg(long, conflicts_with = "via")]
        rect: Option<String>,
        /// Piecewise-linear curve through waypoints
        /// `x1,..,xn; y1,..,yn; ...` (the first waypoint is the start).
        #[arg(long)]
        via: Option<String>,
        /// RK4 steps along the whole curve.
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Build the metric cone over an Einstein base and verify it.
    Cone {
        /// Catalogue name or path to a manifest file (the base).
        source: String,
        /// Write the cone metric to this path as a manifest file.
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Seeded sample points for the Ricci-flatness check.
        #[arg(long, default_value_t = 20)]
        points: usize,
        /// Sampling seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also compare the base's tractor holonomy with the cone's
        /// metric holonomy (slower).
        #[arg(long)]
        holonomy: bool,
        /// Covariant-derivative depth for the holonomy comparison.
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Rank threshold for the holonomy comparison.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Product of two Einstein metrics: coefficient relation, Schouten
    /// restriction, and optionally the block structure of the holonomy.
    Product {
        /// First factor: catalogue name or manifest path.
        first: String,
        /// Second factor: catalogue name or manifest path.
        second: String,
        /// Write the product metric to this path as a manifest file.
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Also test the block structure of the tractor holonomy (slower).
        #[arg(long)]
        holonomy: bool,
        /// Covariant-derivative depth for the holonomy test.
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Rank threshold for the holonomy test.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Access the built-in metric catalogue.
    Catalogue {
        #[command(subcommand)]
        action: CatalogueAction,
    },
}

#[derive(Subcommand)]
enum CatalogueAction {
    /// List the built-in metrics.
    List {
        #[command(flatten)]
        output: Output,
    },
    /// Print a catalogue metric as a manifest file.
    Show {
        /// Catalogue name.
        name: String,
        /// Write the manifest to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Curvature {
            source,
            points,
            seed,
            output,
        } => emit(&output, cmd_curvature(&source, points, seed)?),
        Command::Classify {
            source,
            method,
            bundle,
            order,
            tol,
            steps,
            point,
            output,
        } => emit(
            &output,
            cmd_classify(&source, &method, bundle.into(), order, tol, steps, point.as_deref())?,
        ),
        Command::Transport {
            source,
            components,
            rect,
            via,
            steps,
            output,
        } => emit(
            &output,
            cmd_transport(&source, &components, rect.as_deref(), via.as_deref(), steps)?,
        ),
        Command::Cone {
            source,
            emit: emit_path,
            points,
            seed,
            holonomy,
            order,
            tol,
            output,
        } => emit(
            &output,
            cmd_cone(&source, emit_path.as_deref(), points, seed, holonomy, order, tol)?,
        ),
        Command::Product {
            first,
            second,
            emit: emit_path,
            holonomy,
            order,
            tol,
            output,
        } => emit(
            &output,
            cmd_product(&first, &second, emit_path.as_deref(), holonomy, order, tol)?,
        ),
        Command::Catalogue { action } => match action {
            CatalogueAction::List { output } => emit(&output, cmd_catalogue_list()),
            CatalogueAction::Show { name, out } => cmd_catalogue_show(&name, out.as_deref()),
        },
    }
}

/// Resolve a metric source: a catalogue name first, a manifest path
/// otherwise (prefix a path with `./` if it shadows a catalogue name).
fn resolve(source: &str) -> Result<MetricSpec> {
    if let Some(m) = catalogue::lookup(source) {
        return Ok(m);
    }
    let path = Path::new(source);
    if path.exists() {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading manifest `{}`", path.display()))?;
        return tractor_core::geometry::parse_manifest(&text)
            .map_err(|e| anyhow!("{}: {e}", path.display()));
    }
    let names: Vec<&str> = catalogue::entries().iter().map(|e| e.name).collect();
    bail!(
        "`{source}` is neither a catalogue metric nor a file; catalogue entries: {}",
        names.join(", ")
    )
}

fn emit(output: &Output, report: Value) -> Result<()> {
    let rendered = match output.format {
        Format::Json => report.to_json(),
        Format::Text => render_text(&report),
    };
    write_out(output.out.as_deref(), &rendered)
}

fn write_out(path: Option<&Path>, rendered: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, format!("{rendered}\n"))
            .with_context(|| format!("writing `{}`", p.display())),
        None => print_stdout(&format!("{rendered}\n")),
    }
}

/// Print, treating a closed pipe (e.g. `| head`) as success.
fn print_stdout(text: &str) -> Result<()> {
    use std::io::Write as _;
    match std::io::stdout().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => other.context("writing to stdout"),
    }
}

/// Human-readable rendering: nested `key: value` lines.
fn render_text(v: &Value) -> String {
    fn scalar(v: &Value) -> Option<String> {
        match v {
            Value::Null => Some("-".to_string()),
            Value::Bool(b) => Some(b.to_string()),
            Value::Int(i) => Some(i.to_string()),
            Value::Float(x) => Some(fmt_float(*x)),
            Value::Str(s) => Some(s.clone()),
            Value::Array(xs) => {
                let parts: Option<Vec<String>> = xs.iter().map(scalar).collect();
                parts.map(|p| format!("[{}]", p.join(", ")))
            }
            Value::Object(_) => None,
        }
    }
    fn walk(v: &Value, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        match v {
            Value::Object(map) => {
                for (k, val) in map {
                    match scalar(val) {
                        Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                        None => {
                            out.push_str(&format!("{pad}{k}:\n"));
                            walk(val, indent + 1, out);
                        }
                    }
                }
            }
            Value::Array(xs) => {
                for x in xs {
                    match scalar(x) {
                        Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                        None => {
                            out.push_str(&format!("{pad}-\n"));
                            walk(x, indent + 1, out);
                        }
                    }
                }
            }
            other => {
                let s = scalar(other).unwrap_or_default();
                out.push_str(&format!("{pad}{s}\n"));
            }
        }
    }
    let mut out = String::new();
    walk(v, 0, &mut out);
    out.trim_end().to_string()
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .map_err(|e| anyhow!("bad number `{t}`: {e}"))
        })
        .collect()
}

fn matrix_value(m: &DMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::floats(m.row(i).transpose().as_slice()))
            .collect(),
    )
}

fn cmd_curvature(source: &str, points: usize, seed: u64) -> Result<Value> {
    let m = resolve(source)?;
    let n = m.dim();
    let fit = curvature::einstein_fit(&m, points, seed)?;

    let mut pts = vec![m.basepoint().clone()];
    pts.extend(m.sample_points(points, seed));
    let mut weyl_max = 0.0f64;
    let mut cy_max = 0.0f64;
    let mut ricci_max = 0.0f64;
    let mut riemann_max = 0.0f64;
    let mut tractor_max = 0.0f64;
    let mut scalar_min = f64::INFINITY;
    let mut scalar_max = f64::NEG_INFINITY;
    // Invariant residuals: tracelessness of Weyl and the Schouten trace
    // identity tr_g P = R / (2(n−1)).
    let mut weyl_trace = 0.0f64;
    let mut p_trace = 0.0f64;
    for p in &pts {
        let pack = curvature::curvature_at(&m, p)?;
        weyl_max = weyl_max.max(pack.weyl_max());
        cy_max = cy_max.max(pack.cy_max());
        ricci_max = ricci_max.max(pack.ricci_max());
        riemann_max = riemann_max.max(pack.riemann_max());
        scalar_min = scalar_min.min(pack.scalar);
        scalar_max = scalar_max.max(pack.scalar);
        if n >= 3 {
            tractor_max = tractor_max.max(tractor::tractor_curvature_max(&pack)?);
            let pp = pack.p.as_ref().unwrap();
            for b in 0..n {
                for l in 0..n {
                    let tr: f64 = (0..n).map(|a| pack.weyl(a, b, a, l)).sum();
                    weyl_trace = weyl_trace.max(tr.abs());
                }
            }
            let tr = (pack.ginv.transpose() * pp).trace();
            p_trace = p_trace.max((tr - pack.scalar / (2.0 * (n as f64 - 1.0))).abs());
        }
    }

    let base = curvature::curvature_at(&m, m.basepoint())?;
    let p_coeff = if n >= 3 && fit.einstein {
        Value::Float(-fit.lambda / (2.0 * n as f64 - 2.0))
    } else {
        Value::Null
    };
    Ok(Value::object(vec![
        ("label", m.label().into()),
        ("dimension", n.into()),
        ("points", pts.len().into()),
        ("seed", (seed as i64).into()),
        ("lambda", fit.lambda.into()),
        ("einstein", fit.einstein.into()),
        ("einstein_spread", fit.spread.into()),
        ("P_coeff", p_coeff),
        ("ricci", matrix_value(&base.ric)),
        ("scalar", base.scalar.into()),
        (
            "schouten",
            base.p.as_ref().map(matrix_value).unwrap_or(Value::Null),
        ),
        ("scalar_range", Value::floats(&[scalar_min, scalar_max])),
        ("ricci_max", ricci_max.into()),
        ("riemann_max", riemann_max.into()),
        ("weyl_max", weyl_max.into()),
        ("cy_max", cy_max.into()),
        ("tractor_curvature_max", tractor_max.into()),
        ("weyl_trace_residual", weyl_trace.into()),
        ("schouten_trace_residual", p_trace.into()),
    ]))
}

fn basis_value(basis: &AlgebraBasis) -> Vec<(&'static str, Value)> {
    vec![
        ("bundle", basis.bundle.name().into()),
        ("dim", basis.dim.into()),
        ("singular_values", Value::floats(&basis.singular_values)),
        ("gap", basis.gap.into()),
        ("indeterminate", basis.indeterminate.into()),
        ("closure_residual", basis.closure_residual.into()),
        ("tol", basis.tol.into()),
    ]
}

fn cmd_classify(
    source: &str,
    method: &str,
    bundle: Bundle,
    order: usize,
    tol: f64,
    steps: usize,
    point: Option<&str>,
) -> Result<Value> {
    let m = resolve(source)?;
    let est = holonomy::estimator(method).ok_or_else(|| {
        let names: Vec<&str> = holonomy::estimators().iter().map(|e| e.name()).collect();
        anyhow!("unknown method `{method}`; available: {}", names.join(", "))
    })?;
    let mut opts = EstimatorOptions {
        bundle,
        max_order: order,
        tol,
        steps,
        ..EstimatorOptions::default()
    };
    if let Some(raw) = point {
        let p = parse_floats(raw)?;
        m.check_domain(&p)?;
        opts.point = Some(p);
    }
    let basis = est.estimate(&m, &opts)?;
    let pt = opts.point.clone().unwrap_or_else(|| m.basepoint().clone());
    let g = m.metric_at(&pt)?;
    let gram = match basis.bundle {
        Bundle::Tractor => tractor::gram(&g),
        Bundle::Metric => g,
    };
    let class = holonomy::classify(&basis, &gram);

    let fixed: Vec<Value> = class
        .fixed_vectors
        .iter()
        .map(|f| {
            Value::object(vec![
                ("components", Value::floats(f.v.as_slice())),
                ("norm", f.norm.into()),
                ("sign", (f.sign as i64).into()),
            ])
        })
        .collect();
    let mut fields = vec![
        ("metric", m.label().into()),
        ("method", method.into()),
        ("order", order.into()),
        ("point", Value::floats(&pt)),
        ("label", class.label.clone().into()),
        ("confidence", class.confidence.clone().into()),
        ("fixed_vectors", Value::Array(fixed)),
        (
            "invariant_ranks",
            Value::Array(class.invariant_ranks.iter().map(|&r| r.into()).collect()),
        ),
        ("evidence", Value::strings(&class.evidence)),
    ];
    fields.extend(basis_value(&basis));
    Ok(Value::object(fields))
}

fn cmd_transport(
    source: &str,
    components: &str,
    rect: Option<&str>,
    via: Option<&str>,
    steps: usize,
) -> Result<Value> {
    let m = resolve(source)?;
    let n = m.dim();
    let comps = parse_floats(components)?;
    if comps.len() != n + 2 {
        bail!(
            "expected {} tractor components for dimension {n} (slot order x, Y, z), got {}",
            n + 2,
            comps.len()
        );
    }
    let (waypoints, curve_desc) = match (rect, via) {
        (Some(spec), None) => {
            let parts = parse_floats(spec)?;
            if parts.len() != 3 {
                bail!("--rect wants `i,j,s` (two 1-based coordinate indices and a side length)");
            }
            let (i, j, s) = (parts[0] as usize, parts[1] as usize, parts[2]);
            if i < 1 || j < 1 || i > n || j > n || i == j {
                bail!("--rect indices must be distinct and within 1..={n}");
            }
            (
                tractor::coord_rectangle(m.basepoint(), i - 1, j - 1, s),
                format!("rectangle({i},{j},{s})"),
            )
        }
        (None, Some(list)) => {
            let mut pts = Vec::new();
            for part in list.split(';') {
                let p = parse_floats(part)?;
                if p.len() != n {
                    bail!("waypoint `{}` has {} coordinates, expected {n}", part.trim(), p.len());
                }
                pts.push(p);
            }
            let desc = format!("waypoints({})", pts.len());
            (pts, desc)
        }
        _ => bail!("specify the curve with exactly one of --rect or --via"),
    };

    let u0 = DVector::from_vec(comps);
    let moved = tractor::transport(&m, &waypoints, &u0, steps, true)?;
    let closed = waypoints.len() > 1 && waypoints.first() == waypoints.last();
    let return_error = if closed {
        Value::Float((&moved.u - &u0).amax())
    } else {
        Value::Null
    };
    Ok(Value::object(vec![
        ("metric", m.label().into()),
        ("curve", curve_desc.into()),
        ("steps", steps.into()),
        ("start", Value::floats(u0.as_slice())),
        ("end", Value::floats(moved.u.as_slice())),
        ("start_norm", moved.start_norm.into()),
        ("end_norm", moved.end_norm.into()),
        ("norm_drift", moved.norm_drift.into()),
        ("closed", closed.into()),
        ("return_error", return_error),
        (
            "richardson",
            moved.richardson.map(Value::Float).unwrap_or(Value::Null),
        ),
    ]))
}

fn cmd_cone(
    source: &str,
    emit_path: Option<&Path>,
    points: usize,
    seed: u64,
    holonomy: bool,
    order: usize,
    tol: f64,
) -> Result<Value> {
    let base = resolve(source)?;
    let spec = cone::build_cone(&base)?;
    let christoffels = cone::verify_cone_christoffels(&spec, spec.cone.basepoint())?;
    let ricci_max = cone::verify_ricci_flat(&spec, points, seed)?;
    let radial = cone::radial_curvature_residual(&spec, spec.cone.basepoint())?;
    let restriction = cone::restriction_matches_base(&spec);

    let holonomy_report = if holonomy {
        let (_, iso) = cone::verify_holonomy_isomorphism(&base, order, tol)?;
        Value::object(vec![
            ("base_tractor_dim", iso.base_dim.into()),
            ("cone_metric_dim", iso.cone_dim.into()),
            ("dims_agree", iso.agree.into()),
            (
                "base_label",
                iso.base_label.map(Value::Str).unwrap_or(Value::Null),
            ),
            (
                "cone_label",
                iso.cone_label.map(Value::Str).unwrap_or(Value::Null),
            ),
        ])
    } else {
        Value::Null
    };

    if let Some(p) = emit_path {
        fs::write(p, spec.cone.to_manifest())
            .with_context(|| format!("writing `{}`", p.display()))?;
    }
    Ok(Value::object(vec![
        ("base", base.label().into()),
        ("cone", spec.cone.label().into()),
        ("base_dim", base.dim().into()),
        ("cone_dim", spec.cone.dim().into()),
        ("lambda", spec.lambda.into()),
        ("mu", spec.mu.into()),
        ("points", points.into()),
        ("seed", (seed as i64).into()),
        ("ricci_max", ricci_max.into()),
        (
            "christoffel_residuals",
            Value::floats(&christoffels.residuals),
        ),
        ("christoffel_max", christoffels.max_residual.into()),
        ("radial_curvature_max", radial.into()),
        ("restriction_matches_base", restriction.into()),
        ("holonomy", holonomy_report),
        (
            "emitted",
            emit_path
                .map(|p| Value::Str(p.display().to_string()))
                .unwrap_or(Value::Null),
        ),
    ]))
}

fn cmd_product(
    first: &str,
    second: &str,
    emit_path: Option<&Path>,
    holonomy: bool,
    order: usize,
    tol: f64,
) -> Result<Value> {
    let m1 = resolve(first)?;
    let m2 = resolve(second)?;
    let restriction = product::verify_p_restriction(&m1, &m2)?;
    let prod = tractor_core::geometry::product(&m1, &m2);

    let block = if holonomy {
        let rep = product::verify_block_holonomy(&m1, &m2, order, tol)?;
        Value::object(vec![
            ("product_dim", rep.product_dim.into()),
            (
                "factor_dims",
                Value::Array(vec![rep.factor_dims.0.into(), rep.factor_dims.1.into()]),
            ),
            ("full_dim", rep.full_dim.into()),
            (
                "preserved_rank",
                rep.preserved_rank
                    .map(|r| Value::Int(r as i64))
                    .unwrap_or(Value::Null),
            ),
            ("expected_rank", rep.expected_rank.into()),
            (
                "block_dims",
                rep.block_dims
                    .map(|(a, b)| Value::Array(vec![a.into(), b.into()]))
                    .unwrap_or(Value::Null),
            ),
            ("verdict", rep.verdict.into()),
        ])
    } else {
        Value::Null
    };

    if let Some(p) = emit_path {
        fs::write(p, prod.to_manifest())
            .with_context(|| format!("writing `{}`", p.display()))?;
    }
    Ok(Value::object(vec![
        ("factors", Value::strings(&[m1.label(), m2.label()])),
        ("product", prod.label().into()),
        (
            "dims",
            Value::Array(vec![m1.dim().into(), m2.dim().into()]),
        ),
        (
            "lambda",
            Value::floats(&[restriction.lambda1, restriction.lambda2]),
        ),
        ("relation_holds", restriction.relation_holds.into()),
        ("relation_residual", restriction.relation_residual.into()),
        ("p_restriction_residual", restriction.residual.into()),
        ("scalar_residual", restriction.scalar_residual.into()),
        ("block_holonomy", block),
        (
            "emitted",
            emit_path
                .map(|p| Value::Str(p.display().to_string()))
                .unwrap_or(Value::Null),
        ),
    ]))
}

fn cmd_catalogue_list() -> Value {
    let entries: Vec<Value> = catalogue::entries()
        .iter()
        .map(|e| {
            let m = (e.build)();
            Value::object(vec![
                ("name", e.name.into()),
                ("dimension", m.dim().into()),
                ("label", m.label().into()),
                ("summary", e.summary.into()),
            ])
        })
        .collect();
    Value::object(vec![("entries", Value::Array(entries))])
}

fn cmd_catalogue_show(name: &str, out: Option<&Path>) -> Result<()> {
    let m = catalogue::lookup(name).ok_or_else(|| {
        let names: Vec<&str> = catalogue::entries().iter().map(|e| e.name).collect();
        anyhow!("no catalogue metric `{name}`; entries: {}", names.join(", "))
    })?;
    let text = m.to_manifest();
    match out {
        Some(p) => {
            fs::write(p, &text).with_context(|| format!("writing `{}`", p.display()))
        }
        None => print_stdout(&text),
    }
}
