//! Subcommand implementations. Each returns the text to emit in the chosen format.

use serde::Serialize;
use serde_json::json;

use catlin_core::geodesic::{
    dump_rows, is_quasi_geodesic, solve_geodesic, vertical_ray_path, CachedDistance, CatlinDistance,
    PiecewisePath,
};
use catlin_core::gromov::{boundary_product_experiment, estimate_delta, BandSampler, Ray};
use catlin_core::oracles::oracle_compare;
use catlin_core::scaling::{build_step, rescaled_defining, scale_at_infinity, scaling_sequence};
use catlin_core::{DangeloType, Error, ModelDomain, SolverOptions};

use crate::parse;
use crate::{Cli, Command, Failure, Format, Outcome, SamplerArgs, EXIT_BUDGET, EXIT_PARAMS};

fn json_text<T: Serialize + ?Sized>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Failure { code: EXIT_PARAMS, message: format!("cannot serialize output: {e}") })?;
    s.push('\n');
    Ok(s)
}

fn csv_text<T: Serialize>(rows: &[T]) -> Result<String, Failure> {
    let fail = |e: String| Failure { code: EXIT_PARAMS, message: format!("cannot write CSV: {e}") };
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| fail(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| fail(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| fail(e.to_string()))
}

fn ok(text: String) -> Result<Outcome, Failure> {
    Ok(Outcome { text, code: 0 })
}

/// Progress lines on standard error, roughly every tenth of the work.
struct Progress {
    label: &'static str,
    step: usize,
}

impl Progress {
    fn new(label: &'static str, total: usize) -> Self {
        Self { label, step: total.div_ceil(10).max(1) }
    }

    fn tick(&self, done: usize, total: usize) {
        if done % self.step == 0 || done == total {
            eprintln!("{}: {done}/{total}", self.label);
        }
    }
}

fn sampler(args: &SamplerArgs) -> BandSampler {
    BandSampler {
        radius: args.radius,
        log_depth_min: args.log_depth_min,
        log_depth_max: args.log_depth_max,
        im_w_spread: args.im_w_spread,
    }
}

fn budget_note(exhausted: bool) -> u8 {
    if exhausted {
        eprintln!("warning: iteration budget exhausted; reporting the best bracket found");
        EXIT_BUDGET
    } else {
        0
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let domain = parse::domain(cli.domain.as_deref())?;
    let options = SolverOptions::with_budget(cli.budget);
    let csv = cli.format == Format::Csv;
    match &cli.command {
        Command::Metric { point, tangent } => {
            let p = parse::point(point)?;
            let v = parse::tangent(tangent)?;
            let m = domain.catlin_metric(&p, &v)?;
            if csv {
                ok(csv_text(&[MetricRow { m }])?)
            } else {
                ok(json_text(&json!({ "M": m }))?)
            }
        }
        Command::Distance { p, q } => {
            let (p, q) = (parse::point(p)?, parse::point(q)?);
            let g = solve_geodesic(&domain, &p, &q, &options)?;
            let code = budget_note(g.exhausted);
            let text = if csv { csv_text(&[g.bracket])? } else { json_text(&g.bracket)? };
            Ok(Outcome { text, code })
        }
        Command::GeodesicDump { p, q } => {
            let (p, q) = (parse::point(p)?, parse::point(q)?);
            let g = solve_geodesic(&domain, &p, &q, &options)?;
            let rows = dump_rows(&domain, &g.path)?;
            let code = budget_note(g.exhausted);
            let text = if csv {
                csv_text(&rows)?
            } else {
                json_text(&json!({ "bracket": g.bracket, "rows": rows }))?
            };
            Ok(Outcome { text, code })
        }
        Command::QgeoCheck { p, q, foot, height, s, t, speed, distortion, offset, samples } => {
            let provider = CachedDistance::new(CatlinDistance::new(domain.clone(), options.clone()));
            let mut code = 0;
            let path = match (p, q, foot) {
                (Some(p), Some(q), _) => {
                    let (p, q) = (parse::point(p)?, parse::point(q)?);
                    let g = solve_geodesic(&domain, &p, &q, &options)?;
                    code = budget_note(g.exhausted);
                    g.path
                }
                (_, _, Some(foot)) => {
                    if !(*speed > 0.0) || !speed.is_finite() {
                        return Err(Error::InvalidParameter(format!("speed must be > 0, got {speed}")).into());
                    }
                    let foot = parse::point(foot)?;
                    let ray = vertical_ray_path(&domain, &foot, *height, *s, *t, 64)?;
                    let params = ray.params().iter().map(|u| u / speed).collect();
                    PiecewisePath::new(&domain, ray.points().to_vec(), params)?
                }
                _ => {
                    return Err(Error::InvalidParameter("give either --p and --q, or --foot".into()).into())
                }
            };
            let report = is_quasi_geodesic(&domain, &path, *distortion, *offset, &provider, *samples)?;
            let text = if csv {
                let w = report.worst;
                csv_text(&[QgeoRow {
                    pass: report.pass,
                    pairs: report.pairs,
                    worst_s: w.map(|w| w.s),
                    worst_t: w.map(|w| w.t),
                    worst_excess: w.map(|w| w.excess),
                }])?
            } else {
                json_text(&report)?
            };
            Ok(Outcome { text, code })
        }
        Command::Type { z } => {
            let z = parse::complex(z)?;
            let ty = domain.dangelo_type(z);
            let value = match ty {
                DangeloType::Finite(m) => json!(m),
                DangeloType::Infinite => json!("infinite"),
            };
            if csv {
                let label = match ty {
                    DangeloType::Finite(m) => m.to_string(),
                    DangeloType::Infinite => "infinite".into(),
                };
                ok(csv_text(&[TypeRow { z_re: z.re, z_im: z.im, r#type: label }])?)
            } else {
                ok(json_text(&json!({ "z": [z.re, z.im], "type": value }))?)
            }
        }
        Command::Scale { eta, sequence, z0 } => {
            if let Some(seq) = sequence {
                let ns = parse::list(seq)?;
                let rows = scaling_sequence(&domain, parse::complex(z0)?, &ns)?;
                return ok(if csv { csv_text(&rows)? } else { json_text(&rows)? });
            }
            let eta = parse::point(eta.as_deref().unwrap_or_default())?;
            let step = build_step(&domain, &eta)?;
            let rescaled = rescaled_defining(&domain, &step)?;
            if csv {
                ok(csv_text(&[ScaleRow {
                    eta_z_re: eta.z.re,
                    eta_z_im: eta.z.im,
                    eta_w_re: eta.w.re,
                    eta_w_im: eta.w.im,
                    epsilon: step.epsilon,
                    tau: step.tau,
                    residual: rescaled.residual,
                }])?)
            } else {
                ok(json_text(&json!({ "step": step, "rescaled": rescaled }))?)
            }
        }
        Command::ScaleInfinity { n } => {
            let ns = parse::list(n)?;
            let results = ns
                .iter()
                .map(|&n| scale_at_infinity(&domain, n).map(|p| (n, p)))
                .collect::<Result<Vec<_>, _>>()?;
            let limit = domain.polynomial().homogeneous_part(domain.degree());
            if csv {
                let rows: Vec<TermRow> = results
                    .iter()
                    .flat_map(|(n, p)| {
                        p.terms().map(move |((j, k), c)| TermRow { n: *n, j, k, re: c.re, im: c.im })
                    })
                    .collect();
                ok(csv_text(&rows)?)
            } else {
                let results: Vec<_> =
                    results.iter().map(|(n, p)| json!({ "n": n, "polynomial": p })).collect();
                ok(json_text(&json!({ "degree": domain.degree(), "results": results, "limit": limit }))?)
            }
        }
        Command::Delta { n, pool, basepoint, sampler: s } => {
            let o = parse::point(basepoint)?;
            let provider = CatlinDistance::new(domain.clone(), options);
            let progress = Progress::new("delta", *n);
            let report = estimate_delta(&domain, &o, &sampler(s), *n, *pool, cli.seed, &provider, |i, t| {
                progress.tick(i, t)
            })?;
            ok(if csv { csv_text(&report.stability)? } else { json_text(&report)? })
        }
        Command::BoundaryProduct { foot_plus, a_plus, foot_minus, a_minus, depths, basepoint } => {
            let plus = Ray::new(parse::point(foot_plus)?, *a_plus);
            let minus = Ray::new(parse::point(foot_minus)?, *a_minus);
            let depths = parse::list(depths)?;
            let o = basepoint.as_deref().map(parse::point).transpose()?;
            let provider = CachedDistance::new(CatlinDistance::new(domain.clone(), options));
            let rows = boundary_product_experiment(&domain, &plus, &minus, &depths, o, &provider)?;
            ok(if csv { csv_text(&rows)? } else { json_text(&rows)? })
        }
        Command::OracleCompare { pairs, sampler: s } => {
            if domain != ModelDomain::thullen(1) {
                return Err(Error::InvalidParameter(
                    "the exact oracle exists only for the Siegel domain P = |z|^2".into(),
                )
                .into());
            }
            let provider = CatlinDistance::new(domain, options);
            let progress = Progress::new("oracle-compare", *pairs);
            let report =
                oracle_compare(&provider, &sampler(s), *pairs, cli.seed, |i| progress.tick(i, *pairs))?;
            if report.summary.a_star >= 10.0 {
                eprintln!("warning: empirical constant A* = {} is not below 10", report.summary.a_star);
            }
            if csv {
                let rows: Vec<PairRow> = report
                    .pairs
                    .iter()
                    .map(|p| PairRow {
                        catlin_lower: p.catlin_lower,
                        catlin_upper: p.catlin_upper,
                        kobayashi_exact: p.kobayashi_exact,
                        ratio: p.ratio,
                    })
                    .collect();
                ok(csv_text(&rows)?)
            } else {
                ok(json_text(&report)?)
            }
        }
    }
}

#[derive(Serialize)]
struct MetricRow {
    #[serde(rename = "M")]
    m: f64,
}

#[derive(Serialize)]
struct QgeoRow {
    pass: bool,
    pairs: usize,
    worst_s: Option<f64>,
    worst_t: Option<f64>,
    worst_excess: Option<f64>,
}

#[derive(Serialize)]
struct TypeRow {
    z_re: f64,
    z_im: f64,
    r#type: String,
}

#[derive(Serialize)]
struct ScaleRow {
    eta_z_re: f64,
    eta_z_im: f64,
    eta_w_re: f64,
    eta_w_im: f64,
    epsilon: f64,
    tau: f64,
    residual: f64,
}

#[derive(Serialize)]
struct TermRow {
    n: f64,
    j: u32,
    k: u32,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct PairRow {
    catlin_lower: f64,
    catlin_upper: f64,
    kobayashi_exact: f64,
    ratio: f64,
}
