//! Command-line front end for the Frobenius nonclassical curve toolkit.
//!
//! Subcommands: `curve build`, `curve check-fnc`, `sing report`,
//! `galois certify`, `galois scan`, `points count`. Reports carry the
//! parameters, tool version, and seed; JSON output is byte-stable for a
//! fixed seed. Exit codes: 0 success, 1 validation error, 2 internal
//! consistency failure, 3 inconclusive-only scan under `--strict`.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use fncurve::fncurve::{Curve, CurveParams};
use fncurve::galois::{EngineConfig, ProjectionAnalyzer, Verdict, VerdictRow};
use fncurve::geom::{enumerate_plane, ProjPoint};
use fncurve::local::{find_singular_points, SingRow, SingSummary};
use fncurve::Error;

#[derive(Parser)]
#[command(
    name = "fnc-galois",
    version,
    about = "Frobenius nonclassical plane curves: construction, singularities, Galois points"
)]
struct Cli {
    /// Worker threads (falls back to FNC_GALOIS_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output format.
    #[arg(long, global = true, default_value = "text", value_parser = ["text", "json"])]
    format: String,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct ParamArgs {
    /// Base field size q (a prime power).
    #[arg(short)]
    q: u64,
    /// Larger Frobenius exponent n (n >= 3, n > m, gcd(n, m) = 1).
    #[arg(short)]
    n: u32,
    /// Smaller Frobenius exponent m (m >= 1).
    #[arg(short)]
    m: u32,
}

#[derive(Subcommand)]
enum Cmd {
    /// Curve construction and the Frobenius nonclassicality identity.
    Curve {
        #[command(subcommand)]
        cmd: CurveCmd,
    },
    /// Singular locus reports.
    Sing {
        #[command(subcommand)]
        cmd: SingCmd,
    },
    /// Galois point certification.
    Galois {
        #[command(subcommand)]
        cmd: GaloisCmd,
    },
    /// Point counts over extensions.
    Points {
        #[command(subcommand)]
        cmd: PointsCmd,
    },
}

#[derive(Subcommand)]
enum CurveCmd {
    /// Build the curve and print degree and term count.
    Build {
        #[command(flatten)]
        params: ParamArgs,
        /// Also print the full polynomial.
        #[arg(long)]
        emit_poly: bool,
    },
    /// Check the q^N-Frobenius nonclassicality identity.
    CheckFnc {
        #[command(flatten)]
        params: ParamArgs,
        /// Frobenius power exponent N.
        #[arg(long)]
        power: u32,
    },
}

#[derive(Subcommand)]
enum SingCmd {
    /// Scan for singular points and verify the classification.
    Report {
        #[command(flatten)]
        params: ParamArgs,
        /// Largest extension degree scanned (default: what the
        /// classification needs).
        #[arg(long)]
        max_ext: Option<u32>,
    },
}

#[derive(Subcommand)]
enum GaloisCmd {
    /// Analyze a single candidate center.
    Certify {
        #[command(flatten)]
        params: ParamArgs,
        /// The center, e.g. "(1 : t : t+1)".
        #[arg(long)]
        point: String,
        /// Extension degree searched for deck parameters.
        #[arg(long, default_value_t = 1)]
        search_ext: u32,
        /// Seed for line sampling.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Analyze a set of candidate centers.
    Scan {
        #[command(flatten)]
        params: ParamArgs,
        /// Candidate set: "base", "ext:J", or "file:PATH" (one point per line).
        #[arg(long, default_value = "base")]
        candidates: String,
        /// Seed for line sampling.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Extension degree searched for deck parameters.
        #[arg(long, default_value_t = 1)]
        search_ext: u32,
        /// Exit with code 3 when nothing was certified either way.
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Subcommand)]
enum PointsCmd {
    /// Count curve points over GF(q^j).
    Count {
        #[command(flatten)]
        params: ParamArgs,
        /// Extension degree j.
        #[arg(long, default_value_t = 1)]
        ext: u32,
    },
}

/// Common report header: the parameters plus provenance fields.
#[derive(Serialize)]
struct Provenance {
    params: ParamsJson,
    tool_version: &'static str,
    seed: u64,
}

#[derive(Serialize)]
struct ParamsJson {
    q: u64,
    n: u32,
    m: u32,
}

impl Provenance {
    fn new(p: &CurveParams, seed: u64) -> Provenance {
        Provenance {
            params: ParamsJson { q: p.q, n: p.n, m: p.m },
            tool_version: env!("CARGO_PKG_VERSION"),
            seed,
        }
    }
}

#[derive(Serialize)]
struct CurveReport {
    #[serde(flatten)]
    provenance: Provenance,
    degree: u32,
    terms: usize,
    fnc: FncFlags,
    #[serde(skip_serializing_if = "Option::is_none")]
    poly: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    power: Option<PowerResult>,
}

#[derive(Serialize)]
struct FncFlags {
    n: bool,
    m: bool,
}

#[derive(Serialize)]
struct PowerResult {
    #[serde(rename = "N")]
    power: u32,
    result: bool,
}

#[derive(Serialize)]
struct SingReport {
    #[serde(flatten)]
    provenance: Provenance,
    rows: Vec<SingRow>,
    summary: SingSummary,
}

#[derive(Serialize)]
struct GaloisReport {
    #[serde(flatten)]
    provenance: Provenance,
    verdicts: Vec<VerdictRow>,
    skipped_lines: usize,
}

#[derive(Serialize)]
struct CountReport {
    #[serde(flatten)]
    provenance: Provenance,
    ext: u32,
    count: u64,
}

fn main() {
    // usage problems exit 1; help and version exit 0
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let threads = cli
        .threads
        .or_else(|| std::env::var("FNC_GALOIS_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(t) = threads {
        if t > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
    }
    let json = cli.format == "json";
    std::process::exit(match run(cli.cmd, json) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            match e {
                Error::NotDivisible(..) | Error::EngineInconsistency(_) => 2,
                _ => 1,
            }
        }
    });
}

fn build_curve(p: &ParamArgs) -> Result<Curve, Error> {
    Curve::build(CurveParams::new(p.q, p.n, p.m)?)
}

fn emit<T: Serialize>(json: bool, report: &T, text: impl FnOnce() -> String) {
    if json {
        println!("{}", serde_json::to_string_pretty(report).expect("report serialization"));
    } else {
        println!("{}", text());
    }
}

fn run(cmd: Cmd, json: bool) -> Result<i32, Error> {
    match cmd {
        Cmd::Curve { cmd: CurveCmd::Build { params, emit_poly } } => {
            let curve = build_curve(&params)?;
            let report = CurveReport {
                provenance: Provenance::new(curve.params(), 0),
                degree: curve.degree(),
                terms: curve.f().term_count(),
                fnc: FncFlags {
                    n: curve.check_frobenius_nonclassical(params.n)?,
                    m: curve.check_frobenius_nonclassical(params.m)?,
                },
                poly: emit_poly.then(|| curve.f().to_string()),
                power: None,
            };
            emit(json, &report, || {
                let mut out = format!(
                    "curve {}: degree {}, {} terms, nonclassical for q^n: {}, q^m: {}",
                    curve.params(),
                    report.degree,
                    report.terms,
                    report.fnc.n,
                    report.fnc.m
                );
                if let Some(p) = &report.poly {
                    out.push_str("\nF = ");
                    out.push_str(p);
                }
                out
            });
            Ok(0)
        }
        Cmd::Curve { cmd: CurveCmd::CheckFnc { params, power } } => {
            let curve = build_curve(&params)?;
            let result = curve.check_frobenius_nonclassical(power)?;
            let report = CurveReport {
                provenance: Provenance::new(curve.params(), 0),
                degree: curve.degree(),
                terms: curve.f().term_count(),
                fnc: FncFlags {
                    n: curve.check_frobenius_nonclassical(params.n)?,
                    m: curve.check_frobenius_nonclassical(params.m)?,
                },
                poly: None,
                power: Some(PowerResult { power, result }),
            };
            emit(json, &report, || {
                format!(
                    "curve {}: tangent lines pass through the q^{}-Frobenius image: {}",
                    curve.params(),
                    power,
                    result
                )
            });
            Ok(0)
        }
        Cmd::Sing { cmd: SingCmd::Report { params, max_ext } } => {
            let curve = build_curve(&params)?;
            let p = *curve.params();
            let default_ext = (p.n - p.m).max(p.n - 1);
            let report = find_singular_points(&curve, max_ext.unwrap_or(default_ext))?;
            let out = SingReport {
                provenance: Provenance::new(&p, 0),
                rows: report.rows(),
                summary: report.summary(p.q),
            };
            emit(json, &out, || {
                let mut s = format!(
                    "singular locus of {}: {} predicted, {} found, match: {} (verified within {})",
                    p,
                    out.summary.predicted_count,
                    out.summary.found_count,
                    out.summary.matches,
                    out.summary.verified_within
                );
                for row in &out.rows {
                    s.push_str(&format!(
                        "\n  {} mult {} case {} ordinary {} tangents {}",
                        row.point,
                        row.mult,
                        row.case,
                        row.ordinary,
                        row.tangents.len()
                    ));
                }
                s
            });
            Ok(if report.matches_prediction() { 0 } else { 2 })
        }
        Cmd::Galois { cmd: GaloisCmd::Certify { params, point, search_ext, seed } } => {
            let curve = build_curve(&params)?;
            let center = ProjPoint::parse(curve.ctx(), &point)
                .ok_or_else(|| Error::InvalidParams(format!("cannot parse point {:?}", point)))?;
            let config = EngineConfig { seed, search_ext, ..EngineConfig::default() };
            let analyzer = ProjectionAnalyzer::new(&curve, config)?;
            let verdict = analyzer.analyze(&center)?;
            let report = GaloisReport {
                provenance: Provenance::new(curve.params(), seed),
                skipped_lines: verdict.skipped_lines.len(),
                verdicts: vec![verdict.row()],
            };
            emit(json, &report, || {
                let v = &report.verdicts[0];
                format!(
                    "{} deg {} deck {}: {}{}",
                    v.point,
                    v.degree,
                    v.deck_order,
                    v.verdict,
                    v.obstruction
                        .as_ref()
                        .map(|o| format!(" via {} on {}", o.rule, o.line))
                        .unwrap_or_default()
                )
            });
            Ok(0)
        }
        Cmd::Galois { cmd: GaloisCmd::Scan { params, candidates, seed, search_ext, strict } } => {
            let curve = build_curve(&params)?;
            let config = EngineConfig { seed, search_ext, ..EngineConfig::default() };
            let analyzer = ProjectionAnalyzer::new(&curve, config)?;
            let list = parse_candidates(&curve, &candidates)?;
            let verdicts = analyzer.scan(&list)?;
            let skipped = verdicts.iter().map(|v| v.skipped_lines.len()).sum();
            let mut rows: Vec<VerdictRow> = verdicts.iter().map(|v| v.row()).collect();
            rows.sort_by(|a, b| a.point.cmp(&b.point));
            let report = GaloisReport {
                provenance: Provenance::new(curve.params(), seed),
                verdicts: rows,
                skipped_lines: skipped,
            };
            let galois =
                report.verdicts.iter().filter(|v| v.verdict == Verdict::GaloisCertified).count();
            let not_galois = report
                .verdicts
                .iter()
                .filter(|v| v.verdict == Verdict::NotGaloisCertified)
                .count();
            emit(json, &report, || {
                let mut s = format!(
                    "scan {}: {} candidates, {} Galois, {} not Galois, {} inconclusive",
                    curve.params(),
                    report.verdicts.len(),
                    galois,
                    not_galois,
                    report.verdicts.len() - galois - not_galois
                );
                for v in &report.verdicts {
                    s.push_str(&format!(
                        "\n  {} deg {} deck {} {}{}",
                        v.point,
                        v.degree,
                        v.deck_order,
                        v.verdict,
                        v.obstruction
                            .as_ref()
                            .map(|o| format!(" via {}", o.rule))
                            .unwrap_or_default()
                    ));
                }
                s
            });
            if strict && galois == 0 && not_galois == 0 && !report.verdicts.is_empty() {
                return Ok(3);
            }
            Ok(0)
        }
        Cmd::Points { cmd: PointsCmd::Count { params, ext } } => {
            let curve = build_curve(&params)?;
            let count = curve.count_points(ext)?;
            let report =
                CountReport { provenance: Provenance::new(curve.params(), 0), ext, count };
            emit(json, &report, || {
                format!(
                    "curve {} has {} points over GF({}^{})",
                    curve.params(),
                    count,
                    params.q,
                    ext
                )
            });
            Ok(0)
        }
    }
}

fn parse_candidates(curve: &Curve, spec: &str) -> Result<Vec<ProjPoint>, Error> {
    let q = curve.params().q;
    if spec == "base" {
        return enumerate_plane(curve.ctx(), q, 1);
    }
    if let Some(j) = spec.strip_prefix("ext:") {
        let j: u32 = j
            .parse()
            .map_err(|_| Error::InvalidParams(format!("bad extension in {:?}", spec)))?;
        return enumerate_plane(curve.ctx(), q, j);
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let body = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParams(format!("cannot read {}: {}", path, e)))?;
        let mut out = Vec::new();
        for line in body.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let p = ProjPoint::parse(curve.ctx(), line)
                .ok_or_else(|| Error::InvalidParams(format!("cannot parse point {:?}", line)))?;
            out.push(p);
        }
        return Ok(out);
    }
    Err(Error::InvalidParams(format!("candidate spec {:?} is not base, ext:J, or file:PATH", spec)))
}
