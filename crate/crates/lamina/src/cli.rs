//! Command-line front end for the `lamina` binary.
//!
//! One subcommand per capability: `simulate`, `reject`, `polygon`, `frag`,
//! `code`, `analyze`, `render`. Flags may also come from a TOML config file
//! (`--config`); explicit flags win over file values. `LAMINA_SEED` supplies
//! a default seed and `LAMINA_THREADS` a default worker cap.
//!
//! Every output is byte-deterministic given the command, flags and seed.
//! Exit codes: 0 on success, 1 on any validation or I/O error, 2 when
//! `analyze --suite acceptance` finds a gating criterion failing.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::Deserialize;

use crate::acceptance::{run_all_with, AcceptanceConfig};
use crate::coding::{code_lamination, sample_excursion, write_coding_csv};
use crate::engine::{simulate, simulate_rejection, EngineConfig, StopRule};
use crate::fragmentation::{
    malthusian, run_fragmentation, write_snapshots_csv, DislocationMeasure, KappaFn,
};
use crate::lamination::{load_jsonl_chords, write_jsonl, JsonlChord, JsonlHeader};
use crate::polygon::{
    sample_permutation_matching, sample_uniform_recursive, vertex_angle, write_polygon_jsonl,
};
use crate::render::{render_svg, RenderOptions};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "lamina",
    version,
    about = "Random recursive laminations of the disk",
    disable_help_subcommand = true
)]
struct Cli {
    /// TOML config file; explicit flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Worker thread cap (results do not depend on it).
    #[arg(long, global = true, env = "LAMINA_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Random seed.
    #[arg(long, env = "LAMINA_SEED")]
    seed: Option<u64>,
    /// Output path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the chord-insertion process; write the trajectory as JSONL.
    Simulate {
        /// Split-rate exponent: a fragment of mass m splits at rate m^alpha.
        #[arg(long)]
        alpha: Option<f64>,
        /// Simulation horizon.
        #[arg(long)]
        t_max: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Draw uniform chords, keeping each iff it crosses nothing kept; write
    /// checkpoint counts as CSV.
    Reject {
        /// Number of candidate chords.
        #[arg(long)]
        n: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Sample a uniform recursive triangulation, or the permutation matching
    /// model, of a regular n-gon; write the chords as JSONL.
    Polygon {
        /// Number of polygon vertices.
        #[arg(long)]
        n: Option<u64>,
        /// "recursive" (triangulation) or "matching".
        #[arg(long)]
        model: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a mass fragmentation; write ranked-mass snapshots as CSV.
    Frag {
        /// Split-rate exponent.
        #[arg(long)]
        alpha: Option<f64>,
        /// Horizon; snapshots are recorded on a uniform grid up to it.
        #[arg(long)]
        t_max: Option<f64>,
        /// Dislocation measure: "nu-c" (conservative) or "nu-d" (lossy).
        #[arg(long)]
        measure: Option<String>,
        /// Number of snapshot times.
        #[arg(long)]
        grid: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Sample a uniform discrete excursion and code its lamination.
    Code {
        /// Number of excursion steps (even).
        #[arg(long)]
        n: Option<u64>,
        /// "jsonl" (coded chords) or "csv" (the coding function itself).
        #[arg(long)]
        format: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run an estimator suite and write a JSON report.
    Analyze {
        /// Suite name; "acceptance" is the full gate.
        #[arg(long)]
        suite: Option<String>,
        /// Multiplies every replica count; tolerances are untouched.
        #[arg(long)]
        replicas_scale: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Render a JSONL chord file to SVG.
    Render {
        /// JSONL file produced by simulate/polygon/code.
        input: Option<PathBuf>,
        /// Canvas edge in pixels.
        #[arg(long)]
        size: Option<f64>,
        /// Color chords by birth order.
        #[arg(long)]
        color_by_time: bool,
        /// Draw the n-th roots of unity as dots.
        #[arg(long, value_name = "N")]
        marks: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
}

/// File-level defaults. Any key unknown to this struct is a hard error, so
/// typos in config files fail loudly.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    alpha: Option<f64>,
    t_max: Option<f64>,
    n: Option<u64>,
    seed: Option<u64>,
    threads: Option<usize>,
    out: Option<PathBuf>,
    format: Option<String>,
    suite: Option<String>,
    grid: Option<u64>,
    model: Option<String>,
    measure: Option<String>,
    replicas_scale: Option<f64>,
    size: Option<f64>,
    color_by_time: Option<bool>,
    marks: Option<u32>,
    input: Option<PathBuf>,
}

fn load_config(path: &Path) -> Result<FileConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn require<T>(flag: Option<T>, file: Option<T>, what: &str) -> Result<T> {
    flag.or(file)
        .ok_or_else(|| Error::InvalidParameter(format!("missing required value: {what}")))
}

/// Writes to `--out` or stdout.
fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, bytes)?;
            Ok(())
        }
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

/// Entry point used by the binary: parses, runs, maps errors to exit codes.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let matches = match Cli::command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return 1;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(cli: Cli) -> Result<i32> {
    let file = match &cli.config {
        Some(path) => load_config(path)?,
        None => FileConfig::default(),
    };
    if let Some(n) = cli.threads.or(file.threads) {
        // A second init in the same process is an error we can ignore: the
        // pool is already sized (tests call run() repeatedly).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }

    match cli.command {
        Command::Simulate {
            alpha,
            t_max,
            common,
        } => {
            let alpha = pick(alpha, file.alpha, 2.0);
            let t_max = pick(t_max, file.t_max, 400.0);
            let seed = pick(common.seed, file.seed, 7);
            let out = simulate(&EngineConfig::new(alpha, StopRule::TMax(t_max), seed), &[])?;
            let header = JsonlHeader {
                kind: "figela".into(),
                seed,
                alpha: Some(alpha),
            };
            let mut buf = Vec::new();
            write_jsonl(&out.figela, &header, &mut buf)?;
            emit(&common.out.or(file.out), &buf)?;
        }
        Command::Reject { n, common } => {
            let n = pick(n, file.n, 100_000) as usize;
            let seed = pick(common.seed, file.seed, 7);
            // Checkpoints at powers of two up to n, plus n itself.
            let mut cps: Vec<usize> = (0..)
                .map(|k| 1usize << k)
                .take_while(|&c| c < n)
                .collect();
            cps.push(n);
            let out = simulate_rejection(n, seed, &cps)?;
            let mut buf = Vec::new();
            writeln!(buf, "candidates,kept,kept_over_sqrt")?;
            for (seen, kept) in &out.kept_at {
                writeln!(
                    buf,
                    "{seen},{kept},{}",
                    *kept as f64 / (*seen as f64).sqrt()
                )?;
            }
            emit(&common.out.or(file.out), &buf)?;
        }
        Command::Polygon { n, model, common } => {
            let n = pick(n, file.n, 100) as u32;
            let seed = pick(common.seed, file.seed, 7);
            let model = pick(model, file.model, "recursive".into());
            let mut buf = Vec::new();
            match model.as_str() {
                "recursive" => {
                    let st = sample_uniform_recursive(n, seed)?;
                    let header = JsonlHeader {
                        kind: "triangulation".into(),
                        seed,
                        alpha: None,
                    };
                    write_polygon_jsonl(&st, &header, &mut buf)?;
                }
                "matching" => {
                    let st = sample_permutation_matching(n, seed)?;
                    let header = JsonlHeader {
                        kind: "matching".into(),
                        seed,
                        alpha: None,
                    };
                    serde_json::to_writer(&mut buf, &header)?;
                    buf.push(b'\n');
                    for (step, &(i, j)) in st.matched.iter().enumerate() {
                        let rec = JsonlChord {
                            u: String::new(),
                            a: vertex_angle(n, i).value(),
                            b: vertex_angle(n, j).value(),
                            t: (step + 1) as f64,
                            num: Some([i as u64, j as u64]),
                            den: Some(n as u64),
                        };
                        serde_json::to_writer(&mut buf, &rec)?;
                        buf.push(b'\n');
                    }
                }
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown polygon model {other:?}; use \"recursive\" or \"matching\""
                    )))
                }
            }
            emit(&common.out.or(file.out), &buf)?;
        }
        Command::Frag {
            alpha,
            t_max,
            measure,
            grid,
            common,
        } => {
            let alpha = pick(alpha, file.alpha, 1.0);
            let t_max = pick(t_max, file.t_max, 10.0);
            let seed = pick(common.seed, file.seed, 7);
            let grid = pick(grid, file.grid, 20).max(1);
            let measure = pick(measure, file.measure, "nu-c".into());
            let m = match measure.as_str() {
                "nu-c" => DislocationMeasure::NuC,
                "nu-d" => DislocationMeasure::NuD,
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown measure {other:?}; use \"nu-c\" or \"nu-d\""
                    )))
                }
            };
            let record: Vec<f64> = (1..=grid).map(|k| t_max * k as f64 / grid as f64).collect();
            let snaps = run_fragmentation(alpha, &m, t_max, seed, &record)?;
            let p_star = malthusian(&KappaFn::closed_form(m))?;
            let mut buf = Vec::new();
            write_snapshots_csv(&snaps, p_star, &mut buf)?;
            emit(&common.out.or(file.out), &buf)?;
        }
        Command::Code { n, format, common } => {
            let n = pick(n, file.n, 10_000) as usize;
            let seed = pick(common.seed, file.seed, 7);
            let format = pick(format, file.format, "jsonl".into());
            let g = sample_excursion(n, seed)?;
            let mut buf = Vec::new();
            match format.as_str() {
                "csv" => write_coding_csv(&g, &mut buf)?,
                "jsonl" => {
                    let coded = code_lamination(&g, 0.0)?;
                    let header = JsonlHeader {
                        kind: "coded".into(),
                        seed,
                        alpha: None,
                    };
                    serde_json::to_writer(&mut buf, &header)?;
                    buf.push(b'\n');
                    for (step, c) in coded.chords.iter().enumerate() {
                        let rec = JsonlChord {
                            u: String::new(),
                            a: c.a().value(),
                            b: c.b().value(),
                            t: (step + 1) as f64,
                            num: None,
                            den: None,
                        };
                        serde_json::to_writer(&mut buf, &rec)?;
                        buf.push(b'\n');
                    }
                }
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown format {other:?}; use \"jsonl\" or \"csv\""
                    )))
                }
            }
            emit(&common.out.or(file.out), &buf)?;
        }
        Command::Analyze {
            suite,
            replicas_scale,
            common,
        } => {
            let suite = pick(suite, file.suite, "acceptance".into());
            let scale = pick(replicas_scale, file.replicas_scale, 1.0);
            if !(scale > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "replicas scale must be positive, got {scale}"
                )));
            }
            let quick = match suite.as_str() {
                "acceptance" => false,
                // Smoke run: same criteria at 2% replicas.
                "quick" => true,
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown suite {other:?}; use \"acceptance\" or \"quick\""
                    )))
                }
            };
            let cfg = AcceptanceConfig {
                replicas_scale: if quick { scale * 0.02 } else { scale },
                seed: pick(common.seed, file.seed, AcceptanceConfig::default().seed),
            };
            let reports = run_all_with(&cfg, |r| eprintln!("{}", r.line()))?;
            let json = serde_json::to_string_pretty(&reports)?;
            emit(&common.out.or(file.out), format!("{json}\n").as_bytes())?;
            if reports.iter().any(|r| !r.gating_pass) {
                return Ok(2);
            }
        }
        Command::Render {
            input,
            size,
            color_by_time,
            marks,
            common,
        } => {
            let input = require(input, file.input, "render input path")?;
            let f = fs::File::open(&input).map_err(|e| {
                Error::InvalidParameter(format!("cannot read {}: {e}", input.display()))
            })?;
            let (header, records) = load_jsonl_chords(std::io::BufReader::new(f))?;
            let chords: Vec<crate::geometry::Chord> = records
                .iter()
                .map(|r| {
                    crate::geometry::Chord::new(
                        crate::geometry::Angle::new(r.a),
                        crate::geometry::Angle::new(r.b),
                    )
                })
                .collect::<Result<_>>()?;
            let opts = RenderOptions {
                size: pick(size, file.size, 800.0),
                color_by_time: color_by_time || file.color_by_time.unwrap_or(false),
                // Polygon files imply their vertex set.
                vertex_marks: marks
                    .or(file.marks)
                    .or_else(|| match header.kind.as_str() {
                        "triangulation" | "matching" => {
                            records.first().and_then(|r| r.den).map(|d| d as u32)
                        }
                        _ => None,
                    }),
                ..RenderOptions::default()
            };
            let svg = render_svg(&chords, &opts);
            emit(&common.out.or(file.out), svg.as_bytes())?;
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_rejects_unknown_keys() {
        let err = toml::from_str::<FileConfig>("alpha = 2.0\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn config_parses_known_keys() {
        let c: FileConfig = toml::from_str("alpha = 1.5\nt_max = 10.0\nseed = 3\n").unwrap();
        assert_eq!(c.alpha, Some(1.5));
        assert_eq!(c.seed, Some(3));
        assert!(c.out.is_none());
    }

    #[test]
    fn flag_beats_file_beats_default() {
        assert_eq!(pick(Some(1), Some(2), 3), 1);
        assert_eq!(pick(None, Some(2), 3), 2);
        assert_eq!(pick::<i32>(None, None, 3), 3);
    }

    #[test]
    fn unknown_subcommand_is_a_usage_error() {
        assert_eq!(run(["lamina", "explode"]), 1);
        assert_eq!(run(["lamina", "--help"]), 0);
    }
}
