//! `persig`: compute, compare, and evaluate topological motion signatures.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use persig_core::eval::{eval_manifest_file, EvalError};
use persig_core::filtration::{build_filtration, PlaneId};
use persig_core::ingest::{
    load_sequence, parse_fraction, stack_frames, FrameOrder, IngestConfig,
};
use persig_core::metrics::{bottleneck, compare, Diagram};
use persig_core::persistence::{parse_barcode_text, reduce};
use persig_core::scalar::Exact;
use persig_core::signature::{read_signature, write_signature, SignatureConfig};

#[derive(Parser)]
#[command(name = "persig", version, about = "Topological signatures for periodic motion sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct IngestArgs {
    /// Portion of the frame height kept, from the bottom ("1/4", "0.25", "1").
    #[arg(long, default_value = "1/4")]
    crop_fraction: String,
    /// Foreground threshold: pixel value must exceed it.
    #[arg(long, default_value_t = 128)]
    threshold: u8,
    /// Frame file ordering.
    #[arg(long, value_enum, default_value_t = OrderArg::NumericSuffix)]
    order: OrderArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Lexicographic,
    #[value(name = "numeric-suffix")]
    NumericSuffix,
}

impl IngestArgs {
    fn to_config(&self) -> Result<IngestConfig> {
        let crop_fraction = parse_fraction(&self.crop_fraction)
            .map_err(|e| anyhow::anyhow!("--crop-fraction: {e}"))?;
        Ok(IngestConfig {
            crop_fraction,
            threshold: self.threshold,
            order: match self.order {
                OrderArg::Lexicographic => FrameOrder::Lexicographic,
                OrderArg::NumericSuffix => FrameOrder::NumericSuffix,
            },
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the signature of a silhouette sequence directory.
    Sign {
        /// Directory of .pbm/.pgm/.png frames.
        dir: PathBuf,
        /// Output signature file.
        #[arg(short, long)]
        output: PathBuf,
        /// Windows per barcode.
        #[arg(long, default_value_t = 24)]
        n: usize,
        #[command(flatten)]
        ingest: IngestArgs,
        /// Dump the voxel set as `z y x0 x1` runs.
        #[arg(long)]
        dump_voxels: Option<PathBuf>,
        /// Dump the boundary complex in OFF format.
        #[arg(long)]
        dump_off: Option<PathBuf>,
    },
    /// Write the persistence barcode of one plane filtration.
    Barcode {
        dir: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Reference plane (X0 X1 Y0 Y1 XmY1 YmX1 XpY0 XpY2).
        #[arg(long, default_value = "X0")]
        plane: String,
        #[command(flatten)]
        ingest: IngestArgs,
    },
    /// Compare two signature files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = Metric::Angle)]
        metric: Metric,
    },
    /// Bottleneck distance between two barcode files, one dimension.
    Bottleneck {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 0)]
        dim: u8,
    },
    /// Run the evaluation protocol described by a manifest.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        /// Write the full report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write TP/TN cumulative curves as CSV.
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Materialize the bundled three-class demo fixture and its manifest.
    Fixture {
        /// Target directory.
        dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Angle,
    Cosine,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let is_eval = matches!(cli.command, Command::Eval { .. });
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            // Evaluation failures are manifest problems by contract.
            if is_eval && err.downcast_ref::<EvalError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sign {
            dir,
            output,
            n,
            ingest,
            dump_voxels,
            dump_off,
        } => {
            let cfg = ingest.to_config()?;
            if n == 0 {
                bail!("--n must be positive");
            }
            let (frames, warnings) = load_sequence(&dir, &cfg)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            let img = stack_frames::<Exact>(&frames)?;
            if let Some(path) = dump_voxels {
                let mut w = BufWriter::new(fs::File::create(&path)?);
                img.dump_runs(&mut w)?;
            }
            let q = persig_core::complex::build_cubical(&img);
            let complex = persig_core::complex::extract_boundary(&q, &img);
            if complex.is_empty() {
                eprintln!("warning: empty boundary complex; signature is all zeros");
            }
            if let Some(path) = dump_off {
                let mut w = BufWriter::new(fs::File::create(&path)?);
                complex.write_off(&mut w)?;
            }
            let mut sig = persig_core::signature::signature(&complex, &SignatureConfig::new(n));
            sig.meta.source = dir
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            sig.meta.frame_count = img.dims()[2];
            sig.meta.crop_fraction = cfg.crop_fraction;
            let mut w = BufWriter::new(fs::File::create(&output)?);
            write_signature(&sig, &mut w)?;
            w.flush()?;
            Ok(())
        }
        Command::Barcode {
            dir,
            output,
            plane,
            ingest,
        } => {
            let cfg = ingest.to_config()?;
            let plane = PlaneId::parse(&plane)
                .with_context(|| format!("unknown plane `{plane}`"))?;
            let (frames, _) = load_sequence(&dir, &cfg)?;
            let img = stack_frames::<Exact>(&frames)?;
            let q = persig_core::complex::build_cubical(&img);
            let complex = persig_core::complex::extract_boundary(&q, &img);
            let barcode = reduce(&build_filtration(&complex, plane))?;
            let mut w = BufWriter::new(fs::File::create(&output)?);
            barcode.write_text(&mut w)?;
            w.flush()?;
            Ok(())
        }
        Command::Compare { a, b, metric } => {
            let sig_a = read_signature(&*fs::read(&a).with_context(|| a.display().to_string())?)?;
            let sig_b = read_signature(&*fs::read(&b).with_context(|| b.display().to_string())?)?;
            let cmp = compare(&sig_a, &sig_b)?;
            for (v, angle) in sig_a.vectors.iter().zip(&cmp.per_vector) {
                let plane = v.plane.map_or("-", PlaneId::label);
                match metric {
                    Metric::Angle => {
                        println!("plane={} dim={} angle={:.6}", plane, v.dim, angle)
                    }
                    Metric::Cosine => println!(
                        "plane={} dim={} cosine={:.6}",
                        plane,
                        v.dim,
                        angle.to_radians().cos()
                    ),
                }
            }
            match metric {
                Metric::Angle => println!("total_angle={:.6}", cmp.total_angle),
                Metric::Cosine => println!("total_cosine={:.6}", cmp.total_cosine),
            }
            Ok(())
        }
        Command::Bottleneck { a, b, dim } => {
            let load = |path: &PathBuf| -> Result<Diagram> {
                let text =
                    fs::read_to_string(path).with_context(|| path.display().to_string())?;
                let bars =
                    parse_barcode_text(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
                let mut d = Diagram::default();
                for (bar_dim, birth, death) in bars {
                    if bar_dim != dim {
                        continue;
                    }
                    match death {
                        Some(death) => d.points.push((birth, death)),
                        None => d.infinite_births.push(birth),
                    }
                }
                Ok(d)
            };
            let result = bottleneck(&load(&a)?, &load(&b)?);
            if result.infinite_mismatch {
                eprintln!("warning: diagrams hold different numbers of infinite classes");
            }
            println!("{}", result.distance);
            Ok(())
        }
        Command::Eval {
            manifest,
            out,
            curves,
        } => {
            let report = eval_manifest_file(&manifest)?;
            print!("{}", report.render_text());
            if let Some(path) = out {
                fs::write(&path, report.to_json())
                    .with_context(|| path.display().to_string())?;
            }
            if let Some(path) = curves {
                let mut w = BufWriter::new(fs::File::create(&path)?);
                report.write_curves_csv(&mut w)?;
                w.flush()?;
            }
            Ok(())
        }
        Command::Fixture { dir } => {
            let manifest = persig_core::fixtures::write_three_class_fixture(&dir)?;
            println!("{}", manifest.display());
            Ok(())
        }
    }
}
