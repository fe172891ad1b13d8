use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};
use rayon::prelude::*;

use csf_core::bench::BenchmarkBundle;
use csf_core::driver::{run_csf, CsfConfig, Legalizer, Mode};
use csf_core::model::{generate_outline, Netlist, Outline};
use csf_core::preset::Preset;
use csf_core::report::{render_svg, RunInfo, RunRecord};
use csf_core::stats::aggregate;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetArg {
    Mcnc,
    Gsrc,
    Auto,
}

/// Fixed-outline floorplanning with learned step sizes.
#[derive(Debug, Parser)]
#[command(name = "csf", version)]
struct Args {
    /// Benchmark directory holding <instance>.blocks, .nets and .pl.
    #[arg(long, requires = "instance", conflicts_with_all = ["blocks", "nets", "pl"])]
    bench_dir: Option<PathBuf>,

    /// Instance name inside --bench-dir.
    #[arg(long)]
    instance: Option<String>,

    #[arg(long, requires_all = ["nets", "pl"])]
    blocks: Option<PathBuf>,
    #[arg(long)]
    nets: Option<PathBuf>,
    #[arg(long)]
    pl: Option<PathBuf>,

    /// Fixed outline as WIDTHxHEIGHT, e.g. 800x800.
    #[arg(long, conflicts_with = "auto_outline")]
    outline: Option<String>,

    /// Outline from module area, e.g. gamma=0.15,aspect=1.
    #[arg(long, default_value = "gamma=0.15,aspect=1")]
    auto_outline: String,

    #[arg(long, default_value = "qq")]
    mode: Mode,

    #[arg(long, default_value = "la-csaq")]
    legalizer: Legalizer,

    /// Independent runs; run r uses seed + r.
    #[arg(long, default_value_t = 1)]
    runs: u64,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    #[arg(long, value_enum, default_value = "auto")]
    preset: PresetArg,

    /// Output directory for per-run records and the summary.
    #[arg(long, default_value = "csf-out")]
    out: PathBuf,

    /// Also draw the best legal run (or the best run if none is legal).
    #[arg(long)]
    svg: bool,
}

fn parse_outline(spec: &str) -> Result<(f64, f64)> {
    let (w, h) = spec
        .split_once(['x', 'X'])
        .with_context(|| format!("outline `{spec}` is not WIDTHxHEIGHT"))?;
    Ok((w.trim().parse()?, h.trim().parse()?))
}

fn parse_auto(spec: &str) -> Result<(f64, f64)> {
    let (mut gamma, mut aspect) = (None, 1.0);
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .with_context(|| format!("`{part}` is not key=value"))?;
        let v: f64 = v
            .trim()
            .parse()
            .with_context(|| format!("bad number in `{part}`"))?;
        match k.trim() {
            "gamma" => gamma = Some(v),
            "aspect" => aspect = v,
            other => bail!("unknown outline key `{other}`"),
        }
    }
    Ok((gamma.context("auto outline needs gamma=")?, aspect))
}

fn bundle(args: &Args) -> Result<BenchmarkBundle> {
    match (&args.bench_dir, &args.instance, &args.blocks) {
        (Some(dir), Some(name), _) => Ok(BenchmarkBundle::in_dir(dir, name)),
        (None, _, Some(blocks)) => Ok(BenchmarkBundle::from_paths(
            blocks.clone(),
            args.nets.clone().context("--nets is required")?,
            args.pl.clone().context("--pl is required")?,
        )),
        _ => bail!("give either --bench-dir with --instance, or --blocks/--nets/--pl"),
    }
}

fn outline(args: &Args, netlist: &Netlist) -> Result<Outline> {
    Ok(match &args.outline {
        Some(spec) => {
            let (w, h) = parse_outline(spec)?;
            Outline::manual(w, h)?
        }
        None => {
            let (gamma, aspect) = parse_auto(&args.auto_outline)?;
            generate_outline(netlist.total_area(), aspect, gamma)?
        }
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    if args.runs == 0 {
        bail!("--runs must be at least 1");
    }

    let loaded = bundle(&args)?.load()?;
    let netlist = loaded.netlist;
    let outline = outline(&args, &netlist)?;
    let preset = match args.preset {
        PresetArg::Mcnc => Preset::mcnc(netlist.num_modules() > 33),
        PresetArg::Gsrc => Preset::gsrc(),
        PresetArg::Auto => Preset::auto(netlist.num_modules()),
    };
    log::info!(
        "{}: {} modules, {} nets, outline {:.2} x {:.2}",
        netlist.name,
        netlist.num_modules(),
        netlist.nets.len(),
        outline.width,
        outline.height
    );

    let started = Instant::now();
    let records: Vec<RunRecord> = (0..args.runs)
        .into_par_iter()
        .map(|r| -> Result<RunRecord> {
            let mut cfg = CsfConfig::new(preset.clone(), args.seed + r);
            cfg.mode = args.mode;
            cfg.legalizer = args.legalizer;
            let res = run_csf(&netlist, &outline, &cfg)?;
            let info = RunInfo {
                seed: cfg.seed,
                mode: cfg.mode.to_string(),
                legalizer: cfg.legalizer.to_string(),
                hpwl: res.hpwl,
                legal: res.legal,
                attempts: res.attempts,
                t_g: res.t_g,
                t_l: res.t_l,
                t_w: res.t_w,
            };
            Ok(RunRecord::new(&netlist, &res.placement, &outline, info)?)
        })
        .collect::<Result<_>>()?;

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    for r in &records {
        write(
            &args.out.join(format!("run_{}.json", r.seed)),
            &r.to_json()?,
        )?;
    }
    let summary = aggregate(&records)?;
    write(
        &args.out.join("summary.json"),
        &serde_json::to_string_pretty(&summary)?,
    )?;

    if args.svg {
        let best = records
            .iter()
            .min_by(|a, b| b.legal.cmp(&a.legal).then(a.hpwl.total_cmp(&b.hpwl)))
            .expect("at least one run");
        write(
            &args.out.join("best.svg"),
            &render_svg(&netlist, &best.placement(), &outline)?,
        )?;
    }

    println!(
        "{} {} {}: {}/{} legal, mean HPWL {}, min {}, sd {}, mean t_w {:.3}s ({:.1}s total)",
        netlist.name,
        args.mode,
        args.legalizer,
        summary.successes,
        summary.runs,
        fmt(summary.mean_hpwl),
        fmt(summary.min_hpwl),
        fmt(summary.hwsd),
        summary.mean_t_w,
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.0}"))
}
