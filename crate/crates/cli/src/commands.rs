use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use distortsec::config::ScenarioConfig;
use distortsec::dynamics::{GaussianSpec, LinearSystem, SystemDoc, Trajectory};
use distortsec::mirroring::{KeyBit, MirrorSchedule};
use distortsec::parallel::stream_rng;
use distortsec::worstcase::{
    decode_trajectory, encode_trajectory, optimize_theta, range_points, theta_sweep, variance_profile,
    GridSpec, KeyWord, ShiftMirrorCodec, StandardNormal,
};

use crate::output::{manifest_beside, xy_csv, RunManifest};
use crate::{usage, CodecArgs, Command, Format, GridArgs};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::WorstcaseSweep {
            k,
            theta_min,
            theta_max,
            theta_step,
            grid,
            out,
            format,
        } => worstcase_sweep(
            k,
            theta_min,
            theta_max,
            theta_step,
            &grid_spec(&grid),
            &out,
            format,
        ),
        Command::VarProfile {
            k,
            theta,
            z_min,
            z_max,
            z_step,
            out,
            format,
        } => var_profile(k, theta, z_min, z_max, z_step, &out, format),
        Command::OptimizeTheta {
            ks,
            grid,
            out,
            format,
        } => optimize(&ks, &grid_spec(&grid), out.as_deref(), format),
        Command::Scenario {
            config,
            out,
            seed,
            samples,
        } => scenario(&config, &out, seed, samples),
        Command::Encode(args) => codec(&args, true),
        Command::Decode(args) => codec(&args, false),
    }
}

fn grid_spec(g: &GridArgs) -> GridSpec {
    GridSpec {
        zmax: g.zmax,
        step: g.zstep,
        refine_tol: g.refine_tol,
    }
}

#[derive(Serialize)]
struct ThetaRow {
    theta: f64,
    d_w: f64,
}

#[derive(Serialize)]
struct SweepDoc {
    k: u32,
    rows: Vec<ThetaRow>,
    best: ThetaRow,
}

fn worstcase_sweep(
    k: u32,
    lo: f64,
    hi: f64,
    step: f64,
    grid: &GridSpec,
    out: &Path,
    format: Format,
) -> Result<()> {
    let start = Instant::now();
    let rows = theta_sweep(k, &StandardNormal, lo, hi, step, grid)?;
    let (theta, d_w) =
        rows.iter().copied().fold(
            (f64::NAN, f64::NEG_INFINITY),
            |b, r| if r.1 > b.1 { r } else { b },
        );
    let bytes = match format {
        Format::Csv => xy_csv(["theta", "D_W"], &rows)?,
        Format::Json => {
            let doc = SweepDoc {
                k,
                rows: rows.iter().map(|&(theta, d_w)| ThetaRow { theta, d_w }).collect(),
                best: ThetaRow { theta, d_w },
            };
            (serde_json::to_string_pretty(&doc)? + "\n").into_bytes()
        }
    };
    let mut manifest = RunManifest::new("worstcase-sweep", out.parent().unwrap_or(Path::new(".")));
    manifest.artifact(out, &bytes)?;
    manifest.finish(&manifest_beside(out), start.elapsed())?;
    println!("k={k} theta*={theta} D_W*={d_w}");
    Ok(())
}

fn var_profile(k: u32, theta: f64, lo: f64, hi: f64, step: f64, out: &Path, format: Format) -> Result<()> {
    let start = Instant::now();
    let codec = ShiftMirrorCodec::new(k, theta)?;
    range_points(lo, hi, step)?;
    let mut rows = variance_profile(&codec, &StandardNormal, lo, hi, step)?;
    // Make sure both window edges appear even when off the step grid.
    for edge in [-theta, theta] {
        if lo <= edge && edge <= hi && !rows.iter().any(|r| r.0 == edge) {
            if let Ok(v) = distortsec::worstcase::posterior_variance(edge, &codec, &StandardNormal) {
                rows.push((edge, v));
            }
        }
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let bytes = match format {
        Format::Csv => xy_csv(["z", "var"], &rows)?,
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                z: f64,
                var: f64,
            }
            let rows: Vec<Row> = rows.iter().map(|&(z, var)| Row { z, var }).collect();
            (serde_json::to_string_pretty(&rows)? + "\n").into_bytes()
        }
    };
    let mut manifest = RunManifest::new("var-profile", out.parent().unwrap_or(Path::new(".")));
    manifest.artifact(out, &bytes)?;
    manifest.finish(&manifest_beside(out), start.elapsed())?;
    let min = rows
        .iter()
        .copied()
        .fold((f64::NAN, f64::INFINITY), |b, r| if r.1 < b.1 { r } else { b });
    println!("k={k} theta={theta} min Var={} at z={}", min.1, min.0);
    Ok(())
}

fn optimize(ks: &[u32], grid: &GridSpec, out: Option<&Path>, format: Format) -> Result<()> {
    if ks.is_empty() {
        return Err(usage("at least one --k is required"));
    }
    let start = Instant::now();
    let rows = ks
        .iter()
        .map(|&k| optimize_theta(k, &StandardNormal, grid))
        .collect::<distortsec::Result<Vec<_>>>()?;
    let bytes = match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["k", "theta", "D_W"])?;
            for r in &rows {
                w.write_record([
                    r.k.to_string(),
                    distortsec::harness::fmt_f64(r.theta),
                    distortsec::harness::fmt_f64(r.d_w),
                ])?;
            }
            w.into_inner()?
        }
        Format::Json => (serde_json::to_string_pretty(&rows)? + "\n").into_bytes(),
    };
    match out {
        Some(path) => {
            let mut manifest = RunManifest::new("optimize-theta", path.parent().unwrap_or(Path::new(".")));
            manifest.artifact(path, &bytes)?;
            manifest.finish(&manifest_beside(path), start.elapsed())?;
            for r in &rows {
                println!("k={} theta*={} D_W*={}", r.k, r.theta, r.d_w);
            }
        }
        None => print!("{}", String::from_utf8_lossy(&bytes)),
    }
    Ok(())
}

fn scenario(config: &Path, out: &Path, seed: Option<u64>, samples: Option<usize>) -> Result<()> {
    let start = Instant::now();
    let mut cfg =
        ScenarioConfig::from_path(config).with_context(|| format!("loading {}", config.display()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(n) = samples {
        cfg.override_samples(n)?;
    }
    let report = cfg.run()?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut manifest = RunManifest::new("scenario", out);
    manifest.config_path = Some(config.display().to_string());
    manifest.seed = Some(cfg.seed);
    manifest.artifact(&out.join("report.json"), report.to_json()?.as_bytes())?;
    let mut table = Vec::new();
    report.write_per_time_csv(&mut table)?;
    manifest.artifact(&out.join("per_time.csv"), &table)?;
    manifest.finish(&out.join("manifest.json"), start.elapsed())?;
    println!(
        "{}: D_E={} D_E_max={} ratio={} D_W={} D_W_max={}",
        report.label,
        report.d_e,
        report.d_e_max,
        report.ratio(),
        report.d_w,
        report.d_w_max
    );
    Ok(())
}

/// Codec document for `encode` / `decode`.
#[derive(Debug, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case", deny_unknown_fields)]
enum CodecDoc {
    Mirror {
        mirrors: MirrorSchedule,
    },
    ShiftMirror {
        system: SystemDoc,
        init_prior: GaussianSpec,
        codec: ShiftMirrorCodec,
    },
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(distortsec::Error::from)
        .with_context(|| format!("parsing {}", path.display()))
}

fn codec(args: &CodecArgs, encode: bool) -> Result<()> {
    let start = Instant::now();
    let doc: CodecDoc = read_json(&args.config)?;
    let input: Trajectory = read_json(&args.input)?;
    let key_text = match (&args.key, args.seed) {
        (Some(k), _) => k.clone(),
        (None, Some(_)) if !encode => return Err(usage("decode needs the --key used for encoding")),
        (None, Some(seed)) => {
            let mut rng = stream_rng(seed, 0);
            let text = match &doc {
                CodecDoc::Mirror { .. } => KeyWord::random(1, &mut rng)?.decimal().to_string(),
                CodecDoc::ShiftMirror {
                    codec, init_prior, ..
                } => (0..init_prior.dim())
                    .map(|_| KeyWord::random(codec.k(), &mut rng).map(|k| k.bits()))
                    .collect::<distortsec::Result<Vec<_>>>()?
                    .join(","),
            };
            println!("key: {text}");
            text
        }
        (None, None) => return Err(usage("either --key or --seed is required")),
    };
    let states = match &doc {
        CodecDoc::Mirror { mirrors } => {
            let bit = match key_text.trim() {
                "0" => KeyBit::Zero,
                "1" => KeyBit::One,
                other => return Err(usage(format!("mirror key must be 0 or 1, got {other:?}"))),
            };
            mirrors.check_compatible(input.states.first().map_or(0, |x| x.len()), input.states.len())?;
            if encode {
                mirrors.encode_path(&input.states, bit)
            } else {
                mirrors.decode_path(&input.states, bit)
            }
        }
        CodecDoc::ShiftMirror {
            system,
            init_prior,
            codec,
        } => {
            let system = LinearSystem::try_from(system.clone())?;
            let keys = key_text
                .split(',')
                .map(|b| KeyWord::from_bits(b.trim()))
                .collect::<distortsec::Result<Vec<_>>>()?;
            if encode {
                encode_trajectory(&system, &input.states, &keys, init_prior, codec)?
            } else {
                decode_trajectory(&input.states, &keys, &system, init_prior, codec)?
            }
        }
    };
    let out = Trajectory {
        states,
        inputs: Vec::new(),
    };
    let mut manifest = RunManifest::new(
        if encode { "encode" } else { "decode" },
        args.out.parent().unwrap_or(Path::new(".")),
    );
    manifest.config_path = Some(args.config.display().to_string());
    manifest.seed = args.seed;
    manifest.artifact(&args.out, (serde_json::to_string_pretty(&out)? + "\n").as_bytes())?;
    manifest.finish(&manifest_beside(&args.out), start.elapsed())?;
    Ok(())
}
