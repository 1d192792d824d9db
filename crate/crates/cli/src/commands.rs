//! Subcommand implementations. Each returns the run report; files are
//! written as a side effect.

use std::path::{Path, PathBuf};

use nfr_core::reference_filters::{direct_nf_step_counted, direct_nf_until, grouped_nf_step_counted};
use nfr_core::synthetic::all_levels;
use nfr_core::{
    add_gaussian_noise, bilateral, decreasing_rearrangement, histogram, iterate_counted, nf_step_counted, nlm,
    reconstruct, rmse, segmentation, snr_measure, EvalCounter, FilterConfig, Image64, Kernel64, NoiseSpec, Scheme,
    SpatialConfig,
};

use crate::args::{
    BenchArgs, CompareArgs, DenoiseArgs, FilterKind, IterArgs, KernelArgs, KernelKind, NoiseArgs, RearrangeArgs,
    SchemeArg, SegmentArgs,
};
use crate::csv::{Cell, Table};
use crate::error::{usage, Result};
use crate::pgm::Pgm;
use crate::report::RunReport;

const DEFAULT_POWER_P: f64 = 2.0;

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn build_kernel(args: &KernelArgs, default_h: Option<f64>, report: &mut RunReport) -> Result<Kernel64> {
    let Some(h) = args.h.or(default_h) else {
        return usage("--h is required");
    };
    report.param("h", h);
    match args.kernel {
        KernelKind::Gaussian => {
            if args.p.is_some() {
                return usage("--p only applies to --kernel power");
            }
            report.param("kernel", "gaussian");
            Ok(Kernel64::gaussian(h)?)
        }
        KernelKind::Power => {
            let p = args.p.unwrap_or(DEFAULT_POWER_P);
            report.param("kernel", "power");
            report.param("p", p);
            Ok(Kernel64::power_decay(p, h)?)
        }
    }
}

fn build_config(kernel: Kernel64, iter: &IterArgs, report: &mut RunReport) -> FilterConfig<f64> {
    let mut cfg = FilterConfig::new(kernel);
    if let Some(s) = iter.scheme {
        cfg = cfg.scheme(match s {
            SchemeArg::Varying => Scheme::Varying,
            SchemeArg::Fixed => Scheme::Fixed,
        });
    }
    if let Some(tol) = iter.tol {
        cfg = cfg.stop_tolerance(tol);
    }
    if let Some(n) = iter.max_iter {
        cfg = cfg.max_iterations(n);
    }
    report.param(
        "scheme",
        match cfg.scheme {
            Scheme::Varying => "varying",
            Scheme::Fixed => "fixed",
        },
    );
    report.param("tol", cfg.stop_tolerance);
    report.param("max_iter", cfg.max_iterations);
    cfg
}

fn iter_flags_given(iter: &IterArgs) -> bool {
    iter.scheme.is_some() || iter.tol.is_some() || iter.max_iter.is_some()
}

fn pixel_table(img: &Image64) -> Result<Table> {
    let (_, width) = img.dims2()?;
    let mut t = Table::new(&["row", "col", "value"]);
    for (i, &v) in img.data().iter().enumerate() {
        t.row(vec![(i / width).into(), (i % width).into(), v.into()]);
    }
    Ok(t)
}

fn write_pgm(pgm: &Pgm, path: &Path, report: &mut RunReport) -> Result<()> {
    pgm.write(path)?;
    report.output(path);
    Ok(())
}

fn write_table(t: &Table, path: &Path, report: &mut RunReport) -> Result<()> {
    t.write(path)?;
    report.output(path);
    Ok(())
}

pub fn rearrange(args: &RearrangeArgs, report: &mut RunReport) -> Result<()> {
    let img = Pgm::read(&args.input)?.to_image();
    let (v, levels) = report.timed("rearrange", || decreasing_rearrangement(&img));

    let mut r = Table::new(&["cumulative_mass_start", "mass", "value"]);
    for ((start, &mass), &value) in v.cumulative_starts().into_iter().zip(v.masses()).zip(v.values()) {
        r.row(vec![start.into(), mass.into(), value.into()]);
    }
    let mut h = Table::new(&["value", "mass"]);
    for (value, mass) in histogram(&img) {
        h.row(vec![value.into(), mass.into()]);
    }
    write_table(&r, &with_suffix(&args.output, ".rearrangement.csv"), report)?;
    write_table(&h, &with_suffix(&args.output, ".histogram.csv"), report)?;
    report.metric("levels", levels.len());
    report.metric("pixels", img.len());
    Ok(())
}

pub fn denoise(args: &DenoiseArgs, report: &mut RunReport) -> Result<()> {
    let spatial_given = args.rho.is_some() || args.patch.is_some() || args.window.is_some();
    match args.filter {
        FilterKind::Nf | FilterKind::NfDirect => {
            if spatial_given {
                return usage("--rho, --patch and --window only apply to --filter bilateral|nlm");
            }
            if args.iterations.is_some() && (args.iter.tol.is_some() || args.iter.max_iter.is_some()) {
                return usage("--iterations fixes the step count; drop --tol and --max-iter");
            }
        }
        FilterKind::Bilateral | FilterKind::Nlm => {
            if iter_flags_given(&args.iter) {
                return usage("--scheme, --tol and --max-iter only apply to --filter nf|nf-direct");
            }
            if args.filter == FilterKind::Bilateral && args.patch.is_some() {
                return usage("--patch only applies to --filter nlm");
            }
        }
    }
    if args.iterations == Some(0) {
        return usage("--iterations must be at least 1");
    }

    let pgm = Pgm::read(&args.input)?;
    let img = pgm.to_image();
    let kernel = build_kernel(&args.kernel, None, report)?;
    let counter = EvalCounter::new();

    let out = match args.filter {
        FilterKind::Nf | FilterKind::NfDirect => {
            let mut cfg = build_config(kernel, &args.iter, report);
            if let Some(n) = args.iterations {
                // no relative decrement is below the smallest positive float
                cfg = cfg.max_iterations(n).stop_tolerance(f64::MIN_POSITIVE);
                report.param("iterations", n);
            }
            if args.filter == FilterKind::Nf {
                report.param("filter", "nf");
                let (v0, levels) = report.timed("rearrange", || decreasing_rearrangement(&img));
                let trace = report.timed("filter", || iterate_counted(&v0, &cfg, &counter))?;
                report.steps = Some(trace.steps());
                report.iterates = Some(trace.iterates.len());
                report.stop_reason = Some(trace.stop_reason.as_str().into());
                report.j_trace = trace.j_values.clone();
                report.metric("levels", levels.len());
                report.timed("reconstruct", || reconstruct(&levels, trace.last().values()))?
            } else {
                report.param("filter", "nf-direct");
                let run = report.timed("filter", || direct_nf_until(&img, &cfg, &counter))?;
                report.steps = Some(run.steps());
                report.iterates = Some(run.j_values.len());
                report.stop_reason = Some(run.stop_reason.as_str().into());
                report.j_trace = run.j_values.clone();
                run.image
            }
        }
        FilterKind::Bilateral | FilterKind::Nlm => {
            let passes = args.iterations.unwrap_or(1);
            let sp = if args.filter == FilterKind::Bilateral {
                report.param("filter", "bilateral");
                SpatialConfig::bilateral(args.rho.unwrap_or(2.0))
            } else {
                report.param("filter", "nlm");
                SpatialConfig::nlm(args.rho.unwrap_or(1.0), args.patch.unwrap_or(1))
            };
            let sp = match args.window {
                Some(w) => sp.window(w),
                None => sp,
            };
            report.param("rho", sp.rho);
            report.param("patch", sp.patch_radius);
            report.param("window", sp.window_radius);
            report.param("iterations", passes);
            let mut current = img.clone();
            for _ in 0..passes {
                current = report.timed("filter", || {
                    if args.filter == FilterKind::Bilateral {
                        bilateral(&current, &kernel, &sp)
                    } else {
                        nlm(&current, &kernel, &sp)
                    }
                })?;
            }
            report.steps = Some(passes);
            current
        }
    };
    report.kernel_evaluations = counter.get();

    let (written, saturated) = Pgm::from_image(&out, pgm.maxval())?;
    write_pgm(&written, &args.output, report)?;
    if let Some(csv) = &args.csv {
        write_table(&pixel_table(&out)?, csv, report)?;
    }
    report.metric("saturated_pixels", saturated);
    Ok(())
}

pub fn segment(args: &SegmentArgs, report: &mut RunReport) -> Result<()> {
    let img = Pgm::read(&args.input)?.to_image();
    let kernel = build_kernel(&args.kernel, None, report)?;
    let cfg = build_config(kernel, &args.iter, report);
    report.param("merge_tol", args.merge_tol);
    let (seg, trace) = report.timed("segment", || segmentation::segment_traced(&img, &cfg, args.merge_tol))?;
    report.steps = Some(trace.steps());
    report.iterates = Some(trace.iterates.len());
    report.stop_reason = Some(trace.stop_reason.as_str().into());
    report.j_trace = trace.j_values.clone();

    let regions = seg.region_count();
    if regions > u16::MAX as usize + 1 {
        return usage(format!(
            "{regions} regions do not fit a 16-bit label image; raise --merge-tol"
        ));
    }
    let (height, width) = img.dims2()?;
    let labels = Pgm::new(
        width,
        height,
        u16::MAX,
        seg.labels().iter().map(|&l| l as u16).collect(),
    )
    .expect("labels fit 16 bits");
    write_pgm(&labels, &with_suffix(&args.output, ".labels.pgm"), report)?;
    for r in 0..regions {
        let mask = seg.mask(r);
        let pgm = Pgm::new(
            width,
            height,
            255,
            mask.data().iter().map(|&b| if b { 255 } else { 0 }).collect(),
        )
        .expect("mask matches image");
        write_pgm(&pgm, &with_suffix(&args.output, &format!(".mask{r}.pgm")), report)?;
    }
    let mut t = Table::new(&["label", "value", "mass"]);
    for (r, (&value, &mass)) in seg.region_values().iter().zip(seg.region_masses()).enumerate() {
        t.row(vec![r.into(), value.into(), mass.into()]);
    }
    write_table(&t, &with_suffix(&args.output, ".regions.csv"), report)?;
    report.metric("regions", regions);
    Ok(())
}

pub fn noise(args: &NoiseArgs, report: &mut RunReport) -> Result<()> {
    let pgm = Pgm::read(&args.input)?;
    let clean = pgm.to_image();
    let spec = NoiseSpec::new(args.snr, args.seed)?;
    report.param("snr", args.snr);
    report.param("seed", args.seed);
    report.param("clamp", args.clamp);
    report.param("generator", "chacha8+box-muller");
    let mut noisy = report.timed("noise", || add_gaussian_noise(&clean, &spec))?;
    if args.clamp {
        let top = pgm.maxval() as f64;
        noisy = noisy.map(|v| v.clamp(0.0, top))?;
    }
    let (written, saturated) = Pgm::from_image(&noisy, pgm.maxval())?;
    write_pgm(&written, &args.output, report)?;
    if let Some(csv) = &args.csv {
        write_table(&pixel_table(&noisy)?, csv, report)?;
    }
    report.metric("measured_snr", snr_measure(&clean, &noisy)?);
    report.metric("rmse", rmse(&clean, &noisy)?);
    report.metric("saturated_pixels", saturated);
    Ok(())
}

pub fn bench(args: &BenchArgs, report: &mut RunReport) -> Result<()> {
    if args.sizes.is_empty() || args.sizes.contains(&0) {
        return usage("--sizes must list positive image sides");
    }
    if args.levels == 0 {
        return usage("--levels must be positive");
    }
    let kernel = build_kernel(&args.kernel, Some(20.0), report)?;
    report.param("sizes", args.sizes.clone());
    report.param("levels", args.levels);
    report.param("seed", args.seed);
    report.param("naive_limit", args.naive_limit);

    let mut t = Table::new(&[
        "side",
        "n_pixels",
        "levels",
        "evals_1d",
        "evals_direct_grouped",
        "evals_direct_naive",
        "ms_1d",
        "ms_direct_grouped",
        "ms_direct_naive",
    ]);
    let ms = |start: std::time::Instant| start.elapsed().as_secs_f64() * 1e3;
    for &side in &args.sizes {
        let n = side * side;
        if args.levels > n {
            return usage(format!(
                "--levels {} exceeds the {n} pixels of side {side}",
                args.levels
            ));
        }
        let img = all_levels::<f64>(&[side, side], args.levels, args.seed);
        let (v0, levels) = decreasing_rearrangement(&img);

        let c = EvalCounter::new();
        let start = std::time::Instant::now();
        nf_step_counted(&v0, &v0, &kernel, &c)?;
        let ms_1d = ms(start);
        let evals_1d = c.take();

        let start = std::time::Instant::now();
        grouped_nf_step_counted(&img, &img, &kernel, &c)?;
        let ms_grouped = ms(start);
        let evals_grouped = c.take();

        let (evals_naive, ms_naive) = if n <= args.naive_limit {
            let start = std::time::Instant::now();
            direct_nf_step_counted(&img, &img, &kernel, &c)?;
            (Some(c.take()), Some(ms(start)))
        } else {
            (None, None)
        };
        report.kernel_evaluations += evals_1d + evals_grouped + evals_naive.unwrap_or(0);
        let timing = |v: Option<f64>| if args.omit_timings { Cell::Empty } else { v.into() };
        t.row(vec![
            side.into(),
            n.into(),
            levels.len().into(),
            evals_1d.into(),
            evals_grouped.into(),
            evals_naive.into(),
            timing(Some(ms_1d)),
            timing(Some(ms_grouped)),
            timing(ms_naive),
        ]);
    }
    write_table(&t, &args.output, report)?;
    Ok(())
}

/// Returns the CSV text; it is also written when `--output` is given.
pub fn compare(args: &CompareArgs, report: &mut RunReport) -> Result<String> {
    let reference = Pgm::read(&args.reference)?.to_image();
    let mut t = Table::new(&["path", "rmse", "snr"]);
    for path in &args.input {
        let img = Pgm::read(path)?.to_image();
        let e = rmse(&reference, &img)?;
        let snr = snr_measure(&reference, &img)?;
        t.row(vec![Cell::Text(path.display().to_string()), e.into(), snr.into()]);
    }
    if let Some(out) = &args.output {
        write_table(&t, out, report)?;
    }
    Ok(t.as_str().to_string())
}
