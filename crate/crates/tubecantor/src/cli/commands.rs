//! The implementations behind the binary's verbs. Each returns the text to
//! print on success; failures carry the exit code through [`CliError`].

use super::config::parse_config;
use super::io::{
    atomic_write, cubes_csv, cubes_file, fmt_real, load_run, points_csv, points_file,
};
use super::manifest::manifest_for;
use super::svg::render_svg;
use crate::analysis::{choose_m, montecarlo_events, montecarlo_mainclaim, select_k};
use crate::cantor::{build_cantor, CantorError};
use crate::construction::{dilation_constant, ConstructionParams, ParentFamily};
use crate::verify::{full_report, VerificationReport};
use crate::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

const SWEEP_STREAM: u64 = 5 << 32;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, config, or on-disk state. Exit code 2.
    Usage(String),
    /// The randomized construction did not accept. Exit code 3.
    Construction(String),
    /// A built run failed verification. Exit code 4.
    Verification(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Construction(_) => 3,
            CliError::Verification(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Construction(m) | CliError::Verification(m) => m,
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    atomic_write(path, bytes).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    text
}

/// Contents of `verification.json`: one report per generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationFile {
    pub seed: u64,
    pub tool_version: String,
    pub all_pass: bool,
    pub reports: Vec<VerificationReport>,
}

pub fn cmd_params(d: usize, s: Real, c_abs: Real) -> Result<String, CliError> {
    let k = select_k(d, s).map_err(usage)?;
    let r = dilation_constant(d, s, 4);
    let mut out = String::new();
    writeln!(out, "d = {d}").unwrap();
    writeln!(out, "s = {s}").unwrap();
    writeln!(
        out,
        "k = {k}    smallest integer with k (d - 1 - s) > 2 (d - 1)"
    )
    .unwrap();
    match choose_m(d, s, k, 1.0, c_abs, 1) {
        Ok(m) => {
            let eta = (m as Real).powf(-s / d as Real);
            writeln!(
                out,
                "suggested m = {m}    smallest density accepted at side 1, C_abs = {c_abs}"
            )
            .unwrap();
            writeln!(
                out,
                "eta = {}    cell scale m^(-s/d) at that density",
                fmt_real(eta)
            )
            .unwrap();
        }
        Err(e) => {
            writeln!(out, "suggested m: none ({e})").unwrap();
        }
    }
    writeln!(
        out,
        "r = {r}    tube dilation max(2 A^(1/s), 1 + ceil(sqrt(d) A^(1/s))) at A = 4"
    )
    .unwrap();
    Ok(out)
}

pub fn cmd_construct(config: &Path, out_dir: &Path) -> Result<String, CliError> {
    let text = fs::read_to_string(config)
        .map_err(|e| CliError::Usage(format!("{}: {e}", config.display())))?;
    let schedule = parse_config(&text).map_err(CliError::Usage)?;
    let cs = build_cantor(&schedule).map_err(|e| match e {
        CantorError::BadSchedule(_) => CliError::Usage(e.to_string()),
        other => CliError::Construction(other.to_string()),
    })?;
    let manifest = manifest_for(&cs).map_err(|e| CliError::Construction(e.to_string()))?;
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Usage(format!("{}: {e}", out_dir.display())))?;
    write_file(&out_dir.join("manifest.json"), to_json(&manifest).as_bytes())?;
    let mut summary = String::new();
    for (i, gen) in cs.generations.iter().enumerate() {
        let generation = i as u32 + 1;
        write_file(
            &out_dir.join(cubes_file(generation)),
            cubes_csv(generation, &gen.children, &gen.child_parent).as_bytes(),
        )?;
        let centers: Vec<_> = gen.children.iter().map(|c| c.center.clone()).collect();
        write_file(
            &out_dir.join(points_file(generation)),
            points_csv(generation, &centers, &gen.child_parent).as_bytes(),
        )?;
        writeln!(
            summary,
            "generation {generation}: {} cubes of side {} ({} retries)",
            gen.children.len(),
            fmt_real(gen.epsilon),
            gen.retries
        )
        .unwrap();
    }
    write!(summary, "wrote {}", out_dir.display()).unwrap();
    Ok(summary)
}

pub fn cmd_verify(run_dir: &Path) -> Result<String, CliError> {
    let (mut manifest, cs) = load_run(run_dir).map_err(CliError::Usage)?;
    let mut reports = Vec::with_capacity(cs.depth());
    let mut summary = String::new();
    let mut failed = Vec::new();
    for n in 1..=cs.depth() {
        let parent_cubes = cs.family_at(n - 1);
        if parent_cubes.is_empty() {
            return Err(CliError::Usage(format!(
                "generation {} has no parent cubes on disk",
                n
            )));
        }
        let parents = ParentFamily {
            cubes: parent_cubes,
            delta: cs.side_lengths[n - 1],
        };
        let params = &manifest.generations[n - 1].params;
        let report = full_report(&cs.generations[n - 1], &parents, params);
        if report.pass {
            writeln!(summary, "generation {n}: pass").unwrap();
        } else {
            let mut bad = Vec::new();
            if !report.counts.pass() {
                bad.push("counts");
            }
            if !report.eta_separation.pass {
                bad.push("eta_separation");
            }
            if !report.thin_tube.pass {
                bad.push("thin_tube");
            }
            if !report.intermediate_law.pass {
                bad.push("intermediate_law");
            }
            if !report.hypothesis.pass {
                bad.push("hypothesis");
            }
            if !report.tube_budget.pass {
                bad.push("tube_budget");
            }
            writeln!(summary, "generation {n}: FAIL ({})", bad.join(", ")).unwrap();
            failed.push(format!("generation {n}: {}", bad.join(", ")));
        }
        reports.push(report);
    }
    let all_pass = failed.is_empty();
    let law_constant = reports
        .iter()
        .map(|r| r.intermediate_law.max_constant)
        .fold(0.0, Real::max);
    manifest.measured.law_constant = Some(law_constant);
    write_file(
        &run_dir.join("manifest.json"),
        to_json(&manifest).as_bytes(),
    )?;
    let file = VerificationFile {
        seed: manifest.schedule.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        all_pass,
        reports,
    };
    write_file(
        &run_dir.join("verification.json"),
        to_json(&file).as_bytes(),
    )?;
    if all_pass {
        write!(summary, "all checks pass").unwrap();
        Ok(summary)
    } else {
        Err(CliError::Verification(failed.join("; ")))
    }
}

fn random_unit_direction<R: Rng>(rng: &mut R, d: usize) -> Vec<Real> {
    loop {
        let v: Vec<Real> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<Real>().sqrt();
        if norm > 0.1 && norm <= 1.0 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

pub fn cmd_sweep(
    run_dir: &Path,
    tubes: u64,
    min_width: Option<Real>,
    max_width: Option<Real>,
) -> Result<String, CliError> {
    let (mut manifest, cs) = load_run(run_dir).map_err(CliError::Usage)?;
    if tubes == 0 {
        return Err(CliError::Usage("need at least one tube".into()));
    }
    let depth = cs.depth();
    let w_lo = min_width.unwrap_or(cs.side_lengths[depth]);
    let w_hi = max_width.unwrap_or(1.0);
    if !(w_lo > 0.0 && w_lo <= w_hi) {
        return Err(CliError::Usage(format!(
            "need 0 < min width <= max width (got {w_lo} .. {w_hi})"
        )));
    }
    let d = cs.schedule.d;
    let s = cs.schedule.s;
    let sqrt_d = (d as Real).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(cs.schedule.seed);
    rng.set_stream(SWEEP_STREAM);

    let mut csv = String::new();
    let anchor_cols: Vec<String> = (0..d).map(|a| format!("a{a}")).collect();
    let dir_cols: Vec<String> = (0..d).map(|a| format!("dir{a}")).collect();
    writeln!(
        csv,
        "width,{},{},estimate,ratio",
        anchor_cols.join(","),
        dir_cols.join(",")
    )
    .unwrap();

    let mut max_ratio: Real = 0.0;
    let mut per_generation = vec![0.0 as Real; depth];
    for _ in 0..tubes {
        let u: Real = rng.gen();
        let width = (w_lo.ln() + u * (w_hi.ln() - w_lo.ln())).exp();
        let anchor: Vec<Real> = (0..d).map(|_| rng.gen()).collect();
        let direction = random_unit_direction(&mut rng, d);
        let tube = crate::geometry::Tube {
            anchor: crate::geometry::Point::new(anchor.clone()),
            direction: direction.clone(),
            width,
        };
        let estimate = crate::cantor::tube_content_estimate(&cs, &tube);
        let ratio = estimate.value / width.powf(s);
        max_ratio = max_ratio.max(ratio);
        for n in 1..=depth {
            let count = crate::cantor::count_cubes_meeting_tube(&cs, n, &tube)
                .expect("generation in range");
            let gen_ratio =
                count as Real * (sqrt_d * cs.side_lengths[n]).powf(s) / width.powf(s);
            per_generation[n - 1] = per_generation[n - 1].max(gen_ratio);
        }
        let fields: Vec<String> = std::iter::once(fmt_real(width))
            .chain(anchor.iter().map(|&x| fmt_real(x)))
            .chain(direction.iter().map(|&x| fmt_real(x)))
            .chain([fmt_real(estimate.value), fmt_real(ratio)])
            .collect();
        writeln!(csv, "{}", fields.join(",")).unwrap();
    }
    writeln!(csv, "# C_run = {}", fmt_real(max_ratio)).unwrap();
    for (i, &c) in per_generation.iter().enumerate() {
        writeln!(csv, "# C_run_gen_{} = {}", i + 1, fmt_real(c)).unwrap();
    }
    write_file(&run_dir.join("sweep.csv"), csv.as_bytes())?;

    manifest.measured.content_ratio_max = Some(max_ratio);
    manifest.measured.content_ratio_per_generation = Some(per_generation.clone());
    write_file(
        &run_dir.join("manifest.json"),
        to_json(&manifest).as_bytes(),
    )?;

    let mut summary = format!("C_run = {} over {tubes} tubes", fmt_real(max_ratio));
    for (i, &c) in per_generation.iter().enumerate() {
        write!(summary, "\ngeneration {}: max ratio {}", i + 1, fmt_real(c)).unwrap();
    }
    Ok(summary)
}

pub fn cmd_montecarlo(config: &Path, trials: u64, out_dir: &Path) -> Result<String, CliError> {
    let text = fs::read_to_string(config)
        .map_err(|e| CliError::Usage(format!("{}: {e}", config.display())))?;
    let schedule = parse_config(&text).map_err(CliError::Usage)?;
    let k = select_k(schedule.d, schedule.s).map_err(usage)?;
    let m = match &schedule.m_schedule {
        crate::cantor::MSchedule::Explicit(list) => list[0],
        crate::cantor::MSchedule::Auto => {
            choose_m(schedule.d, schedule.s, k, 1.0, schedule.c_abs, 1).map_err(usage)?
        }
    };
    let params = ConstructionParams::new(
        schedule.d,
        schedule.s,
        1.0,
        k,
        schedule.a,
        m,
        schedule.seed,
        schedule.max_retries,
        schedule.margin,
    )
    .map_err(usage)?;
    let family = ParentFamily::unit(schedule.d);
    let main = montecarlo_mainclaim(&family, &params, trials).map_err(usage)?;
    let events = montecarlo_events(&family, &params, trials).map_err(usage)?;
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Usage(format!("{}: {e}", out_dir.display())))?;

    let mut csv = String::from("event,trials,passes,frequency\n");
    let rows = [
        ("min_count", events.min_count_passes, events.min_count_frequency()),
        ("grid_cluster", events.grid_passes, events.grid_frequency()),
        (
            "tube_budget",
            events.tube_budget_passes,
            events.tube_budget_frequency(),
        ),
        ("max_xr_ge_tenth", main.exceedances, main.frequency),
    ];
    for (event, passes, frequency) in rows {
        writeln!(csv, "{event},{trials},{passes},{}", fmt_real(frequency)).unwrap();
    }
    write_file(&out_dir.join("montecarlo.csv"), csv.as_bytes())?;

    let mut hist = String::from("trial,max_xr\n");
    for (trial, &x) in main.trial_maxima.iter().enumerate() {
        writeln!(hist, "{trial},{}", fmt_real(x)).unwrap();
    }
    write_file(&out_dir.join("xr_histogram.csv"), hist.as_bytes())?;

    let mut summary = String::new();
    for (event, _, frequency) in rows {
        writeln!(summary, "{event}: frequency {frequency}").unwrap();
    }
    write!(summary, "wrote {}", out_dir.display()).unwrap();
    Ok(summary)
}

pub fn cmd_export_svg(
    run_dir: &Path,
    generation: u32,
    out: Option<&Path>,
) -> Result<String, CliError> {
    let (_, cs) = load_run(run_dir).map_err(CliError::Usage)?;
    if cs.schedule.d != 2 {
        return Err(CliError::Usage(format!(
            "plots are drawn only for d = 2 (run has d = {})",
            cs.schedule.d
        )));
    }
    if generation == 0 || generation as usize > cs.depth() {
        return Err(CliError::Usage(format!(
            "generation {generation} is not in 1..={}",
            cs.depth()
        )));
    }
    let overlay = fs::read_to_string(run_dir.join("verification.json"))
        .ok()
        .and_then(|text| serde_json::from_str::<VerificationFile>(&text).ok())
        .and_then(|file| {
            file.reports
                .get(generation as usize - 1)
                .and_then(|r| r.thin_tube.worst_tube.clone())
        });
    let svg = render_svg(&cs.family_at(generation as usize), overlay.as_ref());
    let default_path = run_dir.join(format!("generation_{generation}.svg"));
    let path = out.unwrap_or(&default_path);
    write_file(path, svg.as_bytes())?;
    Ok(format!("wrote {}", path.display()))
}
