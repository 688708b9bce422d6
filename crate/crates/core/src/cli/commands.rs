use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{Isometry3, Vector3};
use rayon::prelude::*;

use super::config::{MetaMode, SegmentEntry};
use super::svg::{self, Curve, Series};
use super::{CliError, RunContext};
use crate::domain::{ActuationKind, DesignParam, ModuleDesign};
use crate::metamodel::{fit_behavior_metamodel, fit_coeff_metamodel, BehaviorMetaModels, DesignFamily};
use crate::mlp::{train, Affine, MlpSpec, MlpSurrogate};
use crate::oracle::{ingest_csv, write_csv_string, SampleSet, SyntheticFamily};
use crate::polyfit::{assemble_surrogate, extract_stiffness, fit_quality, FitConfig, FiveCoefficients, PolySurrogate};
use crate::prbm::{sweep_loadcases, ChainSpec, JointLaw, JointType, LoadCase, SegmentSpec, SPHERICAL_AXES};
use crate::shapematch::{
    axis_law, enumerate_structures, optimize_design, refit_and_verify, write_bundle, MetaLaws, RefitModel,
    StructuralCandidate, TargetShape, BUNDLE_FILES,
};

pub(super) fn dispatch(ctx: &mut RunContext) -> Result<(), CliError> {
    match ctx.command.as_str() {
        "generate" => generate(ctx),
        "ingest" => ingest(ctx),
        "fit-poly" => fit_poly(ctx),
        "fit-nn" => fit_nn(ctx),
        "fit-meta" => fit_meta(ctx),
        "simulate" => simulate(ctx),
        "shapematch" => shapematch(ctx),
        "report" => report(ctx),
        other => Err(CliError::Validation(format!("unknown command `{other}`"))),
    }
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "input".into())
}

fn has_ext(p: &Path, ext: &str) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

fn read_text(p: &Path) -> Result<String, CliError> {
    fs::read_to_string(p).map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))
}

fn csv_inputs(ctx: &RunContext) -> Result<Vec<PathBuf>, CliError> {
    let files: Vec<PathBuf> = ctx.inputs.iter().filter(|p| has_ext(p, "csv")).cloned().collect();
    if files.is_empty() {
        return Err(CliError::Validation(format!("{} needs at least one sample CSV (--input)", ctx.command)));
    }
    Ok(files)
}

fn load_sets(ctx: &mut RunContext, files: &[PathBuf]) -> Result<Vec<SampleSet>, CliError> {
    let cfg = ctx.config.ingest.to_ingest();
    ctx.timed("ingest", || load_files(&cfg, files))
}

fn load_files(cfg: &crate::oracle::IngestConfig, files: &[PathBuf]) -> Result<Vec<SampleSet>, CliError> {
    files.iter().map(|p| ingest_csv(p, cfg).map_err(|e| CliError::from(e).context(p.display()))).collect()
}

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Validation(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::Validation(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Shortest round-trip form, scientific for very small or large values.
fn num_str(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num_str).unwrap_or_default()
}

fn generate(ctx: &mut RunContext) -> Result<(), CliError> {
    let seed = ctx.seed("generate");
    let g = ctx.config.generate.clone();
    let truth = g.oracle().build(seed)?;
    if let Some(spec) = &g.family {
        let family = spec.build()?;
        let sets = ctx.timed("characterize", || {
            family.designs.par_iter().map(|d| truth.generate(d)).collect::<Result<Vec<_>, _>>()
        })?;
        ctx.write("family.json", family.to_manifest() + "\n")?;
        for (i, per_design) in sets.iter().enumerate() {
            for s in per_design {
                ctx.write(&format!("{}_{}.csv", family.id(i), s.axis_label), write_csv_string(s))?;
            }
        }
    } else {
        let d = g.design.unwrap_or(truth.reference);
        let sets = ctx.timed("characterize", || truth.generate(&d))?;
        for s in &sets {
            ctx.write(&format!("samples_{}.csv", s.axis_label), write_csv_string(s))?;
        }
    }
    Ok(())
}

fn ingest(ctx: &mut RunContext) -> Result<(), CliError> {
    let files = csv_inputs(ctx)?;
    let sets = load_sets(ctx, &files)?;
    let mut rows = Vec::new();
    for (p, s) in files.iter().zip(&sets) {
        let name = format!("{}.csv", stem(p));
        ctx.write(&name, write_csv_string(s))?;
        let ((p0, p1), (u0, u1)) = s.operating_box();
        rows.push(vec![
            name,
            s.axis_label.clone(),
            s.kind.to_string(),
            s.free_records().count().to_string(),
            s.constrained_records().count().to_string(),
            num_str(p0),
            num_str(p1),
            num_str(u0),
            num_str(u1),
        ]);
    }
    let summary = csv_string(&["file", "axis", "kind", "free_rows", "constrained_rows", "p_min", "p_max", "u_min", "u_max"], &rows)?;
    ctx.write("summary.csv", summary)
}

fn fit_poly(ctx: &mut RunContext) -> Result<(), CliError> {
    let files = csv_inputs(ctx)?;
    let sets = load_sets(ctx, &files)?;
    let cfg = ctx.config.fit_poly.clone();
    let mut rows = Vec::new();
    for (p, set) in files.iter().zip(&sets) {
        let fit = ctx.timed(&format!("fit {}", stem(p)), || -> Result<_, CliError> {
            let terms = extract_stiffness(set, &cfg)?;
            let s = assemble_surrogate(&terms);
            let q = fit_quality(&s, set)?;
            Ok((s, q))
        });
        let (s, q) = fit.map_err(|e| e.context(p.display()))?;
        let name = format!("poly_{}.json", stem(p));
        ctx.write(&name, s.to_json() + "\n")?;
        let c = s.coefficients().map(FiveCoefficients::to_array);
        let r = s.fit_report.as_ref().expect("fitted surrogates carry a report");
        let mut row = vec![name, set.axis_label.clone(), set.kind.to_string()];
        row.extend((0..5).map(|k| opt(c.map(|c| c[k]))));
        row.extend([opt(r.k_a.r2), opt(r.k_e.r2), opt(r.k_free.r2), num_str(q.rmse), opt(q.max_normalized)]);
        rows.push(row);
    }
    let header = ["file", "axis", "kind", "m_a", "b_a", "m_e", "b_e", "k_n", "r2_k_a", "r2_k_e", "r2_k_free", "rmse", "max_normalized_error"];
    ctx.write("fit_quality.csv", csv_string(&header, &rows)?)
}

fn fit_nn(ctx: &mut RunContext) -> Result<(), CliError> {
    let files = csv_inputs(ctx)?;
    let sets = load_sets(ctx, &files)?;
    let cfg = ctx.config.fit_nn.clone();
    let mut rows = Vec::new();
    for (p, set) in files.iter().zip(&sets) {
        let label = stem(p);
        let init_seed = ctx.seed(&format!("fit-nn/{label}/init"));
        let split_seed = ctx.seed(&format!("fit-nn/{label}/split"));
        let inputs: Vec<Vec<f64>> = set.records.iter().map(|r| vec![r.p, r.u]).collect();
        let outputs: Vec<Vec<f64>> = set.records.iter().map(|r| vec![r.tau]).collect();
        let spec = MlpSpec::new(2, cfg.hidden.clone(), 1, init_seed)?;
        let mut tc = cfg.train.clone();
        tc.seed = split_seed;
        if cfg.box_inputs {
            let ((p0, p1), (u0, u1)) = set.operating_box();
            tc.input_normalizer = Some(Affine::from_bounds(&[p0, u0], &[p1, u1]));
        }
        let (m, h) = ctx
            .timed(&format!("train {label}"), || train(&spec, &inputs, &outputs, &tc))
            .map_err(|e| CliError::from(e).context(p.display()))?;
        let name = format!("mlp_{label}.json");
        ctx.write(&name, m.with_kind(set.kind).to_json() + "\n")?;
        let hist: Vec<Vec<String>> = h
            .loss
            .iter()
            .enumerate()
            .map(|(i, l)| vec![(i + 1).to_string(), num_str(*l)])
            .collect();
        ctx.write(&format!("history_{label}.csv"), csv_string(&["iteration", "loss"], &hist)?)?;
        rows.push(vec![
            name,
            set.axis_label.clone(),
            opt(h.min_train_r2()),
            opt(h.min_holdout_r2()),
            num_str(h.train_rmse[0]),
            h.train_rows.to_string(),
            h.holdout_rows.to_string(),
        ]);
    }
    let header = ["file", "axis", "train_r2", "holdout_r2", "train_rmse", "train_rows", "holdout_rows"];
    ctx.write("training.csv", csv_string(&header, &rows)?)
}

/// Family manifest plus one sample CSV per design and axis, matched to the
/// family through the design metadata of each file.
fn load_family_data(ctx: &mut RunContext) -> Result<(DesignFamily, Vec<Vec<SampleSet>>), CliError> {
    let manifest = ctx
        .inputs
        .iter()
        .find(|p| has_ext(p, "json"))
        .ok_or_else(|| CliError::Validation("fit-meta needs a family manifest (family.json) among the inputs".into()))?;
    let family = DesignFamily::from_manifest(&read_text(manifest)?).map_err(|e| CliError::from(e).context(manifest.display()))?;
    let files = csv_inputs(ctx)?;
    let sets = load_sets(ctx, &files)?;
    let mut per_design: Vec<Vec<SampleSet>> = vec![Vec::new(); family.len()];
    for (p, s) in files.iter().zip(sets) {
        let i = family
            .index_of(&s.design)
            .ok_or_else(|| CliError::Validation(format!("{}: design is not part of the family", p.display())))?;
        per_design[i].push(s);
    }
    Ok((family, per_design))
}

fn fit_meta(ctx: &mut RunContext) -> Result<(), CliError> {
    let (family, sets) = load_family_data(ctx)?;
    let section = ctx.config.fit_meta.clone();
    let mut meta_cfg = section.meta_config();
    meta_cfg.seed = ctx.seed("fit-meta/init");
    meta_cfg.train.seed = ctx.seed("fit-meta/split");
    match section.mode {
        MetaMode::Behavior => {
            let models = ctx.timed("train", || fit_behavior_metamodel(&family, &sets, &meta_cfg))?;
            ctx.write("behavior.json", models.to_json() + "\n")?;
            let rows: Vec<Vec<String>> = models
                .axes
                .iter()
                .map(|a| {
                    vec![
                        a.axis.clone(),
                        opt(a.report.train_r2),
                        opt(a.report.holdout_r2),
                        num_str(a.report.train_rmse),
                        a.report.rows.to_string(),
                    ]
                })
                .collect();
            ctx.write("report.csv", csv_string(&["axis", "train_r2", "holdout_r2", "train_rmse", "rows"], &rows)?)
        }
        MetaMode::Coefficient => {
            let fits = ctx.timed("direct fits", || {
                sets.iter()
                    .enumerate()
                    .map(|(i, per)| {
                        let set = per.first().ok_or_else(|| CliError::Validation(format!("design {} has no samples", family.id(i))))?;
                        Ok(assemble_surrogate(&extract_stiffness(set, &section.poly)?))
                    })
                    .collect::<Result<Vec<PolySurrogate>, CliError>>()
            })?;
            let meta = ctx.timed("train", || fit_coeff_metamodel(&family, &fits, &meta_cfg))?;
            ctx.write("coeff_meta.json", meta.to_json() + "\n")?;
            let mut rows: Vec<Vec<String>> =
                FiveCoefficients::NAMES.iter().zip(meta.report.r2).map(|(n, r)| vec![n.to_string(), opt(r)]).collect();
            rows.push(vec!["pooled".into(), opt(meta.report.pooled_r2)]);
            rows.push(vec!["max_relative_error".into(), num_str(meta.report.max_relative_error)]);
            ctx.write("report.csv", csv_string(&["coefficient", "r2"], &rows)?)
        }
    }
}

/// Joint law fitted directly on fresh ground-truth samples of one design.
fn direct_joint_law(truth: &SyntheticFamily, d: &ModuleDesign, fit: &FitConfig) -> Result<(JointLaw, JointType), CliError> {
    let sets = truth.generate(d)?;
    let model = RefitModel::Poly { fit: fit.clone() };
    let labels: Vec<&str> = sets.iter().map(|s| s.axis_label.as_str()).collect();
    if labels.len() == 1 {
        return Ok((JointLaw::revolute(axis_law(&sets[0], &model)?), JointType::Revolute));
    }
    let axes = SPHERICAL_AXES
        .iter()
        .map(|l| {
            let set = sets
                .iter()
                .find(|s| s.axis_label == *l)
                .ok_or_else(|| CliError::Validation(format!("spherical joints need axes y, x and z, got {labels:?}")))?;
            Ok(axis_law(set, &model)?)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok((JointLaw { axes }, JointType::Spherical))
}

fn label_mass(g: f64) -> String {
    format!("{g}g")
}

fn simulate(ctx: &mut RunContext) -> Result<(), CliError> {
    let sim = ctx.config.simulate.clone();
    let meta = ctx.inputs.iter().find(|p| has_ext(p, "json")).cloned();
    let (laws, joint_type, segments) = match meta {
        Some(path) => {
            let models = BehaviorMetaModels::from_json(&read_text(&path)?).map_err(|e| CliError::from(e).context(path.display()))?;
            let laws = MetaLaws::new(&models)?;
            let segments = default_segments(&sim.segments, laws.family().designs[laws.family().len() / 2]);
            let jl = segments.iter().map(|s| laws.joint_law(&s.design)).collect::<Result<Vec<_>, _>>()?;
            (jl, laws.joint_type, segments)
        }
        None => {
            let truth = sim.oracle.build(ctx.seed("simulate/oracle"))?;
            let segments = default_segments(&sim.segments, truth.reference);
            let mut laws = Vec::new();
            let mut jt = JointType::Revolute;
            for s in &segments {
                let (l, t) = direct_joint_law(&truth, &s.design, &ctx.config.fit_poly)?;
                laws.push(l);
                jt = t;
            }
            (laws, jt, segments)
        }
    };
    let specs = segments
        .iter()
        .zip(laws)
        .map(|(s, law)| SegmentSpec { n: s.n, design: s.design, phi: s.phi, law })
        .collect();
    let mut chain = ChainSpec::new(specs, joint_type, sim.density)?;
    chain.base_pose = Isometry3::rotation(Vector3::y() * sim.base_tilt_deg.to_radians());
    if sim.tip_masses_g.is_empty() {
        return Err(CliError::Validation("tip_masses_g is empty".into()));
    }
    let loads: Vec<LoadCase> = sim
        .tip_masses_g
        .iter()
        .map(|g| {
            let lc = LoadCase::actuated(sim.pressure).with_tip_mass(*g);
            if sim.gravity { lc } else { lc.without_gravity() }
        })
        .collect();
    let results = ctx.timed("equilibria", || sweep_loadcases(&chain, &loads, &sim.solver));
    let mut states = Vec::with_capacity(results.len());
    for (g, r) in sim.tip_masses_g.iter().zip(results) {
        states.push(r.map_err(|e| CliError::from(e).context(format!("tip mass {g} g")))?);
    }
    let tip0 = states[0].centerline.last();
    let mut rows = Vec::new();
    for (g, s) in sim.tip_masses_g.iter().zip(&states) {
        let label = label_mass(*g);
        let pts: Vec<Vec<String>> = s
            .centerline
            .points()
            .iter()
            .enumerate()
            .map(|(k, p)| vec![k.to_string(), num_str(p.x), num_str(p.y), num_str(p.z)])
            .collect();
        ctx.write(&format!("centerline_{label}.csv"), csv_string(&["k", "x", "y", "z"], &pts)?)?;
        let dof = joint_type.dof();
        let q: Vec<Vec<String>> =
            s.q.iter().enumerate().map(|(i, q)| vec![(i / dof).to_string(), (i % dof).to_string(), q.to_string()]).collect();
        ctx.write(&format!("joints_{label}.csv"), csv_string(&["joint", "axis", "q"], &q)?)?;
        let tip = s.centerline.last();
        rows.push(vec![
            g.to_string(),
            num_str(tip.x),
            num_str(tip.y),
            num_str(tip.z),
            num_str((tip - tip0).norm()),
            num_str(s.residual_norm),
            s.iterations.to_string(),
            s.is_saturated().to_string(),
        ]);
    }
    let header = ["tip_mass_g", "tip_x", "tip_y", "tip_z", "tip_deflection", "residual", "iterations", "saturated"];
    ctx.write("summary.csv", csv_string(&header, &rows)?)
}

fn default_segments(given: &[SegmentEntry], design: ModuleDesign) -> Vec<SegmentEntry> {
    if given.is_empty() {
        (0..3).map(|_| SegmentEntry { n: 5, design, phi: 0.0 }).collect()
    } else {
        given.to_vec()
    }
}

fn shapematch(ctx: &mut RunContext) -> Result<(), CliError> {
    let section = ctx.config.shapematch.clone();
    let meta_path = ctx
        .inputs
        .iter()
        .find(|p| has_ext(p, "json"))
        .cloned()
        .ok_or_else(|| CliError::Validation("shapematch needs behavior meta-models (behavior.json) as input".into()))?;
    let models =
        BehaviorMetaModels::from_json(&read_text(&meta_path)?).map_err(|e| CliError::from(e).context(meta_path.display()))?;
    let laws = MetaLaws::new(&models)?;
    let target = match ctx.inputs.iter().find(|p| has_ext(p, "toml")) {
        Some(p) => TargetShape::from_toml(&read_text(p)?).map_err(|e| CliError::from(e).context(p.display()))?,
        None => section.target.build()?,
    };
    let candidates: Vec<StructuralCandidate> = match &section.candidates {
        Some(list) => list.iter().cloned().map(StructuralCandidate::new).collect(),
        None => {
            let range = match section.module_length {
                Some(r) => r,
                None => laws
                    .family()
                    .bounds_of(DesignParam::Length)
                    .or_else(|| laws.family().fixed.iter().find(|f| f.param == DesignParam::Length).map(|f| (f.value, f.value)))
                    .ok_or_else(|| CliError::Validation("module length range unknown".into()))?,
            };
            enumerate_structures(target.arc_length(), section.segments, range, &section.structure)?
        }
    };
    let mut search = section.search.clone();
    search.seed = ctx.seed("shapematch");
    let outcome = ctx.timed("optimize", || optimize_design(&target, &candidates, &laws, &search))?;
    let refit = match &section.refit {
        Some(r) => {
            let truth = r.oracle.build(ctx.seed("shapematch/refit"))?;
            Some(ctx.timed("refit", || refit_and_verify(&outcome.best, &target, &truth, &laws, &r.model, &search))?)
        }
        None => None,
    };
    write_bundle(&ctx.out, &outcome, refit.as_ref())?;
    for f in BUNDLE_FILES {
        ctx.record(f);
    }
    let mut rows = Vec::new();
    for c in &outcome.leaderboard {
        for h in &c.history {
            rows.push(vec![
                c.index.to_string(),
                c.structure.label(),
                h.generation.to_string(),
                h.evaluations.to_string(),
                num_str(h.sigma),
                num_str(h.best_f),
                num_str(h.mean_f),
                num_str(h.best_so_far),
            ]);
        }
    }
    let header = ["candidate", "structure", "generation", "evaluations", "sigma", "best_f", "mean_f", "best_so_far"];
    ctx.write("trace.csv", csv_string(&header, &rows)?)
}

/// Deformation span covering the free deflection at every level.
fn free_deflection_span(s: &PolySurrogate, pressures: &[f64]) -> (f64, f64) {
    let mut hi: f64 = 0.0;
    let mut lo: f64 = 0.0;
    for &p in pressures {
        let mut u = 0.0;
        for _ in 0..60 {
            let d = s.d_du(p, u);
            if d == 0.0 || !d.is_finite() {
                break;
            }
            u -= s.eval(p, u) / d;
        }
        if u.is_finite() {
            hi = hi.max(u);
            lo = lo.min(u);
        }
    }
    if hi - lo > 0.0 { (1.2 * lo, 1.2 * hi) } else { (0.0, 1.0) }
}

fn torque_series(eval: impl Fn(f64, f64) -> f64, pressures: &[f64], span: (f64, f64), unit: &str) -> Vec<Series> {
    pressures
        .iter()
        .map(|&p| Series {
            label: format!("p = {p} {unit}"),
            points: (0..=100)
                .map(|k| {
                    let u = span.0 + (span.1 - span.0) * k as f64 / 100.0;
                    (u, eval(p, u))
                })
                .collect(),
        })
        .collect()
}

fn read_table(p: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(p)
        .map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?;
    let header: Vec<String> = r.headers().map_err(|e| CliError::Validation(e.to_string()))?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
        .collect::<Result<Vec<Vec<String>>, _>>()
        .map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?;
    Ok((header, rows))
}

fn column(header: &[String], name: &str) -> Option<usize> {
    header.iter().position(|h| h == name)
}

fn num(s: &str, p: &Path, row: usize) -> Result<f64, CliError> {
    s.trim().parse().map_err(|_| CliError::Validation(format!("{}: row {}: `{s}` is not a number", p.display(), row + 2)))
}

fn points3(p: &Path, rows: &[Vec<String>], cols: [usize; 3]) -> Result<Vec<[f64; 3]>, CliError> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| Ok([num(&r[cols[0]], p, i)?, num(&r[cols[1]], p, i)?, num(&r[cols[2]], p, i)?]))
        .collect()
}

fn report(ctx: &mut RunContext) -> Result<(), CliError> {
    if ctx.inputs.is_empty() {
        return Err(CliError::Validation("report needs inputs (--input)".into()));
    }
    let cfg = ctx.config.report.clone();
    let (w, h) = (cfg.width, cfg.height);
    let mut loads: Vec<Curve> = Vec::new();
    let inputs = ctx.inputs.clone();
    let mut rendered = 0;
    for p in &inputs {
        let name = stem(p);
        if has_ext(p, "json") {
            let text = read_text(p)?;
            let series = if let Ok(s) = PolySurrogate::from_json(&text) {
                let span = cfg.deformation.unwrap_or_else(|| free_deflection_span(&s, &cfg.pressures));
                torque_series(|p, u| s.eval(p, u), &cfg.pressures, span, unit_of(s.kind))
            } else if let Ok(m) = MlpSurrogate::from_json(&text) {
                if m.spec.input_dim != 2 || m.spec.output_dim != 1 {
                    continue;
                }
                let span = cfg.deformation.unwrap_or((0.0, 1.0));
                let unit = m.kind.map_or("", unit_of);
                torque_series(|p, u| m.predict_scalar(&[p, u]).unwrap_or(f64::NAN), &cfg.pressures, span, unit)
            } else {
                continue;
            };
            let svg = svg::line_plot(&format!("Net joint effort: {name}"), "deformation u (rad)", "effort τ (N·m)", &series, w, h);
            ctx.write(&format!("torque_{name}.svg"), svg)?;
            rendered += 1;
        } else if has_ext(p, "csv") {
            let (header, rows) = read_table(p)?;
            let col = |n: &str| column(&header, n);
            if let (Some(a), Some(b), Some(c), Some(d), Some(e), Some(f)) =
                (col("sim_x"), col("sim_y"), col("sim_z"), col("target_x"), col("target_y"), col("target_z"))
            {
                let curves = [
                    Curve { label: "simulated".into(), points: points3(p, &rows, [a, b, c])?, dashed: false },
                    Curve { label: "target".into(), points: points3(p, &rows, [d, e, f])?, dashed: true },
                ];
                ctx.write(&format!("match_{name}.svg"), svg::orthographic_views("Simulated and target centerlines", &curves, 2.0 * w, h))?;
                rendered += 1;
            } else if let (Some(a), Some(b), Some(c)) = (col("x"), col("y"), col("z")) {
                loads.push(Curve { label: name.clone(), points: points3(p, &rows, [a, b, c])?, dashed: false });
            } else if let (Some(ev), Some(best)) = (col("evaluations"), col("best_so_far").or(col("best_f"))) {
                let key = col("structure").or(col("candidate"));
                let mut series: Vec<Series> = Vec::new();
                for (i, r) in rows.iter().enumerate() {
                    let label = key.map(|k| r[k].clone()).unwrap_or_else(|| name.clone());
                    let pt = (num(&r[ev], p, i)?, num(&r[best], p, i)?);
                    match series.iter_mut().find(|s| s.label == label) {
                        Some(s) => s.points.push(pt),
                        None => series.push(Series { label, points: vec![pt] }),
                    }
                }
                series.sort_by(|a, b| {
                    let last = |s: &Series| s.points.last().map_or(f64::INFINITY, |p| p.1);
                    last(a).total_cmp(&last(b)).then_with(|| a.label.cmp(&b.label))
                });
                series.truncate(8);
                let svg = svg::line_plot("Optimization trace", "evaluations", "best objective", &series, w, h);
                let file = if name.starts_with("trace") { format!("{name}.svg") } else { format!("trace_{name}.svg") };
                ctx.write(&file, svg)?;
                rendered += 1;
            }
        }
    }
    if !loads.is_empty() {
        ctx.write("centerlines.svg", svg::orthographic_views("Centerlines", &loads, 2.0 * w, h))?;
        rendered += 1;
    }
    if rendered == 0 {
        return Err(CliError::Validation("no input could be rendered".into()));
    }
    Ok(())
}

fn unit_of(kind: ActuationKind) -> &'static str {
    match kind {
        ActuationKind::Pressure => "kPa",
        ActuationKind::TendonForce => "N",
    }
}
