//! End-to-end runs behind the CLI subcommands: synth, analyze, append,
//! roc, compare. File layout and persistence live here; the math stays in
//! the other modules.
//!
//! An analysis directory holds the signal and correlation outputs plus a
//! `state.json` and the per-image coefficient grids, so later images can be
//! appended without retransforming the history.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, FixedOffset};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::change::{change_signal, deviation_cube, transition_cube, ChangeSignal};
use crate::coeff::{build_coeff_stack, CoeffStack};
use crate::dwt::{
    approx_energy_fraction, max_feasible_level, upsample_coeff_map, Basis, Boundary, FilterBank,
    Upsample,
};
use crate::error::{Error, Result};
use crate::eval::{roc_curve, run_comparison, ComparisonRow, Detector};
use crate::io::{
    atomic_write, load_manifest, read_image, read_truth_mask, write_manifest, write_matrix_csv,
    write_matrix_wecs1, write_pgm_mask, write_pgm_scaled, write_signal_csv, Manifest,
    ManifestEntry, MANIFEST_VERSION,
};
use crate::screening::{
    correlation_map, screening_report, CorrelationMap, ScreeningReport, DEFAULT_QUANTILE_GRID,
};
use crate::stack::{
    combine_channels_euclid, log_transform, Channel, Domain, ImageStack, DEFAULT_LOG_FLOOR,
};
use crate::synth::{add_speckle, gen_ellipse_scene, reference_specs, EllipseSpec, NoiseModel};

const STATE_VERSION: &str = "1";
const SCENE_VERSION: &str = "1";

/// Which decomposition depths the energy retention table covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnergyTable {
    /// Depths 1..=4, silently clamped to what the image size supports.
    DefaultLadder,
    /// Exactly these depths; an infeasible depth is an error.
    Explicit(Vec<usize>),
    /// No energy table.
    Skip,
}

#[derive(Debug, Clone)]
pub struct AnalyzeConfig {
    pub basis: Basis,
    pub level: usize,
    pub boundary: Boundary,
    /// Treat inputs as already transformed; skip the log step.
    pub no_log: bool,
    pub floor: f64,
    pub quantiles: Vec<f64>,
    pub mad_k: f64,
    pub energy: EnergyTable,
    /// Replicate each coefficient site over its pixel footprint before
    /// thresholding, so masks and counts are at pixel resolution.
    pub pixel_screening: bool,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig {
            basis: Basis::Db2,
            level: 2,
            boundary: Boundary::Auto,
            no_log: false,
            floor: DEFAULT_LOG_FLOOR,
            quantiles: DEFAULT_QUANTILE_GRID.to_vec(),
            mad_k: 2.0,
            energy: EnergyTable::DefaultLadder,
            pixel_screening: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisResult {
    pub coeffs: CoeffStack,
    pub signal_d: ChangeSignal,
    pub signal_t: ChangeSignal,
    pub map_d: CorrelationMap,
    pub map_t: CorrelationMap,
    pub report: ScreeningReport,
    /// (level, mean retained energy fraction) rows, when requested.
    pub energy: Option<Vec<(usize, f64)>>,
}

/// In-memory analysis of a stack: the coefficient build, both series, both
/// correlation maps, and the threshold report. This is the compute path the
/// file-level [`run_analyze`] drives.
pub fn analyze_stack(stack: &ImageStack, cfg: &AnalyzeConfig) -> Result<AnalysisResult> {
    let analyzed = if cfg.no_log {
        stack.clone()
    } else {
        log_transform(stack, cfg.floor)?
    };
    let bank = FilterBank::new(cfg.basis);
    let cs = build_coeff_stack(&analyzed, &bank, cfg.level, cfg.boundary, true)?;
    let (signal_d, signal_t, map_d, map_t, report) = screen_coeffs(&cs, cfg)?;
    let energy = match resolve_energy_levels(&cfg.energy, stack.dims(), &bank) {
        Some(levels) => {
            let mut accs = new_accums(&levels);
            for img in analyzed.images() {
                accumulate_energy(&mut accs, img, &bank, cfg.boundary)?;
            }
            Some(finalize_energy(&accs)?)
        }
        None => None,
    };
    Ok(AnalysisResult {
        coeffs: cs,
        signal_d,
        signal_t,
        map_d,
        map_t,
        report,
        energy,
    })
}

/// Series, correlation maps, and report from an existing coefficient stack.
fn screen_coeffs(
    cs: &CoeffStack,
    cfg: &AnalyzeConfig,
) -> Result<(
    ChangeSignal,
    ChangeSignal,
    CorrelationMap,
    CorrelationMap,
    ScreeningReport,
)> {
    let (signal_d, map_d) = {
        let cube = deviation_cube(cs)?;
        let signal = change_signal(&cube);
        let map = correlation_map(&cube, &signal)?;
        (signal, map)
    };
    let (signal_t, map_t) = {
        let cube = transition_cube(cs)?;
        let signal = change_signal(&cube);
        let map = correlation_map(&cube, &signal)?;
        (signal, map)
    };
    let (map_d, map_t) = if cfg.pixel_screening {
        (
            replicate_map(&map_d, cs.source_dims(), cs.level())?,
            replicate_map(&map_t, cs.source_dims(), cs.level())?,
        )
    } else {
        (map_d, map_t)
    };
    let report = screening_report(&map_d, &map_t, &signal_d, &signal_t, &cfg.quantiles, cfg.mad_k)?;
    Ok((signal_d, signal_t, map_d, map_t, report))
}

/// Nearest-neighbor replication of a correlation map (values and the
/// degenerate flags) to pixel resolution.
fn replicate_map(
    map: &CorrelationMap,
    dims: (usize, usize),
    level: usize,
) -> Result<CorrelationMap> {
    let values = upsample_coeff_map(&map.values, dims, level, Upsample::Nearest)?;
    let deg = map.degenerate.mapv(|b| if b { 1.0 } else { 0.0 });
    let deg = upsample_coeff_map(&deg, dims, level, Upsample::Nearest)?;
    Ok(CorrelationMap {
        kind: map.kind,
        values,
        degenerate: deg.mapv(|v| v != 0.0),
    })
}

fn resolve_energy_levels(
    e: &EnergyTable,
    dims: (usize, usize),
    bank: &FilterBank,
) -> Option<Vec<usize>> {
    match e {
        EnergyTable::Skip => None,
        EnergyTable::DefaultLadder => {
            let max = max_feasible_level(dims, bank);
            Some((1..=4).filter(|&l| l <= max).collect())
        }
        EnergyTable::Explicit(v) => Some(v.clone()),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EnergyAccum {
    level: usize,
    sum: f64,
    count: usize,
}

fn new_accums(levels: &[usize]) -> Vec<EnergyAccum> {
    levels
        .iter()
        .map(|&l| EnergyAccum {
            level: l,
            sum: 0.0,
            count: 0,
        })
        .collect()
}

/// Add one image's retained-energy fractions; zero-energy images are
/// skipped (their fraction is undefined), tracked via the count.
fn accumulate_energy(
    accs: &mut [EnergyAccum],
    img: &Array2<f64>,
    bank: &FilterBank,
    boundary: Boundary,
) -> Result<()> {
    for acc in accs {
        match approx_energy_fraction(img, bank, acc.level, boundary) {
            Ok(f) => {
                acc.sum += f;
                acc.count += 1;
            }
            Err(Error::ZeroEnergy) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

fn finalize_energy(accs: &[EnergyAccum]) -> Result<Vec<(usize, f64)>> {
    accs.iter()
        .map(|a| {
            if a.count == 0 {
                Err(Error::ZeroEnergy)
            } else {
                Ok((a.level, a.sum / a.count as f64))
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct AnalyzeParams {
    pub manifest: PathBuf,
    /// Second-channel manifest to merge via the pixel-wise Euclidean norm.
    pub combine: Option<PathBuf>,
    pub out: PathBuf,
    pub cfg: AnalyzeConfig,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub n: usize,
    pub dims: (usize, usize),
    pub grid_dims: (usize, usize),
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    version: String,
    format: String,
    basis: String,
    level: usize,
    boundary: String,
    no_log: bool,
    floor: f64,
    quantiles: Vec<f64>,
    mad_k: f64,
    pixel_screening: bool,
    energy: Option<Vec<EnergyAccum>>,
    source_rows: usize,
    source_cols: usize,
    images: Vec<String>,
    images_b: Option<Vec<String>>,
    coeffs: Vec<String>,
}

fn coeff_name(i: usize) -> String {
    format!("c{i:04}.wecs1")
}

fn absolutize(p: &Path) -> Result<PathBuf> {
    std::path::absolute(p).map_err(|e| Error::io(p, e))
}

fn validate_timestamps(m: &Manifest) -> Result<()> {
    let mut prev: Option<DateTime<FixedOffset>> = None;
    for e in &m.entries {
        if let Some(raw) = &e.timestamp {
            let ts = DateTime::parse_from_rfc3339(raw).map_err(|err| Error::Manifest {
                detail: format!("bad timestamp {raw:?}: {err}"),
            })?;
            if let Some(p) = prev {
                if ts <= p {
                    return Err(Error::Manifest {
                        detail: format!("timestamps not strictly increasing: {p} then {ts}"),
                    });
                }
            }
            prev = Some(ts);
        }
    }
    Ok(())
}

/// Read, optionally channel-merge, and optionally log-transform one image.
fn prepare_image(path: &Path, path_b: Option<&Path>, cfg: &AnalyzeConfig) -> Result<Array2<f64>> {
    let img = read_image(path)?;
    let merged = match path_b {
        Some(pb) => {
            let b = read_image(pb)?;
            let sa = ImageStack::new(vec![img], Channel::Generic, Domain::Raw)?;
            let sb = ImageStack::new(vec![b], Channel::Generic, Domain::Raw)?;
            combine_channels_euclid(&sa, &sb)?
                .into_images()
                .pop()
                .unwrap()
        }
        None => img,
    };
    if cfg.no_log {
        Ok(merged)
    } else {
        let s = ImageStack::new(vec![merged], Channel::Generic, Domain::Raw)?;
        Ok(log_transform(&s, cfg.floor)?.into_images().pop().unwrap())
    }
}

/// Full file-level analysis run: stream the manifest images through the
/// transform, screen, and write every output plus the appendable state.
pub fn run_analyze(p: &AnalyzeParams) -> Result<RunSummary> {
    let manifest = load_manifest(&p.manifest)?;
    validate_timestamps(&manifest)?;
    let base = p.manifest.parent().unwrap_or(Path::new("."));
    let paths: Vec<PathBuf> = manifest.entries.iter().map(|e| base.join(&e.path)).collect();
    let paths_b: Option<Vec<PathBuf>> = match &p.combine {
        Some(mp) => {
            let mb = load_manifest(mp)?;
            if mb.entries.len() != manifest.entries.len() {
                return Err(Error::LengthMismatch {
                    what: "second-channel manifest entries",
                    expected: manifest.entries.len(),
                    got: mb.entries.len(),
                });
            }
            let base_b = mp.parent().unwrap_or(Path::new("."));
            Some(mb.entries.iter().map(|e| base_b.join(&e.path)).collect())
        }
        None => None,
    };

    fs::create_dir_all(&p.out).map_err(|e| Error::io(&p.out, e))?;
    let coeff_dir = p.out.join("coeffs");
    fs::create_dir_all(&coeff_dir).map_err(|e| Error::io(&coeff_dir, e))?;

    let bank = FilterBank::new(p.cfg.basis);
    let mut cs: Option<CoeffStack> = None;
    let mut accs: Option<Vec<EnergyAccum>> = None;
    for (i, path) in paths.iter().enumerate() {
        let img = prepare_image(path, paths_b.as_ref().map(|v| v[i].as_path()), &p.cfg)?;
        let cs = match &mut cs {
            Some(c) => c,
            None => {
                accs = resolve_energy_levels(&p.cfg.energy, img.dim(), &bank)
                    .map(|ls| new_accums(&ls));
                cs.insert(CoeffStack::builder(
                    p.cfg.basis,
                    p.cfg.level,
                    p.cfg.boundary,
                    img.dim(),
                ))
            }
        };
        if let Some(accs) = &mut accs {
            accumulate_energy(accs, &img, &bank, p.cfg.boundary)?;
        }
        cs.push_image(&img)?;
        write_matrix_wecs1(&coeff_dir.join(coeff_name(i)), &cs.coeffs()[i])?;
    }
    let cs = cs.expect("manifest guarantees at least one image");
    let (signal_d, signal_t, map_d, map_t, report) = screen_coeffs(&cs, &p.cfg)?;
    let energy_rows = match &accs {
        Some(a) => Some(finalize_energy(a)?),
        None => None,
    };
    write_outputs(
        &p.out,
        &signal_d,
        &signal_t,
        &map_d,
        &map_t,
        &report,
        energy_rows.as_deref(),
    )?;

    let images = paths
        .iter()
        .map(|q| absolutize(q).map(|a| a.display().to_string()))
        .collect::<Result<Vec<_>>>()?;
    let images_b = match &paths_b {
        Some(v) => Some(
            v.iter()
                .map(|q| absolutize(q).map(|a| a.display().to_string()))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };
    let st = StateFile {
        version: STATE_VERSION.into(),
        format: crate::io::MATRIX_FORMAT_VERSION.into(),
        basis: p.cfg.basis.name().into(),
        level: p.cfg.level,
        boundary: p.cfg.boundary.name().into(),
        no_log: p.cfg.no_log,
        floor: p.cfg.floor,
        quantiles: p.cfg.quantiles.clone(),
        mad_k: p.cfg.mad_k,
        pixel_screening: p.cfg.pixel_screening,
        energy: accs,
        source_rows: cs.source_dims().0,
        source_cols: cs.source_dims().1,
        images,
        images_b,
        coeffs: (0..cs.n()).map(|i| format!("coeffs/{}", coeff_name(i))).collect(),
    };
    write_state(&p.out, &st)?;
    Ok(RunSummary {
        n: cs.n(),
        dims: cs.source_dims(),
        grid_dims: cs.grid_dims(),
        out: p.out.clone(),
    })
}

/// Extend a persisted analysis by one image and rewrite every output.
pub fn run_append(state_dir: &Path, image: &Path, image_b: Option<&Path>) -> Result<RunSummary> {
    let sp = state_dir.join("state.json");
    let text = fs::read_to_string(&sp).map_err(|e| Error::io(&sp, e))?;
    let mut st: StateFile =
        serde_json::from_str(&text).map_err(|e| Error::format(&sp, e.to_string()))?;
    if st.version != STATE_VERSION {
        return Err(Error::format(
            &sp,
            format!("unsupported state version {:?}", st.version),
        ));
    }
    let basis = Basis::parse(&st.basis)?;
    let boundary = Boundary::parse(&st.boundary)?;
    let cfg = AnalyzeConfig {
        basis,
        level: st.level,
        boundary,
        no_log: st.no_log,
        floor: st.floor,
        quantiles: st.quantiles.clone(),
        mad_k: st.mad_k,
        energy: EnergyTable::Skip,
        pixel_screening: st.pixel_screening,
    };
    if st.images_b.is_some() != image_b.is_some() {
        return Err(Error::BadParam {
            what: if st.images_b.is_some() {
                "this analysis combines two channels; --image-b is required".into()
            } else {
                "--image-b given, but the analysis is single-channel".into()
            },
        });
    }

    let grids = st
        .coeffs
        .iter()
        .map(|rel| read_image(&state_dir.join(rel)))
        .collect::<Result<Vec<_>>>()?;
    let mut cs = CoeffStack::from_parts(
        basis,
        st.level,
        boundary,
        (st.source_rows, st.source_cols),
        grids,
    )?;

    let img = prepare_image(image, image_b, &cfg)?;
    if let Some(accs) = &mut st.energy {
        accumulate_energy(accs, &img, &FilterBank::new(basis), boundary)?;
    }
    cs.push_image(&img)?;
    let idx = cs.n() - 1;
    write_matrix_wecs1(
        &state_dir.join("coeffs").join(coeff_name(idx)),
        &cs.coeffs()[idx],
    )?;

    let (signal_d, signal_t, map_d, map_t, report) = screen_coeffs(&cs, &cfg)?;
    let energy_rows = match &st.energy {
        Some(a) => Some(finalize_energy(a)?),
        None => None,
    };
    write_outputs(
        state_dir,
        &signal_d,
        &signal_t,
        &map_d,
        &map_t,
        &report,
        energy_rows.as_deref(),
    )?;

    st.images.push(absolutize(image)?.display().to_string());
    if let (Some(list), Some(pb)) = (&mut st.images_b, image_b) {
        list.push(absolutize(pb)?.display().to_string());
    }
    st.coeffs.push(format!("coeffs/{}", coeff_name(idx)));
    write_state(state_dir, &st)?;
    Ok(RunSummary {
        n: cs.n(),
        dims: cs.source_dims(),
        grid_dims: cs.grid_dims(),
        out: state_dir.to_path_buf(),
    })
}

fn write_state(dir: &Path, st: &StateFile) -> Result<()> {
    let mut text = serde_json::to_string_pretty(st).expect("state serializes");
    text.push('\n');
    atomic_write(&dir.join("state.json"), text.as_bytes())
}

fn write_outputs(
    out: &Path,
    signal_d: &ChangeSignal,
    signal_t: &ChangeSignal,
    map_d: &CorrelationMap,
    map_t: &CorrelationMap,
    report: &ScreeningReport,
    energy: Option<&[(usize, f64)]>,
) -> Result<()> {
    write_signal_csv(&out.join("d.csv"), &signal_d.values)?;
    write_signal_csv(&out.join("t.csv"), &signal_t.values)?;
    write_pgm_scaled(&out.join("corr_d.pgm"), &map_d.values)?;
    write_matrix_csv(&out.join("corr_d.csv"), &map_d.values)?;
    write_pgm_scaled(&out.join("corr_t.pgm"), &map_t.values)?;
    write_matrix_csv(&out.join("corr_t.csv"), &map_t.values)?;

    let mut s = String::from("quantile,tau_d,count_d,tau_t,count_t,count_union\n");
    for r in &report.rows {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.quantile, r.tau_d, r.count_d, r.tau_t, r.count_t, r.count_union
        ));
    }
    atomic_write(&out.join("report.csv"), s.as_bytes())?;

    for (row, (md, mt, mu)) in report.rows.iter().zip(&report.masks) {
        for m in [md, mt, mu] {
            let stem = format!("mask_{}_q{}", m.source.name(), row.quantile);
            write_pgm_mask(&out.join(format!("{stem}.pgm")), &m.indices)?;
            let vals = m.indices.mapv(|b| if b { 1.0 } else { 0.0 });
            write_matrix_csv(&out.join(format!("{stem}.csv")), &vals)?;
        }
    }

    let mut f = String::from("series,median,mad,threshold,flagged\n");
    for (name, fl) in [("d", &report.flags_d), ("t", &report.flags_t)] {
        let joined = fl
            .flagged
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(";");
        f.push_str(&format!(
            "{},{},{},{},{}\n",
            name,
            fl.median,
            fl.mad,
            fl.threshold(),
            joined
        ));
    }
    atomic_write(&out.join("flags.csv"), f.as_bytes())?;

    if let Some(rows) = energy {
        let mut e = String::from("level,mean_energy_fraction\n");
        for (l, v) in rows {
            e.push_str(&format!("{l},{v}\n"));
        }
        atomic_write(&out.join("energy.csv"), e.as_bytes())?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SynthParams {
    pub out: PathBuf,
    pub n: usize,
    pub dims: (usize, usize),
    pub noise: Option<NoiseModel>,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    version: String,
    rows: usize,
    cols: usize,
    n: usize,
    seed: u64,
    noise: Option<NoiseModel>,
    base: Vec<EllipseSpec>,
    changes: Vec<EllipseSpec>,
}

/// Generate the reference-style scene, write the images (noisy when a
/// noise model is given, and always the clean originals), the manifests,
/// the truth and per-step masks, and the scene description.
pub fn run_synth(p: &SynthParams) -> Result<RunSummary> {
    let (base, changes) = reference_specs(p.dims, p.n)?;
    let scene = gen_ellipse_scene(p.dims, &base, &changes, p.n)?;
    fs::create_dir_all(&p.out).map_err(|e| Error::io(&p.out, e))?;

    let mut clean_entries = Vec::with_capacity(p.n);
    for (i, img) in scene.images.images().iter().enumerate() {
        let name = format!("img_clean_{:02}.wecs1", i + 1);
        write_matrix_wecs1(&p.out.join(&name), img)?;
        clean_entries.push(ManifestEntry {
            path: name,
            timestamp: None,
            channel: None,
        });
    }
    write_manifest(
        &p.out.join("manifest_clean.json"),
        &Manifest {
            version: MANIFEST_VERSION.into(),
            entries: clean_entries.clone(),
        },
    )?;

    let entries = match p.noise {
        Some(model) => {
            let noisy = add_speckle(&scene.images, model, p.seed)?;
            let mut entries = Vec::with_capacity(p.n);
            for (i, img) in noisy.images().iter().enumerate() {
                let name = format!("img_{:02}.wecs1", i + 1);
                write_matrix_wecs1(&p.out.join(&name), img)?;
                entries.push(ManifestEntry {
                    path: name,
                    timestamp: None,
                    channel: None,
                });
            }
            entries
        }
        None => clean_entries,
    };
    write_manifest(
        &p.out.join("manifest.json"),
        &Manifest {
            version: MANIFEST_VERSION.into(),
            entries,
        },
    )?;

    write_pgm_mask(&p.out.join("truth.pgm"), &scene.truth_mask)?;
    for (m, mask) in &scene.per_step_masks {
        write_pgm_mask(&p.out.join(format!("step_{m:02}.pgm")), mask)?;
    }

    let desc = SceneFile {
        version: SCENE_VERSION.into(),
        rows: p.dims.0,
        cols: p.dims.1,
        n: p.n,
        seed: p.seed,
        noise: p.noise,
        base,
        changes,
    };
    let mut text = serde_json::to_string_pretty(&desc).expect("scene serializes");
    text.push('\n');
    atomic_write(&p.out.join("scene.json"), text.as_bytes())?;
    Ok(RunSummary {
        n: p.n,
        dims: p.dims,
        grid_dims: p.dims,
        out: p.out.clone(),
    })
}

#[derive(Debug, Clone)]
pub struct CompareParams {
    pub scene_dir: PathBuf,
    pub detectors: Vec<Detector>,
    /// Number of noise replicates, seeded seed0, seed0+1, ...
    pub seeds: usize,
    pub seed0: u64,
    /// None: use the scene's own noise model. Some(None): force clean.
    pub noise_override: Option<Option<NoiseModel>>,
    /// Directory for comparison.csv and the per-detector ROC curves.
    pub out: PathBuf,
}

/// Score the detectors on seeded replicates of a stored scene; write the
/// summary table and one ROC file per detector.
pub fn run_compare(p: &CompareParams) -> Result<Vec<ComparisonRow>> {
    let sp = p.scene_dir.join("scene.json");
    let text = fs::read_to_string(&sp).map_err(|e| Error::io(&sp, e))?;
    let sf: SceneFile =
        serde_json::from_str(&text).map_err(|e| Error::format(&sp, e.to_string()))?;
    if sf.version != SCENE_VERSION {
        return Err(Error::format(
            &sp,
            format!("unsupported scene version {:?}", sf.version),
        ));
    }
    let scene = gen_ellipse_scene((sf.rows, sf.cols), &sf.base, &sf.changes, sf.n)?;
    let noise = match &p.noise_override {
        Some(o) => *o,
        None => sf.noise,
    };
    let seeds: Vec<u64> = (0..p.seeds as u64).map(|k| p.seed0.wrapping_add(k)).collect();
    let rows = run_comparison(&scene, &p.detectors, &seeds, noise, Boundary::Auto)?;

    let dir = &p.out;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut s = String::from("detector,mean_auc,time_ms,score_truth_corr\n");
    for r in &rows {
        s.push_str(&format!(
            "{},{},{:.3},{}\n",
            r.detector, r.mean_auc, r.time_ms, r.score_truth_corr
        ));
    }
    atomic_write(&dir.join("comparison.csv"), s.as_bytes())?;
    for r in &rows {
        let fname = format!("roc_{}.csv", r.detector.replace('/', "-"));
        let mut s = String::from("seed,threshold,fpr,tpr\n");
        for (seed, roc) in &r.rocs {
            for k in 0..roc.thresholds.len() {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    seed, roc.thresholds[k], roc.fpr[k], roc.tpr[k]
                ));
            }
        }
        atomic_write(&dir.join(fname), s.as_bytes())?;
    }
    Ok(rows)
}

/// Score a saved map against a saved truth mask; write the curve, return
/// the area under it.
pub fn run_roc(scores: &Path, truth: &Path, out: &Path) -> Result<f64> {
    let s = read_image(scores)?;
    let t = read_truth_mask(truth)?;
    let roc = roc_curve(&s, &t)?;
    let mut text = String::from("threshold,fpr,tpr\n");
    for k in 0..roc.thresholds.len() {
        text.push_str(&format!(
            "{},{},{}\n",
            roc.thresholds[k], roc.fpr[k], roc.tpr[k]
        ));
    }
    if let Some(dir) = out.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    atomic_write(out, text.as_bytes())?;
    Ok(roc.auc)
}
