//! End-to-end orchestration: phantom → spectra → signal array → image → metrics.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::{RunConfig, TOROID_INPUT};
use super::formats::{save_grid, save_signal, save_spectra};
use super::planner::{estimate_time, TimeEstimate};
use crate::encoder::{add_measurement_noise, encode_spectra, ProjectionGrid, SignalArray, SpinNoiseSpectrum};
use crate::error::{Error, Result};
use crate::phantom::{
    center_and_place, extract_hydrogens, generate_toroid, parse_pdb_atoms, parse_xyz, voxelize, DensityGrid,
    Molecule, Placement,
};
use crate::physics::{dipolar_brms, larmor_frequency, GAUSS, GAUSS_PER_NM};
use crate::recon::{
    backproject, correlation, psf_rescale, quadratic_filter, toroid_contrast, weight_projections, ImageArray,
    ToroidRegions,
};

pub const SPECTRA_FILE: &str = "spectra.csv";
pub const SIGNAL_FILE: &str = "signal.nvs";
pub const RECON_RAW_FILE: &str = "recon_unfiltered.nvg";
pub const RECON_FILE: &str = "recon.nvg";
pub const TRUTH_FILE: &str = "truth.nvg";
pub const METRICS_FILE: &str = "metrics.txt";
pub const PLOT_FILE: &str = "plot_data.csv";

/// Loads the configured phantom and keeps its hydrogens.
pub fn load_phantom(cfg: &RunConfig) -> Result<Molecule> {
    let m = if cfg.input.trim() == TOROID_INPUT {
        generate_toroid(cfg.toroid_points, cfg.toroid_major_nm, cfg.toroid_tube_nm, cfg.seed)?
    } else {
        let path = Path::new(cfg.input.trim());
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("xyz") => parse_xyz(&text)?,
            Some("pdb") | Some("ent") => parse_pdb_atoms(&text)?,
            _ => return Err(Error::Config(format!("input '{}' is neither .xyz nor .pdb", path.display()))),
        }
    };
    let h = extract_hydrogens(&m);
    if h.is_empty() {
        return Err(Error::EmptyMolecule);
    }
    Ok(h)
}

pub fn place(cfg: &RunConfig) -> Result<Placement> {
    let m = load_phantom(cfg)?;
    center_and_place(&m, cfg.nv_depth_nm, cfg.nv_axis_vector()?)
}

pub fn gradient_t_per_m(cfg: &RunConfig) -> f64 {
    cfg.gradient_g_per_nm * GAUSS_PER_NM
}

/// Noise-free spectra for every orientation of the configured grid.
pub fn encode_clean(cfg: &RunConfig, placement: &Placement) -> Result<Vec<SpinNoiseSpectrum>> {
    let grid = ProjectionGrid::new(cfg.n_theta, cfg.n_phi)?;
    encode_spectra(
        &placement.molecule,
        &grid,
        gradient_t_per_m(cfg),
        cfg.delta_f_hz,
        &placement.nv,
        cfg.slice_combine,
    )
}

/// Adds the configured measurement noise; projection p draws from seed `seed + p`.
pub fn with_noise(cfg: &RunConfig, clean: &[SpinNoiseSpectrum]) -> Result<Vec<SpinNoiseSpectrum>> {
    clean
        .iter()
        .enumerate()
        .map(|(p, s)| add_measurement_noise(s, cfg.noise_sigma_t, cfg.seed.wrapping_add(p as u64)))
        .collect()
}

/// Measured spectra and the assembled signal array.
pub fn encode_stage(cfg: &RunConfig, placement: &Placement) -> Result<(Vec<SpinNoiseSpectrum>, SignalArray)> {
    let spectra = with_noise(cfg, &encode_clean(cfg, placement)?)?;
    let signal = SignalArray::from_spectra(&spectra, &ProjectionGrid::new(cfg.n_theta, cfg.n_phi)?)?;
    Ok((spectra, signal))
}

/// Unfiltered and filtered reconstructions.
pub fn reconstruct_stage(cfg: &RunConfig, signal: &SignalArray) -> Result<(ImageArray, ImageArray)> {
    let raw = backproject(
        &weight_projections(signal, cfg.weighting),
        cfg.grid_n,
        cfg.mode,
        cfg.interpolation,
    )?;
    let filtered = quadratic_filter(signal, &cfg.filter_spec())?;
    let img = backproject(
        &weight_projections(&filtered, cfg.weighting),
        cfg.grid_n,
        cfg.mode,
        cfg.interpolation,
    )?;
    Ok((raw, psf_rescale(img, cfg.psf)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub molecule: String,
    pub n_hydrogens: usize,
    pub larmor_khz: f64,
    pub brms_nt: f64,
    pub max_spread_khz: f64,
    pub n_projections: usize,
    pub n_r: usize,
    pub dr_nm: f64,
    pub grid_n: usize,
    pub pearson_rho: f64,
    pub toroid_contrast: f64,
    pub unfiltered_rho: f64,
    pub acquisition: TimeEstimate,
}

impl Metrics {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "molecule = {}", self.molecule);
        let _ = writeln!(s, "n_hydrogens = {}", self.n_hydrogens);
        let _ = writeln!(s, "larmor_khz = {}", self.larmor_khz);
        let _ = writeln!(s, "brms_nt = {}", self.brms_nt);
        let _ = writeln!(s, "max_spread_khz = {}", self.max_spread_khz);
        let _ = writeln!(s, "n_projections = {}", self.n_projections);
        let _ = writeln!(s, "n_r = {}", self.n_r);
        let _ = writeln!(s, "dr_nm = {}", self.dr_nm);
        let _ = writeln!(s, "grid_n = {}", self.grid_n);
        let _ = writeln!(s, "pearson_rho = {}", self.pearson_rho);
        let _ = writeln!(s, "toroid_contrast = {}", self.toroid_contrast);
        let _ = writeln!(s, "unfiltered_rho = {}", self.unfiltered_rho);
        let _ = writeln!(s, "acquisition_method = {}", self.acquisition.method);
        let _ = writeln!(s, "acquisition_points_per_projection = {}", self.acquisition.points_per_projection);
        let _ = writeln!(s, "acquisition_seconds = {}", self.acquisition.total_seconds);
        s
    }
}

pub fn max_spread_hz(spectra: &[SpinNoiseSpectrum]) -> f64 {
    spectra.iter().map(|s| s.occupied_spread_hz()).fold(0.0, f64::max)
}

pub fn toroid_regions(cfg: &RunConfig, placement: &Placement) -> Result<ToroidRegions> {
    let center = placement.molecule.centroid().ok_or(Error::EmptyMolecule)?;
    Ok(ToroidRegions::new(
        center,
        cfg.core_radius_nm,
        (cfg.annulus_inner_nm, cfg.annulus_outer_nm),
        cfg.slab_half_nm,
    ))
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub placement: Placement,
    pub spectra: Vec<SpinNoiseSpectrum>,
    pub signal: SignalArray,
    pub raw: ImageArray,
    pub image: ImageArray,
    pub truth: DensityGrid,
    pub metrics: Metrics,
}

/// Runs every stage in memory. Errors carry the failing stage name.
pub fn compute(cfg: &RunConfig) -> Result<PipelineRun> {
    cfg.validate()?;
    let placement = place(cfg).map_err(|e| e.in_stage("phantom"))?;
    let stage = |e: Error| e.in_stage("encode");
    let clean = encode_clean(cfg, &placement).map_err(stage)?;
    let spectra = with_noise(cfg, &clean).map_err(stage)?;
    let signal = SignalArray::from_spectra(&spectra, &ProjectionGrid::new(cfg.n_theta, cfg.n_phi)?).map_err(stage)?;
    let (raw, image) = reconstruct_stage(cfg, &signal).map_err(|e| e.in_stage("reconstruct"))?;

    let metrics_err = |e: Error| e.in_stage("metrics");
    let truth = voxelize(&placement.molecule, image.spec());
    let regions = toroid_regions(cfg, &placement)?;
    let spread = max_spread_hz(&clean);
    let metrics = Metrics {
        molecule: placement.molecule.name.clone(),
        n_hydrogens: placement.molecule.len(),
        larmor_khz: larmor_frequency(cfg.b0_gauss * GAUSS) / 1e3,
        brms_nt: dipolar_brms(
            placement.molecule.atoms.iter().map(|a| &a.position),
            &placement.nv.position,
            &placement.nv.axis,
        )
        .map_err(metrics_err)?
            * 1e9,
        max_spread_khz: spread / 1e3,
        n_projections: signal.n_projections(),
        n_r: signal.n_r(),
        dr_nm: signal.dr(),
        grid_n: cfg.grid_n,
        pearson_rho: correlation(&image, &truth).map_err(metrics_err)?,
        toroid_contrast: toroid_contrast(&image, &regions).map_err(metrics_err)?,
        unfiltered_rho: correlation(&raw, &truth).map_err(metrics_err)?,
        acquisition: estimate_time(signal.n_projections(), spread.max(cfg.delta_f_hz), cfg.delta_f_hz, cfg.timing_method)
            .map_err(metrics_err)?,
    };
    Ok(PipelineRun {
        placement,
        spectra,
        signal,
        raw,
        image,
        truth,
        metrics,
    })
}

/// Rows `series,i,j,u,v,value` for figure regeneration:
/// `spectrum` rows have i = projection, j = bin, u = r (nm), v = offset (Hz), value = B_rms (T);
/// `*_xy` / `*_xz` rows are image slices through the molecule centroid with
/// i, j voxel indices and u, v the in-plane coordinates (nm).
pub fn plot_data(run: &PipelineRun) -> String {
    let mut s = String::from("series,i,j,u,v,value\n");
    for (p, spec) in run.spectra.iter().enumerate() {
        for (j, ((r, f), b)) in spec.r_centers().iter().zip(&spec.freq_offsets).zip(&spec.brms).enumerate() {
            let _ = writeln!(s, "spectrum,{p},{j},{r:e},{f:e},{b:e}");
        }
    }
    let spec = *run.image.spec();
    let center = run.placement.molecule.centroid().unwrap_or_default();
    let v = spec.to_voxel(&center);
    let clamp = |x: f64| (x.round().max(0.0) as usize).min(spec.n - 1);
    let (cy, cz) = (clamp(v.y), clamp(v.z));
    for (name, grid) in [("recon", &run.image.grid), ("truth", &run.truth)] {
        for j in 0..spec.n {
            for i in 0..spec.n {
                let p = spec.voxel_center(i, j, cz);
                let _ = writeln!(s, "{name}_xy,{i},{j},{:e},{:e},{:e}", p.x, p.y, grid.get(i, j, cz));
            }
        }
        for j in 0..spec.n {
            for i in 0..spec.n {
                let p = spec.voxel_center(i, cy, j);
                let _ = writeln!(s, "{name}_xz,{i},{j},{:e},{:e},{:e}", p.x, p.z, grid.get(i, cy, j));
            }
        }
    }
    s
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub metrics: Metrics,
    pub artifacts: Vec<PathBuf>,
}

/// Runs the pipeline and writes every artifact into `cfg.output_dir`.
pub fn run_pipeline(cfg: &RunConfig) -> Result<PipelineReport> {
    let run = compute(cfg)?;
    let dir = &cfg.output_dir;
    let write = |e: Error| e.in_stage("write");
    std::fs::create_dir_all(dir).map_err(|e| Error::from(e).in_stage("write"))?;
    let path = |name: &str| dir.join(name);
    save_spectra(&path(SPECTRA_FILE), &run.spectra).map_err(write)?;
    save_signal(&path(SIGNAL_FILE), &run.signal).map_err(write)?;
    save_grid(&path(RECON_RAW_FILE), &run.raw.grid).map_err(write)?;
    save_grid(&path(RECON_FILE), &run.image.grid).map_err(write)?;
    save_grid(&path(TRUTH_FILE), &run.truth).map_err(write)?;
    std::fs::write(path(METRICS_FILE), run.metrics.to_text()).map_err(|e| write(e.into()))?;
    std::fs::write(path(PLOT_FILE), plot_data(&run)).map_err(|e| write(e.into()))?;
    Ok(PipelineReport {
        metrics: run.metrics,
        artifacts: [
            SPECTRA_FILE,
            SIGNAL_FILE,
            RECON_RAW_FILE,
            RECON_FILE,
            TRUTH_FILE,
            METRICS_FILE,
            PLOT_FILE,
        ]
        .iter()
        .map(|n| path(n))
        .collect(),
    })
}

/// Human-readable summary of the configured phantom as `key = value` lines.
pub fn phantom_info(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    let placement = place(cfg)?;
    let m = &placement.molecule;
    let (lo, hi) = m.bounds().ok_or(Error::EmptyMolecule)?;
    let spectra = encode_clean(cfg, &placement)?;
    let signal = SignalArray::from_spectra(&spectra, &ProjectionGrid::new(cfg.n_theta, cfg.n_phi)?)?;
    let brms = dipolar_brms(m.atoms.iter().map(|a| &a.position), &placement.nv.position, &placement.nv.axis)?;
    let lateral = m.atoms.iter().map(|a| a.position.x.hypot(a.position.y)).fold(0.0, f64::max);
    let mut s = String::new();
    let _ = writeln!(s, "molecule = {}", m.name);
    let _ = writeln!(s, "n_hydrogens = {}", m.len());
    let _ = writeln!(s, "extent_nm = {} {} {}", hi.x - lo.x, hi.y - lo.y, hi.z - lo.z);
    let _ = writeln!(s, "max_lateral_radius_nm = {lateral}");
    let _ = writeln!(s, "nv_position_nm = 0 0 {}", placement.nv.position.z);
    let _ = writeln!(
        s,
        "nv_axis = {} {} {}",
        placement.nv.axis.x, placement.nv.axis.y, placement.nv.axis.z
    );
    let _ = writeln!(s, "brms_nt = {}", brms * 1e9);
    let _ = writeln!(s, "larmor_khz = {}", larmor_frequency(cfg.b0_gauss * GAUSS) / 1e3);
    let _ = writeln!(s, "slice_width_nm = {}", signal.dr());
    let _ = writeln!(s, "n_r = {}", signal.n_r());
    let _ = writeln!(s, "max_spread_khz = {}", max_spread_hz(&spectra) / 1e3);
    Ok(s)
}
