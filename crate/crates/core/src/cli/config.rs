//! Flat `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Every key has a default at the
//! reference operating point (500 G, 3 G/nm, 1.28 kHz bins, 9×9 orientations,
//! 5 nm NV depth, 64³ image), so an empty file is a valid configuration.

use std::path::{Path, PathBuf};

use super::planner::Method;
use crate::encoder::SliceCombine;
use crate::error::{Error, Result};
use crate::physics::NvGeometry;
use crate::recon::{
    BackprojectMode, FilterKind, FilterSpec, FilterWindow, Interpolation, OrientationWeighting,
    PsfMode,
};
use crate::Vec3;

/// Value of `input` that selects the procedural toroid instead of a file.
pub const TOROID_INPUT: &str = "toroid";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub b0_gauss: f64,
    pub gradient_g_per_nm: f64,
    pub delta_f_hz: f64,
    pub n_theta: usize,
    pub n_phi: usize,
    pub nv_depth_nm: f64,
    /// `111`, `z`, or an explicit `x,y,z` direction.
    pub nv_axis: String,
    pub grid_n: usize,
    pub mode: BackprojectMode,
    pub interpolation: Interpolation,
    pub slice_combine: SliceCombine,
    pub filter: FilterKind,
    pub filter_cutoff: f64,
    pub filter_window: FilterWindow,
    pub weighting: OrientationWeighting,
    pub psf: PsfMode,
    pub noise_sigma_t: f64,
    pub seed: u64,
    /// Path to an `.xyz` / `.pdb` file, or `toroid`.
    pub input: String,
    pub toroid_points: usize,
    pub toroid_major_nm: f64,
    pub toroid_tube_nm: f64,
    pub output_dir: PathBuf,
    pub timing_method: Method,
    pub core_radius_nm: f64,
    pub annulus_inner_nm: f64,
    pub annulus_outer_nm: f64,
    pub slab_half_nm: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            b0_gauss: 500.0,
            gradient_g_per_nm: 3.0,
            delta_f_hz: 1280.0,
            n_theta: 9,
            n_phi: 9,
            nv_depth_nm: 5.0,
            nv_axis: "111".to_string(),
            grid_n: 64,
            mode: BackprojectMode::Gather,
            interpolation: Interpolation::Linear,
            slice_combine: SliceCombine::Quadrature,
            filter: FilterKind::QuadraticRamp,
            filter_cutoff: 1.0,
            filter_window: FilterWindow::CosineRolloff,
            weighting: OrientationWeighting::SolidAngle,
            psf: PsfMode::Identity,
            noise_sigma_t: 0.0,
            seed: 1,
            input: TOROID_INPUT.to_string(),
            toroid_points: 70,
            toroid_major_nm: 0.525,
            toroid_tube_nm: 0.225,
            output_dir: PathBuf::from("nvscope_out"),
            timing_method: Method::Enhanced,
            core_radius_nm: 0.3,
            annulus_inner_nm: 0.45,
            annulus_outer_nm: 0.75,
            slab_half_nm: 0.4,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

fn mode<T: std::str::FromStr<Err = Error>>(value: &str) -> Result<T> {
    value.parse().map_err(|e: Error| Error::Config(e.to_string()))
}

impl RunConfig {
    /// Parses a config file body on top of the defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            cfg.set(k.trim(), v.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", i + 1, strip_prefix(&e))))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    /// Applies `key=value` overrides in order.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for o in overrides {
            let (k, v) = o
                .as_ref()
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override '{}' is not key=value", o.as_ref())))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "b0_gauss" => self.b0_gauss = num(key, value)?,
            "gradient_g_per_nm" => self.gradient_g_per_nm = num(key, value)?,
            "delta_f_hz" => self.delta_f_hz = num(key, value)?,
            "n_theta" => self.n_theta = num(key, value)?,
            "n_phi" => self.n_phi = num(key, value)?,
            "nv_depth_nm" => self.nv_depth_nm = num(key, value)?,
            "nv_axis" => self.nv_axis = value.to_string(),
            "grid_n" => self.grid_n = num(key, value)?,
            "mode" => self.mode = mode(value)?,
            "interpolation" => self.interpolation = mode(value)?,
            "slice_combine" => self.slice_combine = mode(value)?,
            "filter" => self.filter = mode(value)?,
            "filter_cutoff" => self.filter_cutoff = num(key, value)?,
            "filter_window" => self.filter_window = mode(value)?,
            "weighting" => self.weighting = mode(value)?,
            "psf" => self.psf = mode(value)?,
            "noise_sigma_t" => self.noise_sigma_t = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "input" => self.input = value.to_string(),
            "toroid_points" => self.toroid_points = num(key, value)?,
            "toroid_major_nm" => self.toroid_major_nm = num(key, value)?,
            "toroid_tube_nm" => self.toroid_tube_nm = num(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "timing_method" => self.timing_method = mode(value)?,
            "core_radius_nm" => self.core_radius_nm = num(key, value)?,
            "annulus_inner_nm" => self.annulus_inner_nm = num(key, value)?,
            "annulus_outer_nm" => self.annulus_outer_nm = num(key, value)?,
            "slab_half_nm" => self.slab_half_nm = num(key, value)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("b0_gauss", self.b0_gauss),
            ("gradient_g_per_nm", self.gradient_g_per_nm),
            ("delta_f_hz", self.delta_f_hz),
            ("nv_depth_nm", self.nv_depth_nm),
            ("toroid_major_nm", self.toroid_major_nm),
            ("toroid_tube_nm", self.toroid_tube_nm),
            ("core_radius_nm", self.core_radius_nm),
            ("annulus_outer_nm", self.annulus_outer_nm),
            ("slab_half_nm", self.slab_half_nm),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{k} must be positive, got {v}")));
            }
        }
        if !(self.noise_sigma_t >= 0.0 && self.noise_sigma_t.is_finite()) {
            return Err(Error::Config("noise_sigma_t must be >= 0".into()));
        }
        if self.n_theta == 0 || self.n_phi == 0 {
            return Err(Error::Config("n_theta and n_phi must be >= 1".into()));
        }
        if self.grid_n < 2 {
            return Err(Error::Config("grid_n must be >= 2".into()));
        }
        if !(self.annulus_inner_nm >= 0.0 && self.annulus_inner_nm < self.annulus_outer_nm) {
            return Err(Error::Config("annulus_inner_nm must lie in [0, annulus_outer_nm)".into()));
        }
        self.filter_spec()
            .validate()
            .map_err(|e| Error::Config(strip_prefix(&e)))?;
        self.nv_axis_vector()?;
        Ok(())
    }

    pub fn filter_spec(&self) -> FilterSpec {
        FilterSpec {
            kind: self.filter,
            cutoff_fraction: self.filter_cutoff,
            window: self.filter_window,
        }
    }

    pub fn nv_axis_vector(&self) -> Result<Vec3> {
        let v = match self.nv_axis.trim() {
            "111" => NvGeometry::axis_111(),
            "z" => Vec3::z(),
            other => {
                let parts: Vec<f64> = other
                    .split(',')
                    .map(|p| num("nv_axis", p.trim()))
                    .collect::<Result<_>>()?;
                if parts.len() != 3 {
                    return Err(Error::Config(format!("nv_axis: expected 111, z or x,y,z; got '{other}'")));
                }
                Vec3::new(parts[0], parts[1], parts[2])
            }
        };
        if !(v.norm() > 0.0 && v.iter().all(|c| c.is_finite())) {
            return Err(Error::Config("nv_axis must be a nonzero finite vector".into()));
        }
        Ok(v.normalize())
    }

    /// Full `key = value` listing; parsing it back yields an equal config.
    pub fn to_text(&self) -> String {
        let lines = [
            ("b0_gauss", self.b0_gauss.to_string()),
            ("gradient_g_per_nm", self.gradient_g_per_nm.to_string()),
            ("delta_f_hz", self.delta_f_hz.to_string()),
            ("n_theta", self.n_theta.to_string()),
            ("n_phi", self.n_phi.to_string()),
            ("nv_depth_nm", self.nv_depth_nm.to_string()),
            ("nv_axis", self.nv_axis.clone()),
            ("grid_n", self.grid_n.to_string()),
            ("mode", self.mode.to_string()),
            ("interpolation", self.interpolation.to_string()),
            ("slice_combine", self.slice_combine.to_string()),
            ("filter", self.filter.to_string()),
            ("filter_cutoff", self.filter_cutoff.to_string()),
            ("filter_window", self.filter_window.to_string()),
            ("weighting", self.weighting.to_string()),
            ("psf", self.psf.to_string()),
            ("noise_sigma_t", self.noise_sigma_t.to_string()),
            ("seed", self.seed.to_string()),
            ("input", self.input.clone()),
            ("toroid_points", self.toroid_points.to_string()),
            ("toroid_major_nm", self.toroid_major_nm.to_string()),
            ("toroid_tube_nm", self.toroid_tube_nm.to_string()),
            ("output_dir", self.output_dir.display().to_string()),
            ("timing_method", self.timing_method.to_string()),
            ("core_radius_nm", self.core_radius_nm.to_string()),
            ("annulus_inner_nm", self.annulus_inner_nm.to_string()),
            ("annulus_outer_nm", self.annulus_outer_nm.to_string()),
            ("slab_half_nm", self.slab_half_nm.to_string()),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Config(m) => m.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = RunConfig::from_text("# nothing\n\n").unwrap();
        assert_eq!(cfg, RunConfig::default());
        cfg.validate().unwrap();
    }

    #[test]
    fn parse_and_override() {
        let mut cfg = RunConfig::from_text("delta_f_hz = 640  # finer\nmode=paper\ninput = data/x.xyz\n").unwrap();
        assert_eq!(cfg.delta_f_hz, 640.0);
        assert_eq!(cfg.mode, BackprojectMode::Paper);
        assert_eq!(cfg.input, "data/x.xyz");
        cfg.apply_overrides(&["grid_n=32", "nv_axis = 0,0,2"]).unwrap();
        assert_eq!(cfg.grid_n, 32);
        assert_eq!(cfg.nv_axis_vector().unwrap(), Vec3::z());
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.apply_overrides(&["seed=99", "filter_cutoff=0.8", "weighting=uniform", "timing_method=xy8"])
            .unwrap();
        assert_eq!(RunConfig::from_text(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn errors_are_config_errors() {
        for bad in ["nonsense", "grid_n = many", "colour = red", "mode = splat"] {
            let e = RunConfig::from_text(bad).unwrap_err();
            assert!(matches!(e, Error::Config(_)), "{bad}: {e}");
            assert_eq!(e.exit_code(), 2);
        }
        let e = RunConfig::from_text("a = 1\ngrid_n = x").unwrap_err();
        assert!(e.to_string().contains("line 1"));
        for bad in ["delta_f_hz=0", "n_theta=0", "filter_cutoff=1.5", "nv_axis=0,0,0", "annulus_inner_nm=0.9"] {
            let mut cfg = RunConfig::default();
            cfg.apply_overrides(&[bad]).unwrap();
            assert!(matches!(cfg.validate(), Err(Error::Config(_))), "{bad}");
        }
    }
}
