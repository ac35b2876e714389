//! Physical parameters of the driven atom–cavity system.
//!
//! [`SystemParams`] is the single source of truth for every rate, detuning,
//! coupling and geometry factor; all other modules take it by reference and
//! never mutate it. Values are stored in internal units (angular rad/µs).
//! [`MhzParams`] is the boundary representation used by config files, CLI
//! flags and provenance echoes (linear MHz).

use serde::{Deserialize, Serialize};

use crate::units::{angular_to_mhz, mhz_to_angular};
use crate::{Error, Result};

/// Motional axis: `Z` along the cavity, `Y` along the control laser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Z,
    Y,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::Z => write!(f, "z"),
            Axis::Y => write!(f, "y"),
        }
    }
}

/// All physical parameters, in angular units (rad/µs).
///
/// Decay rates follow the amplitude (HWHM) convention: populations and field
/// intensities decay at `2γ` and `2κ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Vacuum Rabi frequency at a cavity-field antinode.
    pub g: f64,
    /// Control-laser Rabi frequency on |g1⟩↔|e⟩.
    pub omega_l: f64,
    /// Probe drive strength on the cavity.
    pub omega_p: f64,
    /// Atomic dipole (amplitude) decay rate.
    pub gamma: f64,
    /// Cavity field (amplitude) decay rate.
    pub kappa: f64,
    /// Cavity–atom detuning.
    pub delta_ca: f64,
    /// Control–atom detuning.
    pub delta_la: f64,
    /// Probe–atom detuning.
    pub delta_pa: f64,
    /// Trap frequency along the cavity axis.
    pub omega_z: f64,
    /// Trap frequency along the control-laser axis.
    pub omega_y: f64,
    /// Photon recoil frequency.
    pub omega_rec: f64,
    /// Trap-center offset from the cavity-field antinode, in units of 1/k
    /// (dimensionless phase k·x₀).
    pub kx0: f64,
    /// Branching fraction of |e⟩ decay into |g1⟩.
    pub beta1: f64,
    /// Branching fraction of |e⟩ decay into |g2⟩.
    pub beta2: f64,
    /// Dipole-pattern projection factor for recoil diffusion along Z.
    pub alpha_z: f64,
    /// Dipole-pattern projection factor for recoil diffusion along Y.
    pub alpha_y: f64,
}

impl SystemParams {
    /// Probe–cavity detuning δ_PC = Δ_PA − Δ_CA.
    #[inline]
    pub fn delta_pc(&self) -> f64 {
        self.delta_pa - self.delta_ca
    }

    /// Two-photon (Raman) detuning δ_PL = Δ_PA − Δ_LA.
    #[inline]
    pub fn delta_pl(&self) -> f64 {
        self.delta_pa - self.delta_la
    }

    /// Control–cavity detuning δ_LC = Δ_LA − Δ_CA.
    #[inline]
    pub fn delta_lc(&self) -> f64 {
        self.delta_la - self.delta_ca
    }

    /// Position-reduced coupling g̃ = g·cos(k·x₀).
    #[inline]
    pub fn g_eff(&self) -> f64 {
        self.g * self.kx0.cos()
    }

    /// Single-atom cooperativity C = g̃²/(κγ).
    #[inline]
    pub fn cooperativity(&self) -> f64 {
        let ge = self.g_eff();
        ge * ge / (self.kappa * self.gamma)
    }

    /// Trap frequency along `axis`.
    #[inline]
    pub fn omega_trap(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Z => self.omega_z,
            Axis::Y => self.omega_y,
        }
    }

    /// Lamb-Dicke parameter √(ω_rec/ω_axis) for the trap along `axis`.
    #[inline]
    pub fn eta(&self, axis: Axis) -> f64 {
        (self.omega_rec / self.omega_trap(axis)).sqrt()
    }

    /// Diffusion projection factor ᾱ along `axis`.
    #[inline]
    pub fn alpha(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Z => self.alpha_z,
            Axis::Y => self.alpha_y,
        }
    }

    /// Checks hard invariants. Called by the builders; callers constructing
    /// the struct literally should call it themselves.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            (self.gamma, "gamma"),
            (self.kappa, "kappa"),
            (self.omega_z, "omega_z"),
            (self.omega_y, "omega_y"),
            (self.omega_rec, "omega_rec"),
        ];
        for (v, name) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        for (v, name) in [
            (self.g, "g"),
            (self.omega_l, "omega_l"),
            (self.omega_p, "omega_p"),
            (self.alpha_z, "alpha_z"),
            (self.alpha_y, "alpha_y"),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be non-negative and finite, got {v}"
                )));
            }
        }
        if !(self.beta1 >= 0.0 && self.beta2 >= 0.0) {
            return Err(Error::InvalidParameter(
                "branching fractions must be non-negative".into(),
            ));
        }
        if (self.beta1 + self.beta2 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "branching fractions must sum to 1, got {}",
                self.beta1 + self.beta2
            )));
        }
        for (v, name) in [
            (self.delta_ca, "delta_ca"),
            (self.delta_la, "delta_la"),
            (self.delta_pa, "delta_pa"),
            (self.kx0, "kx0"),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    /// Soft-limit warnings (rate theory validity), without failing the build.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for axis in [Axis::Z, Axis::Y] {
            let eta = self.eta(axis);
            if eta >= 0.3 {
                out.push(format!(
                    "Lamb-Dicke parameter eta_{axis} = {eta:.3} >= 0.3; \
                     rate theory is unreliable here"
                ));
            }
        }
        out
    }

    /// Boundary representation in linear MHz.
    pub fn to_mhz(&self) -> MhzParams {
        MhzParams {
            g_mhz: angular_to_mhz(self.g),
            omega_l_mhz: angular_to_mhz(self.omega_l),
            omega_p_mhz: angular_to_mhz(self.omega_p),
            gamma_mhz: angular_to_mhz(self.gamma),
            kappa_mhz: angular_to_mhz(self.kappa),
            delta_ca_mhz: angular_to_mhz(self.delta_ca),
            delta_la_mhz: angular_to_mhz(self.delta_la),
            delta_pa_mhz: angular_to_mhz(self.delta_pa),
            omega_z_mhz: angular_to_mhz(self.omega_z),
            omega_y_mhz: angular_to_mhz(self.omega_y),
            omega_rec_mhz: angular_to_mhz(self.omega_rec),
            kx0_rad: self.kx0,
            beta1: self.beta1,
            alpha_z: self.alpha_z,
            alpha_y: self.alpha_y,
        }
    }

    /// Copy with a different probe detuning. Scans and spectra sweep this.
    pub fn with_delta_pa(&self, delta_pa: f64) -> SystemParams {
        SystemParams { delta_pa, ..self.clone() }
    }

    /// Copy with a different control detuning.
    pub fn with_delta_la(&self, delta_la: f64) -> SystemParams {
        SystemParams { delta_la, ..self.clone() }
    }
}

impl Default for SystemParams {
    /// Reference parameter bundle of the modeled experiment.
    fn default() -> Self {
        MhzParams::default()
            .build()
            .expect("default parameters are valid")
    }
}

/// Linear-MHz form of [`SystemParams`]: the config-file and provenance
/// representation. Field names double as config keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MhzParams {
    pub g_mhz: f64,
    pub omega_l_mhz: f64,
    pub omega_p_mhz: f64,
    pub gamma_mhz: f64,
    pub kappa_mhz: f64,
    pub delta_ca_mhz: f64,
    pub delta_la_mhz: f64,
    pub delta_pa_mhz: f64,
    pub omega_z_mhz: f64,
    pub omega_y_mhz: f64,
    pub omega_rec_mhz: f64,
    pub kx0_rad: f64,
    pub beta1: f64,
    pub alpha_z: f64,
    pub alpha_y: f64,
}

impl Default for MhzParams {
    fn default() -> Self {
        MhzParams {
            g_mhz: 3.6,
            omega_l_mhz: 2.8,
            omega_p_mhz: 0.23,
            gamma_mhz: 2.6,
            kappa_mhz: 0.40,
            delta_ca_mhz: 16.0,
            delta_la_mhz: 16.0,
            delta_pa_mhz: 16.0,
            omega_z_mhz: 0.2,
            omega_y_mhz: 0.3,
            omega_rec_mhz: 0.00207,
            kx0_rad: std::f64::consts::FRAC_PI_4,
            beta1: 0.5,
            alpha_z: 0.4,
            alpha_y: 0.4,
        }
    }
}

impl MhzParams {
    /// Converts to internal units and validates.
    pub fn build(&self) -> Result<SystemParams> {
        let p = SystemParams {
            g: mhz_to_angular(self.g_mhz),
            omega_l: mhz_to_angular(self.omega_l_mhz),
            omega_p: mhz_to_angular(self.omega_p_mhz),
            gamma: mhz_to_angular(self.gamma_mhz),
            kappa: mhz_to_angular(self.kappa_mhz),
            delta_ca: mhz_to_angular(self.delta_ca_mhz),
            delta_la: mhz_to_angular(self.delta_la_mhz),
            delta_pa: mhz_to_angular(self.delta_pa_mhz),
            omega_z: mhz_to_angular(self.omega_z_mhz),
            omega_y: mhz_to_angular(self.omega_y_mhz),
            omega_rec: mhz_to_angular(self.omega_rec_mhz),
            kx0: self.kx0_rad,
            beta1: self.beta1,
            beta2: 1.0 - self.beta1,
            alpha_z: self.alpha_z,
            alpha_y: self.alpha_y,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parses a flat `key = value` config file. Missing keys keep their
    /// defaults; unknown keys are rejected with the offending name.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut out = MhzParams::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::Config(format!(
                    "line {}: value for `{}` is not a number",
                    lineno + 1,
                    key
                ))
            })?;
            out.set_key(key, value).map_err(|_| {
                Error::Config(format!("line {}: unknown key `{}`", lineno + 1, key))
            })?;
        }
        Ok(out)
    }

    /// Sets a field by config key name.
    pub fn set_key(&mut self, key: &str, value: f64) -> std::result::Result<(), ()> {
        match key {
            "g_mhz" => self.g_mhz = value,
            "omega_l_mhz" => self.omega_l_mhz = value,
            "omega_p_mhz" => self.omega_p_mhz = value,
            "gamma_mhz" => self.gamma_mhz = value,
            "kappa_mhz" => self.kappa_mhz = value,
            "delta_ca_mhz" => self.delta_ca_mhz = value,
            "delta_la_mhz" => self.delta_la_mhz = value,
            "delta_pa_mhz" => self.delta_pa_mhz = value,
            "omega_z_mhz" => self.omega_z_mhz = value,
            "omega_y_mhz" => self.omega_y_mhz = value,
            "omega_rec_mhz" => self.omega_rec_mhz = value,
            "kx0_rad" => self.kx0_rad = value,
            "beta1" => self.beta1 = value,
            "alpha_z" => self.alpha_z = value,
            "alpha_y" => self.alpha_y = value,
            _ => return Err(()),
        }
        Ok(())
    }
}
