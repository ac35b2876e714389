//! Sideband thermometry: converting transfer probabilities and sideband
//! asymmetries into occupation numbers and temperatures, and synthesizing
//! model microwave sideband spectra of trapped thermal atoms.

use serde::{Deserialize, Serialize};

use crate::units::phonon_energy_uk;
use crate::{Error, Result};

/// Thermal state of one trapped mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalState {
    /// Trap frequency (rad/µs).
    pub omega: f64,
    /// Mean occupation ⟨m⟩.
    pub mean_m: f64,
    /// Occupation distribution up to an automatically chosen cutoff;
    /// geometric with ratio mean_m/(1 + mean_m), normalized to 1.
    pub p: Vec<f64>,
    /// Temperature (µK) equivalent to `mean_m` at `omega`.
    pub temperature_uk: f64,
}

impl ThermalState {
    /// Thermal state with the given mean occupation.
    pub fn new(omega: f64, mean_m: f64) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "trap frequency must be positive, got {omega}"
            )));
        }
        if !(mean_m >= 0.0) || !mean_m.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mean occupation must be non-negative, got {mean_m}"
            )));
        }
        let s = mean_m / (1.0 + mean_m);
        let cutoff = if s == 0.0 {
            0
        } else {
            // keep the truncated tail below 1e-14 of the norm
            ((1e-14f64.ln() / s.ln()).ceil() as usize).max(8)
        };
        let mut p: Vec<f64> = (0..=cutoff).map(|m| s.powi(m as i32)).collect();
        let norm: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= norm);
        let temperature_uk = if mean_m == 0.0 {
            0.0
        } else {
            phonon_energy_uk(omega) / (1.0 + 1.0 / mean_m).ln()
        };
        Ok(ThermalState { omega, mean_m, p, temperature_uk })
    }

    /// Thermal state at temperature `t_uk` (µK).
    pub fn from_temperature(omega: f64, t_uk: f64) -> Result<Self> {
        if !(t_uk >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be non-negative, got {t_uk}"
            )));
        }
        if t_uk == 0.0 {
            return Self::new(omega, 0.0);
        }
        let mean = 1.0 / ((phonon_energy_uk(omega) / t_uk).exp() - 1.0);
        Self::new(omega, mean)
    }

    /// Ground-state occupation p₀ = 1/(1 + ⟨m⟩).
    pub fn p0(&self) -> f64 {
        self.p[0]
    }
}

/// Mean occupation from the red/blue sideband weight ratio of a thermal
/// state: ⟨m⟩ = r/(1 − r).
pub fn mean_occ_from_sideband_ratio(r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::InvalidParameter(format!(
            "sideband ratio must lie in [0, 1), got {r} (non-thermal or inverted input)"
        )));
    }
    Ok(r / (1.0 - r))
}

/// Ground-state occupation from an ideal adiabatic passage on m→m−1:
/// unit transfer for every m ≥ 1 and none for m = 0 gives p₀ = 1 − P.
pub fn ground_state_from_passage(p_transfer: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_transfer) {
        return Err(Error::InvalidParameter(format!(
            "transfer probability must lie in [0, 1], got {p_transfer}"
        )));
    }
    Ok(1.0 - p_transfer)
}

/// Temperature (µK) of the 1-D thermal state with ground-state occupation
/// `p0` in a trap at `omega`: T = (ħω/k_B)/(−ln(1 − p0)).
pub fn temperature_from_p0(p0: f64, omega: f64) -> Result<f64> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "ground-state occupation must lie strictly inside (0, 1), got {p0}"
        )));
    }
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "trap frequency must be positive, got {omega}"
        )));
    }
    Ok(phonon_energy_uk(omega) / -(1.0 - p0).ln())
}

/// Pulse envelope used when synthesizing a sideband spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "shape")]
pub enum PulseShape {
    /// Rectangular pulse; exact two-level Rabi lineshape incl. saturation.
    Square { duration: f64 },
    /// Gaussian envelope of RMS width `sigma`, in the weak-excitation limit;
    /// lineshape (π/2)(Ωσ)²·exp(−Δ²σ²). Tails decay fast enough for clean
    /// window integration of the sidebands.
    Gaussian { sigma: f64 },
}

/// Microwave pulse model for spectrum synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseModel {
    pub shape: PulseShape,
    /// Carrier Rabi frequency Ω₀ (rad/µs).
    pub rabi_carrier: f64,
    /// Lamb-Dicke parameter of the driven transition.
    pub eta: f64,
    /// Carrier offset from the frequency origin (rad/µs); apparatus
    /// metadata, not physics.
    pub carrier_offset: f64,
}

/// One synthesized spectrum sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandSample {
    /// Detuning δ_MW from the reference frequency (rad/µs).
    pub delta_mw: f64,
    /// Transfer probability in [0, 1].
    pub p_transfer: f64,
}

/// A synthesized microwave sideband spectrum with its pulse metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SidebandSpectrum {
    pub points: Vec<SidebandSample>,
    pub pulse: PulseModel,
    /// Mean occupation of the state that generated the spectrum.
    pub mean_m: f64,
    /// Trap frequency of the sampled mode (rad/µs).
    pub omega: f64,
}

fn line_profile(shape: PulseShape, rabi: f64, detuning: f64) -> f64 {
    match shape {
        PulseShape::Square { duration } => {
            let w2 = rabi * rabi + detuning * detuning;
            if w2 == 0.0 {
                return 0.0;
            }
            (rabi * rabi / w2) * (0.5 * w2.sqrt() * duration).sin().powi(2)
        }
        PulseShape::Gaussian { sigma } => {
            let p = 0.5 * std::f64::consts::PI
                * (rabi * sigma).powi(2)
                * (-(detuning * sigma).powi(2)).exp();
            p.min(1.0)
        }
    }
}

/// Synthesizes the sideband spectrum of `state` probed by `pulse` on the
/// given δ_MW grid (rad/µs).
///
/// Transitions included per initial level m: the carrier, first sidebands at
/// ±ω with √m matrix elements, and the weak second sidebands at ±2ω (η²
/// order), which is what makes m→m−2 features visible for hot inputs.
pub fn synth_sideband_spectrum(
    state: &ThermalState,
    pulse: &PulseModel,
    grid: &[f64],
) -> SidebandSpectrum {
    let eta = pulse.eta;
    let omega0 = pulse.rabi_carrier;
    let points = grid
        .iter()
        .map(|&delta| {
            let mut p_total = 0.0;
            for (m, &pm) in state.p.iter().enumerate() {
                if pm < 1e-15 {
                    continue;
                }
                let mf = m as f64;
                // (Δm, Rabi matrix element)
                let lines = [
                    (0i32, omega0),
                    (-1, omega0 * eta * mf.sqrt()),
                    (1, omega0 * eta * (mf + 1.0).sqrt()),
                    (-2, omega0 * eta * eta * 0.5 * (mf * (mf - 1.0)).sqrt()),
                    (2, omega0 * eta * eta * 0.5 * ((mf + 1.0) * (mf + 2.0)).sqrt()),
                ];
                for (dm, rabi) in lines {
                    if rabi == 0.0 {
                        continue;
                    }
                    let center = pulse.carrier_offset + dm as f64 * state.omega;
                    p_total += pm * line_profile(pulse.shape, rabi, delta - center);
                }
            }
            SidebandSample { delta_mw: delta, p_transfer: p_total.min(1.0) }
        })
        .collect();
    SidebandSpectrum { points, pulse: *pulse, mean_m: state.mean_m, omega: state.omega }
}

/// Red/blue sideband weight ratio of a synthesized spectrum, from trapezoid
/// integration over the windows carrier ∓ [0.5ω, 1.5ω]. `None` when the blue
/// weight vanishes.
pub fn sideband_ratio(spectrum: &SidebandSpectrum) -> Option<f64> {
    let omega = spectrum.omega;
    let center = spectrum.pulse.carrier_offset;
    let window = |lo: f64, hi: f64| -> f64 {
        let mut acc = 0.0;
        for pair in spectrum.points.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let (x0, x1) = (a.delta_mw, b.delta_mw);
            if x1 <= lo || x0 >= hi {
                continue;
            }
            acc += 0.5 * (a.p_transfer + b.p_transfer) * (x1 - x0);
        }
        acc
    };
    let red = window(center - 1.5 * omega, center - 0.5 * omega);
    let blue = window(center + 0.5 * omega, center + 1.5 * omega);
    (blue > 0.0).then(|| red / blue)
}

/// Spectrum rows in the output convention (MHz, linear).
pub fn spectrum_csv(spec: &SidebandSpectrum, w: &mut impl std::io::Write) -> std::io::Result<()> {
    writeln!(w, "delta_mw_mhz,p_transfer")?;
    for s in &spec.points {
        writeln!(
            w,
            "{:.6},{:.9e}",
            crate::units::angular_to_mhz(s.delta_mw),
            s.p_transfer
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::mhz_to_angular;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn weak_pulse(omega: f64) -> PulseModel {
        // long enough that the carrier tail under the sideband windows is
        // ~e^{-16} of its own peak, weak enough to stay in the linear regime
        PulseModel {
            shape: PulseShape::Gaussian { sigma: 8.0 / omega },
            rabi_carrier: 0.02 * omega,
            eta: 0.1,
            carrier_offset: 0.0,
        }
    }

    fn grid(omega: f64) -> Vec<f64> {
        let span = 3.0 * omega;
        (0..=3000).map(|k| -span + 2.0 * span * k as f64 / 3000.0).collect()
    }

    #[test]
    fn ratio_inversion_examples() {
        assert_eq!(mean_occ_from_sideband_ratio(0.0).unwrap(), 0.0);
        assert_relative_eq!(mean_occ_from_sideband_ratio(0.5).unwrap(), 1.0);
        // brute-force thermal sideband weights at mean 0.282: ratio
        // Σ p_m·m / Σ p_m·(m+1) = 0.282/1.282 ≈ 0.22
        let st = ThermalState::new(1.0, 0.282).unwrap();
        let red: f64 = st.p.iter().enumerate().map(|(m, p)| p * m as f64).sum();
        let blue: f64 = st.p.iter().enumerate().map(|(m, p)| p * (m as f64 + 1.0)).sum();
        assert_relative_eq!(
            mean_occ_from_sideband_ratio(red / blue).unwrap(),
            0.282,
            max_relative = 1e-10
        );
        assert_relative_eq!(mean_occ_from_sideband_ratio(0.22).unwrap(), 0.282, max_relative = 2e-3);
        assert!(mean_occ_from_sideband_ratio(1.0).is_err());
    }

    #[test]
    fn passage_examples() {
        assert_eq!(ground_state_from_passage(0.0).unwrap(), 1.0);
        assert_relative_eq!(ground_state_from_passage(0.22).unwrap(), 0.78);
        assert_relative_eq!(ground_state_from_passage(0.71).unwrap(), 0.29);
        assert!(ground_state_from_passage(1.2).is_err());
    }

    #[test]
    fn temperature_examples() {
        // ħω/k_B = 14.4 µK at ω = 2π·0.3 MHz; p0 = 0.5 gives 14.4/ln 2
        let omega = mhz_to_angular(0.3);
        assert_relative_eq!(
            temperature_from_p0(0.5, omega).unwrap(),
            20.8,
            max_relative = 5e-3
        );
        // p0 = 0.78 maps to ≈ 9.5 µK under this 1-D model
        assert_relative_eq!(
            temperature_from_p0(0.78, omega).unwrap(),
            9.5,
            max_relative = 1e-2
        );
        // p0 → 1 gives T → 0
        assert!(temperature_from_p0(1.0 - 1e-12, omega).unwrap() < 0.6);
        assert!(temperature_from_p0(1.0, omega).is_err());
    }

    #[test]
    fn thermal_state_roundtrips() {
        let omega = mhz_to_angular(0.2);
        for mean in [0.05, 0.3, 1.0, 3.0] {
            let st = ThermalState::new(omega, mean).unwrap();
            let total: f64 = st.p.iter().sum();
            assert_relative_eq!(total, 1.0, epsilon = 1e-10);
            // geometric ratio
            assert_relative_eq!(st.p[1] / st.p[0], mean / (1.0 + mean), max_relative = 1e-12);
            // T <-> mean round trip
            let back = ThermalState::from_temperature(omega, st.temperature_uk).unwrap();
            assert_relative_eq!(back.mean_m, mean, max_relative = 1e-10);
        }
    }

    #[test]
    fn spectrum_area_ratios_match_thermal_sums() {
        // red/blue area ratios 0.22 and 0.67 for mean 0.282 and 2.0
        let omega = mhz_to_angular(0.3);
        for (mean, expect) in [(0.282, 0.22), (2.0, 0.667)] {
            let st = ThermalState::new(omega, mean).unwrap();
            let spec = synth_sideband_spectrum(&st, &weak_pulse(omega), &grid(omega));
            let r = sideband_ratio(&spec).unwrap();
            assert_relative_eq!(r, expect, max_relative = 0.02);
        }
    }

    #[test]
    fn ground_state_kills_red_sideband() {
        let omega = mhz_to_angular(0.3);
        let st = ThermalState::new(omega, 0.0).unwrap();
        let pulse = weak_pulse(omega);
        let spec = synth_sideband_spectrum(&st, &pulse, &[-omega, omega]);
        // at −ω only Gaussian tails of other lines contribute
        assert!(spec.points[0].p_transfer < 1e-9 * spec.points[1].p_transfer.max(1e-300));
    }

    #[test]
    fn spectrum_symmetrizes_in_classical_limit() {
        let omega = mhz_to_angular(0.3);
        let st = ThermalState::new(omega, 60.0).unwrap();
        let spec = synth_sideband_spectrum(&st, &weak_pulse(omega), &grid(omega));
        let r = sideband_ratio(&spec).unwrap();
        assert!(r > 0.95 && r < 1.0, "ratio {r}");
    }

    #[test]
    fn roundtrip_mean_recovery_within_two_percent() {
        let omega = mhz_to_angular(0.3);
        let pulse = weak_pulse(omega);
        let g = grid(omega);
        for mean in [0.05, 0.1, 0.282, 0.7, 1.5, 3.0] {
            let st = ThermalState::new(omega, mean).unwrap();
            let spec = synth_sideband_spectrum(&st, &pulse, &g);
            let r = sideband_ratio(&spec).unwrap();
            let recovered = mean_occ_from_sideband_ratio(r).unwrap();
            assert_relative_eq!(recovered, mean, max_relative = 0.02);
        }
    }

    #[test]
    fn square_pulse_suppression_is_visible() {
        // EIT-cooled vs molasses-cooled inputs: the m→m−1 and m→m−2
        // features are strongly reduced for the cold state
        let omega = mhz_to_angular(0.3);
        let pulse = PulseModel {
            shape: PulseShape::Square { duration: 25.0 },
            rabi_carrier: mhz_to_angular(0.02),
            eta: 0.25,
            carrier_offset: mhz_to_angular(-1.0),
        };
        let cold = ThermalState::new(omega, 0.282).unwrap();
        let hot = ThermalState::new(omega, 2.4).unwrap();
        for dm in [-1.0, -2.0] {
            let x = pulse.carrier_offset + dm * omega;
            let pc = synth_sideband_spectrum(&cold, &pulse, &[x]).points[0].p_transfer;
            let ph = synth_sideband_spectrum(&hot, &pulse, &[x]).points[0].p_transfer;
            assert!(
                pc < 0.5 * ph,
                "Δm = {dm}: cold {pc} not clearly below hot {ph}"
            );
        }
    }

    proptest! {
        /// All synthesized probabilities stay inside [0, 1].
        #[test]
        fn probabilities_in_unit_interval(
            mean in 0.0f64..8.0,
            rabi_rel in 0.01f64..2.0,
            duration in 1.0f64..80.0,
        ) {
            let omega = mhz_to_angular(0.3);
            let st = ThermalState::new(omega, mean).unwrap();
            let pulse = PulseModel {
                shape: PulseShape::Square { duration },
                rabi_carrier: rabi_rel * omega,
                eta: 0.1,
                carrier_offset: 0.0,
            };
            let g: Vec<f64> = (0..200).map(|k| -2.5 * omega + 0.025 * omega * k as f64).collect();
            let spec = synth_sideband_spectrum(&st, &pulse, &g);
            for s in &spec.points {
                prop_assert!((0.0..=1.0).contains(&s.p_transfer));
            }
        }
    }
}
