//! Heating and cooling rates A± in the Lamb-Dicke regime.
//!
//! Three routes are implemented:
//!
//! * [`rates_resolvent`] — second-order resolvent perturbation theory on the
//!   single-excitation block: carrier excitation, mechanical vertex, sideband
//!   propagation at ∓ω, projection onto the atomic (2γ) and cavity (2κ)
//!   decay channels, plus the recoil-diffusion term. Valid anywhere in
//!   parameter space.
//! * [`rates_ceit_analytic`] — the closed-form expression valid on the Raman
//!   resonance line δ_PL = 0, with the cavity entering through the
//!   sideband-resolved cooperativities C±. Agrees with the resolvent route
//!   to machine precision on that line.
//! * [`rates_free_space_eit`] — the same machinery reduced to the free-space
//!   three-level system (no cavity, probe shone directly on the atom).
//!
//! Rates are per µs; the JSON boundary converts to 1/ms.

use nalgebra::{Matrix2, Matrix3, SMatrix, Vector2, Vector3};
use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::json;

use crate::dressed::{exc, single_excitation_block};
use crate::linalg::solve_pivoted;
use crate::params::{Axis, SystemParams};
use crate::units::per_us_to_per_ms;
use crate::{Error, Result};

/// Which route produced a [`RateResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMethod {
    Resolvent,
    CeitAnalytic,
    FreeSpaceEit,
}

impl std::fmt::Display for RateMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RateMethod::Resolvent => write!(f, "resolvent"),
            RateMethod::CeitAnalytic => write!(f, "ceit_analytic"),
            RateMethod::FreeSpaceEit => write!(f, "free_space_eit"),
        }
    }
}

/// A (plus, minus) pair of channel rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignPair {
    pub plus: f64,
    pub minus: f64,
}

/// Per-channel breakdown of A±.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Channels {
    /// Resolvent decomposition: recoil diffusion (equal for both signs),
    /// atomic-decay scattering, cavity-decay scattering.
    Resolvent {
        diffusion: f64,
        atomic: SignPair,
        cavity: SignPair,
    },
    /// The analytic route reports one combined scattering channel.
    Combined { scattering: SignPair },
}

/// Heating/cooling rates along one axis, with channel breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    pub axis: Axis,
    pub method: RateMethod,
    /// Blue-sideband (heating) rate A₊, 1/µs.
    pub a_plus: f64,
    /// Red-sideband (cooling) rate A₋, 1/µs.
    pub a_minus: f64,
    pub channels: Channels,
    /// Net cooling rate Γ = A₋ − A₊, 1/µs (negative means heating).
    pub gamma: f64,
    /// Stationary occupation A₊/Γ, present only when Γ > 0.
    pub m_st: Option<f64>,
}

impl RateResult {
    /// JSON record with all rates converted to 1/ms.
    pub fn to_json_per_ms(&self) -> serde_json::Value {
        let channels = match self.channels {
            Channels::Resolvent { diffusion, atomic, cavity } => json!({
                "diffusion": per_us_to_per_ms(diffusion),
                "atomic": { "plus": per_us_to_per_ms(atomic.plus),
                            "minus": per_us_to_per_ms(atomic.minus) },
                "cavity": { "plus": per_us_to_per_ms(cavity.plus),
                            "minus": per_us_to_per_ms(cavity.minus) },
            }),
            Channels::Combined { scattering } => json!({
                "scattering": { "plus": per_us_to_per_ms(scattering.plus),
                                "minus": per_us_to_per_ms(scattering.minus) },
            }),
        };
        json!({
            "a_plus": per_us_to_per_ms(self.a_plus),
            "a_minus": per_us_to_per_ms(self.a_minus),
            "gamma_rate": per_us_to_per_ms(self.gamma),
            "m_st": self.m_st,
            "channels": channels,
            "method": self.method.to_string(),
            "axis": self.axis.to_string(),
        })
    }
}

/// First-order steady-state excitation amplitudes under the probe drive,
/// over (|g₁,0⟩, |g₂,1⟩, |e,0⟩).
#[derive(Debug, Clone, PartialEq)]
pub struct CarrierAmplitudes(pub Vector3<C64>);

impl CarrierAmplitudes {
    /// Excited-state population |c_e|².
    pub fn p_e(&self) -> f64 {
        self.0[exc::E].norm_sqr()
    }

    /// Intracavity photon number |c_cav|².
    pub fn n_cav(&self) -> f64 {
        self.0[exc::CAV].norm_sqr()
    }
}

/// Steady-state amplitudes c = (0·I − H₁)⁻¹ (Ω_P/2) u_cav.
///
/// Exactly on the Raman line (δ_PL = 0 with the control on) the excited
/// amplitude is zero by quantum interference; that branch is evaluated in
/// closed form so the dark state is exact rather than a rounding residue.
pub fn carrier_amplitudes(params: &SystemParams) -> Result<CarrierAmplitudes> {
    params.validate()?;
    if params.omega_p == 0.0 {
        return Ok(CarrierAmplitudes(Vector3::zeros()));
    }
    let half_p = 0.5 * params.omega_p;
    if params.delta_pl() == 0.0 && params.omega_l > 0.0 {
        // dark state: c_e = 0, the cavity holds the bare photon number
        let c_cav = C64::new(half_p, 0.0) / C64::new(params.delta_pc(), params.kappa);
        let c_g1 = -c_cav * 2.0 * params.g_eff() / params.omega_l;
        let mut v = Vector3::zeros();
        v[exc::G1] = c_g1;
        v[exc::CAV] = c_cav;
        v[exc::E] = C64::new(0.0, 0.0);
        return Ok(CarrierAmplitudes(v));
    }
    let a = -single_excitation_block(params);
    let mut b = Vector3::zeros();
    b[exc::CAV] = C64::new(half_p, 0.0);
    let c = solve_pivoted(&a, &b).ok_or_else(|| {
        Error::Divergent(format!(
            "carrier steady state has no solution at delta_pa = {} rad/us",
            params.delta_pa
        ))
    })?;
    Ok(CarrierAmplitudes(c))
}

/// Mechanical-coupling matrix on the single-excitation basis for a given
/// Lamb-Dicke parameter.
fn mech_vertex(params: &SystemParams, axis: Axis, eta: f64) -> Matrix3<C64> {
    let mut w = Matrix3::zeros();
    match axis {
        Axis::Z => {
            let v = C64::new(-eta * params.g * params.kx0.sin(), 0.0);
            w[(exc::E, exc::CAV)] = v;
            w[(exc::CAV, exc::E)] = v;
        }
        Axis::Y => {
            let v = C64::new(0.0, eta * 0.5 * params.omega_l);
            w[(exc::E, exc::G1)] = v;
            w[(exc::G1, exc::E)] = -v;
        }
    }
    w
}

fn sideband_amplitudes(
    h1: &Matrix3<C64>,
    source: &Vector3<C64>,
    delta: f64,
) -> Result<Vector3<C64>> {
    let mut a = -h1;
    for i in 0..3 {
        a[(i, i)] += C64::new(delta, 0.0);
    }
    solve_pivoted(&a, source).ok_or_else(|| {
        Error::Divergent(format!(
            "sideband resolvent singular at delta = {delta} rad/us \
             (zero-linewidth eigenstate hit exactly)"
        ))
    })
}

/// Cooling summary Γ = A₋ − A₊ and, when Γ > 0, the stationary occupation
/// ⟨m⟩ = A₊/(A₋ − A₊).
pub fn cooling_summary(a_plus: f64, a_minus: f64) -> Result<(f64, Option<f64>)> {
    if !(a_plus >= 0.0) || !(a_minus >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sideband rates must be non-negative, got A+ = {a_plus}, A- = {a_minus}"
        )));
    }
    let gamma = a_minus - a_plus;
    let m_st = if gamma > 0.0 { Some(a_plus / gamma) } else { None };
    Ok((gamma, m_st))
}

/// Heating/cooling rates along `axis` for trap frequency `omega`, from
/// resolvent perturbation theory.
///
/// The Lamb-Dicke parameter is √(ω_rec/ω) for the frequency actually passed,
/// so sweeping `omega` keeps the η² scaling consistent.
pub fn rates_resolvent(params: &SystemParams, axis: Axis, omega: f64) -> Result<RateResult> {
    params.validate()?;
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "trap frequency must be positive, got {omega}"
        )));
    }
    let eta = (params.omega_rec / omega).sqrt();
    let carrier = carrier_amplitudes(params)?;
    let h1 = single_excitation_block(params);
    let w = mech_vertex(params, axis, eta);
    let source = w * carrier.0;

    let c_plus = sideband_amplitudes(&h1, &source, -omega)?;
    let c_minus = sideband_amplitudes(&h1, &source, omega)?;

    let diffusion = 2.0 * params.gamma * params.alpha(axis) * (eta * eta) * carrier.p_e();
    let atomic = SignPair {
        plus: 2.0 * params.gamma * c_plus[exc::E].norm_sqr(),
        minus: 2.0 * params.gamma * c_minus[exc::E].norm_sqr(),
    };
    let cavity = SignPair {
        plus: 2.0 * params.kappa * c_plus[exc::CAV].norm_sqr(),
        minus: 2.0 * params.kappa * c_minus[exc::CAV].norm_sqr(),
    };
    let a_plus = diffusion + atomic.plus + cavity.plus;
    let a_minus = diffusion + atomic.minus + cavity.minus;
    let (gamma, m_st) = cooling_summary(a_plus, a_minus)?;
    Ok(RateResult {
        axis,
        method: RateMethod::Resolvent,
        a_plus,
        a_minus,
        channels: Channels::Resolvent { diffusion, atomic, cavity },
        gamma,
        m_st,
    })
}

/// Absolute tolerance (rad/µs) for "on the Raman resonance line".
pub const EIT_LINE_TOL: f64 = 1e-9;

/// Closed-form rates on the Raman resonance line δ_PC = Δ_LA − Δ_CA
/// (equivalently δ_PL = 0), for motion along the cavity axis.
///
/// Calling it off the line is a precondition error; the expression is not
/// extrapolated.
pub fn rates_ceit_analytic(params: &SystemParams, omega: f64) -> Result<RateResult> {
    params.validate()?;
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "trap frequency must be positive, got {omega}"
        )));
    }
    let dpl = params.delta_pl();
    if dpl.abs() > EIT_LINE_TOL {
        return Err(Error::Precondition(format!(
            "EIT resonance condition violated: delta_PL = {:.6e} rad/us (must be 0, \
             i.e. delta_PC = Delta_LA - Delta_CA)",
            dpl
        )));
    }
    let eta2 = params.omega_rec / omega;
    let dpc = params.delta_pc();
    let kappa2 = params.kappa * params.kappa;
    let coop = params.cooperativity();
    let prefactor = (0.5 * params.omega_p * params.omega_p) / (dpc * dpc + kappa2)
        * eta2
        * params.kx0.sin().powi(2)
        * params.g
        * params.g
        * params.gamma;

    let rate = |sign: f64| -> f64 {
        // sign = +1 for A₊, −1 for A₋
        let d = dpc - sign * omega;
        let c_pm = coop * kappa2 / (kappa2 + d * d);
        let x = params.omega_l * params.omega_l / (4.0 * omega) - omega
            + sign * params.delta_la
            + (params.gamma / params.kappa) * c_pm * (omega - sign * dpc);
        let denom = params.gamma * params.gamma * (1.0 + c_pm) * (1.0 + c_pm) + x * x;
        prefactor * (1.0 + c_pm) / denom
    };

    let a_plus = rate(1.0);
    let a_minus = rate(-1.0);
    let (gamma, m_st) = cooling_summary(a_plus, a_minus)?;
    Ok(RateResult {
        axis: Axis::Z,
        method: RateMethod::CeitAnalytic,
        a_plus,
        a_minus,
        channels: Channels::Combined {
            scattering: SignPair { plus: a_plus, minus: a_minus },
        },
        gamma,
        m_st,
    })
}

/// Cavity-modified EIT parameters at Δ_LA = Δ_CA: the broadened linewidth
/// γ′ = γ[Cκ²/(κ²+ω²) + 1] and the boosted Rabi frequency
/// Ω_eff = √(Ω_L² + 4ω²(γ′−γ)/κ).
pub fn effective_eit_parameters(params: &SystemParams, omega: f64) -> Result<(f64, f64)> {
    params.validate()?;
    if (params.delta_la - params.delta_ca).abs() > EIT_LINE_TOL {
        return Err(Error::Precondition(
            "effective EIT parameters are defined at Delta_LA = Delta_CA".into(),
        ));
    }
    let kappa2 = params.kappa * params.kappa;
    let gamma_prime =
        params.gamma * (params.cooperativity() * kappa2 / (kappa2 + omega * omega) + 1.0);
    let omega_eff = (params.omega_l * params.omega_l
        + 4.0 * omega * omega * (gamma_prime - params.gamma) / params.kappa)
        .sqrt();
    Ok((omega_eff, gamma_prime))
}

/// Free-space EIT cooling rates along the control-laser axis: the probe is
/// shone directly on the atom (coupling Ω_P on |g₂⟩↔|e⟩), no cavity.
///
/// The relative phase gradient of the probe–control beat along the cooled
/// axis is carried by the probe vertex, so the sideband amplitude samples the
/// three-level absorption profile at ∓ω; the control-off limit is then the
/// familiar two-level Doppler structure.
pub fn rates_free_space_eit(params: &SystemParams, omega: f64) -> Result<RateResult> {
    params.validate()?;
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "trap frequency must be positive, got {omega}"
        )));
    }
    let eta = (params.omega_rec / omega).sqrt();
    let half_p = 0.5 * params.omega_p;

    // excited block over (|g1⟩, |e⟩)
    let h = Matrix2::new(
        C64::new(-params.delta_pl(), 0.0),
        C64::new(0.5 * params.omega_l, 0.0),
        C64::new(0.5 * params.omega_l, 0.0),
        C64::new(-params.delta_pa, -params.gamma),
    );

    // carrier amplitudes; exact dark state on the Raman line
    let carrier: Vector2<C64> = if params.omega_p == 0.0 {
        Vector2::zeros()
    } else if params.delta_pl() == 0.0 && params.omega_l > 0.0 {
        Vector2::new(C64::new(-params.omega_p / params.omega_l, 0.0), C64::new(0.0, 0.0))
    } else {
        let a: SMatrix<C64, 2, 2> = -h;
        let b = Vector2::new(C64::new(0.0, 0.0), C64::new(half_p, 0.0));
        solve_pivoted(&a, &b).ok_or_else(|| {
            Error::Divergent("free-space carrier steady state has no solution".into())
        })?
    };

    let source = Vector2::new(C64::new(0.0, 0.0), C64::new(0.0, eta * half_p));
    let sideband = |delta: f64| -> Result<Vector2<C64>> {
        let mut a: SMatrix<C64, 2, 2> = -h;
        a[(0, 0)] += C64::new(delta, 0.0);
        a[(1, 1)] += C64::new(delta, 0.0);
        solve_pivoted(&a, &source).ok_or_else(|| {
            Error::Divergent(format!("free-space sideband resolvent singular at {delta}"))
        })
    };
    let c_plus = sideband(-omega)?;
    let c_minus = sideband(omega)?;

    let diffusion =
        2.0 * params.gamma * params.alpha(Axis::Y) * (eta * eta) * carrier[1].norm_sqr();
    let atomic = SignPair {
        plus: 2.0 * params.gamma * c_plus[1].norm_sqr(),
        minus: 2.0 * params.gamma * c_minus[1].norm_sqr(),
    };
    let a_plus = diffusion + atomic.plus;
    let a_minus = diffusion + atomic.minus;
    let (gamma, m_st) = cooling_summary(a_plus, a_minus)?;
    Ok(RateResult {
        axis: Axis::Y,
        method: RateMethod::FreeSpaceEit,
        a_plus,
        a_minus,
        channels: Channels::Resolvent {
            diffusion,
            atomic,
            cavity: SignPair { plus: 0.0, minus: 0.0 },
        },
        gamma,
        m_st,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dressed::dressed_states;
    use crate::units::mhz_to_angular;
    use crate::MhzParams;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn defaults() -> SystemParams {
        SystemParams::default()
    }

    #[test]
    fn carrier_zero_without_drive() {
        let mut m = MhzParams::default();
        m.omega_p_mhz = 0.0;
        let c = carrier_amplitudes(&m.build().unwrap()).unwrap();
        assert_eq!(c.0, Vector3::zeros());
    }

    #[test]
    fn carrier_dark_state_is_exact() {
        let p = defaults(); // δ_PL = 0
        let c = carrier_amplitudes(&p).unwrap();
        assert_eq!(c.p_e(), 0.0);
        // the closed-form branch matches the generic solver just off the line
        let eps = 1e-11;
        let p_off = p.with_delta_pa(p.delta_la + eps);
        let c_off = carrier_amplitudes(&p_off).unwrap();
        assert!((c.0 - c_off.0).norm() < 1e-6 * c.0.norm());
        // dark state: the cavity holds the bare photon number
        assert_relative_eq!(
            c.n_cav(),
            crate::model::intracavity_photon_number(&p, false).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn carrier_empty_cavity_lorentzian() {
        let mut m = MhzParams::default();
        m.omega_l_mhz = 0.0;
        m.kx0_rad = std::f64::consts::FRAC_PI_2; // g̃ = 0
        m.delta_pa_mhz = 18.5;
        let p = m.build().unwrap();
        let c = carrier_amplitudes(&p).unwrap();
        let d = p.delta_pc();
        let expect = (0.5 * p.omega_p).powi(2) / (d * d + p.kappa * p.kappa);
        assert_relative_eq!(c.n_cav(), expect, max_relative = 1e-12);
    }

    #[test]
    fn resolvent_diffusion_vanishes_only_on_raman_line() {
        let p = defaults();
        let r = rates_resolvent(&p, Axis::Z, p.omega_z).unwrap();
        match r.channels {
            Channels::Resolvent { diffusion, .. } => assert_eq!(diffusion, 0.0),
            _ => unreachable!(),
        }
        let p_off = p.with_delta_pa(p.delta_la + mhz_to_angular(0.05));
        let r_off = rates_resolvent(&p_off, Axis::Z, p_off.omega_z).unwrap();
        match r_off.channels {
            Channels::Resolvent { diffusion, .. } => assert!(diffusion > 0.0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn resolvent_sideband_resonance_signs() {
        // δ_LC = 0, scan δ_PC: cooling on the red sideband of |+⟩, heating
        // on its blue sideband.
        let p = defaults();
        let omega = p.omega_z;
        let plus = &dressed_states(&p).unwrap()[0];
        assert_eq!(plus.label, crate::dressed::DressedLabel::Plus);
        let red = p.with_delta_pa(p.delta_ca + plus.omega - omega);
        let blue = p.with_delta_pa(p.delta_ca + plus.omega + omega);
        let r_red = rates_resolvent(&red, Axis::Z, omega).unwrap();
        let r_blue = rates_resolvent(&blue, Axis::Z, omega).unwrap();
        assert!(r_red.gamma > 0.0, "red sideband should cool, got {}", r_red.gamma);
        assert!(r_blue.gamma < 0.0, "blue sideband should heat, got {}", r_blue.gamma);
    }

    #[test]
    fn rates_scale_with_eta_squared_exactly() {
        let p = defaults().with_delta_pa(defaults().delta_la + mhz_to_angular(0.13));
        let mut m4 = p.to_mhz();
        m4.omega_rec_mhz *= 4.0; // doubles η
        let p4 = m4.build().unwrap();
        for axis in [Axis::Z, Axis::Y] {
            let r = rates_resolvent(&p, axis, p.omega_trap(axis)).unwrap();
            let r4 = rates_resolvent(&p4, axis, p.omega_trap(axis)).unwrap();
            assert_eq!(4.0 * r.a_plus, r4.a_plus);
            assert_eq!(4.0 * r.a_minus, r4.a_minus);
        }
    }

    #[test]
    fn rates_scale_with_probe_power_exactly() {
        let p = defaults().with_delta_la(defaults().delta_la + mhz_to_angular(0.71));
        let mut m2 = p.to_mhz();
        m2.omega_p_mhz *= 2.0;
        let p2 = m2.build().unwrap();
        let r = rates_resolvent(&p, Axis::Z, p.omega_z).unwrap();
        let r2 = rates_resolvent(&p2, Axis::Z, p.omega_z).unwrap();
        assert_eq!(4.0 * r.a_plus, r2.a_plus);
        assert_eq!(4.0 * r.a_minus, r2.a_minus);
        let c = rates_ceit_analytic(&p2.with_delta_pa(p2.delta_la), p.omega_z).unwrap();
        let c1 = rates_ceit_analytic(&p.with_delta_pa(p.delta_la), p.omega_z).unwrap();
        assert_relative_eq!(c.a_plus, 4.0 * c1.a_plus, max_relative = 1e-14);
    }

    #[test]
    fn ceit_matches_resolvent_on_the_line() {
        // the two routes are algebraically identical on δ_PL = 0
        for dlc_mhz in [-1.0, -0.4, 0.0, 0.3, 0.9] {
            let mut m = MhzParams::default();
            m.delta_la_mhz = 16.0 + dlc_mhz;
            m.delta_pa_mhz = m.delta_la_mhz; // δ_PL = 0, δ_PC = δ_LC
            let p = m.build().unwrap();
            let omega = p.omega_z;
            let analytic = rates_ceit_analytic(&p, omega).unwrap();
            let resolvent = rates_resolvent(&p, Axis::Z, omega).unwrap();
            assert_relative_eq!(analytic.a_plus, resolvent.a_plus, max_relative = 1e-9);
            assert_relative_eq!(analytic.a_minus, resolvent.a_minus, max_relative = 1e-9);
        }
    }

    #[test]
    fn ceit_trivial_zeros() {
        let mut m = MhzParams::default();
        m.omega_p_mhz = 0.0;
        let p = m.build().unwrap();
        let r = rates_ceit_analytic(&p, p.omega_z).unwrap();
        assert_eq!((r.a_plus, r.a_minus), (0.0, 0.0));
        assert!(r.m_st.is_none());

        let mut m = MhzParams::default();
        m.kx0_rad = 0.0; // antinode: sin² prefactor = 0
        let p = m.build().unwrap();
        let r = rates_ceit_analytic(&p, p.omega_z).unwrap();
        assert_eq!((r.a_plus, r.a_minus), (0.0, 0.0));
    }

    #[test]
    fn ceit_rejects_off_line_calls() {
        let mut m = MhzParams::default();
        m.delta_pa_mhz = 17.0; // δ_PL = 1 MHz
        let p = m.build().unwrap();
        let err = rates_ceit_analytic(&p, p.omega_z).unwrap_err();
        assert!(err.to_string().contains("EIT resonance condition violated"));
    }

    #[test]
    fn ceit_reference_point_occupation_band() {
        let p = defaults();
        let r = rates_ceit_analytic(&p, p.omega_z).unwrap();
        let m_st = r.m_st.expect("reference point cools");
        assert!((0.03..=0.3).contains(&m_st), "m_st = {m_st}");
    }

    #[test]
    fn effective_parameters_limits() {
        // C = 0: unmodified EIT parameters
        let mut m = MhzParams::default();
        m.g_mhz = 0.0;
        let p = m.build().unwrap();
        let (om, gp) = effective_eit_parameters(&p, p.omega_z).unwrap();
        assert_relative_eq!(om, p.omega_l, max_relative = 1e-14);
        assert_relative_eq!(gp, p.gamma, max_relative = 1e-14);

        // κ → ∞ at fixed C: γ′ → γ(C+1)
        let mut m = MhzParams::default();
        m.kappa_mhz = 4.0e4;
        m.kx0_rad = 0.0;
        let p = m.build().unwrap();
        let c = p.cooperativity();
        let (_, gp) = effective_eit_parameters(&p, p.omega_z).unwrap();
        assert_relative_eq!(gp, p.gamma * (c + 1.0), max_relative = 1e-6);

        // reference values: g̃² = g²/2 gives C ≈ 6.23 and γ′/γ ≈ 5.98
        let p = defaults();
        assert_relative_eq!(p.cooperativity(), 6.23, max_relative = 2e-3);
        let (_, gp) = effective_eit_parameters(&p, p.omega_z).unwrap();
        assert_relative_eq!(gp / p.gamma, 5.98, max_relative = 2e-3);
    }

    /// Independent closed-form route for the free-space system: scalar
    /// resolvent algebra on the 2×2 block instead of matrix solves.
    fn free_space_oracle(p: &SystemParams, omega: f64) -> (f64, f64) {
        let eta = (p.omega_rec / omega).sqrt();
        let half_p = 0.5 * p.omega_p;
        let dpl = C64::new(p.delta_pl(), 0.0);
        let dea = C64::new(p.delta_pa, p.gamma); // Δ_PA + iγ
        let ol2_4 = C64::new(0.25 * p.omega_l * p.omega_l, 0.0);
        let c_e = C64::new(half_p, 0.0) * dpl / (dpl * dea - ol2_4);
        let g_ee = |delta: f64| -> C64 {
            let d = C64::new(delta, 0.0);
            C64::new(1.0, 0.0) / (d + dea - ol2_4 / (d + dpl))
        };
        let t = |delta: f64| -> f64 { (eta * half_p) * (eta * half_p) * g_ee(delta).norm_sqr() };
        let diffusion = 2.0 * p.gamma * p.alpha(Axis::Y) * eta * eta * c_e.norm_sqr();
        (
            diffusion + 2.0 * p.gamma * t(-omega),
            diffusion + 2.0 * p.gamma * t(omega),
        )
    }

    #[test]
    fn free_space_matches_scalar_oracle() {
        for dpl_mhz in [-0.7, -0.2, 0.15, 0.6] {
            let mut m = MhzParams::default();
            m.delta_la_mhz = 11.0;
            m.delta_pa_mhz = 11.0 + dpl_mhz;
            let p = m.build().unwrap();
            let omega = p.omega_y;
            let (oa_p, oa_m) = free_space_oracle(&p, omega);
            let r = rates_free_space_eit(&p, omega).unwrap();
            assert_relative_eq!(r.a_plus, oa_p, max_relative = 1e-11);
            assert_relative_eq!(r.a_minus, oa_m, max_relative = 1e-11);
        }
    }

    #[test]
    fn free_space_dark_point_and_stark_matching() {
        // on the Raman line: no diffusion, and A₋ peaks where the light
        // shift matches the trap frequency, Δ* = Ω_L²/(4ω) − ω
        let omega = mhz_to_angular(0.3);
        let mut best = (0.0f64, 0.0f64);
        for k in 0..4000 {
            let delta_mhz = 0.01 * k as f64;
            let mut m = MhzParams::default();
            m.delta_la_mhz = delta_mhz;
            m.delta_pa_mhz = delta_mhz;
            let p = m.build().unwrap();
            let r = rates_free_space_eit(&p, omega).unwrap();
            match r.channels {
                Channels::Resolvent { diffusion, .. } => assert_eq!(diffusion, 0.0),
                _ => unreachable!(),
            }
            if r.a_minus > best.1 {
                best = (delta_mhz, r.a_minus);
            }
        }
        let p = defaults();
        let expect = p.omega_l * p.omega_l / (4.0 * omega) - omega;
        assert_relative_eq!(mhz_to_angular(best.0), expect, max_relative = 0.01);
    }

    #[test]
    fn free_space_two_level_doppler_signs() {
        let mut m = MhzParams::default();
        m.omega_l_mhz = 0.0;
        let omega = mhz_to_angular(0.3);
        for dpa_mhz in [-8.0, -2.6, -0.4, 0.4, 2.6, 8.0] {
            m.delta_pa_mhz = dpa_mhz;
            let p = m.build().unwrap();
            let r = rates_free_space_eit(&p, omega).unwrap();
            if dpa_mhz < 0.0 {
                assert!(r.gamma > 0.0, "expected cooling at {dpa_mhz} MHz");
            } else {
                assert!(r.gamma < 0.0, "expected heating at {dpa_mhz} MHz");
            }
        }
    }

    #[test]
    fn cooling_summary_examples() {
        assert_eq!(cooling_summary(0.0, 2.0).unwrap(), (2.0, Some(0.0)));
        assert_eq!(cooling_summary(1.5, 1.5).unwrap(), (0.0, None));
        assert_eq!(cooling_summary(1.0, 3.0).unwrap(), (2.0, Some(0.5)));
        assert!(cooling_summary(-0.1, 1.0).is_err());
    }

    proptest! {
        /// Channel positivity and exact channel sums for random detunings.
        #[test]
        fn channels_positive_and_sum(
            dla in -30.0f64..30.0,
            dpa in -35.0f64..35.0,
            kx0 in 0.05f64..1.5,
        ) {
            let mut m = MhzParams::default();
            m.delta_la_mhz = dla;
            m.delta_pa_mhz = dpa;
            m.kx0_rad = kx0;
            let p = m.build().unwrap();
            for axis in [Axis::Z, Axis::Y] {
                let r = rates_resolvent(&p, axis, p.omega_trap(axis)).unwrap();
                prop_assert!(r.a_plus >= 0.0 && r.a_minus >= 0.0);
                match r.channels {
                    Channels::Resolvent { diffusion, atomic, cavity } => {
                        prop_assert!(diffusion >= 0.0);
                        prop_assert!(atomic.plus >= 0.0 && atomic.minus >= 0.0);
                        prop_assert!(cavity.plus >= 0.0 && cavity.minus >= 0.0);
                        prop_assert_eq!(r.a_plus, diffusion + atomic.plus + cavity.plus);
                        prop_assert_eq!(r.a_minus, diffusion + atomic.minus + cavity.minus);
                    }
                    _ => prop_assert!(false),
                }
                prop_assert_eq!(r.gamma, r.a_minus - r.a_plus);
                if let Some(m_st) = r.m_st {
                    prop_assert!(r.gamma > 0.0 && m_st >= 0.0);
                }
            }
        }
    }

    #[test]
    fn json_record_is_per_ms() {
        let p = defaults();
        let r = rates_resolvent(&p, Axis::Z, p.omega_z).unwrap();
        let v = r.to_json_per_ms();
        assert_relative_eq!(
            v["gamma_rate"].as_f64().unwrap(),
            r.gamma * 1e3,
            max_relative = 1e-14
        );
        assert_eq!(v["method"], "resolvent");
        assert_eq!(v["axis"], "z");
    }
}
