//! Internal-state model of the four-level atom–cavity system.
//!
//! The motionless basis is ordered (|g₂,0⟩, |g₁,0⟩, |e,0⟩, |g₂,1⟩): both
//! stable ground states with an empty cavity, the excited state, and the
//! one-photon state reached by the probe. Operators are dense complex 4×4
//! matrices in the frame rotating at the probe frequency.

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;

use crate::params::{Axis, SystemParams};
use crate::{Error, Result};

/// Basis indices of the 4×4 internal space.
pub mod basis {
    /// |g₂, 0 photons⟩ — the state the probe drives from.
    pub const G2_0: usize = 0;
    /// |g₁, 0 photons⟩.
    pub const G1_0: usize = 1;
    /// |e, 0 photons⟩.
    pub const E_0: usize = 2;
    /// |g₂, 1 photon⟩.
    pub const G2_1: usize = 3;
}

/// What a 4×4 internal operator represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorLabel {
    /// Non-Hermitian rotating-frame Hamiltonian (drive excluded).
    Hamiltonian,
    /// Weak probe drive |g₂,0⟩↔|g₂,1⟩.
    Drive,
    /// Linear-order mechanical coupling along one axis.
    MechCoupling(Axis),
    /// A jump operator of one decay channel.
    DecayChannel(Decay),
}

/// Decay channels of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decay {
    /// Cavity field decay at rate 2κ (photon leaves through the mirrors).
    CavityField,
    /// Spontaneous decay |e⟩→|g₁⟩ at rate 2γβ₁.
    AtomToG1,
    /// Spontaneous decay |e⟩→|g₂⟩ at rate 2γβ₂.
    AtomToG2,
}

/// A dense operator over the four internal states, tagged with its role.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalOperator {
    pub matrix: Matrix4<C64>,
    pub label: OperatorLabel,
}

/// Non-Hermitian effective Hamiltonian in the probe rotating frame:
/// diagonal (0, −δ_PL, −Δ_PA − iγ, −δ_PC − iκ) with couplings Ω_L/2 on
/// |g₁,0⟩↔|e,0⟩ and g̃ on |g₂,1⟩↔|e,0⟩. The probe drive is excluded.
pub fn build_effective_hamiltonian(params: &SystemParams) -> Result<InternalOperator> {
    params.validate()?;
    let mut m = Matrix4::<C64>::zeros();
    m[(basis::G1_0, basis::G1_0)] = C64::new(-params.delta_pl(), 0.0);
    m[(basis::E_0, basis::E_0)] = C64::new(-params.delta_pa, -params.gamma);
    m[(basis::G2_1, basis::G2_1)] = C64::new(-params.delta_pc(), -params.kappa);
    let half_l = C64::new(0.5 * params.omega_l, 0.0);
    m[(basis::G1_0, basis::E_0)] = half_l;
    m[(basis::E_0, basis::G1_0)] = half_l;
    let ge = C64::new(params.g_eff(), 0.0);
    m[(basis::G2_1, basis::E_0)] = ge;
    m[(basis::E_0, basis::G2_1)] = ge;
    Ok(InternalOperator { matrix: m, label: OperatorLabel::Hamiltonian })
}

/// Probe drive (Ω_P/2)(|g₂,0⟩⟨g₂,1| + h.c.).
pub fn build_drive(params: &SystemParams) -> Result<InternalOperator> {
    params.validate()?;
    let mut m = Matrix4::<C64>::zeros();
    let half_p = C64::new(0.5 * params.omega_p, 0.0);
    m[(basis::G2_0, basis::G2_1)] = half_p;
    m[(basis::G2_1, basis::G2_0)] = half_p;
    Ok(InternalOperator { matrix: m, label: OperatorLabel::Drive })
}

/// Linear-order mechanical coupling along `axis`.
///
/// Z (cavity standing wave): W_z = −η_z g sin(k·x₀)(|e,0⟩⟨g₂,1| + h.c.),
/// the gradient of the mode function at the trap center.
/// Y (running-wave control): W_y = i η_y (Ω_L/2)(|e,0⟩⟨g₁,0| − h.c.), the
/// phase gradient of the control laser.
pub fn build_mech_coupling(params: &SystemParams, axis: Axis) -> Result<InternalOperator> {
    params.validate()?;
    let eta = params.eta(axis);
    let mut m = Matrix4::<C64>::zeros();
    match axis {
        Axis::Z => {
            let w = C64::new(-eta * params.g * params.kx0.sin(), 0.0);
            m[(basis::E_0, basis::G2_1)] = w;
            m[(basis::G2_1, basis::E_0)] = w;
        }
        Axis::Y => {
            let w = C64::new(0.0, eta * 0.5 * params.omega_l);
            m[(basis::E_0, basis::G1_0)] = w;
            m[(basis::G1_0, basis::E_0)] = -w;
        }
    }
    Ok(InternalOperator { matrix: m, label: OperatorLabel::MechCoupling(axis) })
}

/// Jump operators of the three decay channels, scaled so that L†L gives the
/// population decay rates 2κ and 2γβ_i.
pub fn build_decay_channels(params: &SystemParams) -> Result<Vec<InternalOperator>> {
    params.validate()?;
    let mut out = Vec::with_capacity(3);
    let mut m = Matrix4::<C64>::zeros();
    m[(basis::G2_0, basis::G2_1)] = C64::new((2.0 * params.kappa).sqrt(), 0.0);
    out.push(InternalOperator { matrix: m, label: OperatorLabel::DecayChannel(Decay::CavityField) });
    let mut m = Matrix4::<C64>::zeros();
    m[(basis::G1_0, basis::E_0)] = C64::new((2.0 * params.gamma * params.beta1).sqrt(), 0.0);
    out.push(InternalOperator { matrix: m, label: OperatorLabel::DecayChannel(Decay::AtomToG1) });
    let mut m = Matrix4::<C64>::zeros();
    m[(basis::G2_0, basis::E_0)] = C64::new((2.0 * params.gamma * params.beta2).sqrt(), 0.0);
    out.push(InternalOperator { matrix: m, label: OperatorLabel::DecayChannel(Decay::AtomToG2) });
    Ok(out)
}

/// Mean intracavity photon number under the weak probe drive.
///
/// Without the atom this is the empty-cavity Lorentzian
/// (Ω_P/2)²/(κ² + δ_PC²); with the atom it is |c_cav|² of the steady-state
/// excitation amplitudes.
pub fn intracavity_photon_number(params: &SystemParams, with_atom: bool) -> Result<f64> {
    params.validate()?;
    if !with_atom {
        let d = params.delta_pc();
        let half_p = 0.5 * params.omega_p;
        return Ok(half_p * half_p / (params.kappa * params.kappa + d * d));
    }
    let c = crate::rates::carrier_amplitudes(params)?;
    Ok(c.n_cav())
}

/// Lamb-Dicke parameter √(ω_rec/ω_trap).
pub fn lamb_dicke(omega_trap: f64, omega_rec: f64) -> Result<f64> {
    if !(omega_trap > 0.0) || !(omega_rec > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lamb_dicke requires positive frequencies, got trap {omega_trap}, recoil {omega_rec}"
        )));
    }
    Ok((omega_rec / omega_trap).sqrt())
}
