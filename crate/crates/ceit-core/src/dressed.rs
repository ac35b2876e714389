//! Dressed states of the control-driven atom–cavity system and weak-probe
//! excitation spectra.
//!
//! The single-excitation manifold is spanned by (|g₁,0⟩, |g₂,1⟩, |e,0⟩);
//! diagonalizing its non-Hermitian block yields the three dressed states
//! |+⟩, |◦⟩, |−⟩ with complex eigenvalues ω_j − iγ_j. Frequencies are
//! quoted in the probe–cavity detuning convention: the probe is resonant
//! with dressed state j when δ_PC = ω_j.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::linalg::eig3;
use crate::params::SystemParams;
use crate::rates;
use crate::Result;

/// Basis indices of the single-excitation 3-vectors.
pub mod exc {
    /// |g₁, 0 photons⟩.
    pub const G1: usize = 0;
    /// |g₂, 1 photon⟩.
    pub const CAV: usize = 1;
    /// |e, 0 photons⟩.
    pub const E: usize = 2;
}

/// Dressed-state labels, ordered by descending frequency at the reference
/// point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DressedLabel {
    Plus,
    Circ,
    Minus,
}

impl std::fmt::Display for DressedLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DressedLabel::Plus => write!(f, "plus"),
            DressedLabel::Circ => write!(f, "circ"),
            DressedLabel::Minus => write!(f, "minus"),
        }
    }
}

/// One dressed state: complex eigenfrequency and eigenvector of the
/// single-excitation block.
#[derive(Debug, Clone)]
pub struct DressedState {
    pub label: DressedLabel,
    /// Frequency ω_j in the δ_PC convention (rad/µs).
    pub omega: f64,
    /// Linewidth γ_j (HWHM, rad/µs).
    pub linewidth: f64,
    /// Unit eigenvector over (|g₁,0⟩, |g₂,1⟩, |e,0⟩).
    pub vector: Vector3<C64>,
    /// Set when this state coalesced with another (exceptional point).
    pub degenerate: bool,
}

/// One point of a weak-probe excitation/transmission spectrum.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpectrumPoint {
    /// Probe–atom detuning of this point (rad/µs).
    pub delta_pa: f64,
    /// Excited-state population |c_e|².
    pub p_e: f64,
    /// Intracavity photon number |c_cav|².
    pub n_cav: f64,
    /// Photon number relative to the empty cavity on resonance.
    pub transmission: f64,
    /// Set when the steady-state solve diverged at this detuning.
    pub divergent: bool,
}

/// Single-excitation block of the effective Hamiltonian in the probe frame,
/// over (|g₁,0⟩, |g₂,1⟩, |e,0⟩).
pub fn single_excitation_block(params: &SystemParams) -> Matrix3<C64> {
    let mut m = Matrix3::<C64>::zeros();
    m[(exc::G1, exc::G1)] = C64::new(-params.delta_pl(), 0.0);
    m[(exc::CAV, exc::CAV)] = C64::new(-params.delta_pc(), -params.kappa);
    m[(exc::E, exc::E)] = C64::new(-params.delta_pa, -params.gamma);
    let half_l = C64::new(0.5 * params.omega_l, 0.0);
    m[(exc::G1, exc::E)] = half_l;
    m[(exc::E, exc::G1)] = half_l;
    let ge = C64::new(params.g_eff(), 0.0);
    m[(exc::CAV, exc::E)] = ge;
    m[(exc::E, exc::CAV)] = ge;
    m
}

/// Probe-independent dressed-state matrix: the single-excitation block with
/// the probe detuning pinned to the cavity (δ_PC = 0 reference), so that its
/// eigenvalues are the δ_PC values at which the probe hits each state.
pub fn dressed_matrix(params: &SystemParams) -> Matrix3<C64> {
    single_excitation_block(&params.with_delta_pa(params.delta_ca))
}

fn states_from_eig(params: &SystemParams) -> [DressedState; 3] {
    let e = eig3(&dressed_matrix(params));
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| {
        e.values[b]
            .re
            .total_cmp(&e.values[a].re)
            .then(e.values[a].im.total_cmp(&e.values[b].im))
    });
    let labels = [DressedLabel::Plus, DressedLabel::Circ, DressedLabel::Minus];
    let mut out = Vec::with_capacity(3);
    for (k, &i) in idx.iter().enumerate() {
        // clamp roundoff-negative linewidths; anything larger is a bug
        let lw = -e.values[i].im;
        debug_assert!(lw > -1e-9 * (params.gamma + params.kappa));
        out.push(DressedState {
            label: labels[k],
            omega: e.values[i].re,
            linewidth: lw.max(0.0),
            vector: e.vectors[i],
            degenerate: e.defective,
        });
    }
    out.try_into().unwrap()
}

/// Dressed states at a single parameter point, ordered by descending ω_j
/// (|+⟩, |◦⟩, |−⟩). Exceptional points are flagged, not rejected.
pub fn dressed_states(params: &SystemParams) -> Result<[DressedState; 3]> {
    params.validate()?;
    Ok(states_from_eig(params))
}

/// Reassigns `current` labels so that each one continues the branch of the
/// overlapping state in `prev`. This is the stitching primitive for chunked
/// sweeps.
pub fn relabel_by_overlap(prev: &[DressedState; 3], current: [DressedState; 3]) -> [DressedState; 3] {
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut best = PERMS[0];
    let mut best_score = f64::NEG_INFINITY;
    for perm in PERMS {
        let score: f64 = (0..3)
            .map(|i| prev[i].vector.dotc(&current[perm[i]].vector).norm())
            .sum();
        if score > best_score {
            best_score = score;
            best = perm;
        }
    }
    let mut out = current.clone();
    for i in 0..3 {
        out[i] = current[best[i]].clone();
        out[i].label = prev[i].label;
        // keep eigenvector sign continuous along the branch
        let ov = prev[i].vector.dotc(&out[i].vector);
        if ov.re < 0.0 {
            out[i].vector = -out[i].vector;
        }
    }
    out
}

/// Dressed states along a 1-D parameter sweep with continuity-based branch
/// tracking: labels follow eigenvector overlap, so lines stay smooth through
/// avoided crossings. The first point seeds labels by descending frequency.
pub fn dressed_sweep<I>(points: I) -> Result<Vec<[DressedState; 3]>>
where
    I: IntoIterator<Item = SystemParams>,
{
    let mut out: Vec<[DressedState; 3]> = Vec::new();
    for p in points {
        p.validate()?;
        let states = states_from_eig(&p);
        let states = match out.last() {
            Some(prev) => relabel_by_overlap(prev, states),
            None => states,
        };
        out.push(states);
    }
    Ok(out)
}

/// Weak-probe excitation spectrum over a grid of probe–atom detunings
/// (rad/µs). Divergent points are flagged rather than failing the sweep.
pub fn excitation_spectrum(params: &SystemParams, delta_pa_grid: &[f64]) -> Result<Vec<SpectrumPoint>> {
    params.validate()?;
    let half_p = 0.5 * params.omega_p;
    let empty_resonant = half_p * half_p / (params.kappa * params.kappa);
    let mut out = Vec::with_capacity(delta_pa_grid.len());
    for &dpa in delta_pa_grid {
        let p = params.with_delta_pa(dpa);
        match rates::carrier_amplitudes(&p) {
            Ok(c) => {
                let n_cav = c.n_cav();
                out.push(SpectrumPoint {
                    delta_pa: dpa,
                    p_e: c.p_e(),
                    n_cav,
                    transmission: if empty_resonant > 0.0 { n_cav / empty_resonant } else { 0.0 },
                    divergent: false,
                });
            }
            Err(_) => out.push(SpectrumPoint {
                delta_pa: dpa,
                p_e: f64::INFINITY,
                n_cav: f64::INFINITY,
                transmission: f64::INFINITY,
                divergent: true,
            }),
        }
    }
    Ok(out)
}

/// Probe–cavity detunings at which the probe drives the red and blue
/// motional sideband of each dressed state: δ_PC = ω_j ∓ ω.
pub fn sideband_resonance_frequencies(
    params: &SystemParams,
    omega: f64,
) -> Result<Vec<(DressedLabel, f64, f64)>> {
    let states = dressed_states(params)?;
    Ok(states
        .iter()
        .map(|s| (s.label, s.omega - omega, s.omega + omega))
        .collect())
}

/// Spectrum rows in the output convention (MHz, linear).
pub fn spectrum_csv(points: &[SpectrumPoint], w: &mut impl std::io::Write) -> std::io::Result<()> {
    writeln!(w, "delta_pa_mhz,p_e,n_cav,transmission")?;
    for p in points {
        writeln!(
            w,
            "{:.6},{:.9e},{:.9e},{:.9e}",
            crate::units::angular_to_mhz(p.delta_pa),
            p.p_e,
            p.n_cav,
            p.transmission
        )?;
    }
    Ok(())
}

// canonical_unit is re-exported for tests that need gauge-fixed vectors
pub use crate::linalg::canonical_unit as canonical_eigvec;
