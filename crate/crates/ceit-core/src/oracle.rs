//! Lindblad master-equation oracle: the four internal states coupled to one
//! truncated vibrational mode.
//!
//! This module is the ground truth the Lamb-Dicke rate equations are
//! validated against. The light–motion couplings are expanded to a chosen
//! order in η, spontaneous-emission recoil enters through discrete projected
//! momentum kicks, and the density matrix is propagated either with an
//! adaptive Dormand–Prince integrator or with Krylov-subspace evaluation of
//! the matrix exponential. Trajectories of ⟨m(t)⟩ are reduced to a cooling
//! rate and stationary occupation by a separable exponential fit.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::model::basis;
use crate::params::{Axis, SystemParams};
use crate::units::{per_us_to_per_ms, phonon_energy_uk};
use crate::{Error, Result};

/// Order of the Lamb-Dicke expansion of the light–motion couplings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LdOrder {
    First,
    Second,
}

/// Time propagation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    AdaptiveRk,
    ExpmKrylov,
}

/// How spontaneous-emission recoil couples to the motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoilModel {
    /// Two discrete emission directions ±axis with weight chosen to
    /// reproduce the configured dipole-pattern factor ᾱ.
    ProjectedKicks,
    None,
}

/// Truncation, expansion and integration settings for one oracle run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Phonon cutoff: the mode keeps levels 0..=n_max.
    pub n_max: usize,
    pub ld_order: LdOrder,
    pub axis: Axis,
    pub integrator: Integrator,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Total propagation time (µs).
    pub t_final: f64,
    /// Observable sampling interval (µs).
    pub sample_dt: f64,
    pub recoil_model: RecoilModel,
    /// Hard cap on the Hilbert-space dimension 4·(n_max+1).
    pub dim_cap: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            n_max: 12,
            ld_order: LdOrder::First,
            axis: Axis::Z,
            integrator: Integrator::AdaptiveRk,
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            t_final: 1000.0,
            sample_dt: 2.0,
            recoil_model: RecoilModel::ProjectedKicks,
            dim_cap: 512,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_max < 3 {
            return Err(Error::Config(format!("n_max must be >= 3, got {}", self.n_max)));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Config("integration tolerances must be positive".into()));
        }
        if !(self.sample_dt > 0.0) || !(self.t_final >= 10.0 * self.sample_dt) {
            return Err(Error::Config(format!(
                "need t_final >= 10·sample_dt, got t_final = {}, sample_dt = {}",
                self.t_final, self.sample_dt
            )));
        }
        let dim = 4 * (self.n_max + 1);
        if dim > self.dim_cap {
            return Err(Error::Config(format!(
                "Hilbert-space dimension {dim} exceeds the configured cap {}",
                self.dim_cap
            )));
        }
        Ok(())
    }
}

/// Sparse matrix in coordinate form; the Liouvillian operators are
/// banded-block sparse (tridiagonal couplings, pentadiagonal decay terms in
/// the phonon index), which makes the master-equation right-hand side cheap
/// enough for the ~10⁵ stability-limited integrator steps a cooling
/// trajectory needs.
#[derive(Debug, Clone)]
struct SparseOp {
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    fn from_dense(m: &DMatrix<C64>) -> Self {
        // the operators are built from structural zeros, so exact-zero
        // filtering keeps precisely the banded-block pattern
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let v = m[(i, j)];
                if v.norm_sqr() != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        SparseOp { entries }
    }

    /// out += f · (self × b)
    fn left_mul_accum(&self, b: &DMatrix<C64>, out: &mut DMatrix<C64>, f: C64) {
        let n = b.ncols();
        let rows = b.nrows();
        let bs = b.as_slice();
        let os = out.as_mut_slice();
        for j in 0..n {
            let bcol = &bs[j * rows..(j + 1) * rows];
            let ocol = &mut os[j * rows..(j + 1) * rows];
            for &(r, c, v) in &self.entries {
                ocol[r] += f * v * bcol[c];
            }
        }
    }

    /// out += f · (b × self)
    fn right_mul_accum(&self, b: &DMatrix<C64>, out: &mut DMatrix<C64>, f: C64) {
        let rows = b.nrows();
        let bs = b.as_slice();
        let os = out.as_mut_slice();
        for &(k, j, v) in &self.entries {
            let fv = f * v;
            let bcol = &bs[k * rows..(k + 1) * rows];
            let ocol = &mut os[j * rows..(j + 1) * rows];
            for i in 0..rows {
                ocol[i] += fv * bcol[i];
            }
        }
    }
}

/// The Lindblad generator: Hermitian Hamiltonian, jump operators, and the
/// cached non-Hermitian drift h_eff = H − (i/2)ΣL†L.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    /// Hilbert-space dimension 4·(n_max+1).
    pub dim: usize,
    pub n_max: usize,
    /// Trap frequency of the simulated axis (rad/µs).
    pub omega_trap: f64,
    /// Lamb-Dicke parameter of the simulated axis.
    pub eta: f64,
    pub hamiltonian: DMatrix<C64>,
    pub jumps: Vec<DMatrix<C64>>,
    h_eff: DMatrix<C64>,
    h_eff_sp: SparseOp,
    h_eff_adj_sp: SparseOp,
    jump_sp: Vec<(SparseOp, SparseOp)>,
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

fn internal_op(i: usize, j: usize) -> DMatrix<C64> {
    let mut m = DMatrix::<C64>::zeros(4, 4);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

/// Builds the Lindblad generator for motion along `cfg.axis`.
///
/// The Hamiltonian is ω b†b plus the internal rotating-frame terms, with the
/// axis-resolved coupling expanded in η: along Z the cavity coupling is
/// g·cos(k·x₀ + η(b+b†)) on |e,0⟩⟨g₂,1| + h.c.; along Y the control drive
/// carries the running-wave phase e^{iη(b+b†)} on |e,0⟩⟨g₁,0| + h.c.
/// Decay: 2κ on the photon, 2γ split β₁/β₂ over the ground states with
/// projected recoil kicks e^{±i√ᾱ·η(b+b†)} at the configured order.
pub fn build_liouvillian(params: &SystemParams, cfg: &OracleConfig) -> Result<Liouvillian> {
    params.validate()?;
    cfg.validate()?;
    let np = cfg.n_max + 1;
    let dim = 4 * np;
    let eta = params.eta(cfg.axis);
    let omega_trap = params.omega_trap(cfg.axis);

    let id_ph = DMatrix::<C64>::identity(np, np);
    let mut q = DMatrix::<C64>::zeros(np, np); // b + b†
    for m in 0..np - 1 {
        let v = C64::new(((m + 1) as f64).sqrt(), 0.0);
        q[(m, m + 1)] = v;
        q[(m + 1, m)] = v;
    }
    let q2 = &q * &q;
    let mut number = DMatrix::<C64>::zeros(np, np);
    for m in 0..np {
        number[(m, m)] = C64::new(m as f64, 0.0);
    }

    // phonon factor of exp(i·s·η(b+b†)) truncated at cfg.ld_order
    let phase_factor = |s: f64| -> DMatrix<C64> {
        let mut f = &id_ph + &q * C64::new(0.0, s * eta);
        if cfg.ld_order == LdOrder::Second {
            f -= &q2 * C64::new(0.5 * s * s * eta * eta, 0.0);
        }
        f
    };

    // internal diagonal (real parts; decay goes into the jump operators)
    let mut h_int = DMatrix::<C64>::zeros(4, 4);
    h_int[(basis::G1_0, basis::G1_0)] = C64::new(-params.delta_pl(), 0.0);
    h_int[(basis::E_0, basis::E_0)] = C64::new(-params.delta_pa, 0.0);
    h_int[(basis::G2_1, basis::G2_1)] = C64::new(-params.delta_pc(), 0.0);
    let half_p = C64::new(0.5 * params.omega_p, 0.0);
    h_int[(basis::G2_0, basis::G2_1)] += half_p;
    h_int[(basis::G2_1, basis::G2_0)] += half_p;

    let mut h = kron(&h_int, &id_ph) + kron(&DMatrix::identity(4, 4), &(&number * C64::new(omega_trap, 0.0)));

    // cavity coupling |e,0⟩⟨g₂,1| ⊗ K_z + h.c.
    let k_z: DMatrix<C64> = match cfg.axis {
        Axis::Z => {
            let mut f = &id_ph * C64::new(params.kx0.cos(), 0.0)
                - &q * C64::new(params.kx0.sin() * eta, 0.0);
            if cfg.ld_order == LdOrder::Second {
                f -= &q2 * C64::new(0.5 * params.kx0.cos() * eta * eta, 0.0);
            }
            f * C64::new(params.g, 0.0)
        }
        Axis::Y => &id_ph * C64::new(params.g_eff(), 0.0),
    };
    let up = kron(&internal_op(basis::E_0, basis::G2_1), &k_z);
    h += &up + up.adjoint();

    // control coupling |e,0⟩⟨g₁,0| ⊗ K_y + h.c.
    let k_y: DMatrix<C64> = match cfg.axis {
        Axis::Y => phase_factor(1.0) * C64::new(0.5 * params.omega_l, 0.0),
        Axis::Z => &id_ph * C64::new(0.5 * params.omega_l, 0.0),
    };
    let up = kron(&internal_op(basis::E_0, basis::G1_0), &k_y);
    h += &up + up.adjoint();

    // jump operators
    let mut jumps: Vec<DMatrix<C64>> = Vec::new();
    jumps.push(
        kron(&internal_op(basis::G2_0, basis::G2_1), &id_ph)
            * C64::new((2.0 * params.kappa).sqrt(), 0.0),
    );
    let branches = [
        (basis::G1_0, params.beta1),
        (basis::G2_0, params.beta2),
    ];
    for (target, beta) in branches {
        if beta == 0.0 {
            continue;
        }
        match cfg.recoil_model {
            RecoilModel::None => {
                jumps.push(
                    kron(&internal_op(target, basis::E_0), &id_ph)
                        * C64::new((2.0 * params.gamma * beta).sqrt(), 0.0),
                );
            }
            RecoilModel::ProjectedKicks => {
                let u = params.alpha(cfg.axis).sqrt();
                for s in [1.0, -1.0] {
                    jumps.push(
                        kron(&internal_op(target, basis::E_0), &phase_factor(s * u))
                            * C64::new((params.gamma * beta).sqrt(), 0.0),
                    );
                }
            }
        }
    }

    let mut decay_sum = DMatrix::<C64>::zeros(dim, dim);
    for l in &jumps {
        decay_sum += l.adjoint() * l;
    }
    let h_eff = &h - decay_sum * C64::new(0.0, 0.5);
    let h_eff_sp = SparseOp::from_dense(&h_eff);
    let h_eff_adj_sp = SparseOp::from_dense(&h_eff.adjoint());
    let jump_sp = jumps
        .iter()
        .map(|l| (SparseOp::from_dense(l), SparseOp::from_dense(&l.adjoint())))
        .collect();

    Ok(Liouvillian {
        dim,
        n_max: cfg.n_max,
        omega_trap,
        eta,
        hamiltonian: h,
        jumps,
        h_eff,
        h_eff_sp,
        h_eff_adj_sp,
        jump_sp,
    })
}

impl Liouvillian {
    /// Right-hand side dρ/dt = −i(h_eff ρ − ρ h_eff†) + Σ L ρ L†.
    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let mut d = DMatrix::<C64>::zeros(self.dim, self.dim);
        self.h_eff_sp.left_mul_accum(rho, &mut d, C64::new(0.0, -1.0));
        self.h_eff_adj_sp.right_mul_accum(rho, &mut d, C64::new(0.0, 1.0));
        let mut tmp = DMatrix::<C64>::zeros(self.dim, self.dim);
        let one = C64::new(1.0, 0.0);
        for (l, l_adj) in &self.jump_sp {
            tmp.fill(C64::new(0.0, 0.0));
            l.left_mul_accum(rho, &mut tmp, one);
            l_adj.right_mul_accum(&tmp, &mut d, one);
        }
        d
    }

    fn idx(&self, internal: usize, m: usize) -> usize {
        internal * (self.n_max + 1) + m
    }

    /// ⟨b†b⟩.
    pub fn mean_m(&self, rho: &DMatrix<C64>) -> f64 {
        let mut acc = 0.0;
        for i in 0..4 {
            for m in 0..=self.n_max {
                acc += m as f64 * rho[(self.idx(i, m), self.idx(i, m))].re;
            }
        }
        acc
    }

    /// Excited-state population.
    pub fn p_e(&self, rho: &DMatrix<C64>) -> f64 {
        (0..=self.n_max)
            .map(|m| rho[(self.idx(basis::E_0, m), self.idx(basis::E_0, m))].re)
            .sum()
    }

    /// Intracavity photon number.
    pub fn n_cav(&self, rho: &DMatrix<C64>) -> f64 {
        (0..=self.n_max)
            .map(|m| rho[(self.idx(basis::G2_1, m), self.idx(basis::G2_1, m))].re)
            .sum()
    }

    /// Population of the top phonon level; the truncation-quality monitor.
    pub fn cutoff_population(&self, rho: &DMatrix<C64>) -> f64 {
        (0..4)
            .map(|i| rho[(self.idx(i, self.n_max), self.idx(i, self.n_max))].re)
            .sum()
    }

    /// Phonon-number marginal p_m.
    pub fn phonon_marginal(&self, rho: &DMatrix<C64>) -> Vec<f64> {
        (0..=self.n_max)
            .map(|m| (0..4).map(|i| rho[(self.idx(i, m), self.idx(i, m))].re).sum())
            .collect()
    }

    /// Dense superoperator in column-stacking convention. Guarded: only
    /// meaningful for small truncations.
    pub fn to_superoperator(&self) -> Result<DMatrix<C64>> {
        if self.dim > SUPEROP_DIM_CAP {
            return Err(Error::Config(format!(
                "dense superoperator needs dim <= {SUPEROP_DIM_CAP}, got {}",
                self.dim
            )));
        }
        let id = DMatrix::<C64>::identity(self.dim, self.dim);
        let mut s = kron(&id, &self.h_eff) * C64::new(0.0, -1.0);
        s += kron(&self.h_eff.conjugate(), &id) * C64::new(0.0, 1.0);
        for l in &self.jumps {
            s += kron(&l.conjugate(), l);
        }
        Ok(s)
    }
}

/// Largest dimension for which dense superoperator algebra (4096² and up)
/// stays cheap enough for interactive use.
pub const SUPEROP_DIM_CAP: usize = 40;

/// Density matrix |g₂,0⟩⟨g₂,0| ⊗ |m₀⟩⟨m₀|.
pub fn fock_initial_state(n_max: usize, m0: usize) -> Result<DMatrix<C64>> {
    if m0 > n_max {
        return Err(Error::Config(format!("m0 = {m0} exceeds n_max = {n_max}")));
    }
    let np = n_max + 1;
    let mut rho = DMatrix::<C64>::zeros(4 * np, 4 * np);
    let k = basis::G2_0 * np + m0;
    rho[(k, k)] = C64::new(1.0, 0.0);
    Ok(rho)
}

/// One trajectory sample.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectorySample {
    /// Time (µs).
    pub t: f64,
    pub m_mean: f64,
    /// tr ρ (should stay at 1).
    pub trace: f64,
    pub p_e: f64,
    pub n_cav: f64,
}

/// Result of one master-equation run.
#[derive(Debug, Clone)]
pub struct OracleRun {
    pub config: OracleConfig,
    pub trajectory: Vec<TrajectorySample>,
    /// Fitted rate Γ of ⟨m(t)⟩ = m_ss + (m₀ − m_ss)e^{−Γt} (1/µs); negative
    /// for heating.
    pub gamma_fit: f64,
    pub m_ss: f64,
    /// RMS fit residual relative to the trajectory spread.
    pub fit_residual: f64,
    pub converged: bool,
    /// Population reached the phonon cutoff; rerun with a larger n_max.
    pub cutoff_exceeded: bool,
    pub final_rho: DMatrix<C64>,
}

impl OracleRun {
    /// CSV rows `t_us, m_mean, trace_err, p_e, n_cav`.
    pub fn write_trajectory_csv(&self, w: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "t_us,m_mean,trace_err,p_e,n_cav")?;
        for s in &self.trajectory {
            writeln!(
                w,
                "{:.6},{:.9e},{:.3e},{:.9e},{:.9e}",
                s.t,
                s.m_mean,
                (s.trace - 1.0).abs(),
                s.p_e,
                s.n_cav
            )?;
        }
        Ok(())
    }

    /// Summary record with the rate in 1/ms.
    pub fn summary_json(&self) -> serde_json::Value {
        json!({
            "gamma_fit_per_ms": per_us_to_per_ms(self.gamma_fit),
            "m_ss": self.m_ss,
            "residual": self.fit_residual,
            "converged": self.converged,
            "n_max": self.config.n_max,
        })
    }
}

fn check_density_matrix(rho: &DMatrix<C64>, dim: usize) -> Result<()> {
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::InvalidParameter(format!(
            "density matrix must be {dim}×{dim}, got {}×{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let tr: C64 = (0..dim).map(|i| rho[(i, i)]).sum();
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-8 {
        return Err(Error::InvalidParameter(format!("initial trace is {tr}, expected 1")));
    }
    if (rho - rho.adjoint()).norm() > 1e-10 * rho.norm().max(1.0) {
        return Err(Error::InvalidParameter("initial state is not Hermitian".into()));
    }
    for i in 0..dim {
        if rho[(i, i)].re < -1e-10 {
            return Err(Error::InvalidParameter("initial state has negative population".into()));
        }
    }
    Ok(())
}

// Dormand–Prince 5(4) coefficients.
const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Rk45 {
    dt: f64,
    abs_tol: f64,
    rel_tol: f64,
}

impl Rk45 {
    /// Advances `rho` in place from `t0` to `t1`.
    fn integrate(&mut self, l: &Liouvillian, rho: &mut DMatrix<C64>, t0: f64, t1: f64) -> Result<()> {
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(());
        }
        let mut t = t0;
        let mut k1 = l.apply(rho); // FSAL
        let mut steps = 0usize;
        while t < t1 {
            let dt = self.dt.min(t1 - t);
            let mut k = Vec::with_capacity(7);
            k.push(k1.clone());
            for stage in 0..6 {
                let mut y = rho.clone();
                for (j, kj) in k.iter().enumerate() {
                    let a = DP_A[stage][j];
                    if a != 0.0 {
                        y += kj * C64::new(a * dt, 0.0);
                    }
                }
                let _ = DP_C; // stage times unused: the generator is autonomous
                k.push(l.apply(&y));
            }
            let mut y5 = rho.clone();
            let mut err_mat = DMatrix::<C64>::zeros(rho.nrows(), rho.ncols());
            for (j, kj) in k.iter().enumerate() {
                if DP_B5[j] != 0.0 {
                    y5 += kj * C64::new(DP_B5[j] * dt, 0.0);
                }
                let db = DP_B5[j] - DP_B4[j];
                if db != 0.0 {
                    err_mat += kj * C64::new(db * dt, 0.0);
                }
            }
            // weighted RMS error norm
            let n = (rho.nrows() * rho.ncols()) as f64;
            let mut acc = 0.0;
            for (e, (y0, y1)) in err_mat.iter().zip(rho.iter().zip(y5.iter())) {
                let sc = self.abs_tol + self.rel_tol * y0.norm().max(y1.norm());
                let r = e.norm() / sc;
                acc += r * r;
            }
            let err = (acc / n).sqrt();
            if err <= 1.0 {
                t += dt;
                *rho = y5;
                k1 = k.pop().unwrap(); // k7 = f(y5), first-same-as-last
                if !k1.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::Integration("non-finite state during propagation".into()));
                }
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            self.dt = (dt * factor).min(span);
            if self.dt < 1e-12 * span.max(1.0) {
                return Err(Error::Integration(format!(
                    "step size underflow at t = {t} (dt = {})",
                    self.dt
                )));
            }
            steps += 1;
            if steps > 50_000_000 {
                return Err(Error::Integration("step budget exhausted".into()));
            }
        }
        Ok(())
    }
}

/// Matrix 1-norm (max column sum of |entries|).
fn one_norm(a: &DMatrix<C64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Dense matrix exponential by Padé-13 with scaling and squaring.
pub fn expm_dense(a: &DMatrix<C64>) -> DMatrix<C64> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA_13: f64 = 5.371920351148152;
    let n = a.nrows();
    let norm = one_norm(a);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * C64::new(0.5f64.powi(s), 0.0);
    let id = DMatrix::<C64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u_inner = &a6 * C64::new(B[13], 0.0) + &a4 * C64::new(B[11], 0.0) + &a2 * C64::new(B[9], 0.0);
    let u = &a
        * (&a6 * &u_inner
            + &a6 * C64::new(B[7], 0.0)
            + &a4 * C64::new(B[5], 0.0)
            + &a2 * C64::new(B[3], 0.0)
            + &id * C64::new(B[1], 0.0));
    let v_inner = &a6 * C64::new(B[12], 0.0) + &a4 * C64::new(B[10], 0.0) + &a2 * C64::new(B[8], 0.0);
    let v = &a6 * &v_inner
        + &a6 * C64::new(B[6], 0.0)
        + &a4 * C64::new(B[4], 0.0)
        + &a2 * C64::new(B[2], 0.0)
        + &id * C64::new(B[0], 0.0);
    let denom = &v - &u;
    let numer = &v + &u;
    let mut r = denom
        .lu()
        .solve(&numer)
        .expect("Padé denominator is nonsingular for scaled input");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// One Krylov (Arnoldi) step of exp(dt·L) applied to ρ, with recursive step
/// halving when the subspace cannot represent the propagator accurately.
fn krylov_step(
    l: &Liouvillian,
    rho: &DMatrix<C64>,
    dt: f64,
    tol: f64,
    depth: usize,
) -> Result<DMatrix<C64>> {
    const M: usize = 30;
    if depth > 30 {
        return Err(Error::Integration("Krylov step halving did not converge".into()));
    }
    let beta = rho.norm();
    if beta == 0.0 {
        return Ok(rho.clone());
    }
    let mut vs: Vec<DMatrix<C64>> = vec![rho * C64::new(1.0 / beta, 0.0)];
    let mut h = DMatrix::<C64>::zeros(M + 1, M);
    let mut m_used = M;
    let mut happy = false;
    for j in 0..M {
        let mut w = l.apply(&vs[j]);
        for (i, vi) in vs.iter().enumerate() {
            let hij = vi.dotc(&w);
            h[(i, j)] = hij;
            w -= vi * hij;
        }
        // one re-orthogonalization pass keeps the basis clean
        for (i, vi) in vs.iter().enumerate() {
            let corr = vi.dotc(&w);
            h[(i, j)] += corr;
            w -= vi * corr;
        }
        let nw = w.norm();
        h[(j + 1, j)] = C64::new(nw, 0.0);
        if nw < 1e-12 {
            m_used = j + 1;
            happy = true;
            break;
        }
        vs.push(w * C64::new(1.0 / nw, 0.0));
    }
    let hm = h.view((0, 0), (m_used, m_used)).into_owned();
    let f = expm_dense(&(hm * C64::new(dt, 0.0)));
    // a-posteriori error estimate from the next Krylov coordinate
    if !happy {
        let err = beta * h[(m_used, m_used - 1)].norm() * f[(m_used - 1, 0)].norm();
        if err > tol {
            let half = krylov_step(l, rho, 0.5 * dt, 0.5 * tol, depth + 1)?;
            return krylov_step(l, &half, 0.5 * dt, 0.5 * tol, depth + 1);
        }
    }
    let mut out = DMatrix::<C64>::zeros(rho.nrows(), rho.ncols());
    for (k, vk) in vs.iter().take(m_used).enumerate() {
        out += vk * (f[(k, 0)] * beta);
    }
    Ok(out)
}

/// Separable single-exponential fit y(t) = a + b·e^{−Γt}: linear solve for
/// (a, b) at fixed Γ, outer 1-D search over Γ of either sign.
fn exp_fit(ts: &[f64], ys: &[f64], gamma_scale: f64) -> (f64, f64, f64, f64) {
    let n = ts.len() as f64;
    let mean_y = ys.iter().sum::<f64>() / n;
    let spread = ys.iter().map(|y| (y - mean_y).abs()).fold(0.0, f64::max);

    let sse_at = |gamma: f64| -> (f64, f64, f64) {
        // least squares for a + b·e(t)
        let (mut se, mut see, mut sy, mut sye) = (0.0, 0.0, 0.0, 0.0);
        for (&t, &y) in ts.iter().zip(ys) {
            let e = (-gamma * t).exp();
            se += e;
            see += e * e;
            sy += y;
            sye += y * e;
        }
        let det = n * see - se * se;
        if det.abs() < 1e-300 {
            return (mean_y, 0.0, f64::INFINITY);
        }
        let a = (sy * see - sye * se) / det;
        let b = (n * sye - sy * se) / det;
        let mut sse = 0.0;
        for (&t, &y) in ts.iter().zip(ys) {
            let r = y - a - b * (-gamma * t).exp();
            sse += r * r;
        }
        (a, b, sse)
    };

    // coarse signed log-grid over ±[scale/100, scale·100], then
    // golden-section refinement around the best candidate
    let mut best = (gamma_scale, f64::INFINITY);
    for sign in [1.0, -1.0] {
        for i in 0..=80 {
            let gamma = sign * gamma_scale * 10f64.powf(-2.0 + 0.05 * i as f64);
            let (_, _, sse) = sse_at(gamma);
            if sse < best.1 {
                best = (gamma, sse);
            }
        }
    }
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (best.0 / 10.0, best.0 * 10.0);
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    let (mut x1, mut x2) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
    let (mut f1, mut f2) = (sse_at(x1).2, sse_at(x2).2);
    for _ in 0..80 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = sse_at(x1).2;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = sse_at(x2).2;
        }
    }
    let gamma = 0.5 * (lo + hi);
    let (a, b, sse) = sse_at(gamma);
    let rms = (sse / n).sqrt();
    let residual = rms / spread.max(1e-9);
    (gamma, a, b, residual)
}

/// Propagates `rho0` under `l`, sampling observables every `cfg.sample_dt`,
/// and fits the phonon trajectory to a single exponential.
pub fn evolve(l: &Liouvillian, rho0: &DMatrix<C64>, cfg: &OracleConfig) -> Result<OracleRun> {
    cfg.validate()?;
    check_density_matrix(rho0, l.dim)?;
    let n_samples = (cfg.t_final / cfg.sample_dt).floor() as usize;
    let mut rho = rho0.clone();
    let mut trajectory = Vec::with_capacity(n_samples + 1);
    let sample = |rho: &DMatrix<C64>, t: f64| TrajectorySample {
        t,
        m_mean: l.mean_m(rho),
        trace: (0..l.dim).map(|i| rho[(i, i)].re).sum(),
        p_e: l.p_e(rho),
        n_cav: l.n_cav(rho),
    };
    trajectory.push(sample(&rho, 0.0));
    let mut rk = Rk45 { dt: 1e-3 * cfg.sample_dt, abs_tol: cfg.abs_tol, rel_tol: cfg.rel_tol };
    for k in 1..=n_samples {
        let (t0, t1) = ((k - 1) as f64 * cfg.sample_dt, k as f64 * cfg.sample_dt);
        match cfg.integrator {
            Integrator::AdaptiveRk => rk.integrate(l, &mut rho, t0, t1)?,
            Integrator::ExpmKrylov => {
                rho = krylov_step(l, &rho, t1 - t0, cfg.abs_tol.max(1e-12), 0)?;
            }
        }
        trajectory.push(sample(&rho, t1));
    }

    let ts: Vec<f64> = trajectory.iter().map(|s| s.t).collect();
    let ys: Vec<f64> = trajectory.iter().map(|s| s.m_mean).collect();
    let gamma_scale = 5.0 / cfg.t_final;
    let (gamma_fit, m_ss, _amp, fit_residual) = exp_fit(&ts, &ys, gamma_scale);
    let cutoff_exceeded = l.cutoff_population(&rho) > 1e-4;
    let converged = fit_residual < 0.05 && !cutoff_exceeded;
    Ok(OracleRun {
        config: cfg.clone(),
        trajectory,
        gamma_fit,
        m_ss,
        fit_residual,
        converged,
        cutoff_exceeded,
        final_rho: rho,
    })
}

/// Steady state of the Lindblad generator with diagnostics.
#[derive(Debug, Clone)]
pub struct SteadyStateResult {
    pub rho: DMatrix<C64>,
    pub mean_m: f64,
    pub marginal: Vec<f64>,
    /// Mean occupation of the geometric (thermal) fit to the marginal.
    pub thermal_fit_mean: f64,
    /// Temperature (µK) of that fit.
    pub thermal_fit_uk: f64,
    /// ‖L(ρ)‖/‖ρ‖ of the returned state.
    pub residual: f64,
    /// False when population piles up at the cutoff (heating, no physical
    /// stationary state inside the truncation).
    pub physical: bool,
}

fn thermal_fit(marginal: &[f64], omega: f64) -> (f64, f64) {
    // weighted linear regression of ln p_m over the populated levels
    let pts: Vec<(f64, f64)> = marginal
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 1e-12)
        .map(|(m, &p)| (m as f64, p.ln()))
        .collect();
    if pts.len() < 2 {
        return (0.0, 0.0);
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let r = slope.exp();
    if !(0.0..1.0).contains(&r) {
        return (f64::INFINITY, f64::INFINITY);
    }
    (r / (1.0 - r), phonon_energy_uk(omega) / -slope)
}

/// Solves L(ρ) = 0 for the trace-one stationary state.
///
/// Small systems go through a dense null-space solve (LU rank check +
/// inverse iteration); larger ones fall back to long-time integration. A
/// kernel of dimension > 1 is an error naming the degeneracy dimension.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyStateResult> {
    let rho = if l.dim <= SUPEROP_DIM_CAP {
        steady_state_dense(l)?
    } else {
        steady_state_longtime(l)?
    };
    let marginal = l.phonon_marginal(&rho);
    let (thermal_fit_mean, thermal_fit_uk) = thermal_fit(&marginal, l.omega_trap);
    let residual = l.apply(&rho).norm() / rho.norm();
    let physical = l.cutoff_population(&rho) <= 1e-3;
    Ok(SteadyStateResult {
        mean_m: l.mean_m(&rho),
        marginal,
        thermal_fit_mean,
        thermal_fit_uk,
        residual,
        physical,
        rho,
    })
}

fn unvec(v: &DVector<C64>, dim: usize) -> DMatrix<C64> {
    DMatrix::from_column_slice(dim, dim, v.as_slice())
}

fn steady_state_dense(l: &Liouvillian) -> Result<DMatrix<C64>> {
    let s = l.to_superoperator()?;
    let n2 = s.nrows();
    let scale = one_norm(&s);

    // rank probe: tiny LU pivots count the kernel dimension
    let lu_probe = s.clone().lu();
    let u = lu_probe.u();
    let umax = (0..n2).map(|i| u[(i, i)].norm()).fold(0.0, f64::max);
    let kernel_dim = (0..n2).filter(|&i| u[(i, i)].norm() <= 1e-10 * umax).count();
    if kernel_dim > 1 {
        return Err(Error::DegenerateKernel { dim: kernel_dim });
    }

    // inverse iteration on the slightly shifted generator
    let shift = C64::new(1e-12 * scale.max(1.0), 0.0);
    let shifted = &s + DMatrix::<C64>::identity(n2, n2) * shift;
    let lu = shifted.lu();
    // deterministic start with weight on the identity direction
    let mut v = DVector::<C64>::zeros(n2);
    let dim = l.dim;
    for i in 0..dim {
        v[i * dim + i] = C64::new(1.0, 0.0);
    }
    v /= C64::new(v.norm(), 0.0);
    for _ in 0..8 {
        v = lu
            .solve(&v)
            .ok_or_else(|| Error::Divergent("inverse iteration solve failed".into()))?;
        let n = v.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::Divergent("inverse iteration diverged".into()));
        }
        v /= C64::new(n, 0.0);
    }
    let residual = (&s * &v).norm();
    if residual > 1e-6 * scale {
        return Err(Error::Divergent(format!(
            "no kernel vector found (residual {residual:.3e} vs scale {scale:.3e})"
        )));
    }

    // a second, orthogonal kernel vector would mean a degenerate manifold
    // that the pivot count missed
    let mut w = DVector::<C64>::zeros(n2);
    let mut state = 0x2545f4914f6cdd1du64;
    for x in w.iter_mut() {
        // xorshift; deterministic start vector
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        *x = C64::new((state as f64 / u64::MAX as f64) - 0.5, 0.0);
    }
    for _ in 0..8 {
        w = lu
            .solve(&w)
            .ok_or_else(|| Error::Divergent("inverse iteration solve failed".into()))?;
        let overlap = v.dotc(&w);
        w -= &v * overlap;
        let n = w.norm();
        if n < 1e-300 {
            break;
        }
        w /= C64::new(n, 0.0);
    }
    if w.norm() > 0.5 && (&s * &w).norm() <= 1e-8 * scale {
        return Err(Error::DegenerateKernel { dim: 2 });
    }

    let mut rho = unvec(&v, l.dim);
    rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let tr: C64 = (0..l.dim).map(|i| rho[(i, i)]).sum();
    if tr.norm() < 1e-10 {
        return Err(Error::DegenerateKernel { dim: 2 });
    }
    Ok(rho / tr)
}

fn steady_state_longtime(l: &Liouvillian) -> Result<DMatrix<C64>> {
    let mut rho = fock_initial_state(l.n_max, 0)?;
    let mut rk = Rk45 { dt: 1e-3, abs_tol: 1e-10, rel_tol: 1e-8 };
    let mut t = 0.0;
    let chunk = 50.0;
    let t_cap = 5e4;
    while t < t_cap {
        rk.integrate(l, &mut rho, t, t + chunk)?;
        t += chunk;
        let drift = l.apply(&rho).norm();
        if drift < 1e-9 * rho.norm().max(1e-300) {
            return Ok(rho);
        }
    }
    Err(Error::Integration(format!(
        "long-time steady-state fallback did not settle within {t_cap} µs"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates;
    use crate::units::mhz_to_angular;
    use crate::MhzParams;
    use approx::assert_relative_eq;

    fn small_cfg(n_max: usize) -> OracleConfig {
        OracleConfig {
            n_max,
            t_final: 60.0,
            sample_dt: 2.0,
            ..OracleConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        let mut c = OracleConfig::default();
        c.n_max = 2;
        assert!(c.validate().is_err());
        let mut c = OracleConfig::default();
        c.t_final = 5.0 * c.sample_dt;
        assert!(c.validate().is_err());
        let mut c = OracleConfig::default();
        c.n_max = 200;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn generator_is_trace_preserving() {
        // tr L(E_kl) = 0 for every matrix unit: column sums of the
        // superoperator vanish
        let p = SystemParams::default();
        let cfg = small_cfg(3);
        let l = build_liouvillian(&p, &cfg).unwrap();
        let scale = one_norm(&l.hamiltonian);
        for k in 0..l.dim {
            for j in 0..l.dim {
                let mut e = DMatrix::<C64>::zeros(l.dim, l.dim);
                e[(k, j)] = C64::new(1.0, 0.0);
                let d = l.apply(&e);
                let tr: C64 = (0..l.dim).map(|i| d[(i, i)]).sum();
                assert!(
                    tr.norm() <= 1e-12 * scale,
                    "trace leak {:.2e} at unit ({k},{j})",
                    tr.norm()
                );
            }
        }
    }

    #[test]
    fn no_drive_keeps_motion_frozen() {
        let mut m = MhzParams::default();
        m.omega_p_mhz = 0.0;
        let p = m.build().unwrap();
        let cfg = small_cfg(4);
        let l = build_liouvillian(&p, &cfg).unwrap();
        // diagonal phonon mixture in |g2,0⟩
        let np = cfg.n_max + 1;
        let mut rho = DMatrix::<C64>::zeros(l.dim, l.dim);
        rho[(basis::G2_0 * np + 1, basis::G2_0 * np + 1)] = C64::new(0.5, 0.0);
        rho[(basis::G2_0 * np + 2, basis::G2_0 * np + 2)] = C64::new(0.5, 0.0);
        let run = evolve(&l, &rho, &cfg).unwrap();
        for s in &run.trajectory {
            assert_relative_eq!(s.m_mean, 1.5, epsilon = 1e-9);
            assert_relative_eq!(s.trace, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn vanishing_eta_decouples_motion() {
        // η → 0: the internal steady state matches the carrier amplitudes.
        // β₁ = 0 keeps decay from recycling population through |g1⟩, which
        // would add an O(Ω_P²) incoherent contribution on top of the
        // first-order amplitudes; without it the residual is O(Ω_P⁴).
        let mut m = MhzParams::default();
        m.omega_rec_mhz = 1e-30;
        m.omega_p_mhz = 0.05; // deep weak-drive regime
        m.delta_pa_mhz = 16.4; // off the dark state so populations are finite
        m.beta1 = 0.0;
        let p = m.build().unwrap();
        let cfg = OracleConfig { t_final: 400.0, ..small_cfg(3) };
        let l = build_liouvillian(&p, &cfg).unwrap();
        let run = evolve(&l, &fock_initial_state(cfg.n_max, 0).unwrap(), &cfg).unwrap();
        let last = run.trajectory.last().unwrap();
        let c = rates::carrier_amplitudes(&p).unwrap();
        assert_relative_eq!(last.p_e, c.p_e(), max_relative = 0.02, epsilon = 1e-9);
        assert_relative_eq!(last.n_cav, c.n_cav(), max_relative = 0.02, epsilon = 1e-9);
        assert!(last.m_mean.abs() < 1e-8);
    }

    #[test]
    fn expm_oracle_matches_adaptive_integration() {
        // brute-force propagator on the dense superoperator vs RK45
        let mut m = MhzParams::default();
        m.delta_pa_mhz = 16.3;
        let p = m.build().unwrap();
        let cfg = small_cfg(3);
        let l = build_liouvillian(&p, &cfg).unwrap();
        let s = l.to_superoperator().unwrap();
        let rho0 = fock_initial_state(cfg.n_max, 1).unwrap();
        let v0 = DVector::<C64>::from_column_slice(rho0.as_slice());
        let run = evolve(&l, &rho0, &cfg).unwrap();
        for &k in &[5usize, 15, 29] {
            let t = run.trajectory[k].t;
            let prop = expm_dense(&(&s * C64::new(t, 0.0)));
            let vt = &prop * &v0;
            let rho_t = unvec(&vt, l.dim);
            let m_exact = l.mean_m(&rho_t);
            assert_relative_eq!(run.trajectory[k].m_mean, m_exact, epsilon = 1e-8);
        }
    }

    #[test]
    fn krylov_integrator_matches_adaptive() {
        let mut m = MhzParams::default();
        m.delta_pa_mhz = 16.2;
        let p = m.build().unwrap();
        let cfg_rk = small_cfg(4);
        let cfg_kr = OracleConfig { integrator: Integrator::ExpmKrylov, ..cfg_rk.clone() };
        let l = build_liouvillian(&p, &cfg_rk).unwrap();
        let rho0 = fock_initial_state(cfg_rk.n_max, 1).unwrap();
        let a = evolve(&l, &rho0, &cfg_rk).unwrap();
        let b = evolve(&l, &rho0, &cfg_kr).unwrap();
        for (x, y) in a.trajectory.iter().zip(&b.trajectory) {
            assert_relative_eq!(x.m_mean, y.m_mean, epsilon = 1e-6);
        }
    }

    #[test]
    fn heating_point_grows_with_negative_rate() {
        // blue sideband of the cavity-like dressed state
        let p0 = SystemParams::default();
        let plus = &crate::dressed::dressed_states(&p0).unwrap()[0];
        let p = p0.with_delta_pa(p0.delta_ca + plus.omega + p0.omega_z);
        let cfg = OracleConfig { n_max: 8, t_final: 150.0, sample_dt: 1.5, ..OracleConfig::default() };
        let l = build_liouvillian(&p, &cfg).unwrap();
        let run = evolve(&l, &fock_initial_state(cfg.n_max, 0).unwrap(), &cfg).unwrap();
        let first = run.trajectory.first().unwrap().m_mean;
        let last = run.trajectory.last().unwrap().m_mean;
        assert!(last > first + 0.05, "no heating: {first} -> {last}");
        assert!(run.gamma_fit < 0.0, "expected negative rate, got {}", run.gamma_fit);
        // monotone growth within sampling noise
        for w in run.trajectory.windows(2) {
            assert!(w[1].m_mean >= w[0].m_mean - 1e-6);
        }
    }

    #[test]
    fn trajectory_stays_physical() {
        let p = SystemParams::default().with_delta_pa(mhz_to_angular(15.8));
        let cfg = OracleConfig { n_max: 6, t_final: 80.0, sample_dt: 2.0, ..OracleConfig::default() };
        let l = build_liouvillian(&p, &cfg).unwrap();
        let run = evolve(&l, &fock_initial_state(cfg.n_max, 2).unwrap(), &cfg).unwrap();
        for s in &run.trajectory {
            assert!((s.trace - 1.0).abs() < 1e-8, "trace drift {}", s.trace);
            assert!(s.m_mean >= -1e-9 && s.m_mean <= cfg.n_max as f64);
        }
        let rho = &run.final_rho;
        assert!((rho - rho.adjoint()).norm() < 1e-8);
        let eig = nalgebra::SymmetricEigen::new(rho.clone());
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-8, "negative population {min}");
    }

    #[test]
    fn steady_state_requires_unique_kernel() {
        // no drive: every diagonal phonon state in |g2,0⟩ is stationary
        let mut m = MhzParams::default();
        m.omega_p_mhz = 0.0;
        let p = m.build().unwrap();
        let cfg = small_cfg(3);
        let l = build_liouvillian(&p, &cfg).unwrap();
        match steady_state(&l) {
            Err(Error::DegenerateKernel { dim }) => assert!(dim >= 2, "kernel dim {dim}"),
            other => panic!("expected degenerate kernel, got {other:?}"),
        }
    }

    #[test]
    fn steady_state_cooling_point_is_near_thermal() {
        // red-sideband cooling point: geometric phonon marginal. A weak
        // probe and a stiff trap keep the O(Ω_P²) saturation and O(η²m)
        // phonon-coherence corrections below the 10% constancy budget.
        let mut m0 = MhzParams::default();
        m0.omega_p_mhz = 0.08;
        m0.omega_z_mhz = 0.4;
        let p0 = m0.build().unwrap();
        let plus = &crate::dressed::dressed_states(&p0).unwrap()[0];
        let p = p0.with_delta_pa(p0.delta_ca + plus.omega - p0.omega_z);
        // moderate m_st here, so the cutoff needs headroom
        let cfg = small_cfg(9);
        let l = build_liouvillian(&p, &cfg).unwrap();
        let ss = steady_state(&l).unwrap();
        assert!(ss.physical);
        assert!(ss.residual < 1e-8);
        let ratios: Vec<f64> = (0..4).map(|m| ss.marginal[m + 1] / ss.marginal[m]).collect();
        for r in &ratios {
            assert_relative_eq!(*r, ratios[0], max_relative = 0.1);
        }
        // fitted thermal mean tracks the direct mean
        assert_relative_eq!(ss.thermal_fit_mean, ss.mean_m, max_relative = 0.15);
    }

    #[test]
    fn steady_state_heating_point_flagged_unphysical() {
        let p0 = SystemParams::default();
        let plus = &crate::dressed::dressed_states(&p0).unwrap()[0];
        let p = p0.with_delta_pa(p0.delta_ca + plus.omega + p0.omega_z);
        let cfg = small_cfg(5);
        let l = build_liouvillian(&p, &cfg).unwrap();
        let ss = steady_state(&l).unwrap();
        assert!(!ss.physical, "cutoff population {:.2e}", ss.marginal[cfg.n_max]);
    }

    #[test]
    fn expm_identities() {
        // exp(0) = I and exp(A)·exp(−A) = I on a dense complex matrix
        let n = 12;
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state as f64 / u64::MAX as f64) - 0.5
        };
        let a = DMatrix::<C64>::from_fn(n, n, |_, _| C64::new(next(), next()) * 2.0);
        let zero = DMatrix::<C64>::zeros(n, n);
        assert!((expm_dense(&zero) - DMatrix::<C64>::identity(n, n)).norm() < 1e-13);
        let prod = expm_dense(&a) * expm_dense(&(-&a));
        assert!((prod - DMatrix::<C64>::identity(n, n)).norm() < 1e-9);
    }

    #[test]
    fn exp_fit_recovers_known_rate() {
        let ts: Vec<f64> = (0..200).map(|k| 0.5 * k as f64).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 0.3 + 1.7 * (-0.013 * t).exp()).collect();
        let (gamma, m_ss, _, res) = exp_fit(&ts, &ys, 0.05);
        assert_relative_eq!(gamma, 0.013, max_relative = 1e-4);
        assert_relative_eq!(m_ss, 0.3, max_relative = 1e-3);
        assert!(res < 1e-6);
        // heating branch
        let ys: Vec<f64> = ts.iter().map(|t| -0.2 + 0.2 * (0.011 * t).exp()).collect();
        let (gamma, _, _, _) = exp_fit(&ts, &ys, 0.05);
        assert_relative_eq!(gamma, -0.011, max_relative = 1e-4);
    }
}
