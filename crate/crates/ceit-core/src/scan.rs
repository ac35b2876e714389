//! 2-D parameter scans of cooling and heating rates.
//!
//! A [`ScanGrid`] sweeps two detunings over a rectangular grid; every point
//! is evaluated independently (rates along Z and optionally Y, dressed-state
//! frequencies, cooling/heating classification) and gathered in row-major
//! order, so the output is deterministic for any worker count. Row blocks
//! are distributed over a rayon pool when the `parallel` feature (default)
//! is enabled; [`run_scan_sequential`] is always available and is the
//! reference path the benchmarks compare against.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dressed;
use crate::params::{Axis, SystemParams};
use crate::rates::{self, RateResult};
use crate::units::{angular_to_mhz, mhz_to_angular, per_us_to_per_ms};
use crate::{Error, Result};

/// Which detuning a scan axis sweeps. Values are linear MHz at the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanAxisParam {
    /// Probe–cavity detuning δ_PC (sets Δ_PA = Δ_CA + x).
    DeltaPc,
    /// Control–atom detuning Δ_LA.
    DeltaLa,
    /// Probe–atom detuning Δ_PA.
    DeltaPa,
}

impl ScanAxisParam {
    /// The underlying parameter this axis controls; used to reject grids
    /// whose two axes fight over the same one.
    fn controls(self) -> &'static str {
        match self {
            ScanAxisParam::DeltaPc | ScanAxisParam::DeltaPa => "delta_pa",
            ScanAxisParam::DeltaLa => "delta_la",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "delta_pc" => Ok(ScanAxisParam::DeltaPc),
            "delta_la" => Ok(ScanAxisParam::DeltaLa),
            "delta_pa" => Ok(ScanAxisParam::DeltaPa),
            _ => Err(Error::Config(format!(
                "unknown scan axis `{s}` (expected delta_pc, delta_la or delta_pa)"
            ))),
        }
    }
}

/// One scan axis: parameter, inclusive range in MHz, point count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub param: ScanAxisParam,
    pub lo_mhz: f64,
    pub hi_mhz: f64,
    pub n: usize,
}

impl AxisSpec {
    pub fn values_mhz(&self) -> Vec<f64> {
        let n = self.n.max(2);
        (0..n)
            .map(|k| self.lo_mhz + (self.hi_mhz - self.lo_mhz) * k as f64 / (n as f64 - 1.0))
            .collect()
    }
}

/// Which motional axes a scan evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxesRequested {
    pub z: bool,
    pub y: bool,
}

/// Grid definition plus the baseline parameter set the sweep perturbs.
#[derive(Debug, Clone)]
pub struct ScanGrid {
    pub x: AxisSpec,
    pub y: AxisSpec,
    pub baseline: SystemParams,
    pub axes: AxesRequested,
}

impl ScanGrid {
    pub fn validate(&self) -> Result<()> {
        self.baseline.validate()?;
        for (axis, name) in [(&self.x, "x"), (&self.y, "y")] {
            if axis.n < 2 {
                return Err(Error::Config(format!("{name} axis needs at least 2 points")));
            }
            if !axis.lo_mhz.is_finite() || !axis.hi_mhz.is_finite() {
                return Err(Error::Config(format!("{name} axis range must be finite")));
            }
        }
        if self.x.param.controls() == self.y.param.controls() {
            return Err(Error::Config(format!(
                "x and y axes must sweep distinct parameters; both control {}",
                self.x.param.controls()
            )));
        }
        if !self.axes.z && !self.axes.y {
            return Err(Error::Config("at least one motional axis must be computed".into()));
        }
        Ok(())
    }

    fn apply(&self, params: &mut SystemParams, spec: &AxisSpec, value_mhz: f64) {
        let w = mhz_to_angular(value_mhz);
        match spec.param {
            ScanAxisParam::DeltaPc => params.delta_pa = params.delta_ca + w,
            ScanAxisParam::DeltaLa => params.delta_la = w,
            ScanAxisParam::DeltaPa => params.delta_pa = w,
        }
    }

    /// Parameter set at grid point (x, y).
    pub fn params_at(&self, x_mhz: f64, y_mhz: f64) -> SystemParams {
        let mut p = self.baseline.clone();
        // apply y first so a delta_pc x-axis sees the final Δ_CA reference
        self.apply(&mut p, &self.y, y_mhz);
        self.apply(&mut p, &self.x, x_mhz);
        p
    }
}

/// Cooling/heating label of one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointClass {
    Cooling,
    Heating,
    Divergent,
}

impl std::fmt::Display for PointClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PointClass::Cooling => write!(f, "cooling"),
            PointClass::Heating => write!(f, "heating"),
            PointClass::Divergent => write!(f, "divergent"),
        }
    }
}

/// Classification policy for [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifyPolicy {
    /// Cooling iff Γ_Z > 0.
    ZOnly,
    /// Survival veto: cooling iff Γ_Z > 0 and Γ_Y ≥ 0 (not heated along
    /// the control axis).
    ZAndYVeto,
}

/// One evaluated grid point.
#[derive(Debug, Clone)]
pub struct ScanPoint {
    pub x_mhz: f64,
    pub y_mhz: f64,
    /// Rates along the cavity axis, when requested and convergent.
    pub rate_z: Option<RateResult>,
    /// Rates along the control axis, when requested and convergent.
    pub rate_y: Option<RateResult>,
    /// Closed-form rates, evaluated on the Raman line when the point lies
    /// within half a grid step of it (projected onto the exact line).
    pub rate_ceit: Option<RateResult>,
    /// Dressed-state frequencies ω_j (δ_PC convention, rad/µs), descending.
    pub dressed_omegas: [f64; 3],
    /// Z-only classification; [`classify`] derives other policies.
    pub class: PointClass,
}

/// Scan output: row-major points (y outer, x inner) plus provenance.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub x: AxisSpec,
    pub y: AxisSpec,
    pub axes: AxesRequested,
    pub points: Vec<ScanPoint>,
    pub provenance: serde_json::Value,
}

impl ScanResult {
    pub fn point(&self, ix: usize, iy: usize) -> &ScanPoint {
        &self.points[iy * self.x.n + ix]
    }

    /// Grid point whose (x, y) MHz coordinates are closest to the target.
    pub fn nearest(&self, x_mhz: f64, y_mhz: f64) -> &ScanPoint {
        self.points
            .iter()
            .min_by(|a, b| {
                let da = (a.x_mhz - x_mhz).powi(2) + (a.y_mhz - y_mhz).powi(2);
                let db = (b.x_mhz - x_mhz).powi(2) + (b.y_mhz - y_mhz).powi(2);
                da.total_cmp(&db)
            })
            .expect("scan has points")
    }
}

fn evaluate_point(grid: &ScanGrid, x_mhz: f64, y_mhz: f64, eit_tol: f64) -> Result<ScanPoint> {
    let p = grid.params_at(x_mhz, y_mhz);
    let rate_z = if grid.axes.z {
        match rates::rates_resolvent(&p, Axis::Z, p.omega_z) {
            Ok(r) => Some(r),
            Err(Error::Divergent(_)) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let rate_y = if grid.axes.y {
        match rates::rates_resolvent(&p, Axis::Y, p.omega_y) {
            Ok(r) => Some(r),
            Err(Error::Divergent(_)) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let rate_ceit = if p.delta_pl().abs() <= eit_tol {
        // project onto the exact Raman line before evaluating the formula
        let on_line = p.with_delta_pa(p.delta_la);
        rates::rates_ceit_analytic(&on_line, on_line.omega_z).ok()
    } else {
        None
    };
    let states = dressed::dressed_states(&p)?;
    let dressed_omegas = [states[0].omega, states[1].omega, states[2].omega];
    let class = match (&rate_z, grid.axes.z) {
        (Some(r), _) => {
            if r.gamma > 0.0 {
                PointClass::Cooling
            } else {
                PointClass::Heating
            }
        }
        (None, true) => PointClass::Divergent,
        // Y-only scan: classify on Γ_Y
        (None, false) => match &rate_y {
            Some(r) if r.gamma > 0.0 => PointClass::Cooling,
            Some(_) => PointClass::Heating,
            None => PointClass::Divergent,
        },
    };
    Ok(ScanPoint { x_mhz, y_mhz, rate_z, rate_y, rate_ceit, dressed_omegas, class })
}

fn eit_tolerance(grid: &ScanGrid) -> f64 {
    // half an x grid step, in angular units
    let step = (grid.x.hi_mhz - grid.x.lo_mhz).abs() / (grid.x.n.max(2) as f64 - 1.0);
    0.5 * mhz_to_angular(step)
}

fn provenance(grid: &ScanGrid, workers: usize) -> serde_json::Value {
    json!({
        "tool": "ceit scan",
        "version": env!("CARGO_PKG_VERSION"),
        "params_mhz": grid.baseline.to_mhz(),
        "x": grid.x,
        "y": grid.y,
        "axes": { "z": grid.axes.z, "y": grid.axes.y },
        "workers": workers,
    })
}

fn rows_to_result(
    grid: &ScanGrid,
    workers: usize,
    rows: Vec<Result<Vec<ScanPoint>>>,
) -> Result<ScanResult> {
    let mut failed = Vec::new();
    let mut detail = String::new();
    let mut points = Vec::with_capacity(grid.x.n * grid.y.n);
    for (iy, row) in rows.into_iter().enumerate() {
        match row {
            Ok(mut r) => points.append(&mut r),
            Err(e) => {
                if failed.is_empty() {
                    detail = e.to_string();
                }
                failed.push(iy);
            }
        }
    }
    if !failed.is_empty() {
        return Err(Error::PartialScan { rows: failed, detail });
    }
    Ok(ScanResult {
        x: grid.x,
        y: grid.y,
        axes: grid.axes,
        points,
        provenance: provenance(grid, workers),
    })
}

fn eval_row(grid: &ScanGrid, xs: &[f64], y_mhz: f64, eit_tol: f64) -> Result<Vec<ScanPoint>> {
    xs.iter()
        .map(|&x| evaluate_point(grid, x, y_mhz, eit_tol))
        .collect()
}

/// Sequential scan; the reference implementation for determinism checks and
/// the baseline the benchmark suite compares the parallel path against.
pub fn run_scan_sequential(grid: &ScanGrid) -> Result<ScanResult> {
    grid.validate()?;
    let xs = grid.x.values_mhz();
    let ys = grid.y.values_mhz();
    let eit_tol = eit_tolerance(grid);
    let rows: Vec<Result<Vec<ScanPoint>>> =
        ys.iter().map(|&y| eval_row(grid, &xs, y, eit_tol)).collect();
    rows_to_result(grid, 1, rows)
}

/// Evaluates the grid on `workers` threads (row blocks, deterministic
/// row-major merge). The result is bit-identical for any worker count; with
/// the `parallel` feature disabled this falls back to the sequential path.
#[cfg(feature = "parallel")]
pub fn run_scan(grid: &ScanGrid, workers: usize) -> Result<ScanResult> {
    use rayon::prelude::*;
    grid.validate()?;
    if workers <= 1 {
        let mut res = run_scan_sequential(grid)?;
        res.provenance["workers"] = json!(1);
        return Ok(res);
    }
    let xs = grid.x.values_mhz();
    let ys = grid.y.values_mhz();
    let eit_tol = eit_tolerance(grid);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("failed to build worker pool: {e}")))?;
    let rows: Vec<Result<Vec<ScanPoint>>> = pool.install(|| {
        ys.par_iter()
            .map(|&y| eval_row(grid, &xs, y, eit_tol))
            .collect()
    });
    rows_to_result(grid, workers, rows)
}

/// Sequential stand-in with the same signature, used when the crate is built
/// without rayon.
#[cfg(not(feature = "parallel"))]
pub fn run_scan(grid: &ScanGrid, workers: usize) -> Result<ScanResult> {
    let _ = workers;
    run_scan_sequential(grid)
}

/// Applies a classification policy to an evaluated scan.
pub fn classify(result: &ScanResult, policy: ClassifyPolicy) -> Result<Vec<PointClass>> {
    if matches!(policy, ClassifyPolicy::ZAndYVeto) && !result.axes.y {
        return Err(Error::Precondition(
            "z_and_y_veto requires Y-axis rates; rerun the scan with axes z,y".into(),
        ));
    }
    Ok(result
        .points
        .iter()
        .map(|pt| match policy {
            ClassifyPolicy::ZOnly => pt.class,
            ClassifyPolicy::ZAndYVeto => match (&pt.rate_z, &pt.rate_y) {
                (Some(z), Some(y)) => {
                    if z.gamma > 0.0 && y.gamma >= 0.0 {
                        PointClass::Cooling
                    } else {
                        PointClass::Heating
                    }
                }
                _ => PointClass::Divergent,
            },
        })
        .collect())
}

/// Named figure-style presets.
///
/// Ranges are read off the reproduced map axes; both presets inherit the
/// reference baseline (Δ_CA = 2π·16 MHz, k·x₀ = π/4), which the provenance
/// block echoes.
pub fn preset(name: &str, baseline: SystemParams, n: usize) -> Result<ScanGrid> {
    let n = n.max(2);
    match name {
        // wide map: δ_PC × δ_LC, Z rates only
        "fig2a" => Ok(ScanGrid {
            x: AxisSpec { param: ScanAxisParam::DeltaPc, lo_mhz: -30.0, hi_mhz: 15.0, n },
            y: AxisSpec {
                param: ScanAxisParam::DeltaLa,
                lo_mhz: angular_to_mhz(baseline.delta_ca) - 25.0,
                hi_mhz: angular_to_mhz(baseline.delta_ca) + 20.0,
                n,
            },
            baseline,
            axes: AxesRequested { z: true, y: false },
        }),
        // narrow map around the Raman line: both axes, survival veto ready
        "fig3a" => Ok(ScanGrid {
            x: AxisSpec { param: ScanAxisParam::DeltaPc, lo_mhz: -1.0, hi_mhz: 1.0, n },
            y: AxisSpec {
                param: ScanAxisParam::DeltaLa,
                lo_mhz: angular_to_mhz(baseline.delta_ca) - 1.0,
                hi_mhz: angular_to_mhz(baseline.delta_ca) + 1.0,
                n,
            },
            baseline,
            axes: AxesRequested { z: true, y: true },
        }),
        _ => Err(Error::Config(format!(
            "unknown preset `{name}` (expected fig2a or fig3a)"
        ))),
    }
}

/// Writes the scan as CSV with the given per-point labels.
///
/// Columns: `x_mhz, y_mhz, gamma_z_per_ms, m_st_z, gamma_y_per_ms, class`.
/// Missing values (axis not computed, divergent point, no stationary state)
/// are left empty. Output is byte-deterministic.
pub fn write_scan_csv(
    result: &ScanResult,
    labels: &[PointClass],
    w: &mut impl std::io::Write,
) -> std::io::Result<()> {
    writeln!(w, "x_mhz,y_mhz,gamma_z_per_ms,m_st_z,gamma_y_per_ms,class")?;
    for (pt, label) in result.points.iter().zip(labels) {
        let gamma_z = pt
            .rate_z
            .as_ref()
            .map(|r| format!("{:.9e}", per_us_to_per_ms(r.gamma)))
            .unwrap_or_default();
        let m_st = pt
            .rate_z
            .as_ref()
            .and_then(|r| r.m_st)
            .map(|m| format!("{m:.9e}"))
            .unwrap_or_default();
        let gamma_y = pt
            .rate_y
            .as_ref()
            .map(|r| format!("{:.9e}", per_us_to_per_ms(r.gamma)))
            .unwrap_or_default();
        writeln!(
            w,
            "{:.6},{:.6},{},{},{},{}",
            pt.x_mhz, pt.y_mhz, gamma_z, m_st, gamma_y, label
        )?;
    }
    Ok(())
}
