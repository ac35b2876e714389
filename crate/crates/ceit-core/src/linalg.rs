//! Small dense complex linear algebra used in the inner loops.
//!
//! The model's resolvent solves are 2×2 and 3×3 and sit inside 2-D scans, so
//! they are hand-rolled here instead of going through a LAPACK binding: a
//! pivoted elimination that tolerates consistently-singular (decoupled)
//! systems, and a cubic-formula eigensolver with Newton polishing for the
//! non-Hermitian single-excitation block.

use nalgebra::{SMatrix, SVector, Vector3};
use num_complex::Complex64 as C64;

/// Relative pivot threshold below which a column counts as decoupled.
const PIVOT_TOL: f64 = 1e-13;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
///
/// Zero pivot columns are treated as decoupled degrees of freedom: the
/// corresponding unknown is set to zero and elimination continues. Returns
/// `None` only if the system is inconsistent (a genuinely divergent
/// response). `b = 0` always yields `x = 0`.
pub fn solve_pivoted<const N: usize>(
    a: &SMatrix<C64, N, N>,
    b: &SVector<C64, N>,
) -> Option<SVector<C64, N>> {
    let mut m = *a;
    let mut rhs = *b;
    if rhs.iter().all(|z| z.norm_sqr() == 0.0) {
        return Some(SVector::zeros());
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    let b_scale = rhs.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    if scale == 0.0 {
        return None;
    }
    let tol = PIVOT_TOL * scale;

    // pivots[k] = Some(row) if column k was eliminated using that row
    let mut pivots: [Option<usize>; N] = [None; N];
    let mut row = 0usize;
    for col in 0..N {
        if row >= N {
            break;
        }
        let (imax, pmax) = (row..N)
            .map(|i| (i, m[(i, col)].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pmax <= tol {
            continue; // decoupled unknown; x[col] stays 0
        }
        if imax != row {
            m.swap_rows(imax, row);
            rhs.swap_rows(imax, row);
        }
        for i in (row + 1)..N {
            let f = m[(i, col)] / m[(row, col)];
            if f.norm_sqr() != 0.0 {
                for j in col..N {
                    let v = m[(row, j)];
                    m[(i, j)] -= f * v;
                }
                let v = rhs[row];
                rhs[i] -= f * v;
            }
        }
        pivots[col] = Some(row);
        row += 1;
    }
    // leftover zero rows must have zero right-hand side
    let cons_tol = PIVOT_TOL * b_scale.max(scale);
    for i in row..N {
        if rhs[i].norm() > cons_tol {
            return None;
        }
    }
    // back substitution; decoupled unknowns are zero
    let mut x = SVector::<C64, N>::zeros();
    for col in (0..N).rev() {
        if let Some(r) = pivots[col] {
            let mut acc = rhs[r];
            for j in (col + 1)..N {
                acc -= m[(r, j)] * x[j];
            }
            x[col] = acc / m[(r, col)];
        }
    }
    Some(x)
}

/// Eigen-decomposition of a general complex 3×3 matrix.
#[derive(Debug, Clone)]
pub struct Eig3 {
    /// Eigenvalues, unordered.
    pub values: [C64; 3],
    /// Unit eigenvectors matching `values`.
    pub vectors: [Vector3<C64>; 3],
    /// True when two eigenvalues coalesce with (numerically) parallel
    /// eigenvectors: an exceptional point of the non-Hermitian matrix.
    pub defective: bool,
}

/// Complex cross product without conjugation; the result is bilinearly
/// orthogonal to both arguments, i.e. a null vector candidate for a rank-2
/// matrix whose rows are the arguments.
fn cross_bilinear(a: &Vector3<C64>, b: &Vector3<C64>) -> Vector3<C64> {
    Vector3::new(
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )
}

fn cbrt_complex(z: C64) -> C64 {
    if z.norm_sqr() == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let (r, theta) = z.to_polar();
    C64::from_polar(r.cbrt(), theta / 3.0)
}

/// Characteristic-cubic roots of the scaled matrix, via Cardano with the
/// numerically stable branch choice, then Newton polishing.
fn char_roots(m: &SMatrix<C64, 3, 3>) -> [C64; 3] {
    let tr = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
    // sum of principal 2x2 minors
    let m2 = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
        + m[(0, 0)] * m[(2, 2)]
        - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    let det = m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
        - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)]);

    // depressed cubic t^3 + p t + q, lambda = t + tr/3
    let third = C64::new(1.0 / 3.0, 0.0);
    let a = tr * third;
    let p = m2 - tr * tr * third;
    let q = -det + m2 * a - (tr * tr * tr) * C64::new(2.0 / 27.0, 0.0);

    let disc = (q * q * 0.25 + p * p * p / 27.0).sqrt();
    let r1 = -q * 0.5 + disc;
    let r2 = -q * 0.5 - disc;
    let u3 = if r1.norm() >= r2.norm() { r1 } else { r2 };
    let u = cbrt_complex(u3);

    let omega = C64::new(-0.5, 0.75f64.sqrt());
    let mut roots = [C64::default(); 3];
    for (k, root) in roots.iter_mut().enumerate() {
        let uk = u * omega.powu(k as u32);
        let t = if uk.norm_sqr() == 0.0 { uk } else { uk - p / (uk * 3.0) };
        *root = t + a;
    }

    // polish on p(l) = l^3 - tr l^2 + m2 l - det
    for root in roots.iter_mut() {
        for _ in 0..3 {
            let l = *root;
            let f = ((l - tr) * l + m2) * l - det;
            let df = (l * 3.0 - tr * 2.0) * l + m2;
            if df.norm() < 1e-30 {
                break;
            }
            let step = f / df;
            *root -= step;
            if step.norm() <= 1e-16 * root.norm().max(1e-300) {
                break;
            }
        }
    }
    roots
}

/// Eigenvalues and eigenvectors of a complex 3×3 matrix. Exceptional points
/// are reported through [`Eig3::defective`], never as an error.
pub fn eig3(m: &SMatrix<C64, 3, 3>) -> Eig3 {
    let scale = m.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    if scale == 0.0 {
        return Eig3 {
            values: [C64::default(); 3],
            vectors: [Vector3::x(), Vector3::y(), Vector3::z()],
            defective: false,
        };
    }
    let ms = m.map(|z| z / scale);
    let roots = char_roots(&ms);

    let mut vectors = [Vector3::<C64>::zeros(); 3];
    for (k, &lam) in roots.iter().enumerate() {
        let mut b = ms;
        for i in 0..3 {
            b[(i, i)] -= lam;
        }
        let rows: [Vector3<C64>; 3] = [
            b.row(0).transpose(),
            b.row(1).transpose(),
            b.row(2).transpose(),
        ];
        let candidates = [
            cross_bilinear(&rows[0], &rows[1]),
            cross_bilinear(&rows[0], &rows[2]),
            cross_bilinear(&rows[1], &rows[2]),
        ];
        let best = candidates
            .into_iter()
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
            .unwrap();
        let v = if best.norm() > 1e-24 {
            best
        } else {
            // rank <= 1: null space is the plane bilinearly orthogonal to the
            // largest row; pick a vector in it deterministically
            let r = rows
                .into_iter()
                .max_by(|x, y| x.norm().total_cmp(&y.norm()))
                .unwrap();
            if r.norm() <= 1e-24 {
                // zero matrix after shift: any basis vector
                [Vector3::x(), Vector3::y(), Vector3::z()][k]
            } else {
                let trial = [Vector3::<C64>::x(), Vector3::y(), Vector3::z()]
                    .into_iter()
                    .map(|e| cross_bilinear(&r, &e))
                    .max_by(|x, y| x.norm().total_cmp(&y.norm()))
                    .unwrap();
                trial
            }
        };
        vectors[k] = canonical_unit(&v);
    }

    // exceptional point: coalescing eigenvalues with parallel eigenvectors
    let mut defective = false;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let close = (roots[i] - roots[j]).norm() <= 1e-8 * scale.max(1.0);
            let overlap = vectors[i].dotc(&vectors[j]).norm();
            if close && overlap >= 1.0 - 1e-6 {
                defective = true;
            }
        }
    }

    Eig3 {
        values: [roots[0] * scale, roots[1] * scale, roots[2] * scale],
        vectors,
        defective,
    }
}

/// Unit-normalizes and fixes the gauge so the largest-magnitude component is
/// real and positive; keeps branch tracking and serialized output stable.
pub fn canonical_unit(v: &Vector3<C64>) -> Vector3<C64> {
    let n = v.norm();
    if n == 0.0 {
        return *v;
    }
    let k = (0..3)
        .max_by(|&i, &j| v[i].norm().total_cmp(&v[j].norm()))
        .unwrap();
    let phase = v[k] / v[k].norm();
    v.map(|z| z / (phase * n))
}
