//! Direction-of-arrival estimation: per-bin sample covariance, Hermitian
//! eigendecomposition, and the incoherent MUSIC pseudo-spectrum summed
//! across frequency bins.
//!
//! Wideband operation never coheres bins into one covariance; instead each
//! bin contributes `N / (aᴴ(f_b, θ) E_n E_nᴴ a(f_b, θ))` to a common angle
//! grid and the estimate is the grid argmax (optionally refined by a
//! three-point parabolic fit).

use num_complex::Complex64;

use crate::array::{SnapshotMatrix, UlaConfig};
use crate::channel::C0;
use crate::error::{Error, Result};
use crate::linalg::{cdot, CMat};

/// Sample covariance `R̂ = (1/K) Σ_k y_k y_kᴴ` of one bin's snapshots.
///
/// Exactly Hermitian by construction (upper triangle computed, mirrored).
pub fn sample_covariance(snap: &SnapshotMatrix) -> CMat {
    assert!(snap.n_snapshots > 0, "covariance needs at least one snapshot");
    let mut r = CMat::zeros(snap.n_elements, snap.n_elements);
    let w = 1.0 / snap.n_snapshots as f64;
    for k in 0..snap.n_snapshots {
        r.accumulate_outer(snap.snapshot(k), w);
    }
    r
}

/// Eigendecomposition of a Hermitian matrix.
///
/// `values` are real eigenvalues in descending order; column `j` of
/// `vectors` is the unit eigenvector for `values[j]`.
#[derive(Debug, Clone)]
pub struct EigPair {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

/// Relative Hermitian-defect tolerance accepted by [`hermitian_eig`].
const HERMITIAN_TOL: f64 = 1e-8;
/// Off-diagonal convergence target, relative to the input Frobenius norm.
const JACOBI_TOL: f64 = 1e-12;
/// Hard sweep cap; N=8 matrices converge in ~6 sweeps.
const JACOBI_MAX_SWEEPS: usize = 100;

/// Root-sum-square of the strict off-diagonal part (both triangles).
fn off_diagonal_norm(a: &CMat) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for c in 0..n {
        for r in 0..c {
            acc += a.at(r, c).norm_sqr();
        }
    }
    (2.0 * acc).sqrt()
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
///
/// The input must be square and Hermitian to within `1e-8` of its Frobenius
/// norm (entrywise); it is symmetrized exactly before iteration. The result
/// is deterministic: eigenvalues sorted descending, ties broken by an
/// entrywise lexicographic order on the vectors, and each vector's phase
/// fixed so its largest-magnitude entry (lowest index on ties) is real
/// positive.
pub fn hermitian_eig(a: &CMat) -> Result<EigPair> {
    if a.rows() != a.cols() {
        return Err(Error::Contract(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let fro = a.fro_norm();
    if a.hermitian_defect() > HERMITIAN_TOL * fro.max(f64::MIN_POSITIVE) {
        return Err(Error::Contract(format!(
            "matrix is not Hermitian: defect {:.3e} exceeds {:.0e} of norm {:.3e}",
            a.hermitian_defect(),
            HERMITIAN_TOL,
            fro
        )));
    }

    // Exact symmetrization: real diagonal, lower triangle = conj(upper).
    let mut w = CMat::from_fn(n, n, |r, c| {
        if r == c {
            Complex64::new(a.at(r, c).re, 0.0)
        } else if r < c {
            0.5 * (a.at(r, c) + a.at(c, r).conj())
        } else {
            (0.5 * (a.at(c, r) + a.at(r, c).conj())).conj()
        }
    });
    let mut v = CMat::identity(n);

    let tol = JACOBI_TOL * fro;
    if fro > 0.0 {
        for _sweep in 0..JACOBI_MAX_SWEEPS {
            if off_diagonal_norm(&w) <= tol {
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let g = w.at(p, q);
                    let r_mag = g.norm();
                    if r_mag == 0.0 {
                        continue;
                    }
                    let alpha = w.at(p, p).re;
                    let beta = w.at(q, q).re;
                    let theta = (beta - alpha) / (2.0 * r_mag);
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = (g / r_mag) * t * c;

                    for k in 0..n {
                        if k == p || k == q {
                            continue;
                        }
                        let akp = w.at(k, p);
                        let akq = w.at(k, q);
                        let new_kp = c * akp - s.conj() * akq;
                        let new_kq = s * akp + c * akq;
                        *w.at_mut(k, p) = new_kp;
                        *w.at_mut(k, q) = new_kq;
                        *w.at_mut(p, k) = new_kp.conj();
                        *w.at_mut(q, k) = new_kq.conj();
                    }
                    let c2 = c * c;
                    let t2c2 = t * t * c2;
                    let shift = 2.0 * r_mag * t * c2;
                    *w.at_mut(p, p) = Complex64::new(alpha * c2 + beta * t2c2 - shift, 0.0);
                    *w.at_mut(q, q) = Complex64::new(alpha * t2c2 + beta * c2 + shift, 0.0);
                    *w.at_mut(p, q) = Complex64::new(0.0, 0.0);
                    *w.at_mut(q, p) = Complex64::new(0.0, 0.0);

                    for k in 0..n {
                        let vkp = v.at(k, p);
                        let vkq = v.at(k, q);
                        *v.at_mut(k, p) = c * vkp - s.conj() * vkq;
                        *v.at_mut(k, q) = s * vkp + c * vkq;
                    }
                }
            }
        }
    }

    // Phase-normalize every column: rotate so the largest-magnitude entry
    // (lowest index on ties) is real positive.
    for j in 0..n {
        let mut best = 0usize;
        let mut best_mag = 0.0f64;
        for i in 0..n {
            let m = v.at(i, j).norm();
            if m > best_mag {
                best_mag = m;
                best = i;
            }
        }
        if best_mag > 0.0 {
            let phase = v.at(best, j) / Complex64::new(best_mag, 0.0);
            let rot = phase.conj();
            for i in 0..n {
                *v.at_mut(i, j) = v.at(i, j) * rot;
            }
        }
    }

    // Deterministic order: descending eigenvalue, ties by ascending
    // entrywise (re, im) lexicographic comparison of the vectors.
    let raw: Vec<f64> = (0..n).map(|j| w.at(j, j).re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        raw[j].total_cmp(&raw[i]).then_with(|| {
            for k in 0..n {
                let a_k = v.at(k, i);
                let b_k = v.at(k, j);
                let c = a_k.re.total_cmp(&b_k.re).then(a_k.im.total_cmp(&b_k.im));
                if c != std::cmp::Ordering::Equal {
                    return c;
                }
            }
            std::cmp::Ordering::Equal
        })
    });

    let values: Vec<f64> = order.iter().map(|&j| raw[j]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| v.at(r, order[c]));
    Ok(EigPair { values, vectors })
}

/// Noise subspace: the eigenvectors past the first `num_sources`, as the
/// columns of an N×(N−num_sources) matrix.
pub fn noise_subspace(eig: &EigPair, num_sources: usize) -> Result<CMat> {
    let n = eig.vectors.rows();
    if num_sources >= n {
        return Err(Error::InvalidConfig(format!(
            "source count {num_sources} leaves no noise subspace in an N={n} array"
        )));
    }
    Ok(CMat::from_fn(n, n - num_sources, |r, c| eig.vectors.at(r, c + num_sources)))
}

/// Incoherent MUSIC pseudo-spectrum over an angle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ImusicSpectrum {
    /// Angle grid (degrees).
    pub grid: Vec<f64>,
    /// Pseudo-spectrum value at each grid angle.
    pub values: Vec<f64>,
}

/// Floor on the noise-subspace projection to keep the spectrum finite at
/// exact steering matches.
const PROJECTION_FLOOR: f64 = 1e-12;

/// Sum the per-bin MUSIC pseudo-spectra over the angle grid.
///
/// `covs` pairs each bin frequency with its sample covariance. Per bin the
/// noise projection is evaluated through the complement identity
/// `aᴴE_nE_nᴴa = N − Σ_s |u_sᴴ a|²` over the `num_sources` signal
/// eigenvectors, floored at 10⁻¹², and the bin adds `N / projection`.
pub fn imusic_spectrum(
    covs: &[(f64, CMat)],
    ula: &UlaConfig,
    grid: &[f64],
    num_sources: usize,
) -> Result<ImusicSpectrum> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("angle grid is empty".into()));
    }
    let n = ula.n_elements;
    if num_sources == 0 || num_sources >= n {
        return Err(Error::InvalidConfig(format!(
            "source count must lie in 1..{n}, got {num_sources}"
        )));
    }
    let sin_theta: Vec<f64> = grid.iter().map(|t| t.to_radians().sin()).collect();
    let mut values = vec![0.0f64; grid.len()];
    let n_f = n as f64;
    let mut a = vec![Complex64::new(0.0, 0.0); n];
    for (f_b, cov) in covs {
        if cov.rows() != n || cov.cols() != n {
            return Err(Error::Contract(format!(
                "covariance at {f_b} Hz is {}x{}, expected {n}x{n}",
                cov.rows(),
                cov.cols()
            )));
        }
        let eig = hermitian_eig(cov)?;
        let base = -2.0 * std::f64::consts::PI * f_b * ula.spacing / C0;
        for (gi, &st) in sin_theta.iter().enumerate() {
            let step = Complex64::from_polar(1.0, base * st);
            let mut cur = Complex64::new(1.0, 0.0);
            for slot in a.iter_mut() {
                *slot = cur;
                cur *= step;
            }
            let mut signal_power = 0.0;
            for s in 0..num_sources {
                signal_power += cdot(eig.vectors.col(s), &a).norm_sqr();
            }
            let projection = (n_f - signal_power).max(PROJECTION_FLOOR);
            values[gi] += n_f / projection;
        }
    }
    Ok(ImusicSpectrum { grid: grid.to_vec(), values })
}

/// Grid argmax of the pseudo-spectrum; ties resolve to the smallest angle.
pub fn estimate_doa(spectrum: &ImusicSpectrum) -> Result<f64> {
    if spectrum.grid.is_empty() || spectrum.grid.len() != spectrum.values.len() {
        return Err(Error::Degenerate("pseudo-spectrum is empty or ragged".into()));
    }
    let mut best = 0usize;
    for i in 1..spectrum.values.len() {
        if spectrum.values[i] > spectrum.values[best] {
            best = i;
        }
    }
    Ok(spectrum.grid[best])
}

/// Grid argmax refined by a three-point parabolic fit around the peak.
///
/// Falls back to the raw grid angle when the peak sits on a grid boundary
/// or the three points are not strictly concave.
pub fn estimate_doa_refined(spectrum: &ImusicSpectrum) -> Result<f64> {
    let coarse = estimate_doa(spectrum)?;
    let i = spectrum
        .grid
        .iter()
        .position(|&g| g == coarse)
        .expect("argmax angle comes from the grid");
    if i == 0 || i + 1 == spectrum.grid.len() {
        return Ok(coarse);
    }
    let (vm, v0, vp) = (spectrum.values[i - 1], spectrum.values[i], spectrum.values[i + 1]);
    let curvature = vm - 2.0 * v0 + vp;
    if !(curvature < 0.0) {
        return Ok(coarse);
    }
    let h = spectrum.grid[i + 1] - spectrum.grid[i];
    Ok(spectrum.grid[i] + 0.5 * h * (vm - vp) / curvature)
}

/// Uniform angle grid over the open interval (−90°, 90°):
/// `θ_i = −90 + i·step` for `i = 1 .. ⌈180/step⌋`, endpoints excluded.
pub fn default_angle_grid(step_deg: f64) -> Vec<f64> {
    assert!(step_deg > 0.0 && step_deg <= 90.0, "grid step must lie in (0, 90]");
    let m = (180.0 / step_deg).round() as usize;
    (1..m).map(|i| -90.0 + i as f64 * step_deg).collect()
}
