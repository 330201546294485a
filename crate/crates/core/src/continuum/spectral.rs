//! Band-limited derivative and translation operators on periodic grids.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Angular wavenumbers of an `n`-point FFT with grid spacing `spacing`, in
/// FFT output order. The Nyquist mode of an even grid is set to zero so that
/// the derivative of a real field stays real.
pub fn wavenumbers(n: usize, spacing: f64) -> Vec<f64> {
    let scale = 2.0 * PI / (n as f64 * spacing);
    (0..n)
        .map(|m| {
            let m = m as isize;
            let n = n as isize;
            if 2 * m < n {
                m as f64 * scale
            } else if 2 * m == n {
                0.0
            } else {
                (m - n) as f64 * scale
            }
        })
        .collect()
}

/// Highest retained mode `M`; modes `−M..=M` are kept.
fn band(n: usize) -> usize {
    (n - 1) / 2
}

/// Spectral first-derivative matrix in index units, `(Dψ)_j = Σ_l D_jl ψ_l`.
pub fn spectral_derivative(n: usize) -> DMatrix<f64> {
    let m_max = band(n);
    DMatrix::from_fn(n, n, |j, l| {
        let r = j as f64 - l as f64;
        -(2.0 / n as f64)
            * (1..=m_max)
                .map(|m| {
                    let k = 2.0 * PI * m as f64 / n as f64;
                    k * (k * r).sin()
                })
                .sum::<f64>()
    })
}

/// `exp(α D)`: reads each value from `α` sites further along the axis, using
/// trigonometric interpolation. For odd `n` and integer `α` this is an exact
/// cyclic permutation.
pub fn fractional_translation(n: usize, alpha: f64) -> DMatrix<Complex64> {
    let m_max = band(n) as isize;
    DMatrix::from_fn(n, n, |j, l| {
        let r = j as f64 - l as f64 + alpha;
        let sum: Complex64 = (-m_max..=m_max)
            .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 * r / n as f64))
            .sum();
        sum / n as f64
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed form of the odd-`n` spectral differentiation matrix.
    fn csc_oracle(n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |j, l| {
            if j == l {
                0.0
            } else {
                let r = j as isize - l as isize;
                let sign = if r.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                PI / n as f64 * sign / (r as f64 * PI / n as f64).sin()
            }
        })
    }

    #[test]
    fn derivative_matches_closed_form() {
        for n in [3, 5, 7, 9, 15] {
            let d = spectral_derivative(n);
            let diff = (&d - csc_oracle(n)).abs().max();
            assert!(diff < 1e-13, "n = {n}: {diff}");
        }
    }

    #[test]
    fn derivative_is_exact_on_resolved_modes() {
        let n = 9;
        let d = spectral_derivative(n);
        for m in 1..=4 {
            let k = 2.0 * PI * m as f64 / n as f64;
            let f = nalgebra::DVector::from_fn(n, |j, _| (k * j as f64).sin());
            let df = nalgebra::DVector::from_fn(n, |j, _| k * (k * j as f64).cos());
            assert!((&d * f - df).abs().max() < 1e-13);
        }
    }

    #[test]
    fn integer_translation_is_a_permutation() {
        let n = 7;
        for alpha in [-2.0, -1.0, 0.0, 1.0, 3.0] {
            let e = fractional_translation(n, alpha);
            for j in 0..n {
                for l in 0..n {
                    let expected = if l as isize == (j as isize + alpha as isize).rem_euclid(n as isize) {
                        1.0
                    } else {
                        0.0
                    };
                    assert!((e[(j, l)] - Complex64::new(expected, 0.0)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn translation_moves_a_plane_wave() {
        let n = 11;
        let k = 2.0 * PI * 3.0 / n as f64;
        let alpha = 0.37;
        let f = nalgebra::DVector::from_fn(n, |j, _| Complex64::from_polar(1.0, k * j as f64));
        let out = fractional_translation(n, alpha) * &f;
        for j in 0..n {
            let expected = Complex64::from_polar(1.0, k * (j as f64 + alpha));
            assert!((out[j] - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn translation_is_unitary_and_generated_by_derivative() {
        let n = 5;
        let e = fractional_translation(n, 0.25);
        let defect = crate::gamma::max_entry(&(e.adjoint() * &e - DMatrix::<Complex64>::identity(n, n)));
        assert!(defect < 1e-14);

        let h = 1e-5;
        let central = (fractional_translation(n, h) - fractional_translation(n, -h)) / Complex64::new(2.0 * h, 0.0);
        let d = spectral_derivative(n).map(|x| Complex64::new(x, 0.0));
        assert!(crate::gamma::max_entry(&(central - d)) < 1e-9);
    }

    #[test]
    fn wavenumbers_zero_the_nyquist_mode() {
        let k = wavenumbers(4, 0.5);
        let s = 2.0 * PI / 2.0;
        assert_eq!(k, vec![0.0, s, 0.0, -s]);
        let k = wavenumbers(5, 1.0);
        assert_eq!(k.len(), 5);
        assert!(k[3] < 0.0 && k[4] < 0.0);
    }
}
