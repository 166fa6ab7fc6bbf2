#ifndef BEAMLAB_FFT_HPP
#define BEAMLAB_FFT_HPP

#include <complex>
#include <vector>

namespace beamlab {

using cplx = std::complex<double>;

/** Signed integer frequency for bin i of an n-point DFT. */
inline int fourier_index(int i, int n) { return (i <= n / 2) ? i : i - n; }

/* Thin wrappers around FFTW. All transforms are unnormalized in the
 * forward direction; inverse transforms divide by the length. Plan
 * creation is serialized internally, so the functions are safe to call
 * from worker threads. */

// In-place complex transforms of a contiguous 1D array.
void fft_forward(cplx* data, int n);
void fft_inverse(cplx* data, int n);

// Row-major 2D array of shape (n_rows, n_cols): batched transforms
// along the contiguous axis (rows) or the strided axis (columns).
void fft_rows_forward(cplx* data, int n_rows, int n_cols);
void fft_rows_inverse(cplx* data, int n_rows, int n_cols);
void fft_cols_forward(cplx* data, int n_rows, int n_cols);
void fft_cols_inverse(cplx* data, int n_rows, int n_cols);

/** Trigonometric interpolation: treat `w` as samples on a uniform
 * periodic grid x_j = origin + j*spacing (period n*spacing) and
 * evaluate the band-limited interpolant at arbitrary points. */
std::vector<cplx> trig_interpolate(const std::vector<cplx>& w, double origin,
                                   double spacing,
                                   const std::vector<double>& points);

/** Fraction of spectral l2 mass in the top octave |m| > n/4 of a 1D
 * sample vector. Used as an aliasing guard before interpolation or
 * spectral differentiation. */
double tail_fraction(const std::vector<cplx>& w);

}  // namespace beamlab

#endif
