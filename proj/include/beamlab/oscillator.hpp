#ifndef BEAMLAB_OSCILLATOR_HPP
#define BEAMLAB_OSCILLATOR_HPP

#include <span>
#include <vector>

namespace beamlab {

/** Expansion coefficients over the oscillator eigenbasis, indexed by
 * mode number 0..n_max. */
using HermiteCoeffs = std::vector<double>;

/** Scaled quantum harmonic oscillator basis: the L2-normalized
 * eigenfunctions u_n of -d^2/dz^2 + omega^2 z^2, with eigenvalue
 * omega*(2n+1), together with a Gauss-Hermite quadrature rule sized
 * for products of basis functions up to power `max_power`+1.
 *
 * The quadrature weights are "function space" weights: for a function
 * g(z) = P(z) exp(-omega z^2) with P a polynomial of degree at most
 * 2*node_count-1, sum_i w_i g(z_i) equals the integral of g exactly.
 * Immutable after construction.
 */
class OscillatorBasis {
  public:
    OscillatorBasis(double omega, int n_max, int max_power = 4);

    double omega() const { return omega_; }
    int n_max() const { return n_max_; }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    /** Samples of u_n at the quadrature nodes. */
    std::span<const double> mode_values(int n) const;
    double eigenvalue(int n) const { return omega_ * (2 * n + 1); }
    /** Largest orthonormality defect observed at construction. */
    double orthonormality_error() const { return ortho_error_; }

    /** u_n evaluated at arbitrary points, stable for large n. */
    std::vector<double> eval_mode(int n, std::span<const double> z) const;
    /** Sum_n coeffs[n] u_n(z) at arbitrary points. */
    std::vector<double> eval_series(const HermiteCoeffs& coeffs,
                                    std::span<const double> z) const;

    /** Quadrature of a function given by its node samples. */
    double integrate(std::span<const double> node_values) const;
    double inner(std::span<const double> f, std::span<const double> g) const;
    double l2_norm(std::span<const double> node_values) const;

  private:
    double omega_;
    int n_max_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<double> mode_table_;  // (n_max+1) x node_count
    double ortho_error_ = 0.0;
};

/** Factory matching the basis invariants; rejects invalid parameters
 * and bases whose orthonormality defect exceeds 1e-8. */
OscillatorBasis build_basis(double omega, int n_max, int max_power = 4);

/** Projection of node samples onto the basis: coeffs[n] = <f, u_n>. */
HermiteCoeffs analyze(std::span<const double> node_values, const OscillatorBasis& basis);

/** Node samples of sum_n coeffs[n] u_n. */
std::vector<double> synthesize(const HermiteCoeffs& coeffs, const OscillatorBasis& basis);

/** Hermite coefficients of (sum_i weight_i f_i)^{p+1} for even p >= 0,
 * formed pointwise at the quadrature nodes. Inputs must be real-valued
 * coefficient vectors (so |f|^p f = f^{p+1}). */
HermiteCoeffs expand_nonlinear(const std::vector<std::pair<double, HermiteCoeffs>>& terms,
                               int p, const OscillatorBasis& basis);

/** Relative L2 residual of (-d^2/dz^2 + omega^2 z^2 - omega(2n+1)) u_n,
 * evaluated with spectral differentiation on a fine uniform grid.
 * This is an independent check of the eigenrelation, not a use of it. */
double eigen_residual(const OscillatorBasis& basis, int n);

/** Number of sign changes of u_n on a fine grid (equals n). */
int count_zeros(const OscillatorBasis& basis, int n);

/** Fitted log-log decay slope of the Fourier envelope of
 * v = |u_n|^p u_n over the mid-frequency window. Expected near -(2+p)
 * for p not an even integer and n >= 1. */
double fourier_decay_slope(int n, double p, int grid_n = 8192, double extent = 40.0);

}  // namespace beamlab

#endif
