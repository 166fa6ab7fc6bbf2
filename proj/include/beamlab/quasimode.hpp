#ifndef BEAMLAB_QUASIMODE_HPP
#define BEAMLAB_QUASIMODE_HPP

#include <map>
#include <optional>
#include <vector>

#include "beamlab/fft.hpp"
#include "beamlab/geometry.hpp"
#include "beamlab/wkb.hpp"

namespace beamlab {

/** Uniform periodic 1D grid: points origin + i*spacing, period n*spacing. */
struct LineGrid {
    int n = 0;
    double origin = 0.0;
    double spacing = 0.0;
};

/** Discretization of the torus (theta, x) in [0, 2pi)^2; x is the
 * contiguous axis of row-major fields. */
struct TorusGrid {
    int n_theta = 0;
    int n_x = 0;

    double dtheta() const;
    double dx() const;
    double cell() const { return dtheta() * dx(); }
    std::size_t size() const { return static_cast<std::size_t>(n_theta) * n_x; }
    double x(int j) const { return j * dx(); }
    double theta(int i) const { return i * dtheta(); }

    /** Smallest power-of-two grid resolving mode k and the h^{1/2} beam:
     * n_theta >= 8k, n_x >= 64/sqrt(h). */
    static TorusGrid auto_for(int k);
    void validate_for(int k) const;
};

/** Periodic representative of x in [-pi, pi): signed distance to the
 * geodesic at x = 0 (x is arclength normal to it). */
double wrap_angle(double x);

/** Which transverse potential the conjugated operator carries:
 * the full metric data, or its quadratic normal form (useful to
 * isolate the hierarchy truncation from metric Taylor remainders). */
enum class PotentialMode { geometric, toy };

/** Stationary beam on the torus:
 *    u(theta, x) = e^{ik theta} (T_{h,0} phi)(x) / amplitude,
 * L2-normalized, with quasi-eigenvalue lambda and the nonlinear
 * coupling g of the equation (Delta~ + lambda) u = g |u|^p u that the
 * field satisfies up to the construction residual. Because the
 * hierarchy fixes the unit-peak profile, normalizing the field rescales
 * the coupling: g = -sigma * amplitude^p. */
struct QuasimodeField {
    TorusGrid grid;
    std::vector<cplx> values;
    int k = 0;
    double h = 0.0;
    double lambda = 0.0;
    double p = 0.0;
    double coupling = 0.0;
    double amplitude = 0.0;
    WkbSolution meta;

    std::size_t idx(int i_theta, int j_x) const {
        return static_cast<std::size_t>(i_theta) * grid.n_x + j_x;
    }
};

/** Localization and residual diagnostics of a field. */
struct Diagnostics {
    double residual_l2 = 0.0;
    double reduced_residual = 0.0;
    double tube_mass_out = 0.0;
    std::map<int, double> hr_norms;
};

/** The scaling map T_{h,s} w(x) = h^{s/2 - 1/4} w(h^{-1/2} x) (or its
 * inverse), applied to periodic samples by band-limited interpolation.
 * Throws when the input is not resolved or the output grid would alias. */
std::vector<cplx> rescale(const std::vector<cplx>& w, const LineGrid& in, double h,
                          double s, bool forward, const LineGrid& out);

/** Builds the normalized torus field from a hierarchy solution at
 * mode k (h = 1/k <= 1/5), evaluating the Hermite series directly. */
QuasimodeField build_quasimode(const WkbSolution& solution, int k,
                               const MetricProfile& profile,
                               std::optional<TorusGrid> grid = std::nullopt);

/** L2 norm, with the flat measure dtheta dx. */
double field_l2_norm(const QuasimodeField& field);

/** Fraction of L2 mass carried by theta-Fourier mode k. */
double theta_mode_mass_fraction(const QuasimodeField& field);

/** Residual R = (Delta~ + lambda) u - g |u|^p u evaluated spectrally;
 * returns ||R||_L2 and the reduced residual h*||R||_L2. */
Diagnostics residual(const QuasimodeField& field, const MetricProfile& profile,
                     PotentialMode mode = PotentialMode::geometric);

/** Mass fraction outside the tube |x| <= h^{1/2-delta} plus Sobolev
 * norms H^r, r in {0, 1, 2}, on the conjugated flat torus. */
Diagnostics localization(const QuasimodeField& field, double delta);

/** Standard torus Sobolev norm of integer order r >= 0. */
double hr_norm(const QuasimodeField& field, int r);

}  // namespace beamlab

#endif
