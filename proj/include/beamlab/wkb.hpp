#ifndef BEAMLAB_WKB_HPP
#define BEAMLAB_WKB_HPP

#include <vector>

#include "beamlab/oscillator.hpp"

namespace beamlab {

/** Parameters of the reduced stationary problem
 *    (-д_z^2 + omega^2 z^2 - E) phi = sigma h^q |phi|^p phi
 * solved by power matching in h^q, q = 1 - p(d-1)/4 + p*s.
 *
 * `sigma` is the coupling of this reduced equation. The torus field
 * built from a solution satisfies the conjugated 2D equation with
 * coupling -sigma (see quasimode.hpp).
 */
struct WkbConfig {
    double p = 2.0;       // nonlinearity power, even integer required for n_terms >= 2
    int sigma = 1;        // +1 or -1
    int dim = 2;          // surface case only
    double sobolev_s = 0; // normalization index; 0 in all default runs
    int n_terms = 1;      // number of corrections N (N = 1: two-term scheme)
    double omega = 1.0;   // transverse oscillator frequency
    bool shifted = false; // keep -h^q E1 on the left of the order-1 equation
    double h_shift = 0.0; // h used by the shifted variant
    int n_max = 128;      // Hermite truncation (keeps every defect under 1e-8)

    double q() const { return 1.0 - p * (dim - 1) / 4.0 + p * sobolev_s; }
    void validate() const;
};

/** Hierarchy output: correction profiles phi_0..phi_N (Hermite
 * coefficients), energies E_0..E_N, and the truncation defect of each
 * order's equation. phi_0 is the unit-peak Gaussian exp(-omega z^2/2),
 * so E_1 = -sigma sqrt(2/(p+2)) independently of omega. */
struct WkbSolution {
    std::vector<HermiteCoeffs> phis;
    std::vector<double> energies;
    std::vector<double> defects;
    double q = 0.0;
    double omega = 0.0;
    double p = 0.0;
    int sigma = 1;
    bool shifted = false;
    double h_shift = 0.0;
};

/** phi(.; h), E(h) and the quasi-eigenvalue lambda(h) at a concrete
 * admissible h = 1/k. */
struct AssembledBeam {
    HermiteCoeffs coeffs;
    double energy = 0.0;   // E(h) = sum h^{mq} E_m
    double lambda = 0.0;   // (1 + h E(h)) / h^2
    double h = 0.0;
    bool validity_warning = false;  // correction sum not small against E_0
};

/** Ground state of the reduced operator: unit-peak Gaussian and E_0 = omega. */
std::pair<HermiteCoeffs, double> solve_order0(const WkbConfig& config,
                                              const OscillatorBasis& basis);

/** Energy E with rhs + E*phi0 orthogonal to phi0. */
double solvability_energy(const HermiteCoeffs& rhs, const HermiteCoeffs& phi0);

/** Diagonal resolvent on phi0-perp: out[n] = rhs[n] / (2 omega n - shift),
 * out[0] = 0. Requires rhs orthogonal to phi0 and shift < 2 omega. */
HermiteCoeffs invert_shifted(const HermiteCoeffs& rhs, double shift,
                             const OscillatorBasis& basis);

/** Full hierarchy solve; aborts if a truncation defect exceeds 1e-8. */
WkbSolution solve_hierarchy(const WkbConfig& config, const OscillatorBasis& basis);

/** Assembly at h = 1/k (integer k >= 1 enforced). */
AssembledBeam assemble(const WkbSolution& solution, double h);

/** L2 norm of (-д_z^2 + omega^2 z^2 - E(h)) phi - sigma h^q |phi|^p phi
 * for the assembled beam; decays like h^{(N+1)q} for even p. */
double reduced_residual_norm(const WkbSolution& solution, double h,
                             const OscillatorBasis& basis);

}  // namespace beamlab

#endif
