#ifndef BEAMLAB_EVOLVE_HPP
#define BEAMLAB_EVOLVE_HPP

#include <vector>

#include "beamlab/quasimode.hpp"

namespace beamlab {

/** Horizon laws for the closeness experiments: T = h^p, T = h^{1+eps}
 * (the p = 1 case), or T = c0 h^{p/4} ln(1/h). */
enum class HorizonLaw { power, power_eps, log };

double horizon_time(HorizonLaw law, double h, double p, double c0 = 0.1, double eps = 0.1);

/** Time-stepping parameters for the conjugated NLS
 *    i d_t u + (d_x^2 + A^{-2} d_theta^2 - V1) u = g |u|^p u.
 * The stationary beam evolves as e^{-i lambda t} u(0) up to the
 * construction residual. */
struct EvolveConfig {
    double dt = 0.0;           // 0: use 0.1 h^2
    double t_final = 0.0;
    int record_every = 1;
    double delta = 0.1;        // tube exponent for the recorded mass
    int hkh_order = 2;         // semiclassical Sobolev order (even)
    PotentialMode mode = PotentialMode::geometric;

    void validate(double max_potential) const;
};

/** Recorded time series of conserved and tracked quantities. */
struct EvolutionTrace {
    std::vector<double> times;
    std::vector<double> mass;           // squared L2 norm
    std::vector<double> tube_mass_out;
    std::vector<double> dist_to_app;    // L2 distance to e^{-i lambda t} u(0)
    std::vector<double> hkh_norm;       // ||(1 - h^2 Delta)^{order/2} u||
};

/** One symmetric split step (dt/2 kinetic, dt/2 theta-potential,
 * dt nonlinear, then the two halves in reverse); each substep is an
 * exact phase rotation, so the L2 mass is conserved to round-off. */
void step(std::vector<cplx>& values, const TorusGrid& grid, double dt,
          const MetricProfile& profile, PotentialMode mode, double p, double coupling);

/** Integrates the field to t_final, recording every `record_every`
 * steps (and always at t = 0 and t_final). */
EvolutionTrace run(const QuasimodeField& initial, const EvolveConfig& config,
                   const MetricProfile& profile);

/** Semiclassical Sobolev norm ||(1 - h^2 Delta)^{order/2} u||_L2 on the
 * flat torus; order must be even. */
double hkh_norm(const std::vector<cplx>& values, const TorusGrid& grid, double h, int order);

/** One row of a horizon sweep. */
struct HorizonPoint {
    int k = 0;
    double h = 0.0;
    double t_final = 0.0;
    double sup_dist = 0.0;
    double sup_tube_mass_out = 0.0;
    double initial_tube_mass_out = 0.0;
};

/** Runs the configured horizon law over ascending k and reports the
 * supremum-in-time distance to the stationary evolution. */
std::vector<HorizonPoint> horizon_sweep(const WkbSolution& solution,
                                        const MetricProfile& profile,
                                        const std::vector<int>& k_list,
                                        HorizonLaw law, const EvolveConfig& base,
                                        double c0 = 0.1, double eps = 0.1, int jobs = 1);

}  // namespace beamlab

#endif
