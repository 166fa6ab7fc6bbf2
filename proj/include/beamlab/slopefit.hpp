#ifndef BEAMLAB_SLOPEFIT_HPP
#define BEAMLAB_SLOPEFIT_HPP

#include <utility>
#include <vector>

namespace beamlab {

/** Least-squares line through (log x, log y) pairs. The fit residual
 * is reported, never hidden. */
struct SlopeFit {
    std::vector<double> xs;  // log of the abscissae
    std::vector<double> ys;  // log of the values
    double slope = 0.0;
    double intercept = 0.0;
    double max_abs_residual = 0.0;
};

/** Fit over (x, y) pairs with x, y > 0; requires at least 3 points. */
SlopeFit fit_slope(const std::vector<std::pair<double, double>>& pairs);

}  // namespace beamlab

#endif
