#include "beamlab/slopefit.hpp"

#include <cmath>
#include <stdexcept>

namespace beamlab {

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 3) throw std::invalid_argument("fit_slope: need at least 3 points");
    SlopeFit fit;
    for (const auto& [x, y] : pairs) {
        if (!(x > 0.0) || !(y > 0.0))
            throw std::invalid_argument("fit_slope: nonpositive value in log-log fit");
        fit.xs.push_back(std::log(x));
        fit.ys.push_back(std::log(y));
    }
    const std::size_t n = fit.xs.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += fit.xs[i];
        sy += fit.ys[i];
        sxx += fit.xs[i] * fit.xs[i];
        sxy += fit.xs[i] * fit.ys[i];
    }
    const double det = n * sxx - sx * sx;
    if (det == 0.0) throw std::invalid_argument("fit_slope: degenerate abscissae");
    fit.slope = (n * sxy - sx * sy) / det;
    fit.intercept = (sy - fit.slope * sx) / n;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = std::abs(fit.ys[i] - (fit.intercept + fit.slope * fit.xs[i]));
        if (r > fit.max_abs_residual) fit.max_abs_residual = r;
    }
    return fit;
}

}  // namespace beamlab
