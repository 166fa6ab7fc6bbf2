#include "beamlab/wkb.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace beamlab {

namespace {

bool is_even_integer(double p) {
    return p > 0.0 && std::abs(p - 2.0 * std::round(p / 2.0)) < 1e-12;
}

double dot(const HermiteCoeffs& a, const HermiteCoeffs& b) {
    double s = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double coeff_norm(const HermiteCoeffs& a) { return std::sqrt(std::max(0.0, dot(a, a))); }

/* Pointwise power series: given node values of phi_0..phi_M, the
 * coefficient of t^{order} in (sum_j t^j phi_j)^{p+1}. */
std::vector<double> power_series_coefficient(const std::vector<std::vector<double>>& vals,
                                             int p, int order) {
    const std::size_t n_pts = vals.front().size();
    std::vector<std::vector<double>> cur(order + 1, std::vector<double>(n_pts, 0.0));
    for (double& v : cur[0]) v = 1.0;
    for (int factor = 0; factor < p + 1; ++factor) {
        std::vector<std::vector<double>> nxt(order + 1, std::vector<double>(n_pts, 0.0));
        for (int a = 0; a <= order; ++a)
            for (int b = 0; a + b <= order && b < static_cast<int>(vals.size()); ++b)
                for (std::size_t i = 0; i < n_pts; ++i)
                    nxt[a + b][i] += cur[a][i] * vals[b][i];
        cur = std::move(nxt);
    }
    return cur[order];
}

}  // namespace

void WkbConfig::validate() const {
    if (dim != 2) throw std::invalid_argument("wkb: only dim = 2 is supported");
    if (sobolev_s != 0.0)
        throw std::invalid_argument("wkb: only the L2 normalization (s = 0) is supported");
    if (!(p > 0.0)) throw std::invalid_argument("wkb: p must be positive");
    if (sigma != 1 && sigma != -1) throw std::invalid_argument("wkb: sigma must be +-1");
    if (!(omega > 0.0)) throw std::invalid_argument("wkb: omega must be positive");
    if (n_terms < 0) throw std::invalid_argument("wkb: n_terms must be >= 0");
    if (!(q() > 0.0))
        throw std::invalid_argument("wkb: q = 1 - p/4 must be positive (p < 4)");
    if (n_terms >= 2 && !is_even_integer(p))
        throw std::invalid_argument("wkb: n_terms >= 2 requires an even integer p");
    if (shifted && !(h_shift > 0.0))
        throw std::invalid_argument("wkb: shifted mode needs h_shift > 0");
    if (n_max < 2) throw std::invalid_argument("wkb: n_max too small");
}

std::pair<HermiteCoeffs, double> solve_order0(const WkbConfig& config,
                                              const OscillatorBasis& basis) {
    if (std::abs(config.omega - basis.omega()) > 1e-12)
        throw std::invalid_argument("wkb: config omega does not match basis");
    // unit-peak Gaussian exp(-omega z^2 / 2) = (pi/omega)^{1/4} u_0
    HermiteCoeffs phi0(basis.n_max() + 1, 0.0);
    phi0[0] = std::pow(3.14159265358979323846 / config.omega, 0.25);
    return {phi0, config.omega};
}

double solvability_energy(const HermiteCoeffs& rhs, const HermiteCoeffs& phi0) {
    const double den = dot(phi0, phi0);
    if (!(den > 0.0)) throw std::invalid_argument("solvability_energy: phi0 vanishes");
    return -dot(rhs, phi0) / den;
}

HermiteCoeffs invert_shifted(const HermiteCoeffs& rhs, double shift,
                             const OscillatorBasis& basis) {
    const double omega = basis.omega();
    if (!(shift < 2.0 * omega))
        throw std::invalid_argument("invert_shifted: shift closes the spectral gap");
    const double nrm = coeff_norm(rhs);
    if (rhs.size() > 0 && std::abs(rhs[0]) > 1e-9 * std::max(nrm, 1e-300))
        throw std::invalid_argument("invert_shifted: rhs is not orthogonal to phi0");
    HermiteCoeffs out(rhs.size(), 0.0);
    for (std::size_t n = 1; n < rhs.size(); ++n)
        out[n] = rhs[n] / (2.0 * omega * static_cast<double>(n) - shift);
    return out;
}

WkbSolution solve_hierarchy(const WkbConfig& config, const OscillatorBasis& basis) {
    config.validate();
    if (basis.n_max() < config.n_max)
        throw std::invalid_argument("wkb: basis smaller than requested truncation");

    WkbSolution sol;
    sol.q = config.q();
    sol.omega = config.omega;
    sol.p = config.p;
    sol.sigma = config.sigma;
    sol.shifted = config.shifted;
    sol.h_shift = config.h_shift;

    auto [phi0, e0] = solve_order0(config, basis);
    sol.phis.push_back(phi0);
    sol.energies.push_back(e0);
    sol.defects.push_back(0.0);

    const double phi0_sq = dot(phi0, phi0);
    const bool polynomial = is_even_integer(config.p);
    const int p_int = polynomial ? static_cast<int>(std::lround(config.p)) : 0;

    std::vector<std::vector<double>> values;  // node samples of each phi_m
    values.push_back(synthesize(phi0, basis));

    for (int m = 1; m <= config.n_terms; ++m) {
        // nonlinear contribution: coefficient of h^{(m-1)q} in sigma |phi|^p phi
        std::vector<double> nonlin;
        if (polynomial) {
            nonlin = power_series_coefficient(values, p_int, m - 1);
        } else {
            // fractional p reaches here only at m = 1 with the positive
            // ground state, so |phi0|^p phi0 = phi0^{p+1} pointwise
            nonlin.resize(values[0].size());
            for (std::size_t i = 0; i < nonlin.size(); ++i)
                nonlin[i] = std::pow(values[0][i], config.p + 1.0);
        }
        std::vector<double> rhs_vals(nonlin.size());
        for (std::size_t i = 0; i < nonlin.size(); ++i)
            rhs_vals[i] = config.sigma * nonlin[i];
        for (int j = 1; j < m; ++j) {
            const double ej = sol.energies[j];
            const auto& vj = values[m - j];
            for (std::size_t i = 0; i < rhs_vals.size(); ++i) rhs_vals[i] += ej * vj[i];
        }

        HermiteCoeffs rhs = analyze(rhs_vals, basis);
        const double em = solvability_energy(rhs, phi0);
        sol.energies.push_back(em);

        HermiteCoeffs full = rhs;
        for (std::size_t i = 0; i < full.size(); ++i) full[i] += em * phi0[i];
        // remove the numerically residual phi0 component before inversion
        const double c = dot(full, phi0) / phi0_sq;
        for (std::size_t i = 0; i < full.size(); ++i) full[i] -= c * phi0[i];

        double shift = 0.0;
        if (config.shifted && m == 1)
            shift = std::pow(config.h_shift, sol.q) * sol.energies[1];
        sol.phis.push_back(invert_shifted(full, shift, basis));
        values.push_back(synthesize(sol.phis.back(), basis));

        // truncation defect: content of the full right-hand side beyond
        // the Hermite span, measured pointwise at the quadrature nodes
        auto projected = synthesize(rhs, basis);
        double num = 0.0;
        for (std::size_t i = 0; i < rhs_vals.size(); ++i) {
            const double d = rhs_vals[i] - projected[i];
            num += basis.weights()[i] * d * d;
        }
        const double rhs_norm = std::max(basis.l2_norm(rhs_vals), 1e-300);
        const double defect = std::sqrt(std::max(0.0, num)) / rhs_norm;
        sol.defects.push_back(defect);
        if (defect > 1e-8)
            throw std::runtime_error("wkb: hierarchy defect " + std::to_string(defect) +
                                     " at order " + std::to_string(m) +
                                     " exceeds 1e-8; increase n_max");
    }
    return sol;
}

AssembledBeam assemble(const WkbSolution& solution, double h) {
    if (!(h > 0.0) || !(h < 1.0))
        throw std::invalid_argument("assemble: h must lie in (0, 1)");
    const double k = 1.0 / h;
    if (std::abs(k - std::round(k)) > 1e-9)
        throw std::invalid_argument("assemble: h must be 1/k for an integer k");

    AssembledBeam beam;
    beam.h = h;
    beam.coeffs.assign(solution.phis.front().size(), 0.0);
    double correction = 0.0;
    for (std::size_t m = 0; m < solution.phis.size(); ++m) {
        const double hm = std::pow(h, static_cast<double>(m) * solution.q);
        beam.energy += hm * solution.energies[m];
        if (m > 0) correction += hm * std::abs(solution.energies[m]);
        for (std::size_t i = 0; i < beam.coeffs.size(); ++i)
            beam.coeffs[i] += hm * solution.phis[m][i];
    }
    beam.lambda = (1.0 + h * beam.energy) / (h * h);
    beam.validity_warning = correction >= solution.energies.front();
    return beam;
}

double reduced_residual_norm(const WkbSolution& solution, double h,
                             const OscillatorBasis& basis) {
    const AssembledBeam beam = assemble(solution, h);
    auto vals = synthesize(beam.coeffs, basis);
    // H0 phi through the eigenrelation, exact on the truncated span
    HermiteCoeffs hphi(beam.coeffs.size());
    for (std::size_t n = 0; n < hphi.size(); ++n)
        hphi[n] = basis.eigenvalue(static_cast<int>(n)) * beam.coeffs[n];
    auto hvals = synthesize(hphi, basis);

    const double hq = std::pow(h, solution.q);
    std::vector<double> resid(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) {
        const double nl = std::pow(std::abs(vals[i]), solution.p) * vals[i];
        resid[i] = hvals[i] - beam.energy * vals[i] - solution.sigma * hq * nl;
    }
    return basis.l2_norm(resid);
}

}  // namespace beamlab
