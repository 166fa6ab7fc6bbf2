#include "beamlab/oscillator.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "beamlab/fft.hpp"
#include "beamlab/slopefit.hpp"

namespace beamlab {

namespace {

constexpr double kPi = std::numbers::pi;

/* Normalized Hermite functions h_0..h_n at one point; returns h_n and
 * (via the ladder identity) its derivative. All values are O(1). */
void hermite_value_and_derivative(int n, double t, double& value, double& derivative) {
    double hm1 = 0.0;
    double h = std::pow(kPi, -0.25) * std::exp(-0.5 * t * t);
    for (int j = 1; j <= n; ++j) {
        const double next = std::sqrt(2.0 / j) * t * h - std::sqrt((j - 1.0) / j) * hm1;
        hm1 = h;
        h = next;
    }
    value = h;
    derivative = std::sqrt(2.0 * n) * hm1 - t * h;
}

/* Gauss-Hermite nodes for weight exp(-t^2) and the corresponding
 * "function space" weights v_i with sum_i v_i g(t_i) = integral of g
 * for g = polynomial * exp(-t^2) up to degree 2n-1.
 *
 * Nodes come from the Jacobi-matrix eigenvalues polished by Newton
 * iteration on the Hermite function h_n (whose values stay O(1));
 * weights use the Christoffel identity v = 1 / sum_{j<n} h_j(t)^2,
 * which avoids the e^{t^2} overflow/underflow of the textbook
 * eigenvector formula at the extreme nodes. */
void gauss_hermite(int n, std::vector<double>& t, std::vector<double>& v) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        const double b = std::sqrt(i / 2.0);
        J(i, i - 1) = b;
        J(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J, Eigen::EigenvaluesOnly);
    t.resize(n);
    v.resize(n);
    std::vector<double> h(n);
    for (int i = 0; i < n; ++i) {
        double x = es.eigenvalues()(i);
        for (int it = 0; it < 3; ++it) {
            double val, der;
            hermite_value_and_derivative(n, x, val, der);
            if (der != 0.0) x -= val / der;
        }
        t[i] = x;
        h[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
        double chr = h[0] * h[0];
        for (int j = 1; j < n; ++j) {
            h[j] = std::sqrt(2.0 / j) * x * h[j - 1] -
                   std::sqrt((j - 1.0) / j) * (j >= 2 ? h[j - 2] : 0.0);
            chr += h[j] * h[j];
        }
        v[i] = 1.0 / chr;
    }
}

/* Normalized Hermite functions h_n(t) = H_n(t) e^{-t^2/2} / sqrt(2^n n! sqrt(pi))
 * for all n <= n_max at one point, via the three-term recurrence. */
void hermite_column(int n_max, double t, double* out) {
    out[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * t * t);
    if (n_max >= 1) out[1] = std::sqrt(2.0) * t * out[0];
    for (int n = 2; n <= n_max; ++n)
        out[n] = std::sqrt(2.0 / n) * t * out[n - 1] - std::sqrt((n - 1.0) / n) * out[n - 2];
}

}  // namespace

OscillatorBasis::OscillatorBasis(double omega, int n_max, int max_power)
    : omega_(omega), n_max_(n_max) {
    if (!(omega > 0.0)) throw std::invalid_argument("oscillator: omega must be positive");
    if (n_max < 0) throw std::invalid_argument("oscillator: n_max must be >= 0");
    if (max_power < 0 || max_power % 2 != 0)
        throw std::invalid_argument("oscillator: max_power must be a nonnegative even integer");

    // at minimum the rule must integrate pairwise products (degree 2 n_max)
    const int degree = std::max((max_power + 1) * n_max, 2 * n_max) + 1;
    const int n_quad = (degree + 1) / 2 + 1 + 16;
    std::vector<double> t, v;
    gauss_hermite(n_quad, t, v);

    const double rw = std::sqrt(omega_);
    nodes_.resize(n_quad);
    weights_.resize(n_quad);
    for (int i = 0; i < n_quad; ++i) {
        nodes_[i] = t[i] / rw;
        weights_[i] = v[i] / rw;
    }

    // u_n^omega(z) = omega^{1/4} h_n(sqrt(omega) z)
    mode_table_.assign(static_cast<std::size_t>(n_max_ + 1) * n_quad, 0.0);
    std::vector<double> col(n_max_ + 1);
    const double amp = std::pow(omega_, 0.25);
    for (int i = 0; i < n_quad; ++i) {
        hermite_column(n_max_, rw * nodes_[i], col.data());
        for (int n = 0; n <= n_max_; ++n)
            mode_table_[static_cast<std::size_t>(n) * n_quad + i] = amp * col[n];
    }

    // orthonormality defect under the stored rule
    for (int m = 0; m <= n_max_; ++m) {
        for (int n = m; n <= n_max_; ++n) {
            double s = 0.0;
            const double* um = &mode_table_[static_cast<std::size_t>(m) * n_quad];
            const double* un = &mode_table_[static_cast<std::size_t>(n) * n_quad];
            for (int i = 0; i < n_quad; ++i) s += weights_[i] * um[i] * un[i];
            const double target = (m == n) ? 1.0 : 0.0;
            ortho_error_ = std::max(ortho_error_, std::abs(s - target));
        }
    }
    if (ortho_error_ > 1e-8)
        throw std::runtime_error("oscillator: basis lost orthonormality (defect " +
                                 std::to_string(ortho_error_) + ") at n_max " +
                                 std::to_string(n_max_));
}

std::span<const double> OscillatorBasis::mode_values(int n) const {
    return {&mode_table_[static_cast<std::size_t>(n) * node_count()],
            static_cast<std::size_t>(node_count())};
}

std::vector<double> OscillatorBasis::eval_mode(int n, std::span<const double> z) const {
    std::vector<double> out(z.size());
    std::vector<double> col(n + 1);
    const double rw = std::sqrt(omega_);
    const double amp = std::pow(omega_, 0.25);
    for (std::size_t i = 0; i < z.size(); ++i) {
        hermite_column(n, rw * z[i], col.data());
        out[i] = amp * col[n];
    }
    return out;
}

std::vector<double> OscillatorBasis::eval_series(const HermiteCoeffs& coeffs,
                                                 std::span<const double> z) const {
    const int top = static_cast<int>(coeffs.size()) - 1;
    std::vector<double> out(z.size(), 0.0);
    std::vector<double> col(std::max(top, 1) + 1);
    const double rw = std::sqrt(omega_);
    const double amp = std::pow(omega_, 0.25);
    for (std::size_t i = 0; i < z.size(); ++i) {
        hermite_column(top, rw * z[i], col.data());
        double s = 0.0;
        for (int n = 0; n <= top; ++n) s += coeffs[n] * col[n];
        out[i] = amp * s;
    }
    return out;
}

double OscillatorBasis::integrate(std::span<const double> node_values) const {
    double s = 0.0;
    for (int i = 0; i < node_count(); ++i) s += weights_[i] * node_values[i];
    return s;
}

double OscillatorBasis::inner(std::span<const double> f, std::span<const double> g) const {
    double s = 0.0;
    for (int i = 0; i < node_count(); ++i) s += weights_[i] * f[i] * g[i];
    return s;
}

double OscillatorBasis::l2_norm(std::span<const double> v) const {
    return std::sqrt(std::max(0.0, inner(v, v)));
}

OscillatorBasis build_basis(double omega, int n_max, int max_power) {
    return OscillatorBasis(omega, n_max, max_power);
}

HermiteCoeffs analyze(std::span<const double> node_values, const OscillatorBasis& basis) {
    if (static_cast<int>(node_values.size()) != basis.node_count())
        throw std::invalid_argument("analyze: sample count does not match quadrature");
    // tail-mass check: the outermost nodes must see a decayed function
    double peak = 0.0;
    for (double v : node_values) peak = std::max(peak, std::abs(v));
    double edge = 0.0;
    const int n_edge = std::min(4, basis.node_count() / 2);
    for (int i = 0; i < n_edge; ++i) {
        edge = std::max(edge, std::abs(node_values[i]));
        edge = std::max(edge, std::abs(node_values[basis.node_count() - 1 - i]));
    }
    if (peak > 0.0 && edge > 1e-8 * peak)
        throw std::runtime_error("analyze: input not resolved by the node range "
                                 "(tail-mass check failed)");
    HermiteCoeffs out(basis.n_max() + 1, 0.0);
    for (int n = 0; n <= basis.n_max(); ++n)
        out[n] = basis.inner(node_values, basis.mode_values(n));
    return out;
}

std::vector<double> synthesize(const HermiteCoeffs& coeffs, const OscillatorBasis& basis) {
    if (static_cast<int>(coeffs.size()) > basis.n_max() + 1)
        throw std::invalid_argument("synthesize: coefficient vector longer than basis");
    std::vector<double> out(basis.node_count(), 0.0);
    for (int n = 0; n < static_cast<int>(coeffs.size()); ++n) {
        if (coeffs[n] == 0.0) continue;
        auto u = basis.mode_values(n);
        for (int i = 0; i < basis.node_count(); ++i) out[i] += coeffs[n] * u[i];
    }
    return out;
}

HermiteCoeffs expand_nonlinear(const std::vector<std::pair<double, HermiteCoeffs>>& terms,
                               int p, const OscillatorBasis& basis) {
    if (p < 0 || p % 2 != 0)
        throw std::invalid_argument(
            "expand_nonlinear: p must be a nonnegative even integer; "
            "use the grid-based path for fractional powers");
    std::vector<double> f(basis.node_count(), 0.0);
    for (const auto& [weight, coeffs] : terms) {
        auto v = synthesize(coeffs, basis);
        for (int i = 0; i < basis.node_count(); ++i) f[i] += weight * v[i];
    }
    std::vector<double> prod(basis.node_count());
    for (int i = 0; i < basis.node_count(); ++i) {
        double acc = f[i];
        for (int j = 0; j < p; ++j) acc *= f[i];
        prod[i] = acc;
    }
    return analyze(prod, basis);
}

double eigen_residual(const OscillatorBasis& basis, int n) {
    // independent route: sample on a uniform grid wide enough for the
    // classically allowed region, differentiate spectrally
    const int grid_n = 4096;
    const double lam = basis.eigenvalue(n);
    const double turning = std::sqrt(lam) / basis.omega();
    const double half_width = turning + 12.0 / std::sqrt(basis.omega());
    std::vector<double> z(grid_n);
    const double dz = 2.0 * half_width / grid_n;
    for (int i = 0; i < grid_n; ++i) z[i] = -half_width + i * dz;
    auto u = basis.eval_mode(n, z);

    std::vector<cplx> spec(grid_n);
    for (int i = 0; i < grid_n; ++i) spec[i] = u[i];
    fft_forward(spec.data(), grid_n);
    const double dxi = 2.0 * kPi / (grid_n * dz);
    for (int m = 0; m < grid_n; ++m) {
        const double xi = fourier_index(m, grid_n) * dxi;
        spec[m] *= -xi * xi;
    }
    fft_inverse(spec.data(), grid_n);

    double num = 0.0, den = 0.0;
    const double w2 = basis.omega() * basis.omega();
    for (int i = 0; i < grid_n; ++i) {
        const double r = -spec[i].real() + w2 * z[i] * z[i] * u[i] - lam * u[i];
        num += r * r;
        den += lam * lam * u[i] * u[i];
    }
    return std::sqrt(num / den);
}

int count_zeros(const OscillatorBasis& basis, int n) {
    const int grid_n = 8192;
    const double half_width = std::sqrt(basis.eigenvalue(n)) / basis.omega() + 4.0;
    std::vector<double> z(grid_n);
    for (int i = 0; i < grid_n; ++i) z[i] = -half_width + i * 2.0 * half_width / grid_n;
    auto u = basis.eval_mode(n, z);
    int changes = 0;
    double prev = 0.0;
    for (int i = 0; i < grid_n; ++i) {
        if (u[i] == 0.0) continue;
        if (prev != 0.0 && std::signbit(u[i]) != std::signbit(prev)) ++changes;
        prev = u[i];
    }
    return changes;
}

double fourier_decay_slope(int n, double p, int grid_n, double extent) {
    if (n < 1) throw std::invalid_argument("fourier_decay_slope: need n >= 1");
    if (p <= 0.0) throw std::invalid_argument("fourier_decay_slope: need p > 0");

    OscillatorBasis basis(1.0, n, 0);
    std::vector<double> x(grid_n);
    const double dx = extent / grid_n;
    for (int i = 0; i < grid_n; ++i) x[i] = (i - grid_n / 2) * dx;
    auto u = basis.eval_mode(n, x);

    std::vector<cplx> v(grid_n);
    for (int i = 0; i < grid_n; ++i) {
        const double a = std::abs(u[i]);
        // ifftshift so that x=0 sits at sample 0
        v[(i + grid_n / 2) % grid_n] = std::pow(a, p) * u[i];
    }
    fft_forward(v.data(), grid_n);

    // envelope over log-spaced bins of the window [8, grid_n/8]
    const int lo = 8, hi = grid_n / 8;
    const int n_bins = 24;
    const double dxi = 2.0 * kPi / extent;
    std::vector<std::pair<double, double>> pts;
    double edge = lo;
    const double ratio = std::pow(static_cast<double>(hi) / lo, 1.0 / n_bins);
    for (int b = 0; b < n_bins; ++b) {
        const int a = std::max(lo, static_cast<int>(std::lround(edge)));
        edge *= ratio;
        const int c = std::min(hi, static_cast<int>(std::lround(edge)));
        if (c <= a) continue;
        double best = -1.0;
        int best_m = a;
        for (int m = a; m < c; ++m) {
            const double mag = std::abs(v[m]) * dx;
            if (mag > best) {
                best = mag;
                best_m = m;
            }
        }
        if (best > 0.0) pts.emplace_back(best_m * dxi, best);
    }
    if (pts.size() < 3)
        throw std::runtime_error("fourier_decay_slope: window too narrow for a stable fit");
    const SlopeFit fit = fit_slope(pts);
    if (fit.xs.back() - fit.xs.front() < 1.0)
        throw std::runtime_error("fourier_decay_slope: window too narrow for a stable fit");
    return fit.slope;
}

}  // namespace beamlab
