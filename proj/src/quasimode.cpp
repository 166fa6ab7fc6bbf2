#include "beamlab/quasimode.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace beamlab {

namespace {

constexpr double kPi = std::numbers::pi;

int next_pow2(int n) {
    int p = 1;
    while (p < n) p *= 2;
    return p;
}

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

double TorusGrid::dtheta() const { return 2.0 * kPi / n_theta; }
double TorusGrid::dx() const { return 2.0 * kPi / n_x; }

TorusGrid TorusGrid::auto_for(int k) {
    TorusGrid g;
    g.n_theta = next_pow2(std::max(64, 8 * k));
    g.n_x = next_pow2(static_cast<int>(std::ceil(64.0 * std::sqrt(static_cast<double>(k)))));
    return g;
}

void TorusGrid::validate_for(int k) const {
    if (!is_pow2(n_theta) || !is_pow2(n_x))
        throw std::invalid_argument("torus grid: sizes must be powers of two");
    if (n_theta < 8 * k)
        throw std::invalid_argument("torus grid: n_theta < 8k, nonlinear harmonics alias");
    if (static_cast<double>(n_x) < 64.0 * std::sqrt(static_cast<double>(k)))
        throw std::invalid_argument("torus grid: n_x too coarse for the h^{1/2} beam width");
}

double wrap_angle(double x) {
    double y = std::fmod(x + kPi, 2.0 * kPi);
    if (y < 0.0) y += 2.0 * kPi;
    return y - kPi;
}

std::vector<cplx> rescale(const std::vector<cplx>& w, const LineGrid& in, double h,
                          double s, bool forward, const LineGrid& out) {
    if (!(h > 0.0)) throw std::invalid_argument("rescale: h must be positive");
    if (in.n <= 0 || out.n <= 0) throw std::invalid_argument("rescale: empty grid");
    if (tail_fraction(w) > 1e-8)
        throw std::runtime_error("rescale: input not resolved (top-octave mass > 1e-8)");

    const double stretch = forward ? 1.0 / std::sqrt(h) : std::sqrt(h);
    const double amp = forward ? std::pow(h, 0.5 * s - 0.25) : std::pow(h, -0.5 * s + 0.25);

    // effective input band against the output Nyquist after scaling
    {
        std::vector<cplx> spec(w);
        fft_forward(spec.data(), in.n);
        double peak = 0.0;
        for (const cplx& c : spec) peak = std::max(peak, std::abs(c));
        const double dxi_in = 2.0 * kPi / (in.n * in.spacing);
        double band = 0.0;
        for (int m = 0; m < in.n; ++m)
            if (std::abs(spec[m]) > 1e-10 * peak)
                band = std::max(band, std::abs(fourier_index(m, in.n)) * dxi_in);
        const double out_nyquist = kPi / out.spacing;
        if (band * stretch > 0.875 * out_nyquist)
            throw std::runtime_error("rescale: output grid would alias the scaled band");
    }

    std::vector<double> pts(out.n);
    for (int i = 0; i < out.n; ++i) pts[i] = stretch * (out.origin + i * out.spacing);
    auto vals = trig_interpolate(w, in.origin, in.spacing, pts);
    for (cplx& v : vals) v *= amp;
    return vals;
}

QuasimodeField build_quasimode(const WkbSolution& solution, int k,
                               const MetricProfile& profile,
                               std::optional<TorusGrid> grid) {
    if (k < 5)
        throw std::invalid_argument("build_quasimode: k < 5 (h >= 1/4) is outside the "
                                    "asymptotic regime");
    if (profile.elliptic() && std::abs(profile.omega() - solution.omega) > 1e-9)
        throw std::invalid_argument("build_quasimode: profile frequency " +
                                    std::to_string(profile.omega()) +
                                    " does not match the hierarchy frequency");
    QuasimodeField field;
    field.grid = grid.value_or(TorusGrid::auto_for(k));
    field.grid.validate_for(k);
    field.k = k;
    field.h = 1.0 / k;
    field.p = solution.p;
    field.meta = solution;

    const AssembledBeam beam = assemble(solution, field.h);
    field.lambda = beam.lambda;

    OscillatorBasis basis(solution.omega,
                          static_cast<int>(solution.phis.front().size()) - 1, 0);
    const double rh = std::sqrt(field.h);
    std::vector<double> z(field.grid.n_x);
    for (int j = 0; j < field.grid.n_x; ++j) z[j] = wrap_angle(field.grid.x(j)) / rh;
    auto psi = basis.eval_series(beam.coeffs, z);
    const double amp = std::pow(field.h, -0.25);

    field.values.resize(field.grid.size());
    for (int i = 0; i < field.grid.n_theta; ++i) {
        const double phase = k * field.grid.theta(i);
        const cplx e(std::cos(phase), std::sin(phase));
        for (int j = 0; j < field.grid.n_x; ++j)
            field.values[field.idx(i, j)] = e * (amp * psi[j]);
    }

    double mass = 0.0;
    for (const cplx& v : field.values) mass += std::norm(v);
    const double nrm = std::sqrt(mass * field.grid.cell());
    if (!(nrm > 0.0)) throw std::runtime_error("build_quasimode: vanishing beam");
    for (cplx& v : field.values) v /= nrm;
    field.amplitude = nrm;
    field.coupling = -solution.sigma * std::pow(nrm, solution.p);

    // beam resolution guard: top octave of the x spectrum of |psi|
    {
        std::vector<cplx> col(field.grid.n_x);
        for (int j = 0; j < field.grid.n_x; ++j) col[j] = psi[j];
        if (tail_fraction(col) > 1e-8)
            throw std::runtime_error("build_quasimode: beam under-resolved in x");
    }
    return field;
}

double field_l2_norm(const QuasimodeField& field) {
    double mass = 0.0;
    for (const cplx& v : field.values) mass += std::norm(v);
    return std::sqrt(mass * field.grid.cell());
}

double theta_mode_mass_fraction(const QuasimodeField& field) {
    std::vector<cplx> work(field.values);
    fft_cols_forward(work.data(), field.grid.n_theta, field.grid.n_x);
    const int row = ((field.k % field.grid.n_theta) + field.grid.n_theta) % field.grid.n_theta;
    double total = 0.0, at_k = 0.0;
    for (int i = 0; i < field.grid.n_theta; ++i)
        for (int j = 0; j < field.grid.n_x; ++j) {
            const double e = std::norm(work[field.idx(i, j)]);
            total += e;
            if (i == row) at_k += e;
        }
    return total > 0.0 ? at_k / total : 0.0;
}

namespace {

/* (Delta~ + lambda) u - g |u|^p u with Delta~ = d_x^2 + A^{-2} d_theta^2 - V1
 * (or the quadratic normal form), by 1D spectral sweeps. */
std::vector<cplx> stationary_residual_field(const QuasimodeField& field,
                                            const MetricProfile& profile,
                                            PotentialMode mode) {
    const int nt = field.grid.n_theta, nx = field.grid.n_x;

    // x-curvature term
    std::vector<cplx> uxx(field.values);
    fft_rows_forward(uxx.data(), nt, nx);
    {
        double tail = 0.0, total = 0.0;
        for (int i = 0; i < nt; ++i)
            for (int j = 0; j < nx; ++j) {
                const double e = std::norm(uxx[static_cast<std::size_t>(i) * nx + j]);
                total += e;
                if (std::abs(fourier_index(j, nx)) > nx / 4) tail += e;
            }
        if (total > 0.0 && tail / total > 1e-8)
            throw std::runtime_error("residual: x spectrum not resolved (tail guard)");
    }
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nx; ++j) {
            const double m = fourier_index(j, nx);
            uxx[static_cast<std::size_t>(i) * nx + j] *= -m * m;
        }
    fft_rows_inverse(uxx.data(), nt, nx);

    // theta term, pointwise potential in x
    std::vector<cplx> utt(field.values);
    fft_cols_forward(utt.data(), nt, nx);
    for (int i = 0; i < nt; ++i) {
        const double j2 = -static_cast<double>(fourier_index(i, nt)) *
                          fourier_index(i, nt);
        for (int j = 0; j < nx; ++j) utt[static_cast<std::size_t>(i) * nx + j] *= j2;
    }
    fft_cols_inverse(utt.data(), nt, nx);

    std::vector<double> inv_a2(nx), pot_v1(nx);
    for (int j = 0; j < nx; ++j) {
        const double x = field.grid.x(j);
        if (mode == PotentialMode::geometric) {
            inv_a2[j] = profile.inv_A2(x);
            pot_v1[j] = profile.v1(x);
        } else {
            const double w = wrap_angle(x);
            inv_a2[j] = 1.0 + profile.c2() * w * w;
            pot_v1[j] = 0.0;
        }
    }

    std::vector<cplx> out(field.grid.size());
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nx; ++j) {
            const std::size_t id = static_cast<std::size_t>(i) * nx + j;
            const cplx u = field.values[id];
            const cplx lap = uxx[id] + inv_a2[j] * utt[id] - pot_v1[j] * u;
            const double au = std::abs(u);
            const cplx nl = field.coupling * std::pow(au, field.p) * u;
            out[id] = lap + field.lambda * u - nl;
        }
    return out;
}

}  // namespace

Diagnostics residual(const QuasimodeField& field, const MetricProfile& profile,
                     PotentialMode mode) {
    auto R = stationary_residual_field(field, profile, mode);
    double mass = 0.0;
    for (const cplx& v : R) mass += std::norm(v);
    Diagnostics d;
    d.residual_l2 = std::sqrt(mass * field.grid.cell());
    d.reduced_residual = field.h * d.residual_l2;
    return d;
}

Diagnostics localization(const QuasimodeField& field, double delta) {
    if (!(delta > 0.0) || !(delta < 0.5))
        throw std::invalid_argument("localization: need 0 < delta < 1/2");
    Diagnostics d;
    const double radius = std::pow(field.h, 0.5 - delta);
    double inside = 0.0, outside = 0.0;
    for (int j = 0; j < field.grid.n_x; ++j) {
        const bool out = std::abs(wrap_angle(field.grid.x(j))) > radius;
        double col = 0.0;
        for (int i = 0; i < field.grid.n_theta; ++i)
            col += std::norm(field.values[field.idx(i, j)]);
        (out ? outside : inside) += col;
    }
    d.tube_mass_out = outside / std::max(inside + outside, 1e-300);
    for (int r = 0; r <= 2; ++r) d.hr_norms[r] = hr_norm(field, r);
    return d;
}

double hr_norm(const QuasimodeField& field, int r) {
    if (r < 0) throw std::invalid_argument("hr_norm: order must be >= 0");
    const int nt = field.grid.n_theta, nx = field.grid.n_x;
    std::vector<cplx> spec(field.values);
    fft_rows_forward(spec.data(), nt, nx);
    fft_cols_forward(spec.data(), nt, nx);
    const double scale = 1.0 / (static_cast<double>(nt) * nx);
    double acc = 0.0;
    for (int i = 0; i < nt; ++i) {
        const double j2 = static_cast<double>(fourier_index(i, nt)) * fourier_index(i, nt);
        for (int j = 0; j < nx; ++j) {
            const double m2 = static_cast<double>(fourier_index(j, nx)) * fourier_index(j, nx);
            const double mult = std::pow(1.0 + j2 + m2, r);
            acc += mult * std::norm(spec[static_cast<std::size_t>(i) * nx + j] * scale);
        }
    }
    return 2.0 * kPi * std::sqrt(acc);
}

}  // namespace beamlab
