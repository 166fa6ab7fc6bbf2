#include <doctest.h>

#include <cmath>
#include <numbers>

#include "beamlab/quasimode.hpp"
#include "beamlab/slopefit.hpp"

using namespace beamlab;

namespace {
constexpr double kPi = std::numbers::pi;

// spectral homogeneous Sobolev norm of periodic samples
double line_hr_norm(const std::vector<cplx>& w, double spacing, double r) {
    const int n = static_cast<int>(w.size());
    std::vector<cplx> spec(w);
    fft_forward(spec.data(), n);
    const double period = n * spacing;
    const double dxi = 2.0 * kPi / period;
    double acc = 0.0;
    for (int m = 0; m < n; ++m) {
        const double xi = std::abs(fourier_index(m, n)) * dxi;
        acc += std::pow(xi, 2.0 * r) * std::norm(spec[m] / static_cast<double>(n));
    }
    return std::sqrt(acc * period);
}

WkbSolution default_solution(const MetricProfile& profile, int n_terms = 1) {
    WkbConfig cfg;
    cfg.p = 2.0;
    cfg.sigma = 1;
    cfg.n_terms = n_terms;
    cfg.omega = profile.omega();
    OscillatorBasis basis(cfg.omega, cfg.n_max, 4);
    return solve_hierarchy(cfg, basis);
}
}  // namespace

TEST_CASE("automatic grids satisfy the resolution rules") {
    for (int k : {5, 8, 16, 64}) {
        const TorusGrid g = TorusGrid::auto_for(k);
        CHECK_NOTHROW(g.validate_for(k));
        CHECK(g.n_theta >= 8 * k);
        CHECK(static_cast<double>(g.n_x) >= 64.0 * std::sqrt(static_cast<double>(k)));
    }
    CHECK_THROWS(TorusGrid{100, 256}.validate_for(8));   // not a power of two
    CHECK_THROWS(TorusGrid{32, 256}.validate_for(16));   // n_theta below 8k
    CHECK_THROWS(TorusGrid{256, 64}.validate_for(32));   // beam unresolved
}

TEST_CASE("scaling map: isometries on the homogeneous scale") {
    // test profile: offset complex Gaussian, spectrum width ~ 1.4
    auto w_of = [](double z) {
        return std::exp(-z * z / (2 * 0.49)) * std::exp(cplx(0, 0.8 * z));
    };
    for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
        const int n = 1024;
        // z grid: the x grid stretched by h^{-1/2}
        LineGrid xg{n, -kPi, 2.0 * kPi / n};
        LineGrid zg{n, xg.origin / std::sqrt(h), xg.spacing / std::sqrt(h)};
        std::vector<cplx> w(n);
        for (int i = 0; i < n; ++i) w[i] = w_of(zg.origin + i * zg.spacing);

        for (double s : {0.0, 1.0}) {
            auto out = rescale(w, zg, h, s, /*forward=*/true, xg);
            for (double r : {0.0, 1.0}) {
                const double lhs = line_hr_norm(out, xg.spacing, r);
                const double rhs = std::pow(h, (s - r) / 2.0) * line_hr_norm(w, zg.spacing, r);
                CHECK(std::abs(lhs / rhs - 1.0) <= 1e-8);
            }
            // forward then inverse returns the samples
            auto back = rescale(out, xg, h, s, /*forward=*/false, zg);
            double worst = 0.0;
            for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(back[i] - w[i]));
            CHECK(worst <= 1e-8);
        }
    }
}

TEST_CASE("scaling map guards against aliasing") {
    const int n = 256;
    LineGrid zg{n, -8.0, 16.0 / n};
    std::vector<cplx> w(n);
    for (int i = 0; i < n; ++i) {
        const double z = zg.origin + i * zg.spacing;
        w[i] = std::exp(-z * z / 2.0);
    }
    // a very coarse target cannot hold the h^{-1/2}-stretched band
    LineGrid coarse{16, -kPi, 2.0 * kPi / 16};
    CHECK_THROWS(rescale(w, zg, 1.0 / 64, 0.0, true, coarse));
}

TEST_CASE("quasimode assembly: normalization, phase structure, eigenvalue") {
    const MetricProfile profile = build_profile("paper");
    const WkbSolution sol = default_solution(profile);
    const QuasimodeField field = build_quasimode(sol, 16, profile);

    CHECK(std::abs(field_l2_norm(field) - 1.0) <= 1e-8);
    CHECK(theta_mode_mass_fraction(field) >= 1.0 - 1e-6);

    // |u| carries no theta dependence
    double worst = 0.0;
    for (int j = 0; j < field.grid.n_x; ++j) {
        const double ref = std::abs(field.values[field.idx(0, j)]);
        for (int i = 1; i < field.grid.n_theta; ++i)
            worst = std::max(worst, std::abs(std::abs(field.values[field.idx(i, j)]) - ref));
    }
    CHECK(worst <= 1e-12);

    const AssembledBeam beam = assemble(sol, field.h);
    CHECK(field.lambda == doctest::Approx(beam.lambda).epsilon(1e-14));
    CHECK(field.lambda ==
          doctest::Approx(256.0 * (1.0 + beam.energy / 16.0)).epsilon(1e-14));
    CHECK(field.coupling ==
          doctest::Approx(-std::pow(field.amplitude, 2.0)).epsilon(1e-12));

    CHECK_THROWS(build_quasimode(sol, 4, profile));  // h >= 1/4
}

TEST_CASE("hermite evaluation and the scaling map build the same beam") {
    const MetricProfile profile = build_profile("paper");
    const WkbSolution sol = default_solution(profile);
    const int k = 16;
    const double h = 1.0 / k;
    const QuasimodeField field = build_quasimode(sol, k, profile);
    const AssembledBeam beam = assemble(sol, h);

    const int nx = field.grid.n_x;
    LineGrid xg{nx, -kPi, 2.0 * kPi / nx};
    LineGrid zg{nx, xg.origin / std::sqrt(h), xg.spacing / std::sqrt(h)};
    OscillatorBasis basis(sol.omega, static_cast<int>(beam.coeffs.size()) - 1, 0);
    std::vector<double> z(nx);
    for (int i = 0; i < nx; ++i) z[i] = zg.origin + i * zg.spacing;
    auto phi = basis.eval_series(beam.coeffs, z);
    std::vector<cplx> w(nx);
    for (int i = 0; i < nx; ++i) w[i] = phi[i];
    auto psi = rescale(w, zg, h, 0.0, true, xg);

    // compare against the x-profile of the stored field (theta = 0 row)
    double scale = 0.0;
    for (int j = 0; j < nx; ++j) scale = std::max(scale, std::abs(psi[j]));
    double worst = 0.0;
    for (int j = 0; j < nx; ++j) {
        // field x-index j corresponds to x = j dx; psi is sampled on [-pi, pi)
        const int jx = (j + nx / 2) % nx;
        const cplx a = psi[j] / (field.amplitude);
        const cplx b = field.values[field.idx(0, jx)];
        worst = std::max(worst, std::abs(a - b) / scale);
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("flat linear mode is an exact stationary point") {
    const MetricProfile flat = build_profile("flat");
    QuasimodeField field;
    field.grid = TorusGrid{64, 64};
    field.k = 6;
    field.h = 1.0 / 6.0;
    field.lambda = 36.0;
    field.p = 2.0;
    field.coupling = 0.0;
    field.amplitude = 1.0;
    field.values.resize(field.grid.size());
    const double amp = 1.0 / (2.0 * kPi);
    for (int i = 0; i < field.grid.n_theta; ++i)
        for (int j = 0; j < field.grid.n_x; ++j)
            field.values[field.idx(i, j)] =
                amp * std::exp(cplx(0, 6.0 * field.grid.theta(i)));
    CHECK(std::abs(field_l2_norm(field) - 1.0) <= 1e-12);
    const Diagnostics d = residual(field, flat);
    CHECK(d.residual_l2 <= 1e-10);
}

TEST_CASE("stationary residual decays at the construction rate") {
    const MetricProfile profile = build_profile("paper");

    SUBCASE("geometric operator, one correction") {
        const WkbSolution sol = default_solution(profile, 1);
        std::vector<std::pair<double, double>> pts;
        for (int k : {8, 16, 32, 64}) {
            const QuasimodeField f = build_quasimode(sol, k, profile);
            pts.emplace_back(f.h, residual(f, profile, PotentialMode::geometric).reduced_residual);
        }
        CHECK(fit_slope(pts).slope >= 0.7);
    }

    SUBCASE("quadratic normal form isolates the hierarchy order") {
        for (int n_terms : {1, 3}) {
            const WkbSolution sol = default_solution(profile, n_terms);
            std::vector<std::pair<double, double>> pts;
            for (int k : {8, 16, 32, 64}) {
                const QuasimodeField f = build_quasimode(sol, k, profile);
                pts.emplace_back(f.h, residual(f, profile, PotentialMode::toy).reduced_residual);
            }
            CHECK(fit_slope(pts).slope >= (n_terms + 1) * 0.5 - 0.3);
        }
    }
}

TEST_CASE("focusing sign and fractional powers keep the residual scaling") {
    const MetricProfile profile = build_profile("paper");
    struct Case {
        double p;
        int sigma;
    };
    for (const Case c : {Case{2.0, -1}, Case{1.5, 1}}) {
        WkbConfig cfg;
        cfg.p = c.p;
        cfg.sigma = c.sigma;
        cfg.n_terms = 1;
        cfg.omega = profile.omega();
        OscillatorBasis basis(cfg.omega, cfg.n_max, 4);
        const WkbSolution sol = solve_hierarchy(cfg, basis);
        std::vector<std::pair<double, double>> pts;
        for (int k : {8, 16, 32}) {
            const QuasimodeField f = build_quasimode(sol, k, profile);
            CHECK(f.coupling * c.sigma < 0.0);  // normalization keeps the sign flip
            pts.emplace_back(f.h, residual(f, profile).reduced_residual);
        }
        CHECK(fit_slope(pts).slope >= std::min(2.0 * sol.q, 1.0) - 0.3);
    }
}

TEST_CASE("a sampled profile drives the same diagnostics as the analytic one") {
    const MetricProfile analytic = build_profile("paper");
    std::vector<double> samples(256);
    for (int i = 0; i < 256; ++i) samples[i] = analytic.A(2.0 * kPi * i / 256);
    const MetricProfile sampled = MetricProfile::from_samples(samples);

    WkbConfig cfg;
    cfg.omega = sampled.omega();
    OscillatorBasis basis(cfg.omega, cfg.n_max, 4);
    const WkbSolution sol = solve_hierarchy(cfg, basis);
    const QuasimodeField f1 = build_quasimode(sol, 16, analytic);
    const QuasimodeField f2 = build_quasimode(sol, 16, sampled);
    const double r1 = residual(f1, analytic).reduced_residual;
    const double r2 = residual(f2, sampled).reduced_residual;
    CHECK(std::abs(r1 - r2) <= 1e-6 * std::max(r1, r2) + 1e-12);
}

TEST_CASE("localization of the beam") {
    const MetricProfile profile = build_profile("paper");
    const WkbSolution sol = default_solution(profile);

    SUBCASE("wide tubes hold essentially all mass") {
        for (int k : {8, 16, 32}) {
            const QuasimodeField f = build_quasimode(sol, k, profile);
            CHECK(localization(f, 0.45).tube_mass_out <= 0.01);
        }
    }

    SUBCASE("sobolev norms scale like h^{-r}") {
        std::vector<std::pair<double, double>> h1, h2;
        std::vector<double> h1v;
        for (int k : {8, 16, 32, 64}) {
            const QuasimodeField f = build_quasimode(sol, k, profile);
            const Diagnostics d = localization(f, 0.1);
            CHECK(std::abs(d.hr_norms.at(0) - 1.0) <= 1e-8);
            h1.emplace_back(f.h, d.hr_norms.at(1));
            h2.emplace_back(f.h, d.hr_norms.at(2));
            h1v.push_back(d.hr_norms.at(1));
        }
        CHECK(std::abs(fit_slope(h1).slope + 1.0) <= 0.1);
        CHECK(std::abs(fit_slope(h2).slope + 2.0) <= 0.1);
        // consecutive doublings of k double the H1 norm within 10%
        for (std::size_t i = 0; i + 1 < h1v.size(); ++i)
            CHECK(std::abs(h1v[i + 1] / h1v[i] / 2.0 - 1.0) <= 0.1);
    }

    SUBCASE("delta outside (0, 1/2) is rejected") {
        const QuasimodeField f = build_quasimode(sol, 8, profile);
        CHECK_THROWS(localization(f, 0.0));
        CHECK_THROWS(localization(f, 0.5));
    }
}
