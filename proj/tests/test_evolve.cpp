#include <doctest.h>

#include <cmath>
#include <numbers>

#include "beamlab/evolve.hpp"
#include "beamlab/slopefit.hpp"

using namespace beamlab;

namespace {
constexpr double kPi = std::numbers::pi;

QuasimodeField plane_wave(int k, int n_theta, int n_x, double coupling, double p = 2.0) {
    QuasimodeField f;
    f.grid = TorusGrid{n_theta, n_x};
    f.k = k;
    f.h = 1.0 / k;
    f.lambda = static_cast<double>(k) * k;
    f.p = p;
    f.coupling = coupling;
    f.amplitude = 1.0;
    f.values.resize(f.grid.size());
    const double amp = 1.0 / (2.0 * kPi);
    for (int i = 0; i < n_theta; ++i)
        for (int j = 0; j < n_x; ++j)
            f.values[f.idx(i, j)] = amp * std::exp(cplx(0, k * f.grid.theta(i)));
    return f;
}

QuasimodeField beam_field(const MetricProfile& profile, int k, int n_terms = 1) {
    WkbConfig cfg;
    cfg.p = 2.0;
    cfg.sigma = 1;
    cfg.n_terms = n_terms;
    cfg.omega = profile.omega();
    OscillatorBasis basis(cfg.omega, cfg.n_max, 4);
    return build_quasimode(solve_hierarchy(cfg, basis), k, profile);
}

double field_distance(const std::vector<cplx>& a, const std::vector<cplx>& b,
                      const TorusGrid& g) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a[i] - b[i]);
    return std::sqrt(acc * g.cell());
}
}  // namespace

TEST_CASE("a flat plane wave acquires exactly the linear phase") {
    const MetricProfile flat = build_profile("flat");
    QuasimodeField f = plane_wave(3, 32, 32, 0.0);
    EvolveConfig cfg;
    cfg.dt = 0.01;
    cfg.t_final = 0.37;
    const EvolutionTrace tr = run(f, cfg, flat);
    // dist_to_app compares against e^{-i k^2 t} u0, which is the exact flow
    for (double d : tr.dist_to_app) CHECK(d <= 1e-9);
    for (double m : tr.mass) CHECK(std::abs(m / tr.mass.front() - 1.0) <= 1e-12);
}

TEST_CASE("a constant field rotates at the nonlinear frequency") {
    const MetricProfile flat = build_profile("flat");
    QuasimodeField f = plane_wave(6, 32, 32, 0.7);
    // constant in space: overwrite with |u| = c everywhere
    const double c = 0.8;
    for (auto& v : f.values) v = c;
    std::vector<cplx> u = f.values;
    const double dt = 0.01;
    const int n_steps = 25;
    for (int s = 0; s < n_steps; ++s)
        step(u, f.grid, dt, flat, PotentialMode::geometric, f.p, f.coupling);
    const cplx expect = c * std::exp(cplx(0, -f.coupling * std::pow(c, f.p) * dt * n_steps));
    for (const cplx& v : u) CHECK(std::abs(v - expect) <= 1e-9);
}

TEST_CASE("each split step conserves mass to round-off") {
    const MetricProfile profile = build_profile("paper");
    QuasimodeField f = beam_field(profile, 8);
    std::vector<cplx> u = f.values;
    const double m0 = field_distance(u, std::vector<cplx>(u.size(), 0.0), f.grid);
    step(u, f.grid, 1e-3, profile, PotentialMode::geometric, f.p, f.coupling);
    const double m1 = field_distance(u, std::vector<cplx>(u.size(), 0.0), f.grid);
    CHECK(std::abs(m1 / m0 - 1.0) <= 1e-12);
}

TEST_CASE("trace bookkeeping at t_final = 0") {
    const MetricProfile profile = build_profile("paper");
    QuasimodeField f = beam_field(profile, 8);
    EvolveConfig cfg;
    cfg.t_final = 0.0;
    const EvolutionTrace tr = run(f, cfg, profile);
    CHECK(tr.times.size() == 1);
    CHECK(tr.dist_to_app.front() == 0.0);
}

TEST_CASE("full horizon run conserves mass to 1e-9") {
    const MetricProfile profile = build_profile("paper");
    QuasimodeField f = beam_field(profile, 16);
    EvolveConfig cfg;
    cfg.t_final = f.h * f.h;
    const EvolutionTrace tr = run(f, cfg, profile);
    for (double m : tr.mass) CHECK(std::abs(m / tr.mass.front() - 1.0) <= 1e-9);
}

TEST_CASE("self-convergence ratio of the symmetric splitting") {
    const MetricProfile profile = build_profile("paper");
    QuasimodeField f = beam_field(profile, 8);
    const double base_dt = 0.1 * f.h * f.h;
    const double T = 40 * base_dt;
    auto final_state = [&](double dt) {
        std::vector<cplx> u = f.values;
        const int n = static_cast<int>(std::lround(T / dt));
        for (int s = 0; s < n; ++s)
            step(u, f.grid, dt, profile, PotentialMode::geometric, f.p, f.coupling);
        return u;
    };
    const auto u1 = final_state(base_dt);
    const auto u2 = final_state(base_dt / 2);
    const auto u4 = final_state(base_dt / 4);
    const double d1 = field_distance(u1, u2, f.grid);
    const double d2 = field_distance(u2, u4, f.grid);
    CHECK(d1 / d2 >= 3.0);
    CHECK(d1 / d2 <= 5.0);
}

TEST_CASE("semiclassical sobolev norm") {
    QuasimodeField f = plane_wave(16, 128, 32, 0.0);
    const double l2 = field_l2_norm(f);

    // single theta mode at h = 1/k: multiplier (1 + h^2 k^2) = 2
    CHECK(hkh_norm(f.values, f.grid, f.h, 2) == doctest::Approx(2.0 * l2).epsilon(1e-12));
    // h -> 0 recovers the plain L2 norm
    CHECK(hkh_norm(f.values, f.grid, 1e-8, 2) == doctest::Approx(l2).epsilon(1e-9));
    CHECK_THROWS(hkh_norm(f.values, f.grid, f.h, 3));

    // the beam stays h-tempered: H2_h norms bounded uniformly in k
    const MetricProfile profile = build_profile("paper");
    for (int k : {8, 16, 32}) {
        QuasimodeField b = beam_field(profile, k);
        CHECK(hkh_norm(b.values, b.grid, b.h, 2) <= 3.0);
    }
}

TEST_CASE("step-size guards") {
    const MetricProfile profile = build_profile("paper");
    QuasimodeField f = beam_field(profile, 16);
    EvolveConfig cfg;
    cfg.dt = 1.0;  // dt * max|V_eff| far above 1/2
    cfg.t_final = 2.0;
    CHECK_THROWS(run(f, cfg, profile));
    EvolveConfig many;
    many.dt = 1e-9;
    many.t_final = 1.0;  // > 1e7 steps
    CHECK_THROWS(run(f, many, profile));
}

TEST_CASE("horizon sweep demands an ascending list of at least three modes") {
    const MetricProfile profile = build_profile("paper");
    WkbConfig cfg;
    cfg.omega = profile.omega();
    OscillatorBasis basis(cfg.omega, cfg.n_max, 4);
    const WkbSolution sol = solve_hierarchy(cfg, basis);
    EvolveConfig base;
    CHECK_THROWS(horizon_sweep(sol, profile, {8, 16}, HorizonLaw::power, base));
    CHECK_THROWS(horizon_sweep(sol, profile, {16, 8, 32}, HorizonLaw::power, base));
}

TEST_CASE("closeness to the stationary evolution improves with k") {
    const MetricProfile profile = build_profile("paper");
    WkbConfig wc;
    wc.omega = profile.omega();
    OscillatorBasis basis(wc.omega, wc.n_max, 4);
    const WkbSolution sol = solve_hierarchy(wc, basis);
    EvolveConfig base;
    const auto rows = horizon_sweep(sol, profile, {8, 16, 32}, HorizonLaw::power, base, 0.1,
                                    0.1, /*jobs=*/2);
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows) {
        pts.emplace_back(r.h, r.sup_dist);
        CHECK(r.sup_tube_mass_out <= 10.0 * r.initial_tube_mass_out);
    }
    CHECK(fit_slope(pts).slope > 0.0);
}

TEST_CASE("p = 1 runs through the fractional path and its own horizon law") {
    const MetricProfile profile = build_profile("paper");
    WkbConfig wc;
    wc.p = 1.0;
    wc.omega = profile.omega();
    OscillatorBasis basis(wc.omega, wc.n_max, 4);
    const WkbSolution sol = solve_hierarchy(wc, basis);
    CHECK(sol.energies[1] == doctest::Approx(-std::sqrt(2.0 / 3.0)).epsilon(1e-10));

    EvolveConfig base;
    base.record_every = 4;
    const auto rows =
        horizon_sweep(sol, profile, {5, 7, 10}, HorizonLaw::power_eps, base, 0.1, 0.1, 2);
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows) {
        CHECK(r.t_final == doctest::Approx(std::pow(r.h, 1.1)).epsilon(1e-12));
        pts.emplace_back(r.h, r.sup_dist);
    }
    CHECK(fit_slope(pts).slope > 0.0);
}

TEST_CASE("log-law horizon still shows improving closeness") {
    const MetricProfile profile = build_profile("paper");
    WkbConfig wc;
    wc.omega = profile.omega();
    OscillatorBasis basis(wc.omega, wc.n_max, 4);
    const WkbSolution sol = solve_hierarchy(wc, basis);
    EvolveConfig base;
    base.record_every = 8;
    const auto rows =
        horizon_sweep(sol, profile, {8, 16, 32}, HorizonLaw::log, base, 0.1, 0.1, 2);
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows) pts.emplace_back(r.h, r.sup_dist);
    CHECK(fit_slope(pts).slope >= 0.4);
}

TEST_CASE("distance growth keeps the exponential-in-time shape") {
    // fit log dist(t) = a + b t over the latter part of a horizon run and
    // require a nonnegative rate, a tight fit, and domination of the data
    const MetricProfile profile = build_profile("paper");
    std::vector<std::pair<double, double>> prefactors;
    for (int k : {8, 16, 32}) {
        QuasimodeField f = beam_field(profile, k);
        EvolveConfig cfg;
        cfg.t_final = f.h * f.h;
        const EvolutionTrace tr = run(f, cfg, profile);
        std::vector<double> ts, ys;
        for (std::size_t i = tr.times.size() / 3; i < tr.times.size(); ++i) {
            if (tr.dist_to_app[i] <= 0.0) continue;
            ts.push_back(tr.times[i]);
            ys.push_back(std::log(tr.dist_to_app[i]));
        }
        REQUIRE(ts.size() >= 4);
        const std::size_t n = ts.size();
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            sx += ts[i];
            sy += ys[i];
            sxx += ts[i] * ts[i];
            sxy += ts[i] * ys[i];
        }
        const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        const double a = (sy - b * sx) / n;
        CHECK(b >= 0.0);
        double rms_resid = 0.0, rms_dev = 0.0, max_resid = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = ys[i] - (a + b * ts[i]);
            rms_resid += r * r;
            rms_dev += (ys[i] - sy / n) * (ys[i] - sy / n);
            max_resid = std::max(max_resid, r);
        }
        CHECK(std::sqrt(rms_resid) <= 0.2 * std::max(std::sqrt(rms_dev), 1.0));
        // lifting the line by its worst residual dominates every sample
        for (std::size_t i = 0; i < n; ++i)
            CHECK(ys[i] <= a + max_resid + b * ts[i] + 1e-12);
        prefactors.emplace_back(f.h, std::exp(a + max_resid));
    }
    // the dominating prefactor improves with a positive power of h
    CHECK(fit_slope(prefactors).slope > 0.0);
}
