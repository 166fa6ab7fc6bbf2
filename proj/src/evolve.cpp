#include "beamlab/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace beamlab {

namespace {

constexpr double kPi = std::numbers::pi;

struct PhaseTables {
    std::vector<cplx> kinetic;    // per x frequency, half step
    std::vector<cplx> potential;  // per (theta frequency, x), half step
};

PhaseTables make_tables(const TorusGrid& grid, double dt, const MetricProfile& profile,
                        PotentialMode mode) {
    PhaseTables t;
    t.kinetic.resize(grid.n_x);
    for (int j = 0; j < grid.n_x; ++j) {
        const double m = fourier_index(j, grid.n_x);
        const double phase = -m * m * 0.5 * dt;
        t.kinetic[j] = cplx(std::cos(phase), std::sin(phase));
    }
    std::vector<double> inv_a2(grid.n_x), v1(grid.n_x);
    for (int j = 0; j < grid.n_x; ++j) {
        const double x = grid.x(j);
        if (mode == PotentialMode::geometric) {
            inv_a2[j] = profile.inv_A2(x);
            v1[j] = profile.v1(x);
        } else {
            const double w = wrap_angle(x);
            inv_a2[j] = 1.0 + profile.c2() * w * w;
            v1[j] = 0.0;
        }
    }
    t.potential.resize(grid.size());
    for (int i = 0; i < grid.n_theta; ++i) {
        const double j2 = static_cast<double>(fourier_index(i, grid.n_theta)) *
                          fourier_index(i, grid.n_theta);
        for (int j = 0; j < grid.n_x; ++j) {
            const double phase = -(j2 * inv_a2[j] + v1[j]) * 0.5 * dt;
            t.potential[static_cast<std::size_t>(i) * grid.n_x + j] =
                cplx(std::cos(phase), std::sin(phase));
        }
    }
    return t;
}

void half_kinetic(std::vector<cplx>& v, const TorusGrid& grid, const PhaseTables& t) {
    fft_rows_forward(v.data(), grid.n_theta, grid.n_x);
    for (int i = 0; i < grid.n_theta; ++i) {
        cplx* row = v.data() + static_cast<std::size_t>(i) * grid.n_x;
        for (int j = 0; j < grid.n_x; ++j) row[j] *= t.kinetic[j];
    }
    fft_rows_inverse(v.data(), grid.n_theta, grid.n_x);
}

void half_potential(std::vector<cplx>& v, const TorusGrid& grid, const PhaseTables& t) {
    fft_cols_forward(v.data(), grid.n_theta, grid.n_x);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= t.potential[i];
    fft_cols_inverse(v.data(), grid.n_theta, grid.n_x);
}

void nonlinear_rotation(std::vector<cplx>& v, double dt, double p, double coupling) {
    if (coupling == 0.0) return;
    for (cplx& u : v) {
        const double a = std::abs(u);
        const double phase = -coupling * std::pow(a, p) * dt;
        u *= cplx(std::cos(phase), std::sin(phase));
    }
}

void step_with_tables(std::vector<cplx>& v, const TorusGrid& grid, const PhaseTables& t,
                      double dt, double p, double coupling) {
    half_kinetic(v, grid, t);
    half_potential(v, grid, t);
    nonlinear_rotation(v, dt, p, coupling);
    half_potential(v, grid, t);
    half_kinetic(v, grid, t);
}

double grid_mass(const std::vector<cplx>& v, const TorusGrid& grid) {
    double acc = 0.0;
    for (const cplx& u : v) acc += std::norm(u);
    return acc * grid.cell();
}

// top-octave spectral mass fraction along either axis
double spectral_tail(const std::vector<cplx>& v, const TorusGrid& grid) {
    std::vector<cplx> spec(v);
    fft_rows_forward(spec.data(), grid.n_theta, grid.n_x);
    fft_cols_forward(spec.data(), grid.n_theta, grid.n_x);
    double total = 0.0, tail = 0.0;
    for (int i = 0; i < grid.n_theta; ++i)
        for (int j = 0; j < grid.n_x; ++j) {
            const double e = std::norm(spec[static_cast<std::size_t>(i) * grid.n_x + j]);
            total += e;
            if (std::abs(fourier_index(i, grid.n_theta)) > grid.n_theta / 4 ||
                std::abs(fourier_index(j, grid.n_x)) > grid.n_x / 4)
                tail += e;
        }
    return total > 0.0 ? tail / total : 0.0;
}

double tube_mass_out_of(const std::vector<cplx>& v, const TorusGrid& grid, double h,
                        double delta) {
    const double radius = std::pow(h, 0.5 - delta);
    double inside = 0.0, outside = 0.0;
    for (int j = 0; j < grid.n_x; ++j) {
        double col = 0.0;
        for (int i = 0; i < grid.n_theta; ++i)
            col += std::norm(v[static_cast<std::size_t>(i) * grid.n_x + j]);
        (std::abs(wrap_angle(grid.x(j))) > radius ? outside : inside) += col;
    }
    return outside / std::max(inside + outside, 1e-300);
}

}  // namespace

double horizon_time(HorizonLaw law, double h, double p, double c0, double eps) {
    switch (law) {
        case HorizonLaw::power: return std::pow(h, p);
        case HorizonLaw::power_eps: return std::pow(h, 1.0 + eps);
        case HorizonLaw::log: return c0 * std::pow(h, p / 4.0) * std::log(1.0 / h);
    }
    return 0.0;
}

void EvolveConfig::validate(double max_potential) const {
    if (!(dt > 0.0)) throw std::invalid_argument("evolve: dt must be positive");
    if (t_final < 0.0) throw std::invalid_argument("evolve: t_final must be >= 0");
    if (record_every < 1) throw std::invalid_argument("evolve: record_every must be >= 1");
    if (dt * max_potential > 0.5)
        throw std::invalid_argument("evolve: dt too large for the potential phase "
                                    "(dt * max|V| > 0.5)");
    if (t_final / dt > 1e7)
        throw std::invalid_argument("evolve: more than 1e7 steps requested");
    if (hkh_order < 0 || hkh_order % 2 != 0)
        throw std::invalid_argument("evolve: hkh_order must be a nonnegative even integer");
}

void step(std::vector<cplx>& values, const TorusGrid& grid, double dt,
          const MetricProfile& profile, PotentialMode mode, double p, double coupling) {
    const PhaseTables t = make_tables(grid, dt, profile, mode);
    step_with_tables(values, grid, t, dt, p, coupling);
}

EvolutionTrace run(const QuasimodeField& initial, const EvolveConfig& config_in,
                   const MetricProfile& profile) {
    EvolveConfig config = config_in;
    if (config.dt == 0.0) config.dt = 0.1 * initial.h * initial.h;

    // phase-resolution guard on the effective potential of the active mode
    double max_pot = 0.0;
    for (int j = 0; j < initial.grid.n_x; ++j) {
        const double x = initial.grid.x(j);
        const double ia2 = config.mode == PotentialMode::geometric
                               ? profile.inv_A2(x)
                               : 1.0 + profile.c2() * wrap_angle(x) * wrap_angle(x);
        const double v1 = config.mode == PotentialMode::geometric ? profile.v1(x) : 0.0;
        const double kk = static_cast<double>(initial.k) * initial.k;
        max_pot = std::max(max_pot, std::abs(kk * ia2 + v1));
    }
    config.validate(max_pot);

    const long n_steps = config.t_final > 0.0
                             ? std::lround(std::ceil(config.t_final / config.dt - 1e-12))
                             : 0;
    const double dt = n_steps > 0 ? config.t_final / static_cast<double>(n_steps) : config.dt;

    const PhaseTables tables = make_tables(initial.grid, dt, profile, config.mode);
    std::vector<cplx> v(initial.values);

    EvolutionTrace trace;
    const double mass0 = grid_mass(v, initial.grid);
    auto record = [&](long step_index) {
        const double t = step_index * dt;
        trace.times.push_back(t);
        const double m = grid_mass(v, initial.grid);
        trace.mass.push_back(m);
        trace.tube_mass_out.push_back(
            tube_mass_out_of(v, initial.grid, initial.h, config.delta));
        const double phase = -initial.lambda * t;
        const cplx rot(std::cos(phase), std::sin(phase));
        double acc = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            acc += std::norm(v[i] - rot * initial.values[i]);
        trace.dist_to_app.push_back(std::sqrt(acc * initial.grid.cell()));
        trace.hkh_norm.push_back(hkh_norm(v, initial.grid, initial.h, config.hkh_order));
        if (!std::isfinite(m) || std::abs(m / mass0 - 1.0) > 1e-9)
            throw std::runtime_error("evolve: mass drift guard tripped at t = " +
                                     std::to_string(t));
        if (spectral_tail(v, initial.grid) > 1e-8)
            throw std::runtime_error("evolve: aliasing guard tripped at t = " +
                                     std::to_string(t));
    };

    record(0);
    for (long s = 1; s <= n_steps; ++s) {
        step_with_tables(v, initial.grid, tables, dt, initial.p, initial.coupling);
        if (s % config.record_every == 0 || s == n_steps) record(s);
    }
    return trace;
}

double hkh_norm(const std::vector<cplx>& values, const TorusGrid& grid, double h, int order) {
    if (order < 0 || order % 2 != 0)
        throw std::invalid_argument("hkh_norm: order must be a nonnegative even integer");
    std::vector<cplx> spec(values);
    fft_rows_forward(spec.data(), grid.n_theta, grid.n_x);
    fft_cols_forward(spec.data(), grid.n_theta, grid.n_x);
    const double scale = 1.0 / (static_cast<double>(grid.n_theta) * grid.n_x);
    double acc = 0.0;
    for (int i = 0; i < grid.n_theta; ++i) {
        const double j2 = static_cast<double>(fourier_index(i, grid.n_theta)) *
                          fourier_index(i, grid.n_theta);
        for (int j = 0; j < grid.n_x; ++j) {
            const double m2 = static_cast<double>(fourier_index(j, grid.n_x)) *
                              fourier_index(j, grid.n_x);
            const double mult = std::pow(1.0 + h * h * (j2 + m2), order / 2);
            acc += mult * mult *
                   std::norm(spec[static_cast<std::size_t>(i) * grid.n_x + j] * scale);
        }
    }
    return 2.0 * kPi * std::sqrt(acc);
}

std::vector<HorizonPoint> horizon_sweep(const WkbSolution& solution,
                                        const MetricProfile& profile,
                                        const std::vector<int>& k_list, HorizonLaw law,
                                        const EvolveConfig& base, double c0, double eps,
                                        int jobs) {
    if (k_list.size() < 3)
        throw std::invalid_argument("horizon_sweep: need at least 3 values of k");
    if (!std::is_sorted(k_list.begin(), k_list.end()))
        throw std::invalid_argument("horizon_sweep: k_list must be ascending");

    std::vector<HorizonPoint> out(k_list.size());
    std::vector<std::exception_ptr> errors(k_list.size());
    auto work = [&](std::size_t idx) {
        try {
            const int k = k_list[idx];
            const double h = 1.0 / k;
            QuasimodeField field = build_quasimode(solution, k, profile);
            EvolveConfig cfg = base;
            cfg.t_final = horizon_time(law, h, solution.p, c0, eps);
            cfg.dt = cfg.dt == 0.0 ? 0.1 * h * h : cfg.dt;
            EvolutionTrace tr = run(field, cfg, profile);
            HorizonPoint pt;
            pt.k = k;
            pt.h = h;
            pt.t_final = cfg.t_final;
            pt.initial_tube_mass_out = tr.tube_mass_out.front();
            for (std::size_t i = 0; i < tr.times.size(); ++i) {
                pt.sup_dist = std::max(pt.sup_dist, tr.dist_to_app[i]);
                pt.sup_tube_mass_out = std::max(pt.sup_tube_mass_out, tr.tube_mass_out[i]);
            }
            out[idx] = pt;
        } catch (...) {
            errors[idx] = std::current_exception();
        }
    };

    const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(k_list.size())));
    if (n_workers == 1) {
        for (std::size_t i = 0; i < k_list.size(); ++i) work(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int w = 0; w < n_workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < k_list.size();
                     i = next.fetch_add(1))
                    work(i);
            });
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace beamlab
