#include "beamlab/geometry.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "beamlab/fft.hpp"

namespace beamlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMinWarp = 1e-6;

// paper preset: A^2 = (1 + cos^2 x)/2
double paper_B(double x) { return 0.5 * (1.0 + std::cos(x) * std::cos(x)); }
double paper_Bp(double x) { return -0.5 * std::sin(2.0 * x); }
double paper_Bpp(double x) { return -std::cos(2.0 * x); }

}  // namespace

MetricProfile MetricProfile::preset(const std::string& name) {
    MetricProfile p;
    p.name_ = name;
    if (name == "paper") {
        p.kind_ = Kind::paper;
        p.c2_ = 0.5;
        p.omega_ = std::sqrt(0.5);
        p.v1_0_ = -0.25;
        p.elliptic_ = true;
    } else if (name == "flat") {
        p.kind_ = Kind::flat;
        p.c2_ = 0.0;
        p.omega_ = 0.0;
        p.v1_0_ = 0.0;
        p.elliptic_ = false;
    } else {
        throw std::invalid_argument("unknown metric preset '" + name + "'");
    }
    p.finalize(/*require_elliptic=*/false);
    return p;
}

MetricProfile MetricProfile::from_samples(std::vector<double> samples) {
    if (samples.size() < 16)
        throw std::invalid_argument("metric profile: need at least 16 samples");
    MetricProfile p;
    p.kind_ = Kind::sampled;
    p.name_ = "sampled";
    p.samples_ = std::move(samples);

    const int n = static_cast<int>(p.samples_.size());
    std::vector<cplx> spec(n);
    for (int i = 0; i < n; ++i) spec[i] = p.samples_[i];
    fft_forward(spec.data(), n);
    // one-sided real series A(x) = a0 + sum_m (a_m cos mx + b_m sin mx)
    const int half = n / 2;
    p.fourier_cos_.assign(half + 1, 0.0);
    p.fourier_sin_.assign(half + 1, 0.0);
    p.fourier_cos_[0] = spec[0].real() / n;
    for (int m = 1; m < half; ++m) {
        p.fourier_cos_[m] = 2.0 * spec[m].real() / n;
        p.fourier_sin_[m] = -2.0 * spec[m].imag() / n;
    }
    p.fourier_cos_[half] = spec[half].real() / n;  // Nyquist, cosine only

    // Taylor data of the effective potential at x = 0, spectrally:
    // c2 = (A^{-2})''(0) / 2
    auto inv_a2_second = [&p](double x) {
        const double a = p.A(x), ap = p.A_prime(x), app = p.A_second(x);
        // (A^{-2})'' = 6 A^{-4} (A')^2 - 2 A^{-3} A''
        return 6.0 * std::pow(a, -4.0) * ap * ap - 2.0 * std::pow(a, -3.0) * app;
    };
    p.c2_ = 0.5 * inv_a2_second(0.0);
    p.omega_ = p.c2_ > 0.0 ? std::sqrt(p.c2_) : 0.0;
    p.v1_0_ = p.v1(0.0);
    p.elliptic_ = p.c2_ > 0.0;
    p.finalize(/*require_elliptic=*/true);
    return p;
}

MetricProfile MetricProfile::from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("metric profile: cannot open '" + path + "'");
    std::vector<double> xs, as;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string fx, fa;
        if (!std::getline(ss, fx, ',') || !std::getline(ss, fa, ',')) continue;
        xs.push_back(std::stod(fx));
        as.push_back(std::stod(fa));
    }
    if (xs.size() < 16) throw std::runtime_error("metric profile: too few CSV rows");
    const double dx = xs[1] - xs[0];
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (std::abs(xs[i] - xs[0] - static_cast<double>(i) * dx) > 1e-9)
            throw std::runtime_error("metric profile: CSV x grid is not uniform");
    if (std::abs(xs.size() * dx - 2.0 * kPi) > 1e-6)
        throw std::runtime_error("metric profile: CSV grid must cover [0, 2pi) uniformly");
    if (std::abs(xs[0]) > 1e-12)
        throw std::runtime_error("metric profile: CSV grid must start at x = 0");
    return from_samples(std::move(as));
}

void MetricProfile::finalize(bool require_elliptic) {
    const int n_check = 4096;
    for (int i = 0; i < n_check; ++i) {
        const double x = 2.0 * kPi * i / n_check;
        if (!(A(x) >= kMinWarp))
            throw std::invalid_argument("metric profile: A(x) not bounded below by 1e-6");
    }
    if (std::abs(A_prime(0.0)) > 1e-10)
        throw std::invalid_argument("metric profile: x = 0 is not a critical point of A");
    if (require_elliptic && !(c2_ > 0.0))
        throw std::invalid_argument(
            "metric profile: geodesic at x = 0 is not elliptic (c2 <= 0)");
}

double MetricProfile::A(double x) const {
    switch (kind_) {
        case Kind::paper: return std::sqrt(paper_B(x));
        case Kind::flat: return 1.0;
        case Kind::sampled: {
            double s = fourier_cos_[0];
            for (std::size_t m = 1; m < fourier_cos_.size(); ++m)
                s += fourier_cos_[m] * std::cos(m * x) + fourier_sin_[m] * std::sin(m * x);
            return s;
        }
    }
    return 1.0;
}

double MetricProfile::A_prime(double x) const {
    switch (kind_) {
        case Kind::paper: return paper_Bp(x) / (2.0 * A(x));
        case Kind::flat: return 0.0;
        case Kind::sampled: {
            double s = 0.0;
            for (std::size_t m = 1; m < fourier_cos_.size(); ++m)
                s += m * (-fourier_cos_[m] * std::sin(m * x) + fourier_sin_[m] * std::cos(m * x));
            return s;
        }
    }
    return 0.0;
}

double MetricProfile::A_second(double x) const {
    switch (kind_) {
        case Kind::paper: {
            const double a = A(x);
            const double bp = paper_Bp(x);
            return paper_Bpp(x) / (2.0 * a) - bp * bp / (4.0 * a * a * a);
        }
        case Kind::flat: return 0.0;
        case Kind::sampled: {
            double s = 0.0;
            for (std::size_t m = 1; m < fourier_cos_.size(); ++m)
                s -= static_cast<double>(m) * m *
                     (fourier_cos_[m] * std::cos(m * x) + fourier_sin_[m] * std::sin(m * x));
            return s;
        }
    }
    return 0.0;
}

double MetricProfile::inv_A2(double x) const {
    const double a = A(x);
    return 1.0 / (a * a);
}

double MetricProfile::v1(double x) const {
    const double a = A(x), ap = A_prime(x), app = A_second(x);
    return 0.5 * app / a - 0.25 * ap * ap / (a * a);
}

double MetricProfile::effective_potential(int k, double x) const {
    if (k < 1) throw std::invalid_argument("effective_potential: k must be >= 1");
    return static_cast<double>(k) * k * inv_A2(x) + v1(x);
}

MetricProfile build_profile(const std::string& preset_or_csv) {
    if (preset_or_csv == "paper" || preset_or_csv == "flat")
        return MetricProfile::preset(preset_or_csv);
    return MetricProfile::from_csv(preset_or_csv);
}

}  // namespace beamlab
