#include <doctest.h>

#include <cmath>
#include <numbers>

#include "beamlab/fft.hpp"

using namespace beamlab;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("forward/inverse round trip") {
    const int n = 64;
    std::vector<cplx> v(n), orig;
    for (int i = 0; i < n; ++i) v[i] = cplx(std::sin(0.3 * i), std::cos(0.11 * i * i));
    orig = v;
    fft_forward(v.data(), n);
    fft_inverse(v.data(), n);
    for (int i = 0; i < n; ++i) CHECK(std::abs(v[i] - orig[i]) <= 1e-13);
}

TEST_CASE("row and column transforms act on the right axis") {
    const int rows = 4, cols = 8;
    std::vector<cplx> v(rows * cols);
    // single x-harmonic in each row
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            v[i * cols + j] = std::exp(cplx(0, 2.0 * kPi * 3 * j / cols)) * double(i + 1);
    auto w = v;
    fft_rows_forward(w.data(), rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            const double expect = (j == 3) ? cols * (i + 1.0) : 0.0;
            CHECK(std::abs(w[i * cols + j] - expect) <= 1e-12);
        }
    fft_rows_inverse(w.data(), rows, cols);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(w[i] - v[i]) <= 1e-12);

    fft_cols_forward(w.data(), rows, cols);
    fft_cols_inverse(w.data(), rows, cols);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(w[i] - v[i]) <= 1e-12);
}

TEST_CASE("trigonometric interpolation is exact for band-limited data") {
    const int n = 32;
    const double origin = -kPi, spacing = 2.0 * kPi / n;
    std::vector<cplx> v(n);
    auto f = [](double x) {
        return cplx(std::cos(3 * x) + 0.5 * std::sin(x), 0.25 * std::cos(5 * x));
    };
    for (int i = 0; i < n; ++i) v[i] = f(origin + i * spacing);
    std::vector<double> pts = {-2.31, -0.4, 0.123, 1.7, 2.9};
    auto out = trig_interpolate(v, origin, spacing, pts);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(std::abs(out[i] - f(pts[i])) <= 1e-12);
}

TEST_CASE("tail fraction flags unresolved data") {
    const int n = 64;
    std::vector<cplx> smooth(n), rough(n);
    for (int i = 0; i < n; ++i) {
        const double x = 2.0 * kPi * i / n;
        smooth[i] = std::exp(cplx(0, 2 * x));
        rough[i] = std::exp(cplx(0, (n / 2 - 1) * x));
    }
    CHECK(tail_fraction(smooth) <= 1e-15);
    CHECK(tail_fraction(rough) >= 0.99);
}
