#include "beamlab/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>

namespace beamlab {

namespace {

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

struct Plan {
    fftw_plan p;
    explicit Plan(fftw_plan plan) : p(plan) {}
    ~Plan() {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(p);
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
};

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

void run_1d(cplx* data, int n, int sign) {
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        plan = fftw_plan_dft_1d(n, as_fftw(data), as_fftw(data), sign, FFTW_ESTIMATE);
    }
    Plan holder(plan);
    fftw_execute(plan);
}

void run_many(cplx* data, int n, int howmany, int stride, int dist, int sign) {
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        plan = fftw_plan_many_dft(1, &n, howmany, as_fftw(data), nullptr, stride, dist,
                                  as_fftw(data), nullptr, stride, dist, sign, FFTW_ESTIMATE);
    }
    Plan holder(plan);
    fftw_execute(plan);
}

void scale(cplx* data, long count, double s) {
    for (long i = 0; i < count; ++i) data[i] *= s;
}

}  // namespace

void fft_forward(cplx* data, int n) { run_1d(data, n, FFTW_FORWARD); }

void fft_inverse(cplx* data, int n) {
    run_1d(data, n, FFTW_BACKWARD);
    scale(data, n, 1.0 / n);
}

void fft_rows_forward(cplx* data, int n_rows, int n_cols) {
    run_many(data, n_cols, n_rows, 1, n_cols, FFTW_FORWARD);
}

void fft_rows_inverse(cplx* data, int n_rows, int n_cols) {
    run_many(data, n_cols, n_rows, 1, n_cols, FFTW_BACKWARD);
    scale(data, static_cast<long>(n_rows) * n_cols, 1.0 / n_cols);
}

void fft_cols_forward(cplx* data, int n_rows, int n_cols) {
    run_many(data, n_rows, n_cols, n_cols, 1, FFTW_FORWARD);
}

void fft_cols_inverse(cplx* data, int n_rows, int n_cols) {
    run_many(data, n_rows, n_cols, n_cols, 1, FFTW_BACKWARD);
    scale(data, static_cast<long>(n_rows) * n_cols, 1.0 / n_rows);
}

std::vector<cplx> trig_interpolate(const std::vector<cplx>& w, double origin,
                                   double spacing,
                                   const std::vector<double>& points) {
    const int n = static_cast<int>(w.size());
    if (n == 0) throw std::invalid_argument("trig_interpolate: empty input");
    std::vector<cplx> spec(w);
    fft_forward(spec.data(), n);
    const double period = n * spacing;
    const double two_pi = 2.0 * 3.14159265358979323846;
    std::vector<cplx> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        // position relative to the sample grid, in grid units
        const double s = (points[i] - origin) / period;
        cplx acc(0.0, 0.0);
        for (int m = 0; m < n; ++m) {
            const int f = fourier_index(m, n);
            const double phase = two_pi * f * s;
            acc += spec[m] * cplx(std::cos(phase), std::sin(phase));
        }
        // unmatched Nyquist bin of even n: split symmetrically
        if (n % 2 == 0) {
            const double phase = two_pi * (n / 2) * s;
            // spec[n/2] was counted with frequency +n/2 above; average with -n/2
            acc += spec[n / 2] * (cplx(std::cos(phase), -std::sin(phase)) -
                                  cplx(std::cos(phase), std::sin(phase))) * 0.5;
        }
        out[i] = acc / static_cast<double>(n);
    }
    return out;
}

double tail_fraction(const std::vector<cplx>& w) {
    const int n = static_cast<int>(w.size());
    std::vector<cplx> spec(w);
    fft_forward(spec.data(), n);
    double total = 0.0, tail = 0.0;
    for (int m = 0; m < n; ++m) {
        const double e = std::norm(spec[m]);
        total += e;
        if (std::abs(fourier_index(m, n)) > n / 4) tail += e;
    }
    return total > 0.0 ? tail / total : 0.0;
}

}  // namespace beamlab
