#ifndef BEAMLAB_GEOMETRY_HPP
#define BEAMLAB_GEOMETRY_HPP

#include <string>
#include <vector>

namespace beamlab {

/** Warp profile A(x) of the surface of revolution
 * ds^2 = dx^2 + A^2(x) dtheta^2, with derivative evaluators and the
 * Taylor data of the effective potential at the equator x = 0.
 *
 * The equator is an elliptic closed geodesic when A has a
 * nondegenerate maximum at x = 0, i.e. c2 = (A^{-2})''(0)/2 > 0; the
 * transverse oscillator frequency is omega = sqrt(c2). The "flat"
 * preset (A == 1) is intentionally non-elliptic and only valid for
 * linear/propagator checks. Immutable after construction.
 */
class MetricProfile {
  public:
    static MetricProfile preset(const std::string& name);
    /** Uniform samples of A on [0, 2pi), differentiated spectrally. */
    static MetricProfile from_samples(std::vector<double> samples);
    /** Two-column CSV: x, A(x) on a uniform ascending x grid. */
    static MetricProfile from_csv(const std::string& path);

    double A(double x) const;
    double A_prime(double x) const;
    double A_second(double x) const;
    double inv_A2(double x) const;
    /** Conjugation potential V1 = A''/(2A) - (A')^2/(4A^2). */
    double v1(double x) const;
    /** Mode-k effective potential k^2 A^{-2}(x) + V1(x). */
    double effective_potential(int k, double x) const;

    double c2() const { return c2_; }
    double omega() const { return omega_; }
    double v1_at_0() const { return v1_0_; }
    bool elliptic() const { return elliptic_; }
    const std::string& name() const { return name_; }

  private:
    MetricProfile() = default;
    void finalize(bool require_elliptic);

    enum class Kind { paper, flat, sampled } kind_ = Kind::paper;
    std::string name_;
    double c2_ = 0.0;
    double omega_ = 0.0;
    double v1_0_ = 0.0;
    bool elliptic_ = false;
    // sampled profiles: Fourier data of A on [0, 2pi)
    std::vector<double> samples_;
    std::vector<double> fourier_cos_, fourier_sin_;  // one-sided coefficients
};

/** Builds a named preset ("paper" or "flat") or, with a CSV path,
 * a user profile; validates positivity, A'(0) = 0 and ellipticity
 * (presets excepted where noted above). */
MetricProfile build_profile(const std::string& preset_or_csv);

}  // namespace beamlab

#endif
