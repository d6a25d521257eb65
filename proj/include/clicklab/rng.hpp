#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace clicklab {

// Deterministic random source. The engine is std::mt19937_64 but all
// distributions are implemented here by inverse transform so that a given
// seed produces the same stream on every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // uniform in [0, 1), 53-bit resolution
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // uniform in [0, 1], never exactly 0
    double uniform_nonzero() {
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double exponential(double mean) {
        return -mean * std::log(uniform_nonzero());
    }

    double gaussian(double sigma) {
        if (have_cached_) {
            have_cached_ = false;
            return cached_ * sigma;
        }
        double u1 = uniform_nonzero();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double phi = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(phi);
        have_cached_ = true;
        return r * std::cos(phi) * sigma;
    }

    // Gaussian restricted to |x| <= max_abs_sigmas * sigma (resampled, so the
    // shape inside the bounds is preserved). Keeps jitter excursions bounded.
    double gaussian_truncated(double sigma, double max_abs_sigmas = 3.0) {
        if (sigma <= 0.0) return 0.0;
        for (int i = 0; i < 64; ++i) {
            double x = gaussian(1.0);
            if (std::abs(x) <= max_abs_sigmas) return x * sigma;
        }
        return 0.0;  // practically unreachable
    }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform() < p;
    }

    // Exact inversion for small means; Gaussian approximation above. The
    // large-mean path is only used for bulk event counts where the relative
    // error of the approximation is far below sampling noise.
    std::uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean < 64.0) {
            double l = std::exp(-mean);
            std::uint64_t k = 0;
            double p = 1.0;
            do {
                ++k;
                p *= uniform();
            } while (p > l);
            return k - 1;
        }
        double x = mean + std::sqrt(mean) * gaussian(1.0);
        if (x < 0.0) return 0;
        return static_cast<std::uint64_t>(std::llround(x));
    }

    // uniform integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) return 0;
        std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

// Derives independent per-stage seeds from one master seed (splitmix64 mix).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stage) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stage + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}
