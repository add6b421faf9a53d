#pragma once

// Closed-form large-n limit laws for one coordinate of x'(t) = -kappa x + Ax
// with A = n^{-1/2} W:
//
//   iid entries, ones start:        x_1(t) -> N(a(t), sigma(t)) with
//       a(t)     = e^{-kappa t}
//       sigma(t) = e^{-2 kappa t} sum_{m>=1} (wt)^{2m} / (m!)^2
//   symmetric entries, ones start:  Gaussian with
//       a_s(t)     = e^{-kappa t} * (exponential moment of the unit-mass
//                    semicircle law of radius 2w at t)
//       sigma_s(t) = second moment (same form at 2t) - a_s(t)^2
//   random iid start xi:            y = a-scale * xi + z-scale * Z (mixture)
//   covariance kernel (iid, kappa = 0, ones): R(t, s) = 1 + S(w sqrt(ts))
//       with S the series above
//   stability threshold: kappa_c = w; sigma(t) -> 0 iff kappa >= w.
//
// All series/quadrature evaluations are deterministic and carry explicit
// truncation rules; "sigma" always denotes a VARIANCE.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "common.hpp"
#include "ensembles.hpp"

namespace randdyn {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLogDblMax = 709.782712893384;

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.70710678118654752440); }

// Gaussian limit law; sigma is a variance, sigma = 0 degenerates to a unit
// step at a (right-continuous).
struct GaussianLaw {
    double a = 0.0;
    double sigma = 0.0;

    double cdf(double lambda) const {
        if (sigma > 0.0) return normal_cdf((lambda - a) / std::sqrt(sigma));
        return lambda < a ? 0.0 : 1.0;
    }
};

namespace detail {

// S(x) = sum_{m>=1} x^{2m} / (m!)^2; ascending summation, stop when
// term/partial-sum < 1e-16. Valid while the peak term ~ e^{2x}/(2 pi x)
// stays in range (x <= 300 is used as the direct-mode bound).
inline double bessel_series_tail_direct(double x) {
    if (x == 0.0) return 0.0;
    double term = x * x;
    double sum = term;
    for (long m = 2;; ++m) {
        const double f = x / double(m);
        term *= f * f;
        sum += term;
        if (term < 1e-16 * sum) return sum;
    }
}

// log S(x) for large x: terms scaled by the peak term at m* ~ x and summed
// outward in both directions with the same 1e-16 stop.
inline double log_bessel_series_tail(double x) {
    const double lx = std::log(x);
    const long m_star = std::max(1L, std::lround(x));
    const auto log_term = [lx](long m) { return 2.0 * double(m) * lx - 2.0 * std::lgamma(double(m) + 1.0); };
    const double log_peak = log_term(m_star);
    double sum = 0.0;
    for (long m = m_star; m >= 1; --m) {
        const double t = std::exp(log_term(m) - log_peak);
        sum += t;
        if (t < 1e-16 * sum) break;
    }
    for (long m = m_star + 1;; ++m) {
        const double t = std::exp(log_term(m) - log_peak);
        sum += t;
        if (t < 1e-16 * sum) break;
    }
    return log_peak + std::log(sum);
}

// q(z) = (2/pi) int_0^pi sin^2(th) exp(z (cos th - 1)) dth, the semicircle
// exponential moment scaled by e^{-z}; bounded in (0, 1] for z >= 0.
// Gauss-Chebyshev (second kind) nodes integrate the sin^2 weight exactly;
// the node count doubles until successive levels agree to 1e-12.
inline double semicircle_moment_scaled_nodes(double z, int k) {
    const double h = kPi / double(k + 1);
    double acc = 0.0;
    for (int j = 1; j <= k; ++j) {
        const double th = h * double(j);
        const double s = std::sin(th);
        acc += s * s * std::exp(z * (std::cos(th) - 1.0));
    }
    return acc * 2.0 / double(k + 1);
}

inline double semicircle_moment_scaled(double z) {
    if (z == 0.0) return 1.0;
    double prev = semicircle_moment_scaled_nodes(z, 16);
    for (int k = 32; k <= (1 << 22); k *= 2) {
        const double cur = semicircle_moment_scaled_nodes(z, k);
        if (std::abs(cur - prev) <= 1e-12 * std::max(1.0, std::abs(cur))) return cur;
        prev = cur;
    }
    throw ConvergenceError("semicircle quadrature did not settle");
}

inline void validate_law_args(double kappa, double w, double t) {
    if (!std::isfinite(kappa)) throw ValidationError("limit law: kappa must be finite");
    if (!(std::isfinite(w) && w > 0.0)) throw ValidationError("limit law: w must be positive and finite");
    if (!(std::isfinite(t) && t >= 0.0)) throw ValidationError("limit law: t must be >= 0 and finite");
}

}  // namespace detail

inline double mean_iid(double kappa, double t) {
    if (!std::isfinite(kappa)) throw ValidationError("limit law: kappa must be finite");
    if (!(std::isfinite(t) && t >= 0.0)) throw ValidationError("limit law: t must be >= 0 and finite");
    return std::exp(-kappa * t);
}

// Limit variance of one coordinate, iid case. Returns +infinity when the
// value exceeds the floating range (deep in the unstable regime).
inline double var_iid(double kappa, double w, double t) {
    detail::validate_law_args(kappa, w, t);
    if (t == 0.0) return 0.0;
    const double x = w * t;
    const double kt2 = 2.0 * kappa * t;
    if (x <= 300.0) {
        // product form keeps the decay prefactor identity
        // var(kappa) = e^{-2 kappa t} var(0) exact
        return std::exp(-kt2) * detail::bessel_series_tail_direct(x);
    }
    const double ls = detail::log_bessel_series_tail(x);
    if (std::abs(kt2) <= 700.0 && ls <= kLogDblMax) return std::exp(-kt2) * std::exp(ls);
    const double le = ls - kt2;
    if (le >= kLogDblMax) return std::numeric_limits<double>::infinity();
    return std::exp(le);
}

// Limit mean of one coordinate, symmetric case.
inline double mean_sym(double kappa, double w, double t) {
    detail::validate_law_args(kappa, w, t);
    if (t == 0.0) return 1.0;
    const double z = 2.0 * w * t;
    const double le = z - kappa * t + std::log(detail::semicircle_moment_scaled(z));
    if (le >= kLogDblMax) return std::numeric_limits<double>::infinity();
    return std::exp(le);
}

// Limit variance of one coordinate, symmetric case: the exponential moment
// identity gives second moment(t) = e^{-2 kappa t} * (ones-mean at 2t with
// kappa = 0). Quadrature noise can push the difference slightly negative;
// anything below -1e-12 (relative to the second moment) is a genuine failure.
inline double var_sym(double kappa, double w, double t) {
    detail::validate_law_args(kappa, w, t);
    if (t == 0.0) return 0.0;
    const double z2 = 4.0 * w * t;
    const double le2 = z2 - 2.0 * kappa * t + std::log(detail::semicircle_moment_scaled(z2));
    if (le2 >= kLogDblMax) return std::numeric_limits<double>::infinity();
    const double second = std::exp(le2);
    const double m = mean_sym(kappa, w, t);
    double v = second - m * m;
    if (v < 0.0) {
        if (v < -1e-12 * std::max(1.0, second))
            throw ConvergenceError("var_sym: negative variance beyond quadrature noise");
        v = 0.0;
    }
    return v;
}

// R(t, s) = lim E{x_1(t) x_1(s)} for the kappa = 0 iid ensemble with ones
// start; equals 1 + S(w sqrt(ts)). Symmetric in (t, s) by construction.
inline double covariance_iid(double w, double t, double s) {
    if (!(std::isfinite(w) && w > 0.0)) throw ValidationError("covariance: w must be positive and finite");
    if (!(std::isfinite(t) && t >= 0.0) || !(std::isfinite(s) && s >= 0.0))
        throw ValidationError("covariance: times must be >= 0 and finite");
    if (t == 0.0 || s == 0.0) return 1.0;
    const double x = w * std::sqrt(t * s);
    if (x <= 300.0) return 1.0 + detail::bessel_series_tail_direct(x);
    const double ls = detail::log_bessel_series_tail(x);
    if (ls >= kLogDblMax) return std::numeric_limits<double>::infinity();
    return 1.0 + std::exp(ls);
}

inline GaussianLaw limit_law_iid(double kappa, double w, double t) {
    return {mean_iid(kappa, t), var_iid(kappa, w, t)};
}

inline GaussianLaw limit_law_sym(double kappa, double w, double t) {
    return {mean_sym(kappa, w, t), var_sym(kappa, w, t)};
}

namespace detail {

// nodes/weights of the 16-point Gauss-Legendre rule on [-1, 1], found by
// Newton iteration on the Legendre recurrence (accurate to ~1 ulp)
struct Gl16 {
    std::array<double, 16> node{};
    std::array<double, 16> weight{};
};

inline const Gl16& gl16() {
    static const Gl16 rule = [] {
        Gl16 r;
        constexpr int n = 16;
        for (int i = 0; i < n / 2; ++i) {
            double x = std::cos(kPi * (double(i) + 0.75) / (double(n) + 0.5));
            double p1 = 0.0, dp = 0.0;
            for (int pass = 0; pass < 64; ++pass) {
                double p0 = 1.0;
                p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / double(k);
                    p0 = p1;
                    p1 = p2;
                }
                dp = double(n) * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) <= 1e-15 * std::abs(x)) break;
            }
            const double wt = 2.0 / ((1.0 - x * x) * dp * dp);
            r.node[i] = -x;
            r.node[n - 1 - i] = x;
            r.weight[i] = wt;
            r.weight[n - 1 - i] = wt;
        }
        return r;
    }();
    return rule;
}

}  // namespace detail

// Law of y = xi_scale * xi + z_scale * Z with Z standard normal independent
// of xi (an iid-kind initial law). Discrete xi (rademacher family) uses the
// exact two-atom sum; continuous xi uses a composite 16-point Gauss-Legendre
// rule over the xi support whose panel count is calibrated once at
// construction (so cdf() applies one fixed rule for every lambda, keeping
// monotonicity in lambda exact; >= 64 nodes, absolute accuracy ~1e-9).
class MixtureLaw {
public:
    MixtureLaw(double xi_scale, double z_scale, const InitialLaw& xi_law)
        : xi_scale_(xi_scale), z_scale_(z_scale), xi_(xi_law) {
        if (xi_.kind != InitialKind::iid)
            throw ValidationError("mixture law: needs an iid initial law (random initial data)");
        xi_.validate();
        if (!std::isfinite(xi_scale_)) throw ValidationError("mixture law: xi scale must be finite");
        if (!(std::isfinite(z_scale_) && z_scale_ >= 0.0))
            throw ValidationError("mixture law: z scale must be >= 0 and finite");
        if (xi_.family == EntryFamily::rademacher || z_scale_ == 0.0) return;

        const double sd = xi_.sd();
        if (xi_.family == EntryFamily::uniform) {
            lo_ = xi_.a0 - 1.7320508075688772935 * sd;
            hi_ = xi_.a0 + 1.7320508075688772935 * sd;
        } else {
            lo_ = xi_.a0 - 12.0 * sd;  // gaussian mass beyond 12 sd ~ 2e-33
            hi_ = xi_.a0 + 12.0 * sd;
        }
        const double center = xi_scale_ * xi_.a0;
        const double spread = std::abs(xi_scale_) * sd + z_scale_;
        const std::array<double, 9> probes{center,
                                           center - 0.5 * spread, center + 0.5 * spread,
                                           center - spread, center + spread,
                                           center - 2.0 * spread, center + 2.0 * spread,
                                           center - 4.0 * spread, center + 4.0 * spread};
        for (panels_ = 4; panels_ <= 4096; panels_ *= 2) {
            bool settled = true;
            for (double lam : probes) {
                if (std::abs(cdf_quadrature(lam, panels_) - cdf_quadrature(lam, 2 * panels_)) > 1e-9) {
                    settled = false;
                    break;
                }
            }
            if (settled) return;
        }
        throw ConvergenceError("mixture law: quadrature panel count did not settle");
    }

    double xi_scale() const { return xi_scale_; }
    double z_scale() const { return z_scale_; }
    const InitialLaw& xi_law() const { return xi_; }

    double mean() const { return xi_scale_ * xi_.a0; }
    double variance() const {
        return xi_scale_ * xi_scale_ * (xi_.w0sq - xi_.a0 * xi_.a0) + z_scale_ * z_scale_;
    }

    double cdf(double lambda) const {
        if (xi_.family == EntryFamily::rademacher) {
            const double sd = xi_.sd();
            return 0.5 * smooth_cdf(lambda - xi_scale_ * (xi_.a0 + sd)) +
                   0.5 * smooth_cdf(lambda - xi_scale_ * (xi_.a0 - sd));
        }
        if (z_scale_ == 0.0) {
            if (xi_scale_ > 0.0) return xi_cdf(lambda / xi_scale_);
            if (xi_scale_ == 0.0) return lambda >= 0.0 ? 1.0 : 0.0;
            return 1.0 - xi_cdf(lambda / xi_scale_);  // xi continuous here, no boundary atom
        }
        return std::clamp(cdf_quadrature(lambda, panels_), 0.0, 1.0);
    }

private:
    double smooth_cdf(double u) const {
        if (z_scale_ > 0.0) return normal_cdf(u / z_scale_);
        return u >= 0.0 ? 1.0 : 0.0;
    }

    double xi_cdf(double u) const {
        const double sd = xi_.sd();
        if (xi_.family == EntryFamily::gaussian) return normal_cdf((u - xi_.a0) / sd);
        const double a = xi_.a0 - 1.7320508075688772935 * sd;
        const double b = xi_.a0 + 1.7320508075688772935 * sd;
        return std::clamp((u - a) / (b - a), 0.0, 1.0);
    }

    double xi_density(double u) const {
        const double sd = xi_.sd();
        if (xi_.family == EntryFamily::gaussian) {
            const double zz = (u - xi_.a0) / sd;
            return std::exp(-0.5 * zz * zz) / (sd * std::sqrt(2.0 * kPi));
        }
        return (u >= lo_ && u <= hi_) ? 1.0 / (hi_ - lo_) : 0.0;
    }

    double cdf_quadrature(double lambda, int panels) const {
        const auto& rule = detail::gl16();
        const double width = (hi_ - lo_) / double(panels);
        double acc = 0.0;
        for (int p = 0; p < panels; ++p) {
            const double a = lo_ + width * double(p);
            const double mid = a + 0.5 * width;
            const double half = 0.5 * width;
            for (int j = 0; j < 16; ++j) {
                const double u = mid + half * rule.node[j];
                acc += rule.weight[j] * half * xi_density(u) * normal_cdf((lambda - xi_scale_ * u) / z_scale_);
            }
        }
        return acc;
    }

    double xi_scale_;
    double z_scale_;
    InitialLaw xi_;
    int panels_ = 0;
    double lo_ = 0.0;
    double hi_ = 0.0;
};

// Mixture law of one coordinate for a random iid start: the deterministic
// part scales xi by the ones-start mean, the fluctuation part is Gaussian
// with sd = sqrt(E{xi^2}) times the ones-start limit sd.
inline MixtureLaw mixture_law(double kappa, double w, double t, const InitialLaw& xi, bool symmetric) {
    if (xi.kind != InitialKind::iid)
        throw ValidationError("mixture law: needs an iid initial law (random initial data)");
    detail::validate_law_args(kappa, w, t);
    const double w0 = std::sqrt(xi.w0sq);
    if (symmetric) return MixtureLaw(mean_sym(kappa, w, t), w0 * std::sqrt(var_sym(kappa, w, t)), xi);
    return MixtureLaw(mean_iid(kappa, t), w0 * std::sqrt(var_iid(kappa, w, t)), xi);
}

inline double mixture_cdf(const MixtureLaw& law, double lambda) { return law.cdf(lambda); }

enum class Stability { stable, critically_stable, unstable };

inline const char* to_string(Stability s) {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::critically_stable: return "critically_stable";
        case Stability::unstable: return "unstable";
    }
    return "?";
}

struct StabilityVerdict {
    Stability verdict;
    double kappa_c;      // = w
    double sigma_limit;  // lim_{t->inf} of the iid limit variance: 0 when kappa >= w, +inf otherwise
};

// sigma(t) ~ e^{2(w - kappa) t} / sqrt(4 pi w t) for large t, so the decay
// wins iff kappa >= w (at kappa = w the algebraic 1/sqrt(t) factor still
// sends sigma to 0).
inline StabilityVerdict classify_stability(double kappa, double w) {
    if (!std::isfinite(kappa)) throw ValidationError("classify_stability: kappa must be finite");
    if (!(std::isfinite(w) && w > 0.0)) throw ValidationError("classify_stability: w must be positive and finite");
    if (kappa < w) return {Stability::unstable, w, std::numeric_limits<double>::infinity()};
    if (kappa == w) return {Stability::critically_stable, w, 0.0};
    return {Stability::stable, w, 0.0};
}

}  // namespace randdyn
