#pragma once

// Trajectory propagation for x'(t) = -kappa x + A x. Frames are computed as
// x(t) = e^{-kappa t} y(t) with y' = A y, so one A-only propagation serves
// every decay rate and the kappa factor enters as an exact scalar multiple
// per frame. e^{tA} acts on vectors only; the exponential is never formed as
// a matrix.

#include <cmath>
#include <limits>
#include <vector>

#include "common.hpp"
#include "rng.hpp"

namespace randdyn {

struct SystemConfig {
    double kappa = 0.0;
    std::vector<double> times;   // strictly increasing, >= 0
    double tol = 1e-10;          // per-frame relative accuracy target

    void validate() const {
        if (!std::isfinite(kappa)) throw ValidationError("system: kappa must be finite");
        if (times.empty()) throw ValidationError("system: times must be non-empty");
        double prev = -std::numeric_limits<double>::infinity();
        for (double t : times) {
            if (!(std::isfinite(t) && t >= 0.0)) throw ValidationError("system: times must be finite and >= 0");
            if (!(t > prev)) throw ValidationError("system: times must be strictly increasing");
            prev = t;
        }
        if (!(tol > 0.0 && tol <= 1e-4)) throw ValidationError("system: tol must be in (0, 1e-4]");
    }
};

struct TrajectoryFrame {
    double t = 0.0;
    Vector x;
    bool overflow = false;  // propagation left the floating range at or before t
};

// magnitude treated as overflow before IEEE infinity is reached
inline constexpr double kOverflowLimit = 1e300;
inline constexpr int kMaxTaylorOrder = 64;
inline constexpr double kMaxSubsteps = 5e7;

// e^{tB} v by substepping: s >= ceil(|t| ||B||_1) substeps, each applying the
// truncated Taylor series of e^{tau B}. With tau ||B||_1 <= 1 the 1-norm of
// the k-th term is bounded by ||v||_1 / k!, so the series settles in a few
// dozen terms and the geometric tail after term k is below
// 2 ||term_k|| / (k+1); the loop stops once that bound drops under tol/s of
// the partial sum.
inline Vector expm_action(const Matrix& b, const Vector& v, double t, double tol) {
    if (b.rows() != b.cols()) throw ValidationError("expm_action: matrix must be square");
    if (v.size() != b.rows()) throw ValidationError("expm_action: dimension mismatch");
    if (!b.allFinite() || !v.allFinite()) throw ValidationError("expm_action: non-finite input");
    if (!std::isfinite(t)) throw ValidationError("expm_action: time must be finite");
    if (!(tol > 0.0)) throw ValidationError("expm_action: tol must be positive");
    if (t == 0.0) return v;

    const double norm1 = b.cwiseAbs().colwise().sum().maxCoeff();
    const double steps = std::ceil(std::abs(t) * norm1);
    if (!(steps <= kMaxSubsteps))
        throw ValidationError("expm_action: substep count out of range (t * ||B||_1 too large)");
    const long s = std::max(1L, long(steps));
    const double tau = t / double(s);
    const double local_tol = tol / double(s);

    Vector y = v;
    Vector term(v.size());
    Vector prod(v.size());
    Vector sum(v.size());
    for (long step = 0; step < s; ++step) {
        term = y;
        sum = y;
        for (int k = 1;; ++k) {
            prod.noalias() = b * term;
            term = (tau / double(k)) * prod;
            sum += term;
            const double term_norm = term.lpNorm<Eigen::Infinity>();
            const double sum_norm = sum.lpNorm<Eigen::Infinity>();
            if (2.0 * term_norm / double(k + 1) <= local_tol * sum_norm) break;
            if (k >= kMaxTaylorOrder)
                throw ConvergenceError("expm_action: Taylor series did not settle within the order cap");
        }
        if (!sum.allFinite() || sum.lpNorm<Eigen::Infinity>() > kOverflowLimit)
            throw OverflowError("expm_action: result magnitude exceeds the representable range");
        y.swap(sum);
    }
    return y;
}

// Frames at cfg.times, evolved incrementally (each frame continues from the
// previous one, so a shared grid costs one propagation). Overflow is a
// per-frame verdict, not an exception: the first overflowing frame and all
// later ones carry overflow = true and NaN coordinates, and downstream
// statistics must exclude them explicitly.
inline std::vector<TrajectoryFrame> evolve(const Matrix& a, const Vector& x0, const SystemConfig& cfg) {
    cfg.validate();
    if (a.rows() != a.cols()) throw ValidationError("evolve: matrix must be square");
    if (x0.size() != a.rows()) throw ValidationError("evolve: dimension mismatch");
    if (!a.allFinite() || !x0.allFinite()) throw ValidationError("evolve: non-finite input");

    std::vector<TrajectoryFrame> frames;
    frames.reserve(cfg.times.size());
    Vector y = x0;  // kappa = 0 state
    double t_prev = 0.0;
    bool dead = false;
    for (double t : cfg.times) {
        if (!dead) {
            try {
                y = expm_action(a, y, t - t_prev, cfg.tol);
            } catch (const OverflowError&) {
                dead = true;
            }
        }
        TrajectoryFrame f;
        f.t = t;
        if (dead) {
            f.overflow = true;
            f.x = Vector::Constant(a.rows(), std::numeric_limits<double>::quiet_NaN());
        } else {
            f.x = std::exp(-cfg.kappa * t) * y;
            if (!f.x.allFinite() || f.x.lpNorm<Eigen::Infinity>() > kOverflowLimit) {
                // possible only for kappa < 0, where later frames are worse
                dead = true;
                f.overflow = true;
                f.x = Vector::Constant(a.rows(), std::numeric_limits<double>::quiet_NaN());
            }
        }
        frames.push_back(std::move(f));
        t_prev = t;
    }
    return frames;
}

// Largest singular value by power iteration on A^T A. Returns once
// successive Rayleigh estimates differ by less than tol relatively; the
// estimate approaches the norm from below. The probe vector is drawn from a
// fixed internal stream keyed by the dimensions, so results are
// deterministic for a given matrix.
inline double operator_norm(const Matrix& a, double tol, int max_iterations = 20000) {
    if (a.size() == 0) throw ValidationError("operator_norm: empty matrix");
    if (!a.allFinite()) throw ValidationError("operator_norm: non-finite input");
    if (!(tol > 0.0 && tol < 1.0)) throw ValidationError("operator_norm: tol must be in (0, 1)");
    if (max_iterations < 2) throw ValidationError("operator_norm: iteration cap too small");

    CounterRng rng(derive_stream(stream_word(StreamTag::norm_probe),
                                 {std::uint64_t(a.rows()), std::uint64_t(a.cols())}));
    Vector v(a.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.next_gaussian();
    const double vn = v.norm();
    if (vn == 0.0) v.setOnes(); else v /= vn;

    double prev = -1.0;
    Vector av(a.rows());
    Vector back(a.cols());
    for (int it = 0; it < max_iterations; ++it) {
        av.noalias() = a * v;
        const double sigma = av.norm();  // = sqrt(v^T A^T A v) since ||v|| = 1
        if (sigma == 0.0) return 0.0;    // v is in the kernel of A^T A
        back.noalias() = a.transpose() * av;
        v = back / back.norm();          // ||back|| >= v^T A^T A v = sigma^2 > 0
        if (prev >= 0.0 && std::abs(sigma - prev) <= tol * sigma) return sigma;
        prev = sigma;
    }
    throw ConvergenceError("operator_norm: power iteration did not converge within the iteration cap");
}

}  // namespace randdyn
