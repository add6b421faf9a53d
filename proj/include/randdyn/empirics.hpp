#pragma once

// Empirical objects built from simulated trajectories: the normalized
// counting function of coordinates (an empirical CDF), its exact
// Kolmogorov-Smirnov distance to a reference law, the Stieltjes transform,
// and replica-level statistics on a shared time grid.
//
// Estimates of the one-coordinate law pool across coordinates AND replicas;
// exchangeability of coordinates licenses the pooling, but the effective
// sample size of a pooled estimate is n * replicas dependent samples, which
// is why uncertainty is always quantified at replica level (spread of
// per-replica aggregates), never per coordinate.
//
// Every estimator folds replica contributions in sorted order, so results
// are exactly invariant under replica reordering. Frames flagged as
// overflowed are excluded; exclusion counts are reported, and estimators
// with no valid input throw rather than fabricate values.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

#include "common.hpp"
#include "propagator.hpp"

namespace randdyn {

// Sorted coordinate samples at one fixed time.
class EmpiricalMeasure {
public:
    explicit EmpiricalMeasure(std::vector<double> samples) : samples_(std::move(samples)) {
        if (samples_.empty()) throw ValidationError("empirical measure: no samples");
        for (double v : samples_)
            if (!std::isfinite(v)) throw ValidationError("empirical measure: non-finite sample");
        std::sort(samples_.begin(), samples_.end());
    }

    const std::vector<double>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }

    // fraction of samples <= lambda; right-continuous step function
    double cdf(double lambda) const {
        const auto it = std::upper_bound(samples_.begin(), samples_.end(), lambda);
        return double(it - samples_.begin()) / double(samples_.size());
    }

private:
    std::vector<double> samples_;
};

inline double counting_function(const EmpiricalMeasure& m, double lambda) { return m.cdf(lambda); }

// sup over lambda of |F_n - F|, evaluated exactly over the order statistics.
// At each distinct sample both one-sided gaps are taken; the left gap
// evaluates F just below the sample, so reference laws with atoms at sample
// points (including F_n itself) are handled correctly. cdf must be monotone
// non-decreasing into [0, 1].
template <class Cdf>
double ks_distance(const EmpiricalMeasure& m, Cdf&& cdf) {
    const auto& xs = m.samples();
    const double n = double(xs.size());
    double dist = 0.0;
    std::size_t i = 0;
    while (i < xs.size()) {
        std::size_t j = i;
        while (j + 1 < xs.size() && xs[j + 1] == xs[i]) ++j;
        const double f_at = double(cdf(xs[i]));
        const double f_below = double(cdf(std::nextafter(xs[i], -std::numeric_limits<double>::infinity())));
        dist = std::max(dist, std::abs(double(j + 1) / n - f_at));
        dist = std::max(dist, std::abs(double(i) / n - f_below));
        i = j + 1;
    }
    return dist;
}

// g(z) = n^{-1} sum_i 1/(x_i - z); maps the upper half plane to itself and
// satisfies |g(z)| <= 1 / |Im z|.
inline std::complex<double> stieltjes(const EmpiricalMeasure& m, std::complex<double> z) {
    if (z.imag() == 0.0) throw ValidationError("stieltjes: z must have a non-zero imaginary part");
    std::complex<double> acc(0.0, 0.0);
    for (double x : m.samples()) acc += 1.0 / (std::complex<double>(x, 0.0) - z);
    return acc / double(m.size());
}

namespace detail {

inline double sorted_mean(std::vector<double> vals) {
    std::sort(vals.begin(), vals.end());
    double acc = 0.0;
    for (double v : vals) acc += v;
    return acc / double(vals.size());
}

inline double sorted_unbiased_variance(std::vector<double> vals) {
    std::sort(vals.begin(), vals.end());
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= double(vals.size());
    double acc = 0.0;
    for (double v : vals) acc += (v - mean) * (v - mean);
    return acc / double(vals.size() - 1);
}

}  // namespace detail

// Frames of independent replicas on one shared, strictly increasing time
// grid. Replica r, grid slot k holds the coordinate vector and its overflow
// flag.
struct ReplicaPanel {
    std::vector<double> times;
    Eigen::Index dim = 0;
    std::vector<std::vector<Vector>> states;
    std::vector<std::vector<char>> flags;

    std::size_t replica_count() const { return states.size(); }

    void add_replica(const std::vector<TrajectoryFrame>& frames) {
        if (frames.empty()) throw ValidationError("panel: replica has no frames");
        if (times.empty()) {
            for (const auto& f : frames) times.push_back(f.t);
            dim = frames.front().x.size();
        }
        if (frames.size() != times.size())
            throw ValidationError("panel: replica frame count does not match the grid");
        std::vector<Vector> st;
        std::vector<char> fl;
        st.reserve(frames.size());
        fl.reserve(frames.size());
        for (std::size_t k = 0; k < frames.size(); ++k) {
            if (frames[k].t != times[k]) throw ValidationError("panel: replica time grid mismatch");
            if (frames[k].x.size() != dim) throw ValidationError("panel: replica dimension mismatch");
            st.push_back(frames[k].x);
            fl.push_back(frames[k].overflow ? 1 : 0);
        }
        states.push_back(std::move(st));
        flags.push_back(std::move(fl));
    }

    std::size_t time_index(double t) const {
        for (std::size_t k = 0; k < times.size(); ++k)
            if (times[k] == t) return k;
        throw ValidationError("panel: requested time is not on the grid");
    }

    bool frame_valid(std::size_t r, std::size_t k) const { return flags[r][k] == 0; }
};

struct PooledSamples {
    std::vector<double> values;
    int excluded_replicas = 0;
};

inline PooledSamples pooled_samples(const ReplicaPanel& p, double t) {
    const std::size_t k = p.time_index(t);
    PooledSamples out;
    out.values.reserve(p.replica_count() * std::size_t(p.dim));
    for (std::size_t r = 0; r < p.replica_count(); ++r) {
        if (!p.frame_valid(r, k)) {
            ++out.excluded_replicas;
            continue;
        }
        const Vector& x = p.states[r][k];
        for (Eigen::Index i = 0; i < x.size(); ++i) out.values.push_back(x(i));
    }
    return out;
}

inline EmpiricalMeasure pooled_measure(const ReplicaPanel& p, double t) {
    auto s = pooled_samples(p, t);
    if (s.values.empty()) throw ValidationError("pooled measure: every replica overflowed at this time");
    return EmpiricalMeasure(std::move(s.values));
}

// Per-replica coordinate averages of x_i(t) * x_i(s); replicas flagged at
// either time are skipped.
inline std::vector<double> replica_covariances(const ReplicaPanel& p, double t, double s) {
    const std::size_t kt = p.time_index(t);
    const std::size_t ks = p.time_index(s);
    std::vector<double> vals;
    vals.reserve(p.replica_count());
    for (std::size_t r = 0; r < p.replica_count(); ++r) {
        if (!p.frame_valid(r, kt) || !p.frame_valid(r, ks)) continue;
        const Vector& xt = p.states[r][kt];
        const Vector& xs = p.states[r][ks];
        double acc = 0.0;
        for (Eigen::Index i = 0; i < xt.size(); ++i) acc += xt(i) * xs(i);
        vals.push_back(acc / double(xt.size()));
    }
    return vals;
}

// Per-replica counting-function values F_r(lambda) at time t.
inline std::vector<double> replica_counting_values(const ReplicaPanel& p, double lambda, double t) {
    const std::size_t k = p.time_index(t);
    std::vector<double> vals;
    vals.reserve(p.replica_count());
    for (std::size_t r = 0; r < p.replica_count(); ++r) {
        if (!p.frame_valid(r, k)) continue;
        const Vector& x = p.states[r][k];
        long count = 0;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (x(i) <= lambda) ++count;
        vals.push_back(double(count) / double(x.size()));
    }
    return vals;
}

inline std::vector<double> replica_means(const ReplicaPanel& p, double t) {
    const std::size_t k = p.time_index(t);
    std::vector<double> vals;
    vals.reserve(p.replica_count());
    for (std::size_t r = 0; r < p.replica_count(); ++r) {
        if (!p.frame_valid(r, k)) continue;
        const Vector& x = p.states[r][k];
        vals.push_back(x.sum() / double(x.size()));
    }
    return vals;
}

inline std::vector<double> replica_second_moments(const ReplicaPanel& p, double t) {
    return replica_covariances(p, t, t);
}

// Per-replica unbiased coordinate variances at time t.
inline std::vector<double> replica_variances(const ReplicaPanel& p, double t) {
    const std::size_t k = p.time_index(t);
    std::vector<double> vals;
    vals.reserve(p.replica_count());
    for (std::size_t r = 0; r < p.replica_count(); ++r) {
        if (!p.frame_valid(r, k)) continue;
        const Vector& x = p.states[r][k];
        const double mean = x.sum() / double(x.size());
        double acc = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) acc += (x(i) - mean) * (x(i) - mean);
        vals.push_back(acc / double(x.size() - 1));
    }
    return vals;
}

// Across-replica variance of the counting-function value: the self-averaging
// diagnostic (decays roughly like 1/n when the counting function
// concentrates).
inline double replica_variance_of_counting(const ReplicaPanel& p, double lambda, double t) {
    auto vals = replica_counting_values(p, lambda, t);
    if (vals.size() < 2)
        throw ValidationError("replica variance: needs at least 2 valid replicas");
    return detail::sorted_unbiased_variance(std::move(vals));
}

// Average over replicas and coordinates of x_i(t) x_i(s); the empirical
// counterpart of the covariance kernel.
inline double empirical_covariance(const ReplicaPanel& p, double t, double s) {
    auto vals = replica_covariances(p, t, s);
    if (vals.size() < 2)
        throw ValidationError("empirical covariance: needs at least 2 valid replicas");
    return detail::sorted_mean(std::move(vals));
}

struct PooledMoments {
    double mean = 0.0;
    double variance = 0.0;
    double second_moment = 0.0;
    long n_effective = 0;       // pooled sample count (valid replicas * n)
    int excluded_replicas = 0;
};

// Pooled coordinate mean/variance at time t. All replicas share one n, so
// the pooled mean and second moment are replica averages of per-replica
// aggregates; the second moment reduction is byte-identical to
// empirical_covariance(p, t, t).
inline PooledMoments pooled_moments(const ReplicaPanel& p, double t) {
    const std::size_t k = p.time_index(t);
    auto means = replica_means(p, t);
    auto seconds = replica_second_moments(p, t);
    PooledMoments out;
    out.excluded_replicas = int(p.replica_count() - means.size());
    if (means.empty()) throw ValidationError("pooled moments: every replica overflowed at this time");
    (void)k;
    out.mean = detail::sorted_mean(std::move(means));
    out.second_moment = detail::sorted_mean(std::move(seconds));
    out.n_effective = long(p.replica_count() - std::size_t(out.excluded_replicas)) * long(p.dim);
    if (out.n_effective > 1) {
        const double centered = out.second_moment - out.mean * out.mean;
        out.variance = std::max(0.0, centered) * double(out.n_effective) / double(out.n_effective - 1);
    }
    return out;
}

}  // namespace randdyn
