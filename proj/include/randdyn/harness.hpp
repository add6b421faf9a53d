#pragma once

// Monte Carlo verification harness. A plan describes an ensemble, a time
// grid, replica counts and thresholds; the harness simulates independent
// replicas onto the shared grid and compares pooled empirical statistics
// against the predicted limit laws:
//
//   - per-time law rows: KS distance of the pooled coordinate measure
//     against the predicted Gaussian (ones start) or mixture law (iid
//     start), plus pooled moments with replica-level standard errors;
//   - the second-moment identity (symmetric ensembles, ones start):
//     E{x_1^2(t)} = E{x_1(2t)} checked pairwise on the grid;
//   - the covariance kernel (kappa = 0, non-symmetric, ones start);
//   - a self-averaging sweep: across-replica variance of the counting
//     function must drop by a required factor as n grows;
//   - an operator-norm tail check against the 2w + eps (symmetric) and
//     4w + eps (non-symmetric) concentration bounds.
//
// Which limit law applies is fully determined by the ensemble shape
// (symmetric flag + initial kind), so plans carry no separate mode switch.
//
// Determinism: replica r of a section draws from streams derived as
// (master_seed, section context, n, r); workers race only over who computes
// which replica, aggregation always folds results in replica order, so
// outputs are byte-identical for any worker count. The RANDDYN_WORKERS
// environment variable overrides the default (hardware concurrency).

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <algorithm>

#include "common.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "empirics.hpp"
#include "ensembles.hpp"
#include "laws.hpp"
#include "propagator.hpp"
#include "rng.hpp"

namespace randdyn {

// two-sided +-4 SE acceptance band for moment/identity/covariance checks
// (false-alarm rate ~6e-5 per check)
inline constexpr double kMaxSigmas = 4.0;

// planner refusal: e^{(rate - kappa) t} * n must stay below this
inline constexpr double kAmplitudeCap = 1e280;

// self-averaging cells whose small-n mean counting value is outside
// [kTailLow, 1 - kTailLow] are tail cells: the per-replica counting value is
// a degenerate Bernoulli average there and its variance carries no decay
// signal, so such cells are reported but excluded from pass/fail
inline constexpr double kTailLow = 0.005;

inline int worker_count() {
    if (const char* env = std::getenv("RANDDYN_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (env[0] != '\0' && end && *end == '\0' && v >= 1 && v <= 1024) return int(v);
        throw ValidationError("RANDDYN_WORKERS must be an integer in [1, 1024]");
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? int(hc) : 1;
}

// Runs body(0..count-1) on worker_count() threads; rethrows the first error.
template <class Fn>
void parallel_for_index(int count, Fn&& body) {
    const int workers = std::min(worker_count(), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex mu;
    std::exception_ptr first_error;
    auto run = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(run);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

// seed-derivation contexts; together with (n, replica) they address every
// stream the harness ever draws
inline constexpr std::uint64_t kCtxPanel = 1;
inline constexpr std::uint64_t kCtxNorm = 2;
inline constexpr std::uint64_t kCtxSweep = 3;
inline constexpr std::uint64_t kCtxSpectrum = 4;

inline std::uint64_t replica_seed(std::uint64_t master, std::uint64_t ctx, std::uint64_t n, std::uint64_t r) {
    return derive_stream(master, {ctx, n, r});
}

struct Thresholds {
    double ks_max = 0.02;
    double variance_decay_min_factor = 2.0;
};

struct ExperimentPlan {
    EnsembleSpec ensemble;  // per-replica seeds are derived; ensemble.seed is ignored
    double kappa = 0.0;
    std::vector<double> times;
    double tol = 1e-10;
    std::vector<double> lambdas;  // counting-function evaluation points (sweep); law means by default
    int replicas = 1;
    std::vector<int> n_sweep;
    std::uint64_t master_seed = 0;
    Thresholds thresholds;
    bool check_norms = false;
    std::vector<std::pair<double, double>> covariance_pairs;

    void validate() const;
    static ExperimentPlan from_config(Config& cfg);
};

inline std::vector<double> default_lambdas(const ExperimentPlan& plan) {
    std::vector<double> ls;
    for (double t : plan.times) {
        double m;
        if (plan.ensemble.initial_law.kind == InitialKind::iid)
            m = (plan.ensemble.symmetric ? mean_sym(plan.kappa, plan.ensemble.entry_law.w, t)
                                         : mean_iid(plan.kappa, t)) *
                plan.ensemble.initial_law.a0;
        else
            m = plan.ensemble.symmetric ? mean_sym(plan.kappa, plan.ensemble.entry_law.w, t)
                                        : mean_iid(plan.kappa, t);
        ls.push_back(m);
    }
    std::sort(ls.begin(), ls.end());
    ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
    return ls;
}

inline void ExperimentPlan::validate() const {
    ensemble.validate();
    SystemConfig cfg{kappa, times, tol};
    cfg.validate();
    if (replicas < 1) throw ValidationError("plan: replicas must be >= 1");
    for (double l : lambdas)
        if (!std::isfinite(l)) throw ValidationError("plan: lambdas must be finite");
    if (!n_sweep.empty()) {
        if (n_sweep.size() < 2) throw ValidationError("plan: n_sweep needs at least two dimensions");
        int prev = 1;
        for (int n : n_sweep) {
            if (n < 2) throw ValidationError("plan: n_sweep entries must be >= 2");
            if (n <= prev) throw ValidationError("plan: n_sweep must be strictly increasing");
            prev = n;
        }
        if (replicas < 30) throw ValidationError("plan: the self-averaging sweep needs replicas >= 30");
    }
    if (check_norms && replicas < 30) throw ValidationError("plan: the norm tail check needs replicas >= 30");
    if (!covariance_pairs.empty()) {
        if (kappa != 0.0 || ensemble.symmetric || ensemble.initial_law.kind != InitialKind::ones)
            throw ValidationError(
                "plan: covariance checks need kappa = 0, a non-symmetric ensemble and the ones start");
        for (const auto& [t, s] : covariance_pairs) {
            const auto on_grid = [&](double v) {
                for (double u : times)
                    if (u == v) return true;
                return false;
            };
            if (!on_grid(t) || !on_grid(s))
                throw ValidationError("plan: covariance pair times must lie on the time grid");
        }
    }
    // refuse horizons whose coordinates would overflow: amplitude grows like
    // e^{(rate - kappa) t} with rate = w (iid) or 2w (symmetric), and the n
    // factor absorbs the finite-n maximum over coordinates
    const double rate = (ensemble.symmetric ? 2.0 : 1.0) * ensemble.entry_law.w;
    if (kappa < rate) {
        long n_max = ensemble.n;
        for (int n : n_sweep) n_max = std::max(n_max, long(n));
        const double t_cap = (std::log(kAmplitudeCap) - std::log(double(n_max))) / (rate - kappa);
        if (times.back() > t_cap)
            throw ValidationError("plan: horizon t = " + format_plain(times.back()) +
                                  " exceeds the overflow cap t <= " + format_plain(t_cap) +
                                  " for growth rate " + format_plain(rate - kappa) + " at n = " +
                                  std::to_string(n_max) + " (coordinates would exceed 1e280)");
    }

    if (ensemble.n < 2) throw ValidationError("plan: n must be >= 2");
}

inline ExperimentPlan ExperimentPlan::from_config(Config& cfg) {
    ExperimentPlan p;
    p.ensemble.n = int(cfg.require_int("n"));
    p.ensemble.symmetric = cfg.get_bool("symmetric", false);
    if (auto fam = cfg.get_string("entry_family")) {
        auto parsed = parse_entry_family(*fam);
        if (!parsed) throw ValidationError("config: entry_family must be gaussian, rademacher or uniform");
        p.ensemble.entry_law.family = *parsed;
    }
    p.ensemble.entry_law.w = cfg.require_double("w");
    p.kappa = cfg.get_double("kappa", 0.0);

    std::string kind = "ones";
    if (auto k = cfg.get_string("initial_kind")) kind = *k;
    if (kind == "ones") {
        for (const char* key : {"initial_family", "a0", "w0sq"})
            if (cfg.has(key))
                throw ValidationError(std::string("config: key '") + key +
                                      "' is only meaningful with initial_kind = iid");
        p.ensemble.initial_law.kind = InitialKind::ones;
    } else if (kind == "iid") {
        p.ensemble.initial_law.kind = InitialKind::iid;
        if (auto fam = cfg.get_string("initial_family")) {
            auto parsed = parse_entry_family(*fam);
            if (!parsed)
                throw ValidationError("config: initial_family must be gaussian, rademacher or uniform");
            p.ensemble.initial_law.family = *parsed;
        }
        p.ensemble.initial_law.a0 = cfg.get_double("a0", 0.0);
        p.ensemble.initial_law.w0sq = cfg.get_double("w0sq", 1.0);
    } else {
        throw ValidationError("config: initial_kind must be ones or iid");
    }

    p.times = cfg.require_double_list("times");
    p.tol = cfg.get_double("tol", 1e-10);
    p.replicas = int(cfg.require_int("replicas"));
    p.master_seed = cfg.require_uint64("seed");
    if (auto ls = cfg.get_double_list("lambdas")) p.lambdas = *ls;
    if (auto ns = cfg.get_int_list("n_sweep")) {
        for (auto v : *ns) p.n_sweep.push_back(int(v));
    }
    p.thresholds.ks_max = cfg.get_double("ks_max", 0.02);
    p.thresholds.variance_decay_min_factor = cfg.get_double("variance_decay_min_factor", 2.0);
    p.check_norms = cfg.get_bool("check_norms", false);
    if (auto pairs = cfg.get_pair_list("covariance_pairs")) p.covariance_pairs = *pairs;
    cfg.reject_unknown();

    p.validate();
    if (p.lambdas.empty()) p.lambdas = default_lambdas(p);
    return p;
}

struct TimeCheck {
    double t = 0.0;
    double law_mean = 0.0;
    double law_variance = 0.0;
    double pooled_mean = 0.0;
    double pooled_variance = 0.0;
    double mean_se = 0.0;
    double variance_se = 0.0;
    double ks = 0.0;
    long n_effective = 0;
    int overflow_replicas = 0;
    bool unverifiable = false;  // every replica overflowed: reported, but not a failure
    bool pass = false;
};

struct IdentityCheck {
    double t = 0.0;
    double t2 = 0.0;
    double mean_difference = 0.0;  // pooled second moment at t minus pooled mean at 2t
    double se = 0.0;               // combined: sqrt(se(m2)^2 + se(m1)^2)
    double sigmas = 0.0;
    bool pass = false;
};

struct CovarianceCheck {
    double t = 0.0;
    double s = 0.0;
    double predicted = 0.0;
    double estimate = 0.0;
    double se = 0.0;
    double sigmas = 0.0;
    bool pass = false;
};

struct SelfAvgCell {
    int n = 0;
    double lambda = 0.0;
    double t = 0.0;
    int replicas_used = 0;
    double variance = 0.0;       // across-replica variance of the counting value
    double mean_counting = 0.0;  // across-replica mean of the counting value
};

struct SelfAvgVerdict {
    double lambda = 0.0;
    double t = 0.0;
    int n_small = 0;
    int n_large = 0;
    double var_small = 0.0;
    double var_large = 0.0;
    double required_factor = 0.0;
    bool tail_excluded = false;
    bool pass = false;
};

struct SelfAveragingTable {
    std::vector<SelfAvgCell> cells;
    std::vector<SelfAvgVerdict> verdicts;

    bool all_pass() const {
        for (const auto& v : verdicts)
            if (!v.tail_excluded && !v.pass) return false;
        return true;
    }
};

struct NormTailSummary {
    int replicas = 0;
    double epsilon = 0.0;       // 0.25 * w
    int above_sym_edge = 0;     // norms > 2w + eps
    int above_iid_bound = 0;    // norms > 4w + eps
    int nonconverged = 0;
    std::vector<double> norms;  // per replica; NaN where the estimate did not converge
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct VerificationReport {
    ExperimentPlan plan;
    int workers = 1;
    std::vector<TimeCheck> time_checks;
    std::vector<IdentityCheck> identity_checks;
    std::vector<CovarianceCheck> covariance_checks;
    std::optional<SelfAveragingTable> self_averaging;
    std::optional<NormTailSummary> norm_tail;
    std::vector<StageTiming> timings;

    // pass/fail is reproducible from (plan, master seed) alone; timings and
    // worker count are informational
    bool all_pass() const {
        for (const auto& c : time_checks)
            if (!c.unverifiable && !c.pass) return false;
        for (const auto& c : identity_checks)
            if (!c.pass) return false;
        for (const auto& c : covariance_checks)
            if (!c.pass) return false;
        if (self_averaging && !self_averaging->all_pass()) return false;
        return true;
    }
};

namespace detail {

inline double se_of_mean(std::vector<double> vals) {
    if (vals.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double n = double(vals.size());
    return std::sqrt(sorted_unbiased_variance(std::move(vals)) / n);
}

inline ReplicaPanel simulate_panel(const ExperimentPlan& plan, int n, std::uint64_t ctx) {
    const SystemConfig cfg{plan.kappa, plan.times, plan.tol};
    std::vector<std::vector<TrajectoryFrame>> results(std::size_t(plan.replicas));
    parallel_for_index(plan.replicas, [&](int r) {
        EnsembleSpec spec = plan.ensemble;
        spec.n = n;
        spec.seed = replica_seed(plan.master_seed, ctx, std::uint64_t(n), std::uint64_t(r));
        const Matrix a = sample_matrix(spec);
        const Vector x0 = sample_initial(spec);
        results[std::size_t(r)] = evolve(a, x0, cfg);
    });
    ReplicaPanel panel;
    for (const auto& frames : results) panel.add_replica(frames);
    return panel;
}

inline std::vector<TimeCheck> check_law_rows(const ReplicaPanel& panel, const ExperimentPlan& plan) {
    const double w = plan.ensemble.entry_law.w;
    const bool mixture = plan.ensemble.initial_law.kind == InitialKind::iid;
    std::vector<TimeCheck> rows;
    rows.reserve(plan.times.size());
    for (double t : plan.times) {
        TimeCheck row;
        row.t = t;
        std::function<double(double)> cdf;
        if (mixture) {
            const MixtureLaw law = mixture_law(plan.kappa, w, t, plan.ensemble.initial_law, plan.ensemble.symmetric);
            row.law_mean = law.mean();
            row.law_variance = law.variance();
            cdf = [law](double x) { return law.cdf(x); };
        } else if (plan.ensemble.symmetric) {
            const GaussianLaw law = limit_law_sym(plan.kappa, w, t);
            row.law_mean = law.a;
            row.law_variance = law.sigma;
            cdf = [law](double x) { return law.cdf(x); };
        } else {
            const GaussianLaw law = limit_law_iid(plan.kappa, w, t);
            row.law_mean = law.a;
            row.law_variance = law.sigma;
            cdf = [law](double x) { return law.cdf(x); };
        }

        auto pooled = pooled_samples(panel, t);
        row.overflow_replicas = pooled.excluded_replicas;
        if (pooled.values.empty()) {
            row.unverifiable = true;
            row.ks = std::numeric_limits<double>::quiet_NaN();
            row.pooled_mean = row.pooled_variance = std::numeric_limits<double>::quiet_NaN();
            row.mean_se = row.variance_se = std::numeric_limits<double>::quiet_NaN();
            rows.push_back(row);
            continue;
        }
        const EmpiricalMeasure measure(std::move(pooled.values));
        row.ks = ks_distance(measure, cdf);
        const PooledMoments pm = pooled_moments(panel, t);
        row.pooled_mean = pm.mean;
        row.pooled_variance = pm.variance;
        row.n_effective = pm.n_effective;
        row.mean_se = se_of_mean(replica_means(panel, t));
        row.variance_se = se_of_mean(replica_variances(panel, t));
        row.pass = row.ks <= plan.thresholds.ks_max;
        rows.push_back(row);
    }
    return rows;
}

// E{x_1^2(t)} = E{x_1(2t)}: for every t whose double is also on the grid,
// compare the pooled second moment at t against the pooled mean at 2t. The
// two sides keep their own replica-level standard errors, combined in
// quadrature. (For a symmetric coupling the coordinate-averaged identity is
// exact pathwise, so a per-replica paired difference would degenerate to
// floating-point noise and its spread would be no yardstick at all.)
inline std::vector<IdentityCheck> check_identity_rows(const ReplicaPanel& panel, const ExperimentPlan& plan) {
    std::vector<IdentityCheck> rows;
    for (double t : plan.times) {
        const double t2 = 2.0 * t;
        bool found = false;
        for (double u : plan.times)
            if (u == t2) found = true;
        if (!found) continue;
        const std::size_t kt = panel.time_index(t);
        const std::size_t k2 = panel.time_index(t2);
        std::vector<double> second_at_t;
        std::vector<double> mean_at_2t;
        for (std::size_t r = 0; r < panel.replica_count(); ++r) {
            if (!panel.frame_valid(r, kt) || !panel.frame_valid(r, k2)) continue;
            const Vector& xt = panel.states[r][kt];
            const Vector& x2 = panel.states[r][k2];
            double m2 = 0.0, m1 = 0.0;
            for (Eigen::Index i = 0; i < xt.size(); ++i) {
                m2 += xt(i) * xt(i);
                m1 += x2(i);
            }
            second_at_t.push_back(m2 / double(xt.size()));
            mean_at_2t.push_back(m1 / double(xt.size()));
        }
        IdentityCheck row;
        row.t = t;
        row.t2 = t2;
        if (second_at_t.size() < 2) {
            row.mean_difference = std::numeric_limits<double>::quiet_NaN();
            row.se = row.sigmas = std::numeric_limits<double>::quiet_NaN();
            row.pass = false;
            rows.push_back(row);
            continue;
        }
        row.mean_difference = sorted_mean(second_at_t) - sorted_mean(mean_at_2t);
        row.se = std::sqrt(se_of_mean(second_at_t) * se_of_mean(second_at_t) +
                           se_of_mean(mean_at_2t) * se_of_mean(mean_at_2t));
        if (row.se > 0.0) {
            row.sigmas = std::abs(row.mean_difference) / row.se;
        } else {
            row.sigmas = std::abs(row.mean_difference) <= 1e-12 ? 0.0
                                                                : std::numeric_limits<double>::infinity();
        }
        row.pass = row.sigmas <= kMaxSigmas;
        rows.push_back(row);
    }
    return rows;
}

inline std::vector<CovarianceCheck> check_covariance_rows(const ReplicaPanel& panel,
                                                          const ExperimentPlan& plan) {
    std::vector<CovarianceCheck> rows;
    rows.reserve(plan.covariance_pairs.size());
    for (const auto& [t, s] : plan.covariance_pairs) {
        CovarianceCheck row;
        row.t = t;
        row.s = s;
        row.predicted = covariance_iid(plan.ensemble.entry_law.w, t, s);
        auto vals = replica_covariances(panel, t, s);
        if (vals.size() < 2) {
            row.estimate = row.se = row.sigmas = std::numeric_limits<double>::quiet_NaN();
            row.pass = false;
            rows.push_back(row);
            continue;
        }
        row.estimate = sorted_mean(vals);
        row.se = se_of_mean(std::move(vals));
        if (row.se > 0.0) {
            row.sigmas = std::abs(row.estimate - row.predicted) / row.se;
        } else {
            row.sigmas = std::abs(row.estimate - row.predicted) <= 1e-12
                             ? 0.0
                             : std::numeric_limits<double>::infinity();
        }
        row.pass = row.sigmas <= kMaxSigmas;
        rows.push_back(row);
    }
    return rows;
}

inline SelfAveragingTable sweep_impl(const ExperimentPlan& plan) {
    const std::vector<double> lambdas = plan.lambdas.empty() ? default_lambdas(plan) : plan.lambdas;
    SelfAveragingTable table;
    for (int n : plan.n_sweep) {
        const ReplicaPanel panel = simulate_panel(plan, n, kCtxSweep);
        for (double lambda : lambdas) {
            for (double t : plan.times) {
                auto vals = replica_counting_values(panel, lambda, t);
                SelfAvgCell cell;
                cell.n = n;
                cell.lambda = lambda;
                cell.t = t;
                cell.replicas_used = int(vals.size());
                cell.mean_counting =
                    vals.empty() ? std::numeric_limits<double>::quiet_NaN() : sorted_mean(vals);
                cell.variance = vals.size() < 2 ? std::numeric_limits<double>::quiet_NaN()
                                                : sorted_unbiased_variance(std::move(vals));
                table.cells.push_back(cell);
            }
        }
    }
    const int n_small = plan.n_sweep.front();
    const int n_large = plan.n_sweep.back();
    const auto cell_at = [&](int n, double lambda, double t) -> const SelfAvgCell* {
        for (const auto& c : table.cells)
            if (c.n == n && c.lambda == lambda && c.t == t) return &c;
        return nullptr;
    };
    for (double lambda : lambdas) {
        for (double t : plan.times) {
            const SelfAvgCell* small = cell_at(n_small, lambda, t);
            const SelfAvgCell* large = cell_at(n_large, lambda, t);
            SelfAvgVerdict v;
            v.lambda = lambda;
            v.t = t;
            v.n_small = n_small;
            v.n_large = n_large;
            v.required_factor = plan.thresholds.variance_decay_min_factor;
            v.var_small = small ? small->variance : std::numeric_limits<double>::quiet_NaN();
            v.var_large = large ? large->variance : std::numeric_limits<double>::quiet_NaN();
            if (!small || !large || !std::isfinite(v.var_small) || !std::isfinite(v.var_large)) {
                v.pass = false;
            } else if (small->mean_counting < kTailLow || small->mean_counting > 1.0 - kTailLow) {
                v.tail_excluded = true;
                v.pass = true;
            } else {
                v.pass = v.var_large <= v.var_small / v.required_factor;
            }
            table.verdicts.push_back(v);
        }
    }
    return table;
}

inline NormTailSummary norm_tail_impl(const ExperimentPlan& plan) {
    NormTailSummary summary;
    summary.replicas = plan.replicas;
    const double w = plan.ensemble.entry_law.w;
    summary.epsilon = 0.25 * w;
    summary.norms.assign(std::size_t(plan.replicas), std::numeric_limits<double>::quiet_NaN());
    parallel_for_index(plan.replicas, [&](int r) {
        EnsembleSpec spec = plan.ensemble;
        spec.seed = replica_seed(plan.master_seed, kCtxNorm, std::uint64_t(spec.n), std::uint64_t(r));
        const Matrix a = sample_matrix(spec);
        try {
            summary.norms[std::size_t(r)] = operator_norm(a, 1e-6);
        } catch (const ConvergenceError&) {
            // leave NaN; counted below
        }
    });
    for (double v : summary.norms) {
        if (!std::isfinite(v)) {
            ++summary.nonconverged;
            continue;
        }
        if (v > 2.0 * w + summary.epsilon) ++summary.above_sym_edge;
        if (v > 4.0 * w + summary.epsilon) ++summary.above_iid_bound;
    }
    return summary;
}

class StageClock {
public:
    explicit StageClock(std::vector<StageTiming>& sink) : sink_(sink) {}
    template <class Fn>
    auto run(const std::string& stage, Fn&& fn) -> decltype(fn()) {
        const auto start = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            sink_.push_back({stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()});
        } else {
            auto out = fn();
            sink_.push_back({stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()});
            return out;
        }
    }

private:
    std::vector<StageTiming>& sink_;
};

inline VerificationReport run_checks(const ExperimentPlan& plan) {
    plan.validate();
    VerificationReport report;
    report.plan = plan;
    report.workers = worker_count();
    StageClock clock(report.timings);

    const ReplicaPanel panel =
        clock.run("simulate", [&] { return simulate_panel(plan, plan.ensemble.n, kCtxPanel); });
    report.time_checks = clock.run("law_checks", [&] { return check_law_rows(panel, plan); });
    if (plan.ensemble.symmetric && plan.ensemble.initial_law.kind == InitialKind::ones)
        report.identity_checks = check_identity_rows(panel, plan);
    if (!plan.covariance_pairs.empty())
        report.covariance_checks = check_covariance_rows(panel, plan);
    if (!plan.n_sweep.empty())
        report.self_averaging = clock.run("self_averaging", [&] { return sweep_impl(plan); });
    if (plan.check_norms)
        report.norm_tail = clock.run("norm_tail", [&] { return norm_tail_impl(plan); });
    return report;
}

}  // namespace detail

// Gaussian-law verification for the non-symmetric ensemble with ones start.
inline VerificationReport verify_gaussian_iid(const ExperimentPlan& plan) {
    if (plan.ensemble.symmetric || plan.ensemble.initial_law.kind != InitialKind::ones)
        throw ValidationError(
            "gaussian iid verification: plan must use a non-symmetric ensemble with the ones start");
    return detail::run_checks(plan);
}

// Gaussian-law verification for the symmetric ensemble with ones start,
// including the second-moment identity rows.
inline VerificationReport verify_gaussian_sym(const ExperimentPlan& plan) {
    if (!plan.ensemble.symmetric || plan.ensemble.initial_law.kind != InitialKind::ones)
        throw ValidationError(
            "gaussian sym verification: plan must use a symmetric ensemble with the ones start");
    return detail::run_checks(plan);
}

// Mixture-law verification for random iid initial data (either symmetry class).
inline VerificationReport verify_mixture(const ExperimentPlan& plan) {
    if (plan.ensemble.initial_law.kind != InitialKind::iid)
        throw ValidationError("mixture verification: plan must use an iid initial law");
    return detail::run_checks(plan);
}

// Runs every check the plan asks for (law rows always; identity rows for
// symmetric/ones plans; covariance, sweep and norm sections when configured).
inline VerificationReport run_plan(const ExperimentPlan& plan) { return detail::run_checks(plan); }

// Standalone self-averaging sweep.
inline SelfAveragingTable self_averaging_sweep(const ExperimentPlan& plan) {
    plan.validate();
    if (plan.n_sweep.size() < 2)
        throw ValidationError("self-averaging sweep: plan needs n_sweep with at least two dimensions");
    return detail::sweep_impl(plan);
}

// Standalone operator-norm tail check.
inline NormTailSummary norm_tail_check(const ExperimentPlan& plan) {
    plan.validate();
    if (plan.replicas < 30) throw ValidationError("norm tail check: needs replicas >= 30");
    return detail::norm_tail_impl(plan);
}

}  // namespace randdyn
