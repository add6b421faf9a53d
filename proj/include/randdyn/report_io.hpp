#pragma once

// Serialization of a VerificationReport into the output directory:
//
//   report.csv   one row per law check:
//                t,law_mean,law_variance,pooled_mean,pooled_variance,
//                mean_se,variance_se,ks,ks_max,n_effective,
//                overflow_replicas,status
//   selfavg.csv  one row per sweep cell:
//                n,lambda,t,replicas,mean_counting,variance
//   norms.csv    one row per norm replica: replica,norm
//   summary.txt  human-readable digest: plan echo, every check with its
//                threshold, stage timings, final PASS/FAIL verdict
//
// The three CSV files are byte-identical across runs of the same (plan,
// master seed) regardless of worker count; wall-clock timings appear only in
// summary.txt. All writes are atomic (temp file + rename). An aborted run is
// recorded by write_incomplete_summary, whose summary.txt carries an
// explicit INCOMPLETE marker line.

#include <string>
#include <vector>

#include "csv.hpp"
#include "harness.hpp"

namespace randdyn {

namespace detail {

inline std::string plan_echo(const ExperimentPlan& plan) {
    std::string out;
    out += "ensemble: n=" + std::to_string(plan.ensemble.n);
    out += plan.ensemble.symmetric ? " symmetric" : " non-symmetric";
    out += " entry=" + std::string(to_string(plan.ensemble.entry_law.family));
    out += " w=" + format_plain(plan.ensemble.entry_law.w);
    out += "\nkappa: " + format_plain(plan.kappa);
    if (plan.ensemble.initial_law.kind == InitialKind::ones) {
        out += "\ninitial: ones";
    } else {
        out += "\ninitial: iid " + std::string(to_string(plan.ensemble.initial_law.family));
        out += " a0=" + format_plain(plan.ensemble.initial_law.a0);
        out += " w0sq=" + format_plain(plan.ensemble.initial_law.w0sq);
    }
    out += "\ntimes:";
    for (double t : plan.times) out += " " + format_plain(t);
    out += "\nreplicas: " + std::to_string(plan.replicas);
    out += "\nseed: " + std::to_string(plan.master_seed);
    out += "\ntol: " + format_plain(plan.tol);
    out += "\nks_max: " + format_plain(plan.thresholds.ks_max);
    if (!plan.n_sweep.empty()) {
        out += "\nn_sweep:";
        for (int n : plan.n_sweep) out += " " + std::to_string(n);
        out += "\nvariance_decay_min_factor: " + format_plain(plan.thresholds.variance_decay_min_factor);
        out += "\nlambdas:";
        for (double l : plan.lambdas) out += " " + format_plain(l);
    }
    return out;
}

}  // namespace detail

inline std::string render_report_csv(const VerificationReport& report) {
    std::string out =
        "t,law_mean,law_variance,pooled_mean,pooled_variance,mean_se,variance_se,ks,ks_max,"
        "n_effective,overflow_replicas,status\n";
    for (const auto& c : report.time_checks) {
        out += format_g17(c.t) + ',' + format_g17(c.law_mean) + ',' + format_g17(c.law_variance) + ',' +
               format_g17(c.pooled_mean) + ',' + format_g17(c.pooled_variance) + ',' +
               format_g17(c.mean_se) + ',' + format_g17(c.variance_se) + ',' + format_g17(c.ks) + ',' +
               format_g17(report.plan.thresholds.ks_max) + ',' + std::to_string(c.n_effective) + ',' +
               std::to_string(c.overflow_replicas) + ',' +
               (c.unverifiable ? "unverifiable" : (c.pass ? "pass" : "fail")) + '\n';
    }
    return out;
}

inline std::string render_selfavg_csv(const VerificationReport& report) {
    std::string out = "n,lambda,t,replicas,mean_counting,variance\n";
    if (report.self_averaging) {
        for (const auto& c : report.self_averaging->cells) {
            out += std::to_string(c.n) + ',' + format_g17(c.lambda) + ',' + format_g17(c.t) + ',' +
                   std::to_string(c.replicas_used) + ',' + format_g17(c.mean_counting) + ',' +
                   format_g17(c.variance) + '\n';
        }
    }
    return out;
}

inline std::string render_norms_csv(const VerificationReport& report) {
    std::string out = "replica,norm\n";
    if (report.norm_tail) {
        for (std::size_t r = 0; r < report.norm_tail->norms.size(); ++r)
            out += std::to_string(r) + ',' + format_g17(report.norm_tail->norms[r]) + '\n';
    }
    return out;
}

inline std::string render_summary(const VerificationReport& report) {
    std::string out = "verification summary\n====================\n";
    out += detail::plan_echo(report.plan);
    out += "\nworkers: " + std::to_string(report.workers) + "\n";

    out += "\n[law checks] ks threshold " + format_plain(report.plan.thresholds.ks_max) + "\n";
    for (const auto& c : report.time_checks) {
        out += "t=" + format_plain(c.t);
        if (c.unverifiable) {
            out += ": UNVERIFIABLE (every replica overflowed; " + std::to_string(c.overflow_replicas) +
                   " excluded)\n";
            continue;
        }
        out += ": ks=" + format_plain(c.ks) + " law=(" + format_plain(c.law_mean) + ", " +
               format_plain(c.law_variance) + ")" + " pooled=(" + format_plain(c.pooled_mean) + ", " +
               format_plain(c.pooled_variance) + ")" + " se=(" + format_plain(c.mean_se) + ", " +
               format_plain(c.variance_se) + ")" + " n_eff=" + std::to_string(c.n_effective);
        if (c.overflow_replicas > 0)
            out += " excluded_replicas=" + std::to_string(c.overflow_replicas);
        out += c.pass ? " -> PASS\n" : " -> FAIL\n";
    }

    if (!report.identity_checks.empty()) {
        out += "\n[second-moment identity] |mean| <= " + format_plain(kMaxSigmas) + " se\n";
        for (const auto& c : report.identity_checks) {
            out += "t=" + format_plain(c.t) + " vs 2t=" + format_plain(c.t2) + ": diff=" +
                   format_plain(c.mean_difference) + " se=" + format_plain(c.se) + " sigmas=" +
                   format_plain(c.sigmas) + (c.pass ? " -> PASS\n" : " -> FAIL\n");
        }
    }

    if (!report.covariance_checks.empty()) {
        out += "\n[covariance kernel] |estimate - predicted| <= " + format_plain(kMaxSigmas) + " se\n";
        for (const auto& c : report.covariance_checks) {
            out += "(t=" + format_plain(c.t) + ", s=" + format_plain(c.s) + "): estimate=" +
                   format_plain(c.estimate) + " predicted=" + format_plain(c.predicted) + " se=" +
                   format_plain(c.se) + " sigmas=" + format_plain(c.sigmas) +
                   (c.pass ? " -> PASS\n" : " -> FAIL\n");
        }
    }

    if (report.self_averaging) {
        out += "\n[self-averaging] variance must drop by factor >= " +
               format_plain(report.plan.thresholds.variance_decay_min_factor) + "\n";
        for (const auto& v : report.self_averaging->verdicts) {
            out += "lambda=" + format_plain(v.lambda) + " t=" + format_plain(v.t) + ": var(n=" +
                   std::to_string(v.n_small) + ")=" + format_plain(v.var_small) + " var(n=" +
                   std::to_string(v.n_large) + ")=" + format_plain(v.var_large);
            if (v.tail_excluded)
                out += " -> EXCLUDED (tail cell, counting value degenerate)\n";
            else
                out += v.pass ? " -> PASS\n" : " -> FAIL\n";
        }
    }

    if (report.norm_tail) {
        const auto& nt = *report.norm_tail;
        const int converged = nt.replicas - nt.nonconverged;
        out += "\n[operator-norm tail] eps=" + format_plain(nt.epsilon) + "\n";
        out += "replicas=" + std::to_string(nt.replicas) + " converged=" + std::to_string(converged) +
               " above 2w+eps: " + std::to_string(nt.above_sym_edge) + " above 4w+eps: " +
               std::to_string(nt.above_iid_bound) + "\n";
        out += report.plan.ensemble.symmetric
                   ? "expectation: symmetric ensembles concentrate below 2w+eps\n"
                   : "expectation: non-symmetric ensembles concentrate below 4w+eps (typically near 2w)\n";
    }

    out += "\n[stage timings]\n";
    for (const auto& s : report.timings)
        out += s.stage + ": " + format_plain(s.seconds) + "s\n";

    out += std::string("\nRESULT: ") + (report.all_pass() ? "PASS" : "FAIL") + "\n";
    return out;
}

// Writes report.csv, selfavg.csv, norms.csv and summary.txt into out_dir.
inline void write_reports(const VerificationReport& report, const std::string& out_dir) {
    write_file_atomic(out_dir + "/report.csv", render_report_csv(report));
    write_file_atomic(out_dir + "/selfavg.csv", render_selfavg_csv(report));
    write_file_atomic(out_dir + "/norms.csv", render_norms_csv(report));
    write_file_atomic(out_dir + "/summary.txt", render_summary(report));
}

// Records an aborted run: summary.txt gains a leading INCOMPLETE marker and
// the reason; CSVs that were never computed are left as written (if at all).
inline void write_incomplete_summary(const ExperimentPlan& plan, const std::string& out_dir,
                                     const std::string& reason) {
    std::string out = "INCOMPLETE: " + reason + "\n\n";
    out += "verification summary (aborted)\n==============================\n";
    out += detail::plan_echo(plan);
    out += "\nRESULT: INCOMPLETE\n";
    write_file_atomic(out_dir + "/summary.txt", out);
}

}  // namespace randdyn
