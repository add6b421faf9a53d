#include <catch2/catch_amalgamated.hpp>

#include <randdyn/harness.hpp>
#include <randdyn/report_io.hpp>

#include <cstdlib>
#include <string>
#include <vector>

using namespace randdyn;

namespace {

ExperimentPlan base_plan() {
    ExperimentPlan p;
    p.ensemble.n = 300;
    p.ensemble.symmetric = false;
    p.ensemble.entry_law = {EntryFamily::gaussian, 1.0};
    p.kappa = 0.0;
    p.times = {0.0, 0.5, 1.0};
    p.tol = 1e-10;
    p.replicas = 40;
    p.master_seed = 20260816;
    p.thresholds.ks_max = 0.05;  // wide band for the small panels used here
    return p;
}

struct EnvGuard {
    explicit EnvGuard(const char* value) {
        if (value)
            setenv("RANDDYN_WORKERS", value, 1);
        else
            unsetenv("RANDDYN_WORKERS");
    }
    ~EnvGuard() { unsetenv("RANDDYN_WORKERS"); }
};

}  // namespace

TEST_CASE("gaussian verification on a small non-symmetric panel") {
    const ExperimentPlan plan = base_plan();
    const VerificationReport report = verify_gaussian_iid(plan);
    REQUIRE(report.time_checks.size() == 3);

    // t = 0: the ones start reproduces the degenerate law exactly
    const TimeCheck& first = report.time_checks.front();
    REQUIRE(first.t == 0.0);
    REQUIRE(first.ks == 0.0);
    REQUIRE(first.law_variance == 0.0);
    REQUIRE(first.pooled_mean == 1.0);
    REQUIRE(first.pass);

    for (const auto& row : report.time_checks) {
        INFO("t = " << row.t << " ks = " << row.ks);
        REQUIRE_FALSE(row.unverifiable);
        REQUIRE(row.overflow_replicas == 0);
        REQUIRE(row.n_effective == 300L * 40L);
        REQUIRE(row.pass);
    }
    REQUIRE(report.identity_checks.empty());  // not a symmetric plan
    REQUIRE(report.all_pass());

    // the simulate and law-check stages are always timed
    REQUIRE(report.timings.size() >= 2);
    REQUIRE(report.timings[0].stage == "simulate");
}

TEST_CASE("symmetric verification includes the second-moment identity") {
    ExperimentPlan plan = base_plan();
    plan.ensemble.symmetric = true;
    const VerificationReport report = verify_gaussian_sym(plan);
    REQUIRE(report.time_checks.size() == 3);
    for (const auto& row : report.time_checks) {
        INFO("t = " << row.t << " ks = " << row.ks);
        REQUIRE(row.pass);
    }
    // identity rows: t = 0 pairs with itself, t = 0.5 pairs with 1.0
    REQUIRE(report.identity_checks.size() == 2);
    const IdentityCheck& trivial = report.identity_checks[0];
    REQUIRE(trivial.t == 0.0);
    REQUIRE(trivial.t2 == 0.0);
    REQUIRE(trivial.mean_difference == 0.0);
    REQUIRE(trivial.se == 0.0);
    REQUIRE(trivial.pass);
    const IdentityCheck& paired = report.identity_checks[1];
    REQUIRE(paired.t == 0.5);
    REQUIRE(paired.t2 == 1.0);
    INFO("identity sigmas = " << paired.sigmas);
    REQUIRE(paired.pass);
    REQUIRE(report.all_pass());
}

TEST_CASE("mixture verification for two-atom and gaussian starts") {
    ExperimentPlan plan = base_plan();
    plan.times = {0.5, 1.0};
    plan.ensemble.initial_law.kind = InitialKind::iid;
    plan.ensemble.initial_law.family = EntryFamily::rademacher;
    plan.ensemble.initial_law.a0 = 0.0;
    plan.ensemble.initial_law.w0sq = 1.0;
    const VerificationReport atoms = verify_mixture(plan);
    for (const auto& row : atoms.time_checks) {
        INFO("two-atom t = " << row.t << " ks = " << row.ks);
        REQUIRE(row.pass);
    }

    plan.ensemble.initial_law.family = EntryFamily::gaussian;
    plan.ensemble.initial_law.a0 = 0.25;
    plan.ensemble.initial_law.w0sq = 1.0;
    plan.ensemble.symmetric = true;
    const VerificationReport smooth = verify_mixture(plan);
    for (const auto& row : smooth.time_checks) {
        INFO("gaussian-start t = " << row.t << " ks = " << row.ks);
        REQUIRE(row.pass);
    }
}

TEST_CASE("covariance kernel rows sit inside the replica error band") {
    ExperimentPlan plan = base_plan();
    plan.covariance_pairs = {{0.5, 1.0}, {1.0, 1.0}};
    const VerificationReport report = run_plan(plan);
    REQUIRE(report.covariance_checks.size() == 2);
    for (const auto& row : report.covariance_checks) {
        INFO("(t, s) = (" << row.t << ", " << row.s << ") sigmas = " << row.sigmas);
        REQUIRE(row.predicted == covariance_iid(1.0, row.t, row.s));
        REQUIRE(row.se > 0.0);
        REQUIRE(row.pass);
    }
    REQUIRE(report.all_pass());
}

TEST_CASE("self-averaging sweep sees the variance collapse") {
    ExperimentPlan plan = base_plan();
    plan.times = {0.5};
    plan.replicas = 32;
    plan.n_sweep = {100, 400};
    plan.lambdas.clear();  // default: the law mean, never a tail cell here
    const SelfAveragingTable table = self_averaging_sweep(plan);
    REQUIRE(table.cells.size() == 2);  // 2 n values x 1 lambda x 1 time
    REQUIRE(table.verdicts.size() == 1);
    const SelfAvgVerdict& v = table.verdicts.front();
    REQUIRE(v.n_small == 100);
    REQUIRE(v.n_large == 400);
    REQUIRE_FALSE(v.tail_excluded);
    INFO("var(100) = " << v.var_small << " var(400) = " << v.var_large);
    REQUIRE(v.var_small > 0.0);
    REQUIRE(v.var_large > 0.0);
    REQUIRE(v.pass);  // factor >= 2 demanded; ~4 expected
    REQUIRE(table.all_pass());

    // a lambda far in the tail is excluded rather than failed
    ExperimentPlan tail = plan;
    tail.lambdas = {1e6};
    const SelfAveragingTable tail_table = self_averaging_sweep(tail);
    REQUIRE(tail_table.verdicts.size() == 1);
    REQUIRE(tail_table.verdicts.front().tail_excluded);
    REQUIRE(tail_table.all_pass());
}

TEST_CASE("operator norms of small symmetric panels stay under the edge bound") {
    ExperimentPlan plan = base_plan();
    plan.ensemble.n = 400;
    plan.ensemble.symmetric = true;
    plan.times = {0.5};
    plan.replicas = 30;
    const NormTailSummary summary = norm_tail_check(plan);
    REQUIRE(summary.replicas == 30);
    REQUIRE(summary.epsilon == 0.25);
    REQUIRE(summary.norms.size() == 30);
    REQUIRE(summary.nonconverged == 0);
    REQUIRE(summary.above_sym_edge == 0);
    REQUIRE(summary.above_iid_bound == 0);
    for (double norm : summary.norms) {
        REQUIRE(norm > 1.5);  // the edge is near 2w = 2
        REQUIRE(norm < 2.25);
    }
}

TEST_CASE("reports are byte-identical across worker counts") {
    ExperimentPlan plan = base_plan();
    plan.ensemble.n = 120;
    plan.replicas = 32;
    plan.times = {0.5, 1.0};
    plan.n_sweep = {60, 120};
    plan.check_norms = true;
    plan.covariance_pairs = {{0.5, 1.0}};

    std::string csv_1, selfavg_1, norms_1;
    {
        EnvGuard env("1");
        const VerificationReport r = run_plan(plan);
        REQUIRE(r.workers == 1);
        csv_1 = render_report_csv(r);
        selfavg_1 = render_selfavg_csv(r);
        norms_1 = render_norms_csv(r);
    }
    {
        EnvGuard env("3");
        const VerificationReport r = run_plan(plan);
        REQUIRE(r.workers == 3);
        REQUIRE(render_report_csv(r) == csv_1);
        REQUIRE(render_selfavg_csv(r) == selfavg_1);
        REQUIRE(render_norms_csv(r) == norms_1);
    }

    // the rendered rows carry content
    REQUIRE(csv_1.find("pass") != std::string::npos);
    REQUIRE(selfavg_1.find("\n60,") != std::string::npos);
    REQUIRE(norms_1.find("\n0,") != std::string::npos);
}

TEST_CASE("worker count honours and validates the environment override") {
    {
        EnvGuard env("7");
        REQUIRE(worker_count() == 7);
    }
    {
        EnvGuard env("0");
        REQUIRE_THROWS_AS(worker_count(), ValidationError);
    }
    {
        EnvGuard env("2000");
        REQUIRE_THROWS_AS(worker_count(), ValidationError);
    }
    {
        EnvGuard env("abc");
        REQUIRE_THROWS_AS(worker_count(), ValidationError);
    }
    {
        EnvGuard env(nullptr);
        REQUIRE(worker_count() >= 1);
    }
}

TEST_CASE("verification wrappers enforce the ensemble shape") {
    ExperimentPlan plan = base_plan();
    plan.ensemble.symmetric = true;
    REQUIRE_THROWS_AS(verify_gaussian_iid(plan), ValidationError);
    plan.ensemble.symmetric = false;
    REQUIRE_THROWS_AS(verify_gaussian_sym(plan), ValidationError);
    REQUIRE_THROWS_AS(verify_mixture(plan), ValidationError);  // ones start
    plan.ensemble.initial_law.kind = InitialKind::iid;
    REQUIRE_THROWS_AS(verify_gaussian_iid(plan), ValidationError);
}

TEST_CASE("rows where every replica overflowed are unverifiable, not failures") {
    // hand-built panel: valid ones at t = 0, every replica flagged at t = 1
    ExperimentPlan plan = base_plan();
    plan.ensemble.n = 3;
    plan.replicas = 2;
    plan.times = {0.0, 1.0};

    ReplicaPanel panel;
    for (int r = 0; r < 2; ++r) {
        std::vector<TrajectoryFrame> frames(2);
        frames[0].t = 0.0;
        frames[0].x = Vector::Ones(3);
        frames[1].t = 1.0;
        frames[1].x = Vector::Constant(3, std::numeric_limits<double>::quiet_NaN());
        frames[1].overflow = true;
        panel.add_replica(frames);
    }
    const auto rows = detail::check_law_rows(panel, plan);
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[0].pass);
    REQUIRE(rows[1].unverifiable);
    REQUIRE(rows[1].overflow_replicas == 2);
    REQUIRE_FALSE(rows[1].pass);

    VerificationReport report;
    report.plan = plan;
    report.time_checks = rows;
    REQUIRE(report.all_pass());  // unverifiable rows are excluded from the verdict

    const std::string csv = render_report_csv(report);
    REQUIRE(csv.find("unverifiable") != std::string::npos);
    const std::string summary = render_summary(report);
    REQUIRE(summary.find("UNVERIFIABLE") != std::string::npos);
}
