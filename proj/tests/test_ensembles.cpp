#include <catch2/catch_amalgamated.hpp>

#include <randdyn/ensembles.hpp>

#include <cmath>
#include <limits>

using namespace randdyn;

namespace {

EnsembleSpec base_spec(int n, bool symmetric, EntryFamily family, double w, std::uint64_t seed) {
    EnsembleSpec s;
    s.n = n;
    s.symmetric = symmetric;
    s.entry_law.family = family;
    s.entry_law.w = w;
    s.seed = seed;
    return s;
}

}  // namespace

TEST_CASE("validation rejects degenerate parameters") {
    EnsembleSpec s = base_spec(3, false, EntryFamily::gaussian, 1.0, 1);
    s.entry_law.w = 0.0;
    REQUIRE_THROWS_AS(s.validate(), ValidationError);
    s.entry_law.w = -1.0;
    REQUIRE_THROWS_AS(s.validate(), ValidationError);
    s.entry_law.w = std::numeric_limits<double>::infinity();
    REQUIRE_THROWS_AS(s.validate(), ValidationError);

    s = base_spec(1, false, EntryFamily::gaussian, 1.0, 1);
    REQUIRE_THROWS_AS(s.validate(), ValidationError);

    s = base_spec(4, false, EntryFamily::gaussian, 1.0, 1);
    s.initial_law.kind = InitialKind::iid;
    s.initial_law.a0 = 1.0;
    s.initial_law.w0sq = 1.0;  // w0sq == a0^2: degenerate
    REQUIRE_THROWS_AS(s.validate(), ValidationError);
    s.initial_law.w0sq = 0.5;  // w0sq < a0^2: ill-posed
    REQUIRE_THROWS_AS(s.validate(), ValidationError);
    s.initial_law.w0sq = 2.0;
    REQUIRE_NOTHROW(s.validate());
}

TEST_CASE("symmetric rademacher entries have the exact magnitude n^{-1/2} w") {
    const EnsembleSpec s = base_spec(3, true, EntryFamily::rademacher, 1.0, 7);
    const Matrix a = sample_matrix(s);
    const double mag = 1.0 / std::sqrt(3.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) REQUIRE(std::abs(a(i, j)) == mag);
    REQUIRE((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sampling is deterministic per spec and varies with the seed") {
    const EnsembleSpec s = base_spec(20, false, EntryFamily::uniform, 0.7, 123);
    const Matrix a = sample_matrix(s);
    const Matrix b = sample_matrix(s);
    REQUIRE((a - b).cwiseAbs().maxCoeff() == 0.0);
    EnsembleSpec s2 = s;
    s2.seed = 124;
    REQUIRE((a - sample_matrix(s2)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("rescaling w rescales every entry exactly") {
    // powers of two keep the scalar multiplication exact in binary floating point
    for (double c : {2.0, 4.0, 0.5}) {
        for (EntryFamily fam : {EntryFamily::gaussian, EntryFamily::rademacher, EntryFamily::uniform}) {
            const EnsembleSpec s1 = base_spec(17, true, fam, 0.75, 99);
            EnsembleSpec s2 = s1;
            s2.entry_law.w = c * s1.entry_law.w;
            const Matrix a1 = sample_matrix(s1);
            const Matrix a2 = sample_matrix(s2);
            REQUIRE((a2 - c * a1).cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("pooled entry moments match the law for every family") {
    const int n = 1000;
    for (EntryFamily fam : {EntryFamily::gaussian, EntryFamily::rademacher, EntryFamily::uniform}) {
        const double w = 1.3;
        const EnsembleSpec s = base_spec(n, false, fam, w, 2718);
        const Matrix a = sample_matrix(s);
        const LawMoments m = law_moments(s.entry_law);
        const double count = double(n) * double(n);
        // rescale to the unscaled entries W_ij = sqrt(n) A_ij
        const Matrix wm = std::sqrt(double(n)) * a;
        const double mean = wm.sum() / count;
        const double second = wm.squaredNorm() / count;
        const double fourth = wm.array().pow(4).sum() / count;
        // 5 SE bands from the law's own higher moments
        const double se_mean = std::sqrt(m.variance / count);
        const double se_second = std::sqrt(std::max(m.fourth_moment - m.variance * m.variance, 0.0) / count);
        REQUIRE(std::abs(mean - m.mean) <= 5.0 * se_mean);
        REQUIRE(std::abs(second - m.variance) <= 5.0 * std::max(se_second, 1e-12));
        REQUIRE(fourth == Catch::Approx(m.fourth_moment).margin(0.05 * m.fourth_moment + 1e-12));
    }
}

TEST_CASE("law moments carry the family's exact constants") {
    EntryLaw g{EntryFamily::gaussian, 2.0};
    REQUIRE(law_moments(g).variance == 4.0);
    REQUIRE(law_moments(g).fourth_moment == 48.0);
    REQUIRE(law_moments(g).tail_alpha == 2.0);

    EntryLaw r{EntryFamily::rademacher, 1.0};
    REQUIRE(law_moments(r).fourth_moment == 1.0);
    REQUIRE(std::isinf(law_moments(r).tail_alpha));

    EntryLaw u{EntryFamily::uniform, 1.0};
    REQUIRE(law_moments(u).variance == 1.0);
    REQUIRE(law_moments(u).fourth_moment == Catch::Approx(1.8).epsilon(1e-15));
    REQUIRE(std::isinf(law_moments(u).tail_alpha));
}

TEST_CASE("ones initial vector is exact") {
    EnsembleSpec s = base_spec(4, false, EntryFamily::gaussian, 1.0, 5);
    const Vector x = sample_initial(s);
    REQUIRE(x.size() == 4);
    for (int i = 0; i < 4; ++i) REQUIRE(x(i) == 1.0);
}

TEST_CASE("iid initial coordinates have the requested moments") {
    EnsembleSpec s = base_spec(10000, false, EntryFamily::gaussian, 1.0, 5);
    s.initial_law.kind = InitialKind::iid;
    s.initial_law.family = EntryFamily::gaussian;
    s.initial_law.a0 = 0.0;
    s.initial_law.w0sq = 1.0;
    const Vector x = sample_initial(s);
    const double mean = x.sum() / double(s.n);
    const double second = x.squaredNorm() / double(s.n);
    REQUIRE(std::abs(mean) <= 4.0 / std::sqrt(double(s.n)));
    REQUIRE(std::abs(second - 1.0) <= 4.0 * std::sqrt(2.0 / double(s.n)));

    // shifted law: mean 1, second moment 2
    s.initial_law.a0 = 1.0;
    s.initial_law.w0sq = 2.0;
    const Vector y = sample_initial(s);
    REQUIRE(std::abs(y.sum() / double(s.n) - 1.0) <= 4.0 / std::sqrt(double(s.n)));
    REQUIRE(std::abs(y.squaredNorm() / double(s.n) - 2.0) <= 4.0 * std::sqrt(10.0 / double(s.n)));
}

TEST_CASE("matrix and initial-vector streams are independent substreams") {
    EnsembleSpec s = base_spec(50, false, EntryFamily::gaussian, 1.0, 77);
    s.initial_law.kind = InitialKind::iid;
    const Vector x1 = sample_initial(s);
    (void)sample_matrix(s);  // interleaving matrix draws must not move the initial stream
    const Vector x2 = sample_initial(s);
    REQUIRE((x1 - x2).cwiseAbs().maxCoeff() == 0.0);
}
