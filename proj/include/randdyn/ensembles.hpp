#pragma once

// Sampling of the random interaction matrix A = n^{-1/2} W and of initial
// state vectors, plus the exact moments of the supported entry families.
//
// Determinism contract: a given EnsembleSpec reproduces the same draws on
// every run. The matrix and the initial vector come from independent
// substreams of spec.seed, and the draw order is fixed: row-major over all
// entries for the full matrix, row-major over the upper triangle (diagonal
// included) for the symmetric one.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "common.hpp"
#include "rng.hpp"

namespace randdyn {

enum class EntryFamily { gaussian, rademacher, uniform };

inline const char* to_string(EntryFamily f) {
    switch (f) {
        case EntryFamily::gaussian: return "gaussian";
        case EntryFamily::rademacher: return "rademacher";
        case EntryFamily::uniform: return "uniform";
    }
    return "?";
}

inline std::optional<EntryFamily> parse_entry_family(const std::string& s) {
    if (s == "gaussian") return EntryFamily::gaussian;
    if (s == "rademacher") return EntryFamily::rademacher;
    if (s == "uniform") return EntryFamily::uniform;
    return std::nullopt;
}

// Law of one unscaled entry W_ij: mean 0, standard deviation w. The uniform
// family is uniform on [-w*sqrt(3), w*sqrt(3)].
struct EntryLaw {
    EntryFamily family = EntryFamily::gaussian;
    double w = 1.0;

    void validate() const {
        if (!(std::isfinite(w) && w > 0.0)) throw ValidationError("entry law: w must be positive and finite");
    }
};

enum class InitialKind { ones, iid };

// Initial state: either the deterministic all-ones vector or iid coordinates
// with mean a0 and second moment w0sq (so Var = w0sq - a0^2 must be > 0).
struct InitialLaw {
    InitialKind kind = InitialKind::ones;
    EntryFamily family = EntryFamily::gaussian;
    double a0 = 0.0;
    double w0sq = 1.0;

    void validate() const {
        if (kind == InitialKind::ones) return;
        if (!std::isfinite(a0) || !std::isfinite(w0sq))
            throw ValidationError("initial law: a0 and w0sq must be finite");
        if (!(w0sq > a0 * a0))
            throw ValidationError("initial law: needs w0sq > a0^2 (degenerate or ill-posed otherwise)");
    }

    // standard deviation of one coordinate (iid kind)
    double sd() const { return std::sqrt(w0sq - a0 * a0); }
};

struct EnsembleSpec {
    int n = 2;
    bool symmetric = false;
    EntryLaw entry_law;
    InitialLaw initial_law;
    std::uint64_t seed = 0;

    void validate() const {
        if (n < 2) throw ValidationError("ensemble: n must be >= 2");
        entry_law.validate();
        initial_law.validate();
    }
};

struct LawMoments {
    double mean;
    double variance;
    double fourth_moment;
    // exponent alpha in the sub-exponential tail bound exp(-c|x|^alpha);
    // +infinity for bounded families, where every alpha works
    double tail_alpha;
};

inline LawMoments law_moments(const EntryLaw& law) {
    law.validate();
    const double w2 = law.w * law.w;
    const double w4 = w2 * w2;
    const double inf = std::numeric_limits<double>::infinity();
    switch (law.family) {
        case EntryFamily::gaussian: return {0.0, w2, 3.0 * w4, 2.0};
        case EntryFamily::rademacher: return {0.0, w2, w4, inf};
        case EntryFamily::uniform: return {0.0, w2, 1.8 * w4, inf};
    }
    throw ValidationError("entry law: unknown family");
}

namespace detail {

// Unit-variance, zero-mean draw; callers apply the single scale factor, so
// rescaling w rescales every sampled entry exactly.
inline double unit_draw(CounterRng& rng, EntryFamily family) {
    switch (family) {
        case EntryFamily::gaussian: return rng.next_gaussian();
        case EntryFamily::rademacher: return rng.next_sign() ? 1.0 : -1.0;
        case EntryFamily::uniform: return 1.7320508075688772935 * (2.0 * rng.next_unit() - 1.0);
    }
    return 0.0;
}

}  // namespace detail

inline Matrix sample_matrix(const EnsembleSpec& spec) {
    spec.validate();
    CounterRng rng(derive_stream(spec.seed, {stream_word(StreamTag::matrix)}));
    const int n = spec.n;
    const double scale = spec.entry_law.w / std::sqrt(double(n));
    Matrix a(n, n);
    if (spec.symmetric) {
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                const double v = scale * detail::unit_draw(rng, spec.entry_law.family);
                a(i, j) = v;
                a(j, i) = v;
            }
        }
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = scale * detail::unit_draw(rng, spec.entry_law.family);
    }
    return a;
}

inline Vector sample_initial(const EnsembleSpec& spec) {
    spec.validate();
    if (spec.initial_law.kind == InitialKind::ones) return Vector::Ones(spec.n);
    CounterRng rng(derive_stream(spec.seed, {stream_word(StreamTag::initial)}));
    const double sd = spec.initial_law.sd();
    Vector x(spec.n);
    for (int i = 0; i < spec.n; ++i) x(i) = spec.initial_law.a0 + sd * detail::unit_draw(rng, spec.initial_law.family);
    return x;
}

}  // namespace randdyn
