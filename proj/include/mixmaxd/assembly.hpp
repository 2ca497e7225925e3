#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "mixmaxd/lattice.hpp"
#include "mixmaxd/levels.hpp"
#include "mixmaxd/space.hpp"

namespace mixmaxd {

// A fully specified design: code, per-dimension sizes, translation, and the
// chosen level sets (|levels[k]| == s[k], endpoints anchored).
struct DesignSpec {
    BinaryCode code;
    std::vector<int> s;
    std::uint32_t u = 0;
    std::vector<LevelSet> levels;

    void validate() const {
        if (static_cast<int>(s.size()) != code.p || levels.size() != s.size())
            throw std::invalid_argument("design spec: dimension mismatch");
        for (std::size_t k = 0; k < s.size(); ++k) {
            if (levels[k].size() != s[k])
                throw std::invalid_argument("design spec: level count does not match s");
            if (s[k] < 1) throw std::invalid_argument("design spec: sizes must be positive");
        }
    }
};

struct Design {
    std::vector<std::vector<double>> points; // scaled coordinates
    double rho = 0;
    unsigned long long m = 0;
    DesignSpec cert;
};

// Points of the translated lattice inside the index box, mapped through the
// sorted level values. Rows come out in lexicographic index order.
inline Design realize(const DesignSpec& spec, unsigned long long row_cap = 10'000'000ull) {
    spec.validate();
    const int p = spec.code.p;
    unsigned long long expect = count_points(spec.code, spec.s, spec.u);
    if (expect > row_cap) throw std::runtime_error("realize: design exceeds row cap");
    Design d;
    d.cert = spec;
    d.m = expect;
    d.points.reserve(expect);
    std::vector<int> idx(p, 0);
    while (true) {
        std::uint32_t parity = spec.u;
        for (int k = 0; k < p; ++k)
            if (idx[k] & 1) parity ^= spec.code.unit(k + 1);
        if (spec.code.contains(parity)) {
            std::vector<double> row(p);
            for (int k = 0; k < p; ++k) row[k] = spec.levels[k].vals[idx[k]];
            d.points.push_back(std::move(row));
        }
        int k = p - 1;
        while (k >= 0 && idx[k] == spec.s[k] - 1) { idx[k] = 0; --k; }
        if (k < 0) break;
        ++idx[k];
    }
    if (d.points.size() != expect) throw std::logic_error("realize: row count mismatch");
    return d;
}

// Separation distance of an untranslated spec:
//   min( min over nonzero code words of sqrt(sum of dstar^2 on set bits),
//        min over dims with s_k > 2 of dplus ).
// Translations leave the value unchanged, so callers handle u by passing the
// u = 0 spec.
inline double separation(const BinaryCode& code, std::span<const int> s,
                         std::span<const LevelSet> levels) {
    if (static_cast<int>(s.size()) != code.p || levels.size() != s.size())
        throw std::invalid_argument("separation: dimension mismatch");
    double best_words = std::numeric_limits<double>::infinity();
    for (auto wrd : code.words) {
        if (wrd == 0) continue;
        double acc = 0;
        for (int k = 1; k <= code.p; ++k)
            if (wrd & code.unit(k)) acc += levels[k - 1].dstar * levels[k - 1].dstar;
        best_words = std::min(best_words, acc);
    }
    double rho = std::sqrt(best_words);
    for (std::size_t k = 0; k < levels.size(); ++k)
        if (s[k] > 2) rho = std::min(rho, levels[k].dplus);
    return rho;
}

inline double separation(const DesignSpec& spec) {
    if (spec.u != 0) throw std::invalid_argument("separation: formula applies to u = 0 specs");
    for (std::size_t k = 0; k < spec.levels.size(); ++k)
        if (spec.s[k] < 2) throw std::invalid_argument("separation: sizes must be at least 2");
    return separation(spec.code, spec.s, spec.levels);
}

// Exact pairwise minimum distance; the oracle for the formula above.
inline double separation_bruteforce(const Design& design, std::size_t max_rows = 20000) {
    if (design.points.size() < 2) throw std::invalid_argument("separation_bruteforce: need two rows");
    if (design.points.size() > max_rows) throw std::runtime_error("separation_bruteforce: too many rows");
    double best = std::numeric_limits<double>::infinity();
    const std::size_t m = design.points.size();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            double acc = 0;
            for (std::size_t k = 0; k < design.points[i].size(); ++k) {
                double d = design.points[i][k] - design.points[j][k];
                acc += d * d;
                if (acc >= best) break;
            }
            best = std::min(best, acc);
        }
    }
    return std::sqrt(best);
}

// ---------------------------------------------------------------------------
// Level optimization for a fixed (code, s).

struct DimSpec {
    bool continuous = true;
    double w = 1.0;
};

// Highest common two-apart gap d for the active continuous block, subject to
//   d >= rho_floor,
//   d <= dplus of every inactive dimension (s_k > 2),
//   d <= 2 w_k / (s_k - 2) for every active dimension,
//   and for every nonzero code word x:
//     d^2 <= sum_{k active, x_k=1} (w_k - d (s_k-2)/2)^2 + sum_{k inactive, x_k=1} dstar_k^2.
// Each word constraint expands to A d^2 + B d - C <= 0 with A = 1 - sum a_k^2
// <= 0 (a_k = (s_k-2)/2 >= 1), so on [0, cap] the feasible set is a single
// interval and closed-form roots suffice. Returns rho_floor when infeasible.
inline double solve_dplus_block(const BinaryCode& code, const std::vector<int>& active,
                                std::span<const double> dstar_fixed,
                                std::span<const double> dplus_fixed,
                                std::span<const DimSpec> dims, std::span<const int> s,
                                double rho_floor) {
    if (active.empty()) throw std::invalid_argument("solve_dplus_block: empty active set");
    std::vector<char> is_active(code.p, 0);
    for (int k : active) {
        if (k < 0 || k >= code.p || !dims[k].continuous || s[k] <= 2 || s[k] % 2 != 0)
            throw std::invalid_argument("solve_dplus_block: active dims must be continuous with even s > 2");
        is_active[k] = 1;
    }
    double hi = std::numeric_limits<double>::infinity();
    for (int k = 0; k < code.p; ++k) {
        if (is_active[k]) hi = std::min(hi, 2.0 * dims[k].w / (s[k] - 2));
        else if (s[k] > 2) hi = std::min(hi, dplus_fixed[k]);
    }
    for (auto wrd : code.words) {
        if (wrd == 0) continue;
        double sum_a2 = 0, sum_wa = 0, sum_w2 = 0, cx = 0;
        bool touches_active = false;
        for (int k = 0; k < code.p; ++k) {
            if (!(wrd & code.unit(k + 1))) continue;
            if (is_active[k]) {
                double a = (s[k] - 2) / 2.0;
                sum_a2 += a * a;
                sum_wa += dims[k].w * a;
                sum_w2 += dims[k].w * dims[k].w;
                touches_active = true;
            } else {
                cx += dstar_fixed[k] * dstar_fixed[k];
            }
        }
        if (!touches_active) {
            hi = std::min(hi, std::sqrt(cx));
            continue;
        }
        double A = 1.0 - sum_a2, B = 2.0 * sum_wa, C = sum_w2 + cx;
        if (std::abs(A) < 1e-14) {
            hi = std::min(hi, C / B);
        } else {
            // A < 0: |A| d^2 - B d + C >= 0; feasible below the smaller root
            double disc = B * B - 4.0 * (-A) * C;
            if (disc >= 0) hi = std::min(hi, (B - std::sqrt(disc)) / (2.0 * (-A)));
        }
    }
    if (hi < rho_floor) return rho_floor;
    return hi;
}

struct OptimizeResult {
    std::vector<LevelSet> levels;
    double rho = 0;
};

// Walk the candidate families from the max-dstar corner, raising the binding
// two-apart gaps until the word bound becomes active or no dimension can move.
inline OptimizeResult optimize_levels(const BinaryCode& code, std::span<const int> s,
                                      std::span<const CandidateFamily> families,
                                      std::span<const DimSpec> dims) {
    const double kTol = 1e-9;
    const int p = code.p;
    if (static_cast<int>(s.size()) != p || static_cast<int>(families.size()) != p ||
        static_cast<int>(dims.size()) != p)
        throw std::invalid_argument("optimize_levels: dimension mismatch");

    std::vector<LevelSet> cur(p);
    for (int k = 0; k < p; ++k) cur[k] = family_max_dstar_member(families[k]);

    auto word_bound = [&](std::span<const LevelSet> lv) {
        double best = std::numeric_limits<double>::infinity();
        for (auto wrd : code.words) {
            if (wrd == 0) continue;
            double acc = 0;
            for (int k = 0; k < p; ++k)
                if (wrd & code.unit(k + 1)) acc += lv[k].dstar * lv[k].dstar;
            best = std::min(best, acc);
        }
        return std::sqrt(best);
    };

    OptimizeResult best;
    best.rho = -1;
    double prev_rho = 0;
    const double init_rho = separation(code, s, cur);
    int iter_cap = 2 * p + 8; // every surviving pass strictly raises rho
    for (int k = 0; k < p; ++k) iter_cap += static_cast<int>(families[k].members.size());

    for (int iter = 0; iter < iter_cap; ++iter) {
        double rho = separation(code, s, cur);
        if (rho > prev_rho + kTol || best.rho < 0) {
            if (rho > best.rho) { best.rho = rho; best.levels = cur; }
        } else {
            break; // no improvement
        }
        prev_rho = rho;
        if (rho >= word_bound(cur) - kTol) break; // bound by adjacent gaps: no move helps
        bool family_capped = false;
        for (int k = 0; k < p; ++k) {
            if (s[k] > 2 && std::abs(cur[k].dplus - rho) <= kTol &&
                families[k].max_dplus() <= rho + kTol)
                family_capped = true;
        }
        if (family_capped) break;

        std::vector<LevelSet> next = cur;
        std::vector<int> active;
        bool any_move = false;
        for (int k = 0; k < p; ++k) {
            if (s[k] <= 2 || cur[k].dplus > rho + kTol) continue; // retained
            if (dims[k].continuous) {
                if (s[k] % 2 == 0) { active.push_back(k); any_move = true; }
                // odd s: single-member family, frozen
            } else {
                auto up = family_next_above_dplus(families[k], cur[k].dplus);
                if (up) { next[k] = *up; any_move = true; }
                // exhausted family: frozen
            }
        }
        if (!any_move) break;
        double rho_after = separation(code, s, next);
        if (rho_after < rho - kTol) break; // advancing the bound dims lost ground

        if (!active.empty()) {
            std::vector<double> dstar_fixed(p, 0), dplus_fixed(p, 0);
            for (int k = 0; k < p; ++k) {
                dstar_fixed[k] = next[k].dstar;
                dplus_fixed[k] = next[k].dplus;
            }
            double floor = std::min(rho_after, rho);
            double dhat = solve_dplus_block(code, active, dstar_fixed, dplus_fixed, dims, s, floor);
            bool degenerate = false;
            for (int k : active) {
                double v1 = dims[k].w - dhat * (s[k] - 2) / 2.0;
                if (v1 <= 1e-12) { degenerate = true; break; }
            }
            if (degenerate) break;
            for (int k : active) next[k] = family_even_with_dplus(families[k], dhat);
        }
        cur = std::move(next);
    }
    if (best.rho + kTol < init_rho) throw std::logic_error("optimize_levels: lost ground");
    return best;
}

} // namespace mixmaxd
