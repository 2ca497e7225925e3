#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mixmaxd/rational.hpp"

namespace mixmaxd {

// Sorted level values of one dimension, with the two gap statistics the
// separation formula depends on: dstar = smallest adjacent gap, dplus =
// smallest gap between levels two positions apart (+inf for two levels).
// Discrete-origin sets keep exact rationals alongside the doubles.
struct LevelSet {
    bool exact = false;
    std::vector<Rat> rvals;
    std::vector<double> vals;
    double dstar = 0;
    double dplus = std::numeric_limits<double>::infinity();
    Rat r_dstar;
    Rat r_dplus;     // valid only when exact && !dplus_inf
    bool dplus_inf = true;

    int size() const { return static_cast<int>(vals.size()); }
};

inline Rat d_star(std::span<const Rat> sorted_vals) {
    if (sorted_vals.size() < 2) throw std::invalid_argument("d_star: need at least two levels");
    Rat best = sorted_vals[1] - sorted_vals[0];
    for (std::size_t i = 1; i + 1 < sorted_vals.size(); ++i) {
        Rat g = sorted_vals[i + 1] - sorted_vals[i];
        if (g <= Rat(0)) throw std::invalid_argument("d_star: levels not strictly increasing");
        if (g < best) best = g;
    }
    if (best <= Rat(0)) throw std::invalid_argument("d_star: levels not strictly increasing");
    return best;
}

inline std::optional<Rat> d_plus(std::span<const Rat> sorted_vals) {
    if (sorted_vals.size() < 2) throw std::invalid_argument("d_plus: need at least two levels");
    d_star(sorted_vals); // validates ordering
    if (sorted_vals.size() == 2) return std::nullopt; // +inf sentinel
    Rat best = sorted_vals[2] - sorted_vals[0];
    for (std::size_t i = 1; i + 2 < sorted_vals.size(); ++i) {
        Rat g = sorted_vals[i + 2] - sorted_vals[i];
        if (g < best) best = g;
    }
    return best;
}

inline double d_star(std::span<const double> sorted_vals) {
    if (sorted_vals.size() < 2) throw std::invalid_argument("d_star: need at least two levels");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < sorted_vals.size(); ++i) {
        double g = sorted_vals[i + 1] - sorted_vals[i];
        if (g <= 0) throw std::invalid_argument("d_star: levels not strictly increasing");
        best = std::min(best, g);
    }
    return best;
}

inline double d_plus(std::span<const double> sorted_vals) {
    if (sorted_vals.size() < 2) throw std::invalid_argument("d_plus: need at least two levels");
    if (sorted_vals.size() == 2) return std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 2 < sorted_vals.size(); ++i)
        best = std::min(best, sorted_vals[i + 2] - sorted_vals[i]);
    return best;
}

inline LevelSet levels_from_rats(std::vector<Rat> vals) {
    LevelSet ls;
    ls.exact = true;
    ls.r_dstar = d_star(std::span<const Rat>(vals));
    auto dp = d_plus(std::span<const Rat>(vals));
    ls.dplus_inf = !dp.has_value();
    if (dp) { ls.r_dplus = *dp; ls.dplus = dp->to_double(); }
    ls.dstar = ls.r_dstar.to_double();
    ls.vals.reserve(vals.size());
    for (auto& v : vals) ls.vals.push_back(v.to_double());
    ls.rvals = std::move(vals);
    return ls;
}

inline LevelSet levels_from_doubles(std::vector<double> vals) {
    LevelSet ls;
    ls.exact = false;
    ls.dstar = d_star(std::span<const double>(vals));
    ls.dplus = d_plus(std::span<const double>(vals));
    ls.dplus_inf = std::isinf(ls.dplus);
    ls.vals = std::move(vals);
    return ls;
}

// ---------------------------------------------------------------------------
// Candidate families F(G_k, s_k): the admissible level sets, i.e. the Pareto
// frontier of (dstar, dplus) over all size-s subsets.

struct CandidateFamily {
    enum class Kind { DiscreteList, ContinuousEven, ContinuousOdd, TwoLevel };
    Kind kind = Kind::TwoLevel;
    std::vector<LevelSet> members; // DiscreteList: sorted by dstar descending
    double w = 1.0;
    int s = 2;

    double max_dstar() const {
        switch (kind) {
            case Kind::DiscreteList: return members.front().dstar;
            case Kind::ContinuousEven:
            case Kind::ContinuousOdd: return w / (s - 1);
            case Kind::TwoLevel: return w;
        }
        return 0;
    }
    // highest dplus over the family; the even continuous family tops out at
    // the degenerate endpoint 2w/(s-2)
    double max_dplus() const {
        switch (kind) {
            case Kind::DiscreteList: return members.back().dplus;
            case Kind::ContinuousEven: return 2 * w / (s - 2);
            case Kind::ContinuousOdd: return 2 * w / (s - 1);
            case Kind::TwoLevel: return std::numeric_limits<double>::infinity();
        }
        return 0;
    }
};

// One-parameter family member for even s: adjacent gaps alternate v1, v2 with
// v2 = (2w - s*v1)/(s-2); dstar = v1 and dplus = v1 + v2.
inline LevelSet even_family_member(double w, int s, double v1) {
    double v2 = (2 * w - s * v1) / (s - 2);
    std::vector<double> vals(s);
    for (int i = 1; i <= s; ++i) vals[i - 1] = (i / 2) * v1 + ((i + 1) / 2 - 1) * v2;
    vals[s - 1] = w; // exact endpoint
    return levels_from_doubles(std::move(vals));
}

inline LevelSet equally_spaced(double w, int s) {
    std::vector<double> vals(s);
    for (int i = 0; i < s; ++i) vals[i] = w * i / (s - 1);
    vals[s - 1] = w;
    return levels_from_doubles(std::move(vals));
}

inline CandidateFamily family_continuous(double w, int s) {
    if (s < 2) throw std::invalid_argument("family_continuous: s must be at least 2");
    CandidateFamily f;
    f.w = w;
    f.s = s;
    if (s == 2) {
        f.kind = CandidateFamily::Kind::TwoLevel;
        f.members.push_back(levels_from_doubles({0.0, w}));
    } else if (s % 2 == 1) {
        f.kind = CandidateFamily::Kind::ContinuousOdd;
        f.members.push_back(equally_spaced(w, s));
    } else {
        f.kind = CandidateFamily::Kind::ContinuousEven;
        f.members.push_back(equally_spaced(w, s)); // the max-dstar endpoint v1 = w/(s-1)
    }
    return f;
}

// ---------------------------------------------------------------------------
// Discrete families. The two greedy subroutines below construct level sets
// from the left with minimal feasible values; exact rational comparisons keep
// the strict/weak thresholds faithful.

struct GapBound {
    bool inf = false;
    Rat value;
    static GapBound zero() { return GapBound{false, Rat(0)}; }
    static GapBound infinite() { return GapBound{true, Rat(0)}; }
};

namespace detail {
// smallest l in G with l >= lo (or l > lo when strict); G sorted ascending
inline std::optional<Rat> least_at_least(std::span<const Rat> g, const Rat& lo, bool strict) {
    for (const auto& l : g) {
        if (strict ? l > lo : l >= lo) return l;
    }
    return std::nullopt;
}
} // namespace detail

// Largest dstar achievable by a size-s subset of G whose dplus strictly
// exceeds dplus_floor; 0 when no such subset exists. Iterated greedy: each
// round builds the leftmost subset with gaps strictly above the current
// record and tightens the record to its dstar.
inline Rat max_dstar_given_dplus(std::span<const Rat> g, int s, const GapBound& dplus_floor) {
    if (s < 2 || s > static_cast<int>(g.size()))
        throw std::invalid_argument("max_dstar_given_dplus: s out of range");
    if (s == 2) return dplus_floor.inf ? Rat(0) : g.back() - g.front();
    Rat dstar(0);
    if (dplus_floor.inf) return dstar;
    while (true) {
        std::vector<Rat> gamma;
        gamma.push_back(g.front()); // 0 by convention of scaled spaces
        auto second = detail::least_at_least(g, gamma[0] + dstar, true);
        if (!second) return dstar;
        gamma.push_back(*second);
        bool complete = true;
        for (int i = 3; i <= s; ++i) {
            Rat lo1 = gamma[i - 2] + dstar;                 // strict
            Rat lo2 = gamma[i - 3] + dplus_floor.value;     // strict
            std::optional<Rat> next;
            for (const auto& l : g)
                if (l > lo1 && l > lo2) { next = l; break; }
            if (!next) { complete = false; break; }
            gamma.push_back(*next);
        }
        if (!complete) return dstar;
        dstar = d_star(std::span<const Rat>(gamma));
    }
}

// The size-s subset of G maximizing dplus subject to dstar(γ) >= dstar_floor,
// first and last levels anchored at the extremes of G. Greedy with the
// two-gap record strictly improving each round; the dstar threshold stays
// weak. Returns nullopt when not even one feasible subset exists.
inline std::optional<std::vector<Rat>> max_dplus_given_dstar(std::span<const Rat> g, int s,
                                                             const Rat& dstar_floor) {
    if (s < 2 || s > static_cast<int>(g.size()))
        throw std::invalid_argument("max_dplus_given_dstar: s out of range");
    if (s > 2 && dstar_floor <= Rat(0))
        throw std::invalid_argument("max_dplus_given_dstar: dstar floor must be positive");
    const Rat top = g.back();
    if (s == 2) {
        if (top - g.front() < dstar_floor) return std::nullopt;
        return std::vector<Rat>{g.front(), top};
    }
    std::optional<std::vector<Rat>> best;
    GapBound dplus = GapBound::zero();
    while (true) {
        std::vector<Rat> gamma;
        gamma.push_back(g.front());
        auto second = detail::least_at_least(g, gamma[0] + dstar_floor, false);
        if (!second) return best;
        gamma.push_back(*second);
        bool complete = true;
        for (int i = 3; i <= s - 1; ++i) {
            std::optional<Rat> next;
            Rat lo1 = gamma[i - 2] + dstar_floor; // weak
            Rat lo2 = gamma[i - 3] + dplus.value; // strict
            for (const auto& l : g)
                if (l >= lo1 && l > lo2) { next = l; break; }
            if (!next) { complete = false; break; }
            gamma.push_back(*next);
        }
        if (complete) {
            // close with the top level; both trailing gaps must be feasible
            if (top < gamma[s - 2] + dstar_floor || top <= gamma[s - 3] + dplus.value)
                complete = false;
            else
                gamma.push_back(top);
        }
        if (!complete) return best;
        auto dp = d_plus(std::span<const Rat>(gamma));
        best = gamma;
        if (!dp) return best; // two-level: nothing to improve
        dplus = GapBound{false, *dp};
    }
}

// Minimal sufficient candidate family for a finite level set: alternate the
// two greedy solves, walking the Pareto frontier from the max-dstar corner to
// the max-dplus corner.
inline CandidateFamily family_discrete(std::span<const Rat> g, int s) {
    if (s < 2 || s > static_cast<int>(g.size()))
        throw std::invalid_argument("family_discrete: s out of range");
    CandidateFamily f;
    f.kind = CandidateFamily::Kind::DiscreteList;
    f.w = g.back().to_double();
    f.s = s;
    if (s == static_cast<int>(g.size())) { // forced: the whole set
        f.members.push_back(levels_from_rats(std::vector<Rat>(g.begin(), g.end())));
        return f;
    }
    GapBound dplus = GapBound::zero();
    while (true) {
        Rat dstar = max_dstar_given_dplus(g, s, dplus);
        if (dstar == Rat(0)) break;
        auto gamma = max_dplus_given_dstar(g, s, dstar);
        if (!gamma) break; // guaranteed feasible at call sites; defensive stop
        auto ls = levels_from_rats(std::move(*gamma));
        if (ls.dplus_inf) { f.members.push_back(std::move(ls)); break; }
        GapBound next{false, ls.r_dplus};
        f.members.push_back(std::move(ls));
        dplus = next;
    }
    if (f.members.empty()) throw std::logic_error("family_discrete: empty family");
    return f;
}

// ---------------------------------------------------------------------------
// Family queries shared by the level optimizer and the searches.

// member with the largest dstar
inline LevelSet family_max_dstar_member(const CandidateFamily& f) {
    return f.members.front();
}

// discrete walk: member with the largest dstar among those with dplus
// strictly above the given value; nullopt when exhausted
inline std::optional<LevelSet> family_next_above_dplus(const CandidateFamily& f, double dplus) {
    if (f.kind != CandidateFamily::Kind::DiscreteList) return std::nullopt;
    for (const auto& m : f.members)
        if (m.dplus > dplus + 1e-12 || m.dplus_inf) return m;
    return std::nullopt;
}

// even continuous family member with a prescribed dplus value
inline LevelSet family_even_with_dplus(const CandidateFamily& f, double dplus) {
    if (f.kind != CandidateFamily::Kind::ContinuousEven)
        throw std::invalid_argument("family_even_with_dplus: not an even continuous family");
    double v1 = f.w - dplus * (f.s - 2) / 2.0;
    return even_family_member(f.w, f.s, v1);
}

// member maximizing dstar subject to dplus >= threshold; nullopt when the
// family cannot reach the threshold, or only its degenerate endpoint can
inline std::optional<LevelSet> family_best_dstar_with_dplus_at_least(const CandidateFamily& f,
                                                                     double threshold) {
    const double tol = 1e-9;
    switch (f.kind) {
        case CandidateFamily::Kind::TwoLevel:
            return f.members.front();
        case CandidateFamily::Kind::ContinuousOdd:
            if (f.max_dplus() + tol < threshold) return std::nullopt;
            return f.members.front();
        case CandidateFamily::Kind::ContinuousEven: {
            if (f.max_dplus() + tol < threshold) return std::nullopt;
            double equal_spacing_dplus = 2 * f.w / (f.s - 1);
            if (threshold <= equal_spacing_dplus + tol) return f.members.front();
            double v1 = f.w - threshold * (f.s - 2) / 2.0;
            if (v1 <= 1e-12) return std::nullopt; // duplicate-level endpoint
            return even_family_member(f.w, f.s, v1);
        }
        case CandidateFamily::Kind::DiscreteList: {
            for (const auto& m : f.members)
                if (m.dplus_inf || m.dplus + tol >= threshold) return m;
            return std::nullopt;
        }
    }
    return std::nullopt;
}

// the dstar value of the member above, tolerating the degenerate endpoint;
// used where only the gap value matters (lattice synthesis keys)
inline std::optional<double> family_best_dstar_value_with_dplus_at_least(const CandidateFamily& f,
                                                                         double threshold) {
    const double tol = 1e-9;
    switch (f.kind) {
        case CandidateFamily::Kind::TwoLevel:
            return f.w;
        case CandidateFamily::Kind::ContinuousOdd:
            if (f.max_dplus() + tol < threshold) return std::nullopt;
            return f.w / (f.s - 1);
        case CandidateFamily::Kind::ContinuousEven: {
            if (f.max_dplus() + tol < threshold) return std::nullopt;
            double v1 = f.w - threshold * (f.s - 2) / 2.0;
            return std::clamp(v1, 0.0, f.w / (f.s - 1));
        }
        case CandidateFamily::Kind::DiscreteList: {
            for (const auto& m : f.members)
                if (m.dplus_inf || m.dplus + tol >= threshold) return m.dstar;
            return std::nullopt;
        }
    }
    return std::nullopt;
}

} // namespace mixmaxd
