#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixmaxd/lattice.hpp"
#include "mixmaxd/rational.hpp"

namespace mixmaxd::oracle {

struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OracleReport {
    std::string subject;
    double oracle_value = 0;
    double fast_value = 0;
    bool agree = false;
    double tolerance = 0;
};

// Full box walk with a per-point parity membership test. Checks the
// parity-product counting formula; deliberately shares no arithmetic with it.
inline unsigned long long oracle_count(const BinaryCode& code, std::span<const int> s,
                                       std::uint32_t u, unsigned long long budget = 10'000'000ull) {
    if (static_cast<int>(s.size()) != code.p) throw std::invalid_argument("oracle_count: dimension mismatch");
    unsigned long long cells = 1;
    for (int k = 0; k < code.p; ++k) {
        if (s[k] < 1) throw std::invalid_argument("oracle_count: sizes must be positive");
        if (cells > budget / static_cast<unsigned long long>(s[k]))
            throw BudgetExceeded("oracle_count: box too large");
        cells *= static_cast<unsigned long long>(s[k]);
    }
    unsigned long long count = 0;
    std::vector<int> idx(code.p, 0);
    for (unsigned long long step = 0; step < cells; ++step) {
        std::uint32_t residue = 0;
        for (int k = 0; k < code.p; ++k)
            residue |= static_cast<std::uint32_t>((idx[k] + ((u >> (code.p - 1 - k)) & 1)) & 1)
                       << (code.p - 1 - k);
        bool member = false;
        for (auto w : code.words)
            if (w == residue) { member = true; break; }
        if (member) ++count;
        for (int k = code.p - 1; k >= 0; --k) {
            if (++idx[k] < s[k]) break;
            idx[k] = 0;
        }
    }
    return count;
}

// Pareto-maximal (dstar, dplus) pairs over all endpoint-anchored size-s
// subsets, one lexicographically smallest witness per distinct pair.
struct FamilyEntry {
    std::vector<Rat> levels;
    Rat dstar;
    bool dplus_inf = false;
    Rat dplus;
};

inline std::vector<FamilyEntry> oracle_family(std::span<const Rat> g, int s,
                                              unsigned long long budget = 1'000'000ull) {
    const int n = static_cast<int>(g.size());
    if (s < 2 || s > n) throw std::invalid_argument("oracle_family: s out of range");
    // choose s-2 interior levels
    unsigned long long combos = 1;
    for (int i = 0; i < s - 2; ++i) {
        combos = combos * static_cast<unsigned long long>(n - 2 - i) / (i + 1);
        if (combos > budget) throw BudgetExceeded("oracle_family: too many subsets");
    }
    std::vector<FamilyEntry> entries;
    std::vector<int> pick(s - 2);
    for (int i = 0; i < s - 2; ++i) pick[i] = i + 1;
    auto consider = [&](const std::vector<int>& interior) {
        FamilyEntry e;
        e.levels.push_back(g.front());
        for (int i : interior) e.levels.push_back(g[i]);
        e.levels.push_back(g.back());
        e.dstar = e.levels[1] - e.levels[0];
        for (std::size_t i = 1; i + 1 < e.levels.size(); ++i) {
            Rat gap = e.levels[i + 1] - e.levels[i];
            if (gap < e.dstar) e.dstar = gap;
        }
        if (e.levels.size() == 2) {
            e.dplus_inf = true;
        } else {
            e.dplus = e.levels[2] - e.levels[0];
            for (std::size_t i = 1; i + 2 < e.levels.size(); ++i) {
                Rat gap = e.levels[i + 2] - e.levels[i];
                if (gap < e.dplus) e.dplus = gap;
            }
        }
        entries.push_back(std::move(e));
    };
    if (s == 2) {
        consider({});
    } else {
        while (true) {
            consider(pick);
            int i = s - 3;
            while (i >= 0 && pick[i] == n - s + 1 + i) --i; // slot i tops out at n-s+1+i
            if (i < 0) break;
            ++pick[i];
            for (int j = i + 1; j < s - 2; ++j) pick[j] = pick[j - 1] + 1;
        }
    }
    // keep the Pareto-maximal pairs, one witness per pair
    auto dominates = [](const FamilyEntry& a, const FamilyEntry& b) {
        bool ge_star = a.dstar >= b.dstar;
        bool ge_plus = a.dplus_inf || (!b.dplus_inf && a.dplus >= b.dplus);
        bool eq = a.dstar == b.dstar &&
                  (a.dplus_inf == b.dplus_inf && (a.dplus_inf || a.dplus == b.dplus));
        return ge_star && ge_plus && !eq;
    };
    std::vector<FamilyEntry> front;
    for (const auto& e : entries) {
        bool dominated = false;
        for (const auto& f : entries)
            if (dominates(f, e)) { dominated = true; break; }
        if (dominated) continue;
        bool dup = false;
        for (auto& f : front) {
            if (f.dstar == e.dstar && f.dplus_inf == e.dplus_inf &&
                (f.dplus_inf || f.dplus == e.dplus)) {
                dup = true;
                if (e.levels < f.levels) f.levels = e.levels; // smallest witness
                break;
            }
        }
        if (!dup) front.push_back(e);
    }
    std::sort(front.begin(), front.end(),
              [](const FamilyEntry& a, const FamilyEntry& b) { return a.dstar > b.dstar; });
    return front;
}

// True maximin separation over every n-subset of an all-discrete grid.
inline double oracle_tiny_maximin(const std::vector<std::vector<double>>& grid_points, int n,
                                  unsigned long long budget = 1'000'000ull) {
    const int g = static_cast<int>(grid_points.size());
    if (n < 2 || n > g) throw std::invalid_argument("oracle_tiny_maximin: n out of range");
    unsigned long long combos = 1;
    for (int i = 0; i < n; ++i) {
        combos = combos * static_cast<unsigned long long>(g - i) / (i + 1);
        if (combos > budget) throw BudgetExceeded("oracle_tiny_maximin: too many subsets");
    }
    // pairwise squared distances once
    std::vector<std::vector<double>> d2(g, std::vector<double>(g, 0));
    for (int i = 0; i < g; ++i)
        for (int j = i + 1; j < g; ++j) {
            double acc = 0;
            for (std::size_t k = 0; k < grid_points[i].size(); ++k) {
                double d = grid_points[i][k] - grid_points[j][k];
                acc += d * d;
            }
            d2[i][j] = d2[j][i] = acc;
        }
    double best = 0;
    std::vector<int> pick(n);
    for (int i = 0; i < n; ++i) pick[i] = i;
    while (true) {
        double lo = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n && lo > best; ++i)
            for (int j = i + 1; j < n; ++j) lo = std::min(lo, d2[pick[i]][pick[j]]);
        best = std::max(best, lo);
        int i = n - 1;
        while (i >= 0 && pick[i] == g - n + i) --i;
        if (i < 0) break;
        ++pick[i];
        for (int j = i + 1; j < n; ++j) pick[j] = pick[j - 1] + 1;
    }
    return std::sqrt(best);
}

// Numeric check for the continuous-block solve: coarse grid then bisection to
// 1e-6 against arbitrary feasibility predicates.
inline double oracle_quadratic_scan(const std::function<bool(double)>& feasible, double lo,
                                    double hi) {
    if (lo > hi) throw std::invalid_argument("oracle_quadratic_scan: empty interval");
    if (!feasible(lo)) return lo;
    const int steps = 4096;
    double best = lo, bad = hi + 1e-9;
    bool found_bad = false;
    for (int i = 0; i <= steps; ++i) {
        double d = lo + (hi - lo) * i / steps;
        if (feasible(d)) {
            best = d;
        } else {
            bad = d;
            found_bad = true;
            break;
        }
    }
    if (!found_bad) return hi;
    while (bad - best > 1e-7) {
        double mid = (best + bad) / 2;
        if (feasible(mid)) best = mid; else bad = mid;
    }
    return best;
}

} // namespace mixmaxd::oracle
