#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixmaxd/assembly.hpp"
#include "mixmaxd/lattice.hpp"
#include "mixmaxd/levels.hpp"
#include "mixmaxd/space.hpp"

namespace mixmaxd {

struct SearchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Candidate {
    BinaryCode code;
    std::vector<int> s;
    std::vector<LevelSet> levels;
    double rho = 0;
};

struct SearchOutcome {
    bool feasible = false;
    std::string regime;
    double rho_hat = 0;
    std::vector<Candidate> ties;
    int chosen = -1;
    std::uint32_t u = 0;
    unsigned long long m = 0;
    Design design;                   // realized at the chosen translation, scaled space
    std::vector<double> rho_history; // strictly increasing best-rho ladder
};

struct SearchOptions {
    int t_pool = -1;                              // pool width; <0 = regime default
    std::size_t tie_cap = 64;                     // resource guard on equal-rho ties
    unsigned long long realize_cap = 10'000'000ull;
};

namespace detail {

constexpr double kRhoTol = 1e-9;

class FamilyCache {
public:
    explicit FamilyCache(const ScaledSpace& sp) : sp_(&sp) {}

    const CandidateFamily& get(int dim, int s) {
        auto key = std::make_pair(dim, s);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        const auto& d = sp_->dims[dim];
        CandidateFamily fam = d.continuous
                                  ? family_continuous(d.w, s)
                                  : family_discrete(std::span<const Rat>(d.levels), s);
        return memo_.emplace(key, std::move(fam)).first->second;
    }

    const ScaledSpace& space() const { return *sp_; }

private:
    const ScaledSpace* sp_;
    std::map<std::pair<int, int>, CandidateFamily> memo_;
};

// Admissible per-dimension sizes under the current best separation: discrete
// sizes must keep a family member with dplus >= rho_hat, continuous sizes obey
// the cap floor(2w/rho_hat + 2). rho_hat = 0 means no pruning (continuous
// dims unbounded).
class SizeBounds {
public:
    SizeBounds(FamilyCache& cache) : cache_(&cache) {}

    void set_rho(double rho_hat) { rho_hat_ = rho_hat; }

    bool allowed(int dim, int z) const {
        const auto& d = cache_->space().dims[dim];
        if (z < 2) return false;
        if (!d.continuous) {
            if (z > static_cast<int>(d.levels.size())) return false;
            if (rho_hat_ <= 0) return true;
            return cache_->get(dim, z).max_dplus() >= rho_hat_ - kRhoTol;
        }
        if (rho_hat_ <= 0) return true;
        return z <= cap_continuous(d.w);
    }

    // largest allowed value, or nullopt for an unbounded continuous dim
    std::optional<int> max_allowed(int dim) const {
        const auto& d = cache_->space().dims[dim];
        if (!d.continuous) {
            for (int z = static_cast<int>(d.levels.size()); z >= 2; --z)
                if (allowed(dim, z)) return z;
            return 1; // nothing allowed; callers treat < 2 as empty
        }
        if (rho_hat_ <= 0) return std::nullopt;
        return cap_continuous(d.w);
    }

    std::optional<int> next_allowed(int dim, int from) const {
        auto hi = max_allowed(dim);
        int lo = std::max(from, 2);
        if (!hi) return lo; // unbounded continuous: everything >= 2 allowed
        for (int z = lo; z <= *hi; ++z)
            if (allowed(dim, z)) return z;
        return std::nullopt;
    }

private:
    int cap_continuous(double w) const {
        return static_cast<int>(std::floor(2.0 * w / rho_hat_ + 2.0 + 1e-9));
    }
    FamilyCache* cache_;
    double rho_hat_ = 0;
};

// Candidate pool pruned to the T-th best separation value; ties at any kept
// value are retained up to tie_cap, preferring structurally distinct (q,r).
class Pool {
public:
    Pool(int T, std::size_t tie_cap) : T_(T), tie_cap_(tie_cap) {}

    double rho_hat() const {
        if (items_.empty()) return 0;
        if (static_cast<int>(values_.size()) < T_) return values_.back();
        return values_[T_ - 1];
    }

    void add(Candidate c) {
        double cut = rho_hat();
        if (!items_.empty() && static_cast<int>(values_.size()) >= T_ && c.rho < cut - kRhoTol)
            return;
        // equal-rho group bookkeeping
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (std::abs(values_[i] - c.rho) <= kRhoTol) {
                auto group = group_indices(values_[i]);
                if (group.size() >= tie_cap_) {
                    bool novel = true;
                    for (auto gi : group)
                        if (items_[gi].code.q() == c.code.q() && items_[gi].code.r() == c.code.r())
                            novel = false;
                    if (!novel) return;
                    // replace the last member whose (q,r) appears twice
                    for (auto it = group.rbegin(); it != group.rend(); ++it) {
                        int dup = 0;
                        for (auto gj : group)
                            if (items_[gj].code.q() == items_[*it].code.q() &&
                                items_[gj].code.r() == items_[*it].code.r())
                                ++dup;
                        if (dup >= 2) { items_[*it] = std::move(c); return; }
                    }
                    return;
                }
                items_.push_back(std::move(c));
                resort();
                return;
            }
        }
        items_.push_back(std::move(c));
        values_.push_back(items_.back().rho);
        std::sort(values_.begin(), values_.end(), std::greater<>());
        resort();
        prune();
    }

    const std::vector<Candidate>& items() const { return items_; }
    bool empty() const { return items_.empty(); }

private:
    std::vector<std::size_t> group_indices(double v) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < items_.size(); ++i)
            if (std::abs(items_[i].rho - v) <= kRhoTol) out.push_back(i);
        return out;
    }
    void resort() {
        std::stable_sort(items_.begin(), items_.end(),
                         [](const Candidate& a, const Candidate& b) { return a.rho > b.rho + kRhoTol; });
    }
    void prune() {
        double cut = rho_hat();
        items_.erase(std::remove_if(items_.begin(), items_.end(),
                                    [&](const Candidate& c) { return c.rho < cut - kRhoTol; }),
                     items_.end());
        values_.erase(std::remove_if(values_.begin(), values_.end(),
                                     [&](double v) { return v < cut - kRhoTol; }),
                      values_.end());
    }
    int T_;
    std::size_t tie_cap_;
    std::vector<Candidate> items_;
    std::vector<double> values_; // distinct kept rho values, descending
};

inline std::vector<CandidateFamily> families_for(FamilyCache& cache, std::span<const int> s) {
    std::vector<CandidateFamily> fams;
    fams.reserve(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) fams.push_back(cache.get(static_cast<int>(k), s[k]));
    return fams;
}

inline std::vector<DimSpec> dim_specs(const ScaledSpace& sp) {
    std::vector<DimSpec> out;
    out.reserve(sp.dims.size());
    for (const auto& d : sp.dims) out.push_back(DimSpec{d.continuous, d.w});
    return out;
}

// lexicographically smallest prefix (dims 0..p-2) >= from in the current
// bounds, where "unbounded" continuous dims have no upper limit
inline std::optional<std::vector<int>> prefix_at_least(const SizeBounds& bounds, int p,
                                                       std::vector<int> from) {
    const int np = p - 1;
    std::vector<int> out(np, 0);
    int k = 0;
    bool larger = false; // out already strictly above 'from' on a previous dim
    while (k < np) {
        int want = larger ? 2 : from[k];
        auto z = bounds.next_allowed(k, want);
        if (z) {
            out[k] = *z;
            if (*z > want || larger) larger = true;
            ++k;
            continue;
        }
        // overflow: bump an earlier coordinate
        int back = k - 1;
        while (back >= 0) {
            auto up = bounds.next_allowed(back, out[back] + 1);
            if (up) {
                out[back] = *up;
                larger = true;
                k = back + 1;
                break;
            }
            --back;
        }
        if (back < 0) return std::nullopt;
    }
    return out;
}

inline std::optional<std::vector<int>> prefix_successor(const SizeBounds& bounds, int p,
                                                        std::vector<int> cur) {
    cur.back() += 1;
    return prefix_at_least(bounds, p, std::move(cur));
}

} // namespace detail

// ---------------------------------------------------------------------------
// Translation selection: per candidate, search u over the dimensions with odd
// s_k (even ones cannot change the size), keep the smallest size >= n; across
// candidates keep the global minimum, ties by candidate order.
inline SearchOutcome choose_translation(std::vector<Candidate> cands, unsigned long long n,
                                        const SearchOptions& opts = {}) {
    if (cands.empty()) throw SearchError("choose_translation: empty candidate list");
    SearchOutcome out;
    out.ties = std::move(cands);
    unsigned long long best_m = std::numeric_limits<unsigned long long>::max();
    for (std::size_t i = 0; i < out.ties.size(); ++i) {
        const auto& c = out.ties[i];
        const int p = c.code.p;
        std::uint32_t odd_mask = 0;
        for (int k = 0; k < p; ++k)
            if (c.s[k] % 2 == 1) odd_mask |= 1u << (p - 1 - k);
        std::uint32_t best_u = 0;
        unsigned long long best = count_points(c.code, c.s, 0);
        if (best < n) throw SearchError("choose_translation: candidate smaller than n at u = 0");
        std::uint32_t u = 0;
        do { // submasks of odd_mask in increasing numeric order
            u = (u - odd_mask) & odd_mask;
            if (u == 0) break;
            unsigned long long m = count_points(c.code, c.s, u);
            if (m >= n && m < best) { best = m; best_u = u; }
        } while (true);
        if (best < best_m) {
            best_m = best;
            out.chosen = static_cast<int>(i);
            out.u = best_u;
        }
    }
    const auto& chosen = out.ties[out.chosen];
    out.feasible = true;
    out.m = best_m;
    out.rho_hat = chosen.rho;
    DesignSpec spec{chosen.code, chosen.s, out.u, chosen.levels};
    out.design = realize(spec, opts.realize_cap);
    out.design.rho = chosen.rho;
    return out;
}

// ---------------------------------------------------------------------------
// Exhaustive regime: every interleaved lattice, sizes ascending with the
// one-test-per-prefix rule (after testing s only strictly larger prefixes are
// visited; the first feasible last coordinate is the only one worth testing
// because every gap statistic degrades as sizes grow).
inline SearchOutcome search_exhaustive(const ScaledSpace& sp, unsigned long long n,
                                       const SearchOptions& opts = {}) {
    const int p = sp.p();
    if (p < 2 || p > 5) throw SearchError("search_exhaustive: supported for 2 <= p <= 5");
    detail::FamilyCache cache(sp);
    detail::SizeBounds bounds(cache);
    detail::Pool pool(1, opts.tie_cap);
    auto dims = detail::dim_specs(sp);
    std::vector<double> ladder;
    double rho_hat = 0;

    auto codes = enumerate_ils(p);
    for (const auto& code : codes) {
        std::optional<std::vector<int>> prefix;
        while (true) {
            prefix = prefix ? detail::prefix_successor(bounds, p, *prefix)
                            : detail::prefix_at_least(bounds, p, std::vector<int>(p - 1, 2));
            if (!prefix) break;
            // smallest feasible last coordinate for this prefix
            std::vector<int> s(*prefix);
            s.push_back(0);
            auto hi = bounds.max_allowed(p - 1);
            int z = 2;
            std::optional<int> found;
            while (true) {
                auto zz = bounds.next_allowed(p - 1, z);
                if (!zz) break;
                z = *zz;
                s[p - 1] = z;
                if (count_points(code, s, 0) >= n) { found = z; break; }
                if (hi && z >= *hi) break;
                if (!hi && z > static_cast<int>(2 * n + 2)) break; // size grows at least linearly
                ++z;
            }
            if (!found) continue;
            s[p - 1] = *found;
            auto fams = detail::families_for(cache, s);
            auto opt = optimize_levels(code, s, fams, dims);
            if (opt.rho > rho_hat + detail::kRhoTol) {
                rho_hat = opt.rho;
                ladder.push_back(opt.rho);
                bounds.set_rho(rho_hat);
                pool.add(Candidate{code, s, opt.levels, opt.rho});
            } else if (opt.rho >= rho_hat - detail::kRhoTol) {
                pool.add(Candidate{code, s, opt.levels, opt.rho});
            }
        }
    }
    if (pool.empty()) {
        SearchOutcome out;
        out.regime = "exhaustive";
        return out; // infeasible
    }
    auto out = choose_translation(pool.items(), n, opts);
    out.regime = "exhaustive";
    out.rho_history = std::move(ladder);
    return out;
}

// ---------------------------------------------------------------------------
// Stock seeds: for each of the three standard lattices grow sizes from all-2s
// by bumping every unsaturated dimension whose best adjacent gap attains the
// maximum, until the design is big enough.
inline std::vector<Candidate> seed_simple(const ScaledSpace& sp, unsigned long long n) {
    const int p = sp.p();
    detail::FamilyCache cache(sp);
    auto dims = detail::dim_specs(sp);
    std::vector<Candidate> out;
    for (const auto& code : standard_generators(p)) {
        std::vector<int> s(p, 2);
        while (count_points(code, s, 0) < n) {
            double best_gap = -1;
            for (int k = 0; k < p; ++k) {
                int cap = sp.dims[k].level_count();
                if (cap && s[k] >= cap) continue; // saturated
                double g = cache.get(k, s[k]).max_dstar();
                best_gap = std::max(best_gap, g);
            }
            if (best_gap < 0) break; // every dimension saturated
            for (int k = 0; k < p; ++k) {
                int cap = sp.dims[k].level_count();
                if (cap && s[k] >= cap) continue;
                if (cache.get(k, s[k]).max_dstar() >= best_gap - detail::kRhoTol) ++s[k];
            }
        }
        auto fams = detail::families_for(cache, s);
        auto opt = optimize_levels(code, s, fams, dims);
        out.push_back(Candidate{code, s, opt.levels, opt.rho});
    }
    return out;
}

namespace detail {

// core of the (q,r,s)-driven regime; returns the pruned candidate pool and
// the best-rho ladder
struct QrsCore {
    Pool pool;
    std::vector<double> ladder;
};

inline QrsCore qrs_core(const ScaledSpace& sp, unsigned long long n, int T,
                        const SearchOptions& opts) {
    const int p = sp.p();
    if (p < 2 || p > 8) throw SearchError("qrs search: supported for 2 <= p <= 8");
    FamilyCache cache(sp);
    SizeBounds bounds(cache);
    auto dims = dim_specs(sp);
    QrsCore core{Pool(T, opts.tie_cap), {}};

    for (auto& c : seed_simple(sp, n))
        if (count_points(c.code, c.s, 0) >= n) core.pool.add(std::move(c));
    double rho_hat = core.pool.rho_hat();
    if (rho_hat > 0) core.ladder.push_back(rho_hat);
    bounds.set_rho(rho_hat);

    // lower bound on the last coordinate from the size upper bound: a design
    // can only reach n points if 2^{q-p} * prod 2*ceil(z_k/2) >= n
    auto last_lb = [&](int q, std::span<const int> prefix) -> long long {
        unsigned long long scaled = n;
        int shift = p - q - 1;
        if (shift > 0) {
            if (scaled > (std::numeric_limits<unsigned long long>::max() >> shift))
                scaled = std::numeric_limits<unsigned long long>::max();
            else
                scaled <<= shift;
        }
        unsigned long long prod = 1;
        for (int k = 0; k < p - 1; ++k) {
            unsigned long long f = 2ull * ((prefix[k] + 1) / 2);
            if (prod > std::numeric_limits<unsigned long long>::max() / f) return 2;
            prod *= f;
        }
        unsigned long long c = (scaled + prod - 1) / prod;
        long long lb = 2 * static_cast<long long>(c) - 1;
        return std::max<long long>(lb, 2);
    };

    for (int q = p - 1; q >= 1; --q) {
        std::optional<std::vector<int>> prefix;
        int last = 0;        // last coordinate of the most recent tested s (0 = fresh prefix)
        bool skip_ray = false;
        while (true) {
            // next s: same prefix with a larger feasible last coordinate, else
            // advance the prefix
            std::optional<std::vector<int>> s;
            while (true) {
                if (!prefix) {
                    prefix = prefix_at_least(bounds, p, std::vector<int>(p - 1, 2));
                    last = 0;
                } else if (skip_ray || last < 0) {
                    prefix = prefix_successor(bounds, p, *prefix);
                    last = 0;
                    skip_ray = false;
                }
                if (!prefix) break;
                long long lb = last_lb(q, *prefix);
                int from = std::max<long long>(lb, last + 1) > std::numeric_limits<int>::max()
                               ? std::numeric_limits<int>::max()
                               : static_cast<int>(std::max<long long>(lb, last + 1));
                auto z = bounds.next_allowed(p - 1, from);
                if (z) {
                    s = *prefix;
                    s->push_back(*z);
                    break;
                }
                last = -1; // exhausted this ray
            }
            if (!prefix || !s) break;
            last = (*s)[p - 1];

            // keys: the most optimistic adjacent gaps consistent with rho_hat
            std::vector<double> keys(p, 0);
            bool reachable = true;
            for (int k = 0; k < p && reachable; ++k) {
                auto v = family_best_dstar_value_with_dplus_at_least(cache.get(k, (*s)[k]), rho_hat);
                if (!v) reachable = false;
                else keys[k] = *v;
            }
            if (!reachable) continue;

            bool any_lattice = false;
            for (int r = q - 1; r >= 0; --r) {
                auto code = synthesize_lattice(p, q, r, keys, rho_hat);
                if (!code) continue;
                any_lattice = true;
                if (count_points(*code, *s, 0) < n) break; // smaller r only shrinks the size
                auto fams = families_for(cache, *s);
                auto opt = optimize_levels(*code, *s, fams, dims);
                if (opt.rho >= rho_hat - kRhoTol) {
                    core.pool.add(Candidate{*code, *s, opt.levels, opt.rho});
                    double nh = core.pool.rho_hat();
                    if (nh > rho_hat + kRhoTol) {
                        rho_hat = nh;
                        core.ladder.push_back(nh);
                        bounds.set_rho(rho_hat);
                    }
                }
            }
            if (!any_lattice) skip_ray = true;
        }
    }
    return core;
}

} // namespace detail

inline SearchOutcome search_qrs(const ScaledSpace& sp, unsigned long long n, int T = 1,
                                const SearchOptions& opts = {}) {
    auto core = detail::qrs_core(sp, n, T <= 0 ? 1 : T, opts);
    if (core.pool.empty()) {
        SearchOutcome out;
        out.regime = "qrs";
        return out;
    }
    auto out = choose_translation(core.pool.items(), n, opts);
    out.regime = "qrs";
    out.rho_history = std::move(core.ladder);
    return out;
}

// ---------------------------------------------------------------------------
// High-dimensional regime: run the (q,r,s) engine on the eight most important
// dimensions, then append the remaining dimensions one at a time as two-level
// factors via an index-2 code split, and re-optimize levels at full size.
inline SearchOutcome search_extend(const ScaledSpace& sp_input, unsigned long long n, int T = 20,
                                   const SearchOptions& opts = {}) {
    const int p = sp_input.p();
    if (p <= 8) throw SearchError("search_extend: supported for p > 8");
    if (T <= 0) T = 20;

    // sort dimensions by descending weight (stable)
    std::vector<int> order(p);
    for (int i = 0; i < p; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return sp_input.dims[a].w > sp_input.dims[b].w; });
    ScaledSpace sp;
    sp.n = sp_input.n;
    for (int i = 0; i < p; ++i) {
        sp.dims.push_back(sp_input.dims[order[i]]);
        sp.permutation.push_back(sp_input.permutation[order[i]]);
    }

    ScaledSpace head;
    head.n = sp.n;
    for (int i = 0; i < 8; ++i) {
        head.dims.push_back(sp.dims[i]);
        head.permutation.push_back(i);
    }
    auto core = detail::qrs_core(head, n, T, opts);
    if (core.pool.empty()) {
        SearchOutcome out;
        out.regime = "extend";
        return out;
    }

    detail::FamilyCache cache(sp);
    auto dims = detail::dim_specs(sp);
    detail::Pool best(1, opts.tie_cap);
    double rho_hat = 0;
    std::vector<double> ladder;
    for (const auto& base : core.pool.items()) {
        BinaryCode code = base.code;
        std::vector<int> s = base.s;
        std::vector<LevelSet> levels = base.levels;
        for (int j = 8; j < p; ++j) {
            std::vector<double> gaps(j);
            for (int k = 0; k < j; ++k) gaps[k] = levels[k].dstar;
            std::uint32_t pivot = 0;
            double pivot_key = std::numeric_limits<double>::infinity();
            for (auto w : code.words) {
                if (w == 0) continue;
                double key = 0;
                for (int k = 0; k < j; ++k)
                    if (w & code.unit(k + 1)) key += gaps[k] * gaps[k];
                if (key < pivot_key) { pivot_key = key; pivot = w; }
            }
            auto split = split_index_two(code, pivot, gaps);
            code = extend_dimension(split.subgroup, split.coset);
            s.push_back(2);
            levels.push_back(levels_from_doubles({0.0, sp.dims[j].w}));
        }
        auto fams = detail::families_for(cache, s);
        auto opt = optimize_levels(code, s, fams, dims);
        if (count_points(code, s, 0) < n) continue; // extension preserves size; defensive
        best.add(Candidate{code, s, opt.levels, opt.rho});
        if (best.rho_hat() > rho_hat + detail::kRhoTol) {
            rho_hat = best.rho_hat();
            ladder.push_back(rho_hat);
        }
    }
    if (best.empty()) {
        SearchOutcome out;
        out.regime = "extend";
        return out;
    }
    auto out = choose_translation(best.items(), n, opts);

    // restore the input dimension order in every reported artifact
    auto unpermute_word = [&](std::uint32_t w, int dim_count) {
        std::uint32_t v = 0;
        for (int pos = 0; pos < dim_count; ++pos)
            if (w & (1u << (dim_count - 1 - pos))) v |= 1u << (dim_count - 1 - order[pos]);
        return v;
    };
    auto unpermute_candidate = [&](Candidate& c) {
        std::vector<std::uint32_t> words;
        for (auto w : c.code.words) words.push_back(unpermute_word(w, p));
        c.code = code_from_words(p, std::move(words));
        std::vector<int> s2(p);
        std::vector<LevelSet> lv2(p);
        for (int pos = 0; pos < p; ++pos) {
            s2[order[pos]] = c.s[pos];
            lv2[order[pos]] = c.levels[pos];
        }
        c.s = std::move(s2);
        c.levels = std::move(lv2);
    };
    for (auto& c : out.ties) unpermute_candidate(c);
    out.u = unpermute_word(out.u, p);
    const auto& chosen = out.ties[out.chosen];
    DesignSpec spec{chosen.code, chosen.s, out.u, chosen.levels};
    out.design = realize(spec, opts.realize_cap);
    out.design.rho = chosen.rho;
    out.regime = "extend";
    out.rho_history = std::move(ladder);
    return out;
}

// ---------------------------------------------------------------------------
// Front door: scale the space, dispatch on dimension count, return the
// outcome in the scaled metric (callers unscale coordinates for output).
inline SearchOutcome construct(const FactorSpace& space, const SearchOptions& opts = {},
                               const std::string& regime = "auto") {
    space.validate();
    ScaledSpace sp = scale(space);
    const unsigned long long n = static_cast<unsigned long long>(space.n);
    const int p = sp.p();
    std::string mode = regime;
    if (mode == "auto") mode = p <= 5 ? "exhaustive" : (p <= 8 ? "qrs" : "extend");
    if (mode == "exhaustive") return search_exhaustive(sp, n, opts);
    if (mode == "qrs") return search_qrs(sp, n, opts.t_pool > 0 ? opts.t_pool : 1, opts);
    if (mode == "extend") return search_extend(sp, n, opts.t_pool > 0 ? opts.t_pool : 20, opts);
    throw SearchError("construct: unknown regime '" + regime + "'");
}

} // namespace mixmaxd
