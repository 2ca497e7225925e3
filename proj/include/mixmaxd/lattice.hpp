#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixmaxd/rational.hpp"

namespace mixmaxd {

// A standard interleaved lattice is fully determined by its residues mod 2:
// a binary linear code H = L ∩ {0,1}^p with full support (every coordinate
// appears in some word). Words are stored as unsigned ints with dimension 1
// in the most significant of the low p bits, so numeric order of a word
// equals lexicographic order of its bitstring.
struct BinaryCode {
    int p = 0;
    std::vector<std::uint32_t> words; // sorted ascending, words[0] == 0

    int q() const {
        int e = 0;
        while ((1u << e) < words.size()) ++e;
        return e;
    }
    int r() const {
        int count = 0;
        for (int k = 1; k <= p; ++k)
            if (contains(unit(k))) ++count;
        return count;
    }
    std::uint32_t unit(int k) const { return 1u << (p - k); }
    bool contains(std::uint32_t w) const {
        return std::binary_search(words.begin(), words.end(), w);
    }
    bool full_support() const {
        std::uint32_t all = 0;
        for (auto w : words) all |= w;
        return all == (p >= 32 ? ~0u : ((1u << p) - 1));
    }
    std::string word_string(std::uint32_t w) const {
        std::string s(p, '0');
        for (int k = 1; k <= p; ++k)
            if (w & unit(k)) s[k - 1] = '1';
        return s;
    }
    bool operator==(const BinaryCode& o) const { return p == o.p && words == o.words; }
};

inline bool is_xor_closed(const std::vector<std::uint32_t>& words) {
    std::set<std::uint32_t> s(words.begin(), words.end());
    if (!s.count(0)) return false;
    for (auto a : s)
        for (auto b : s)
            if (!s.count(a ^ b)) return false;
    return true;
}

inline BinaryCode code_from_words(int p, std::vector<std::uint32_t> words, bool validate = true) {
    if (p < 1 || p > 30) throw std::invalid_argument("code: dimension out of range");
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    BinaryCode c{p, std::move(words)};
    if (validate) {
        if (c.words.empty() || c.words[0] != 0) throw std::invalid_argument("code: missing zero word");
        if ((c.words.size() & (c.words.size() - 1)) != 0) throw std::invalid_argument("code: size not a power of two");
        if (!is_xor_closed(c.words)) throw std::invalid_argument("code: not closed under xor");
        if (!c.full_support()) throw std::invalid_argument("code: not full support");
        int q = c.q(), r = c.r();
        if (!((r == q && q == p) || (0 <= r && r < q && q < p)))
            throw std::invalid_argument("code: invalid (q,r) combination");
    }
    return c;
}

inline BinaryCode code_from_span(int p, std::span<const std::uint32_t> generators) {
    std::set<std::uint32_t> s{0u};
    for (auto g : generators) {
        g &= (p >= 32 ? ~0u : ((1u << p) - 1));
        std::vector<std::uint32_t> cur(s.begin(), s.end());
        for (auto w : cur) s.insert(w ^ g);
    }
    return BinaryCode{p, std::vector<std::uint32_t>(s.begin(), s.end())};
}

// All full-support xor-closed subgroups of {0,1}^p, each exactly once.
// Subspaces are enumerated through their unique reduced-row-echelon bases;
// order is q descending (full grid first), then ascending word list.
inline std::vector<BinaryCode> enumerate_ils(int p) {
    if (p < 2 || p > 5) throw std::invalid_argument("enumerate_ils: p must be in [2,5]");
    std::vector<BinaryCode> out;
    std::vector<BinaryCode> per_q;
    for (int q = p; q >= 1; --q) {
        per_q.clear();
        // choose pivot bit positions (0 = most significant of the window)
        std::vector<int> pivots(q);
        for (int i = 0; i < q; ++i) pivots[i] = i;
        auto emit = [&](const std::vector<std::uint32_t>& basis) {
            auto code = code_from_span(p, basis);
            if (code.words.size() == (1u << q) && code.full_support())
                per_q.push_back(std::move(code));
        };
        while (true) {
            // free positions: non-pivot columns to the right of each row's pivot
            std::vector<std::vector<int>> free_cols(q);
            int total_free = 0;
            for (int i = 0; i < q; ++i) {
                for (int c = pivots[i] + 1; c < p; ++c)
                    if (std::find(pivots.begin(), pivots.end(), c) == pivots.end())
                        free_cols[i].push_back(c);
                total_free += static_cast<int>(free_cols[i].size());
            }
            for (std::uint64_t fill = 0; fill < (1ull << total_free); ++fill) {
                std::vector<std::uint32_t> basis(q, 0);
                int bit = 0;
                for (int i = 0; i < q; ++i) {
                    basis[i] = 1u << (p - 1 - pivots[i]);
                    for (int c : free_cols[i]) {
                        if (fill & (1ull << bit)) basis[i] |= 1u << (p - 1 - c);
                        ++bit;
                    }
                }
                emit(basis);
            }
            // next pivot combination
            int i = q - 1;
            while (i >= 0 && pivots[i] == p - q + i) --i;
            if (i < 0) break;
            ++pivots[i];
            for (int j = i + 1; j < q; ++j) pivots[j] = pivots[j - 1] + 1;
        }
        std::sort(per_q.begin(), per_q.end(),
                  [](const BinaryCode& a, const BinaryCode& b) { return a.words < b.words; });
        for (auto& c : per_q) out.push_back(std::move(c));
    }
    return out;
}

namespace detail {
// exact determinant and integrality check of 2*G^{-1} for generator validation
inline bool generates_between_even_and_integer(const std::vector<std::vector<long long>>& rows) {
    const int p = static_cast<int>(rows.size());
    std::vector<std::vector<Rat>> m(p, std::vector<Rat>(2 * p));
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) m[i][j] = Rat(rows[i][j]);
        m[i][p + i] = Rat(1);
    }
    for (int col = 0; col < p; ++col) {
        int piv = -1;
        for (int i = col; i < p; ++i)
            if (m[i][col].num != 0) { piv = i; break; }
        if (piv < 0) return false; // singular
        std::swap(m[col], m[piv]);
        Rat inv = Rat(1) / m[col][col];
        for (int j = 0; j < 2 * p; ++j) m[col][j] = m[col][j] * inv;
        for (int i = 0; i < p; ++i) {
            if (i == col || m[i][col].num == 0) continue;
            Rat f = m[i][col];
            for (int j = 0; j < 2 * p; ++j) m[i][j] = m[i][j] - f * m[col][j];
        }
    }
    // E^p ⊆ L(G) iff every entry of 2*G^{-1} is an integer
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            if ((Rat(2) * m[i][p + j]).den != 1) return false;
    return true;
}
} // namespace detail

// H = L(G) ∩ {0,1}^p from an integer generator matrix with E^p ⊆ L(G) ⊆ Z^p.
inline BinaryCode from_generator(const std::vector<std::vector<long long>>& rows) {
    const int p = static_cast<int>(rows.size());
    if (p < 1 || p > 16) throw std::invalid_argument("from_generator: bad dimension");
    for (auto& r : rows)
        if (static_cast<int>(r.size()) != p) throw std::invalid_argument("from_generator: not square");
    if (!detail::generates_between_even_and_integer(rows))
        throw std::invalid_argument("from_generator: lattice not between even and integer lattices");
    std::vector<std::uint32_t> gens;
    for (auto& r : rows) {
        std::uint32_t w = 0;
        for (int j = 0; j < p; ++j)
            if (((r[j] % 2) + 2) % 2 == 1) w |= 1u << (p - 1 - j);
        gens.push_back(w);
    }
    auto code = code_from_span(p, gens);
    if (!code.full_support())
        throw std::invalid_argument("from_generator: generated code lacks full support");
    return code_from_words(p, code.words);
}

// The three stock designs: full grid, even-coordinate-sum sublattice, and the
// two-word code {0, 1_p}.
inline std::array<BinaryCode, 3> standard_generators(int p) {
    if (p < 2 || p > 20) throw std::invalid_argument("standard_generators: bad dimension");
    std::vector<std::uint32_t> full;
    for (std::uint32_t w = 0; w < (1u << p); ++w) full.push_back(w);
    std::vector<std::uint32_t> even;
    for (std::uint32_t w = 0; w < (1u << p); ++w)
        if (std::popcount(w) % 2 == 0) even.push_back(w);
    std::vector<std::uint32_t> pair{0u, (1u << p) - 1};
    return {code_from_words(p, std::move(full)), code_from_words(p, std::move(even)),
            code_from_words(p, std::move(pair))};
}

// Number of points of (L ⊕ u) inside ∏[0, s_k − 1]; by the residue
// decomposition this is Σ_{h∈H} ∏_k (#integers in [0,s_k) with parity
// (h_k + u_k) mod 2). Saturates instead of overflowing.
inline unsigned long long count_points(const BinaryCode& code, std::span<const int> s, std::uint32_t u) {
    if (static_cast<int>(s.size()) != code.p) throw std::invalid_argument("count_points: dimension mismatch");
    constexpr unsigned long long kSat = std::numeric_limits<unsigned long long>::max();
    unsigned long long total = 0;
    for (auto h : code.words) {
        unsigned long long prod = 1;
        std::uint32_t parity = h ^ u;
        for (int k = 1; k <= code.p; ++k) {
            int sk = s[k - 1];
            if (sk < 0) throw std::invalid_argument("count_points: negative size");
            unsigned long long c = (parity & code.unit(k)) ? static_cast<unsigned long long>(sk / 2)
                                                           : static_cast<unsigned long long>((sk + 1) / 2);
            if (c != 0 && prod > kSat / c) { prod = kSat; break; }
            prod *= c;
        }
        if (total > kSat - prod) return kSat;
        total += prod;
    }
    return total;
}

inline unsigned long long count_points(const BinaryCode& code, const std::vector<int>& s, std::uint32_t u) {
    return count_points(code, std::span<const int>(s), u);
}

namespace detail {
inline double word_key(std::uint32_t w, int p, std::span<const double> dstar) {
    double key = 0;
    for (int k = 1; k <= p; ++k)
        if (w & (1u << (p - k))) key += dstar[k - 1] * dstar[k - 1];
    return key;
}
} // namespace detail

// Index-2 split of a code: H' a subgroup, H'' = H' ⊕ pivot its coset with
// pivot on the coset side. Words are taken in ascending (key, word) order and
// each lands in H'' unless closure already pinned it to H'.
struct IndexTwoSplit {
    BinaryCode subgroup;              // H'
    std::vector<std::uint32_t> coset; // H'', sorted
};

inline IndexTwoSplit split_index_two(const BinaryCode& code, std::uint32_t pivot,
                                     std::span<const double> dstar) {
    if (pivot == 0 || !code.contains(pivot))
        throw std::invalid_argument("split_index_two: pivot must be a nonzero code word");
    std::set<std::uint32_t> sub{0u};
    std::vector<std::uint32_t> remaining;
    for (auto w : code.words)
        if (w != 0 && w != pivot) remaining.push_back(w);
    std::sort(remaining.begin(), remaining.end(), [&](std::uint32_t a, std::uint32_t b) {
        double ka = detail::word_key(a, code.p, dstar), kb = detail::word_key(b, code.p, dstar);
        if (ka != kb) return ka < kb;
        return a < b;
    });
    // invariant: coset = sub ⊕ pivot. Sending x to the coset adjoins pivot⊕x
    // to the subgroup; the closure is a single coset extension.
    auto in_sub = [&](std::uint32_t w) { return sub.count(w) != 0; };
    for (auto x : remaining) {
        if (in_sub(x) || in_sub(x ^ pivot)) continue; // already classified
        std::uint32_t g = pivot ^ x;
        std::vector<std::uint32_t> cur(sub.begin(), sub.end());
        for (auto w : cur) sub.insert(w ^ g);
    }
    IndexTwoSplit out;
    std::vector<std::uint32_t> subv(sub.begin(), sub.end());
    for (auto w : subv) out.coset.push_back(w ^ pivot);
    std::sort(out.coset.begin(), out.coset.end());
    out.subgroup = BinaryCode{code.p, std::move(subv)};
    if (out.subgroup.words.size() * 2 != code.words.size())
        throw std::logic_error("split_index_two: split is not index 2");
    return out;
}

// New code in p+1 dimensions: subgroup words get a trailing 0, coset words a
// trailing 1. Preserves |H| and full support.
inline BinaryCode extend_dimension(const BinaryCode& subgroup, std::span<const std::uint32_t> coset) {
    if (subgroup.words.size() != coset.size())
        throw std::invalid_argument("extend_dimension: size mismatch between subgroup and coset");
    std::vector<std::uint32_t> words;
    words.reserve(2 * coset.size());
    for (auto w : subgroup.words) words.push_back(w << 1);
    for (auto w : coset) words.push_back((w << 1) | 1u);
    return code_from_words(subgroup.p + 1, std::move(words));
}

// Greedy construction of the code maximizing the smallest word key for a
// requested (q, r), excluding low-key words from H whenever the partial coset
// structure permits. Words pinned to the identity coset by closure eventually
// get forced into H; a forced word whose key is below rho_hat² means no
// eligible code exists on this path. Returns nullopt in that case (a normal
// outcome, not an error).
inline std::optional<BinaryCode> synthesize_lattice(int p, int q, int r,
                                                    std::span<const double> dstar,
                                                    double rho_hat) {
    if (!(0 <= r && r < q && q < p)) throw std::invalid_argument("synthesize_lattice: need 0 <= r < q < p");
    if (static_cast<int>(dstar.size()) != p) throw std::invalid_argument("synthesize_lattice: gap vector size");
    if (p > 20) throw std::invalid_argument("synthesize_lattice: dimension too large");

    const double kTol = 1e-9;
    const double floor_key = rho_hat * rho_hat - kTol;
    const std::size_t group_target = 1ull << q;
    const std::size_t n_cosets = 1ull << (p - q);

    auto key = [&](std::uint32_t w) { return detail::word_key(w, p, dstar); };

    // seed: units of the r largest gaps (stable on ties) go into H
    std::vector<int> dims(p);
    for (int k = 0; k < p; ++k) dims[k] = k + 1;
    std::stable_sort(dims.begin(), dims.end(),
                     [&](int a, int b) { return dstar[a - 1] > dstar[b - 1]; });
    std::vector<std::uint32_t> seed;
    for (int i = 0; i < r; ++i) seed.push_back(1u << (p - dims[i]));
    std::set<std::uint32_t> group;
    {
        auto g = code_from_span(p, seed);
        group.insert(g.words.begin(), g.words.end());
    }
    std::vector<std::uint32_t> outside; // committed complement words, in commit order
    for (int i = r; i < p; ++i) outside.push_back(1u << (p - dims[i]));
    std::stable_sort(outside.begin(), outside.end(), [&](std::uint32_t a, std::uint32_t b) {
        double ka = key(a), kb = key(b);
        if (ka != kb) return ka < kb;
        return a < b;
    });

    auto force_into_group = [&](std::uint32_t x) -> bool {
        std::vector<std::uint32_t> cur(group.begin(), group.end());
        for (auto w : cur) group.insert(w ^ x);
        for (auto w : group)
            if (w != 0 && key(w) < floor_key) return false;
        return true;
    };

    // one placement pass: buckets of known coset members, bucket 0 = words
    // pinned to the identity coset (contains the group)
    std::vector<std::set<std::uint32_t>> buckets;
    auto try_place = [&](std::uint32_t x) -> bool {
        if (buckets[0].count(x)) return false; // pinned to H-to-be
        auto attempt_merge = [&](std::size_t j) -> bool {
            // joining bucket j pins B_j ⊕ x to coset 0 and propagates one
            // round of products; commit only if buckets stay disjoint and no
            // coset exceeds its final cardinality 2^q
            std::set<std::uint32_t> pinned;
            for (auto b : buckets[j]) pinned.insert(b ^ x);
            std::set<std::uint32_t> new0 = buckets[0];
            for (auto a : buckets[0])
                for (auto n : pinned) new0.insert(a ^ n);
            if (new0.size() > group_target) return false;
            std::vector<std::set<std::uint32_t>> nb(buckets.size());
            nb[0] = std::move(new0);
            for (std::size_t k = 1; k < buckets.size(); ++k) {
                nb[k] = buckets[k];
                if (k == j) nb[k].insert(x);
                std::vector<std::uint32_t> base(nb[k].begin(), nb[k].end());
                for (auto b : base)
                    for (auto z : nb[0]) nb[k].insert(b ^ z);
                if (nb[k].size() > group_target) return false;
            }
            for (std::size_t a = 0; a < nb.size(); ++a)
                for (std::size_t b = a + 1; b < nb.size(); ++b)
                    for (auto w : nb[a])
                        if (nb[b].count(w)) return false;
            buckets = std::move(nb);
            return true;
        };
        // prefer the bucket that already knows x, then a fresh coset, then merges
        for (std::size_t j = 1; j < buckets.size(); ++j)
            if (buckets[j].count(x)) return attempt_merge(j);
        for (std::size_t j = 1; j < buckets.size(); ++j)
            if (buckets[j].empty()) { buckets[j].insert(x); return true; }
        for (std::size_t j = 1; j < buckets.size(); ++j)
            if (attempt_merge(j)) return true;
        return false;
    };

    while (group.size() < group_target) {
        // rebuild bucket state under the current group
        bool restart = false;
        buckets.assign(n_cosets, {});
        buckets[0] = group;
        for (std::size_t i = 0; i < outside.size(); ++i) {
            std::uint32_t x = outside[i];
            if (group.count(x)) { outside.erase(outside.begin() + i); --i; continue; }
            if (!try_place(x)) {
                outside.erase(outside.begin() + i);
                if (!force_into_group(x)) return std::nullopt;
                restart = true;
                break;
            }
        }
        if (restart) continue;
        if (group.size() >= group_target) break;
        // next unassigned word of smallest key (pinned-but-uncommitted words count)
        std::uint32_t best = 0;
        bool have = false;
        for (std::uint32_t w = 1; w < (1u << p); ++w) {
            if (group.count(w)) continue;
            if (std::find(outside.begin(), outside.end(), w) != outside.end()) continue;
            if (!have || key(w) < key(best)) { best = w; have = true; }
        }
        if (!have) return std::nullopt; // nothing left to assign
        if (try_place(best)) {
            outside.push_back(best);
        } else {
            if (!force_into_group(best)) return std::nullopt;
        }
    }

    std::vector<std::uint32_t> words(group.begin(), group.end());
    BinaryCode code{p, std::move(words)};
    if (!code.full_support() || code.r() != r || code.words.size() != group_target) return std::nullopt;
    for (auto w : code.words)
        if (w != 0 && key(w) < floor_key) return std::nullopt;
    return code;
}

// canonical text form used in certificates: zero word first, ascending
inline std::string code_to_text(const BinaryCode& code) {
    std::string out;
    for (std::size_t i = 0; i < code.words.size(); ++i) {
        if (i) out += ",";
        out += code.word_string(code.words[i]);
    }
    return out;
}

} // namespace mixmaxd
