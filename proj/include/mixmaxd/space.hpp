#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixmaxd/levels.hpp"
#include "mixmaxd/rational.hpp"

namespace mixmaxd {

struct SpaceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One input dimension on [0,1]: either a continuous interval or a finite
// ordered level set (binary = two levels), plus an importance weight.
struct FactorDomain {
    enum class Kind { Continuous, Discrete };
    Kind kind = Kind::Continuous;
    std::vector<Rat> levels; // Discrete only: strictly increasing, 0 and 1 included
    Rat weight{1};

    bool is_binary() const { return kind == Kind::Discrete && levels.size() == 2; }
    void validate() const {
        if (!(weight > Rat(0))) throw SpaceError("weight must be positive");
        if (kind == Kind::Discrete) {
            if (levels.size() < 2) throw SpaceError("discrete dimension needs at least two levels");
            if (levels.front() != Rat(0) || levels.back() != Rat(1))
                throw SpaceError("endpoint missing: levels must include 0 and 1");
            for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
                if (!(levels[i] < levels[i + 1]))
                    throw SpaceError("levels must be strictly increasing without duplicates");
            }
            if (levels.front() < Rat(0) || levels.back() > Rat(1))
                throw SpaceError("levels must lie in [0,1]");
        } else if (!levels.empty()) {
            throw SpaceError("levels not allowed for a continuous dimension");
        }
    }
};

struct FactorSpace {
    std::vector<FactorDomain> dims;
    long long n = 2;

    int p() const { return static_cast<int>(dims.size()); }
    void validate() const {
        if (p() < 2) throw SpaceError("need at least two dimensions");
        if (n < 2) throw SpaceError("run count n must be at least 2");
        for (const auto& d : dims) d.validate();
    }
};

// The same space after multiplying dimension k by its weight: discrete levels
// become w_k * l, continuous domains become [0, w_k]. Searches run here with
// the unweighted metric; `permutation[i]` records which input dimension sits
// at position i (identity except in the high-dimensional search path).
struct ScaledDim {
    bool continuous = true;
    Rat weight{1};
    double w = 1.0;
    std::vector<Rat> levels; // scaled, discrete only

    // finite number of levels, or 0 meaning "unbounded" (continuous)
    int level_count() const { return continuous ? 0 : static_cast<int>(levels.size()); }
};

struct ScaledSpace {
    std::vector<ScaledDim> dims;
    std::vector<int> permutation; // position -> original dimension index
    long long n = 2;

    int p() const { return static_cast<int>(dims.size()); }
};

inline ScaledSpace scale(const FactorSpace& space) {
    space.validate();
    ScaledSpace out;
    out.n = space.n;
    out.permutation.resize(space.dims.size());
    for (std::size_t i = 0; i < space.dims.size(); ++i) {
        out.permutation[i] = static_cast<int>(i);
        ScaledDim d;
        d.weight = space.dims[i].weight;
        d.w = d.weight.to_double();
        d.continuous = space.dims[i].kind == FactorDomain::Kind::Continuous;
        if (!d.continuous) {
            d.levels.reserve(space.dims[i].levels.size());
            for (const auto& l : space.dims[i].levels) d.levels.push_back(l * d.weight);
        }
        out.dims.push_back(std::move(d));
    }
    return out;
}

// Inverse of scale() on the level values: divide by the weight and restore
// the input dimension order. Exact on rationals.
inline FactorSpace unscale_space(const ScaledSpace& scaled) {
    FactorSpace out;
    out.n = scaled.n;
    out.dims.resize(scaled.dims.size());
    for (std::size_t pos = 0; pos < scaled.dims.size(); ++pos) {
        int orig = scaled.permutation[pos];
        FactorDomain d;
        d.weight = scaled.dims[pos].weight;
        d.kind = scaled.dims[pos].continuous ? FactorDomain::Kind::Continuous
                                             : FactorDomain::Kind::Discrete;
        for (const auto& l : scaled.dims[pos].levels) d.levels.push_back(l / d.weight);
        out.dims[orig] = std::move(d);
    }
    return out;
}

// Matrix of scaled coordinates -> original units and input dimension order.
// The separation value is not recomputed: reported rho always refers to the
// scaled metric.
inline std::vector<std::vector<double>> unscale_points(const std::vector<std::vector<double>>& pts,
                                                       const ScaledSpace& scaled) {
    std::vector<std::vector<double>> out(pts.size(), std::vector<double>(scaled.dims.size(), 0.0));
    for (std::size_t r = 0; r < pts.size(); ++r) {
        if (pts[r].size() != scaled.dims.size()) throw SpaceError("unscale: dimension mismatch");
        for (std::size_t pos = 0; pos < scaled.dims.size(); ++pos)
            out[r][scaled.permutation[pos]] = pts[r][pos] / scaled.dims[pos].w;
    }
    return out;
}

// Input document:
// { "n": int, "dims": [ { "type": "continuous"|"ordinal"|"binary",
//                         "levels": [decimal strings], "weight": decimal } ] }
inline FactorSpace parse_space(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SpaceError("space document must be a JSON object");
    FactorSpace space;
    if (!doc.contains("dims") || !doc["dims"].is_array())
        throw SpaceError("space document needs a 'dims' array");
    if (doc.contains("n")) {
        if (!doc["n"].is_number_integer()) throw SpaceError("'n' must be an integer");
        space.n = doc["n"].get<long long>();
    }
    for (const auto& jd : doc["dims"]) {
        if (!jd.is_object()) throw SpaceError("each dimension must be an object");
        FactorDomain d;
        std::string type = jd.value("type", "");
        if (jd.contains("weight")) {
            const auto& jw = jd["weight"];
            d.weight = jw.is_string() ? rat_parse(jw.get<std::string>())
                                      : rat_parse(jw.dump());
        }
        if (type == "continuous") {
            d.kind = FactorDomain::Kind::Continuous;
            if (jd.contains("levels")) throw SpaceError("levels not allowed for a continuous dimension");
        } else if (type == "ordinal" || type == "binary") {
            d.kind = FactorDomain::Kind::Discrete;
            if (type == "binary") {
                if (jd.contains("levels")) throw SpaceError("binary dimensions take no levels");
                d.levels = {Rat(0), Rat(1)};
            } else {
                if (!jd.contains("levels") || !jd["levels"].is_array())
                    throw SpaceError("ordinal dimension needs a 'levels' array");
                for (const auto& jl : jd["levels"])
                    d.levels.push_back(jl.is_string() ? rat_parse(jl.get<std::string>())
                                                      : rat_parse(jl.dump()));
            }
        } else {
            throw SpaceError("dimension type must be continuous, ordinal, or binary");
        }
        space.dims.push_back(std::move(d));
    }
    space.validate();
    return space;
}

inline FactorSpace parse_space_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SpaceError(std::string("malformed space document: ") + e.what());
    }
    return parse_space(doc);
}

} // namespace mixmaxd
