#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "collide/rng.hpp"

namespace collide {

/// Discrete law with masses in non-increasing order. Trailing zero masses are
/// dropped on construction so the support size is unambiguous.
class RankedDistribution {
public:
    /// Throws InvalidArgument unless masses are finite, non-negative,
    /// non-increasing, non-empty after trimming, and sum to 1 within 1e-12.
    explicit RankedDistribution(std::vector<double> masses, std::string label = {});

    /// Sorts descending first; for masses read from unranked sources.
    static RankedDistribution from_unsorted(std::vector<double> masses, std::string label = {});

    std::span<const double> masses() const noexcept { return masses_; }
    std::size_t size() const noexcept { return masses_.size(); }
    double operator[](std::size_t i) const { return masses_[i]; }
    const std::string& label() const noexcept { return label_; }

private:
    std::vector<double> masses_;
    std::string label_;
};

RankedDistribution make_uniform(std::size_t n);
/// Atom 1/sqrt(n) followed by n equal masses (1 - 1/sqrt(n))/n.
RankedDistribution make_sqrt_atom(std::size_t n);
/// Atom 1/ln(n) followed by n equal masses (1 - 1/ln(n))/n.
RankedDistribution make_log_atom(std::size_t n);

struct ScalingProfile {
    double s_n = 0.0;
    std::vector<double> psi;
    double sum_psi_sq = 0.0;
};

struct MfoldScaling {
    double s_2m = 0.0;
    std::vector<double> psi_2m;
    unsigned m = 1;
};

/// s_n = sqrt(sum p_i^2), psi_i = p_i / s_n.
ScalingProfile scaling_of(const RankedDistribution& d);
/// s_2m = (sum p_i^{2m})^{1/2m}, psi_i = p_i / s_2m.
MfoldScaling mfold_scaling_of(const RankedDistribution& d, unsigned m);

/// Colour-selection probabilities (q_1, ..., q_q), all positive.
class ColorMix {
public:
    explicit ColorMix(std::vector<double> weights);
    static ColorMix uniform(unsigned q);

    std::span<const double> weights() const noexcept { return weights_; }
    unsigned size() const noexcept { return static_cast<unsigned>(weights_.size()); }
    double operator[](std::size_t a) const { return weights_[a]; }
    bool is_uniform() const noexcept;

private:
    std::vector<double> weights_;
};

struct SpecScaling {
    double s_n = 0.0;
    std::vector<std::vector<double>> psi_per_color;
    std::vector<double> phi;
    /// sum_i sum_{a != b} q_a q_b psi_{a_i} psi_{b_i} at finite n.
    double cross = 0.0;
};

/// Multicolour urn model: colour a is drawn with probability mix[a], then the
/// ball goes to urn i with probability row(a)[i]. All rows share one 0-based
/// urn index space; rows may contain zeros (disjoint or shifted supports).
class UrnModelSpec {
public:
    UrnModelSpec(ColorMix mix, std::vector<std::vector<double>> rows, std::string label = {});
    /// Every colour uses the same urn law.
    static UrnModelSpec identical(ColorMix mix, const RankedDistribution& d);

    const ColorMix& mix() const noexcept { return mix_; }
    unsigned q() const noexcept { return mix_.size(); }
    std::size_t urns() const noexcept { return urns_; }
    std::span<const double> row(unsigned a) const { return rows_[a]; }
    const std::string& label() const noexcept { return label_; }
    const SpecScaling& scaling() const noexcept { return scaling_; }
    /// True when some urn has positive mass under at least two colours.
    bool can_collide() const noexcept;

private:
    ColorMix mix_;
    std::vector<std::vector<double>> rows_;
    std::size_t urns_ = 0;
    std::string label_;
    SpecScaling scaling_;
};

SpecScaling spec_scaling(const UrnModelSpec& spec);

/// Walker/Vose alias table: O(n) build, O(1) draws.
class AliasSampler {
public:
    explicit AliasSampler(std::span<const double> masses);

    std::size_t operator()(RandomSource& rng) const noexcept {
        const auto i = static_cast<std::size_t>(rng.below(prob_.size()));
        return rng.uniform01() < prob_[i] ? i : alias_[i];
    }
    std::size_t size() const noexcept { return prob_.size(); }

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

// {"label": string, "masses": [numbers]}
nlohmann::json to_json(const RankedDistribution& d);
RankedDistribution distribution_from_json(const nlohmann::json& j);
/// One mass per line; blank lines and lines starting with '#' are skipped.
RankedDistribution load_masses_text(const std::filesystem::path& path);

}  // namespace collide
