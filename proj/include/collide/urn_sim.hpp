#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "collide/dist_core.hpp"

namespace collide {

inline constexpr std::uint64_t kDefaultSeed = 0x5EED2024C011DEULL;
inline constexpr std::uint64_t kDrawCap = 1'000'000'000ULL;

/// Common knobs for every trial-parallel simulator. Trial i (counting from
/// first_trial) always uses stream_split(seed, first_trial + i), so chunked and
/// single runs agree, and results never depend on `threads`.
struct SimOptions {
    std::uint64_t seed = kDefaultSeed;
    unsigned threads = 0;  ///< 0: COLLIDE_THREADS or hardware concurrency
    std::uint64_t first_trial = 0;
    std::uint64_t draw_cap = kDrawCap;
};

/// Integer collision indices, `width` per trial (width > 1 for joint mode).
struct TrialBatch {
    std::vector<std::uint64_t> times;
    unsigned width = 1;
    std::uint64_t seed = 0;
    std::uint64_t first_trial = 0;
    std::uint64_t model_digest = 0;
    /// Per-trial flag for simulators that can stop at a cap (PA); empty otherwise.
    std::vector<std::uint8_t> censored;

    std::size_t trials() const noexcept { return width ? times.size() / width : 0; }
    std::uint64_t at(std::size_t trial, unsigned k = 0) const { return times[trial * width + k]; }
    /// k-th coordinate of every trial multiplied by `scale` (censored trials dropped).
    std::vector<double> scaled(double scale, unsigned k = 0) const;
    std::size_t censored_count() const noexcept;
};

/// Real-valued times (continuous-time simulators).
struct RealBatch {
    std::vector<double> times;
    unsigned width = 1;
    std::uint64_t seed = 0;
    std::uint64_t first_trial = 0;
    std::uint64_t model_digest = 0;

    std::size_t trials() const noexcept { return width ? times.size() / width : 0; }
    double at(std::size_t trial, unsigned k = 0) const { return times[trial * width + k]; }
    std::vector<double> scaled(double scale, unsigned k = 0) const;
};

/// Per-colour ball counts of the occupied urns, in an open-addressing table
/// keyed by urn index. Memory is proportional to the number of occupied urns.
class UrnState {
public:
    explicit UrnState(unsigned colors, std::size_t expected_urns = 64);

    /// Adds one ball and returns the urn's counts after the insertion.
    std::span<const std::uint32_t> add(std::uint64_t urn, unsigned color);
    /// Counts for `urn`, or an empty span when it holds no balls.
    std::span<const std::uint32_t> counts(std::uint64_t urn) const;
    std::size_t occupied() const noexcept { return size_; }
    unsigned colors() const noexcept { return colors_; }
    void clear() noexcept;

private:
    std::size_t slot_of(std::uint64_t urn) const noexcept;
    void grow();

    static constexpr std::uint64_t kEmpty = ~0ULL;
    unsigned colors_;
    std::size_t size_ = 0;
    std::vector<std::uint64_t> keys_;
    std::vector<std::uint32_t> counts_;
};

/// Index of the first draw whose value already appeared (always >= 2).
TrialBatch sim_repeat_time(const RankedDistribution& d, std::uint64_t trials, const SimOptions& opt = {});

/// Index of the first ball landing in an urn that holds a ball of another colour.
/// Throws RunawayTrial when no urn is shared by two colours or the draw cap is hit.
TrialBatch sim_first_collision(const UrnModelSpec& spec, std::uint64_t trials, const SimOptions& opt = {});

/// Indices of the first m such balls (urns are never reset); width m.
TrialBatch sim_joint_collisions(const UrnModelSpec& spec, unsigned m, std::uint64_t trials,
                                const SimOptions& opt = {});

/// First ball after which some urn holds at least m balls of each of two
/// colours; q equiprobable colours sharing the law d.
TrialBatch sim_mfold_collision(const RankedDistribution& d, unsigned q, unsigned m, std::uint64_t trials,
                               const SimOptions& opt = {});

/// FNV-1a over a canonical encoding of the model; tags keep different
/// simulators on the same spec apart.
class DigestBuilder {
public:
    DigestBuilder& add(std::string_view tag);
    DigestBuilder& add(std::uint64_t v);
    DigestBuilder& add(double v);
    DigestBuilder& add(std::span<const double> vs);
    std::uint64_t value() const noexcept { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::uint64_t model_digest(const RankedDistribution& d, std::string_view tag);
std::uint64_t model_digest(const UrnModelSpec& spec, std::string_view tag);

/// "trial,k,time" rows; k is 1-based. Censored trials are written with time "NA".
void write_csv(std::ostream& out, const TrialBatch& b, bool header = true);
void write_csv(std::ostream& out, const RealBatch& b, bool header = true);
nlohmann::json to_json(const TrialBatch& b);
nlohmann::json to_json(const RealBatch& b);

/// Runs `produce` in chunks of `chunk` trials (advancing first_trial) and
/// appends each chunk's CSV rows, so memory stays bounded for huge runs.
/// Output is identical to write_csv on one batch of all trials.
void stream_csv(std::ostream& out, const std::function<TrialBatch(std::uint64_t, const SimOptions&)>& produce,
                std::uint64_t trials, const SimOptions& opt, std::uint64_t chunk = 1ULL << 20);
void stream_csv(std::ostream& out, const std::function<RealBatch(std::uint64_t, const SimOptions&)>& produce,
                std::uint64_t trials, const SimOptions& opt, std::uint64_t chunk = 1ULL << 20);

}  // namespace collide
