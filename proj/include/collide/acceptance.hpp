#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "collide/urn_sim.hpp"

namespace collide::acceptance {

/// One measured quantity compared with its pinned tolerance.
struct Check {
    std::string name;
    bool pass = false;
    nlohmann::json detail;  ///< statistic, threshold and inputs; no timings
};

struct CriterionResult {
    int id = 0;
    std::string slug;
    std::vector<Check> checks;

    bool pass() const noexcept;
};

struct SuiteOptions {
    std::uint64_t seed = kDefaultSeed;
    unsigned threads = 0;
    std::vector<int> only;  ///< empty: every criterion
    /// Called after each criterion with its wall time in seconds.
    std::function<void(const CriterionResult&, double)> on_result;
};

struct SuiteReport {
    std::uint64_t seed = 0;
    std::vector<CriterionResult> results;

    bool pass() const noexcept;
    /// Deterministic for a given seed: identical bytes for any thread count.
    nlohmann::json to_json() const;
};

struct CriterionInfo {
    int id;
    const char* slug;
    const char* summary;
};

const std::vector<CriterionInfo>& criteria();

/// Accepts a criterion number ("7") or slug ("general-law"); throws
/// InvalidArgument for anything else.
int criterion_id(const std::string& name);

/// Seed used by criterion `id` under suite seed `seed`.
std::uint64_t criterion_seed(std::uint64_t seed, int id);

/// Criterion 12 reruns every other criterion and compares report bytes.
CriterionResult run_criterion(int id, const SuiteOptions& opt);

/// Runs the selected criteria in order. When criterion 12 is selected
/// together with others, the first pass is reused as its baseline.
SuiteReport run_suite(const SuiteOptions& opt);

}  // namespace collide::acceptance
