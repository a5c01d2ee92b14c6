#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include <json.hpp>

#include "collide/limit_laws.hpp"

namespace collide {

/// Right-continuous empirical survival r -> #{x_i > r} / N.
class EmpiricalSurvival {
public:
    explicit EmpiricalSurvival(std::vector<double> sample);

    double operator()(double r) const;
    std::span<const double> sorted() const noexcept { return sorted_; }
    std::size_t size() const noexcept { return sorted_.size(); }

private:
    std::vector<double> sorted_;
};

/// Dvoretzky-Kiefer-Wolfowitz half-width sqrt(ln(2/delta) / (2N)).
double dkw_epsilon(std::size_t n, double delta);

struct KsReport {
    double statistic = 0.0;
    std::size_t n = 0;
    double delta = 1e-3;
    double dkw_epsilon = 0.0;
    double allowance = 0.0;
    bool pass = false;

    double threshold() const noexcept { return dkw_epsilon + allowance; }
};

/// One-sample KS distance between the sample and the law given by its survival
/// function, evaluated on both sides of every sample point. Ties are handled
/// (lattice samples). Passes iff D <= dkw_epsilon + allowance.
/// Throws InvalidArgument for fewer than 100 observations.
KsReport ks_against(std::span<const double> sample, const SurvivalFn& law, double delta = 1e-3,
                    double allowance = 0.0);
KsReport ks_against(std::span<const double> sample, const SurvivalCurve& law, double delta = 1e-3,
                    double allowance = 0.0);

/// Two-sample KS distance; epsilon = sqrt(ln(2/delta)/2 * (1/N1 + 1/N2)).
KsReport ks_two_sample(std::span<const double> a, std::span<const double> b, double delta = 1e-3,
                       double allowance = 0.0);

struct MomentSummary {
    double mean = 0.0;
    double mean_se = 0.0;
    double variance = 0.0;
    double variance_se = 0.0;
    int k = 1;
    double kth = 0.0;  ///< raw moment E[X^k]
    double kth_se = 0.0;
};

MomentSummary moments_of(std::span<const double> sample, int k);

struct Histogram {
    std::vector<double> edges;  ///< bins.size() + 1 edges
    std::vector<std::size_t> counts;
    std::size_t total = 0;
};

/// Bin width 2 IQR N^{-1/3} (Freedman-Diaconis) from min to max; falls back to
/// ceil(log2 N) + 1 equal bins (Sturges) when the IQR is zero.
Histogram freedman_diaconis(std::span<const double> sample);

/// "bin_left,bin_right,count"; with a law, adds "density,limit_density" where
/// limit_density is the law's probability mass in the bin divided by its width.
void write_histogram_csv(std::ostream& out, const Histogram& h, const SurvivalFn* law = nullptr);

nlohmann::json to_json(const KsReport& r);

}  // namespace collide
