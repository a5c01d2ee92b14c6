#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <json.hpp>

#include "collide/dist_core.hpp"

namespace collide {

/// Asymptotic fingerprint shared by every closed-form survival law.
///
/// `psi` holds the ranked atom limits (theta for the single-colour repeat law,
/// the (2m)-scaled atoms for the m-fold law). The general multicolour law reads
/// `mix`, `phi`, `psi_per_color` and optionally an explicit `cross` term; when
/// `cross` is absent it is computed from `psi_per_color`.
struct LimitParams {
    unsigned q = 2;
    std::vector<double> psi;
    std::optional<std::vector<double>> phi;
    std::optional<std::vector<double>> mix;
    std::vector<std::vector<double>> psi_per_color;
    unsigned m = 1;
    std::optional<double> cross;

    /// Throws InvalidParams on violated invariants.
    void validate() const;
};

using SurvivalFn = std::function<double(double)>;

/// Repeat time of a single i.i.d. stream:
/// exp(-(1 - sum theta^2) r^2 / 2) prod (1 + theta r) exp(-theta r).
double survival_repeat_cp(const LimitParams& params, double r);

/// First collision, q equiprobable colours sharing one urn law.
double survival_qcolor(const LimitParams& params, double r);

/// First collision with colour mix and colour-dependent urn laws.
double survival_general(const LimitParams& params, double r);

/// m-fold collision (m balls of each of two colours in one urn), uniform mix.
double survival_mfold(const LimitParams& params, double r);

/// h_m(x) = P(Poisson(x) < m).
double poisson_lower_tail(unsigned m, double x);

/// Exact survival of the Poissonised first collision epoch at unscaled time t.
double survival_prelimit_exact(const RankedDistribution& d, unsigned q, double t);
double survival_prelimit_exact(const UrnModelSpec& spec, double t);

/// Tabulated survival function. Values must start at 1 when the grid starts at
/// 0 and be non-increasing; evaluation between grid points is linear.
class SurvivalCurve {
public:
    SurvivalCurve(std::vector<double> grid, std::vector<double> values);

    std::span<const double> grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator()(double r) const;

    void write_csv(std::ostream& out) const;

private:
    std::vector<double> grid_;
    std::vector<double> values_;
};

SurvivalCurve tabulate(const SurvivalFn& law, std::vector<double> grid);
std::vector<double> linear_grid(double lo, double hi, std::size_t points);

/// E[X^k] = int_0^inf k r^{k-1} S(r) dr, adaptive Gauss-Kronrod to relative 1e-8.
/// Throws NumericFailure when the tail never drops below 1e-14 or the
/// quadrature does not converge.
double moment(const SurvivalFn& law, int k);
double moment(const SurvivalCurve& curve, int k);

/// -dS/dr by central difference (one-sided at 0); error O(step^2).
double density(const SurvivalFn& law, double r, double step = 1e-4);

nlohmann::json to_json(const LimitParams& p);
LimitParams limit_params_from_json(const nlohmann::json& j);

/// Law with no atoms and phi/mix read from a finite spec (atoms assumed to vanish).
LimitParams gaussian_limit_params(const UrnModelSpec& spec);
/// Law that keeps every finite-n atom; coincides with the Poissonised exact law.
LimitParams finite_atom_params(const UrnModelSpec& spec);

}  // namespace collide
