#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "collide/dist_core.hpp"
#include "collide/limit_laws.hpp"
#include "collide/urn_sim.hpp"

namespace collide {

enum class DlpVariant { GS, AGS };

std::string to_string(DlpVariant v);
DlpVariant parse_variant(const std::string& s);

/// Interval of size n with the unknown exponent at x*n, x in [-1/2, 1/2].
struct DlpInstance {
    std::uint64_t n = 0;
    double x = 0.0;
    DlpVariant variant = DlpVariant::GS;

    void validate() const;
    /// Offset of the wild set in urns, round(|x| n).
    std::uint64_t shift() const;
    /// The x actually realised at this n: shift() / n, with the sign of x.
    double effective_x() const;
};

/// Tame and wild walks uniform on n exponents each, offset by shift();
/// colours equally likely.
UrnModelSpec gs_spec(const DlpInstance& inst);

/// Urns are the classes {a, -a}. Tame is uniform (2/n) on n/2 classes. For
/// |x| < 1/4 the wild set folds onto itself: 4/n on the first n/4 - k classes
/// and 2/n on the next 2k; otherwise it is uniform 2/n on n/2 classes starting
/// at k - n/4. Needs 4 | n.
UrnModelSpec ags_spec(const DlpInstance& inst);

UrnModelSpec dlp_spec(const DlpInstance& inst);

/// Idealised running time: first tame/wild collision index.
TrialBatch sim_dlp_runtime(const DlpInstance& inst, std::uint64_t trials, const SimOptions& opt = {});

/// P(T / sqrt(n) > r) in the limit: exp(-(1 - |x|) r^2 / 4).
double hazard_gs(double x, double r);
/// exp(-r^2 / 2) for |x| < 1/4, exp(-(3 - 4|x|) r^2 / 4) otherwise.
double hazard_ags(double x, double r);
double hazard(DlpVariant v, double x, double r);

struct HazardCurve {
    DlpVariant variant = DlpVariant::GS;
    double x = 0.0;
    SurvivalCurve curve;
};

HazardCurve hazard_curve(DlpVariant v, double x, std::vector<double> grid);
/// "variant,x,r,survival".
void write_hazard_csv(std::ostream& out, std::span<const HazardCurve> curves);

/// Mean of the limiting scaled running time averaged over x uniform on
/// [-1/2, 1/2] (Gauss-Legendre over x, adaptive quadrature over r).
double averaged_mean_constant(DlpVariant v);
/// Survival of the scaled running time for a uniformly random instance.
double averaged_hazard(DlpVariant v, double r);

nlohmann::json to_json(const DlpInstance& inst);
DlpInstance dlp_instance_from_json(const nlohmann::json& j);

}  // namespace collide
