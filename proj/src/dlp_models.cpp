#include "collide/dlp_models.hpp"

#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "collide/errors.hpp"

namespace collide {

namespace {

std::vector<double> block_row(std::size_t urns, std::size_t begin, std::size_t end, double mass) {
    std::vector<double> row(urns, 0.0);
    for (std::size_t i = begin; i < end; ++i) row[i] = mass;
    return row;
}

// Integral over x in [-1/2, 1/2] of an even integrand, split where either
// hazard law has a kink.
template <class F>
double average_over_x(F&& f) {
    using boost::math::quadrature::gauss;
    return 2.0 * (gauss<double, 30>::integrate(f, 0.0, 0.25) + gauss<double, 30>::integrate(f, 0.25, 0.5));
}

}  // namespace

std::string to_string(DlpVariant v) { return v == DlpVariant::GS ? "gs" : "ags"; }

DlpVariant parse_variant(const std::string& s) {
    if (s == "gs" || s == "GS") return DlpVariant::GS;
    if (s == "ags" || s == "AGS") return DlpVariant::AGS;
    throw InvalidArgument("unknown DLP variant '" + s + "' (expected gs or ags)");
}

void DlpInstance::validate() const {
    if (!(std::abs(x) <= 0.5)) throw InvalidArgument("DLP instance needs |x| <= 1/2");
    if (n < 8) throw InvalidArgument("DLP instance needs n >= 8");
    if (variant == DlpVariant::AGS && n % 4 != 0) throw InvalidArgument("AGS instance needs n divisible by 4");
}

std::uint64_t DlpInstance::shift() const {
    return static_cast<std::uint64_t>(std::llround(std::abs(x) * static_cast<double>(n)));
}

double DlpInstance::effective_x() const {
    return std::copysign(static_cast<double>(shift()) / static_cast<double>(n), x);
}

UrnModelSpec gs_spec(const DlpInstance& inst) {
    inst.validate();
    if (inst.variant != DlpVariant::GS) throw InvalidArgument("gs_spec: instance is not GS");
    const std::size_t n = inst.n;
    const std::size_t k = inst.shift();
    const double p = 1.0 / static_cast<double>(n);
    auto low = block_row(n + k, 0, n, p);
    auto high = block_row(n + k, k, n + k, p);
    // For negative x the wild walk starts below the tame one.
    auto tame = inst.x >= 0 ? low : high;
    auto wild = inst.x >= 0 ? high : low;
    return UrnModelSpec(ColorMix::uniform(2), {std::move(tame), std::move(wild)}, "gs");
}

UrnModelSpec ags_spec(const DlpInstance& inst) {
    inst.validate();
    if (inst.variant != DlpVariant::AGS) throw InvalidArgument("ags_spec: instance is not AGS");
    const std::size_t n = inst.n;
    const std::size_t quarter = n / 4;
    const std::size_t half = n / 2;
    const std::size_t k = inst.shift();
    const double two = 2.0 / static_cast<double>(n);
    const double four = 4.0 / static_cast<double>(n);
    std::vector<double> wild;
    std::size_t urns = half;
    if (k < quarter) {
        wild.assign(urns, 0.0);
        for (std::size_t i = 0; i < quarter - k; ++i) wild[i] = four;
        for (std::size_t i = quarter - k; i < quarter + k; ++i) wild[i] = two;
    } else {
        urns = std::max(half, k + quarter);
        wild = block_row(urns, k - quarter, k + quarter, two);
    }
    return UrnModelSpec(ColorMix::uniform(2), {block_row(urns, 0, half, two), std::move(wild)}, "ags");
}

UrnModelSpec dlp_spec(const DlpInstance& inst) {
    return inst.variant == DlpVariant::GS ? gs_spec(inst) : ags_spec(inst);
}

TrialBatch sim_dlp_runtime(const DlpInstance& inst, std::uint64_t trials, const SimOptions& opt) {
    return sim_first_collision(dlp_spec(inst), trials, opt);
}

double hazard_gs(double x, double r) {
    if (!(std::abs(x) <= 0.5)) throw InvalidArgument("hazard_gs: |x| must be <= 1/2");
    if (r < 0.0) throw InvalidArgument("hazard_gs: r must be >= 0");
    return std::exp(-(1.0 - std::abs(x)) * r * r / 4.0);
}

double hazard_ags(double x, double r) {
    if (!(std::abs(x) <= 0.5)) throw InvalidArgument("hazard_ags: |x| must be <= 1/2");
    if (r < 0.0) throw InvalidArgument("hazard_ags: r must be >= 0");
    const double ax = std::abs(x);
    if (ax < 0.25) return std::exp(-r * r / 2.0);
    return std::exp(-(3.0 - 4.0 * ax) * r * r / 4.0);
}

double hazard(DlpVariant v, double x, double r) { return v == DlpVariant::GS ? hazard_gs(x, r) : hazard_ags(x, r); }

HazardCurve hazard_curve(DlpVariant v, double x, std::vector<double> grid) {
    return {v, x, tabulate([v, x](double r) { return hazard(v, x, r); }, std::move(grid))};
}

void write_hazard_csv(std::ostream& out, std::span<const HazardCurve> curves) {
    const auto old = out.precision(12);
    out << "variant,x,r,survival\n";
    for (const auto& c : curves) {
        for (std::size_t i = 0; i < c.curve.grid().size(); ++i)
            out << to_string(c.variant) << ',' << c.x << ',' << c.curve.grid()[i] << ',' << c.curve.values()[i] << '\n';
    }
    out.precision(old);
}

double averaged_mean_constant(DlpVariant v) {
    return average_over_x([v](double x) { return moment([v, x](double r) { return hazard(v, x, r); }, 1); });
}

double averaged_hazard(DlpVariant v, double r) {
    if (r < 0.0) throw InvalidArgument("averaged_hazard: r must be >= 0");
    return average_over_x([v, r](double x) { return hazard(v, x, r); });
}

nlohmann::json to_json(const DlpInstance& inst) {
    return {{"variant", to_string(inst.variant)}, {"n", inst.n}, {"x", inst.x}};
}

DlpInstance dlp_instance_from_json(const nlohmann::json& j) {
    DlpInstance inst;
    inst.variant = parse_variant(j.at("variant").get<std::string>());
    inst.n = j.at("n").get<std::uint64_t>();
    inst.x = j.at("x").get<double>();
    inst.validate();
    return inst;
}

}  // namespace collide
