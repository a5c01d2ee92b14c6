#include "collide/dist_core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "collide/errors.hpp"
#include "collide/numeric.hpp"

namespace collide {

namespace {

constexpr double kMassTolerance = 1e-12;

void check_unit_mass(std::span<const double> masses, const char* what) {
    const double total = numeric::compensated_sum(masses);
    if (std::abs(total - 1.0) > kMassTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << what << ": masses sum to " << total << ", expected 1";
        throw InvalidArgument(msg.str());
    }
}

RankedDistribution atom_plus_flat(std::size_t n, double atom, std::string label) {
    std::vector<double> masses(n + 1, (1.0 - atom) / static_cast<double>(n));
    masses[0] = atom;
    return RankedDistribution(std::move(masses), std::move(label));
}

}  // namespace

RankedDistribution::RankedDistribution(std::vector<double> masses, std::string label)
    : masses_(std::move(masses)), label_(std::move(label)) {
    for (double p : masses_) {
        if (!std::isfinite(p) || p < 0.0)
            throw InvalidArgument("RankedDistribution: masses must be finite and non-negative");
    }
    while (!masses_.empty() && masses_.back() == 0.0) masses_.pop_back();
    if (masses_.empty()) throw InvalidArgument("RankedDistribution: empty support");
    if (!std::is_sorted(masses_.begin(), masses_.end(), std::greater<>{}))
        throw InvalidArgument("RankedDistribution: masses must be non-increasing");
    check_unit_mass(masses_, "RankedDistribution");
}

RankedDistribution RankedDistribution::from_unsorted(std::vector<double> masses, std::string label) {
    std::sort(masses.begin(), masses.end(), std::greater<>{});
    return RankedDistribution(std::move(masses), std::move(label));
}

RankedDistribution make_uniform(std::size_t n) {
    if (n == 0) throw InvalidArgument("make_uniform: n must be >= 1");
    return RankedDistribution(std::vector<double>(n, 1.0 / static_cast<double>(n)),
                              "uniform(" + std::to_string(n) + ")");
}

RankedDistribution make_sqrt_atom(std::size_t n) {
    if (n < 2) throw InvalidArgument("make_sqrt_atom: n must be >= 2");
    return atom_plus_flat(n, 1.0 / std::sqrt(static_cast<double>(n)),
                          "sqrt_atom(" + std::to_string(n) + ")");
}

RankedDistribution make_log_atom(std::size_t n) {
    if (n < 3) throw InvalidArgument("make_log_atom: n must be >= 3");
    return atom_plus_flat(n, 1.0 / std::log(static_cast<double>(n)),
                          "log_atom(" + std::to_string(n) + ")");
}

ScalingProfile scaling_of(const RankedDistribution& d) {
    numeric::CompensatedSum sq;
    for (double p : d.masses()) sq.add(p * p);
    ScalingProfile out;
    out.s_n = std::sqrt(sq.value());
    out.psi.reserve(d.size());
    numeric::CompensatedSum psi_sq;
    for (double p : d.masses()) {
        const double psi = p / out.s_n;
        out.psi.push_back(psi);
        psi_sq.add(psi * psi);
    }
    out.sum_psi_sq = psi_sq.value();
    return out;
}

MfoldScaling mfold_scaling_of(const RankedDistribution& d, unsigned m) {
    if (m == 0) throw InvalidArgument("mfold_scaling_of: m must be >= 1");
    const double power = 2.0 * m;
    // Factor out p_1 so p_i^{2m} does not underflow for large m.
    const double top = d[0];
    numeric::CompensatedSum acc;
    for (double p : d.masses()) acc.add(std::pow(p / top, power));
    MfoldScaling out;
    out.m = m;
    out.s_2m = top * std::pow(acc.value(), 1.0 / power);
    out.psi_2m.reserve(d.size());
    for (double p : d.masses()) out.psi_2m.push_back(p / out.s_2m);
    return out;
}

ColorMix::ColorMix(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw InvalidArgument("ColorMix: need at least one colour");
    for (double w : weights_) {
        if (!std::isfinite(w) || w <= 0.0)
            throw InvalidArgument("ColorMix: colour weights must be positive");
    }
    check_unit_mass(weights_, "ColorMix");
}

ColorMix ColorMix::uniform(unsigned q) {
    if (q == 0) throw InvalidArgument("ColorMix: need at least one colour");
    return ColorMix(std::vector<double>(q, 1.0 / q));
}

bool ColorMix::is_uniform() const noexcept {
    return std::all_of(weights_.begin(), weights_.end(),
                       [&](double w) { return w == weights_.front(); });
}

UrnModelSpec::UrnModelSpec(ColorMix mix, std::vector<std::vector<double>> rows, std::string label)
    : mix_(std::move(mix)), rows_(std::move(rows)), label_(std::move(label)) {
    if (rows_.size() != mix_.size())
        throw InvalidArgument("UrnModelSpec: need one urn row per colour");
    for (const auto& row : rows_) urns_ = std::max(urns_, row.size());
    if (urns_ == 0) throw InvalidArgument("UrnModelSpec: empty urn space");
    for (auto& row : rows_) {
        for (double p : row) {
            if (!std::isfinite(p) || p < 0.0)
                throw InvalidArgument("UrnModelSpec: masses must be finite and non-negative");
        }
        check_unit_mass(row, "UrnModelSpec row");
        row.resize(urns_, 0.0);
    }
    scaling_ = spec_scaling(*this);
}

UrnModelSpec UrnModelSpec::identical(ColorMix mix, const RankedDistribution& d) {
    std::vector<std::vector<double>> rows(mix.size(),
                                          std::vector<double>(d.masses().begin(), d.masses().end()));
    return UrnModelSpec(std::move(mix), std::move(rows), d.label());
}

bool UrnModelSpec::can_collide() const noexcept {
    for (std::size_t i = 0; i < urns_; ++i) {
        unsigned present = 0;
        for (const auto& row : rows_) present += row[i] > 0.0;
        if (present >= 2) return true;
    }
    return false;
}

SpecScaling spec_scaling(const UrnModelSpec& spec) {
    const unsigned q = spec.q();
    const auto& mix = spec.mix();
    numeric::CompensatedSum sq;
    for (std::size_t i = 0; i < spec.urns(); ++i) {
        double blended = 0.0;
        for (unsigned a = 0; a < q; ++a) blended += mix[a] * spec.row(a)[i];
        sq.add(blended * blended);
    }
    SpecScaling out;
    out.s_n = std::sqrt(sq.value());
    out.psi_per_color.resize(q);
    out.phi.assign(q, 0.0);
    for (unsigned a = 0; a < q; ++a) {
        auto& psi = out.psi_per_color[a];
        psi.reserve(spec.urns());
        numeric::CompensatedSum phi;
        for (double p : spec.row(a)) {
            psi.push_back(p / out.s_n);
            phi.add(psi.back() * psi.back());
        }
        out.phi[a] = phi.value();
    }
    numeric::CompensatedSum cross;
    for (std::size_t i = 0; i < spec.urns(); ++i) {
        for (unsigned a = 0; a < q; ++a) {
            for (unsigned b = 0; b < q; ++b) {
                if (a != b)
                    cross.add(mix[a] * mix[b] * out.psi_per_color[a][i] * out.psi_per_color[b][i]);
            }
        }
    }
    out.cross = cross.value();
    return out;
}

AliasSampler::AliasSampler(std::span<const double> masses) {
    const std::size_t n = masses.size();
    if (n == 0) throw InvalidArgument("AliasSampler: empty support");
    const double total = numeric::compensated_sum(masses);
    if (!(total > 0.0)) throw InvalidArgument("AliasSampler: zero total mass");
    prob_.resize(n);
    alias_.resize(n);
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    small.reserve(n);
    large.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        scaled[i] = masses[i] * static_cast<double>(n) / total;
        alias_[i] = static_cast<std::uint32_t>(i);
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
        const std::uint32_t s = small.back();
        small.pop_back();
        const std::uint32_t l = large.back();
        prob_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    // Leftovers are 1 up to rounding.
    for (std::uint32_t i : large) prob_[i] = 1.0;
    for (std::uint32_t i : small) prob_[i] = 1.0;
}

nlohmann::json to_json(const RankedDistribution& d) {
    return {{"label", d.label()}, {"masses", std::vector<double>(d.masses().begin(), d.masses().end())}};
}

RankedDistribution distribution_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("masses") || !j["masses"].is_array())
        throw InvalidArgument("distribution JSON needs a \"masses\" array");
    std::string label = j.value("label", std::string{});
    return RankedDistribution(j["masses"].get<std::vector<double>>(), std::move(label));
}

RankedDistribution load_masses_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path.string());
    std::vector<double> masses;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        try {
            masses.push_back(std::stod(line.substr(first)));
        } catch (const std::exception&) {
            throw InvalidArgument("bad mass line in " + path.string() + ": " + line);
        }
    }
    return RankedDistribution::from_unsorted(std::move(masses), path.filename().string());
}

}  // namespace collide
