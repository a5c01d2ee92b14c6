#include "collide/limit_laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "collide/errors.hpp"
#include "collide/numeric.hpp"

namespace collide {

namespace {

constexpr double kCoeffSlack = 1e-10;

double clamp_probability(double v) { return std::clamp(v, 0.0, 1.0); }

void require_time(double r) {
    if (!(r >= 0.0)) throw InvalidArgument("survival laws need r >= 0");
}

double sum_sq(std::span<const double> xs) {
    numeric::CompensatedSum s;
    for (double x : xs) s.add(x * x);
    return s.value();
}

/// Gaussian coefficients that are negative only by rounding are clamped to 0.
double clamp_coefficient(double c, const char* what) {
    if (c < -kCoeffSlack) throw InvalidParams(std::string(what) + ": negative Gaussian coefficient");
    return std::max(c, 0.0);
}

double factorial(unsigned m) {
    double f = 1.0;
    for (unsigned i = 2; i <= m; ++i) f *= i;
    return f;
}

/// log P(Poisson(x) < m) and log1p-ready upper tail P(Poisson(x) >= m).
struct PoissonSplit {
    double log_lower;
    double upper;
};

PoissonSplit poisson_split(unsigned m, double x) {
    if (x == 0.0) return {0.0, 0.0};
    const double log_x = std::log(x);
    if (x < static_cast<double>(m)) {
        // Upper tail terms decrease from y = m on; sum them directly.
        double term = std::exp(m * log_x - x - std::lgamma(m + 1.0));
        numeric::CompensatedSum tail;
        for (unsigned y = m; term > 0.0; ++y) {
            tail.add(term);
            if (term < 1e-18 * tail.value()) break;
            term *= x / (y + 1.0);
        }
        const double upper = tail.value();
        return {std::log1p(-upper), upper};
    }
    // log sum_{y<m} x^y / y! - x via log-sum-exp.
    double peak = -std::numeric_limits<double>::infinity();
    for (unsigned y = 0; y < m; ++y) peak = std::max(peak, y * log_x - std::lgamma(y + 1.0));
    numeric::CompensatedSum acc;
    for (unsigned y = 0; y < m; ++y) acc.add(std::exp(y * log_x - std::lgamma(y + 1.0) - peak));
    const double log_lower = peak + std::log(acc.value()) - x;
    return {log_lower, -std::expm1(log_lower)};
}

}  // namespace

void LimitParams::validate() const {
    if (q == 0) throw InvalidParams("LimitParams: q must be >= 1");
    if (m == 0) throw InvalidParams("LimitParams: m must be >= 1");
    for (double p : psi) {
        if (!std::isfinite(p) || p < 0.0) throw InvalidParams("LimitParams: psi must be finite and >= 0");
    }
    if (!std::is_sorted(psi.begin(), psi.end(), std::greater<>{}))
        throw InvalidParams("LimitParams: psi must be non-increasing");
    numeric::CompensatedSum mass;
    for (double p : psi) mass.add(std::pow(p, 2.0 * m));
    if (mass.value() > 1.0 + kCoeffSlack) throw InvalidParams("LimitParams: sum psi^(2m) exceeds 1");
    if (mix) {
        if (mix->size() != q) throw InvalidParams("LimitParams: mix must have q entries");
        ColorMix check(*mix);
        (void)check;
    }
    if (!psi_per_color.empty() && psi_per_color.size() != q)
        throw InvalidParams("LimitParams: psi_per_color must have q rows");
    if (phi) {
        if (phi->size() != q) throw InvalidParams("LimitParams: phi must have q entries");
        for (unsigned a = 0; a < q; ++a) {
            const double atoms = psi_per_color.empty() ? 0.0 : sum_sq(psi_per_color[a]);
            if ((*phi)[a] < atoms - kCoeffSlack)
                throw InvalidParams("LimitParams: phi_a below the squared atom mass of colour a");
        }
    }
}

double survival_repeat_cp(const LimitParams& params, double r) {
    require_time(r);
    params.validate();
    const double gauss = clamp_coefficient(1.0 - sum_sq(params.psi), "survival_repeat_cp");
    numeric::CompensatedSum log_s;
    log_s.add(-0.5 * gauss * r * r);
    for (double theta : params.psi) {
        if (theta == 0.0) break;
        log_s.add(std::log1p(theta * r) - theta * r);
    }
    return clamp_probability(std::exp(log_s.value()));
}

double survival_qcolor(const LimitParams& params, double r) {
    require_time(r);
    params.validate();
    if (params.q < 2) throw InvalidParams("survival_qcolor: q must be >= 2");
    const double q = params.q;
    const double frac = (q - 1.0) / q;
    const double gauss = clamp_coefficient(1.0 - sum_sq(params.psi), "survival_qcolor");
    numeric::CompensatedSum log_s;
    log_s.add(-0.5 * frac * r * r * gauss);
    for (double psi : params.psi) {
        if (psi == 0.0) break;
        const double x = psi * r / q;
        // log(q - (q-1) e^{-x}) = log1p(-(q-1) expm1(-x))
        log_s.add(-frac * psi * r + std::log1p(-(q - 1.0) * std::expm1(-x)));
    }
    return clamp_probability(std::exp(log_s.value()));
}

double survival_general(const LimitParams& params, double r) {
    require_time(r);
    params.validate();
    if (!params.phi || !params.mix) throw InvalidParams("survival_general: phi and mix are required");
    const unsigned q = params.q;
    const auto& mix = *params.mix;
    const auto& phi = *params.phi;

    double cross = 0.0;
    std::size_t atoms = 0;
    for (const auto& row : params.psi_per_color) atoms = std::max(atoms, row.size());
    auto atom = [&](unsigned a, std::size_t i) {
        const auto& row = params.psi_per_color[a];
        return i < row.size() ? row[i] : 0.0;
    };
    if (params.cross) {
        cross = *params.cross;
    } else if (atoms > 0) {
        numeric::CompensatedSum c;
        for (std::size_t i = 0; i < atoms; ++i)
            for (unsigned a = 0; a < q; ++a)
                for (unsigned b = 0; b < q; ++b)
                    if (a != b) c.add(mix[a] * mix[b] * atom(a, i) * atom(b, i));
        cross = c.value();
    }
    numeric::CompensatedSum coeff;
    coeff.add(1.0);
    for (unsigned a = 0; a < q; ++a) coeff.add(-mix[a] * mix[a] * phi[a]);
    coeff.add(-cross);
    const double gauss = clamp_coefficient(coeff.value(), "survival_general");

    numeric::CompensatedSum log_s;
    log_s.add(-0.5 * gauss * r * r);
    std::vector<double> expo(q);
    for (std::size_t i = 0; i < atoms; ++i) {
        double linear = 0.0;
        bool any = false;
        for (unsigned a = 0; a < q; ++a) {
            expo[a] = atom(a, i) * mix[a] * r;
            linear += expo[a];
            any = any || expo[a] > 0.0;
        }
        if (!any) continue;
        log_s.add(-linear + numeric::log1p_sum_expm1(expo));
    }
    return clamp_probability(std::exp(log_s.value()));
}

double poisson_lower_tail(unsigned m, double x) {
    if (m == 0) throw InvalidArgument("poisson_lower_tail: m must be >= 1");
    if (!(x >= 0.0)) throw InvalidArgument("poisson_lower_tail: x must be >= 0");
    return std::exp(poisson_split(m, x).log_lower);
}

double survival_mfold(const LimitParams& params, double r) {
    require_time(r);
    params.validate();
    if (params.q < 2) throw InvalidParams("survival_mfold: q must be >= 2");
    const unsigned m = params.m;
    const double q = params.q;
    numeric::CompensatedSum atom_mass;
    for (double psi : params.psi) atom_mass.add(std::pow(psi, 2.0 * m));
    const double gauss = clamp_coefficient(1.0 - atom_mass.value(), "survival_mfold");
    const double fact = factorial(m);
    const double c_qm = (q - 1.0) / (2.0 * std::pow(q, 2.0 * m - 1.0) * fact * fact);

    numeric::CompensatedSum log_s;
    log_s.add(-gauss * c_qm * std::pow(r, 2.0 * m));
    for (double psi : params.psi) {
        if (psi == 0.0) break;
        const auto split = poisson_split(m, psi * r / q);
        // (q-1) log h + log(q - (q-1) h) with q - (q-1) h = 1 + (q-1)(1 - h)
        log_s.add((q - 1.0) * split.log_lower + std::log1p((q - 1.0) * split.upper));
    }
    return clamp_probability(std::exp(log_s.value()));
}

double survival_prelimit_exact(const RankedDistribution& d, unsigned q, double t) {
    return survival_prelimit_exact(UrnModelSpec::identical(ColorMix::uniform(q), d), t);
}

double survival_prelimit_exact(const UrnModelSpec& spec, double t) {
    require_time(t);
    if (spec.q() < 2) throw InvalidArgument("survival_prelimit_exact: q must be >= 2");
    const unsigned q = spec.q();
    std::vector<double> rates(q);
    numeric::CompensatedSum log_s;
    for (std::size_t i = 0; i < spec.urns(); ++i) {
        double total = 0.0;
        for (unsigned a = 0; a < q; ++a) {
            rates[a] = spec.mix()[a] * spec.row(a)[i] * t;
            total += rates[a];
        }
        if (total == 0.0) continue;
        // P(at most one colour in urn i by time t) = e^{-total}(1 + sum_a (e^{rate_a} - 1))
        log_s.add(-total + numeric::log1p_sum_expm1(rates));
    }
    return clamp_probability(std::exp(log_s.value()));
}

SurvivalCurve::SurvivalCurve(std::vector<double> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (grid_.empty() || grid_.size() != values_.size())
        throw InvalidArgument("SurvivalCurve: grid and values must be non-empty and equal length");
    if (grid_.front() < 0.0) throw InvalidArgument("SurvivalCurve: grid must be >= 0");
    for (std::size_t i = 1; i < grid_.size(); ++i) {
        if (!(grid_[i] > grid_[i - 1])) throw InvalidArgument("SurvivalCurve: grid must be strictly increasing");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!(values_[i] >= 0.0 && values_[i] <= 1.0))
            throw InvalidArgument("SurvivalCurve: values must lie in [0, 1]");
        if (i > 0 && values_[i] > values_[i - 1] + 1e-12)
            throw InvalidArgument("SurvivalCurve: values must be non-increasing");
    }
    if (grid_.front() == 0.0 && std::abs(values_.front() - 1.0) > 1e-12)
        throw InvalidArgument("SurvivalCurve: S(0) must be 1");
}

double SurvivalCurve::operator()(double r) const {
    if (r <= grid_.front()) return values_.front();
    if (r >= grid_.back()) return values_.back();
    const auto hi = static_cast<std::size_t>(std::upper_bound(grid_.begin(), grid_.end(), r) - grid_.begin());
    const std::size_t lo = hi - 1;
    const double w = (r - grid_[lo]) / (grid_[hi] - grid_[lo]);
    return values_[lo] + w * (values_[hi] - values_[lo]);
}

void SurvivalCurve::write_csv(std::ostream& out) const {
    out << "r,survival\n";
    const auto old = out.precision(17);
    for (std::size_t i = 0; i < grid_.size(); ++i) out << grid_[i] << ',' << values_[i] << '\n';
    out.precision(old);
}

SurvivalCurve tabulate(const SurvivalFn& law, std::vector<double> grid) {
    std::vector<double> values;
    values.reserve(grid.size());
    for (double r : grid) values.push_back(law(r));
    return SurvivalCurve(std::move(grid), std::move(values));
}

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
    if (points < 2 || !(hi > lo)) throw InvalidArgument("linear_grid: need hi > lo and >= 2 points");
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    return grid;
}

double moment(const SurvivalFn& law, int k) {
    if (k < 1) throw InvalidArgument("moment: k must be >= 1");
    double upper = 1.0;
    while (law(upper) >= 1e-14) {
        upper *= 2.0;
        if (upper > 1e8) throw NumericFailure("moment: survival tail does not decay");
    }
    auto integrand = [&](double r) { return k * std::pow(r, k - 1) * law(r); };
    double error = 0.0;
    using boost::math::quadrature::gauss_kronrod;
    const double value = gauss_kronrod<double, 61>::integrate(integrand, 0.0, upper, 25, 1e-10, &error);
    if (!std::isfinite(value) || error > 1e-8 * std::max(std::abs(value), 1e-300))
        throw NumericFailure("moment: quadrature did not converge");
    return value;
}

double moment(const SurvivalCurve& curve, int k) {
    if (curve.values().back() >= 1e-14)
        throw NumericFailure("moment: tabulated curve does not reach the tail");
    return moment(SurvivalFn([&](double r) { return curve(r); }), k);
}

double density(const SurvivalFn& law, double r, double step) {
    if (r < step) return -(law(r + step) - law(r)) / step;
    return -(law(r + step) - law(r - step)) / (2.0 * step);
}

nlohmann::json to_json(const LimitParams& p) {
    nlohmann::json j{{"q", p.q}, {"psi", p.psi}, {"m", p.m}};
    if (p.phi) j["phi"] = *p.phi;
    if (p.mix) j["mix"] = *p.mix;
    if (!p.psi_per_color.empty()) j["psi_per_color"] = p.psi_per_color;
    if (p.cross) j["cross"] = *p.cross;
    return j;
}

LimitParams limit_params_from_json(const nlohmann::json& j) {
    LimitParams p;
    p.q = j.value("q", 2u);
    p.m = j.value("m", 1u);
    p.psi = j.value("psi", std::vector<double>{});
    if (j.contains("phi")) p.phi = j["phi"].get<std::vector<double>>();
    if (j.contains("mix")) p.mix = j["mix"].get<std::vector<double>>();
    if (j.contains("psi_per_color")) p.psi_per_color = j["psi_per_color"].get<std::vector<std::vector<double>>>();
    if (j.contains("cross")) p.cross = j["cross"].get<double>();
    p.validate();
    return p;
}

LimitParams gaussian_limit_params(const UrnModelSpec& spec) {
    LimitParams p;
    p.q = spec.q();
    p.mix = std::vector<double>(spec.mix().weights().begin(), spec.mix().weights().end());
    p.phi = spec.scaling().phi;
    p.cross = 0.0;
    return p;
}

LimitParams finite_atom_params(const UrnModelSpec& spec) {
    LimitParams p = gaussian_limit_params(spec);
    p.psi_per_color = spec.scaling().psi_per_color;
    p.cross.reset();
    return p;
}

}  // namespace collide
