#include "collide/stats_gof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "collide/errors.hpp"
#include "collide/numeric.hpp"

namespace collide {

namespace {

constexpr std::size_t kMinKsSample = 100;

std::vector<double> sorted_copy(std::span<const double> sample) {
    std::vector<double> v(sample.begin(), sample.end());
    std::sort(v.begin(), v.end());
    return v;
}

double quantile_sorted(const std::vector<double>& v, double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

EmpiricalSurvival::EmpiricalSurvival(std::vector<double> sample) : sorted_(std::move(sample)) {
    if (sorted_.empty()) throw InvalidArgument("EmpiricalSurvival: empty sample");
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalSurvival::operator()(double r) const {
    const auto above = sorted_.end() - std::upper_bound(sorted_.begin(), sorted_.end(), r);
    return static_cast<double>(above) / static_cast<double>(sorted_.size());
}

double dkw_epsilon(std::size_t n, double delta) {
    if (n == 0) throw InvalidArgument("dkw_epsilon: empty sample");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("dkw_epsilon: delta must be in (0, 1)");
    return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
}

KsReport ks_against(std::span<const double> sample, const SurvivalFn& law, double delta, double allowance) {
    if (sample.empty()) throw InvalidArgument("ks_against: empty sample");
    if (sample.size() < kMinKsSample) throw InvalidArgument("ks_against: need at least 100 observations");
    const auto x = sorted_copy(sample);
    const auto n = static_cast<double>(x.size());
    double d = 0.0;
    std::size_t i = 0;
    while (i < x.size()) {
        std::size_t j = i;
        while (j < x.size() && x[j] == x[i]) ++j;
        // Empirical CDF is i/n just below x[i] and j/n at x[i]; the law's left
        // limit matters only for laws with atoms.
        const double cdf = 1.0 - law(x[i]);
        // Laws here describe non-negative times, so S(0-) = 1 and they are never
        // evaluated below zero.
        double cdf_left = 0.0;
        if (x[i] > 0.0) cdf_left = 1.0 - law(std::nextafter(x[i], -std::numeric_limits<double>::infinity()));
        else if (x[i] < 0.0) cdf_left = cdf;
        d = std::max({d, std::abs(cdf_left - static_cast<double>(i) / n), std::abs(static_cast<double>(j) / n - cdf)});
        i = j;
    }
    KsReport r;
    r.statistic = d;
    r.n = x.size();
    r.delta = delta;
    r.dkw_epsilon = dkw_epsilon(x.size(), delta);
    r.allowance = allowance;
    r.pass = d <= r.threshold();
    return r;
}

KsReport ks_against(std::span<const double> sample, const SurvivalCurve& law, double delta, double allowance) {
    return ks_against(sample, SurvivalFn([&](double r) { return law(r); }), delta, allowance);
}

KsReport ks_two_sample(std::span<const double> a, std::span<const double> b, double delta, double allowance) {
    if (a.size() < kMinKsSample || b.size() < kMinKsSample)
        throw InvalidArgument("ks_two_sample: need at least 100 observations per sample");
    const auto xa = sorted_copy(a);
    const auto xb = sorted_copy(b);
    const auto na = static_cast<double>(xa.size());
    const auto nb = static_cast<double>(xb.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < xa.size() && j < xb.size()) {
        const double v = std::min(xa[i], xb[j]);
        while (i < xa.size() && xa[i] == v) ++i;
        while (j < xb.size() && xb[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    KsReport r;
    r.statistic = d;
    r.n = std::min(xa.size(), xb.size());
    r.delta = delta;
    r.dkw_epsilon = std::sqrt(std::log(2.0 / delta) / 2.0 * (1.0 / na + 1.0 / nb));
    r.allowance = allowance;
    r.pass = d <= r.threshold();
    return r;
}

MomentSummary moments_of(std::span<const double> sample, int k) {
    if (sample.empty()) throw InvalidArgument("moments_of: empty sample");
    if (k < 1) throw InvalidArgument("moments_of: k must be >= 1");
    const auto n = static_cast<double>(sample.size());
    numeric::CompensatedSum s1, sk;
    for (double x : sample) {
        s1.add(x);
        sk.add(std::pow(x, k));
    }
    MomentSummary out;
    out.k = k;
    out.mean = s1.value() / n;
    out.kth = sk.value() / n;
    numeric::CompensatedSum c2, c4, ck;
    for (double x : sample) {
        const double dev = x - out.mean;
        c2.add(dev * dev);
        c4.add(dev * dev * dev * dev);
        const double dk = std::pow(x, k) - out.kth;
        ck.add(dk * dk);
    }
    const double m2 = c2.value() / n;
    const double m4 = c4.value() / n;
    out.variance = sample.size() > 1 ? c2.value() / (n - 1.0) : 0.0;
    out.mean_se = std::sqrt(out.variance / n);
    out.variance_se = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
    out.kth_se = sample.size() > 1 ? std::sqrt(ck.value() / (n - 1.0) / n) : 0.0;
    return out;
}

Histogram freedman_diaconis(std::span<const double> sample) {
    if (sample.empty()) throw InvalidArgument("freedman_diaconis: empty sample");
    const auto x = sorted_copy(sample);
    const double lo = x.front();
    const double hi = x.back();
    const double iqr = quantile_sorted(x, 0.75) - quantile_sorted(x, 0.25);
    std::size_t bins = 1;
    if (hi > lo) {
        if (iqr > 0.0) {
            const double width = 2.0 * iqr * std::cbrt(1.0 / static_cast<double>(x.size()));
            bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
        } else {
            bins = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(x.size())))) + 1;
        }
        bins = std::clamp<std::size_t>(bins, 1, 100000);
    }
    Histogram h;
    h.total = x.size();
    h.counts.assign(bins, 0);
    h.edges.resize(bins + 1);
    const double span = hi > lo ? hi - lo : 1.0;
    for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + span * static_cast<double>(b) / static_cast<double>(bins);
    for (double v : x) {
        auto b = static_cast<std::size_t>((v - lo) / span * static_cast<double>(bins));
        h.counts[std::min(b, bins - 1)]++;
    }
    return h;
}

void write_histogram_csv(std::ostream& out, const Histogram& h, const SurvivalFn* law) {
    const auto old = out.precision(12);
    out << "bin_left,bin_right,count";
    if (law) out << ",density,limit_density";
    out << '\n';
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        const double left = h.edges[b];
        const double right = h.edges[b + 1];
        out << left << ',' << right << ',' << h.counts[b];
        if (law) {
            const double width = right - left;
            const double dens = static_cast<double>(h.counts[b]) / (static_cast<double>(h.total) * width);
            const double limit = ((*law)(std::max(left, 0.0)) - (*law)(std::max(right, 0.0))) / width;
            out << ',' << dens << ',' << limit;
        }
        out << '\n';
    }
    out.precision(old);
}

nlohmann::json to_json(const KsReport& r) {
    return {{"statistic", r.statistic}, {"n", r.n},          {"delta", r.delta},
            {"dkw_epsilon", r.dkw_epsilon}, {"allowance", r.allowance}, {"threshold", r.threshold()},
            {"pass", r.pass}};
}

}  // namespace collide
