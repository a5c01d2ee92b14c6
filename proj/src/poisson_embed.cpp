#include "collide/poisson_embed.hpp"

#include <cmath>
#include <algorithm>
#include <functional>
#include <limits>
#include <optional>
#include <queue>

#include "collide/errors.hpp"
#include "collide/numeric.hpp"
#include "collide/parallel.hpp"

namespace collide {

namespace {

class BackgroundStream {
public:
    explicit BackgroundStream(double coeff) : coeff_(coeff) {}
    double next(RandomSource& rng) {
        gamma_ += rng.exponential();
        return std::sqrt(2.0 * gamma_ / coeff_);
    }

private:
    double coeff_;
    double gamma_ = 0.0;
};

class ChannelStream {
public:
    explicit ChannelStream(const ChannelSpec& ch) : rate_(ch.psi), q_(ch.q) {}

    double next(RandomSource& rng) {
        for (;;) {
            t_ += rng.exponential() / rate_;
            const auto color = static_cast<int>(rng.below(q_));
            if (retained_) return t_;
            if (first_color_ < 0) {
                first_color_ = color;
            } else if (color != first_color_) {
                retained_ = true;
                return t_;
            }
        }
    }

private:
    double rate_;
    unsigned q_;
    double t_ = 0.0;
    int first_color_ = -1;
    bool retained_ = false;
};

void check_channel(const ChannelSpec& ch) {
    if (!(ch.psi > 0.0) || !std::isfinite(ch.psi)) throw InvalidParams("channel psi must be positive and finite");
    if (ch.q < 2) throw InvalidParams("channel needs q >= 2");
}

}  // namespace

LimitProcessSpec LimitProcessSpec::from_atoms(unsigned q, std::vector<double> psi_atoms) {
    LimitProcessSpec s;
    s.q = q;
    numeric::CompensatedSum sq;
    for (double p : psi_atoms) sq.add(p * p);
    s.background_coeff = std::clamp(1.0 - sq.value(), 0.0, 1.0);
    s.psi_atoms = std::move(psi_atoms);
    return s;
}

void LimitProcessSpec::validate() const {
    if (q < 2) throw InvalidParams("limit process needs q >= 2");
    if (!(background_coeff >= 0.0 && background_coeff <= 1.0)) throw InvalidParams("background_coeff must be in [0, 1]");
    numeric::CompensatedSum sq;
    for (double p : psi_atoms) {
        if (!(p > 0.0) || !std::isfinite(p)) throw InvalidParams("atoms must be positive and finite");
        sq.add(p * p);
    }
    if (sq.value() > 1.0 + 1e-10) throw InvalidParams("sum of squared atoms exceeds 1");
    if (background_coeff == 0.0 && psi_atoms.empty()) throw InvalidSpec("limit process has no arrivals");
}

ArrivalSample sample_inhomog_quadratic(double rate_coeff, std::size_t count, RandomSource& rng) {
    if (!(rate_coeff > 0.0)) throw InvalidArgument("rate_coeff must be positive");
    BackgroundStream s(rate_coeff);
    ArrivalSample out;
    out.times.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.times.push_back(s.next(rng));
    return out;
}

ArrivalSample sample_inhomog_quadratic_until(double rate_coeff, double horizon, RandomSource& rng) {
    if (!(rate_coeff > 0.0)) throw InvalidArgument("rate_coeff must be positive");
    BackgroundStream s(rate_coeff);
    ArrivalSample out;
    for (double t = s.next(rng); t <= horizon; t = s.next(rng)) out.times.push_back(t);
    return out;
}

ArrivalSample sample_channel_retained(const ChannelSpec& ch, double horizon, RandomSource& rng) {
    check_channel(ch);
    if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
    ChannelStream s(ch);
    ArrivalSample out;
    for (double t = s.next(rng); t <= horizon; t = s.next(rng)) out.times.push_back(t);
    return out;
}

RealBatch sample_limit_process(const LimitProcessSpec& spec, unsigned m, std::uint64_t trials, const SimOptions& opt) {
    spec.validate();
    if (m == 0) throw InvalidArgument("sample_limit_process: m must be >= 1");
    if (trials == 0) throw InvalidArgument("trials must be >= 1");
    const double bg = spec.background_coeff * (1.0 - 1.0 / spec.q);

    RealBatch batch;
    batch.width = m;
    batch.seed = opt.seed;
    batch.first_trial = opt.first_trial;
    batch.model_digest = DigestBuilder()
                             .add("limit")
                             .add(std::uint64_t{spec.q})
                             .add(spec.background_coeff)
                             .add(spec.psi_atoms)
                             .add(std::uint64_t{m})
                             .value();
    batch.times.assign(trials * m, 0.0);

    for_each_trial(trials, resolve_threads(opt.threads), [&](std::uint64_t i) {
        RandomSource rng = stream_split(opt.seed, opt.first_trial + i);
        // Stream 0 is the background (if any); streams 1.. are the channels.
        std::optional<BackgroundStream> background;
        if (bg > 0.0) background.emplace(bg);
        std::vector<ChannelStream> channels;
        channels.reserve(spec.psi_atoms.size());
        for (double psi : spec.psi_atoms) channels.emplace_back(ChannelSpec{psi, spec.q});

        using Entry = std::pair<double, std::size_t>;
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heads;
        if (background) heads.emplace(background->next(rng), 0);
        for (std::size_t c = 0; c < channels.size(); ++c) heads.emplace(channels[c].next(rng), c + 1);

        double* out = &batch.times[i * m];
        for (unsigned k = 0; k < m; ++k) {
            const auto [t, src] = heads.top();
            heads.pop();
            out[k] = t;
            heads.emplace(src == 0 ? background->next(rng) : channels[src - 1].next(rng), src);
        }
    });
    return batch;
}

RealBatch sim_embedded_continuous(const UrnModelSpec& spec, std::uint64_t trials, const SimOptions& opt) {
    if (trials == 0) throw InvalidArgument("trials must be >= 1");
    if (spec.q() < 2) throw InvalidArgument("sim_embedded_continuous: need at least two colours");

    // Clock rates of the urns that can hold two colours; other urns never collide.
    std::vector<double> rates;
    std::vector<std::size_t> offsets{0};
    for (std::size_t u = 0; u < spec.urns(); ++u) {
        std::size_t live = 0;
        for (unsigned a = 0; a < spec.q(); ++a)
            if (spec.row(a)[u] > 0.0) ++live;
        if (live < 2) continue;
        for (unsigned a = 0; a < spec.q(); ++a) {
            const double rate = spec.mix()[a] * spec.row(a)[u];
            if (rate > 0.0) rates.push_back(rate);
        }
        offsets.push_back(rates.size());
    }
    if (offsets.size() == 1)
        throw RunawayTrial("no urn is shared by two colours; the model can never collide", opt.first_trial);

    RealBatch batch;
    batch.seed = opt.seed;
    batch.first_trial = opt.first_trial;
    batch.model_digest = model_digest(spec, "embedded");
    batch.times.assign(trials, 0.0);

    for_each_trial(trials, resolve_threads(opt.threads), [&](std::uint64_t i) {
        RandomSource rng = stream_split(opt.seed, opt.first_trial + i);
        double tau = std::numeric_limits<double>::infinity();
        for (std::size_t u = 0; u + 1 < offsets.size(); ++u) {
            double first = std::numeric_limits<double>::infinity();
            double second = first;
            for (std::size_t j = offsets[u]; j < offsets[u + 1]; ++j) {
                const double e = rng.exponential() / rates[j];
                if (e < first) {
                    second = first;
                    first = e;
                } else if (e < second) {
                    second = e;
                }
            }
            tau = std::min(tau, second);
        }
        batch.times[i] = tau;
    });
    return batch;
}

}  // namespace collide
