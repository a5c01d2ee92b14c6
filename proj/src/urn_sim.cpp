#include "collide/urn_sim.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <string>

#include "collide/errors.hpp"
#include "collide/parallel.hpp"
#include "collide/rng.hpp"

namespace collide {

namespace {

std::string fmt_real(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Colour and urn samplers for one model, shared read-only by all workers.
class SpecSampler {
public:
    explicit SpecSampler(const UrnModelSpec& spec) : q_(spec.q()), uniform_mix_(spec.mix().is_uniform()),
                                                     mix_(spec.mix().weights()) {
        rows_.reserve(q_);
        for (unsigned a = 0; a < q_; ++a) rows_.emplace_back(spec.row(a));
    }

    unsigned color(RandomSource& rng) const noexcept {
        return uniform_mix_ ? static_cast<unsigned>(rng.below(q_)) : static_cast<unsigned>(mix_(rng));
    }
    std::size_t urn(unsigned color, RandomSource& rng) const noexcept { return rows_[color](rng); }

private:
    unsigned q_;
    bool uniform_mix_;
    AliasSampler mix_;
    std::vector<AliasSampler> rows_;
};

bool other_color_present(std::span<const std::uint32_t> after, unsigned color) noexcept {
    for (unsigned b = 0; b < after.size(); ++b)
        if (b != color && after[b] > 0) return true;
    return false;
}

[[noreturn]] void runaway(std::uint64_t trial, std::uint64_t cap) {
    throw RunawayTrial("trial " + std::to_string(trial) + " exceeded " + std::to_string(cap) + " draws", trial);
}

void require_collidable(const UrnModelSpec& spec, const SimOptions& opt) {
    if (spec.q() < 2) throw InvalidArgument("collision simulators need at least two colours");
    if (!spec.can_collide())
        throw RunawayTrial("no urn is shared by two colours; the model can never collide", opt.first_trial);
}

TrialBatch make_batch(std::uint64_t trials, unsigned width, const SimOptions& opt, std::uint64_t digest) {
    if (trials == 0) throw InvalidArgument("trials must be >= 1");
    TrialBatch b;
    b.width = width;
    b.seed = opt.seed;
    b.first_trial = opt.first_trial;
    b.model_digest = digest;
    b.times.assign(trials * width, 0);
    return b;
}

// Draws until `m` collisions have been recorded into out[0..m).
void joint_trial(const SpecSampler& s, unsigned q, unsigned m, std::uint64_t trial, const SimOptions& opt,
                 std::uint64_t* out) {
    RandomSource rng = stream_split(opt.seed, trial);
    UrnState state(q);
    unsigned found = 0;
    for (std::uint64_t k = 1; k <= opt.draw_cap; ++k) {
        const unsigned a = s.color(rng);
        const auto counts = state.add(s.urn(a, rng), a);
        if (other_color_present(counts, a)) {
            out[found++] = k;
            if (found == m) return;
        }
    }
    runaway(trial, opt.draw_cap);
}

}  // namespace

std::vector<double> TrialBatch::scaled(double scale, unsigned k) const {
    std::vector<double> out;
    out.reserve(trials());
    for (std::size_t t = 0; t < trials(); ++t) {
        if (!censored.empty() && censored[t]) continue;
        out.push_back(static_cast<double>(at(t, k)) * scale);
    }
    return out;
}

std::size_t TrialBatch::censored_count() const noexcept {
    return static_cast<std::size_t>(std::count(censored.begin(), censored.end(), std::uint8_t{1}));
}

std::vector<double> RealBatch::scaled(double scale, unsigned k) const {
    std::vector<double> out(trials());
    for (std::size_t t = 0; t < trials(); ++t) out[t] = at(t, k) * scale;
    return out;
}

UrnState::UrnState(unsigned colors, std::size_t expected_urns) : colors_(colors) {
    if (colors == 0) throw InvalidArgument("UrnState: need at least one colour");
    const std::size_t cap = std::bit_ceil(std::max<std::size_t>(16, expected_urns * 2));
    keys_.assign(cap, kEmpty);
    counts_.assign(cap * colors_, 0);
}

std::size_t UrnState::slot_of(std::uint64_t urn) const noexcept {
    const std::size_t mask = keys_.size() - 1;
    std::size_t i = static_cast<std::size_t>(mix64(urn)) & mask;
    while (keys_[i] != kEmpty && keys_[i] != urn) i = (i + 1) & mask;
    return i;
}

void UrnState::grow() {
    std::vector<std::uint64_t> old_keys(keys_.size() * 2, kEmpty);
    std::vector<std::uint32_t> old_counts(old_keys.size() * colors_, 0);
    old_keys.swap(keys_);
    old_counts.swap(counts_);
    for (std::size_t j = 0; j < old_keys.size(); ++j) {
        if (old_keys[j] == kEmpty) continue;
        const std::size_t i = slot_of(old_keys[j]);
        keys_[i] = old_keys[j];
        std::memcpy(&counts_[i * colors_], &old_counts[j * colors_], colors_ * sizeof(std::uint32_t));
    }
}

std::span<const std::uint32_t> UrnState::add(std::uint64_t urn, unsigned color) {
    if (urn == kEmpty) throw InvalidArgument("UrnState: reserved urn index");
    if (color >= colors_) throw InvalidArgument("UrnState: colour out of range");
    std::size_t i = slot_of(urn);
    if (keys_[i] == kEmpty) {
        if (2 * (size_ + 1) > keys_.size()) {
            grow();
            i = slot_of(urn);
        }
        keys_[i] = urn;
        ++size_;
    }
    ++counts_[i * colors_ + color];
    return {&counts_[i * colors_], colors_};
}

std::span<const std::uint32_t> UrnState::counts(std::uint64_t urn) const {
    const std::size_t i = slot_of(urn);
    if (keys_[i] == kEmpty) return {};
    return {&counts_[i * colors_], colors_};
}

void UrnState::clear() noexcept {
    std::fill(keys_.begin(), keys_.end(), kEmpty);
    std::fill(counts_.begin(), counts_.end(), 0);
    size_ = 0;
}

TrialBatch sim_repeat_time(const RankedDistribution& d, std::uint64_t trials, const SimOptions& opt) {
    auto batch = make_batch(trials, 1, opt, model_digest(d, "repeat"));
    const AliasSampler urn(d.masses());
    for_each_trial(trials, resolve_threads(opt.threads), [&](std::uint64_t i) {
        const std::uint64_t trial = opt.first_trial + i;
        RandomSource rng = stream_split(opt.seed, trial);
        UrnState state(1);
        for (std::uint64_t k = 1; k <= opt.draw_cap; ++k) {
            if (state.add(urn(rng), 0)[0] == 2) {
                batch.times[i] = k;
                return;
            }
        }
        runaway(trial, opt.draw_cap);
    });
    return batch;
}

TrialBatch sim_first_collision(const UrnModelSpec& spec, std::uint64_t trials, const SimOptions& opt) {
    auto b = sim_joint_collisions(spec, 1, trials, opt);
    b.model_digest = model_digest(spec, "first");
    return b;
}

TrialBatch sim_joint_collisions(const UrnModelSpec& spec, unsigned m, std::uint64_t trials, const SimOptions& opt) {
    if (m == 0) throw InvalidArgument("sim_joint_collisions: m must be >= 1");
    require_collidable(spec, opt);
    auto batch = make_batch(trials, m, opt, DigestBuilder().add(model_digest(spec, "joint")).add(std::uint64_t{m}).value());
    const SpecSampler sampler(spec);
    for_each_trial(trials, resolve_threads(opt.threads), [&](std::uint64_t i) {
        joint_trial(sampler, spec.q(), m, opt.first_trial + i, opt, &batch.times[i * m]);
    });
    return batch;
}

TrialBatch sim_mfold_collision(const RankedDistribution& d, unsigned q, unsigned m, std::uint64_t trials,
                               const SimOptions& opt) {
    if (q < 2) throw InvalidArgument("sim_mfold_collision: q must be >= 2");
    if (m == 0) throw InvalidArgument("sim_mfold_collision: m must be >= 1");
    auto batch = make_batch(trials, 1, opt,
                            DigestBuilder().add(model_digest(d, "mfold")).add(std::uint64_t{q}).add(std::uint64_t{m}).value());
    const AliasSampler urn(d.masses());
    for_each_trial(trials, resolve_threads(opt.threads), [&](std::uint64_t i) {
        const std::uint64_t trial = opt.first_trial + i;
        RandomSource rng = stream_split(opt.seed, trial);
        UrnState state(q);
        for (std::uint64_t k = 1; k <= opt.draw_cap; ++k) {
            const auto a = static_cast<unsigned>(rng.below(q));
            const auto counts = state.add(urn(rng), a);
            if (counts[a] < m) continue;
            for (unsigned b = 0; b < q; ++b) {
                if (b != a && counts[b] >= m) {
                    batch.times[i] = k;
                    return;
                }
            }
        }
        runaway(trial, opt.draw_cap);
    });
    return batch;
}

DigestBuilder& DigestBuilder::add(std::string_view tag) {
    for (unsigned char c : tag) {
        h_ ^= c;
        h_ *= 0x100000001b3ULL;
    }
    return add(std::uint64_t{tag.size()});
}

DigestBuilder& DigestBuilder::add(std::uint64_t v) {
    for (int byte = 0; byte < 8; ++byte) {
        h_ ^= (v >> (8 * byte)) & 0xffU;
        h_ *= 0x100000001b3ULL;
    }
    return *this;
}

DigestBuilder& DigestBuilder::add(double v) { return add(std::bit_cast<std::uint64_t>(v)); }

DigestBuilder& DigestBuilder::add(std::span<const double> vs) {
    add(std::uint64_t{vs.size()});
    for (double v : vs) add(v);
    return *this;
}

std::uint64_t model_digest(const RankedDistribution& d, std::string_view tag) {
    return DigestBuilder().add(tag).add(d.masses()).value();
}

std::uint64_t model_digest(const UrnModelSpec& spec, std::string_view tag) {
    DigestBuilder h;
    h.add(tag).add(spec.mix().weights());
    for (unsigned a = 0; a < spec.q(); ++a) h.add(spec.row(a));
    return h.value();
}

void write_csv(std::ostream& out, const TrialBatch& b, bool header) {
    if (header) out << "trial,k,time\n";
    for (std::size_t t = 0; t < b.trials(); ++t) {
        const bool cens = !b.censored.empty() && b.censored[t];
        for (unsigned k = 0; k < b.width; ++k) {
            out << b.first_trial + t << ',' << k + 1 << ',';
            if (cens)
                out << "NA";
            else
                out << b.at(t, k);
            out << '\n';
        }
    }
}

void write_csv(std::ostream& out, const RealBatch& b, bool header) {
    if (header) out << "trial,k,time\n";
    for (std::size_t t = 0; t < b.trials(); ++t)
        for (unsigned k = 0; k < b.width; ++k)
            out << b.first_trial + t << ',' << k + 1 << ',' << fmt_real(b.at(t, k)) << '\n';
}

nlohmann::json to_json(const TrialBatch& b) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t t = 0; t < b.trials(); ++t) {
        if (!b.censored.empty() && b.censored[t]) {
            rows.push_back(nullptr);
            continue;
        }
        rows.push_back(std::vector<std::uint64_t>(b.times.begin() + static_cast<std::ptrdiff_t>(t * b.width),
                                                  b.times.begin() + static_cast<std::ptrdiff_t>((t + 1) * b.width)));
    }
    return {{"seed", b.seed}, {"first_trial", b.first_trial}, {"model_digest", b.model_digest},
            {"width", b.width}, {"censored", b.censored_count()}, {"times", std::move(rows)}};
}

nlohmann::json to_json(const RealBatch& b) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t t = 0; t < b.trials(); ++t)
        rows.push_back(std::vector<double>(b.times.begin() + static_cast<std::ptrdiff_t>(t * b.width),
                                           b.times.begin() + static_cast<std::ptrdiff_t>((t + 1) * b.width)));
    return {{"seed", b.seed}, {"first_trial", b.first_trial}, {"model_digest", b.model_digest},
            {"width", b.width}, {"times", std::move(rows)}};
}

namespace {

template <class Batch>
void stream_impl(std::ostream& out, const std::function<Batch(std::uint64_t, const SimOptions&)>& produce,
                 std::uint64_t trials, const SimOptions& opt, std::uint64_t chunk) {
    if (chunk == 0) throw InvalidArgument("stream_csv: chunk must be >= 1");
    out << "trial,k,time\n";
    for (std::uint64_t done = 0; done < trials;) {
        SimOptions o = opt;
        o.first_trial = opt.first_trial + done;
        const std::uint64_t n = std::min(chunk, trials - done);
        write_csv(out, produce(n, o), false);
        done += n;
    }
}

}  // namespace

void stream_csv(std::ostream& out, const std::function<TrialBatch(std::uint64_t, const SimOptions&)>& produce,
                std::uint64_t trials, const SimOptions& opt, std::uint64_t chunk) {
    stream_impl(out, produce, trials, opt, chunk);
}

void stream_csv(std::ostream& out, const std::function<RealBatch(std::uint64_t, const SimOptions&)>& produce,
                std::uint64_t trials, const SimOptions& opt, std::uint64_t chunk) {
    stream_impl(out, produce, trials, opt, chunk);
}

}  // namespace collide
