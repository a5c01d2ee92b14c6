#pragma once

#include <cstdint>
#include <vector>

#include "collide/dist_core.hpp"
#include "collide/rng.hpp"
#include "collide/urn_sim.hpp"

namespace collide {

/// One atom channel of the limit process: rate-psi Poisson stream whose
/// events carry i.i.d. uniform colour marks over q colours.
struct ChannelSpec {
    double psi = 0.0;
    unsigned q = 2;
};

struct LimitProcessSpec {
    unsigned q = 2;
    std::vector<double> psi_atoms;
    double background_coeff = 1.0;  ///< 1 - sum psi^2, clamped to [0, 1]

    /// Background coefficient derived from the atoms.
    static LimitProcessSpec from_atoms(unsigned q, std::vector<double> psi_atoms);
    /// Throws InvalidSpec when nothing can arrive, InvalidParams on bad values.
    void validate() const;
};

struct ArrivalSample {
    std::vector<double> times;  ///< strictly increasing
};

/// First `count` arrivals of a Poisson process with intensity rate_coeff * t:
/// the k-th arrival is sqrt(2 G_k / rate_coeff) with G_k a sum of k standard
/// exponentials.
ArrivalSample sample_inhomog_quadratic(double rate_coeff, std::size_t count, RandomSource& rng);
/// All arrivals of the same process up to `horizon`.
ArrivalSample sample_inhomog_quadratic_until(double rate_coeff, double horizon, RandomSource& rng);

/// Events of one channel up to `horizon`, keeping everything from the first
/// event whose colour differs from the first colour seen (that event included).
ArrivalSample sample_channel_retained(const ChannelSpec& ch, double horizon, RandomSource& rng);

/// First m arrivals of the superposition of the background process (intensity
/// background_coeff * (1 - 1/q) * t) and every retained channel. Each stream is
/// generated lazily in time order, so no horizon has to be guessed and nothing
/// is resampled. Width-m batch.
RealBatch sample_limit_process(const LimitProcessSpec& spec, unsigned m, std::uint64_t trials,
                               const SimOptions& opt = {});

/// Continuous-time race: every (urn, colour) pair with positive rate
/// mix[a] * row(a)[i] gets an exponential first-arrival clock; an urn collides
/// at its second-earliest clock and tau is the earliest such epoch over urns.
/// Throws RunawayTrial when no urn is shared by two colours.
RealBatch sim_embedded_continuous(const UrnModelSpec& spec, std::uint64_t trials, const SimOptions& opt = {});

}  // namespace collide
