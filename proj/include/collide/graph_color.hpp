#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "collide/dist_core.hpp"
#include "collide/rng.hpp"
#include "collide/urn_sim.hpp"

namespace collide {

struct PaConfig {
    unsigned m = 2;
    RankedDistribution palette{std::vector<double>{1.0}};
    /// 0 picks ceil(20 / (m * sum p^2)), twenty times the limiting mean.
    std::uint64_t max_vertices = 0;

    void validate() const;
    std::uint64_t vertex_cap() const;
};

/// Edge list of a multigraph on vertices 1..vertices; loops appear as (u, u).
struct Multigraph {
    std::uint64_t vertices = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;

    /// Sum of degrees, loops counted twice.
    std::uint64_t total_degree() const noexcept { return 2 * edges.size(); }
};

/// Loop-free graph with each unordered pair at most once, stored as (u < v).
struct SimpleGraph {
    std::uint64_t vertices = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
};

/// Preferential attachment with m edges per step: vertex 1 starts with m
/// loops; the i-th edge of vertex s goes to an existing u with probability
/// d(u) / (M + 1) and to s itself with probability (d(s) + 1) / (M + 1), where
/// d and M are degrees and total degree before that edge.
Multigraph generate_pa(unsigned m, std::uint64_t vertices, RandomSource& rng);

SimpleGraph simplify(const Multigraph& g);

/// Number of edges whose endpoints share a colour; colors[v - 1] is vertex v's.
std::size_t count_monochromatic_edges(const SimpleGraph& g, std::span<const std::uint32_t> colors);

/// "u v" per line.
void write_edge_list(std::ostream& out, const Multigraph& g);

/// First vertex s whose arrival creates a monochromatic non-loop edge, with
/// vertices coloured i.i.d. from the palette. Trials reaching the vertex cap
/// are flagged in `censored`.
TrialBatch sim_pa_collision(const PaConfig& cfg, std::uint64_t trials, const SimOptions& opt = {});

struct PathConfig {
    std::vector<double> probs;  ///< colour probabilities, positive, summing to 1
    unsigned m = 2;             ///< run length

    void validate() const;
};

/// First t with m equal consecutive colours in an i.i.d. stream.
TrialBatch sim_path_run(const PathConfig& cfg, std::uint64_t trials, const SimOptions& opt = {});

/// 1 + (m - 1) * sum p^{m-1} / sum p^m.
double path_expectation_formula(const PathConfig& cfg);

/// Expected absorption time of the chain on (last colour, run length) solved
/// as a dense linear system. Needs c <= 64 and m <= 32.
double path_expectation_oracle(const PathConfig& cfg);

}  // namespace collide
