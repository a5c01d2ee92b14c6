#include "collide/graph_color.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "collide/errors.hpp"
#include "collide/numeric.hpp"
#include "collide/parallel.hpp"

namespace collide {

namespace {

constexpr std::uint32_t kMaxPaVertices = 0xFFFFFFF0U;

// Appends vertex s's m edges; returns true once one of them joins s to an
// earlier vertex of the same colour.
bool attach(unsigned m, std::uint32_t s, std::vector<std::uint32_t>& endpoints, RandomSource& rng,
            const std::vector<std::uint32_t>* colors,
            std::vector<std::pair<std::uint32_t, std::uint32_t>>* edges) {
    bool mono = false;
    for (unsigned e = 0; e < m; ++e) {
        const std::uint64_t total = endpoints.size();
        const std::uint64_t u = rng.below(total + 1);
        const std::uint32_t v = u < total ? endpoints[u] : s;
        endpoints.push_back(s);
        endpoints.push_back(v);
        if (edges) edges->emplace_back(s, v);
        if (colors && v != s && (*colors)[v - 1] == (*colors)[s - 1]) mono = true;
    }
    return mono;
}

}  // namespace

void PaConfig::validate() const {
    if (m < 2) throw InvalidArgument("PA(m) needs m >= 2");
}

std::uint64_t PaConfig::vertex_cap() const {
    if (max_vertices > 0) return std::min<std::uint64_t>(max_vertices, kMaxPaVertices);
    numeric::CompensatedSum sq;
    for (double p : palette.masses()) sq.add(p * p);
    const double cap = std::ceil(20.0 / (m * sq.value()));
    return std::clamp<std::uint64_t>(static_cast<std::uint64_t>(cap), 2, kMaxPaVertices);
}

Multigraph generate_pa(unsigned m, std::uint64_t vertices, RandomSource& rng) {
    if (m < 1) throw InvalidArgument("generate_pa: m must be >= 1");
    if (vertices < 1 || vertices > kMaxPaVertices) throw InvalidArgument("generate_pa: bad vertex count");
    Multigraph g;
    g.vertices = vertices;
    g.edges.reserve(vertices * m);
    std::vector<std::uint32_t> endpoints;
    endpoints.reserve(2 * m * vertices);
    for (unsigned e = 0; e < m; ++e) {
        endpoints.push_back(1);
        endpoints.push_back(1);
        g.edges.emplace_back(1, 1);
    }
    for (std::uint64_t s = 2; s <= vertices; ++s)
        attach(m, static_cast<std::uint32_t>(s), endpoints, rng, nullptr, &g.edges);
    return g;
}

SimpleGraph simplify(const Multigraph& g) {
    SimpleGraph out;
    out.vertices = g.vertices;
    for (auto [u, v] : g.edges) {
        if (u == v) continue;
        out.edges.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(out.edges.begin(), out.edges.end());
    out.edges.erase(std::unique(out.edges.begin(), out.edges.end()), out.edges.end());
    return out;
}

std::size_t count_monochromatic_edges(const SimpleGraph& g, std::span<const std::uint32_t> colors) {
    if (colors.size() < g.vertices) throw InvalidArgument("count_monochromatic_edges: missing colours");
    std::size_t count = 0;
    for (auto [u, v] : g.edges)
        if (u != v && colors[u - 1] == colors[v - 1]) ++count;
    return count;
}

void write_edge_list(std::ostream& out, const Multigraph& g) {
    for (auto [u, v] : g.edges) out << u << ' ' << v << '\n';
}

TrialBatch sim_pa_collision(const PaConfig& cfg, std::uint64_t trials, const SimOptions& opt) {
    cfg.validate();
    if (trials == 0) throw InvalidArgument("trials must be >= 1");
    const std::uint64_t cap = cfg.vertex_cap();
    const AliasSampler palette(cfg.palette.masses());

    TrialBatch batch;
    batch.seed = opt.seed;
    batch.first_trial = opt.first_trial;
    batch.model_digest = DigestBuilder()
                             .add(model_digest(cfg.palette, "pa"))
                             .add(std::uint64_t{cfg.m})
                             .add(cap)
                             .value();
    batch.times.assign(trials, 0);
    batch.censored.assign(trials, 0);

    for_each_trial(trials, resolve_threads(opt.threads), [&](std::uint64_t i) {
        RandomSource rng = stream_split(opt.seed, opt.first_trial + i);
        std::vector<std::uint32_t> colors{static_cast<std::uint32_t>(palette(rng))};
        std::vector<std::uint32_t> endpoints(2 * cfg.m, 1);
        for (std::uint64_t s = 2; s <= cap; ++s) {
            colors.push_back(static_cast<std::uint32_t>(palette(rng)));
            if (attach(cfg.m, static_cast<std::uint32_t>(s), endpoints, rng, &colors, nullptr)) {
                batch.times[i] = s;
                return;
            }
        }
        batch.censored[i] = 1;
    });
    return batch;
}

void PathConfig::validate() const {
    if (m < 2) throw InvalidArgument("path run length m must be >= 2");
    if (probs.empty()) throw InvalidArgument("path palette is empty");
    numeric::CompensatedSum s;
    for (double p : probs) {
        if (!(p > 0.0) || !std::isfinite(p)) throw InvalidArgument("path probabilities must be positive");
        s.add(p);
    }
    if (std::abs(s.value() - 1.0) > 1e-12) throw InvalidArgument("path probabilities must sum to 1");
}

TrialBatch sim_path_run(const PathConfig& cfg, std::uint64_t trials, const SimOptions& opt) {
    cfg.validate();
    if (trials == 0) throw InvalidArgument("trials must be >= 1");
    const AliasSampler palette(cfg.probs);
    TrialBatch batch;
    batch.seed = opt.seed;
    batch.first_trial = opt.first_trial;
    batch.model_digest = DigestBuilder().add("path").add(std::span<const double>(cfg.probs)).add(std::uint64_t{cfg.m}).value();
    batch.times.assign(trials, 0);

    for_each_trial(trials, resolve_threads(opt.threads), [&](std::uint64_t i) {
        const std::uint64_t trial = opt.first_trial + i;
        RandomSource rng = stream_split(opt.seed, trial);
        std::size_t last = palette(rng);
        unsigned run = 1;
        for (std::uint64_t t = 2; t <= opt.draw_cap; ++t) {
            const std::size_t c = palette(rng);
            run = c == last ? run + 1 : 1;
            last = c;
            if (run == cfg.m) {
                batch.times[i] = t;
                return;
            }
        }
        throw RunawayTrial("path trial " + std::to_string(trial) + " exceeded the draw cap", trial);
    });
    return batch;
}

double path_expectation_formula(const PathConfig& cfg) {
    cfg.validate();
    numeric::CompensatedSum lower, upper;
    for (double p : cfg.probs) {
        lower.add(std::pow(p, cfg.m - 1));
        upper.add(std::pow(p, cfg.m));
    }
    return 1.0 + (cfg.m - 1.0) * lower.value() / upper.value();
}

double path_expectation_oracle(const PathConfig& cfg) {
    cfg.validate();
    const auto c = static_cast<Eigen::Index>(cfg.probs.size());
    if (c > 64 || cfg.m > 32) throw InvalidArgument("path_expectation_oracle: needs c <= 64 and m <= 32");
    const Eigen::Index runs = cfg.m - 1;
    const Eigen::Index dim = c * runs;
    auto idx = [runs](Eigen::Index a, Eigen::Index k) { return a * runs + (k - 1); };

    // E[a,k] - p_a E[a,k+1] - sum_{b != a} p_b E[b,1] = 1, with E[a,m] = 0.
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(dim, dim);
    for (Eigen::Index a = 0; a < c; ++a) {
        for (Eigen::Index k = 1; k <= runs; ++k) {
            const Eigen::Index row = idx(a, k);
            if (k + 1 <= runs) A(row, idx(a, k + 1)) -= cfg.probs[a];
            for (Eigen::Index b = 0; b < c; ++b)
                if (b != a) A(row, idx(b, 1)) -= cfg.probs[b];
        }
    }
    const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(dim);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const Eigen::VectorXd e = lu.solve(rhs);
    const double residual = (A * e - rhs).lpNorm<Eigen::Infinity>();
    const double scale = std::max(1.0, A.lpNorm<Eigen::Infinity>() * e.lpNorm<Eigen::Infinity>());
    if (!e.allFinite() || residual > 1e-12 * scale)
        throw NumericFailure("path_expectation_oracle: linear solve did not converge");

    numeric::CompensatedSum total;
    total.add(1.0);
    for (Eigen::Index a = 0; a < c; ++a) total.add(cfg.probs[a] * e(idx(a, 1)));
    return total.value();
}

}  // namespace collide
