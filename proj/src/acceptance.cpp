#include "collide/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>

#include "collide/dist_core.hpp"
#include "collide/dlp_models.hpp"
#include "collide/errors.hpp"
#include "collide/graph_color.hpp"
#include "collide/limit_laws.hpp"
#include "collide/parallel.hpp"
#include "collide/poisson_embed.hpp"
#include "collide/stats_gof.hpp"

namespace collide::acceptance {

namespace {

constexpr double kDelta = 1e-3;

struct Context {
    std::uint64_t seed;
    unsigned threads;

    SimOptions sim(std::uint64_t sub) const {
        SimOptions o;
        o.seed = mix64(seed + sub);
        o.threads = threads;
        return o;
    }
};

Check ks_check(std::string name, const KsReport& r, nlohmann::json extra = nlohmann::json::object()) {
    Check c{std::move(name), r.pass, to_json(r)};
    c.detail.update(extra);
    return c;
}

Check tolerance_check(std::string name, double value, double target, double tolerance, bool relative) {
    const double error = relative ? std::abs(value - target) / std::abs(target) : std::abs(value - target);
    return {std::move(name), error <= tolerance,
            {{"value", value}, {"target", target}, {"error", error}, {"tolerance", tolerance},
             {"relative", relative}}};
}

SurvivalFn qcolor_law(unsigned q, std::vector<double> psi) {
    LimitParams p;
    p.q = q;
    p.psi = std::move(psi);
    p.validate();
    return [p](double r) { return survival_qcolor(p, r); };
}

UrnModelSpec two_colour(const RankedDistribution& d) { return UrnModelSpec::identical(ColorMix::uniform(2), d); }

// 1. Uniform urns, two colours: T / sqrt(n) against exp(-r^2/4).
std::vector<Check> uniform_two_colour(const Context& ctx) {
    const std::size_t n = 10000, trials = 50000;
    const auto b = sim_first_collision(two_colour(make_uniform(n)), trials, ctx.sim(0));
    return {ks_check("ks_T_over_sqrt_n_vs_rayleigh",
                     ks_against(b.scaled(1 / std::sqrt(double(n))), qcolor_law(2, {}), kDelta, 0.012),
                     {{"urns", n}, {"trials", trials}})};
}

// 2. Birthday numbers for 365 urns.
std::vector<Check> birthday(const Context& ctx) {
    const std::size_t n = 365, trials = 1000000;
    const auto d = make_uniform(n);
    const double oracle = moment([&](double t) { return survival_prelimit_exact(d, 2, t); }, 1);
    const auto m = moments_of(sim_first_collision(two_colour(d), trials, ctx.sim(0)).scaled(1.0), 1);
    auto total = tolerance_check("mean_total_draws_vs_exact_oracle", m.mean, oracle, 0.01, true);
    total.detail["standard_error"] = m.mean_se;
    auto half = tolerance_check("half_count_before_collision_vs_16.93", (m.mean - 1.0) / 2.0, 16.93, 0.01, true);
    return {total, half};
}

// 3. Atom of size 1/sqrt(n).
std::vector<Check> sqrt_atom(const Context& ctx) {
    const std::size_t n = 50000, trials = 50000;
    const auto d = make_sqrt_atom(n);
    const auto b = sim_first_collision(two_colour(d), trials, ctx.sim(0));
    return {ks_check("ks_sT_vs_half_atom_law",
                     ks_against(b.scaled(scaling_of(d).s_n), qcolor_law(2, {1 / std::numbers::sqrt2}), kDelta, 0.015),
                     {{"n", n}, {"trials", trials}})};
}

// 4. Atom of size 1/ln(n).
std::vector<Check> log_atom(const Context& ctx) {
    const std::size_t n = 1000000, trials = 50000;
    const auto d = make_log_atom(n);
    const auto b = sim_first_collision(two_colour(d), trials, ctx.sim(0));
    return {ks_check("ks_sT_vs_unit_atom_law", ks_against(b.scaled(scaling_of(d).s_n), qcolor_law(2, {1.0}), kDelta, 0.03),
                     {{"n", n}, {"trials", trials}})};
}

// 5. Second collision against the second arrival of the quadratic-rate process.
std::vector<Check> joint_collisions(const Context& ctx) {
    const std::size_t n = 10000, trials = 50000;
    const unsigned q = 2;
    // Arrivals at sqrt(2 G_k / c) with c = 1 - 1/q; P(T_2 > r) = e^{-x}(1 + x), x = c r^2 / 2.
    const double c = 1.0 - 1.0 / q;
    const SurvivalFn second = [c](double r) {
        const double x = c * r * r / 2;
        return std::exp(-x) * (1 + x);
    };
    const auto b = sim_joint_collisions(two_colour(make_uniform(n)), 2, trials, ctx.sim(0));
    const auto lp = sample_limit_process(LimitProcessSpec::from_atoms(q, {}), 2, trials, ctx.sim(1));
    return {ks_check("ks_T2_over_sqrt_n_vs_chi4_law", ks_against(b.scaled(1 / std::sqrt(double(n)), 1), second, kDelta, 0.015),
                     {{"n", n}, {"trials", trials}}),
            ks_check("ks_limit_process_second_arrival_vs_chi4_law", ks_against(lp.scaled(1.0, 1), second, kDelta, 0.015),
                     {{"trials", trials}})};
}

// 6. Two-fold collisions on 400 urns; finite-n atoms psi_i = p_i / s_2m.
std::vector<Check> mfold(const Context& ctx) {
    const std::size_t n = 400, trials = 50000;
    const unsigned q = 2, m = 2;
    const auto d = make_uniform(n);
    const auto sc = mfold_scaling_of(d, m);
    LimitParams p;
    p.q = q;
    p.m = m;
    p.psi = sc.psi_2m;
    p.validate();
    const auto b = sim_mfold_collision(d, q, m, trials, ctx.sim(0));
    auto ks = ks_check("ks_s2mT_vs_mfold_law", ks_against(b.scaled(sc.s_2m), [&](double r) { return survival_mfold(p, r); }, kDelta, 0.03),
                       {{"n", n}, {"trials", trials}, {"m", m}});

    LimitParams id;
    id.q = 3;
    id.psi = {0.6, 0.3, 0.1};
    double gap = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double r = 0.1 * i;
        gap = std::max(gap, std::abs(survival_mfold(id, r) - survival_qcolor(id, r)));
    }
    return {ks, {"mfold_m1_equals_qcolor_on_100_points", gap <= 1e-12, {{"max_abs_diff", gap}, {"tolerance", 1e-12}}}};
}

// 7. Skewed colour mix, and a colour whose row has a dominant atom.
std::vector<Check> general_law(const Context& ctx) {
    const std::size_t n = 10000, trials = 50000;
    const auto skew = UrnModelSpec::identical(ColorMix({0.8, 0.2}), make_uniform(n));
    const auto b = sim_first_collision(skew, trials, ctx.sim(0));
    const double root_n = std::sqrt(double(n));
    auto first = ks_check("ks_skewed_mix_vs_exp_4r2_over_25",
                          ks_against(b.scaled(1 / root_n), [](double r) { return std::exp(-4.0 / 25.0 * r * r); }, kDelta, 0.012),
                          {{"n", n}, {"trials", trials}});

    const auto atom = make_log_atom(n);
    std::vector<double> flat(atom.size(), 0.0);
    std::fill(flat.begin() + 1, flat.end(), 1.0 / double(n));
    const UrnModelSpec degenerate(ColorMix::uniform(2), {std::vector<double>(atom.masses().begin(), atom.masses().end()), flat});
    const auto g = sim_first_collision(degenerate, trials, ctx.sim(1));
    auto second = ks_check("ks_degenerate_scaling_vs_exp_r2_over_4",
                           ks_against(g.scaled(1 / root_n), [](double r) { return std::exp(-r * r / 4); }, kDelta, 0.03),
                           {{"n", n}, {"trials", trials}});
    return {first, second};
}

// 8. DLP constants, dominance, and instance-level simulations.
std::vector<Check> dlp(const Context& ctx) {
    const double root_pi = std::sqrt(std::numbers::pi);
    std::vector<Check> out;
    out.push_back(tolerance_check("gs_averaged_mean_constant", averaged_mean_constant(DlpVariant::GS),
                                  (4 - 2 * std::numbers::sqrt2) * root_pi, 1e-4, false));
    out.push_back(tolerance_check("ags_averaged_mean_constant", averaged_mean_constant(DlpVariant::AGS),
                                  (5 * std::numbers::sqrt2 / 4 - 1) * root_pi, 1e-4, false));
    double worst = -1.0;
    for (int i = 0; i <= 600; ++i) {
        const double r = 0.01 * i;
        worst = std::max(worst, averaged_hazard(DlpVariant::AGS, r) - averaged_hazard(DlpVariant::GS, r));
    }
    out.push_back({"ags_dominates_gs_on_601_points", worst <= 0.0, {{"max_ags_minus_gs", worst}}});

    const std::uint64_t n = 10000;
    const std::size_t trials = 50000;
    std::uint64_t sub = 0;
    for (DlpVariant v : {DlpVariant::GS, DlpVariant::AGS}) {
        for (double x : {0.0, 0.2, 0.45}) {
            const DlpInstance inst{n, x, v};
            const auto b = sim_dlp_runtime(inst, trials, ctx.sim(sub++));
            out.push_back(ks_check("ks_" + to_string(v) + "_x" + std::to_string(x).substr(0, 4),
                                   ks_against(b.scaled(1 / std::sqrt(double(n))), [&](double r) { return hazard(v, x, r); }, kDelta, 0.015),
                                   {{"n", n}, {"x", x}, {"trials", trials}}));
        }
    }
    return out;
}

// 9. Preferential attachment with 1000 colours.
std::vector<Check> preferential_attachment(const Context& ctx) {
    PaConfig cfg;
    cfg.m = 2;
    cfg.palette = make_uniform(1000);
    const std::size_t trials = 10000;
    const auto b = sim_pa_collision(cfg, trials, ctx.sim(0));
    const auto ks = ks_against(b.scaled(1.0 / 1000), [](double r) { return std::exp(-2 * r); }, kDelta, 0.03);
    const double censor = static_cast<double>(b.censored_count()) / trials;
    return {ks_check("ks_T_over_1000_vs_exp2", ks, {{"trials", trials}, {"vertex_cap", cfg.vertex_cap()}}),
            {"censor_rate_below_0.1pct", censor < 1e-3, {{"censor_rate", censor}}}};
}

// 10. Runs of two equal colours on a path; exact expectation formula.
std::vector<Check> path(const Context& ctx) {
    const std::size_t n = 10000, trials = 50000;
    const PathConfig cfg{std::vector<double>(n, 1.0 / n), 2};
    double sum_sq = 0.0;
    for (double p : cfg.probs) sum_sq += p * p;
    const auto b = sim_path_run(cfg, trials, ctx.sim(0));
    std::vector<Check> out{ks_check("ks_T_sum_p2_vs_exp1",
                                    ks_against(b.scaled(sum_sq), [](double r) { return std::exp(-r); }, kDelta, 0.015),
                                    {{"colours", n}, {"trials", trials}})};

    RandomSource rng(mix64(ctx.seed + 99));
    double worst = 0.0;
    nlohmann::json worst_cfg;
    for (int i = 0; i < 50; ++i) {
        const unsigned c = 1 + static_cast<unsigned>(rng.below(5));
        const unsigned m = 2 + static_cast<unsigned>(rng.below(5));
        std::vector<double> p(c);
        double total = 0.0;
        for (auto& x : p) total += (x = 0.05 + rng.uniform01());
        for (auto& x : p) x /= total;
        double rest = 1.0;
        for (unsigned a = 1; a < c; ++a) rest -= p[a];
        p[0] = rest;
        const PathConfig random_cfg{p, m};
        const double gap = std::abs(path_expectation_formula(random_cfg) - path_expectation_oracle(random_cfg));
        if (gap > worst) {
            worst = gap;
            worst_cfg = {{"probs", p},
                         {"m", m},
                         {"formula", path_expectation_formula(random_cfg)},
                         {"oracle", path_expectation_oracle(random_cfg)}};
        }
    }
    out.push_back({"formula_equals_oracle_on_50_random_configs", worst <= 1e-9,
                   {{"max_abs_diff", worst}, {"tolerance", 1e-9}, {"worst", worst_cfg}}});

    const PathConfig coin{{0.5, 0.5}, 2};
    const double f = path_expectation_formula(coin);
    const double o = path_expectation_oracle(coin);
    out.push_back({"fair_coin_m2_equals_3", f == 3.0 && std::abs(o - 3.0) <= 1e-12, {{"formula", f}, {"oracle", o}}});
    return out;
}

// 11. Discrete simulation, continuous embedding and exact survival agree.
std::vector<Check> oracle_triangle(const Context& ctx) {
    const std::size_t n = 100, trials = 100000;
    const auto d = make_uniform(n);
    const auto spec = two_colour(d);
    const auto discrete = sim_first_collision(spec, trials, ctx.sim(0)).scaled(1.0);
    const auto continuous = sim_embedded_continuous(spec, trials, ctx.sim(1)).scaled(1.0);
    const SurvivalFn exact = [&](double t) { return survival_prelimit_exact(d, 2, t); };
    const nlohmann::json info{{"n", n}, {"trials", trials}};
    return {ks_check("ks_discrete_vs_continuous", ks_two_sample(discrete, continuous, kDelta, 0.02), info),
            ks_check("ks_continuous_vs_exact", ks_against(continuous, exact, kDelta, 0.02), info),
            ks_check("ks_discrete_vs_exact", ks_against(discrete, exact, kDelta, 0.02), info)};
}

using Runner = std::function<std::vector<Check>(const Context&)>;

const std::vector<Runner>& runners() {
    static const std::vector<Runner> r{uniform_two_colour, birthday, sqrt_atom, log_atom, joint_collisions,
                                       mfold, general_law, dlp, preferential_attachment, path, oracle_triangle};
    return r;
}

constexpr int kDeterminismId = 12;

nlohmann::json results_json(const std::vector<CriterionResult>& results) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : results) {
        nlohmann::json checks = nlohmann::json::array();
        for (const auto& ch : c.checks) {
            nlohmann::json j = ch.detail;
            j["name"] = ch.name;
            j["pass"] = ch.pass;
            checks.push_back(std::move(j));
        }
        arr.push_back({{"id", c.id}, {"slug", c.slug}, {"pass", c.pass()}, {"checks", std::move(checks)}});
    }
    return arr;
}

CriterionResult run_plain(int id, const SuiteOptions& opt) {
    const Context ctx{criterion_seed(opt.seed, id), opt.threads};
    CriterionResult r;
    r.id = id;
    r.slug = criteria()[static_cast<std::size_t>(id - 1)].slug;
    r.checks = runners()[static_cast<std::size_t>(id - 1)](ctx);
    return r;
}

std::vector<CriterionResult> run_plain_all(const SuiteOptions& opt) {
    std::vector<CriterionResult> out;
    for (int id = 1; id < kDeterminismId; ++id) out.push_back(run_plain(id, opt));
    return out;
}

CriterionResult determinism(const SuiteOptions& opt, const std::vector<CriterionResult>* baseline) {
    const unsigned first_threads = resolve_threads(opt.threads);
    const unsigned second_threads = first_threads == 1 ? 3 : 1;
    SuiteOptions a = opt;
    a.threads = first_threads;
    SuiteOptions b = opt;
    b.threads = second_threads;
    const std::string first = results_json(baseline ? *baseline : run_plain_all(a)).dump();
    const std::string second = results_json(run_plain_all(b)).dump();
    DigestBuilder h1, h2;
    h1.add(first);
    h2.add(second);
    CriterionResult r;
    r.id = kDeterminismId;
    r.slug = criteria().back().slug;
    r.checks.push_back({"report_bytes_identical_across_thread_counts", first == second,
                        {{"bytes", first.size()}, {"digest_first", h1.value()}, {"digest_second", h2.value()}}});
    return r;
}

}  // namespace

bool CriterionResult::pass() const noexcept {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

bool SuiteReport::pass() const noexcept {
    return std::all_of(results.begin(), results.end(), [](const CriterionResult& c) { return c.pass(); });
}

nlohmann::json SuiteReport::to_json() const {
    return {{"seed", seed}, {"pass", pass()}, {"criteria", results_json(results)}};
}

const std::vector<CriterionInfo>& criteria() {
    static const std::vector<CriterionInfo> c{
        {1, "uniform-two-colour", "uniform urns, q=2: T/sqrt(n) is Rayleigh"},
        {2, "birthday", "365 urns: mean draws and half count"},
        {3, "sqrt-atom", "atom 1/sqrt(n): mixed Gaussian-atom law"},
        {4, "log-atom", "atom 1/ln(n): pure atom law"},
        {5, "joint-collisions", "second collision: chi law with 4 degrees of freedom"},
        {6, "mfold", "two-fold collisions on 400 urns"},
        {7, "general-law", "skewed colour mix and degenerate scaling"},
        {8, "dlp", "GS/AGS constants, dominance and instance simulations"},
        {9, "preferential-attachment", "PA(2) with 1000 colours: Exp(2)"},
        {10, "path", "runs on a path: Exp(1) limit and exact expectation"},
        {11, "oracle-triangle", "discrete, continuous and exact laws agree at n=100"},
        {12, "determinism", "identical report bytes across thread counts"},
    };
    return c;
}

int criterion_id(const std::string& name) {
    for (const auto& c : criteria()) {
        if (name == c.slug || name == std::to_string(c.id)) return c.id;
    }
    throw InvalidArgument("unknown acceptance criterion '" + name + "'");
}

std::uint64_t criterion_seed(std::uint64_t seed, int id) { return mix64(mix64(seed) + static_cast<std::uint64_t>(id)); }

CriterionResult run_criterion(int id, const SuiteOptions& opt) {
    if (id < 1 || id > kDeterminismId) throw InvalidArgument("criterion id out of range");
    if (id == kDeterminismId) return determinism(opt, nullptr);
    return run_plain(id, opt);
}

SuiteReport run_suite(const SuiteOptions& opt) {
    std::vector<int> ids = opt.only;
    if (ids.empty())
        for (const auto& c : criteria()) ids.push_back(c.id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    SuiteReport report;
    report.seed = opt.seed;
    using Clock = std::chrono::steady_clock;
    const auto timed = [&](auto&& run) {
        const auto start = Clock::now();
        CriterionResult r = run();
        if (opt.on_result) opt.on_result(r, std::chrono::duration<double>(Clock::now() - start).count());
        return r;
    };
    std::vector<CriterionResult> plain;
    for (int id : ids) {
        if (id == kDeterminismId) continue;
        plain.push_back(timed([&] { return run_plain(id, opt); }));
    }
    report.results = plain;
    if (std::find(ids.begin(), ids.end(), kDeterminismId) != ids.end()) {
        // The baseline can be reused only when it covers every other criterion.
        const bool full = plain.size() == static_cast<std::size_t>(kDeterminismId - 1);
        SuiteOptions first = opt;
        first.threads = resolve_threads(opt.threads);
        report.results.push_back(timed([&] { return determinism(first, full ? &plain : nullptr); }));
    }
    return report;
}

}  // namespace collide::acceptance
