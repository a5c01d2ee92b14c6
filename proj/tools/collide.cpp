// collide: simulate urn collision models, tabulate limit laws, run the
// acceptance suite. Exit codes: 0 ok, 2 usage, 3 numeric failure, 4 acceptance failure.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "collide/acceptance.hpp"
#include "collide/dist_core.hpp"
#include "collide/dlp_models.hpp"
#include "collide/errors.hpp"
#include "collide/graph_color.hpp"
#include "collide/limit_laws.hpp"
#include "collide/poisson_embed.hpp"
#include "collide/stats_gof.hpp"
#include "collide/urn_sim.hpp"

using namespace collide;

namespace {

enum Exit { kOk = 0, kUsage = 2, kNumeric = 3, kAcceptance = 4 };

struct Common {
    std::uint64_t trials = 10000;
    std::uint64_t seed = kDefaultSeed;
    unsigned threads = 0;
    std::string out;
    std::string format = "csv";

    void add(CLI::App* app, bool with_trials = true) {
        if (with_trials) app->add_option("--trials", trials, "number of trials")->check(CLI::PositiveNumber);
        app->add_option("--seed", seed, "master seed");
        app->add_option("--threads", threads, "worker threads (0: COLLIDE_THREADS or all cores)");
        app->add_option("--out", out, "output path (default stdout)");
        app->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    }

    SimOptions sim() const {
        SimOptions o;
        o.seed = seed;
        o.threads = threads;
        return o;
    }
};

// Exactly one of the ranked-law flags picks the urn (or palette) distribution.
struct DistFlags {
    std::size_t uniform = 0, sqrt_atom = 0, log_atom = 0;
    std::string masses;

    void add(CLI::App* app) {
        auto* g = app->add_option_group("distribution");
        g->add_option("--uniform", uniform, "n equal masses");
        g->add_option("--sqrt-atom", sqrt_atom, "one atom of mass 1/sqrt(n) over n urns");
        g->add_option("--log-atom", log_atom, "one atom of mass 1/ln(n) over n urns");
        g->add_option("--masses", masses, "text file of masses, one per line");
        g->require_option(1);
    }

    RankedDistribution build() const {
        if (uniform) return make_uniform(uniform);
        if (sqrt_atom) return make_sqrt_atom(sqrt_atom);
        if (log_atom) return make_log_atom(log_atom);
        return load_masses_text(masses);
    }
};

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw InvalidArgument("cannot open '" + path + "' for writing");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::vector<double> keep_atoms(std::span<const double> psi, double cutoff) {
    std::vector<double> out;
    for (double p : psi)
        if (p >= cutoff) out.push_back(p);
    return out;
}

// What a simulate subcommand produces: a sampler, the scale that maps draws
// onto the limit variable, and optionally the reference law.
struct Job {
    std::function<TrialBatch(std::uint64_t, const SimOptions&)> discrete;
    std::function<RealBatch(std::uint64_t, const SimOptions&)> real;
    double scale = 1.0;
    unsigned coord = 0;
    std::optional<SurvivalFn> law;
    std::string law_name;
    std::string dataset;
};

struct LawFlags {
    std::string name;
    double atom_cutoff = 0.05;
    std::string trials_out;
    std::string ks_out;
};

int run_job(const Job& job, const Common& c, const LawFlags& lf) {
    Output out(c.out);
    auto& os = out.stream();
    const SimOptions opt = c.sim();

    if (!job.law) {
        if (c.format == "json") {
            const auto j = job.discrete ? to_json(job.discrete(c.trials, opt)) : to_json(job.real(c.trials, opt));
            os << j.dump() << '\n';
        } else if (job.discrete) {
            stream_csv(os, job.discrete, c.trials, opt);
        } else {
            stream_csv(os, job.real, c.trials, opt);
        }
        return kOk;
    }

    std::vector<double> sample;
    nlohmann::json batch_json;
    if (job.discrete) {
        const auto b = job.discrete(c.trials, opt);
        sample = b.scaled(job.scale, job.coord);
        if (!lf.trials_out.empty()) {
            Output t(lf.trials_out);
            write_csv(t.stream(), b);
        }
        if (c.format == "json") batch_json = to_json(b);
    } else {
        const auto b = job.real(c.trials, opt);
        sample = b.scaled(job.scale, job.coord);
        if (!lf.trials_out.empty()) {
            Output t(lf.trials_out);
            write_csv(t.stream(), b);
        }
        if (c.format == "json") batch_json = to_json(b);
    }
    if (sample.size() < 100) throw InvalidArgument("--law needs at least 100 uncensored trials");

    const auto ks = ks_against(sample, *job.law);
    auto ks_json = to_json(ks);
    ks_json["law"] = job.law_name;
    ks_json["scale"] = job.scale;
    const auto hist = freedman_diaconis(sample);

    if (c.format == "json") {
        nlohmann::json j{{"batch", batch_json}, {"ks", ks_json}, {"histogram", {{"edges", hist.edges}, {"counts", hist.counts}}}};
        if (!job.dataset.empty()) j["dataset"] = job.dataset;
        os << j.dump() << '\n';
    } else {
        if (!job.dataset.empty()) os << "# dataset: " << job.dataset << '\n';
        os << "# law: " << job.law_name << ", scale: " << job.scale << '\n';
        write_histogram_csv(os, hist, &*job.law);
    }
    if (!lf.ks_out.empty()) {
        Output k(lf.ks_out);
        k.stream() << ks_json.dump(2) << '\n';
    } else if (c.format == "csv") {
        std::cerr << ks_json.dump() << '\n';
    }
    return kOk;
}

std::vector<double> parse_weights(const std::vector<double>& mix, unsigned q) {
    if (!mix.empty()) return mix;
    return std::vector<double>(q, 1.0 / q);
}

int cmd_law(const std::string& name, const nlohmann::json& params, double r_max, std::size_t points, const Common& c) {
    const auto grid = linear_grid(0.0, r_max, points);
    Output out(c.out);
    auto& os = out.stream();

    if (name == "gs" || name == "ags") {
        const auto v = parse_variant(name);
        const auto xs = params.value("x", std::vector<double>{0.0});
        std::vector<HazardCurve> curves;
        for (double x : xs) curves.push_back(hazard_curve(v, x, grid));
        if (c.format == "json") {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& h : curves) {
                std::vector<double> vals(h.curve.values().begin(), h.curve.values().end());
                arr.push_back({{"variant", name}, {"x", h.x}, {"r", grid}, {"survival", vals}});
            }
            os << arr.dump() << '\n';
        } else {
            os << "# dataset: fig3\n";
            write_hazard_csv(os, curves);
        }
        return kOk;
    }

    SurvivalFn law;
    if (name == "gs-avg" || name == "ags-avg") {
        const auto v = parse_variant(name.substr(0, name.size() - 4));
        law = [v](double r) { return averaged_hazard(v, r); };
    } else {
        const LimitParams p = limit_params_from_json(params);
        if (name == "qcolor") law = [p](double r) { return survival_qcolor(p, r); };
        else if (name == "general") law = [p](double r) { return survival_general(p, r); };
        else if (name == "mfold") law = [p](double r) { return survival_mfold(p, r); };
        else law = [p](double r) { return survival_repeat_cp(p, r); };
    }
    const auto curve = tabulate(law, grid);
    const auto vals = curve.values();
    if (std::abs(vals[0] - 1.0) > 1e-12) throw NumericFailure(name + ": survival at 0 is not 1");
    for (std::size_t i = 1; i < vals.size(); ++i)
        if (vals[i] > vals[i - 1] + 1e-12) throw NumericFailure(name + ": survival increases on the grid");
    if (c.format == "json")
        os << nlohmann::json{{"law", name}, {"params", params}, {"r", grid}, {"survival", std::vector<double>(vals.begin(), vals.end())}}.dump() << '\n';
    else
        curve.write_csv(os);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Collision times in urn models: simulation, limit laws, acceptance suite"};
    app.require_subcommand(1);
    Common common;

    // simulate
    auto* sim = app.add_subcommand("simulate", "run a simulator");
    sim->require_subcommand(1);
    DistFlags dist;
    LawFlags lf;
    unsigned q = 2, m = 2;
    std::vector<double> mix, atoms;
    std::uint64_t max_vertices = 0, dlp_n = 10000;
    double dlp_x = 0.0;
    std::string variant = "gs";
    Job job;

    auto* urn = sim->add_subcommand("urn", "first time two balls of different colours share an urn");
    auto* repeat = sim->add_subcommand("repeat", "first repeated urn in one i.i.d. stream");
    auto* joint = sim->add_subcommand("joint", "first m collision times");
    auto* mfold = sim->add_subcommand("mfold", "first urn holding m balls of every colour");
    auto* embedded = sim->add_subcommand("embedded", "continuous-time embedded collision time");
    auto* limit = sim->add_subcommand("limit", "first m arrivals of the limiting point process");
    auto* pa = sim->add_subcommand("pa", "preferential attachment colouring collision");
    auto* path = sim->add_subcommand("path", "first run of m equal colours on a path");
    auto* dlp = sim->add_subcommand("dlp", "GS or AGS kangaroo runtime model");

    for (auto* s : {urn, repeat, joint, mfold, embedded, pa, path}) dist.add(s);
    for (auto* s : {urn, joint, mfold, embedded, limit}) s->add_option("--q", q, "number of colours")->check(CLI::Range(1u, 1u << 20));
    for (auto* s : {urn, embedded}) s->add_option("--mix", mix, "colour probabilities")->delimiter(',');
    for (auto* s : {joint, mfold, limit, pa, path}) s->add_option("--m", m, "collision count / multiplicity / run length")->check(CLI::PositiveNumber);
    limit->add_option("--atoms", atoms, "scaled atoms psi")->delimiter(',');
    pa->add_option("--max-vertices", max_vertices, "vertex cap (0: twenty limiting means)");
    dlp->add_option("--n", dlp_n, "group order scale n");
    dlp->add_option("--x", dlp_x, "normalised offset of the discrete log");
    dlp->add_option("--variant", variant)->check(CLI::IsMember({"gs", "ags", "GS", "AGS"}));
    urn->add_option("--law", lf.name)->check(CLI::IsMember({"qcolor", "general"}));
    repeat->add_option("--law", lf.name)->check(CLI::IsMember({"cp"}));
    mfold->add_option("--law", lf.name)->check(CLI::IsMember({"mfold"}));
    pa->add_option("--law", lf.name)->check(CLI::IsMember({"exp"}));
    path->add_option("--law", lf.name)->check(CLI::IsMember({"exp"}));
    dlp->add_option("--law", lf.name)->check(CLI::IsMember({"hazard"}));
    for (auto* s : {urn, repeat, joint, mfold, embedded, limit, pa, path, dlp}) {
        common.add(s);
        if (s != joint && s != embedded && s != limit) {
            s->add_option("--atom-cutoff", lf.atom_cutoff, "scaled atoms below this join the Gaussian part");
            s->add_option("--trials-out", lf.trials_out, "also write raw trials here when --law is set");
            s->add_option("--ks-out", lf.ks_out, "KS report JSON path (default stderr for csv)");
        }
    }

    // law
    auto* law = app.add_subcommand("law", "tabulate a survival function on an r-grid");
    std::string law_name, params_text = "{}", params_file;
    double r_max = 6.0;
    std::size_t points = 601;
    law->add_option("--name", law_name)->required()->check(
        CLI::IsMember({"qcolor", "general", "mfold", "cp", "gs", "ags", "gs-avg", "ags-avg"}));
    law->add_option("--params", params_text, "JSON parameters, e.g. {\"q\":2,\"psi\":[0.7]} or {\"x\":[0,0.2]}");
    law->add_option("--params-file", params_file, "JSON parameters from a file");
    law->add_option("--r-max", r_max)->check(CLI::PositiveNumber);
    law->add_option("--points", points)->check(CLI::Range(std::size_t{2}, std::size_t{10000000}));
    common.add(law, false);

    // report
    auto* report = app.add_subcommand("report", "run the acceptance suite and emit JSON");
    std::vector<std::string> only;
    report->add_option("--only", only, "criterion numbers or names")->delimiter(',');
    common.add(report, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*sim) {
            if (*urn || *embedded) {
                const auto d = dist.build();
                const auto weights = parse_weights(mix, q);
                const UrnModelSpec spec = UrnModelSpec::identical(ColorMix(weights), d);
                if (*urn) job.discrete = [spec](std::uint64_t n, const SimOptions& o) { return sim_first_collision(spec, n, o); };
                else job.real = [spec](std::uint64_t n, const SimOptions& o) { return sim_embedded_continuous(spec, n, o); };
                job.scale = spec.scaling().s_n;
                if (!lf.name.empty()) {
                    job.law_name = lf.name;
                    if (lf.name == "qcolor") {
                        if (!spec.mix().is_uniform()) throw InvalidArgument("--law qcolor needs equal colour weights");
                        LimitParams p;
                        p.q = spec.q();
                        p.psi = keep_atoms(scaling_of(d).psi, lf.atom_cutoff);
                        p.validate();
                        job.law = [p](double r) { return survival_qcolor(p, r); };
                    } else {
                        const LimitParams p = gaussian_limit_params(spec);
                        job.law = [p](double r) { return survival_general(p, r); };
                    }
                    if (!spec.mix().is_uniform()) job.dataset = "fig2";
                    else if (dist.uniform) job.dataset = "fig1a";
                    else if (dist.sqrt_atom) job.dataset = "fig1b";
                }
            } else if (*repeat) {
                const auto d = dist.build();
                job.discrete = [d](std::uint64_t n, const SimOptions& o) { return sim_repeat_time(d, n, o); };
                const auto sc = scaling_of(d);
                job.scale = sc.s_n;
                if (!lf.name.empty()) {
                    LimitParams p;
                    p.psi = keep_atoms(sc.psi, lf.atom_cutoff);
                    job.law = [p](double r) { return survival_repeat_cp(p, r); };
                    job.law_name = "cp";
                }
            } else if (*joint) {
                const auto d = dist.build();
                const UrnModelSpec spec = UrnModelSpec::identical(ColorMix::uniform(q), d);
                job.discrete = [spec, m](std::uint64_t n, const SimOptions& o) { return sim_joint_collisions(spec, m, n, o); };
            } else if (*mfold) {
                const auto d = dist.build();
                job.discrete = [d, q, m](std::uint64_t n, const SimOptions& o) { return sim_mfold_collision(d, q, m, n, o); };
                const auto sc = mfold_scaling_of(d, m);
                job.scale = sc.s_2m;
                if (!lf.name.empty()) {
                    LimitParams p;
                    p.q = q;
                    p.m = m;
                    p.psi = keep_atoms(sc.psi_2m, lf.atom_cutoff);
                    p.validate();
                    job.law = [p](double r) { return survival_mfold(p, r); };
                    job.law_name = "mfold";
                }
            } else if (*limit) {
                const auto spec = LimitProcessSpec::from_atoms(q, atoms);
                spec.validate();
                job.real = [spec, m](std::uint64_t n, const SimOptions& o) { return sample_limit_process(spec, m, n, o); };
            } else if (*pa) {
                PaConfig cfg;
                cfg.m = m;
                cfg.palette = dist.build();
                cfg.max_vertices = max_vertices;
                cfg.validate();
                job.discrete = [cfg](std::uint64_t n, const SimOptions& o) { return sim_pa_collision(cfg, n, o); };
                double sum_sq = 0.0;
                for (double p : cfg.palette.masses()) sum_sq += p * p;
                job.scale = sum_sq;
                if (!lf.name.empty()) {
                    const double rate = m;
                    job.law = [rate](double r) { return std::exp(-rate * r); };
                    job.law_name = "exp(m)";
                }
            } else if (*path) {
                const auto d = dist.build();
                const PathConfig cfg{std::vector<double>(d.masses().begin(), d.masses().end()), m};
                cfg.validate();
                job.discrete = [cfg](std::uint64_t n, const SimOptions& o) { return sim_path_run(cfg, n, o); };
                double s = 0.0;
                for (double p : cfg.probs) s += std::pow(p, m);
                job.scale = s;
                if (!lf.name.empty()) {
                    job.law = [](double r) { return std::exp(-r); };
                    job.law_name = "exp(1)";
                }
            } else if (*dlp) {
                const DlpInstance inst{dlp_n, dlp_x, parse_variant(variant)};
                inst.validate();
                job.discrete = [inst](std::uint64_t n, const SimOptions& o) { return sim_dlp_runtime(inst, n, o); };
                job.scale = 1.0 / std::sqrt(static_cast<double>(dlp_n));
                if (!lf.name.empty()) {
                    const double x = inst.effective_x();
                    const auto v = inst.variant;
                    job.law = [v, x](double r) { return hazard(v, x, r); };
                    job.law_name = "hazard_" + to_string(v);
                    job.dataset = "fig3";
                }
            }
            return run_job(job, common, lf);
        }

        if (*law) {
            nlohmann::json params;
            if (!params_file.empty()) {
                std::ifstream in(params_file);
                if (!in) throw InvalidArgument("cannot read '" + params_file + "'");
                params = nlohmann::json::parse(in);
            } else {
                params = nlohmann::json::parse(params_text);
            }
            return cmd_law(law_name, params, r_max, points, common);
        }

        if (*report) {
            acceptance::SuiteOptions opt;
            opt.seed = common.seed;
            opt.threads = common.threads;
            for (const auto& s : only) opt.only.push_back(acceptance::criterion_id(s));
            opt.on_result = [](const acceptance::CriterionResult& r, double seconds) {
                std::fprintf(stderr, "%s %2d %-24s %.1fs\n", r.pass() ? "PASS" : "FAIL", r.id, r.slug.c_str(), seconds);
            };
            const auto rep = acceptance::run_suite(opt);
            Output out(common.out);
            out.stream() << rep.to_json().dump(2) << '\n';
            return rep.pass() ? kOk : kAcceptance;
        }
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const NumericFailure& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kNumeric;
    } catch (const RunawayTrial& e) {
        std::cerr << "runaway trial: " << e.what() << '\n';
        return kNumeric;
    }
    return kOk;
}
