#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "collide/dlp_models.hpp"
#include "collide/errors.hpp"
#include "collide/stats_gof.hpp"

using namespace collide;

namespace {

DlpInstance gs(std::uint64_t n, double x) { return {n, x, DlpVariant::GS}; }
DlpInstance ags(std::uint64_t n, double x) { return {n, x, DlpVariant::AGS}; }

}  // namespace

TEST(DlpInstance, Validation) {
    EXPECT_THROW(gs(100, 0.6).validate(), InvalidArgument);
    EXPECT_THROW(ags(102, 0.1).validate(), InvalidArgument);
    EXPECT_THROW(gs(4, 0.1).validate(), InvalidArgument);
    EXPECT_NO_THROW(ags(100, -0.5).validate());
    EXPECT_EQ(gs(1000, 0.2).shift(), 200u);
    EXPECT_DOUBLE_EQ(gs(1000, -0.2).effective_x(), -0.2);
}

TEST(GsSpec, FullOverlapAtZero) {
    const auto spec = gs_spec(gs(1000, 0.0));
    EXPECT_EQ(spec.urns(), 1000u);
    EXPECT_NEAR(spec.scaling().s_n, 1 / std::sqrt(1000.0), 1e-15);
    EXPECT_NEAR(spec.scaling().phi[0], 1.0, 1e-12);
}

TEST(GsSpec, HalfOverlapAtHalf) {
    const auto spec = gs_spec(gs(1000, 0.5));
    std::size_t both = 0;
    for (std::size_t u = 0; u < spec.urns(); ++u) both += spec.row(0)[u] > 0 && spec.row(1)[u] > 0;
    EXPECT_EQ(both, 500u);
}

TEST(GsSpec, ScalingIdentity) {
    const std::uint64_t n = 10000;
    for (double x : {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, -0.3}) {
        const auto spec = gs_spec(gs(n, x));
        const double ax = std::abs(x);
        EXPECT_NEAR(spec.scaling().s_n, std::sqrt((1 - ax / 2) / n), 1e-12) << x;
        EXPECT_NEAR(spec.scaling().phi[1], 1 / (1 - ax / 2), 1e-12) << x;
    }
}

TEST(AgsSpec, WildAtZero) {
    const std::uint64_t n = 400;
    const auto spec = ags_spec(ags(n, 0.0));
    for (std::size_t u = 0; u < 100; ++u) EXPECT_DOUBLE_EQ(spec.row(1)[u], 4.0 / n);
    for (std::size_t u = 100; u < spec.urns(); ++u) EXPECT_DOUBLE_EQ(spec.row(1)[u], 0.0);
}

TEST(AgsSpec, CaseOneScalingIdentity) {
    const std::uint64_t n = 10000;
    for (double x : {0.0, 0.1, 0.2, -0.15}) {
        const double ax = std::abs(x);
        const auto spec = ags_spec(ags(n, x));
        EXPECT_NEAR(spec.scaling().s_n, std::sqrt((10 - 8 * ax) / (4.0 * n)), 1e-12) << x;
        EXPECT_NEAR(spec.scaling().phi[0], 8 / (10 - 8 * ax), 1e-12) << x;
        EXPECT_NEAR(spec.scaling().phi[1], 4 * (4 - 8 * ax) / (10 - 8 * ax), 1e-12) << x;
    }
}

TEST(AgsSpec, CaseTwoScalingAndOverlap) {
    const std::uint64_t n = 10000;
    for (double x : {0.25, 0.3, 0.45, 0.5}) {
        const auto spec = ags_spec(ags(n, x));
        EXPECT_NEAR(spec.scaling().s_n, std::sqrt((2.5 - 2 * x) / n), 1e-12) << x;
        std::size_t both = 0;
        for (std::size_t u = 0; u < spec.urns(); ++u) both += spec.row(0)[u] > 0 && spec.row(1)[u] > 0;
        EXPECT_EQ(both, static_cast<std::size_t>(std::llround(n * (0.75 - x))));
    }
}

TEST(HazardLaws, Values) {
    EXPECT_NEAR(hazard_gs(0.0, 2.0), std::exp(-1.0), 1e-15);
    for (double r : {0.5, 1.0, 2.0}) {
        EXPECT_NEAR(hazard_ags(0.3, r), std::exp(-0.45 * r * r), 1e-15);
        EXPECT_NEAR(hazard_ags(0.1, r), std::exp(-r * r / 2), 1e-15);
        EXPECT_NEAR(hazard_ags(0.5, r), std::exp(-r * r / 4), 1e-15);
        // Both branches agree at |x| = 1/4.
        EXPECT_NEAR(hazard_ags(0.25, r), hazard_ags(0.2499999999, r), 1e-9);
    }
    EXPECT_THROW(hazard_gs(0.7, 1.0), InvalidArgument);
}

TEST(HazardLaws, SymmetricInX) {
    for (double x : {0.05, 0.2, 0.25, 0.4, 0.5})
        for (double r : {0.3, 1.1, 2.7}) {
            EXPECT_EQ(hazard_gs(x, r), hazard_gs(-x, r));
            EXPECT_EQ(hazard_ags(x, r), hazard_ags(-x, r));
        }
}

TEST(HazardLaws, GeneralLawChangeOfScale) {
    // Scaling T by s_n instead of sqrt(n) maps the general law onto the GS law.
    for (double x : {0.0, 0.1, 0.2, 0.3, 0.4, 0.5}) {
        const auto spec = gs_spec(gs(10000, x));
        const auto params = gaussian_limit_params(spec);
        for (double r = 0; r <= 6; r += 0.5)
            EXPECT_NEAR(survival_general(params, r * std::sqrt(1 - x / 2)), hazard_gs(x, r), 1e-10) << x << ' ' << r;
    }
}

TEST(HazardLaws, AgsGeneralLawChangeOfScale) {
    for (double x : {0.0, 0.1, 0.2, 0.3, 0.45}) {
        const auto spec = ags_spec(ags(10000, x));
        const auto params = gaussian_limit_params(spec);
        const double scale = spec.scaling().s_n * std::sqrt(10000.0);
        for (double r = 0; r <= 6; r += 0.5)
            EXPECT_NEAR(survival_general(params, r * scale), hazard_ags(x, r), 1e-10) << x << ' ' << r;
    }
}

TEST(AveragedConstants, ClosedForms) {
    const double root_pi = std::sqrt(std::numbers::pi);
    EXPECT_NEAR(averaged_mean_constant(DlpVariant::GS), (4 - 2 * std::sqrt(2.0)) * root_pi, 1e-6);
    EXPECT_NEAR(averaged_mean_constant(DlpVariant::AGS), (5 * std::sqrt(2.0) / 4 - 1) * root_pi, 1e-6);
    EXPECT_GT(averaged_mean_constant(DlpVariant::GS), averaged_mean_constant(DlpVariant::AGS));
}

TEST(AveragedHazard, ValuesAndDominance) {
    EXPECT_NEAR(averaged_hazard(DlpVariant::GS, 0.0), 1.0, 1e-12);
    EXPECT_NEAR(averaged_hazard(DlpVariant::AGS, 0.0), 1.0, 1e-12);
    // mpmath quadrature at r = 1.5.
    EXPECT_NEAR(averaged_hazard(DlpVariant::GS, 1.5), 0.657979652473189, 1e-8);
    EXPECT_NEAR(averaged_hazard(DlpVariant::AGS, 1.5), 0.380219884677018, 1e-8);
    for (int i = 0; i <= 600; ++i) {
        const double r = i * 0.01;
        ASSERT_LE(averaged_hazard(DlpVariant::AGS, r), averaged_hazard(DlpVariant::GS, r) + 1e-15) << r;
    }
    EXPECT_LT(averaged_hazard(DlpVariant::GS, 20.0), 1e-6);
}

TEST(DlpSimulation, SmallInstancesFollowLaws) {
    const std::uint64_t n = 10000;
    SimOptions o;
    o.seed = 77;
    for (auto inst : {gs(n, 0.0), ags(n, 0.1), ags(n, 0.5)}) {
        const auto b = sim_dlp_runtime(inst, 20000, o);
        const auto ks = ks_against(b.scaled(1 / std::sqrt(double(n))),
                                   [&](double r) { return hazard(inst.variant, inst.x, r); });
        EXPECT_LE(ks.statistic, 0.02 + ks.dkw_epsilon) << to_string(inst.variant) << ' ' << inst.x;
    }
}

TEST(DlpIo, HazardCsvAndJson) {
    const HazardCurve curves[] = {hazard_curve(DlpVariant::GS, 0.1, {0.0, 1.0}),
                                  hazard_curve(DlpVariant::AGS, 0.3, {0.0, 1.0})};
    std::ostringstream out;
    write_hazard_csv(out, curves);
    EXPECT_EQ(out.str().substr(0, 21), "variant,x,r,survival\n");
    EXPECT_NE(out.str().find("ags,0.3,1,"), std::string::npos);
    const auto inst = dlp_instance_from_json(to_json(ags(400, -0.2)));
    EXPECT_EQ(inst.n, 400u);
    EXPECT_EQ(inst.variant, DlpVariant::AGS);
    EXPECT_DOUBLE_EQ(inst.x, -0.2);
    EXPECT_THROW(parse_variant("rho"), InvalidArgument);
}
