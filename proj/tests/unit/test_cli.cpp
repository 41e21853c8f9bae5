#include <adjts/errors.hpp>
#include <adjts_cli/commands.hpp>

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

using namespace adjts;
using namespace adjts::cli;

TEST(CliTable, CsvAndJson)
{
    Table t;
    t.columns = {"name", "x", "n"};
    t.add({std::string("a"), 0.5, 3LL});
    t.add({std::string("b"), std::nan(""), 4LL});
    std::ostringstream os;
    t.write_csv(os);
    EXPECT_EQ(os.str(), "name,x,n\na,0.5,3\nb,,4\n");
    const auto j = t.to_json();
    ASSERT_EQ(j.size(), 2u);
    EXPECT_EQ(j[0]["x"], 0.5);
    EXPECT_TRUE(j[1]["x"].is_null());
    EXPECT_EQ(j[1]["n"], 4);
}

TEST(CliTable, CommandResultJsonShape)
{
    CommandResult r("demo");
    r.summary["k"] = 1;
    r.fail("broken");
    const auto j = r.to_json();
    EXPECT_EQ(j["command"], "demo");
    EXPECT_EQ(j["ok"], false);
    EXPECT_EQ(j["failures"].size(), 1u);
    EXPECT_TRUE(j.contains("rows"));
    EXPECT_EQ(j["summary"]["k"], 1);
}

TEST(Cli, EmpiricalOrder)
{
    EXPECT_NEAR(empirical_order(1e-2, 1e-4, 1e-3, 1e-6), 2.0, 1e-12);
    EXPECT_TRUE(std::isnan(empirical_order(1e-2, 0.0, 1e-3, 0.0)));
}

TEST(Cli, TaylorTestLinear)
{
    CommonOptions c;
    c.problem = "linear-test";
    const auto r = cmd_taylor_test(c, {});
    EXPECT_TRUE(r.ok()) << r.to_json().dump();
    EXPECT_EQ(r.table.rows.size(), 3u);
}

TEST(Cli, TaylorTestAircraftHalfCurvature)
{
    CommonOptions c;
    const auto r = cmd_taylor_test(c, {});
    ASSERT_TRUE(r.ok()) << r.to_json().dump();
    const double hc = r.summary["half_curvature"];
    const double last = std::get<double>(r.table.rows.back()[5]);
    EXPECT_NEAR(last / hc, 1.0, 1e-2);
}

TEST(Cli, HvpZeroDirection)
{
    CommonOptions c;
    HvpTestOptions o;
    o.zero_direction = true;
    const auto r = cmd_hvp_test(c, o);
    EXPECT_TRUE(r.ok()) << r.to_json().dump();
}

TEST(Cli, RevolveStatsSmall)
{
    CommonOptions c;
    RevolveOptions o;
    o.max_steps = 20;
    o.units = 12;
    const auto r = cmd_revolve_stats(c, o);
    EXPECT_TRUE(r.ok()) << r.to_json().dump();
    EXPECT_EQ(r.summary["N10_s3_solution_only"], 15);
    EXPECT_EQ(r.summary["N10_s3_solution_and_stages"], 6);
    EXPECT_EQ(r.table.columns, (std::vector<std::string>{"N", "capacity", "mode", "stages", "recomputations"}));
}

TEST(Cli, GradientWithCheckpointsAndTlm)
{
    CommonOptions c;
    c.problem = "linear-test";
    c.capacity = 2;
    c.mode = "sol";
    const auto r = cmd_gradient(c, true);
    ASSERT_TRUE(r.ok()) << r.to_json().dump();
    EXPECT_EQ(r.summary["recomputations"], r.summary["predicted_recomputations"]);
    EXPECT_LT(r.summary["tlm_rel_difference"].get<double>(), 1e-12);
}

TEST(Cli, IntegrateAndValidate)
{
    CommonOptions c;
    c.problem = "grayscott";
    c.grid = 8;
    const auto r = cmd_integrate(c);
    EXPECT_TRUE(r.ok());
    EXPECT_EQ(r.table.rows.size(), 11u);
    const auto v = cmd_validate(c, {});
    EXPECT_TRUE(v.ok()) << v.to_json().dump();
}

TEST(Cli, OptimalControlOnLeaderNeedsNoIterations)
{
    CommonOptions c;
    OptimalControlOptions o;
    o.on_leader = true;
    const auto r = cmd_optimal_control(c, o);
    EXPECT_TRUE(r.ok()) << r.to_json().dump();
    EXPECT_EQ(r.summary["newton"]["iterations"], 0);
    EXPECT_EQ(r.summary["lbfgs"]["iterations"], 0);
}

TEST(Cli, UnknownProblemRejected)
{
    CommonOptions c;
    c.problem = "pendulum";
    EXPECT_THROW((void)cmd_gradient(c, false), ConfigurationError);
}

TEST(Cli, BadModeRejected)
{
    CommonOptions c;
    c.capacity = 2;
    c.mode = "all";
    EXPECT_THROW((void)c.storage(), ConfigurationError);
}
