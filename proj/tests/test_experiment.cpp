#include <gtest/gtest.h>

#include <filesystem>

#include "lorentz/errors.hpp"
#include "lorentz/experiment.hpp"

using namespace lorentz;

namespace {

ExperimentConfig tmcp_config()
{
    return parse_config_text(R"([model]
kind = minkowski
dim = 2
region = box:0,1,0,1
[sampler]
mode = lattice
spacing = 0.5
[task]
name = certify-tmcp
mu0 = level:0
x1 = near:1,0.5
K = 0
N = 2
grid = 21
[output]
tol = 2.5
)");
}

Json without_time(Json j)
{
    j.erase("wall_time_s");
    return j;
}

}  // namespace

TEST(Experiment, NinePointTmcpSmoke)
{
    const RunResult r = run_experiment(tmcp_config());
    EXPECT_EQ(r.exit_code, 0) << r.report.dump(1);
    EXPECT_EQ(r.report["schema"], "certification-report");
    EXPECT_EQ(r.report["space"]["points"], 9);
    ASSERT_EQ(r.report["checks"].size(), 1u);
    const Json& c = r.report["checks"][0];
    EXPECT_EQ(c["verdict"], "PASS");
    EXPECT_EQ(c["residuals"].size(), 21u);
    EXPECT_EQ(c["input_hash"], r.report["space"]["hash"]);
    EXPECT_TRUE(r.files.empty());
}

TEST(Experiment, DeterministicUpToWallTime)
{
    const Json a = without_time(run_experiment(tmcp_config()).report);
    const Json b = without_time(run_experiment(tmcp_config()).report);
    EXPECT_EQ(a.dump(), b.dump());
}

TEST(Experiment, WritesReportAndCsv)
{
    ExperimentConfig cfg = tmcp_config();
    cfg.out_dir = (std::filesystem::temp_directory_path() / "lorentz-exp-out").string();
    std::filesystem::remove_all(cfg.out_dir);
    const RunResult r = run_experiment(cfg);
    ASSERT_EQ(r.exit_code, 0);
    ASSERT_EQ(r.files.size(), 2u);
    for (const auto& f : r.files) EXPECT_TRUE(std::filesystem::exists(f)) << f;
    EXPECT_EQ(without_time(load_json(r.files[0])).dump(), without_time(r.report).dump());
    std::filesystem::remove_all(cfg.out_dir);
}

TEST(Experiment, InputErrorsNameTheField)
{
    ExperimentConfig cfg = tmcp_config();
    cfg.params.erase("N");
    const RunResult r = run_experiment(cfg);
    EXPECT_EQ(r.exit_code, 4);
    EXPECT_NE(r.report["error"]["message"].get<std::string>().find("task.N"), std::string::npos);
    EXPECT_EQ(r.report["verdict"], "ERROR");

    ExperimentConfig sprinkle = tmcp_config();
    sprinkle.sampler.mode = "sprinkle";
    sprinkle.sampler.density = 50;
    EXPECT_THROW(validate_config(sprinkle), InputError);
    EXPECT_THROW(parse_config_text("[model]\nkind = minkowski\n"), InputError);
    EXPECT_THROW(select_points(*std::make_shared<FiniteCausalSpace>(build_space(tmcp_config())), "blob:1"), InputError);
}

TEST(Experiment, RegimeErrorIsVacuousExit)
{
    const RunResult r = run_experiment(parse_config_text(R"([model]
kind = milne_wedge
dim = 2
region = wedge:0.5,0.2
[sampler]
spacing = 0.1
[task]
name = hawking
V = hyperboloid
H0 = 0.5
K = 0
N = 2
)"));
    EXPECT_EQ(r.exit_code, 3);
    EXPECT_EQ(r.report["error"]["kind"], "regime");
}

TEST(Experiment, SelectionsOnNinePoints)
{
    const FiniteCausalSpace s = build_space(tmcp_config());
    EXPECT_EQ(select_points(s, "all").size(), 9u);
    EXPECT_EQ(select_points(s, "level:0").size(), 3u);
    EXPECT_EQ(select_points(s, "box:0,0.5,0,1").size(), 6u);
    EXPECT_EQ(select_points(s, "points:2,4"), (IndexSet{2, 4}));
    EXPECT_THROW(select_points(s, "level:0.25"), InputError);
    EXPECT_THROW(select_points(s, "points:9"), InputError);
}

TEST(Refinement, StudyNeedsThreeSpacingsAndReportsRows)
{
    ExperimentConfig cfg = parse_config_text(R"([model]
kind = minkowski
dim = 2
region = box:0,1.5,-0.3,0.3
[task]
name = refine
spacings = 0.1,0.05,0.025
certifier = certify-tmcp
mu0 = box:0,0.2,-0.1,0.1
x1 = near:1.4,0
K = 0
N = 2
)");
    EXPECT_THROW(refinement_study(cfg, {0.1}), InputError);
    EXPECT_THROW(refinement_study(cfg, {0.1, 0.2, 0.05}), InputError);
    const RefinementTable t = refinement_study(cfg, {0.1, 0.05, 0.025});
    EXPECT_EQ(t.certifier, "certify-tmcp");
    ASSERT_EQ(t.rows.size(), 3u);
    for (std::size_t k = 1; k < t.rows.size(); ++k) EXPECT_GT(t.rows[k].size, t.rows[k - 1].size);
    EXPECT_TRUE(t.pass);
    const RunResult r = run_experiment(cfg);
    EXPECT_EQ(r.exit_code, 0) << r.report.dump(1);
}
