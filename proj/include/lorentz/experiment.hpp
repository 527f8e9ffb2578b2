#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lorentz/causal_space.hpp"
#include "lorentz/geodesics.hpp"
#include "lorentz/io.hpp"
#include "lorentz/models.hpp"

namespace lorentz {

struct ModelSpec {
    std::string kind = "minkowski";  // minkowski | constant_curvature | milne_wedge
    int dim = 2;
    double kappa = 0;
    std::string region;
};

struct SamplerSpec {
    std::string mode = "lattice";  // lattice | sprinkle
    double spacing = 0.1;
    double density = 0;
    std::optional<std::uint64_t> seed;
};

struct ExperimentConfig {
    std::optional<ModelSpec> model;
    SamplerSpec sampler;
    std::string space_path;  // alternative to model + sampler
    std::string task;        // solve | certify-tcd | certify-tmcp | compare | disintegrate | hawking | refine | validate
    std::map<std::string, std::string> params;
    std::string out_dir;  // empty: nothing is written
    double tol = -1;      // negative: per-check defaults
    int threads = 1;
};

// INI text with [model], [sampler], [space], [task] and [output] sections.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
// Throws InputError naming the offending field.
void validate_config(const ExperimentConfig& cfg);

std::shared_ptr<const ModelSpacetime> build_model(const ModelSpec& spec);
FiniteCausalSpace build_space(const ExperimentConfig& cfg);

// Point selections: all | points:i,j,.. | box:lo0,hi0,lo1,hi1,.. | near:x0,x1,..
// | level:c (chart time c) | hyperboloid | file:path.json
IndexSet select_points(const FiniteCausalSpace& space, const std::string& spec);
WeightedMeasure select_measure(const FiniteCausalSpace& space, const std::string& spec);

struct RunResult {
    int exit_code = 0;  // 0 pass, 2 fail, 3 vacuous regime, 4 input error
    Json report;
    std::vector<std::string> files;
};

RunResult run_experiment(const ExperimentConfig& cfg);

struct RefinementRow {
    double spacing = 0;
    int size = 0;
    double worst_residual = 0;
    double floor = 0;  // max(0, -worst_residual)
    double tolerance = 0;
    Verdict verdict = Verdict::Pass;
};

struct RefinementTable {
    std::string certifier;
    std::vector<RefinementRow> rows;
    double order = 0;  // least-squares slope of log floor against log spacing; NaN if undetermined
    bool pass = false;
};

// Runs the configured certifier (params "certifier", default certify-tmcp) at
// each spacing. Requires at least three strictly decreasing spacings.
RefinementTable refinement_study(const ExperimentConfig& cfg, const std::vector<double>& spacings);

}  // namespace lorentz
