// lorentz-ot: command line front end for the lorentz library.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <unistd.h>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "lorentz/errors.hpp"
#include "lorentz/experiment.hpp"
#include "lorentz/io.hpp"

namespace {

using namespace lorentz;

struct Globals {
    std::optional<std::uint64_t> seed;
    double tol = -1;
    int threads = 1;
    std::string out;
};

struct SpaceArgs {
    std::string space;
    std::string model = "minkowski";
    int dim = 2;
    double kappa = 0;
    std::string region;
    double spacing = 0.1;
    double density = 0;
    std::string mode = "lattice";
};

void add_space_options(CLI::App* app, SpaceArgs& a)
{
    app->add_option("--space", a.space, "Causal space JSON file");
    app->add_option("--model", a.model, "minkowski | constant_curvature | milne_wedge");
    app->add_option("--dim", a.dim, "Spacetime dimension");
    app->add_option("--kappa", a.kappa, "Curvature parameter of constant_curvature");
    app->add_option("--region", a.region, "box:..., diamond:L, cone:R,eta or wedge:eta[,rho_min]");
    app->add_option("--spacing", a.spacing, "Lattice spacing");
    app->add_option("--density", a.density, "Sprinkling density (switches to sprinkle mode)");
}

// "K=0,N=2,x0=near:0,0" splits only at commas that start a new key.
std::map<std::string, std::string> parse_params(const std::string& text)
{
    std::map<std::string, std::string> out;
    if (text.empty()) return out;
    const std::regex sep(",(?=[A-Za-z_][A-Za-z0-9_]*=)");
    for (std::sregex_token_iterator it(text.begin(), text.end(), sep, -1), end; it != end; ++it) {
        const std::string item = *it;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw InputError("--params: expected key=value, got '" + item + "'");
        out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

ExperimentConfig base_config(const Globals& g, const SpaceArgs& a, const std::string& task)
{
    ExperimentConfig cfg;
    cfg.task = task;
    cfg.tol = g.tol;
    cfg.threads = g.threads;
    if (!a.space.empty()) {
        cfg.space_path = a.space;
    } else if (!a.region.empty()) {
        cfg.model = ModelSpec{a.model, a.dim, a.kappa, a.region};
        cfg.sampler.spacing = a.spacing;
        if (a.density > 0) {
            cfg.sampler.mode = "sprinkle";
            cfg.sampler.density = a.density;
            cfg.sampler.seed = g.seed.value_or(0);
        }
    }
    return cfg;
}

void print_summary(const RunResult& r)
{
    const Json& rep = r.report;
    if (rep.contains("error")) std::cerr << "error: " << rep["error"]["message"].get<std::string>() << "\n";
    for (const Json& c : rep["checks"]) {
        std::cout << c["name"].get<std::string>() << ": " << c["verdict"].get<std::string>()
                  << " worst_residual=" << c["worst_residual"].dump() << " tol=" << c["tolerance"].dump();
        for (const char* k : {"ell_p", "sup_tau_V", "D", "H0", "max_tau", "bound", "lhs", "rhs", "order"})
            if (c.contains(k)) std::cout << " " << k << "=" << c[k].dump();
        std::cout << "\n";
    }
    std::cout << "verdict: " << rep["verdict"].get<std::string>() << "\n";
}

bool ends_with(const std::string& s, const std::string& suffix)
{
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Runs a task. A --out ending in .json or .csv names the task's primary
// artifact; anything else is the report directory.
int run_task(ExperimentConfig cfg, const Globals& g)
{
    namespace fs = std::filesystem;
    const bool json_out = ends_with(g.out, ".json"), csv_out = ends_with(g.out, ".csv");
    fs::path scratch;
    if (csv_out) {
        scratch = fs::temp_directory_path() / ("lorentz-ot-" + std::to_string(::getpid()));
        cfg.out_dir = scratch.string();
    } else if (!json_out) {
        cfg.out_dir = g.out;
    }
    const RunResult r = run_experiment(cfg);
    print_summary(r);
    if (json_out && !r.report["checks"].empty()) {
        const Json& c = r.report["checks"][0];
        if (c.contains("decomposition")) save_json(c["decomposition"], g.out);
        else if (c.contains("coupling")) save_json(c["coupling"], g.out);
        else save_json(r.report, g.out);
    } else if (json_out) {
        save_json(r.report, g.out);
    }
    if (csv_out) {
        for (const std::string& f : r.files)
            if (ends_with(f, ".csv")) {
                fs::copy_file(f, g.out, fs::copy_options::overwrite_existing);
                break;
            }
        fs::remove_all(scratch);
    }
    return r.exit_code;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Lorentzian optimal transport on finite causal spaces"};
    app.require_subcommand(1);
    Globals g;
    std::uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "Seed for sprinkling and randomized audits");
    app.add_option("--tol", g.tol, "Override certificate tolerances");
    app.add_option("--threads", g.threads, "Worker threads (computations currently run serially)");
    app.add_option("--out", g.out, "Output file or report directory");
    for (auto* o : app.get_options()) o->configurable(false);
    app.fallthrough();

    SpaceArgs sa;

    auto* lattice = app.add_subcommand("lattice", "Discretize a model on a lattice and write the space");
    add_space_options(lattice, sa);
    auto* sprinkle = app.add_subcommand("sprinkle", "Sprinkle a model and write the space");
    add_space_options(sprinkle, sa);

    std::string mu, nu, mu0, mu1, x1, V, rays, H0 = "estimate", backend = "auto", params, check, config, spacings;
    std::string certifier = "certify-tmcp";
    double p = 0.5, K = 0, N = 2, t_max = 0.5;
    int grid = 0;
    bool have_K = false;

    auto* solve = app.add_subcommand("solve", "Solve the l_p transport problem");
    add_space_options(solve, sa);
    solve->add_option("--mu", mu, "Source selection")->required();
    solve->add_option("--nu", nu, "Target selection")->required();
    solve->add_option("--p", p);
    solve->add_option("--backend", backend, "auto | exact | double");

    auto* tcd = app.add_subcommand("certify-tcd", "Certify entropic TCD along an optimal geodesic");
    add_space_options(tcd, sa);
    tcd->add_option("--mu0", mu0)->required();
    tcd->add_option("--mu1", mu1)->required();
    tcd->add_option("--K", K)->required();
    tcd->add_option("--N", N)->required();
    tcd->add_option("--p", p);
    tcd->add_option("--grid", grid, "Number of grid times");

    auto* tmcp = app.add_subcommand("certify-tmcp", "Certify entropic TMCP toward a Dirac endpoint");
    add_space_options(tmcp, sa);
    tmcp->add_option("--mu0", mu0)->required();
    tmcp->add_option("--x1", x1)->required();
    tmcp->add_option("--K", K)->required();
    tmcp->add_option("--N", N)->required();
    tmcp->add_option("--p", p);
    tmcp->add_option("--grid", grid, "Number of grid times");

    auto* compare = app.add_subcommand("compare", "Comparison inequalities");
    add_space_options(compare, sa);
    compare->add_option("--check", check, "bg | bm | bmk | poincare")->required();
    compare->add_option("--params", params, "Comma separated key=value list, e.g. K=0,N=2,sharp=true");

    auto* dis = app.add_subcommand("disintegrate", "Ray decomposition of the future of an achronal set");
    add_space_options(dis, sa);
    dis->add_option("--V", V, "Achronal set selection or file:v.json")->required();
    dis->add_option("--params", params, "Optional K=..,N=.. for the density test");

    auto* hawking = app.add_subcommand("hawking", "Hawking-type bound on the time separation from V");
    add_space_options(hawking, sa);
    hawking->add_option("--rays", rays, "Ray decomposition JSON");
    hawking->add_option("--V", V, "Achronal set selection (when no --rays)");
    hawking->add_option("--H0", H0, "Mean curvature bound or 'estimate'");
    auto* kopt = hawking->add_option("--K", K);
    hawking->add_option("--N", N);
    hawking->add_option("--t-max", t_max, "Fit window for the mean curvature estimate");

    auto* refine = app.add_subcommand("refine", "Refinement study of a certifier");
    add_space_options(refine, sa);
    refine->add_option("--config", config, "INI config providing the certifier parameters");
    refine->add_option("--spacings", spacings, "Decreasing comma separated spacings")->required();
    refine->add_option("--certifier", certifier);
    refine->add_option("--params", params);

    auto* validate = app.add_subcommand("validate", "Check the causal space axioms");
    add_space_options(validate, sa);

    auto* run = app.add_subcommand("run", "Run an experiment from an INI config");
    run->add_option("--config", config)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 4;
    }
    if (*seed_opt) g.seed = seed;
    have_K = kopt->count() > 0;

    try {
        if (lattice->parsed() || sprinkle->parsed()) {
            if (sa.region.empty()) throw InputError("--region is required");
            if (g.out.empty()) throw InputError("--out is required");
            if (sprinkle->parsed() && !(sa.density > 0)) throw InputError("--density is required for sprinkle");
            if (sprinkle->parsed() && !g.seed) throw InputError("--seed is required for sprinkle");
            ExperimentConfig cfg = base_config(g, sa, "validate");
            if (lattice->parsed()) cfg.sampler.mode = "lattice";
            const FiniteCausalSpace space = build_space(cfg);
            save_space(space, g.out);
            std::cout << "points: " << space.size() << "\nhash: " << space_hash(space) << "\n";
            return 0;
        }
        if (run->parsed()) {
            ExperimentConfig cfg = load_config(config);
            if (g.tol >= 0) cfg.tol = g.tol;
            if (g.seed) cfg.sampler.seed = g.seed;
            cfg.threads = g.threads;
            if (!g.out.empty()) cfg.out_dir = g.out;
            const RunResult r = run_experiment(cfg);
            print_summary(r);
            return r.exit_code;
        }
        ExperimentConfig cfg;
        if (solve->parsed()) {
            cfg = base_config(g, sa, "solve");
            cfg.params = {{"mu", mu}, {"nu", nu}, {"p", std::to_string(p)}, {"backend", backend}};
        } else if (tcd->parsed() || tmcp->parsed()) {
            cfg = base_config(g, sa, tcd->parsed() ? "certify-tcd" : "certify-tmcp");
            cfg.params = {{"mu0", mu0}, {"K", std::to_string(K)}, {"N", std::to_string(N)}, {"p", std::to_string(p)}};
            if (tcd->parsed()) cfg.params["mu1"] = mu1;
            else cfg.params["x1"] = x1;
            if (grid > 0) cfg.params["grid"] = std::to_string(grid);
        } else if (compare->parsed()) {
            cfg = base_config(g, sa, "compare");
            cfg.params = parse_params(params);
            cfg.params["check"] = check;
        } else if (dis->parsed()) {
            cfg = base_config(g, sa, "disintegrate");
            cfg.params = parse_params(params);
            cfg.params["V"] = V;
        } else if (hawking->parsed()) {
            cfg = base_config(g, sa, "hawking");
            if (!rays.empty()) cfg.params["rays"] = rays;
            if (!V.empty()) cfg.params["V"] = V;
            cfg.params["H0"] = H0;
            cfg.params["K"] = std::to_string(have_K ? K : 0.0);
            cfg.params["N"] = std::to_string(N);
            cfg.params["t_max"] = std::to_string(t_max);
        } else if (refine->parsed()) {
            if (!config.empty()) {
                cfg = load_config(config);
                cfg.out_dir.clear();
            } else {
                cfg = base_config(g, sa, "refine");
            }
            for (const auto& [k, v] : parse_params(params)) cfg.params[k] = v;
            if (!cfg.params.count("certifier")) cfg.params["certifier"] = certifier;
            cfg.params["spacings"] = spacings;
            cfg.task = "refine";
            cfg.tol = g.tol;
        } else if (validate->parsed()) {
            cfg = base_config(g, sa, "validate");
        }
        return run_task(cfg, g);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return dynamic_cast<const RegimeError*>(&e) ? 3 : 4;
    }
}
