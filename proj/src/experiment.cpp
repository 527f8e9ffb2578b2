#include "lorentz/experiment.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "lorentz/comparison.hpp"
#include "lorentz/disintegration.hpp"
#include "lorentz/errors.hpp"
#include "lorentz/transport.hpp"

namespace lorentz {

namespace {

const std::set<std::string> kTasks = {"solve",  "certify-tcd", "certify-tmcp", "compare",
                                      "disintegrate", "hawking", "refine",       "validate"};

double parse_double(const std::string& text, const std::string& where)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw InputError(where + ": '" + text + "' is not a number");
    }
}

std::vector<double> parse_list(const std::string& text, const std::string& where)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(parse_double(item, where));
    }
    return out;
}

// Typed access to [task] parameters; every value read, defaulted or not, is
// echoed into the report.
class Params {
public:
    Params(const std::map<std::string, std::string>& raw, Json& echo) : raw_(raw), echo_(echo) {}

    bool has(const std::string& k) const { return raw_.count(k) > 0; }
    std::string str(const std::string& k) const
    {
        auto it = raw_.find(k);
        if (it == raw_.end()) throw InputError("missing field task." + k);
        echo_[k] = it->second;
        return it->second;
    }
    std::string str(const std::string& k, const std::string& def) const
    {
        auto it = raw_.find(k);
        const std::string v = it == raw_.end() ? def : it->second;
        echo_[k] = v;
        return v;
    }
    double num(const std::string& k) const
    {
        const double v = parse_double(str(k), "task." + k);
        echo_[k] = v;
        return v;
    }
    double num(const std::string& k, double def) const
    {
        const double v = has(k) ? parse_double(raw_.at(k), "task." + k) : def;
        echo_[k] = v;
        return v;
    }
    int integer(const std::string& k, int def) const
    {
        const double v = num(k, def);
        if (v != std::floor(v)) throw InputError("task." + k + ": expected an integer");
        echo_[k] = int(v);
        return int(v);
    }
    bool flag(const std::string& k, bool def) const
    {
        const std::string v = str(k, def ? "true" : "false");
        if (v == "true" || v == "1" || v == "yes") return echo_[k] = true, true;
        if (v == "false" || v == "0" || v == "no") return echo_[k] = false, false;
        throw InputError("task." + k + ": expected true or false");
    }

private:
    const std::map<std::string, std::string>& raw_;
    Json& echo_;
};

struct Check {
    std::string name, module, operation;
    double tolerance = 0;
    double worst = 0;
    Verdict verdict = Verdict::Pass;
    Json residuals = Json::array();
    Json extra = Json::object();
    // CSV table written next to the report
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

struct TaskContext {
    const ExperimentConfig& cfg;
    const FiniteCausalSpace* space = nullptr;
    std::shared_ptr<const Geometry> geometry;
    std::string input_hash;
    Params params;
    std::vector<Check> checks;
};

double tol_or(const ExperimentConfig& cfg, double def) { return cfg.tol >= 0 ? cfg.tol : def; }

const Geometry& need_geometry(const TaskContext& ctx)
{
    if (!ctx.geometry) throw InputError("task " + ctx.cfg.task + " needs a model-backed space for geodesics");
    return *ctx.geometry;
}

int single_point(const FiniteCausalSpace& space, const std::string& spec, const std::string& field)
{
    const IndexSet s = select_points(space, spec);
    if (s.size() != 1) throw InputError(field + ": selection must contain exactly one point");
    return s[0];
}

void task_solve(TaskContext& c)
{
    const FiniteCausalSpace& S = *c.space;
    const WeightedMeasure mu = select_measure(S, c.params.str("mu"));
    const WeightedMeasure nu = select_measure(S, c.params.str("nu"));
    const double p = c.params.num("p", 0.5);
    const std::string be = c.params.str("backend", "auto");
    SolveOptions opt;
    if (be == "exact") opt.backend = Backend::Exact;
    else if (be == "double") opt.backend = Backend::Double;
    else if (be != "auto") throw InputError("task.backend: expected auto, exact or double");
    const Solution sol = solve_lp(S, mu, nu, p, opt);
    Check ch;
    ch.name = "solve";
    ch.module = "transport";
    ch.operation = "solve_lp";
    ch.extra["ell_p"] = sol.ell_p.is_finite() ? Json(sol.ell_p.value()) : Json("-inf");
    ch.extra["backend"] = sol.backend;
    ch.extra["alternative_optima"] = sol.alternative_optima;
    ch.extra["pairs"] = sol.coupling.pairs.size();
    ch.extra["coupling"] = coupling_to_json(sol.coupling);
    ch.header = {"i", "j", "mass", "tau"};
    for (const PlanPair& e : sol.coupling.pairs) ch.rows.push_back({double(e.i), double(e.j), e.mass, S.tau(e.i, e.j)});
    c.checks.push_back(std::move(ch));
}

void fill_convexity(Check& ch, const ConvexityReport& r)
{
    ch.tolerance = r.tolerance;
    ch.worst = std::isfinite(r.worst_residual) ? r.worst_residual : 0.0;
    ch.verdict = r.verdict;
    ch.extra["norm_tau"] = r.norm_tau;
    ch.extra["K"] = r.K;
    ch.extra["N"] = r.N;
    if (!r.message.empty()) ch.extra["message"] = r.message;
}

void task_tmcp(TaskContext& c)
{
    const FiniteCausalSpace& S = *c.space;
    const WeightedMeasure mu0 = select_measure(S, c.params.str("mu0"));
    const int x1 = single_point(S, c.params.str("x1"), "task.x1");
    const double K = c.params.num("K"), N = c.params.num("N"), p = c.params.num("p", 0.5);
    const int grid = c.params.integer("grid", 21);
    CertifyOptions opt;
    opt.tol = c.cfg.tol;
    const ConvexityReport r = tmcp_certify(S, need_geometry(c), mu0, x1, K, N, p, uniform_grid(grid), opt);
    Check ch;
    ch.name = "tmcp";
    ch.module = "geodesics-entropy";
    ch.operation = "tmcp_certify";
    fill_convexity(ch, r);
    ch.residuals = r.tmcp_residuals;
    ch.header = {"t", "u", "entropy", "residual"};
    for (std::size_t k = 0; k < r.tmcp_residuals.size(); ++k)
        ch.rows.push_back({r.times[k], r.u[k], r.entropy[k], r.tmcp_residuals[k]});
    c.checks.push_back(std::move(ch));
}

void task_tcd(TaskContext& c)
{
    const FiniteCausalSpace& S = *c.space;
    const WeightedMeasure mu0 = select_measure(S, c.params.str("mu0"));
    const WeightedMeasure mu1 = select_measure(S, c.params.str("mu1"));
    const double K = c.params.num("K"), N = c.params.num("N"), p = c.params.num("p", 0.5);
    const int grid = c.params.integer("grid", 11);
    const Solution sol = solve_lp(S, mu0, mu1, p);
    if (!sol.ell_p.is_finite()) throw DomainError("certify-tcd: no causal coupling between mu0 and mu1");
    const MeasurePath path = displacement_interpolation(need_geometry(c), S, sol.coupling, uniform_grid(grid));
    CertifyOptions opt;
    opt.tol = c.cfg.tol;
    const ConvexityReport r = tcd_certify(path, sol.coupling, K, N, S, opt);
    Check ch;
    ch.name = "tcd";
    ch.module = "geodesics-entropy";
    ch.operation = "tcd_certify";
    fill_convexity(ch, r);
    ch.extra["ell_p"] = sol.ell_p.value();
    for (const TripleResidual& t : r.triple_residuals) ch.residuals.push_back(t.residual);
    for (double v : r.second_difference_residuals) ch.residuals.push_back(v);
    ch.header = {"s", "r", "t", "residual"};
    for (const TripleResidual& t : r.triple_residuals) ch.rows.push_back({t.s, t.r, t.t, t.residual});
    c.checks.push_back(std::move(ch));
}

void task_compare(TaskContext& c)
{
    const FiniteCausalSpace& S = *c.space;
    const std::string check = c.params.str("check");
    const double K = c.params.num("K"), N = c.params.num("N");
    Check ch;
    ch.module = "comparison";
    if (check == "bg") {
        const int x0 = single_point(S, c.params.str("x0"), "task.x0");
        const IndexSet E = select_points(S, c.params.str("E", "all"));
        const bool sharp = c.params.flag("sharp", false);
        std::vector<double> radii;
        if (c.params.has("radii")) radii = parse_list(c.params.str("radii"), "task.radii");
        BishopGromovOptions opt;
        opt.tol = c.cfg.tol;
        const BishopGromovReport r = bishop_gromov_profile(need_geometry(c), S, x0, E, radii, K, N, sharp, opt);
        ch.name = "bishop-gromov";
        ch.operation = "bishop_gromov_profile";
        ch.tolerance = r.tol;
        ch.worst = r.worst;
        ch.verdict = r.pass ? Verdict::Pass : Verdict::Fail;
        ch.extra["sharp"] = sharp;
        ch.extra["sharp_not_weaker"] = r.sharp_not_weaker;
        for (double v : r.v_residual) ch.residuals.push_back(v);
        for (double v : r.s_residual) ch.residuals.push_back(v);
        ch.header = {"r", "v", "s", "bound", "residual", "s_radius", "s_bound", "s_residual"};
        for (std::size_t k = 0; k < r.profile.radii.size(); ++k)
            ch.rows.push_back({r.profile.radii[k], r.profile.v[k], r.profile.s[k], r.v_bound[k], r.v_residual[k],
                               r.profile.s_radii[k], r.s_bound[k], r.s_residual[k]});
    } else if (check == "bm") {
        const IndexSet A0 = select_points(S, c.params.str("A0"));
        const IndexSet A1 = select_points(S, c.params.str("A1"));
        BrunnMinkowskiOptions opt;
        opt.tol = c.cfg.tol;
        opt.p = c.params.num("p", 0.5);
        opt.half = c.params.flag("half", false);
        const int grid = c.params.integer("grid", 5);
        const BrunnMinkowskiReport r = brunn_minkowski_check(need_geometry(c), S, A0, A1, uniform_grid(grid), K, N, opt);
        ch.name = "brunn-minkowski";
        ch.operation = "brunn_minkowski_check";
        ch.tolerance = r.tol;
        ch.worst = r.worst;
        ch.verdict = r.pass ? Verdict::Pass : Verdict::Fail;
        ch.extra["theta"] = r.theta;
        ch.header = {"t", "mass", "bound", "residual"};
        for (const BrunnMinkowskiEntry& e : r.entries) {
            ch.residuals.push_back(e.residual);
            ch.rows.push_back({e.t, e.mass, e.bound, e.residual});
        }
    } else if (check == "bmk") {
        const bool sharp = c.params.flag("sharp", false);
        const BonnetMyersReport r = bonnet_myers_check(S, K, N, sharp, tol_or(c.cfg, 1e-9));
        ch.name = "bonnet-myers";
        ch.operation = "bonnet_myers_check";
        ch.tolerance = tol_or(c.cfg, 1e-9);
        ch.worst = r.bound - r.max_tau;
        ch.verdict = r.pass ? Verdict::Pass : Verdict::Fail;
        ch.extra["max_tau"] = r.max_tau;
        ch.extra["bound"] = r.bound;
        ch.residuals.push_back(ch.worst);
        ch.header = {"max_tau", "bound", "residual"};
        ch.rows.push_back({r.max_tau, r.bound, ch.worst});
    } else if (check == "poincare") {
        const AchronalSet V{select_points(S, c.params.str("V")), "V"};
        const TransportRelation rel = transport_relation(S, V);
        const RayDecomposition rays = extract_rays(S, rel);
        const std::string profile = c.params.str("u", "tauV");
        std::vector<double> u(S.size(), 0.0);
        for (const Ray& r : rays.rays)
            for (std::size_t k = 0; k < r.points.size(); ++k) {
                const double t = r.t_values[k];
                if (!(t > 0)) continue;
                if (profile == "tauV") u[r.points[k]] = t;
                else if (profile == "sin") u[r.points[k]] = std::sin(3 * t + r.alpha);
                else throw InputError("task.u: expected tauV or sin");
            }
        const double tol = tol_or(c.cfg, 1e-9);
        const PoincareReport r = poincare_check(S, V, u, K, N, rays, tol);
        ch.name = "poincare";
        ch.operation = "poincare_check";
        ch.tolerance = tol;
        ch.worst = r.rhs > 0 ? (r.rhs - r.lhs) / r.rhs : 0.0;
        ch.verdict = r.pass ? Verdict::Pass : Verdict::Fail;
        ch.extra["lhs"] = r.lhs;
        ch.extra["rhs"] = r.rhs;
        ch.extra["lambda_used"] = r.lambda_used;
        ch.extra["lambda_certified"] = r.certified;
        ch.extra["lambda_source"] = r.lambda_source;
        ch.extra["D"] = r.D;
        ch.residuals.push_back(ch.worst);
        ch.header = {"alpha", "lhs", "gradient"};
        for (const auto& [a, l, g] : r.per_ray) ch.rows.push_back({double(a), l, g});
    } else {
        throw InputError("task.check: expected bg, bm, bmk or poincare");
    }
    c.checks.push_back(std::move(ch));
}

RayDecomposition rays_for(TaskContext& c)
{
    if (c.params.has("rays")) return load_rays(c.params.str("rays"));
    if (!c.space) throw InputError("missing field space.path or model (or task.rays)");
    const AchronalSet V{select_points(*c.space, c.params.str("V")), "V"};
    const TransportRelation rel = transport_relation(*c.space, V, c.params.num("eps", -1));
    return extract_rays(*c.space, rel, c.params.num("ray_tol", -1));
}

void task_disintegrate(TaskContext& c)
{
    const RayDecomposition rays = rays_for(c);
    std::vector<double> grid;
    double tmax = 0;
    for (const Ray& r : rays.rays) tmax = std::max(tmax, r.cell_hi.back());
    for (int k = 0; k <= 64; ++k) grid.push_back(tmax * k / 64);
    const LevelMeasures lm = level_measures(rays, grid);

    Check co;
    co.name = "coarea";
    co.module = "disintegration";
    co.operation = "level_measures";
    co.tolerance = tol_or(c.cfg, 1e-3);
    co.worst = -lm.worst_residual;
    co.verdict = lm.worst_residual <= co.tolerance ? Verdict::Pass : Verdict::Fail;
    co.extra["rays"] = rays.rays.size();
    co.extra["splits"] = rays.splits;
    co.extra["total_mass"] = rays.total_mass;
    co.extra["mass_residual"] = lm.mass_residual;
    co.extra["decomposition"] = rays_to_json(rays);
    for (const CoareaCheck& k : lm.checks) co.residuals.push_back(k.residual);
    co.header = {"t", "H"};
    for (std::size_t k = 0; k < grid.size(); ++k) co.rows.push_back({grid[k], lm.H[k]});
    c.checks.push_back(std::move(co));

    if (c.params.has("K") || c.params.has("N")) {
        const double K = c.params.num("K"), N = c.params.num("N");
        const double tol = tol_or(c.cfg, 1e-9);
        const McpReport m = mcp_density_test(rays, K, N, tol);
        Check ch;
        ch.name = "mcp-density";
        ch.module = "disintegration";
        ch.operation = "mcp_density_test";
        ch.tolerance = tol;
        ch.worst = m.worst;
        ch.verdict = m.pass ? Verdict::Pass : Verdict::Fail;
        ch.extra["tested"] = m.tested;
        ch.extra["skipped"] = m.skipped;
        ch.extra["skipped_mass"] = m.skipped_mass;
        if (m.witness)
            ch.extra["witness"] = {{"alpha", m.witness->alpha}, {"bin0", m.witness->bin0}, {"bin1", m.witness->bin1},
                                   {"side", m.witness->side}, {"residual", m.witness->residual}};
        ch.header = {"alpha", "residual"};
        for (const auto& [a, r] : m.ray_residuals) {
            ch.residuals.push_back(r);
            ch.rows.push_back({double(a), r});
        }
        c.checks.push_back(std::move(ch));
    }
}

void task_hawking(TaskContext& c)
{
    const RayDecomposition rays = rays_for(c);
    const double K = c.params.num("K"), N = c.params.num("N");
    const std::string h0 = c.params.str("H0");
    double H0;
    Json est_json;
    if (h0 == "estimate") {
        if (!c.space) throw InputError("task.H0 = estimate needs the space");
        const double t_max = c.params.num("t_max", 0.5);
        const MeanCurvatureEstimate est =
            mean_curvature_estimate(*c.space, rays, std::vector<double>(rays.V.members.size(), 1.0), t_max);
        H0 = est.H0_sample;
        est_json = {{"H0_sample", est.H0_sample},
                    {"fit_window", {est.fit_window.first, est.fit_window.second}},
                    {"residual", est.residual}};
    } else {
        H0 = parse_double(h0, "task.H0");
    }
    const HawkingReport r = hawking_certify(c.space ? *c.space : FiniteCausalSpace(), rays, H0, K, N,
                                            tol_or(c.cfg, 1e-12));
    Check ch;
    ch.name = "hawking";
    ch.module = "disintegration";
    ch.operation = "hawking_certify";
    ch.tolerance = tol_or(c.cfg, 1e-12);
    ch.verdict = r.pass ? Verdict::Pass : Verdict::Fail;
    ch.extra["H0"] = H0;
    ch.extra["sup_tau_V"] = r.sup_tau_V;
    ch.extra["D"] = std::isfinite(r.D) ? Json(r.D) : Json("+inf");
    ch.extra["regime"] = r.regime;
    ch.extra["witness"] = r.witness;
    ch.extra["future_mass"] = r.future_mass;
    if (!est_json.is_null()) ch.extra["mean_curvature"] = est_json;
    ch.worst = std::isfinite(r.D) ? r.D - r.sup_tau_V : -r.future_mass;
    ch.residuals.push_back(ch.worst);
    ch.header = {"H0", "sup_tau_V", "D", "residual"};
    ch.rows.push_back({H0, r.sup_tau_V, r.D, ch.worst});
    c.checks.push_back(std::move(ch));
}

void task_validate(TaskContext& c)
{
    const FiniteCausalSpace& S = *c.space;
    const double eps = c.params.num("eps_rt", default_eps_rt(S));
    const std::vector<Violation> v = validate_axioms(S, eps);
    Check ch;
    ch.name = "axioms";
    ch.module = "causal-space";
    ch.operation = "validate_axioms";
    ch.tolerance = eps;
    ch.verdict = v.empty() ? Verdict::Pass : Verdict::Fail;
    Json list = Json::array();
    for (const Violation& x : v) {
        list.push_back({{"kind", x.kind}, {"i", x.i}, {"j", x.j}, {"k", x.k}, {"defect", x.defect}});
        ch.residuals.push_back(-x.defect);
        ch.worst = std::min(ch.worst, -x.defect);
    }
    ch.extra["violations"] = std::move(list);
    ch.header = {"i", "j", "k", "defect"};
    for (const Violation& x : v) ch.rows.push_back({double(x.i), double(x.j), double(x.k), x.defect});
    c.checks.push_back(std::move(ch));
}

void task_refine(TaskContext& c)
{
    const std::vector<double> spacings = parse_list(c.params.str("spacings"), "task.spacings");
    ExperimentConfig sub = c.cfg;
    const RefinementTable t = refinement_study(sub, spacings);
    c.params.str("certifier", "certify-tmcp");
    Check ch;
    ch.name = "refinement";
    ch.module = "cli-io";
    ch.operation = "refinement_study";
    ch.tolerance = t.rows.back().tolerance;
    ch.worst = -t.rows.back().floor;
    ch.verdict = t.pass ? Verdict::Pass : Verdict::Fail;
    ch.extra["certifier"] = t.certifier;
    ch.extra["order"] = std::isfinite(t.order) ? Json(t.order) : Json(nullptr);
    ch.header = {"spacing", "points", "worst_residual", "floor", "tolerance"};
    for (const RefinementRow& r : t.rows) {
        ch.residuals.push_back(r.worst_residual);
        ch.rows.push_back({r.spacing, double(r.size), r.worst_residual, r.floor, r.tolerance});
    }
    c.checks.push_back(std::move(ch));
}

void dispatch(TaskContext& c)
{
    const std::string& t = c.cfg.task;
    if (t == "solve") task_solve(c);
    else if (t == "certify-tmcp") task_tmcp(c);
    else if (t == "certify-tcd") task_tcd(c);
    else if (t == "compare") task_compare(c);
    else if (t == "disintegrate") task_disintegrate(c);
    else if (t == "hawking") task_hawking(c);
    else if (t == "validate") task_validate(c);
    else if (t == "refine") task_refine(c);
    else throw InputError("task.name: unknown task '" + t + "'");
}

Json config_echo(const ExperimentConfig& cfg)
{
    Json j;
    if (cfg.model)
        j["model"] = {{"kind", cfg.model->kind}, {"dim", cfg.model->dim}, {"kappa", cfg.model->kappa},
                      {"region", cfg.model->region}};
    j["sampler"] = {{"mode", cfg.sampler.mode}, {"spacing", cfg.sampler.spacing}, {"density", cfg.sampler.density}};
    if (cfg.sampler.seed) j["sampler"]["seed"] = *cfg.sampler.seed;
    if (!cfg.space_path.empty()) j["space"] = cfg.space_path;
    j["task"] = cfg.task;
    j["tol"] = cfg.tol;
    j["threads"] = cfg.threads;
    return j;
}

bool needs_space(const ExperimentConfig& cfg)
{
    return !(cfg.task == "hawking" && cfg.params.count("rays") && cfg.params.at("H0") != "estimate");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    ExperimentConfig cfg;
    auto get = [&](const std::string& path) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(path)) return *v;
        return std::nullopt;
    };
    if (tree.get_child_optional("model")) {
        ModelSpec m;
        if (auto v = get("model.kind")) m.kind = *v;
        if (auto v = get("model.dim")) {
            const double d = parse_double(*v, "model.dim");
            if (d != std::floor(d)) throw InputError("model.dim: expected an integer");
            m.dim = int(d);
        }
        if (auto v = get("model.kappa")) m.kappa = parse_double(*v, "model.kappa");
        if (auto v = get("model.region")) m.region = *v;
        else throw InputError("missing field model.region");
        cfg.model = m;
    }
    if (auto v = get("sampler.mode")) cfg.sampler.mode = *v;
    if (auto v = get("sampler.spacing")) cfg.sampler.spacing = parse_double(*v, "sampler.spacing");
    if (auto v = get("sampler.density")) cfg.sampler.density = parse_double(*v, "sampler.density");
    if (auto v = get("sampler.seed")) {
        const double s = parse_double(*v, "sampler.seed");
        if (s < 0 || s != std::floor(s)) throw InputError("sampler.seed: expected a nonnegative integer");
        cfg.sampler.seed = std::uint64_t(s);
    }
    if (auto v = get("space.path")) cfg.space_path = *v;
    if (auto v = get("output.dir")) cfg.out_dir = *v;
    if (auto v = get("output.tol")) cfg.tol = parse_double(*v, "output.tol");
    if (auto task = tree.get_child_optional("task")) {
        for (const auto& [k, v] : *task) {
            if (k == "name") cfg.task = v.data();
            else cfg.params[k] = v.data();
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void validate_config(const ExperimentConfig& cfg)
{
    if (cfg.task.empty()) throw InputError("missing field task.name");
    if (!kTasks.count(cfg.task)) throw InputError("task.name: unknown task '" + cfg.task + "'");
    if (cfg.sampler.mode != "lattice" && cfg.sampler.mode != "sprinkle")
        throw InputError("sampler.mode: expected lattice or sprinkle");
    if (cfg.model && cfg.sampler.mode == "sprinkle" && !cfg.sampler.seed)
        throw InputError("missing field sampler.seed (mandatory for sprinkle mode)");
    if (cfg.model && cfg.sampler.mode == "sprinkle" && !(cfg.sampler.density > 0))
        throw InputError("sampler.density: must be positive for sprinkle mode");
    if (cfg.model && cfg.sampler.mode == "lattice" && !(cfg.sampler.spacing > 0))
        throw InputError("sampler.spacing: must be positive");
    const auto& P = cfg.params;
    auto need = [&](std::initializer_list<const char*> keys) {
        for (const char* k : keys)
            if (!P.count(k)) throw InputError(std::string("missing field task.") + k);
    };
    const std::string& t = cfg.task;
    if (t == "solve") need({"mu", "nu"});
    else if (t == "certify-tmcp") need({"mu0", "x1", "K", "N"});
    else if (t == "certify-tcd") need({"mu0", "mu1", "K", "N"});
    else if (t == "compare") {
        need({"check", "K", "N"});
        const std::string& c = P.at("check");
        if (c == "bg") need({"x0"});
        else if (c == "bm") need({"A0", "A1"});
        else if (c == "poincare") need({"V"});
        else if (c != "bmk") throw InputError("task.check: expected bg, bm, bmk or poincare");
    } else if (t == "disintegrate") {
        if (!P.count("rays")) need({"V"});
    } else if (t == "hawking") {
        need({"H0", "K", "N"});
        if (!P.count("rays")) need({"V"});
    } else if (t == "refine") {
        need({"spacings"});
        if (!cfg.model) throw InputError("missing field model (refine regenerates the space)");
        ExperimentConfig sub = cfg;
        sub.task = P.count("certifier") ? P.at("certifier") : "certify-tmcp";
        if (sub.task == "refine") throw InputError("task.certifier: cannot be refine");
        validate_config(sub);
    }
    if (needs_space(cfg) && !cfg.model && cfg.space_path.empty())
        throw InputError("missing field model (or space.path)");
}

std::shared_ptr<const ModelSpacetime> build_model(const ModelSpec& m)
{
    const Region region = parse_region(m.region, m.dim);
    if (m.kind == "minkowski") return ModelSpacetime::minkowski(m.dim, region);
    if (m.kind == "constant_curvature") return ModelSpacetime::constant_curvature(m.kappa, m.dim, region);
    if (m.kind == "milne_wedge" || m.kind == "milne") return ModelSpacetime::milne_wedge(m.dim, region);
    throw InputError("model.kind: expected minkowski, constant_curvature or milne_wedge");
}

FiniteCausalSpace build_space(const ExperimentConfig& cfg)
{
    if (!cfg.space_path.empty()) return load_space(cfg.space_path);
    if (!cfg.model) throw InputError("missing field model (or space.path)");
    const auto model = build_model(*cfg.model);
    const SamplerConfig sc = cfg.sampler.mode == "sprinkle"
                                 ? SamplerConfig::sprinkle(cfg.sampler.density, cfg.sampler.seed.value_or(0))
                                 : SamplerConfig::lattice(cfg.sampler.spacing);
    return discretize(model, sc);
}

IndexSet select_points(const FiniteCausalSpace& space, const std::string& spec)
{
    const int n = space.size(), d = space.dim();
    IndexSet out;
    if (spec == "all") {
        for (int i = 0; i < n; ++i) out.push_back(i);
        return out;
    }
    if (spec == "hyperboloid") return wedge_hyperboloid(space).members;
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw InputError("selection '" + spec + "': expected kind:arguments");
    const std::string kind = spec.substr(0, colon), arg = spec.substr(colon + 1);
    if (kind == "file") {
        const Json j = load_json(arg);
        if (j.is_object() && j.value("schema", "") == "measure") return measure_from_json(j).support;
        return achronal_from_json(j).members;
    }
    const std::vector<double> v = parse_list(arg, "selection '" + spec + "'");
    if (kind == "points") {
        for (double x : v) {
            if (x != std::floor(x) || x < 0 || x >= n) throw InputError("selection '" + spec + "': bad index");
            out.push_back(int(x));
        }
    } else if (kind == "box") {
        if (int(v.size()) != 2 * d) throw InputError("selection '" + spec + "': box needs 2*dim numbers");
        for (int i = 0; i < n; ++i) {
            bool in = true;
            for (int k = 0; k < d && in; ++k) {
                const double slack = 1e-9 * std::max(1.0, std::abs(v[2 * k + 1] - v[2 * k]));
                in = space.point(i)[k] >= v[2 * k] - slack && space.point(i)[k] <= v[2 * k + 1] + slack;
            }
            if (in) out.push_back(i);
        }
    } else if (kind == "near") {
        if (int(v.size()) != d) throw InputError("selection '" + spec + "': near needs dim coordinates");
        out.push_back(space.snap(v.data()));
    } else if (kind == "level") {
        if (v.size() != 1) throw InputError("selection '" + spec + "': level needs one time value");
        const double slack = 1e-9 * std::max(1.0, std::abs(v[0]));
        for (int i = 0; i < n; ++i)
            if (std::abs(space.point(i)[0] - v[0]) <= slack) out.push_back(i);
    } else {
        throw InputError("selection '" + spec + "': unknown kind '" + kind + "'");
    }
    if (out.empty()) throw InputError("selection '" + spec + "' is empty");
    return out;
}

WeightedMeasure select_measure(const FiniteCausalSpace& space, const std::string& spec)
{
    if (spec.rfind("file:", 0) == 0) {
        const Json j = load_json(spec.substr(5));
        if (j.is_object() && j.value("schema", "") == "measure") {
            WeightedMeasure mu = measure_from_json(j);
            return make_measure(mu.support, mu.mass);
        }
    }
    return restricted_measure(space, select_points(space, spec));
}

RunResult run_experiment(const ExperimentConfig& cfg)
{
    const auto start = std::chrono::steady_clock::now();
    RunResult res;
    Json report;
    report["schema"] = "certification-report";
    report["version"] = kSchemaVersion;
    Json params_echo = Json::object();
    std::vector<Check> checks;
    std::string input_hash;
    try {
        validate_config(cfg);
        report["config"] = config_echo(cfg);
        std::optional<FiniteCausalSpace> space;
        if (needs_space(cfg) || cfg.model || !cfg.space_path.empty()) space = build_space(cfg);
        TaskContext ctx{cfg, space ? &*space : nullptr, nullptr, "", Params(cfg.params, params_echo), {}};
        if (space) {
            ctx.geometry = space->geometry();
            ctx.input_hash = input_hash = space_hash(*space);
            report["space"] = {{"points", space->size()}, {"dim", space->dim()}, {"hash", input_hash}};
        }
        dispatch(ctx);
        checks = std::move(ctx.checks);
        bool any_fail = false, any_vacuous = false;
        for (const Check& c : checks) {
            any_fail |= c.verdict == Verdict::Fail;
            any_vacuous |= c.verdict == Verdict::Vacuous;
        }
        res.exit_code = any_fail ? 2 : (any_vacuous ? 3 : 0);
    } catch (const RegimeError& e) {
        report["error"] = {{"kind", "regime"}, {"message", e.what()}};
        res.exit_code = 3;
    } catch (const Error& e) {
        report["error"] = {{"kind", "input"}, {"message", e.what()}};
        res.exit_code = 4;
    }
    if (!report.contains("config")) report["config"] = config_echo(cfg);
    report["config"]["params"] = params_echo;
    for (const auto& [k, v] : cfg.params)
        if (!params_echo.contains(k)) report["config"]["params"][k] = v;

    Json jchecks = Json::array();
    for (const Check& c : checks) {
        Json j = {{"name", c.name},           {"module", c.module},
                  {"operation", c.operation}, {"input_hash", input_hash},
                  {"tolerance", c.tolerance}, {"worst_residual", c.worst},
                  {"verdict", to_string(c.verdict)}, {"residuals", c.residuals}};
        for (const auto& [k, v] : c.extra.items()) j[k] = v;
        jchecks.push_back(std::move(j));
    }
    report["checks"] = std::move(jchecks);
    report["exit_code"] = res.exit_code;
    report["verdict"] = res.exit_code == 0 ? "PASS" : res.exit_code == 2 ? "FAIL" : res.exit_code == 3 ? "VACUOUS" : "ERROR";
    report["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        const std::string rp = cfg.out_dir + "/report.json";
        save_json(report, rp);
        res.files.push_back(rp);
        for (const Check& c : checks) {
            if (c.header.empty()) continue;
            const std::string cp = cfg.out_dir + "/" + c.name + ".csv";
            write_csv(cp, c.header, c.rows);
            res.files.push_back(cp);
        }
    }
    res.report = std::move(report);
    return res;
}

RefinementTable refinement_study(const ExperimentConfig& cfg, const std::vector<double>& spacings)
{
    if (spacings.size() < 3) throw InputError("task.spacings: refinement needs at least three spacings");
    for (std::size_t k = 1; k < spacings.size(); ++k)
        if (!(spacings[k] < spacings[k - 1])) throw InputError("task.spacings: spacings must decrease");
    if (!cfg.model) throw InputError("missing field model (refine regenerates the space)");
    RefinementTable t;
    ExperimentConfig sub = cfg;
    sub.task = cfg.params.count("certifier") ? cfg.params.at("certifier") : "certify-tmcp";
    sub.out_dir.clear();
    t.certifier = sub.task;
    for (double s : spacings) {
        sub.sampler.spacing = s;
        const FiniteCausalSpace space = build_space(sub);
        Json echo;
        TaskContext ctx{sub, &space, space.geometry(), space_hash(space), Params(sub.params, echo), {}};
        dispatch(ctx);
        RefinementRow row;
        row.spacing = s;
        row.size = space.size();
        row.worst_residual = 0;
        row.verdict = Verdict::Pass;
        for (const Check& c : ctx.checks) {
            row.worst_residual = std::min(row.worst_residual, c.worst);
            row.tolerance = c.tolerance;
            if (c.verdict == Verdict::Fail) row.verdict = Verdict::Fail;
            else if (c.verdict == Verdict::Vacuous && row.verdict == Verdict::Pass) row.verdict = Verdict::Vacuous;
        }
        row.floor = std::max(0.0, -row.worst_residual);
        t.rows.push_back(row);
    }
    // convergence order from rows with a positive floor
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (const RefinementRow& r : t.rows)
        if (r.floor > 0) {
            const double x = std::log(r.spacing), y = std::log(r.floor);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++m;
        }
    t.order = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : std::numeric_limits<double>::quiet_NaN();
    // Floors below a row's tolerance are snapping noise; only growth beyond it counts.
    bool monotone = true;
    for (std::size_t k = 1; k < t.rows.size(); ++k)
        if (t.rows[k].floor > t.rows[k - 1].floor + t.rows[k].tolerance) monotone = false;
    t.pass = monotone && t.rows.back().floor <= t.rows.back().tolerance && t.rows.back().verdict == Verdict::Pass;
    return t;
}

}  // namespace lorentz
