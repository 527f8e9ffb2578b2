#include "lorentz/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "lorentz/errors.hpp"
#include "lorentz/models.hpp"

namespace lorentz {

namespace {

const char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

void check_header(const Json& j, const std::string& schema)
{
    if (!j.is_object()) throw InputError(schema + ": expected a JSON object");
    if (!j.contains("schema") || j["schema"] != schema)
        throw InputError("expected schema '" + schema + "', got " + (j.contains("schema") ? j["schema"].dump() : "none"));
    if (!j.contains("version") || !j["version"].is_number_integer())
        throw VersionError(schema + ": missing schema version (reader supports v" + std::to_string(kSchemaVersion) + ")");
    const int v = j["version"].get<int>();
    if (v != kSchemaVersion)
        throw VersionError(schema + ": file has schema version " + std::to_string(v) + ", reader supports v" +
                           std::to_string(kSchemaVersion));
}

const Json& field(const Json& j, const char* name, const std::string& where)
{
    if (!j.contains(name)) throw InputError(where + ": missing field '" + name + "'");
    return j[name];
}

Json ext_to_json(const ExtReal& v)
{
    if (v.is_plus_infinity()) return "+inf";
    if (v.is_minus_infinity()) return "-inf";
    return v.value();
}

ExtReal ext_from_json(const Json& j)
{
    if (j.is_string()) {
        if (j == "+inf") return ExtReal::plus_infinity();
        if (j == "-inf") return ExtReal::minus_infinity();
        throw InputError("expected a number or '+inf'/'-inf'");
    }
    return ExtReal::finite(j.get<double>());
}

std::shared_ptr<const ModelSpacetime> model_from_json(const Json& m)
{
    const std::string kind = field(m, "kind", "model");
    const int dim = field(m, "dim", "model");
    const Region region = parse_region(field(m, "region", "model"), dim);
    if (kind == "minkowski") return ModelSpacetime::minkowski(dim, region);
    if (kind == "milne_wedge") return ModelSpacetime::milne_wedge(dim, region);
    if (kind == "constant_curvature")
        return ModelSpacetime::constant_curvature(field(m, "kappa", "model").get<double>(), dim, region);
    throw InputError("model: unknown kind '" + kind + "'");
}

}  // namespace

std::string base64_encode(const std::vector<std::uint8_t>& b)
{
    std::string out;
    out.reserve((b.size() + 2) / 3 * 4);
    for (std::size_t i = 0; i < b.size(); i += 3) {
        std::uint32_t v = std::uint32_t(b[i]) << 16;
        if (i + 1 < b.size()) v |= std::uint32_t(b[i + 1]) << 8;
        if (i + 2 < b.size()) v |= b[i + 2];
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += i + 1 < b.size() ? kAlphabet[(v >> 6) & 63] : '=';
        out += i + 2 < b.size() ? kAlphabet[v & 63] : '=';
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& s)
{
    auto val = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    if (s.size() % 4) throw InputError("base64: length is not a multiple of 4");
    std::vector<std::uint8_t> out;
    for (std::size_t i = 0; i < s.size(); i += 4) {
        std::uint32_t v = 0;
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = s[i + k];
            if (c == '=') {
                ++pad;
                v <<= 6;
                continue;
            }
            const int d = val(c);
            if (d < 0 || pad) throw InputError("base64: invalid character");
            v = (v << 6) | std::uint32_t(d);
        }
        out.push_back(std::uint8_t(v >> 16));
        if (pad < 2) out.push_back(std::uint8_t(v >> 8));
        if (pad < 1) out.push_back(std::uint8_t(v));
    }
    return out;
}

std::uint64_t fnv1a64(const std::string& bytes)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t h)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Json space_to_json(const FiniteCausalSpace& space)
{
    const int n = space.size(), d = space.dim();
    Json j;
    j["schema"] = "causal-space";
    j["version"] = kSchemaVersion;
    j["n"] = n;
    j["dim"] = d;
    Json coords = Json::array();
    for (int i = 0; i < n; ++i) {
        Json row = Json::array();
        for (int k = 0; k < d; ++k) row.push_back(space.point(i)[k]);
        coords.push_back(std::move(row));
    }
    j["coords"] = std::move(coords);
    j["weight"] = std::vector<double>(space.weight().data(), space.weight().data() + n);
    if (!space.labels().empty()) j["labels"] = space.labels();
    const SampleInfo& info = space.sample_info();
    j["sample"] = {{"mode", info.mode}, {"spacing", info.spacing}, {"density", info.density}, {"seed", info.seed}};

    const auto model = std::dynamic_pointer_cast<const ModelSpacetime>(space.geometry());
    if (!space.is_dense() && model) {
        j["model"] = {{"kind", model->name()},
                      {"kappa", model->kappa()},
                      {"dim", model->dim()},
                      {"region", format_region(model->region())}};
        return j;
    }
    const CausalMatrix L = space.is_dense() ? space.leq_matrix() : space.materialize_leq();
    const Eigen::MatrixXd T = space.is_dense() ? space.tau_matrix() : space.materialize_tau();
    std::vector<std::uint8_t> bits((std::size_t(n) * n + 7) / 8, 0);
    std::vector<double> tau(std::size_t(n) * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const std::size_t idx = std::size_t(a) * n + b;
            if (L(a, b)) bits[idx / 8] |= std::uint8_t(1u << (idx % 8));
            tau[idx] = T(a, b);
        }
    j["leq"] = base64_encode(bits);
    j["tau"] = std::move(tau);
    return j;
}

FiniteCausalSpace space_from_json(const Json& j)
{
    check_header(j, "causal-space");
    const int n = field(j, "n", "causal-space");
    const int d = field(j, "dim", "causal-space");
    const Json& jc = field(j, "coords", "causal-space");
    const Json& jw = field(j, "weight", "causal-space");
    if (int(jc.size()) != n || int(jw.size()) != n) throw InputError("causal-space: coords/weight length differs from n");
    Coords coords(n, d);
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) {
        if (int(jc[i].size()) != d) throw InputError("causal-space: coordinate row " + std::to_string(i) + " has wrong length");
        for (int k = 0; k < d; ++k) coords(i, k) = jc[i][k].get<double>();
        w[i] = jw[i].get<double>();
    }
    std::vector<std::string> labels;
    if (j.contains("labels")) labels = j["labels"].get<std::vector<std::string>>();
    SampleInfo info;
    if (j.contains("sample")) {
        const Json& s = j["sample"];
        info.mode = s.value("mode", std::string());
        info.spacing = s.value("spacing", 0.0);
        info.density = s.value("density", 0.0);
        info.seed = s.value("seed", std::uint64_t(0));
    }

    if (j.contains("model")) {
        const auto model = model_from_json(j["model"]);
        // Regenerate the sample to recover its lookup structure when it is reproducible.
        if (info.mode == "lattice" || info.mode == "sprinkle") {
            try {
                const SamplerConfig cfg = info.mode == "lattice" ? SamplerConfig::lattice(info.spacing)
                                                                 : SamplerConfig::sprinkle(info.density, info.seed);
                FiniteCausalSpace regen = discretize(model, cfg);
                if (regen.size() == n && regen.coords() == coords && regen.weight() == w) {
                    if (!labels.empty()) {
                        FiniteCausalSpace out(regen.coords(), regen.weight(), model, labels);
                        out.set_locator(regen.locator());
                        out.set_sample_info(regen.sample_info());
                        return out;
                    }
                    return regen;
                }
            } catch (const Error&) {
            }
        }
        FiniteCausalSpace out(std::move(coords), std::move(w), model, std::move(labels));
        out.set_sample_info(info);
        return out;
    }

    const std::vector<std::uint8_t> bits = base64_decode(field(j, "leq", "causal-space").get<std::string>());
    const Json& jt = field(j, "tau", "causal-space");
    if (bits.size() != (std::size_t(n) * n + 7) / 8 || jt.size() != std::size_t(n) * n)
        throw InputError("causal-space: matrix sizes do not match n");
    CausalMatrix L(n, n);
    Eigen::MatrixXd T(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const std::size_t idx = std::size_t(a) * n + b;
            L(a, b) = (bits[idx / 8] >> (idx % 8)) & 1u;
            T(a, b) = jt[idx].get<double>();
        }
    FiniteCausalSpace out(std::move(coords), std::move(w), std::move(L), std::move(T), std::move(labels));
    out.set_sample_info(info);
    return out;
}

std::string space_hash(const FiniteCausalSpace& space)
{
    return hex64(fnv1a64(space_to_json(space).dump()));
}

Json measure_to_json(const WeightedMeasure& mu)
{
    return {{"schema", "measure"}, {"version", kSchemaVersion}, {"support", mu.support}, {"mass", mu.mass}};
}

WeightedMeasure measure_from_json(const Json& j)
{
    check_header(j, "measure");
    WeightedMeasure mu;
    mu.support = field(j, "support", "measure").get<IndexSet>();
    mu.mass = field(j, "mass", "measure").get<std::vector<double>>();
    if (mu.support.size() != mu.mass.size()) throw InputError("measure: support and mass lengths differ");
    return mu;
}

Json coupling_to_json(const Coupling& c)
{
    Json pairs = Json::array();
    for (const PlanPair& e : c.pairs) pairs.push_back(Json::array({e.i, e.j, e.mass}));
    return {{"schema", "coupling"}, {"version", kSchemaVersion},     {"p", c.p},
            {"value", ext_to_json(c.value)}, {"mu", measure_to_json(c.mu)}, {"nu", measure_to_json(c.nu)},
            {"pairs", std::move(pairs)}};
}

Coupling coupling_from_json(const Json& j)
{
    check_header(j, "coupling");
    Coupling c;
    c.p = field(j, "p", "coupling").get<double>();
    c.value = ext_from_json(field(j, "value", "coupling"));
    c.mu = measure_from_json(field(j, "mu", "coupling"));
    c.nu = measure_from_json(field(j, "nu", "coupling"));
    for (const Json& e : field(j, "pairs", "coupling")) {
        if (e.size() != 3) throw InputError("coupling: pairs must be [i, j, mass]");
        c.pairs.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
    }
    return c;
}

Json achronal_to_json(const AchronalSet& V)
{
    return {{"schema", "achronal-set"}, {"version", kSchemaVersion}, {"members", V.members}, {"label", V.label}};
}

AchronalSet achronal_from_json(const Json& j)
{
    if (j.is_array()) return {j.get<IndexSet>(), ""};
    check_header(j, "achronal-set");
    return {field(j, "members", "achronal-set").get<IndexSet>(), j.value("label", std::string())};
}

Json rays_to_json(const RayDecomposition& rd)
{
    Json rays = Json::array();
    for (const Ray& r : rd.rays) {
        Json bins = Json::array();
        for (const DensityBin& b : r.h_samples) bins.push_back(Json::array({b.lo, b.hi, b.mass, b.h}));
        rays.push_back({{"alpha", r.alpha},
                        {"points", r.points},
                        {"t_values", r.t_values},
                        {"weights", r.weights},
                        {"cell_lo", r.cell_lo},
                        {"cell_hi", r.cell_hi},
                        {"mass", r.mass},
                        {"q_weight", r.q_weight},
                        {"foot", r.foot},
                        {"h_samples", std::move(bins)}});
    }
    return {{"schema", "rays"},
            {"version", kSchemaVersion},
            {"V", achronal_to_json(rd.V)},
            {"rays", std::move(rays)},
            {"endpoints_a", rd.endpoints_a},
            {"endpoints_b", rd.endpoints_b},
            {"unassigned", rd.unassigned},
            {"total_mass", rd.total_mass},
            {"spacing", rd.spacing},
            {"splits", rd.splits},
            {"log", rd.log}};
}

RayDecomposition rays_from_json(const Json& j)
{
    check_header(j, "rays");
    RayDecomposition rd;
    rd.V = achronal_from_json(field(j, "V", "rays"));
    for (const Json& jr : field(j, "rays", "rays")) {
        Ray r;
        r.alpha = field(jr, "alpha", "rays.ray");
        r.points = field(jr, "points", "rays.ray").get<IndexSet>();
        r.t_values = field(jr, "t_values", "rays.ray").get<std::vector<double>>();
        r.weights = field(jr, "weights", "rays.ray").get<std::vector<double>>();
        r.cell_lo = field(jr, "cell_lo", "rays.ray").get<std::vector<double>>();
        r.cell_hi = field(jr, "cell_hi", "rays.ray").get<std::vector<double>>();
        r.mass = field(jr, "mass", "rays.ray");
        r.q_weight = field(jr, "q_weight", "rays.ray");
        r.foot = field(jr, "foot", "rays.ray");
        const std::size_t m = r.points.size();
        if (r.t_values.size() != m || r.weights.size() != m || r.cell_lo.size() != m || r.cell_hi.size() != m)
            throw InputError("rays: per-point arrays of ray " + std::to_string(r.alpha) + " differ in length");
        for (const Json& b : field(jr, "h_samples", "rays.ray"))
            r.h_samples.push_back({b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()});
        rd.rays.push_back(std::move(r));
    }
    rd.endpoints_a = field(j, "endpoints_a", "rays").get<IndexSet>();
    rd.endpoints_b = field(j, "endpoints_b", "rays").get<IndexSet>();
    rd.unassigned = field(j, "unassigned", "rays").get<IndexSet>();
    rd.total_mass = field(j, "total_mass", "rays");
    rd.spacing = field(j, "spacing", "rays");
    rd.splits = field(j, "splits", "rays");
    rd.log = field(j, "log", "rays").get<std::vector<std::string>>();
    return rd;
}

Json load_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw InputError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void save_json(const Json& j, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << j.dump(1) << '\n';
}

void save_space(const FiniteCausalSpace& space, const std::string& path) { save_json(space_to_json(space), path); }
FiniteCausalSpace load_space(const std::string& path) { return space_from_json(load_json(path)); }
void save_coupling(const Coupling& c, const std::string& path) { save_json(coupling_to_json(c), path); }
Coupling load_coupling(const std::string& path) { return coupling_from_json(load_json(path)); }
void save_rays(const RayDecomposition& r, const std::string& path) { save_json(rays_to_json(r), path); }
RayDecomposition load_rays(const std::string& path) { return rays_from_json(load_json(path)); }

FiniteCausalSpace io_roundtrip(const FiniteCausalSpace& space, const std::string& path)
{
    save_space(space, path);
    return load_space(path);
}

Coupling io_roundtrip(const Coupling& c, const std::string& path)
{
    save_coupling(c, path);
    return load_coupling(path);
}

RayDecomposition io_roundtrip(const RayDecomposition& r, const std::string& path)
{
    save_rays(r, path);
    return load_rays(path);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows)
{
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
    out << '\n';
    char buf[32];
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", row[k]);
            out << (k ? "," : "") << buf;
        }
        out << '\n';
    }
}

}  // namespace lorentz
