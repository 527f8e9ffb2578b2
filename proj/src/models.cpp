#include "lorentz/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "lorentz/coefficients.hpp"
#include "lorentz/errors.hpp"

namespace lorentz {

namespace {

constexpr double kPi = std::numbers::pi;

double sqr(double x) { return x * x; }

double spatial_norm(const double* x, int n)
{
    double s = 0;
    for (int k = 1; k < n; ++k) s += x[k] * x[k];
    return std::sqrt(s);
}

// sin(θ)/θ and sinh(θ)/θ with the removable singularity at 0.
double sinc(double th) { return std::abs(th) < 1e-6 ? 1.0 - th * th / 6.0 : std::sin(th) / th; }
double sinhc(double th) { return std::abs(th) < 1e-6 ? 1.0 + th * th / 6.0 : std::sinh(th) / th; }

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<double> parse_numbers(const std::string& body)
{
    std::vector<double> out;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InputError("region: cannot parse number '" + item + "'");
        }
    }
    return out;
}

}  // namespace

Region Region::box(std::vector<double> lo, std::vector<double> hi)
{
    Region r;
    r.type = Type::Box;
    r.lo = std::move(lo);
    r.hi = std::move(hi);
    return r;
}

Region Region::diamond(double size)
{
    Region r;
    r.type = Type::Diamond;
    r.size = size;
    return r;
}

Region Region::cone(std::vector<double> apex, double radius, double rapidity)
{
    Region r;
    r.type = Type::Cone;
    r.apex = std::move(apex);
    r.radius = radius;
    r.rapidity = rapidity;
    return r;
}

Region Region::wedge(double rapidity, double rho_min)
{
    Region r;
    r.type = Type::Wedge;
    r.rapidity = rapidity;
    r.rho_min = rho_min;
    return r;
}

Region parse_region(const std::string& text, int dim)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw InputError("region: expected 'type:params', got '" + text + "'");
    const std::string type = text.substr(0, colon);
    const std::vector<double> v = parse_numbers(text.substr(colon + 1));
    if (type == "box") {
        if (int(v.size()) != 2 * dim) throw InputError("region: box needs 2*dim numbers");
        std::vector<double> lo, hi;
        for (int k = 0; k < dim; ++k) {
            lo.push_back(v[2 * k]);
            hi.push_back(v[2 * k + 1]);
        }
        return Region::box(lo, hi);
    }
    if (type == "diamond") {
        if (v.size() != 1) throw InputError("region: diamond needs one size");
        return Region::diamond(v[0]);
    }
    if (type == "cone") {
        if (v.size() != 2 && int(v.size()) != 2 + dim)
            throw InputError("region: cone needs radius,rapidity[,apex coordinates]");
        std::vector<double> apex(dim, 0.0);
        if (v.size() > 2) apex.assign(v.begin() + 2, v.end());
        return Region::cone(apex, v[0], v[1]);
    }
    if (type == "wedge") {
        if (v.empty() || v.size() > 2) throw InputError("region: wedge needs rapidity[,rho_min]");
        return Region::wedge(v[0], v.size() == 2 ? v[1] : 0.0);
    }
    throw InputError("region: unknown type '" + type + "'");
}

std::string format_region(const Region& r)
{
    std::ostringstream os;
    os.precision(17);
    switch (r.type) {
    case Region::Type::Box:
        os << "box:";
        for (std::size_t k = 0; k < r.lo.size(); ++k) os << (k ? "," : "") << r.lo[k] << "," << r.hi[k];
        break;
    case Region::Type::Diamond: os << "diamond:" << r.size; break;
    case Region::Type::Cone:
        os << "cone:" << r.radius << "," << r.rapidity;
        if (std::any_of(r.apex.begin(), r.apex.end(), [](double a) { return a != 0.0; }))
            for (double a : r.apex) os << "," << a;
        break;
    case Region::Type::Wedge: os << "wedge:" << r.rapidity << "," << r.rho_min; break;
    }
    return os.str();
}

ModelSpacetime::ModelSpacetime(ModelKind kind, double kappa, int dim, Region region)
    : kind_(kind), kappa_(kappa), dim_(dim), region_(std::move(region))
{
    if (dim_ < 2) throw DomainError("model: dim must be at least 2");
    if (kind_ == ModelKind::ConstantCurvature && kappa_ != 0) ell_ = 1.0 / std::sqrt(std::abs(kappa_));
    validate_region();
    if (kind_ == ModelKind::ConstantCurvature && kappa_ != 0) run_trust_gate();
}

std::shared_ptr<const ModelSpacetime> ModelSpacetime::minkowski(int dim, Region region)
{
    return std::make_shared<ModelSpacetime>(ModelKind::Minkowski, 0.0, dim, std::move(region));
}

std::shared_ptr<const ModelSpacetime> ModelSpacetime::constant_curvature(double kappa, int dim, Region region)
{
    return std::make_shared<ModelSpacetime>(ModelKind::ConstantCurvature, kappa, dim, std::move(region));
}

std::shared_ptr<const ModelSpacetime> ModelSpacetime::milne_wedge(int dim, Region region)
{
    return std::make_shared<ModelSpacetime>(ModelKind::MilneWedge, 0.0, dim, std::move(region));
}

std::string ModelSpacetime::name() const
{
    switch (kind_) {
    case ModelKind::Minkowski: return "minkowski";
    case ModelKind::MilneWedge: return "milne_wedge";
    default: return "constant_curvature";
    }
}

void ModelSpacetime::validate_region() const
{
    const Region& r = region_;
    switch (r.type) {
    case Region::Type::Box:
        if (int(r.lo.size()) != dim_ || int(r.hi.size()) != dim_)
            throw DomainError("region: box bounds must have dim entries");
        for (int k = 0; k < dim_; ++k)
            if (!(r.lo[k] < r.hi[k])) throw DomainError("region: empty box");
        break;
    case Region::Type::Diamond:
        if (!(r.size > 0)) throw DomainError("region: diamond size must be positive");
        break;
    case Region::Type::Cone:
    case Region::Type::Wedge:
        if (dim_ > 3) throw DomainError("region: cone and wedge regions support dim 2 and 3");
        if (!(r.rapidity > 0)) throw DomainError("region: rapidity must be positive");
        if (r.type == Region::Type::Cone) {
            if (!(r.radius > 0)) throw DomainError("region: cone radius must be positive");
            if (int(r.apex.size()) != dim_) throw DomainError("region: cone apex must have dim entries");
        } else if (!(r.rho_min >= 0 && r.rho_min < 1)) {
            throw DomainError("region: wedge rho_min must lie in [0,1)");
        }
        break;
    }
    if (kind_ == ModelKind::ConstantCurvature && kappa_ != 0) {
        if (r.type != Region::Type::Box && r.type != Region::Type::Diamond)
            throw DomainError("region: constant curvature models use box or diamond regions");
        std::vector<double> lo, hi;
        bounding_box(lo, hi);
        if (kappa_ < 0) {
            for (int k = 1; k < dim_; ++k)
                if (std::max(std::abs(lo[k]), std::abs(hi[k])) >= kPi * ell_ * 0.99)
                    throw DomainError("region: de Sitter region exceeds the normal chart");
        } else if (hi[0] - lo[0] >= kPi * ell_) {
            throw DomainError("region: anti-de Sitter region is longer than the focal time pi*ell");
        }
    }
    if (kind_ == ModelKind::MilneWedge) {
        if (r.type == Region::Type::Box) {
            // a box is inside the open past cone iff all corners are
            for (int mask = 0; mask < (1 << dim_); ++mask) {
                double t = 0, s = 0;
                for (int k = 0; k < dim_; ++k) {
                    const double c = (mask >> k) & 1 ? r.hi[k] : r.lo[k];
                    if (k == 0) t = c;
                    else s += c * c;
                }
                if (!(-t > std::sqrt(s))) throw DomainError("region: Milne box leaves the past cone of the origin");
            }
        } else if (r.type != Region::Type::Wedge) {
            throw DomainError("region: Milne model needs a wedge or box region");
        }
    }

    // geodesic convexity on causal pairs, sampled
    std::vector<double> lo, hi;
    bounding_box(lo, hi);
    std::mt19937_64 rng(12345);
    std::vector<Eigen::VectorXd> pts;
    for (int tries = 0; tries < 4000 && pts.size() < 60; ++tries) {
        Eigen::VectorXd x(dim_);
        for (int k = 0; k < dim_; ++k) x[k] = std::uniform_real_distribution<double>(lo[k], hi[k])(rng);
        if (contains(x.data(), 0.0)) pts.push_back(x);
    }
    const double scale = std::max(1.0, hi[0] - lo[0]);
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = 0; b < pts.size(); ++b) {
            if (a == b || tau(pts[a].data(), pts[b].data()) <= 0) continue;
            for (double t : {0.25, 0.5, 0.75}) {
                const Point m = interpolate(pts[a].data(), pts[b].data(), t);
                if (!contains(m.data(), 1e-7 * scale)) {
                    std::ostringstream os;
                    os << "region: not geodesically convex, intermediate point of ("
                       << pts[a].transpose() << ") and (" << pts[b].transpose() << ") leaves the region";
                    if (kind_ == ModelKind::ConstantCurvature && kappa_ != 0) os << " (causal diamonds are convex)";
                    throw DomainError(os.str());
                }
            }
        }
}

void ModelSpacetime::bounding_box(std::vector<double>& lo, std::vector<double>& hi) const
{
    const Region& r = region_;
    lo.assign(dim_, 0.0);
    hi.assign(dim_, 0.0);
    switch (r.type) {
    case Region::Type::Box:
        lo = r.lo;
        hi = r.hi;
        break;
    case Region::Type::Diamond: {
        const double T = std::sqrt(2.0) * r.size;
        hi[0] = T;
        for (int k = 1; k < dim_; ++k) {
            lo[k] = -T / 2;
            hi[k] = T / 2;
        }
        break;
    }
    case Region::Type::Cone:
        for (int k = 0; k < dim_; ++k) lo[k] = hi[k] = r.apex[k];
        hi[0] += r.radius * std::cosh(r.rapidity);
        for (int k = 1; k < dim_; ++k) {
            lo[k] -= r.radius * std::sinh(r.rapidity);
            hi[k] += r.radius * std::sinh(r.rapidity);
        }
        break;
    case Region::Type::Wedge:
        lo[0] = -std::cosh(r.rapidity);
        hi[0] = 0.0;
        for (int k = 1; k < dim_; ++k) {
            lo[k] = -std::sinh(r.rapidity);
            hi[k] = std::sinh(r.rapidity);
        }
        break;
    }
}

bool ModelSpacetime::contains(const double* x, double tol) const
{
    const Region& r = region_;
    switch (r.type) {
    case Region::Type::Box:
        for (int k = 0; k < dim_; ++k)
            if (x[k] < r.lo[k] - tol || x[k] > r.hi[k] + tol) return false;
        return true;
    case Region::Type::Diamond: {
        const double T = std::sqrt(2.0) * r.size;
        const double s = spatial_norm(x, dim_);
        if (kind_ != ModelKind::ConstantCurvature || kappa_ == 0) return x[0] >= s - tol && T - x[0] >= s - tol;
        // causal diamond of the model between the origin and (T, 0)
        std::vector<double> o(dim_, 0.0), top(dim_, 0.0);
        top[0] = T;
        const double l2 = ell_ * ell_;
        const Eigen::VectorXd X = embed(x);
        const double a = inner(embed(o.data()), X) / l2, b = inner(X, embed(top.data())) / l2;
        const double slack = tol / std::max(ell_, 1e-300);
        if (x[0] < -tol || x[0] > T + tol) return false;
        if (kappa_ < 0) return a >= 1.0 - slack && b >= 1.0 - slack;
        return a >= -1.0 - slack && b >= -1.0 - slack;
    }
    case Region::Type::Cone: {
        const double dt = x[0] - r.apex[0];
        double s2 = 0;
        for (int k = 1; k < dim_; ++k) s2 += sqr(x[k] - r.apex[k]);
        const double s = std::sqrt(s2);
        if (dt < s - tol) return false;
        if (s > std::tanh(r.rapidity) * dt + tol) return false;
        return std::sqrt(std::max(0.0, dt * dt - s2)) <= r.radius + tol;
    }
    case Region::Type::Wedge: {
        const double p = -x[0];
        const double s = spatial_norm(x, dim_);
        if (p < s - tol) return false;
        if (s > std::tanh(r.rapidity) * p + tol) return false;
        const double rho = std::sqrt(std::max(0.0, p * p - s * s));
        return rho <= 1.0 + tol && rho >= r.rho_min - tol && rho > 0;
    }
    }
    return false;
}

double ModelSpacetime::curved_volume() const
{
    // midpoint rule on the chart bounding box
    const int n = dim_;
    std::vector<double> lo, hi;
    bounding_box(lo, hi);
    const int m = n <= 2 ? 256 : 48;
    long total = 1;
    for (int k = 0; k < n; ++k) total *= m;
    double sum = 0, cell = 1;
    for (int k = 0; k < n; ++k) cell *= (hi[k] - lo[k]) / m;
    const bool box = region_.type == Region::Type::Box;
    std::vector<double> x(n);
    for (long idx = 0; idx < total; ++idx) {
        long q = idx;
        for (int k = 0; k < n; ++k) {
            x[k] = lo[k] + (double(q % m) + 0.5) * (hi[k] - lo[k]) / m;
            q /= m;
        }
        if (box || contains(x.data(), 0.0)) sum += volume_density(x.data());
    }
    return sum * cell;
}

double ModelSpacetime::region_volume() const
{
    const Region& r = region_;
    const int n = dim_;
    auto angular = [&]() {
        return n == 2 ? 2.0 * r.rapidity : 2.0 * kPi * (std::cosh(r.rapidity) - 1.0);
    };
    switch (r.type) {
    case Region::Type::Diamond:
        if (kind_ == ModelKind::ConstantCurvature && kappa_ != 0) return curved_volume();
        {
            const double T = std::sqrt(2.0) * r.size;
            const double c = std::pow(kPi, (n - 1) / 2.0) / (std::tgamma((n + 1) / 2.0) * n * std::pow(2.0, n - 1));
            return c * std::pow(T, n);
        }
    case Region::Type::Box: {
        if (kind_ != ModelKind::ConstantCurvature || kappa_ == 0) {
            double v = 1;
            for (int k = 0; k < n; ++k) v *= r.hi[k] - r.lo[k];
            return v;
        }
        return curved_volume();
    }
    case Region::Type::Cone: return std::pow(r.radius, n) / n * angular();
    case Region::Type::Wedge: return (1.0 - std::pow(r.rho_min, n)) / n * angular();
    }
    return 0;
}

Eigen::VectorXd ModelSpacetime::embed(const double* x) const
{
    const int n = dim_;
    const double l = ell_;
    Eigen::VectorXd X(n + 1);
    const double r = spatial_norm(x, n);
    if (kappa_ < 0) {
        // dS: X0 = ℓ sinh(t/ℓ), X_{1..n} = ℓ cosh(t/ℓ) ω, ω in normal coordinates of S^{n-1}
        const double th = r / l;
        const double ch = std::cosh(x[0] / l);
        X[0] = l * std::sinh(x[0] / l);
        X[1] = l * ch * std::cos(th);
        const double f = l * ch * sinc(th) / l;  // ℓ cosh · sin(θ)/r
        for (int k = 1; k < n; ++k) X[k + 1] = f * x[k];
    } else {
        // AdS: X0 = ℓ cosh(r/ℓ) cos(t/ℓ), X1 = ℓ cosh(r/ℓ) sin(t/ℓ), X_{2..n} = ℓ sinh(r/ℓ) x̂
        const double ch = std::cosh(r / l);
        X[0] = l * ch * std::cos(x[0] / l);
        X[1] = l * ch * std::sin(x[0] / l);
        const double f = sinhc(r / l);
        for (int k = 1; k < n; ++k) X[k + 1] = f * x[k];
    }
    return X;
}

Point ModelSpacetime::chart(const Eigen::VectorXd& X) const
{
    const int n = dim_;
    const double l = ell_;
    Point x(n);
    double s2 = 0;
    for (int k = 2; k <= n; ++k) s2 += X[k] * X[k];
    const double s = std::sqrt(s2);
    if (kappa_ < 0) {
        x[0] = l * std::asinh(X[0] / l);
        const double th = std::atan2(s, X[1]);
        const double f = s > 0 ? l * th / s : l / std::max(X[1], 1e-300);
        for (int k = 1; k < n; ++k) x[k] = f * X[k + 1];
    } else {
        x[0] = l * std::atan2(X[1], X[0]);
        const double r = l * std::asinh(s / l);
        const double f = s > 0 ? r / s : 1.0;
        for (int k = 1; k < n; ++k) x[k] = f * X[k + 1];
    }
    return x;
}

double ModelSpacetime::inner(const Eigen::VectorXd& X, const Eigen::VectorXd& Y) const
{
    double s = kappa_ < 0 ? -X[0] * Y[0] : -X[0] * Y[0] - X[1] * Y[1];
    for (int k = kappa_ < 0 ? 1 : 2; k <= dim_; ++k) s += X[k] * Y[k];
    return s;
}

bool ModelSpacetime::leq(const double* x, const double* y) const
{
    const int n = dim_;
    bool same = true;
    for (int k = 0; k < n; ++k) same = same && x[k] == y[k];
    if (same) return true;
    if (y[0] < x[0]) return false;
    if (kind_ != ModelKind::ConstantCurvature || kappa_ == 0) {
        const double dt = y[0] - x[0];
        double s2 = 0;
        for (int k = 1; k < n; ++k) s2 += sqr(y[k] - x[k]);
        return dt * dt - s2 >= -1e-12 * (dt * dt + s2);
    }
    const double l2 = ell_ * ell_;
    const double c = inner(embed(x), embed(y)) / l2;
    if (kappa_ < 0) return c >= 1.0 - 1e-12;
    return c >= -1.0 - 1e-12 && y[0] - x[0] < kPi * ell_;
}

double ModelSpacetime::tau(const double* x, const double* y) const
{
    const int n = dim_;
    if (y[0] <= x[0]) return 0.0;
    if (kind_ != ModelKind::ConstantCurvature || kappa_ == 0) {
        const double dt = y[0] - x[0];
        double s2 = 0;
        for (int k = 1; k < n; ++k) s2 += sqr(y[k] - x[k]);
        const double q = dt * dt - s2;
        return q > 1e-12 * (dt * dt + s2) ? std::sqrt(q) : 0.0;
    }
    const double l2 = ell_ * ell_;
    const double c = inner(embed(x), embed(y)) / l2;
    if (kappa_ < 0) return c > 1.0 + 1e-12 ? ell_ * std::acosh(c) : 0.0;
    if (y[0] - x[0] >= kPi * ell_) return 0.0;
    return -c < 1.0 - 1e-12 && -c >= -1.0 ? ell_ * std::acos(-c) : 0.0;
}

Point ModelSpacetime::interpolate(const double* x, const double* y, double t) const
{
    const int n = dim_;
    if (kind_ != ModelKind::ConstantCurvature || kappa_ == 0) {
        Point p(n);
        for (int k = 0; k < n; ++k) p[k] = (1.0 - t) * x[k] + t * y[k];
        return p;
    }
    const double T = tau(x, y) / ell_;
    if (T <= 0) throw DomainError("geodesic_interpolate: pair is not timelike");
    const Eigen::VectorXd X = embed(x), Y = embed(y);
    Eigen::VectorXd Z;
    if (kappa_ < 0) Z = (std::sinh((1 - t) * T) * X + std::sinh(t * T) * Y) / std::sinh(T);
    else Z = (std::sin((1 - t) * T) * X + std::sin(t * T) * Y) / std::sin(T);
    Point p = chart(Z);
    // keep the endpoints exact
    if (t == 0) for (int k = 0; k < n; ++k) p[k] = x[k];
    if (t == 1) for (int k = 0; k < n; ++k) p[k] = y[k];
    return p;
}

Eigen::MatrixXd ModelSpacetime::metric(const double* x) const
{
    const int n = dim_;
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
    g(0, 0) = -1;
    if (kind_ != ModelKind::ConstantCurvature || kappa_ == 0) return g;
    const double l = ell_;
    const double r = spatial_norm(x, n);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n - 1);
    if (r > 0)
        for (int k = 1; k < n; ++k) u[k - 1] = x[k] / r;
    const Eigen::MatrixXd P = u * u.transpose();
    const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(n - 1, n - 1) - P;
    if (kappa_ < 0) {
        const double a = sqr(std::cosh(x[0] / l));
        g.bottomRightCorner(n - 1, n - 1) = a * (P + sqr(sinc(r / l)) * Q);
    } else {
        g(0, 0) = -sqr(std::cosh(r / l));
        g.bottomRightCorner(n - 1, n - 1) = P + sqr(sinhc(r / l)) * Q;
    }
    return g;
}

double ModelSpacetime::volume_density(const double* x) const
{
    if (kind_ != ModelKind::ConstantCurvature || kappa_ == 0) return 1.0;
    return std::sqrt(std::abs(metric(x).determinant()));
}

namespace {

// Γ^a_bc by central differences of the chart metric.
std::vector<Eigen::MatrixXd> christoffel(const ModelSpacetime& m, const Eigen::VectorXd& x)
{
    const int n = m.dim();
    const double h = 1e-6;
    std::vector<Eigen::MatrixXd> dg(n);
    for (int c = 0; c < n; ++c) {
        Eigen::VectorXd xp = x, xm = x;
        xp[c] += h;
        xm[c] -= h;
        dg[c] = (m.metric(xp.data()) - m.metric(xm.data())) / (2 * h);
    }
    const Eigen::MatrixXd ginv = m.metric(x.data()).inverse();
    std::vector<Eigen::MatrixXd> G(n, Eigen::MatrixXd::Zero(n, n));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                double s = 0;
                for (int d = 0; d < n; ++d) s += ginv(a, d) * (dg[b](d, c) + dg[c](d, b) - dg[d](b, c));
                G[a](b, c) = 0.5 * s;
            }
    return G;
}

Eigen::VectorXd geodesic_rhs(const ModelSpacetime& m, const Eigen::VectorXd& s)
{
    const int n = m.dim();
    const Eigen::VectorXd x = s.head(n), v = s.tail(n);
    const auto G = christoffel(m, x);
    Eigen::VectorXd out(2 * n);
    out.head(n) = v;
    for (int a = 0; a < n; ++a) out[n + a] = -v.dot(G[a] * v);
    return out;
}

}  // namespace

Point shoot_geodesic(const ModelSpacetime& model, const Point& x, const Point& v, double s, int steps)
{
    const int n = model.dim();
    Eigen::VectorXd st(2 * n);
    st.head(n) = x;
    st.tail(n) = v;
    const double h = s / steps;
    for (int i = 0; i < steps; ++i) {
        const Eigen::VectorXd k1 = geodesic_rhs(model, st);
        const Eigen::VectorXd k2 = geodesic_rhs(model, st + 0.5 * h * k1);
        const Eigen::VectorXd k3 = geodesic_rhs(model, st + 0.5 * h * k2);
        const Eigen::VectorXd k4 = geodesic_rhs(model, st + h * k3);
        st += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return st.head(n);
}

void ModelSpacetime::run_trust_gate()
{
    std::vector<double> lo, hi;
    bounding_box(lo, hi);
    std::mt19937_64 rng(777);
    const double s = std::min(0.7 * ell_, 0.5 * (hi[0] - lo[0]));
    trusted_ = true;
    for (int trial = 0; trial < 4 && trusted_; ++trial) {
        Point x(dim_), u(dim_);
        for (int k = 0; k < dim_; ++k) {
            const double c = 0.5 * (lo[k] + hi[k]), w = 0.25 * (hi[k] - lo[k]);
            x[k] = (k == 0 ? lo[0] + 0.1 * (hi[0] - lo[0]) : c) +
                   (k == 0 ? 0.0 : std::uniform_real_distribution<double>(-w, w)(rng));
        }
        u[0] = 1.0;
        for (int k = 1; k < dim_; ++k) u[k] = std::uniform_real_distribution<double>(-0.3, 0.3)(rng);
        const Eigen::MatrixXd g = metric(x.data());
        const double norm2 = -u.dot(g * u);
        if (norm2 <= 0) continue;
        const Point v = u / std::sqrt(norm2);
        const Point y = shoot_geodesic(*this, x, v, s);
        const Point mid = shoot_geodesic(*this, x, v, 0.3 * s);
        const double err_tau = std::abs(tau(x.data(), y.data()) - s);
        const double err_mid = (interpolate(x.data(), y.data(), 0.3) - mid).norm();
        trusted_ = err_tau <= 1e-6 && err_mid <= 1e-6;
    }
}

double model_tau(const ModelSpacetime& model, const Point& x, const Point& y)
{
    if (x.size() != model.dim() || y.size() != model.dim()) throw DomainError("model_tau: dimension mismatch");
    if (!model.contains(x.data(), 1e-9) || !model.contains(y.data(), 1e-9))
        throw DomainError("model_tau: point outside region");
    return model.tau(x.data(), y.data());
}

double model_radial_density(const ModelSpacetime& model, double r)
{
    if (!(r >= 0)) throw DomainError("model_radial_density: r must be nonnegative");
    const double kappa = model.kind() == ModelKind::ConstantCurvature ? model.kappa() : 0.0;
    if (kappa > 0 && r * std::sqrt(kappa) >= kPi)
        throw DomainError("model_radial_density: r beyond the conjugate radius");
    const double s = s_c_coeff(kappa, r).first;
    return std::pow(s, model.dim() - 1);
}

Point geodesic_interpolate(const ModelSpacetime& model, const Point& x, const Point& y, double t)
{
    if (!(t >= 0 && t <= 1)) throw DomainError("geodesic_interpolate: t must lie in [0,1]");
    if (model.tau(x.data(), y.data()) <= 0) throw DomainError("geodesic_interpolate: pair is not timelike");
    return model.interpolate(x.data(), y.data(), t);
}

RngStream::RngStream(std::uint64_t seed, const std::string& name) : seed_(seed), key_(fnv1a(name))
{
    std::seed_seq seq{std::uint32_t(seed_), std::uint32_t(seed_ >> 32), std::uint32_t(key_),
                      std::uint32_t(key_ >> 32)};
    engine_.seed(seq);
}

RngStream RngStream::split(const std::string& name) const
{
    return RngStream(seed_ ^ (key_ * 0x9e3779b97f4a7c15ull), name);
}

SamplerConfig SamplerConfig::lattice(double spacing)
{
    SamplerConfig c;
    c.mode = Mode::Lattice;
    c.spacing = spacing;
    c.weight_rule = WeightRule::CellVolume;
    return c;
}

SamplerConfig SamplerConfig::sprinkle(double density, std::uint64_t seed)
{
    SamplerConfig c;
    c.mode = Mode::Sprinkle;
    c.density = density;
    c.seed = seed;
    c.weight_rule = WeightRule::InverseDensity;
    return c;
}

namespace {

class CartesianLocator : public Locator {
public:
    CartesianLocator(std::vector<double> lo, double h, std::vector<int> count, std::vector<int> table)
        : lo_(std::move(lo)), h_(h), count_(std::move(count)), table_(std::move(table))
    {
    }
    int nearest(const double* x) const override
    {
        long idx = 0, stride = 1;
        for (std::size_t k = 0; k < lo_.size(); ++k) {
            long i = std::lround((x[k] - lo_[k]) / h_);
            i = std::clamp<long>(i, 0, count_[k] - 1);
            idx += i * stride;
            stride *= count_[k];
        }
        return table_[idx];
    }

private:
    std::vector<double> lo_;
    double h_;
    std::vector<int> count_;
    std::vector<int> table_;
};

class NullDiamondLocator : public Locator {
public:
    NullDiamondLocator(double h, int m) : h_(h), m_(m) {}
    int nearest(const double* x) const override
    {
        const double u = (x[0] - x[1]) / std::sqrt(2.0), v = (x[0] + x[1]) / std::sqrt(2.0);
        const long i = std::clamp<long>(std::lround(u / h_), 0, m_ - 1);
        const long j = std::clamp<long>(std::lround(v / h_), 0, m_ - 1);
        return int(i * m_ + j);
    }

private:
    double h_;
    int m_;
};

// Hyperbolic polar lattice ρ(cosh η, sinh η ω) around an apex.
struct PolarLayout {
    int dim = 2;
    std::vector<double> apex;
    double time_sign = 1.0;  // +1 future cone of the apex, -1 past cone
    std::vector<double> rho;  // radial nodes (excluding the apex)
    double rho_first = 0, rho_step = 0;  // rho[k] = rho_first + k*rho_step
    int apex_id = -1;
    double rapidity = 1.0;
    double deta = 1.0;
    int n_eta = 1;
    std::vector<int> n_phi;          // per η ring (dim 3)
    std::vector<int> ring_offset;    // per η ring (dim 3)
    int cells_per_shell = 0;
    int first_shell_id = 0;
};

class PolarLocator : public Locator {
public:
    explicit PolarLocator(PolarLayout L) : L_(std::move(L)) {}
    int nearest(const double* x) const override
    {
        const int n = L_.dim;
        const double dt = L_.time_sign * (x[0] - L_.apex[0]);
        double s2 = 0;
        for (int k = 1; k < n; ++k) s2 += sqr(x[k] - L_.apex[k]);
        const double s = std::sqrt(s2);
        if (dt <= s) return -1;
        const double rho = std::sqrt(dt * dt - s2);
        long k = std::lround((rho - L_.rho_first) / L_.rho_step);
        const long nr = long(L_.rho.size());
        if (L_.apex_id >= 0 && rho < 0.5 * L_.rho[0]) return L_.apex_id;
        k = std::clamp<long>(k, 0, nr - 1);
        int cell = 0;
        if (n == 2) {
            const double eta = std::atanh(std::clamp((x[1] - L_.apex[1]) / dt, -1.0, 1.0));
            cell = std::clamp<int>(int(std::floor((eta + L_.rapidity) / L_.deta)), 0, L_.n_eta - 1);
        } else {
            const double eta = std::atanh(std::min(s / dt, 1.0));
            const int i = std::clamp<int>(int(std::floor(eta / L_.deta)), 0, L_.n_eta - 1);
            double phi = std::atan2(x[2] - L_.apex[2], x[1] - L_.apex[1]);
            if (phi < 0) phi += 2 * kPi;
            const int m = L_.n_phi[i];
            const int l = std::clamp<int>(int(std::floor(phi / (2 * kPi / m))), 0, m - 1);
            cell = L_.ring_offset[i] + l;
        }
        return L_.first_shell_id + int(k) * L_.cells_per_shell + cell;
    }

private:
    PolarLayout L_;
};

struct Sample {
    std::vector<double> coords;  // flattened
    std::vector<double> weight;
    std::shared_ptr<const Locator> locator;
    void add(const double* x, int n, double w)
    {
        coords.insert(coords.end(), x, x + n);
        weight.push_back(w);
    }
};

void check_count(double expected)
{
    if (expected > 1e6) throw DomainError("discretize: expected point count exceeds 1e6");
}

Sample polar_lattice(const ModelSpacetime& m, double h)
{
    const Region& r = m.region();
    const int n = m.dim();
    PolarLayout L;
    L.dim = n;
    L.rapidity = r.rapidity;
    const bool cone = r.type == Region::Type::Cone;
    L.apex = cone ? r.apex : std::vector<double>(n, 0.0);
    L.time_sign = cone ? 1.0 : -1.0;

    std::vector<double> ang_w;                      // measure of each angular cell
    std::vector<std::vector<double>> ang_dir;       // (cosh η, sinh η ω)
    if (n == 2) {
        L.n_eta = std::max(1, int(std::lround(2 * r.rapidity / h)));
        L.deta = 2 * r.rapidity / L.n_eta;
        for (int j = 0; j < L.n_eta; ++j) {
            const double eta = -r.rapidity + (j + 0.5) * L.deta;
            ang_w.push_back(L.deta);
            ang_dir.push_back({std::cosh(eta), std::sinh(eta)});
        }
    } else {
        L.n_eta = std::max(1, int(std::lround(r.rapidity / h)));
        L.deta = r.rapidity / L.n_eta;
        for (int i = 0; i < L.n_eta; ++i) {
            const double eta = (i + 0.5) * L.deta;
            const int mphi = std::max(3, int(std::lround(2 * kPi * std::sinh(eta) / L.deta)));
            L.n_phi.push_back(mphi);
            L.ring_offset.push_back(int(ang_w.size()));
            const double band = std::cosh(eta + 0.5 * L.deta) - std::cosh(eta - 0.5 * L.deta);
            for (int l = 0; l < mphi; ++l) {
                const double phi = (l + 0.5) * 2 * kPi / mphi;
                ang_w.push_back(band * 2 * kPi / mphi);
                ang_dir.push_back({std::cosh(eta), std::sinh(eta) * std::cos(phi), std::sinh(eta) * std::sin(phi)});
            }
        }
    }
    L.cells_per_shell = int(ang_w.size());
    double ang_total = 0;
    for (double w : ang_w) ang_total += w;

    auto shell = [&](double lo, double hi) { return (std::pow(hi, n) - std::pow(lo, n)) / n; };
    Sample out;
    if (cone) {
        const int K = std::max(1, int(std::lround(r.radius / h)));
        for (int k = 1; k <= K; ++k) L.rho.push_back(k * h);
        L.rho_first = h;
        L.rho_step = h;
        check_count(1.0 + double(K) * L.cells_per_shell);
        out.add(L.apex.data(), n, shell(0.0, 0.5 * h) * ang_total);
        L.apex_id = 0;
        L.first_shell_id = 1;
    } else {
        const double last = std::max(r.rho_min, h);
        const int J = int(std::floor((1.0 - last) / h + 1e-9)) + 1;
        for (int j = 0; j < J; ++j) L.rho.push_back(1.0 - j * h);
        L.rho_first = 1.0;
        L.rho_step = -h;
        check_count(double(J) * L.cells_per_shell);
        L.first_shell_id = 0;
    }
    std::vector<double> x(n);
    for (double rho : L.rho) {
        const double rw = shell(std::max(0.0, rho - 0.5 * h), rho + 0.5 * h);
        for (int c = 0; c < L.cells_per_shell; ++c) {
            x[0] = L.apex[0] + L.time_sign * rho * ang_dir[c][0];
            for (int k = 1; k < n; ++k) x[k] = L.apex[k] + rho * ang_dir[c][k];
            out.add(x.data(), n, rw * ang_w[c]);
        }
    }
    out.locator = std::make_shared<PolarLocator>(std::move(L));
    return out;
}

Sample cartesian_lattice(const ModelSpacetime& m, double h)
{
    const Region& r = m.region();
    const int n = m.dim();
    std::vector<double> lo, hi;
    m.bounding_box(lo, hi);
    std::vector<int> count(n);
    std::vector<double> origin(n);
    double total = 1;
    for (int k = 0; k < n; ++k) {
        if (r.type == Region::Type::Box || k == 0) {
            origin[k] = lo[k];
            count[k] = int(std::floor((hi[k] - lo[k]) / h + 1e-9)) + 1;
        } else {
            // spatial axes of the diamond are centered at zero
            const int half = int(std::floor(hi[k] / h + 1e-9));
            origin[k] = -half * h;
            count[k] = 2 * half + 1;
        }
        total *= count[k];
    }
    check_count(total);
    std::vector<int> table(std::size_t(total), -1);
    Sample out;
    std::vector<double> x(n);
    int id = 0;
    for (long idx = 0; idx < long(total); ++idx) {
        long q = idx;
        for (int k = 0; k < n; ++k) {
            x[k] = origin[k] + double(q % count[k]) * h;
            q /= count[k];
        }
        if (!m.contains(x.data(), 1e-9 * std::max(1.0, h))) continue;
        table[idx] = id++;
        out.add(x.data(), n, std::pow(h, n) * m.volume_density(x.data()));
    }
    out.locator = std::make_shared<CartesianLocator>(origin, h, count, std::move(table));
    return out;
}

Sample null_diamond_lattice(const ModelSpacetime& m, double h)
{
    const double L = m.region().size;
    const int M = int(std::floor(L / h + 1e-9)) + 1;
    check_count(double(M) * M);
    Sample out;
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) {
            const double u = i * h, v = j * h;
            const double x[2] = {(u + v) / std::sqrt(2.0), (v - u) / std::sqrt(2.0)};
            out.add(x, 2, h * h);
        }
    out.locator = std::make_shared<NullDiamondLocator>(h, M);
    return out;
}

}  // namespace

FiniteCausalSpace discretize(const std::shared_ptr<const ModelSpacetime>& model, const SamplerConfig& config)
{
    if (!model) throw DomainError("discretize: null model");
    if (!model->trusted()) throw DomainError("discretize: model formulas failed the geodesic-shooting check");
    const ModelSpacetime& m = *model;
    const int n = m.dim();
    Sample s;
    SampleInfo info;
    if (config.mode == SamplerConfig::Mode::Lattice) {
        if (!(config.spacing > 0)) throw DomainError("discretize: spacing must be positive");
        if (config.weight_rule != SamplerConfig::WeightRule::CellVolume)
            throw DomainError("discretize: lattice mode uses the cell-volume weight rule");
        const Region::Type t = m.region().type;
        if (t == Region::Type::Cone || t == Region::Type::Wedge) s = polar_lattice(m, config.spacing);
        else if (t == Region::Type::Diamond && n == 2 && !(m.kind() == ModelKind::ConstantCurvature && m.kappa() != 0))
            s = null_diamond_lattice(m, config.spacing);
        else s = cartesian_lattice(m, config.spacing);
        info.mode = "lattice";
        info.spacing = config.spacing;
    } else {
        if (!(config.density > 0)) throw DomainError("discretize: density must be positive");
        if (config.weight_rule != SamplerConfig::WeightRule::InverseDensity)
            throw DomainError("discretize: sprinkle mode uses the 1/density weight rule");
        const double expected = config.density * m.region_volume();
        if (expected < 2) throw SamplingError("discretize: expected point count below 2");
        check_count(expected);
        std::vector<double> lo, hi;
        m.bounding_box(lo, hi);
        double bbox = 1;
        for (int k = 0; k < n; ++k) bbox *= hi[k] - lo[k];
        // thinning bound for the chart volume density
        double gmax = 1.0;
        if (m.kind() == ModelKind::ConstantCurvature && m.kappa() != 0) {
            const int g = 17;
            long total = 1;
            for (int k = 0; k < n; ++k) total *= g;
            std::vector<double> x(n);
            for (long idx = 0; idx < total; ++idx) {
                long q = idx;
                for (int k = 0; k < n; ++k) {
                    x[k] = lo[k] + double(q % g) / (g - 1) * (hi[k] - lo[k]);
                    q /= g;
                }
                gmax = std::max(gmax, m.volume_density(x.data()));
            }
            gmax *= 1.02;
        }
        RngStream rng(config.seed, "sprinkle");
        std::poisson_distribution<long> count(config.density * gmax * bbox);
        const long N = count(rng.engine());
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<double> x(n);
        for (long i = 0; i < N; ++i) {
            for (int k = 0; k < n; ++k) x[k] = lo[k] + unit(rng.engine()) * (hi[k] - lo[k]);
            const double accept = unit(rng.engine());
            if (!m.contains(x.data(), 0.0)) continue;
            if (accept * gmax > m.volume_density(x.data())) continue;
            s.add(x.data(), n, 1.0 / config.density);
        }
        for (const auto& a : config.anchors) {
            if (int(a.size()) != n || !m.contains(a.data(), 1e-12))
                throw DomainError("discretize: anchor outside the region");
            s.add(a.data(), n, 1.0 / config.density);
        }
        info.mode = "sprinkle";
        info.density = config.density;
        info.seed = config.seed;
    }
    const int count = int(s.weight.size());
    if (count == 0) throw SamplingError("discretize: empty sample");
    Coords coords(count, n);
    for (int i = 0; i < count; ++i)
        for (int k = 0; k < n; ++k) coords(i, k) = s.coords[std::size_t(i) * n + k];
    Eigen::VectorXd w = Eigen::Map<Eigen::VectorXd>(s.weight.data(), count);
    FiniteCausalSpace space(std::move(coords), std::move(w), model);
    space.set_locator(s.locator);
    space.set_sample_info(info);
    return space;
}

AchronalSet wedge_hyperboloid(const FiniteCausalSpace& space, double tol)
{
    AchronalSet V;
    V.label = "unit hyperboloid";
    for (int i = 0; i < space.size(); ++i) {
        const double* x = space.point(i);
        double s2 = 0;
        for (int k = 1; k < space.dim(); ++k) s2 += x[k] * x[k];
        const double rho2 = x[0] * x[0] - s2;
        if (x[0] < 0 && std::abs(std::sqrt(std::max(rho2, 0.0)) - 1.0) <= tol) V.members.push_back(i);
    }
    return V;
}

double chain_length_tau(const FiniteCausalSpace& space, int i, int j)
{
    if (space.sample_info().mode != "sprinkle") throw DomainError("chain_length_tau: space is not sprinkled");
    if (space.dim() != 2) throw DomainError("chain_length_tau: the chain constant is known for dim 2 only");
    if (i == j || !space.leq(i, j)) return 0.0;
    IndexSet between;
    for (int k = 0; k < space.size(); ++k)
        if (space.leq(i, k) && space.leq(k, j)) between.push_back(k);
    // time coordinate is a time function on the models, so it orders the interval topologically
    std::sort(between.begin(), between.end(), [&](int a, int b) {
        const double ta = space.point(a)[0], tb = space.point(b)[0];
        return ta != tb ? ta < tb : a < b;
    });
    std::vector<int> longest(between.size(), -1);
    for (std::size_t a = 0; a < between.size(); ++a) {
        if (between[a] == i) longest[a] = 0;
        if (longest[a] < 0) continue;
        for (std::size_t b = a + 1; b < between.size(); ++b)
            if (space.leq(between[a], between[b])) longest[b] = std::max(longest[b], longest[a] + 1);
    }
    int links = 0;
    for (std::size_t a = 0; a < between.size(); ++a)
        if (between[a] == j) links = longest[a];
    return links / std::sqrt(2.0 * space.sample_info().density);
}

}  // namespace lorentz
