#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "lorentz/errors.hpp"
#include "lorentz/extended.hpp"

namespace lorentz {

namespace detail {

// Intermediate precision for the trig branches; long double keeps the
// relative error small as κθ² approaches π².
template <typename Scalar>
struct Wider {
    using type = Scalar;
};
template <>
struct Wider<double> {
    using type = long double;
};

}  // namespace detail

// 𝔰_κ(θ) and 𝔠_κ(θ).
template <typename Scalar>
std::pair<Scalar, Scalar> s_c_coeff(Scalar kappa, Scalar theta)
{
    using W = typename detail::Wider<Scalar>::type;
    using std::cos;
    using std::cosh;
    using std::sin;
    using std::sinh;
    using std::sqrt;
    if (kappa > 0) {
        W k = sqrt(W(kappa));
        W x = k * W(theta);
        return {Scalar(sin(x) / k), Scalar(cos(x))};
    }
    if (kappa < 0) {
        W k = sqrt(-W(kappa));
        W x = k * W(theta);
        return {Scalar(sinh(x) / k), Scalar(cosh(x))};
    }
    return {theta, Scalar(1)};
}

template <typename Scalar>
Extended<Scalar> sigma(Scalar kappa, Scalar t, Scalar theta)
{
    using W = typename detail::Wider<Scalar>::type;
    using E = Extended<Scalar>;
    if (!(t >= 0 && t <= 1)) throw DomainError("sigma: t must lie in [0,1]");
    if (!(theta >= 0)) throw DomainError("sigma: theta must be nonnegative");

    const W u = W(kappa) * W(theta) * W(theta);
    const W pi = std::numbers::pi_v<W>;
    if (u >= pi * pi) return E::plus_infinity();
    if (u == 0) return E::finite(t);
    if (t == 0) return E::finite(Scalar(0));
    if (t == 1) return E::finite(Scalar(1));

    using std::abs;
    if (abs(u) < W(1e-8)) {
        // 𝔰_κ(tθ)/𝔰_κ(θ) with 𝔰_κ(x) = x(1 - κx²/6 + κ²x⁴/120 - ...)
        const W tt = W(t) * W(t);
        const W num = 1 - u * tt / 6 + u * u * tt * tt / 120;
        const W den = 1 - u / 6 + u * u / 120;
        return E::finite(Scalar(W(t) * num / den));
    }

    using std::sin;
    using std::sinh;
    using std::sqrt;
    if (kappa > 0) {
        const W x = sqrt(W(kappa)) * W(theta);
        return E::finite(Scalar(sin(W(t) * x) / sin(x)));
    }
    const W x = sqrt(-W(kappa)) * W(theta);
    return E::finite(Scalar(sinh(W(t) * x) / sinh(x)));
}

// τ_{K,N}^{(t)}(θ) = t^{1/N} σ_{K/(N-1)}^{(t)}(θ)^{(N-1)/N}.
template <typename Scalar>
Extended<Scalar> tau_coeff(Scalar K, Scalar N, Scalar t, Scalar theta)
{
    if (!(N > 1)) throw DomainError("tau_coeff: N must exceed 1");
    const Extended<Scalar> s = sigma(K / (N - 1), t, theta);
    if (!s.is_finite()) return s;
    using std::pow;
    return Extended<Scalar>::finite(pow(t, 1 / N) * pow(s.value(), (N - 1) / N));
}

template <typename Scalar>
struct HawkingParams {
    Scalar H0;
    Scalar K;
    Scalar N;
};

template <typename Scalar>
Scalar hawking_threshold(const HawkingParams<Scalar>& p)
{
    using std::atan;
    using std::log;
    using std::sqrt;
    const Scalar H0 = p.H0, K = p.K, N = p.N;
    if (!(N > 1)) throw RegimeError("hawking_threshold: requires N > 1");
    const Scalar half_pi = std::numbers::pi_v<Scalar> / 2;
    if (K > 0) {
        if (H0 == 0) return half_pi * sqrt((N - 1) / K);
        // arccot with range (0, π)
        const Scalar x = -H0 / sqrt(K * (N - 1));
        return sqrt((N - 1) / K) * (half_pi - atan(x));
    }
    if (K == 0) {
        if (!(H0 < 0)) throw RegimeError("hawking_threshold: K = 0 requires H0 < 0");
        return -(N - 1) / H0;
    }
    const Scalar bound = -sqrt(-K * (N - 1));
    if (!(H0 < bound))
        throw RegimeError("hawking_threshold: K < 0 requires H0 < -sqrt(-K(N-1)) = " +
                          std::to_string(double(bound)));
    const Scalar x = -H0 / sqrt(-K * (N - 1));
    return sqrt(-(N - 1) / K) * log((x + 1) / (x - 1)) / 2;
}

// U_N = exp(-Ent/N), zero for infinite entropy.
template <typename Scalar>
Scalar entropy_exp(const Extended<Scalar>& ent, Scalar N)
{
    if (!(N > 0)) throw DomainError("entropy_exp: N must be positive");
    if (ent.is_plus_infinity()) return Scalar(0);
    if (ent.is_minus_infinity()) throw DomainError("entropy_exp: entropy is -inf");
    using std::exp;
    return exp(-ent.value() / N);
}

}  // namespace lorentz
