#pragma once

#include <algorithm>
#include <cmath>

#include "musica/error.hpp"
#include "musica/image.hpp"
#include "musica/pyramid.hpp"

namespace musica {

/// Parameters of the nonlinear detail amplification.
///
/// `a` scales everything globally; `M` bounds the coefficient magnitude and
/// maps to itself; `p` in (0, 1] bends the curve (1 = identity); `x_c` is the
/// noise floor below which the response stays linear so near-zero
/// coefficients -- mostly noise -- are not boosted as aggressively as the
/// power law would; `levels` is the pyramid depth the enhancement runs at.
struct MusicaParams {
    double a = 1.0;
    double M = 1.0;
    double p = 0.5;
    double x_c = 0.01;
    int levels = 7;

    MusicaParams() = default;
    MusicaParams(double a_, double M_, double p_, double x_c_, int levels_)
        : a(a_), M(M_), p(p_), x_c(x_c_), levels(levels_) {
        validate();
    }

    void validate() const {
        if (!(a > 0.0)) throw ValidationError("MusicaParams: a must be > 0");
        if (!(M > 0.0)) throw ValidationError("MusicaParams: M must be > 0");
        if (!(p > 0.0) || p > 1.0) throw ValidationError("MusicaParams: p must be in (0, 1]");
        if (!(x_c > 0.0) || !(x_c < M)) throw ValidationError("MusicaParams: x_c must satisfy 0 < x_c < M");
        if (levels < 1) throw ValidationError("MusicaParams: levels must be at least 1");
    }
};

/// Remap one detail coefficient.  Below x_c in magnitude the response is
/// linear in x; from x_c up it follows the concave power law
/// a·M·sign(x)·(|x|/M)^p, so weak detail is amplified and strong detail is
/// compressed toward a·M.  The two branches agree at |x| = x_c, making the
/// curve continuous, odd, and strictly increasing.  Inputs beyond ±M are
/// clamped to the domain boundary first.
inline double amplify_coeff(double x, const MusicaParams& params) {
    x = std::clamp(x, -params.M, params.M);
    if (params.p == 1.0)
        return params.a * x;  // both branches reduce algebraically to a·x; computing
                              // them the long way would not be bit-exact
    const double ax = std::abs(x);
    if (ax < params.x_c)
        return params.a * params.M * (x / params.x_c) * std::pow(params.x_c / params.M, params.p);
    return std::copysign(params.a * params.M * std::pow(ax / params.M, params.p), x);
}

/// Amplify every detail layer element-wise; the residual passes through
/// untouched, so the overall brightness base is preserved.
inline Pyramid apply_to_pyramid(const Pyramid& pyr, const MusicaParams& params) {
    Pyramid out;
    out.details.reserve(pyr.details.size());
    for (const Image& layer : pyr.details) {
        Image t = layer;
        for (double& v : t.data()) v = amplify_coeff(v, params);
        out.details.push_back(std::move(t));
    }
    out.residual = pyr.residual;
    return out;
}

/// Single-stage enhancement: decompose, amplify the detail layers,
/// reconstruct.  Expects input scaled to [0, 1]; the output can overshoot
/// that range slightly and is left unclamped so callers can keep composing.
inline Image musica_enhance(const Image& img, const MusicaParams& params) {
    require_nonempty(img, "musica_enhance");
    require_finite(img, "musica_enhance");
    return reconstruct(apply_to_pyramid(decompose(img, params.levels), params));
}

} // namespace musica
