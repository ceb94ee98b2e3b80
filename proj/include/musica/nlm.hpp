#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "musica/error.hpp"
#include "musica/image.hpp"
#include "musica/pyramid.hpp"

namespace musica {

/// Non-local means parameters: square patch and search-window sides (both
/// odd), and the filtering strength h that scales how fast weights fall off
/// with patch distance.
struct NlmParams {
    int patch_size = 7;
    int search_window = 21;
    double h = 0.1;

    NlmParams() = default;
    NlmParams(int patch, int search, double strength)
        : patch_size(patch), search_window(search), h(strength) {
        validate();
    }

    void validate() const {
        if (patch_size < 1 || patch_size % 2 == 0)
            throw ValidationError("NlmParams: patch_size must be odd and positive");
        if (search_window < 1 || search_window % 2 == 0)
            throw ValidationError("NlmParams: search_window must be odd and positive");
        if (patch_size > search_window)
            throw ValidationError("NlmParams: patch_size must not exceed search_window");
        if (!(h > 0.0))
            throw ValidationError("NlmParams: h must be > 0");
    }
};

namespace detail {

inline Image mirror_pad(const Image& src, int pad) {
    const int w = src.width(), h = src.height();
    Image out(w + 2 * pad, h + 2 * pad);
    for (int y = 0; y < out.height(); ++y) {
        const int sy = mirror_index(y - pad, h);
        for (int x = 0; x < out.width(); ++x)
            out(x, y) = src(mirror_index(x - pad, w), sy);
    }
    return out;
}

} // namespace detail

/// Non-local means: every output pixel is a convex combination of the pixels
/// in its search window, weighted by exp(-d2/h2) where d2 is the mean squared
/// difference between the two pixels' surrounding patches.  Borders are
/// mirrored.  The center pixel contributes its natural weight of 1.
///
/// Organized per search offset rather than per pixel: for a fixed offset the
/// squared-difference plane plus a summed-area table yields every patch
/// distance in O(1), which is what makes radiograph-sized inputs tractable.
/// Patch distance is symmetric, so only one offset of each {+t, -t} pair is
/// visited and its weights feed both endpoints; the pixel range is extended
/// by the offset so border pixels still see their full window.
inline Image nlm_denoise(const Image& img, const NlmParams& params) {
    require_nonempty(img, "nlm_denoise");
    require_finite(img, "nlm_denoise");
    params.validate();

    const int w = img.width(), h = img.height();
    const int dp = (params.patch_size - 1) / 2;
    const int ds = (params.search_window - 1) / 2;
    const int pad = dp + ds;
    const int side = params.patch_size;
    const double inv_h2 = 1.0 / (params.h * params.h);
    const double inv_area = 1.0 / (static_cast<double>(side) * side);
    // exp(-60) ~ 9e-27: offsets this far in patch distance cannot move the
    // result at any tolerance we care about, so skip the exp call.
    constexpr double kArgCutoff = 60.0;

    const Image padded = detail::mirror_pad(img, pad);

    const int max_dw = w + ds + 2 * dp, max_dh = h + ds + 2 * dp;
    std::vector<double> diff(static_cast<std::size_t>(max_dw) * max_dh);
    std::vector<double> sat(static_cast<std::size_t>(max_dw + 1) * (max_dh + 1), 0.0);
    // num accumulates weighted deviations of neighbours from the pixel's own
    // value (the pixel is added back at the end); this way a flat
    // neighbourhood reproduces the pixel bit-for-bit.  The self offset
    // contributes deviation 0 at weight 1, hence den starts at 1.
    std::vector<double> num(img.data().size(), 0.0);
    std::vector<double> den(img.data().size(), 1.0);

    for (int dy = 0; dy <= ds; ++dy) {
        for (int dx = (dy == 0 ? 1 : -ds); dx <= ds; ++dx) {
            // Walk pixels x in [x_lo, x_lo + ew) x [y_lo, y_lo + eh), the
            // union of the image rectangle and its shift by -(dx,dy), so each
            // visited x serves pixel x (neighbour x + t) and, symmetrically,
            // pixel x + t (neighbour x) with one shared weight.
            const int x_lo = dx > 0 ? -dx : 0, y_lo = -dy;
            const int ew = w + std::abs(dx), eh = h + dy;
            const int dw = ew + 2 * dp, dh = eh + 2 * dp;
            // Padded coordinate of the first patch sample of pixel x_lo.
            const int bx = x_lo + ds, by = y_lo + ds;

            for (int j = 0; j < dh; ++j) {
                const double* row_a = &padded(bx, by + j);
                const double* row_b = &padded(bx + dx, by + j + dy);
                double* row_d = &diff[static_cast<std::size_t>(j) * dw];
                for (int i = 0; i < dw; ++i) {
                    const double d = row_a[i] - row_b[i];
                    row_d[i] = d * d;
                }
            }
            // The table is indexed with a per-offset row stride, so its
            // zero row and zero column must be rewritten every time.
            std::fill(sat.begin(), sat.begin() + dw + 1, 0.0);
            for (int j = 0; j < dh; ++j) {
                const double* row_d = &diff[static_cast<std::size_t>(j) * dw];
                const double* sat_up = &sat[static_cast<std::size_t>(j) * (dw + 1)];
                double* sat_row = &sat[static_cast<std::size_t>(j + 1) * (dw + 1)];
                sat_row[0] = 0.0;
                double run = 0.0;
                for (int i = 0; i < dw; ++i) {
                    run += row_d[i];
                    sat_row[i + 1] = run + sat_up[i + 1];
                }
            }
            for (int ey = 0; ey < eh; ++ey) {
                const int y = y_lo + ey;
                const bool fwd_row = y >= 0 && y < h;           // pixel (x, y) exists
                const bool bwd_row = y + dy >= 0 && y + dy < h; // pixel (x+dx, y+dy) exists
                const double* s0 = &sat[static_cast<std::size_t>(ey) * (dw + 1)];
                const double* s1 = &sat[static_cast<std::size_t>(ey + side) * (dw + 1)];
                const double* row_here = &padded(bx + dp, y + pad);
                const double* row_there = &padded(bx + dp + dx, y + pad + dy);
                double* num_fwd = fwd_row ? &num[static_cast<std::size_t>(y) * w] : nullptr;
                double* den_fwd = fwd_row ? &den[static_cast<std::size_t>(y) * w] : nullptr;
                double* num_bwd = bwd_row ? &num[static_cast<std::size_t>(y + dy) * w] : nullptr;
                double* den_bwd = bwd_row ? &den[static_cast<std::size_t>(y + dy) * w] : nullptr;
                for (int ex = 0; ex < ew; ++ex) {
                    const double box = s1[ex + side] - s1[ex] - s0[ex + side] + s0[ex];
                    const double arg = box * inv_area * inv_h2;
                    if (arg > kArgCutoff) continue;
                    const double wgt = std::exp(-arg);
                    const int x = x_lo + ex;
                    const double dev = row_there[ex] - row_here[ex];
                    if (fwd_row && x >= 0 && x < w) {
                        num_fwd[x] += wgt * dev;
                        den_fwd[x] += wgt;
                    }
                    if (bwd_row && x + dx >= 0 && x + dx < w) {
                        num_bwd[x + dx] -= wgt * dev;
                        den_bwd[x + dx] += wgt;
                    }
                }
            }
        }
    }

    Image out(w, h);
    for (std::size_t i = 0; i < out.data().size(); ++i)
        out.data()[i] = img.data()[i] + num[i] / den[i];
    return out;
}

} // namespace musica
