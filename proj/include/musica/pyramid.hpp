#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "musica/error.hpp"
#include "musica/image.hpp"

namespace musica {

/// Reflect an out-of-range coordinate back into [0, n) by mirroring about the
/// border samples themselves (no edge duplication), folding as many times as
/// needed.  For n == 1 every coordinate maps to 0.
inline int mirror_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    int m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - m;
}

inline int half_size(int n) { return (n + 1) / 2; }

namespace detail {

// All kernels below are evaluated as center + weighted deviations from the
// center sample rather than as plain weighted sums.  The two forms agree to
// rounding, but the deviation form maps a constant neighbourhood to exactly
// the center value -- no drift whatsoever -- which the pipeline depends on:
// its inter-stage min-max renormalization would blow any such drift on a
// flat image up to full range.

// Separable 5-tap binomial smooth (1,4,6,4,1)/16 along x, keeping only even
// output columns.  Mirror handling happens at the index level, so borders see
// the same kernel weights as the interior.
inline Image reduce_cols(const Image& src) {
    const int w = src.width(), h = src.height();
    const int ow = half_size(w);
    Image out(ow, h);
    for (int y = 0; y < h; ++y) {
        for (int ox = 0; ox < ow; ++ox) {
            const int c = 2 * ox;
            const double center = src(c, y);
            const double dev = 1.0 * (src(mirror_index(c - 2, w), y) - center)
                             + 4.0 * (src(mirror_index(c - 1, w), y) - center)
                             + 4.0 * (src(mirror_index(c + 1, w), y) - center)
                             + 1.0 * (src(mirror_index(c + 2, w), y) - center);
            out(ox, y) = center + dev / 16.0;
        }
    }
    return out;
}

inline Image reduce_rows(const Image& src) {
    const int w = src.width(), h = src.height();
    const int oh = half_size(h);
    Image out(w, oh);
    for (int oy = 0; oy < oh; ++oy) {
        const int c = 2 * oy;
        const int m2 = mirror_index(c - 2, h), m1 = mirror_index(c - 1, h);
        const int p1 = mirror_index(c + 1, h), p2 = mirror_index(c + 2, h);
        for (int x = 0; x < w; ++x) {
            const double center = src(x, c);
            const double dev = 1.0 * (src(x, m2) - center) + 4.0 * (src(x, m1) - center)
                             + 4.0 * (src(x, p1) - center) + 1.0 * (src(x, p2) - center);
            out(x, oy) = center + dev / 16.0;
        }
    }
    return out;
}

// Interpolating upsample along x to a target width.  Even outputs blend the
// three nearest coarse samples (1,6,1)/8; odd outputs average the two
// neighbours.  Both phases sum to 1, so flat images stay exactly flat.
inline Image expand_cols(const Image& src, int target_w) {
    const int w = src.width(), h = src.height();
    Image out(target_w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < target_w; ++x) {
            const int m = x / 2;
            const double center = src(m, y);
            if (x % 2 == 0) {
                out(x, y) = center + ((src(mirror_index(m - 1, w), y) - center)
                                      + (src(mirror_index(m + 1, w), y) - center)) / 8.0;
            } else {
                out(x, y) = center + (src(mirror_index(m + 1, w), y) - center) / 2.0;
            }
        }
    }
    return out;
}

inline Image expand_rows(const Image& src, int target_h) {
    const int w = src.width(), h = src.height();
    Image out(w, target_h);
    for (int y = 0; y < target_h; ++y) {
        const int m = y / 2;
        if (y % 2 == 0) {
            const int a = mirror_index(m - 1, h), b = mirror_index(m + 1, h);
            for (int x = 0; x < w; ++x) {
                const double center = src(x, m);
                out(x, y) = center + ((src(x, a) - center) + (src(x, b) - center)) / 8.0;
            }
        } else {
            const int b = mirror_index(m + 1, h);
            for (int x = 0; x < w; ++x) {
                const double center = src(x, m);
                out(x, y) = center + (src(x, b) - center) / 2.0;
            }
        }
    }
    return out;
}

} // namespace detail

/// Low-pass filter and subsample by two in each direction.  Odd dimensions
/// round up, so a w-wide image reduces to ceil(w/2); every size down to 1x1
/// is legal.
inline Image reduce(const Image& img) {
    require_nonempty(img, "reduce");
    return detail::reduce_rows(detail::reduce_cols(img));
}

/// Upsample to an explicit target size, which must be what `reduce` would
/// have halved to this image's size: ceil(target/2) == current size.  The
/// target has to be passed in because halving is lossy for odd sizes -- a
/// 3-wide image reduces to 2 just like a 4-wide one does.
inline Image expand(const Image& img, int target_w, int target_h) {
    require_nonempty(img, "expand");
    if (target_w <= 0 || target_h <= 0)
        throw ValidationError("expand: target dimensions must be positive");
    if (half_size(target_w) != img.width() || half_size(target_h) != img.height())
        throw ValidationError("expand: target " + std::to_string(target_w) + "x"
                              + std::to_string(target_h) + " does not halve to source "
                              + std::to_string(img.width()) + "x"
                              + std::to_string(img.height()));
    return detail::expand_rows(detail::expand_cols(img, target_w), target_h);
}

/// A Laplacian pyramid: band-pass detail layers ordered fine to coarse, plus
/// the final low-pass residual.
struct Pyramid {
    std::vector<Image> details;
    Image residual;

    int levels() const { return static_cast<int>(details.size()); }
};

/// Split an image into `levels` detail layers and a residual.  Layer k is the
/// difference between the k-th Gaussian level and its reconstruction from the
/// (k+1)-th, so summing everything back up reproduces the input exactly.
inline Pyramid decompose(const Image& img, int levels) {
    require_nonempty(img, "decompose");
    if (levels < 1)
        throw ValidationError("decompose: levels must be at least 1");
    if (levels > 30)
        throw ValidationError("decompose: levels must be at most 30");

    Pyramid pyr;
    pyr.details.reserve(static_cast<std::size_t>(levels));
    Image current = img;
    for (int k = 0; k < levels; ++k) {
        Image next = reduce(current);
        Image up = expand(next, current.width(), current.height());
        pyr.details.push_back(subtract(current, up));
        current = std::move(next);
    }
    pyr.residual = std::move(current);
    return pyr;
}

/// Invert `decompose`: expand the residual back up level by level, adding the
/// detail layer at each scale.  With untouched layers this is exact, not
/// approximate -- the expansion here cancels the one used during analysis.
inline Image reconstruct(const Pyramid& pyr) {
    if (pyr.details.empty())
        throw ValidationError("reconstruct: pyramid has no detail layers");
    require_nonempty(pyr.residual, "reconstruct");
    for (int k = pyr.levels() - 1; k >= 0; --k) {
        const Image& d = pyr.details[static_cast<std::size_t>(k)];
        const Image& below = (k + 1 < pyr.levels())
            ? pyr.details[static_cast<std::size_t>(k + 1)] : pyr.residual;
        if (half_size(d.width()) != below.width() || half_size(d.height()) != below.height())
            throw ValidationError("reconstruct: layer sizes do not chain by halving");
    }

    Image acc = pyr.residual;
    for (int k = pyr.levels() - 1; k >= 0; --k) {
        const Image& d = pyr.details[static_cast<std::size_t>(k)];
        acc = add(expand(acc, d.width(), d.height()), d);
    }
    return acc;
}

} // namespace musica
