#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "musica/error.hpp"
#include "musica/image.hpp"
#include "musica/pyramid.hpp"

namespace musica {

/// Contrast-to-noise evaluation of one image: the per-pixel CNR map at
/// third-detail-layer resolution, the noise level it was divided by, and
/// summary statistics over the map's pixels.
struct CnrReport {
    Image cnr;
    double noise_level = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double min = 0.0;
    double max = 0.0;
};

namespace detail {

/// Linearly interpolated quantile (the common "type 7" convention) over an
/// already-sorted sample.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double pos = q * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= n) return sorted[n - 1];
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

} // namespace detail

/// Standard deviation of the window centered on each (stride-spaced) pixel,
/// population convention, mirrored borders, so a stride of 1 preserves the
/// layer's dimensions.  Computed from summed-area tables of the mean-shifted
/// values and their squares; shifting by the global mean first keeps the
/// E[x^2] - E[x]^2 subtraction from cancelling catastrophically.
inline Image sdev_image(const Image& layer, int window = 9, int stride = 1) {
    require_nonempty(layer, "sdev_image");
    require_finite(layer, "sdev_image");
    if (window < 1 || window % 2 == 0)
        throw ValidationError("sdev_image: window must be odd and positive");
    if (layer.width() < window || layer.height() < window)
        throw ValidationError("sdev_image: layer " + std::to_string(layer.width()) + "x"
                              + std::to_string(layer.height()) + " is smaller than the "
                              + std::to_string(window) + "-wide window");
    if (stride < 1)
        throw ValidationError("sdev_image: stride must be positive");

    const int w = layer.width(), h = layer.height();
    const int r = (window - 1) / 2;
    const double area = static_cast<double>(window) * window;

    double shift = 0.0;
    for (double v : layer.data()) shift += v;
    shift /= static_cast<double>(layer.pixel_count());

    const int pw = w + 2 * r, ph = h + 2 * r;
    std::vector<double> sum(static_cast<std::size_t>(pw + 1) * (ph + 1), 0.0);
    std::vector<double> sumsq(static_cast<std::size_t>(pw + 1) * (ph + 1), 0.0);
    for (int j = 0; j < ph; ++j) {
        const int sy = mirror_index(j - r, h);
        double run = 0.0, runsq = 0.0;
        for (int i = 0; i < pw; ++i) {
            const double v = layer(mirror_index(i - r, w), sy) - shift;
            run += v;
            runsq += v * v;
            const std::size_t up = static_cast<std::size_t>(j) * (pw + 1) + i + 1;
            const std::size_t here = static_cast<std::size_t>(j + 1) * (pw + 1) + i + 1;
            sum[here] = run + sum[up];
            sumsq[here] = runsq + sumsq[up];
        }
    }

    const int ow = (w + stride - 1) / stride, oh = (h + stride - 1) / stride;
    Image out(ow, oh);
    for (int oy = 0; oy < oh; ++oy) {
        const int y0 = oy * stride, y1 = y0 + window;
        for (int ox = 0; ox < ow; ++ox) {
            const int x0 = ox * stride, x1 = x0 + window;
            auto box = [&](const std::vector<double>& s) {
                return s[static_cast<std::size_t>(y1) * (pw + 1) + x1]
                     - s[static_cast<std::size_t>(y1) * (pw + 1) + x0]
                     - s[static_cast<std::size_t>(y0) * (pw + 1) + x1]
                     + s[static_cast<std::size_t>(y0) * (pw + 1) + x0];
            };
            const double m = box(sum) / area;
            const double var = box(sumsq) / area - m * m;
            out(ox, oy) = std::sqrt(std::max(0.0, var));
        }
    }
    return out;
}

/// Modal value of a standard-deviation image: histogram over [min, max] with
/// equal-width bins, returning the center of the fullest bin (ties go to the
/// lower bin).  The premise is that most of the image is background texture,
/// so the histogram peak estimates the noise floor.
inline double noise_estimate(const Image& sdev, int bins) {
    require_nonempty(sdev, "noise_estimate");
    require_finite(sdev, "noise_estimate");
    if (bins < 1)
        throw ValidationError("noise_estimate: bins must be positive");
    for (double v : sdev.data())
        if (v < 0.0)
            throw ValidationError("noise_estimate: negative standard deviation");

    const auto [lo, hi] = min_max(sdev);
    if (hi == 0.0)
        throw DegenerateNoiseError("noise_estimate: standard deviation image is identically zero");
    if (lo == hi)
        return lo;  // single occupied bin; its center is the value itself

    const double width = (hi - lo) / static_cast<double>(bins);
    std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
    for (double v : sdev.data()) {
        int idx = static_cast<int>((v - lo) / width);
        idx = std::clamp(idx, 0, bins - 1);
        ++counts[static_cast<std::size_t>(idx)];
    }
    std::size_t best = 0;
    for (std::size_t b = 1; b < counts.size(); ++b)
        if (counts[b] > counts[best]) best = b;
    return lo + (static_cast<double>(best) + 0.5) * width;
}

/// Per-pixel contrast-to-noise ratio of an image: the windowed standard
/// deviation of the third detail layer, divided by that layer's modal
/// ("noise floor") standard deviation.  Regions whose local contrast stands
/// above the noise floor score above 1.
inline CnrReport cnr_image(const Image& img, int bins = 256) {
    require_nonempty(img, "cnr_image");
    // Only the first three detail layers exist at the depth we read from, so
    // there is no need to decompose further.
    const Pyramid pyr = decompose(img, 3);
    const Image sdev = sdev_image(pyr.details[2], 9, 1);

    CnrReport rep;
    rep.noise_level = noise_estimate(sdev, bins);
    rep.cnr = sdev;
    for (double& v : rep.cnr.data()) v = v / rep.noise_level;

    std::vector<double> sorted(rep.cnr.data());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double acc = 0.0;
    for (double v : sorted) acc += v;
    rep.mean = acc / n;
    double var = 0.0;
    for (double v : sorted) var += (v - rep.mean) * (v - rep.mean);
    rep.stddev = std::sqrt(var / n);
    rep.min = sorted.front();
    rep.max = sorted.back();
    rep.q1 = detail::quantile_sorted(sorted, 0.25);
    rep.median = detail::quantile_sorted(sorted, 0.5);
    rep.q3 = detail::quantile_sorted(sorted, 0.75);
    return rep;
}

/// Relative change of mean CNR, in percent, from `before` to `after`.
inline double improvement_pct(const CnrReport& before, const CnrReport& after) {
    if (!before.cnr.same_shape(after.cnr))
        throw ValidationError("improvement_pct: reports come from different image dimensions");
    if (before.mean == 0.0)
        throw DomainError("improvement_pct: baseline mean CNR is zero");
    return 100.0 * (after.mean - before.mean) / before.mean;
}

} // namespace musica
