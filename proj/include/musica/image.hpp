#pragma once

#include "musica/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace musica {

/// Grayscale intensity image. Row-major doubles, value semantics.
///
/// Intensities are kept in double precision regardless of the source bit
/// depth; the enhancement math uses fractional powers and exp/ln, and the
/// cost is negligible at radiograph sizes.
class Image {
public:
    Image() = default;

    Image(int width, int height, double fill = 0.0)
        : width_(width), height_(height), data_(checked_size(width, height), fill) {}

    Image(int width, int height, std::vector<double> data)
        : width_(width), height_(height), data_(std::move(data)) {
        if (data_.size() != checked_size(width, height))
            throw ValidationError("image data length does not match width * height");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return data_.empty(); }
    std::size_t pixel_count() const { return data_.size(); }

    double& operator()(int x, int y) { return data_[index(x, y)]; }
    const double& operator()(int x, int y) const { return data_[index(x, y)]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Image& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

private:
    static std::size_t checked_size(int width, int height) {
        if (width <= 0 || height <= 0)
            throw ValidationError("image dimensions must be positive");
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

inline void require_nonempty(const Image& img, const char* op) {
    if (img.empty())
        throw ValidationError(std::string(op) + ": empty image");
}

inline void require_finite(const Image& img, const char* op) {
    for (double v : img.data())
        if (!std::isfinite(v))
            throw ValidationError(std::string(op) + ": non-finite pixel value");
}

inline std::pair<double, double> min_max(const Image& img) {
    require_nonempty(img, "min_max");
    auto [lo, hi] = std::minmax_element(img.data().begin(), img.data().end());
    return {*lo, *hi};
}

/// Largest absolute difference between two same-shaped images.
inline double max_abs_diff(const Image& a, const Image& b) {
    if (!a.same_shape(b))
        throw ValidationError("max_abs_diff: shape mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    return worst;
}

inline Image add(const Image& a, const Image& b) {
    if (!a.same_shape(b))
        throw ValidationError("add: shape mismatch");
    Image out = a;
    for (std::size_t i = 0; i < out.data().size(); ++i)
        out.data()[i] += b.data()[i];
    return out;
}

inline Image subtract(const Image& a, const Image& b) {
    if (!a.same_shape(b))
        throw ValidationError("subtract: shape mismatch");
    Image out = a;
    for (std::size_t i = 0; i < out.data().size(); ++i)
        out.data()[i] -= b.data()[i];
    return out;
}

inline Image scale(const Image& a, double factor) {
    Image out = a;
    for (double& v : out.data())
        v *= factor;
    return out;
}

/// Affine rescale to [0, 1]: (v - min) / (max - min).
/// A constant image maps to all zeros so batch jobs never abort on
/// degenerate corpus members.
inline Image normalize_minmax(const Image& img) {
    require_nonempty(img, "normalize_minmax");
    require_finite(img, "normalize_minmax");
    auto [lo, hi] = min_max(img);
    Image out = img;
    if (lo == hi) {
        std::fill(out.data().begin(), out.data().end(), 0.0);
        return out;
    }
    const double inv = 1.0 / (hi - lo);
    for (double& v : out.data())
        v = (v - lo) * inv;
    return out;
}

/// Dynamic-range compression ln(1 + X). Maps [0, 1] onto [0, ln 2]; weak and
/// strong edges end up in comparable ranges. Requires non-negative input.
inline Image log_compress(const Image& img) {
    require_nonempty(img, "log_compress");
    require_finite(img, "log_compress");
    Image out = img;
    for (double& v : out.data()) {
        if (v < 0.0)
            throw DomainError("log_compress: pixel value below 0");
        v = std::log1p(v);
    }
    return out;
}

/// Inverse of log_compress: e^X - 1.
inline Image inverse_log(const Image& img) {
    require_nonempty(img, "inverse_log");
    require_finite(img, "inverse_log");
    Image out = img;
    for (double& v : out.data()) {
        v = std::expm1(v);
        if (!std::isfinite(v))
            throw DomainError("inverse_log: result overflows");
    }
    return out;
}

/// Clip every pixel to [0, 1]. Applied exactly once, at the final pipeline
/// output before encoding; clamping mid-pipeline would distort detail
/// coefficients.
inline Image clamp01(const Image& img) {
    require_finite(img, "clamp01");
    Image out = img;
    for (double& v : out.data())
        v = std::clamp(v, 0.0, 1.0);
    return out;
}

} // namespace musica
