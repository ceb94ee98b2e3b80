#pragma once

#include "musica/enhance.hpp"
#include "musica/error.hpp"
#include "musica/image.hpp"
#include "musica/nlm.hpp"

namespace musica {

enum class Mode {
    conventional,  // single MUSICA pass on the normalized input
    multistage,    // MUSICA on the log scale, again on the normal scale, optional NLM
};

/// Everything the full enhancement run needs.  One MusicaParams record drives
/// both amplification stages; `denoise_enabled` only matters in multistage
/// mode, where it gates the final NLM pass.
struct PipelineConfig {
    MusicaParams musica;
    NlmParams nlm;
    bool denoise_enabled = true;
    Mode mode = Mode::multistage;
};

/// Enhance a [0,1]-normalized image.
///
/// Conventional mode is the single-stage baseline: amplify the pyramid
/// coefficients of the input as-is.
///
/// Multistage mode runs the amplification twice -- once on the log-compressed
/// image, where low intensities occupy most of the range, and once more on
/// the re-normalized normal-scale result -- then optionally denoises on the
/// log scale.  Min-max renormalization between stages keeps every
/// amplification input inside the transform's declared [0, 1] domain.  The
/// output is renormalized and clamped to [0, 1].
inline Image enhance(const Image& img, const PipelineConfig& cfg) {
    require_nonempty(img, "enhance");
    require_finite(img, "enhance");
    cfg.musica.validate();
    cfg.nlm.validate();
    {
        const auto [lo, hi] = min_max(img);
        if (lo < 0.0 || hi > 1.0)
            throw ValidationError("enhance: input must be normalized to [0, 1]");
    }

    if (cfg.mode == Mode::conventional)
        return clamp01(musica_enhance(img, cfg.musica));

    Image u = inverse_log(musica_enhance(log_compress(img), cfg.musica));
    Image v = musica_enhance(normalize_minmax(u), cfg.musica);
    if (cfg.denoise_enabled)
        v = inverse_log(nlm_denoise(log_compress(normalize_minmax(v)), cfg.nlm));
    return clamp01(normalize_minmax(v));
}

} // namespace musica
