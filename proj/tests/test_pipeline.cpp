#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "musica/cnr.hpp"
#include "musica/pipeline.hpp"
#include "support/phantom.hpp"
#include "support/testutil.hpp"

using musica::Image;
using musica::PipelineConfig;
using Catch::Approx;

namespace {

Image normalized_random(int w, int h, unsigned seed) {
    return musica::normalize_minmax(testutil::random_image(w, h, seed));
}

} // namespace

TEST_CASE("enhance validates input and configuration", "[pipeline]") {
    PipelineConfig cfg;
    SECTION("input must be normalized to the unit interval") {
        REQUIRE_THROWS_AS(musica::enhance(Image(16, 16, 1.5), cfg), musica::ValidationError);
        REQUIRE_THROWS_AS(musica::enhance(Image(16, 16, -0.2), cfg), musica::ValidationError);
        REQUIRE_THROWS_AS(musica::enhance(Image(), cfg), musica::ValidationError);
    }
    SECTION("parameter records are checked before any work") {
        cfg.musica.p = 2.0;
        REQUIRE_THROWS_AS(musica::enhance(Image(16, 16, 0.5), cfg), musica::ValidationError);
        cfg.musica.p = 0.5;
        cfg.nlm.patch_size = 4;
        REQUIRE_THROWS_AS(musica::enhance(Image(16, 16, 0.5), cfg), musica::ValidationError);
    }
}

TEST_CASE("enhance maps constant images to constant images", "[pipeline]") {
    for (auto mode : {musica::Mode::conventional, musica::Mode::multistage}) {
        PipelineConfig cfg;
        cfg.mode = mode;
        cfg.musica.levels = 4;
        Image out = musica::enhance(Image(40, 32, 0.37), cfg);
        REQUIRE(out.width() == 40);
        REQUIRE(out.height() == 32);
        auto [lo, hi] = musica::min_max(out);
        REQUIRE(lo == hi);  // exactly flat, or renormalization would shred it
    }
    SECTION("conventional mode keeps the constant's value") {
        PipelineConfig cfg;
        cfg.mode = musica::Mode::conventional;
        Image out = musica::enhance(Image(24, 24, 0.37), cfg);
        REQUIRE(out(0, 0) == 0.37);
    }
}

TEST_CASE("multistage with identity amplification returns the input", "[pipeline]") {
    PipelineConfig cfg;
    cfg.musica = musica::MusicaParams(1.0, 1.0, 1.0, 0.01, 7);
    cfg.denoise_enabled = false;

    // The identity claim needs min 0 / max 1 input, otherwise the inter-stage
    // renormalization legitimately stretches the range.
    Image img = normalized_random(33, 27, 2024);
    Image out = musica::enhance(img, cfg);
    REQUIRE(musica::max_abs_diff(img, out) <= 1e-6);
}

TEST_CASE("enhance output is always finite and inside the unit interval", "[pipeline]") {
    for (auto mode : {musica::Mode::conventional, musica::Mode::multistage}) {
        PipelineConfig cfg;
        cfg.mode = mode;
        cfg.nlm = musica::NlmParams(3, 7, 0.1);  // keep the test quick
        Image img = normalized_random(48, 36, mode == musica::Mode::multistage ? 7u : 8u);
        Image out = musica::enhance(img, cfg);
        REQUIRE(out.same_shape(img));
        auto [lo, hi] = musica::min_max(out);
        REQUIRE(lo >= 0.0);
        REQUIRE(hi <= 1.0);
        for (double v : out.data()) REQUIRE(std::isfinite(v));
    }
}

TEST_CASE("enhance is deterministic", "[pipeline]") {
    PipelineConfig cfg;
    cfg.nlm = musica::NlmParams(3, 7, 0.1);
    Image img = normalized_random(32, 32, 99);
    Image a = musica::enhance(img, cfg);
    Image b = musica::enhance(img, cfg);
    REQUIRE(musica::max_abs_diff(a, b) == 0.0);
}

TEST_CASE("conventional mode is exactly the single-stage operator", "[pipeline]") {
    PipelineConfig cfg;
    cfg.mode = musica::Mode::conventional;
    cfg.denoise_enabled = true;  // must be ignored in this mode
    Image img = normalized_random(40, 40, 3);
    Image expected = musica::clamp01(musica::musica_enhance(img, cfg.musica));
    REQUIRE(musica::max_abs_diff(musica::enhance(img, cfg), expected) == 0.0);
}

TEST_CASE("denoise flag changes multistage output only through stage C", "[pipeline]") {
    PipelineConfig with;
    with.nlm = musica::NlmParams(3, 7, 0.1);
    PipelineConfig without = with;
    without.denoise_enabled = false;

    Image img = normalized_random(40, 40, 15);
    Image a = musica::enhance(img, with);
    Image b = musica::enhance(img, without);
    // Same stages A and B; the NLM pass must make some difference on noise.
    REQUIRE(musica::max_abs_diff(a, b) > 0.0);

    // And composing the missing stage C onto the denoise-off output's
    // pre-clamp state reproduces the denoise-on path: verify by running the
    // documented formula end to end.
    Image u = musica::inverse_log(musica::musica_enhance(musica::log_compress(img), with.musica));
    Image v = musica::musica_enhance(musica::normalize_minmax(u), with.musica);
    Image v_den = musica::inverse_log(
        musica::nlm_denoise(musica::log_compress(musica::normalize_minmax(v)), with.nlm));
    REQUIRE(musica::max_abs_diff(a, musica::clamp01(musica::normalize_minmax(v_den))) == 0.0);
    REQUIRE(musica::max_abs_diff(b, musica::clamp01(musica::normalize_minmax(v))) == 0.0);
}

TEST_CASE("multistage raises mean CNR above conventional on a textured phantom", "[pipeline]") {
    const unsigned seed = GENERATE(1000u, 1001u, 1002u);
    Image img = musica::normalize_minmax(phantom::radiograph(512, 512, seed));

    PipelineConfig multi;
    PipelineConfig conv;
    conv.mode = musica::Mode::conventional;

    const double cnr_orig = musica::cnr_image(img).mean;
    const double cnr_multi = musica::cnr_image(musica::enhance(img, multi)).mean;
    const double cnr_conv = musica::cnr_image(musica::enhance(img, conv)).mean;

    CAPTURE(seed, cnr_orig, cnr_conv, cnr_multi);
    REQUIRE(cnr_multi > cnr_conv);
    REQUIRE(cnr_multi > cnr_orig);
    REQUIRE(cnr_conv > cnr_orig);
}
