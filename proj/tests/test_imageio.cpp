#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <png.h>

#include "musica/imageio.hpp"
#include "support/testutil.hpp"

using musica::Image;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path dir;
    TempDir() {
        dir = fs::temp_directory_path() / ("musica_io_" + std::to_string(::getpid()) + "_" +
                                           std::to_string(counter()++));
        fs::create_directories(dir);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    std::string operator/(const std::string& name) const { return (dir / name).string(); }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

std::vector<unsigned char> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void append_text(std::vector<unsigned char>& bytes, const std::string& text) {
    bytes.insert(bytes.end(), text.begin(), text.end());
}

// Minimal RGB/RGBA PNG writer for exercising the multi-channel load path.
void write_color_png(const std::string& path, int w, int h, int channels,
                     const std::vector<unsigned char>& interleaved) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    REQUIRE(fp != nullptr);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    REQUIRE(setjmp(png_jmpbuf(png)) == 0);
    png_init_io(png, fp);
    png_set_IHDR(png, info, w, h, 8,
                 channels == 4 ? PNG_COLOR_TYPE_RGBA : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y)
        rows[y] = const_cast<png_bytep>(interleaved.data() +
                                        static_cast<size_t>(y) * w * channels);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

} // namespace

TEST_CASE("8-bit PGM pixels normalize by 255", "[imageio]") {
    TempDir tmp;
    const std::string path = tmp / "two.pgm";
    std::vector<unsigned char> bytes;
    append_text(bytes, "P5\n# a comment\n2 1\n255\n");
    bytes.push_back(255);
    bytes.push_back(128);
    write_bytes(path, bytes);

    const musica::SourceImage src = musica::load_grayscale(path);
    REQUIRE(src.bit_depth == 8);
    REQUIRE(src.pixels.width() == 2);
    REQUIRE(src.pixels.height() == 1);
    CHECK(src.pixels(0, 0) == 1.0);
    CHECK(src.pixels(1, 0) == 128.0 / 255.0);
}

TEST_CASE("16-bit PGM raster is big-endian", "[imageio]") {
    TempDir tmp;
    const std::string path = tmp / "deep.pgm";
    std::vector<unsigned char> bytes;
    append_text(bytes, "P5 3 1 65535\n");
    const unsigned char raster[] = {0xff, 0xff, 0x80, 0x00, 0x00, 0x01};
    bytes.insert(bytes.end(), std::begin(raster), std::end(raster));
    write_bytes(path, bytes);

    const musica::SourceImage src = musica::load_grayscale(path);
    REQUIRE(src.bit_depth == 16);
    CHECK(src.pixels(0, 0) == 1.0);
    CHECK(src.pixels(1, 0) == 32768.0 / 65535.0);
    CHECK(src.pixels(2, 0) == 1.0 / 65535.0);
}

TEST_CASE("PGM rejects maxvals other than 255 and 65535", "[imageio]") {
    TempDir tmp;
    const std::string path = tmp / "odd.pgm";
    std::vector<unsigned char> bytes;
    append_text(bytes, "P5 1 1 100\n");
    bytes.push_back(50);
    write_bytes(path, bytes);
    CHECK_THROWS_AS(musica::load_grayscale(path), musica::FormatError);
}

TEST_CASE("truncated PGM raster is a format error", "[imageio]") {
    TempDir tmp;
    const std::string path = tmp / "short.pgm";
    std::vector<unsigned char> bytes;
    append_text(bytes, "P5 4 4 255\n");
    bytes.push_back(1);  // 15 bytes missing
    write_bytes(path, bytes);
    CHECK_THROWS_AS(musica::load_grayscale(path), musica::FormatError);
}

TEST_CASE("load dispatch and failure modes", "[imageio]") {
    TempDir tmp;

    SECTION("missing file") {
        CHECK_THROWS_AS(musica::load_grayscale(tmp / "absent.png"), musica::IoError);
    }
    SECTION("unrecognized magic") {
        const std::string path = tmp / "junk.png";
        write_bytes(path, {'h', 'e', 'l', 'l', 'o'});
        CHECK_THROWS_AS(musica::load_grayscale(path), musica::FormatError);
    }
    SECTION("color PGM magic is not supported") {
        const std::string path = tmp / "color.ppm";
        write_bytes(path, {'P', '6', '\n', '1', ' ', '1', ' ', '2', '5', '5', '\n', 1, 2, 3});
        CHECK_THROWS_AS(musica::load_grayscale(path), musica::FormatError);
    }
    SECTION("PNG magic with corrupt body") {
        const std::string path = tmp / "bad.png";
        write_bytes(path, {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n', 0, 0, 0, 0});
        CHECK_THROWS_AS(musica::load_grayscale(path), musica::FormatError);
    }
    SECTION("extension does not matter on load") {
        const std::string path = tmp / "mislabeled.pgm";
        musica::save_grayscale(musica::normalize_minmax(testutil::ramp_image(3, 2)), path + ".png", 8);
        std::filesystem::rename(path + ".png", path);
        CHECK(musica::load_grayscale(path).bit_depth == 8);
    }
}

TEST_CASE("PNG and PGM round-trips stay within the quantization step", "[imageio]") {
    TempDir tmp;
    const Image img = musica::normalize_minmax(testutil::random_image(23, 17, 42));

    struct Case {
        const char* name;
        int depth;
    };
    const auto c = GENERATE(Case{"a.png", 8}, Case{"b.png", 16}, Case{"c.pgm", 8},
                            Case{"d.pgm", 16});
    const std::string path = tmp / c.name;
    musica::save_grayscale(img, path, c.depth);

    const musica::SourceImage back = musica::load_grayscale(path);
    REQUIRE(back.bit_depth == c.depth);
    REQUIRE(back.pixels.width() == img.width());
    REQUIRE(back.pixels.height() == img.height());
    const double step = c.depth == 16 ? 1.0 / 65535.0 : 1.0 / 255.0;
    CHECK(musica::max_abs_diff(img, back.pixels) <= 0.5 * step);
}

TEST_CASE("16-bit round-trip preserves exact levels", "[imageio]") {
    TempDir tmp;
    Image img(4, 1);
    img(0, 0) = 0.0;
    img(1, 0) = 1.0 / 65535.0;
    img(2, 0) = 65534.0 / 65535.0;
    img(3, 0) = 1.0;
    const std::string path = tmp / "levels.png";
    musica::save_grayscale(img, path, 16);
    const musica::SourceImage back = musica::load_grayscale(path);
    for (int x = 0; x < 4; ++x)
        CHECK(back.pixels(x, 0) == img(x, 0));
}

TEST_CASE("save quantizes with round-half-up", "[imageio]") {
    TempDir tmp;
    Image img(3, 1);
    img(0, 0) = 0.5;  // 127.5 -> 128
    img(1, 0) = 0.0;
    img(2, 0) = 1.0;
    const std::string path = tmp / "mid.pgm";
    musica::save_grayscale(img, path, 8);

    const std::vector<unsigned char> bytes = read_bytes(path);
    REQUIRE(bytes.size() >= 3);
    CHECK(bytes[bytes.size() - 3] == 128);
    CHECK(bytes[bytes.size() - 2] == 0);
    CHECK(bytes[bytes.size() - 1] == 255);
}

TEST_CASE("save validates pixels, depth, and extension", "[imageio]") {
    TempDir tmp;
    Image img(2, 1);
    img(0, 0) = 0.25;
    img(1, 0) = 0.75;

    SECTION("out-of-range pixel") {
        img(1, 0) = 1.5;
        CHECK_THROWS_AS(musica::save_grayscale(img, tmp / "x.png"), musica::ValidationError);
    }
    SECTION("negative pixel") {
        img(0, 0) = -0.1;
        CHECK_THROWS_AS(musica::save_grayscale(img, tmp / "x.pgm"), musica::ValidationError);
    }
    SECTION("non-finite pixel") {
        img(0, 0) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(musica::save_grayscale(img, tmp / "x.png"), musica::ValidationError);
    }
    SECTION("unsupported depth") {
        CHECK_THROWS_AS(musica::save_grayscale(img, tmp / "x.png", 12), musica::ValidationError);
    }
    SECTION("unsupported extension") {
        CHECK_THROWS_AS(musica::save_grayscale(img, tmp / "x.bmp"), musica::FormatError);
    }
    SECTION("unwritable path") {
        CHECK_THROWS_AS(musica::save_grayscale(img, tmp / "no/such/dir/x.png"),
                        musica::IoError);
    }
}

TEST_CASE("multi-channel PNGs load as the channel average", "[imageio]") {
    TempDir tmp;

    SECTION("RGB") {
        const std::string path = tmp / "rgb.png";
        write_color_png(path, 2, 1, 3, {30, 60, 90, 255, 255, 255});
        const musica::SourceImage src = musica::load_grayscale(path);
        CHECK(src.pixels(0, 0) == 60.0 / 255.0);
        CHECK(src.pixels(1, 0) == 1.0);
    }
    SECTION("RGBA ignores alpha") {
        const std::string path = tmp / "rgba.png";
        write_color_png(path, 1, 1, 4, {30, 60, 90, 0});
        const musica::SourceImage src = musica::load_grayscale(path);
        CHECK(src.pixels(0, 0) == 60.0 / 255.0);
    }
}
