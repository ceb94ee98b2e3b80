#pragma once
// Grayscale image decoding and encoding: PNG (via libpng) and binary PGM (P5).
// Loading normalizes to [0, 1] by the source bit depth; saving quantizes with
// round-half-up at 8 or 16 bits.  Format detection on load uses the file's
// magic bytes, so extensions do not have to be truthful; saving dispatches on
// the extension because there is nothing else to go by.
#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <png.h>

#include "musica/error.hpp"
#include "musica/image.hpp"

namespace musica {

struct SourceImage {
    std::string path;
    int bit_depth = 0;  // 8 or 16
    Image pixels;       // normalized to [0, 1]
};

namespace detail {

class FileHandle {
public:
    FileHandle(const std::string& path, const char* mode) : fp_(std::fopen(path.c_str(), mode)) {
        if (!fp_)
            throw IoError("cannot open '" + path + "'");
    }
    ~FileHandle() { std::fclose(fp_); }
    FileHandle(const FileHandle&) = delete;
    FileHandle& operator=(const FileHandle&) = delete;
    std::FILE* get() const { return fp_; }

private:
    std::FILE* fp_;
};

inline void check_dimensions(long w, long h, const std::string& path) {
    if (w <= 0 || h <= 0 || w > (1 << 20) || h > (1 << 20))
        throw FormatError("'" + path + "': unreasonable image dimensions");
}

// Keep libpng from printing to stderr; errors surface as exceptions instead.
extern "C" inline void png_quiet_error(png_structp png, png_const_charp) {
    png_longjmp(png, 1);
}
extern "C" inline void png_quiet_warning(png_structp, png_const_charp) {}

inline SourceImage decode_png(const std::string& path) {
    FileHandle file(path, "rb");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             png_quiet_error, png_quiet_warning);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error("libpng initialization failed");
    }

    // Everything that must outlive a decode error is declared before setjmp.
    std::vector<unsigned char> data;
    std::vector<png_bytep> rows;
    png_uint_32 w = 0, h = 0;
    int depth = 0, color_type = 0, channels = 0;
    size_t rowbytes = 0;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("'" + path + "': PNG decode failed");
    }

    png_init_io(png, file.get());
    png_read_info(png, info);
    png_get_IHDR(png, info, &w, &h, &depth, &color_type, nullptr, nullptr, nullptr);

    if (color_type == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_tRNS_to_alpha(png);

    png_read_update_info(png, info);
    depth = png_get_bit_depth(png, info);
    color_type = png_get_color_type(png, info);
    channels = png_get_channels(png, info);
    rowbytes = png_get_rowbytes(png, info);

    data.resize(rowbytes * h);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y)
        rows[y] = data.data() + static_cast<size_t>(y) * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    check_dimensions(static_cast<long>(w), static_cast<long>(h), path);
    const int color_channels = channels - ((color_type & PNG_COLOR_MASK_ALPHA) ? 1 : 0);
    const double maxval = depth == 16 ? 65535.0 : 255.0;
    const int bytes = depth == 16 ? 2 : 1;

    SourceImage out;
    out.path = path;
    out.bit_depth = depth == 16 ? 16 : 8;
    out.pixels = Image(static_cast<int>(w), static_cast<int>(h));
    for (png_uint_32 y = 0; y < h; ++y) {
        const unsigned char* row = data.data() + static_cast<size_t>(y) * rowbytes;
        for (png_uint_32 x = 0; x < w; ++x) {
            double sum = 0.0;
            for (int c = 0; c < color_channels; ++c) {
                const unsigned char* p = row + (static_cast<size_t>(x) * channels + c) * bytes;
                sum += bytes == 2 ? (p[0] << 8 | p[1]) : p[0];
            }
            out.pixels(static_cast<int>(x), static_cast<int>(y)) = sum / (color_channels * maxval);
        }
    }
    return out;
}

// One whitespace-delimited PGM header token, with '#' comments skipped.
inline std::string pgm_token(std::istream& in, const std::string& path) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
        } else if (!std::isspace(c)) {
            tok.push_back(static_cast<char>(c));
            while ((c = in.get()) != EOF && !std::isspace(c) && c != '#')
                tok.push_back(static_cast<char>(c));
            if (c != EOF)
                in.unget();  // the terminator is not part of the token
            return tok;
        }
    }
    throw FormatError("'" + path + "': truncated PGM header");
}

inline long pgm_number(std::istream& in, const std::string& path) {
    const std::string tok = pgm_token(in, path);
    try {
        size_t used = 0;
        const long v = std::stol(tok, &used);
        if (used != tok.size())
            throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw FormatError("'" + path + "': bad PGM header field '" + tok + "'");
    }
}

inline SourceImage decode_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "'");
    if (pgm_token(in, path) != "P5")
        throw FormatError("'" + path + "': not a binary PGM");
    const long w = pgm_number(in, path);
    const long h = pgm_number(in, path);
    const long maxval = pgm_number(in, path);
    check_dimensions(w, h, path);
    if (maxval != 255 && maxval != 65535)
        throw FormatError("'" + path + "': unsupported PGM maxval " + std::to_string(maxval));
    // Exactly one whitespace byte separates the header from the raster.
    const int sep = in.get();
    if (sep == EOF || !std::isspace(sep))
        throw FormatError("'" + path + "': malformed PGM header");

    const int bytes = maxval == 65535 ? 2 : 1;
    std::vector<unsigned char> data(static_cast<size_t>(w) * h * bytes);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (in.gcount() != static_cast<std::streamsize>(data.size()))
        throw FormatError("'" + path + "': truncated PGM raster");

    SourceImage out;
    out.path = path;
    out.bit_depth = bytes == 2 ? 16 : 8;
    out.pixels = Image(static_cast<int>(w), static_cast<int>(h));
    const unsigned char* p = data.data();
    for (double& v : out.pixels.data()) {
        const unsigned value = bytes == 2 ? (p[0] << 8 | p[1]) : p[0];  // big-endian
        v = value / static_cast<double>(maxval);
        p += bytes;
    }
    return out;
}

inline std::string lower_extension(const std::string& path) {
    const size_t dot = path.find_last_of('.');
    if (dot == std::string::npos)
        return {};
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

inline std::vector<unsigned char> quantize(const Image& img, int bit_depth, const char* op) {
    if (bit_depth != 8 && bit_depth != 16)
        throw ValidationError(std::string(op) + ": bit depth must be 8 or 16");
    require_nonempty(img, op);
    require_finite(img, op);
    const auto [lo, hi] = min_max(img);
    if (lo < 0.0 || hi > 1.0)
        throw ValidationError(std::string(op) + ": pixels must lie in [0, 1]");

    const double maxval = bit_depth == 16 ? 65535.0 : 255.0;
    const int bytes = bit_depth == 16 ? 2 : 1;
    std::vector<unsigned char> data(img.data().size() * bytes);
    unsigned char* p = data.data();
    for (double v : img.data()) {
        const unsigned level = static_cast<unsigned>(std::floor(v * maxval + 0.5));
        if (bytes == 2) {
            *p++ = static_cast<unsigned char>(level >> 8);
            *p++ = static_cast<unsigned char>(level & 0xff);
        } else {
            *p++ = static_cast<unsigned char>(level);
        }
    }
    return data;
}

inline void encode_png(const Image& img, const std::string& path, int bit_depth,
                       const std::vector<unsigned char>& data) {
    FileHandle file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              png_quiet_error, png_quiet_warning);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw Error("libpng initialization failed");
    }

    std::vector<png_bytep> rows(img.height());
    const size_t rowbytes = static_cast<size_t>(img.width()) * (bit_depth == 16 ? 2 : 1);
    for (int y = 0; y < img.height(); ++y)
        rows[y] = const_cast<png_bytep>(data.data() + static_cast<size_t>(y) * rowbytes);

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("'" + path + "': PNG encode failed");
    }

    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
                 static_cast<png_uint_32>(img.height()), bit_depth, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

inline void encode_pgm(const Image& img, const std::string& path, int bit_depth,
                       const std::vector<unsigned char>& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    out << "P5\n" << img.width() << ' ' << img.height() << '\n'
        << (bit_depth == 16 ? 65535 : 255) << '\n';
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out)
        throw IoError("failed writing '" + path + "'");
}

} // namespace detail

inline SourceImage load_grayscale(const std::string& path) {
    unsigned char magic[2] = {0, 0};
    {
        std::ifstream probe(path, std::ios::binary);
        if (!probe)
            throw IoError("cannot open '" + path + "'");
        probe.read(reinterpret_cast<char*>(magic), 2);
        if (probe.gcount() != 2)
            throw FormatError("'" + path + "': file too short to identify");
    }
    if (magic[0] == 0x89 && magic[1] == 'P')
        return detail::decode_png(path);
    if (magic[0] == 'P' && magic[1] == '5')
        return detail::decode_pgm(path);
    throw FormatError("'" + path + "': unsupported format (expected PNG or binary PGM)");
}

inline void save_grayscale(const Image& img, const std::string& path, int bit_depth = 16) {
    const std::vector<unsigned char> data = detail::quantize(img, bit_depth, "save_grayscale");
    const std::string ext = detail::lower_extension(path);
    if (ext == "png")
        detail::encode_png(img, path, bit_depth, data);
    else if (ext == "pgm")
        detail::encode_pgm(img, path, bit_depth, data);
    else
        throw FormatError("'" + path + "': unsupported output extension (use .png or .pgm)");
}

} // namespace musica
