#include "orprobe/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <vector>

#include "orprobe/error.hpp"

namespace orprobe {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw InvalidInput("cannot open " + path.string());
    return f;
}

[[noreturn]] void png_error_fn(png_structp, png_const_charp msg) { throw FormatError(msg); }
void png_warning_fn(png_structp, png_const_charp) {}

}  // namespace

Image read_png(const std::filesystem::path& path) {
    auto file = open_file(path, "rb");
    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
    if (!png) throw InternalError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp* p;
        png_infop* i;
        ~Guard() { png_destroy_read_struct(p, i, nullptr); }
    } guard{&png, &info};

    try {
        png_init_io(png, file.get());
        png_read_info(png, info);
        png_set_expand(png);
        png_set_strip_16(png);
        png_set_strip_alpha(png);
        png_set_gray_to_rgb(png);
        png_read_update_info(png, info);

        const auto w = static_cast<int>(png_get_image_width(png, info));
        const auto h = static_cast<int>(png_get_image_height(png, info));
        if (png_get_rowbytes(png, info) != static_cast<std::size_t>(w) * Image::kChannels) {
            throw FormatError("unexpected PNG row layout in " + path.string());
        }
        std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h * Image::kChannels);
        std::vector<png_bytep> rows(static_cast<std::size_t>(h));
        for (int y = 0; y < h; ++y) rows[y] = data.data() + static_cast<std::size_t>(y) * w * Image::kChannels;
        png_read_image(png, rows.data());
        return Image(w, h, std::move(data));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_png(const std::filesystem::path& path, const Image& img) {
    if (img.empty()) throw InvalidInput("write_png: zero-sized image");
    auto file = open_file(path, "wb");
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
    if (!png) throw InternalError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp* p;
        png_infop* i;
        ~Guard() { png_destroy_write_struct(p, i); }
    } guard{&png, &info};

    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
                 static_cast<png_uint_32>(img.height()), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const auto data = img.data();
    for (int y = 0; y < img.height(); ++y) {
        auto* row = const_cast<png_bytep>(data.data() +
                                          static_cast<std::size_t>(y) * img.width() * Image::kChannels);
        png_write_row(png, row);
    }
    png_write_end(png, nullptr);
}

}  // namespace orprobe
