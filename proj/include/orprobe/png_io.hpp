#pragma once

#include <filesystem>

#include "orprobe/image.hpp"

namespace orprobe {

/// Reads any 8/16-bit PNG and converts it to 8-bit RGB (alpha dropped).
Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& img);

}  // namespace orprobe
