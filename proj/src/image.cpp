#include "orprobe/image.hpp"

#include <string>

#include "orprobe/error.hpp"

namespace orprobe {

namespace {
std::size_t checked_size(int width, int height) {
    if (width < 1 || height < 1) {
        throw InvalidInput("image dimensions must be >= 1, got " + std::to_string(width) + "x" +
                           std::to_string(height));
    }
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * Image::kChannels;
}
}  // namespace

Image::Image(int width, int height, std::uint8_t fill)
    : width_(width), height_(height), data_(checked_size(width, height), fill) {}

Image::Image(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != checked_size(width, height)) {
        throw InvalidInput("image buffer holds " + std::to_string(data_.size()) +
                           " bytes, expected " + std::to_string(checked_size(width, height)));
    }
}

}  // namespace orprobe
