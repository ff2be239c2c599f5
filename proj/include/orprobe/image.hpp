#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace orprobe {

/// 8-bit RGB raster, row-major, channels interleaved.
class Image {
public:
    static constexpr int kChannels = 3;

    Image() = default;
    /// Throws InvalidInput when either dimension is < 1.
    Image(int width, int height, std::uint8_t fill = 0);
    Image(int width, int height, std::vector<std::uint8_t> data);

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return data_.empty(); }

    std::uint8_t& at(int x, int y, int c) { return data_[index(x, y, c)]; }
    std::uint8_t at(int x, int y, int c) const { return data_[index(x, y, c)]; }

    std::span<const std::uint8_t> data() const { return data_; }
    std::span<std::uint8_t> data() { return data_; }

    bool operator==(const Image&) const = default;

private:
    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x)) * kChannels + static_cast<std::size_t>(c);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Square opacity map; 1.0 is fully foreground.
struct AlphaMask {
    int size = 0;
    double radius = 0.0;
    double feather = 0.0;
    std::vector<double> values;

    double at(int x, int y) const {
        return values[static_cast<std::size_t>(y) * static_cast<std::size_t>(size) +
                      static_cast<std::size_t>(x)];
    }
};

}  // namespace orprobe
