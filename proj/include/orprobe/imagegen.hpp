#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "orprobe/image.hpp"

namespace orprobe {

enum class Interp { Nearest, Bilinear };

/// Which layer of a blended composite rotates with the dataset angle.
enum class Condition { FgOnly, BgOnly, BgFg };

enum class BgKind { Natural, Chessboard, Grid, HLines, VLines };

std::string_view to_string(Condition c);
std::string_view to_string(BgKind k);
std::string_view to_string(Interp i);
Condition parse_condition(std::string_view s);
BgKind parse_bg_kind(std::string_view s);
Interp parse_interp(std::string_view s);

struct GenSpec {
    double angle_start = 0.0;
    double angle_step = 1.0;
    int angle_count = 180;
    // 0 selects the rotation-safe default for the source.
    int crop_w = 0;
    int crop_h = 0;
    std::vector<int> fg_diameters;
    double feather = 8.0;
    Interp interp = Interp::Bilinear;
    std::uint64_t seed = 0;
};

struct ManifestEntry {
    std::string path;
    double angle_deg = 0.0;
    std::optional<int> scale_label;
    Condition condition = Condition::FgOnly;
    BgKind bg_kind = BgKind::Natural;

    bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
    std::string set_id;
    std::vector<ManifestEntry> entries;

    bool operator==(const DatasetManifest&) const = default;
};

nlohmann::json to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j);

/// Receives each generated image with its manifest-relative path.
using ImageSink = std::function<void(const std::string& path, const Image& img)>;

/// Clockwise rotation about the image centre onto a same-size canvas.
/// Samples falling outside the source are black.
Image rotate_image(const Image& img, double angle_deg, Interp interp);

/// Central window at offsets floor((dim - crop) / 2).
Image center_crop(const Image& img, int crop_w, int crop_h);

/// Bilinear resample to new dimensions (pixel-centre aligned).
Image resize_bilinear(const Image& img, int width, int height);

/// Pads to a square with black, keeping the content centred.
Image pad_to_square(const Image& img);

/// Radial opacity: 1 up to radius - feather, a linear ramp down to 0 at
/// radius, and 0 from radius outwards. Distances are measured from the
/// geometric centre ((size-1)/2, (size-1)/2).
AlphaMask make_radial_mask(int size, double radius, double feather);

/// out = fg * m + bg * (1 - m) per channel, rounded half up. The mask
/// footprint is centred on `center` (top-left = center - size/2); pixels
/// outside the footprint are copied from bg unchanged.
Image blend(const Image& fg, const Image& bg, const AlphaMask& mask, int center_x, int center_y);

/// Black-and-white pattern with the given period in pixels.
Image gen_synthetic_background(BgKind kind, int width, int height, int period);

/// Largest multiple of 10 not exceeding min(w, h) / sqrt(2).
int rotation_safe_side(int width, int height);

/// Angles start + i * step for i in [0, count), wrapped to [0, 360).
/// Throws InvalidInput on a non-positive step, empty count, or a sequence
/// that revisits an angle.
std::vector<double> angle_sequence(const GenSpec& spec);

/// Rotate then centre-crop the whole source for every angle.
DatasetManifest gen_whole_image_set(const Image& src, const GenSpec& spec,
                                    const std::string& set_id, const ImageSink& sink);

/// Circular foreground patch composited over a background, for each
/// diameter in spec.fg_diameters and each angle. The condition selects
/// which layer rotates.
DatasetManifest gen_blended_set(const Image& fg_src, const Image& bg, const GenSpec& spec,
                                Condition condition, const std::string& set_id,
                                const ImageSink& sink, BgKind bg_kind = BgKind::Natural);

}  // namespace orprobe
