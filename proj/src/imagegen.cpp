#include "orprobe/imagegen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "orprobe/error.hpp"

namespace orprobe {

namespace {

void require_image(const Image& img, const char* what) {
    if (img.empty()) throw InvalidInput(std::string(what) + ": zero-sized image");
}

std::uint8_t round_half_up(double v) {
    const double r = std::floor(v + 0.5);
    return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

// sin/cos with exact values at multiples of 90 degrees so that quarter turns
// are pure pixel permutations.
void exact_sincos(double angle_deg, double& s, double& c) {
    double a = std::fmod(angle_deg, 360.0);
    if (a < 0.0) a += 360.0;
    if (a == 0.0) {
        s = 0.0; c = 1.0;
    } else if (a == 90.0) {
        s = 1.0; c = 0.0;
    } else if (a == 180.0) {
        s = 0.0; c = -1.0;
    } else if (a == 270.0) {
        s = -1.0; c = 0.0;
    } else {
        const double r = a * std::numbers::pi / 180.0;
        s = std::sin(r);
        c = std::cos(r);
    }
}

std::string format_angle(double a) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%07.3f", a);
    return buf;
}

// True when a crop_w x crop_h window centred on the canvas stays inside the
// source after a rotation by angle_deg.
bool crop_covered(int src_w, int src_h, int crop_w, int crop_h, double angle_deg) {
    double s = 0.0, c = 0.0;
    exact_sincos(angle_deg, s, c);
    s = std::abs(s);
    c = std::abs(c);
    const double a = crop_w / 2.0, b = crop_h / 2.0;
    constexpr double eps = 1e-9;
    return a * c + b * s <= src_w / 2.0 + eps && a * s + b * c <= src_h / 2.0 + eps;
}

}  // namespace

std::string_view to_string(Condition c) {
    switch (c) {
        case Condition::FgOnly: return "FG_ONLY";
        case Condition::BgOnly: return "BG_ONLY";
        case Condition::BgFg: return "BG_FG";
    }
    return "?";
}

std::string_view to_string(BgKind k) {
    switch (k) {
        case BgKind::Natural: return "natural";
        case BgKind::Chessboard: return "chessboard";
        case BgKind::Grid: return "grid";
        case BgKind::HLines: return "hlines";
        case BgKind::VLines: return "vlines";
    }
    return "?";
}

std::string_view to_string(Interp i) {
    return i == Interp::Nearest ? "nearest" : "bilinear";
}

Condition parse_condition(std::string_view s) {
    for (auto c : {Condition::FgOnly, Condition::BgOnly, Condition::BgFg}) {
        if (to_string(c) == s) return c;
    }
    throw InvalidInput("unknown condition '" + std::string(s) + "'");
}

BgKind parse_bg_kind(std::string_view s) {
    for (auto k : {BgKind::Natural, BgKind::Chessboard, BgKind::Grid, BgKind::HLines,
                   BgKind::VLines}) {
        if (to_string(k) == s) return k;
    }
    throw InvalidInput("unknown background kind '" + std::string(s) + "'");
}

Interp parse_interp(std::string_view s) {
    if (s == "nearest") return Interp::Nearest;
    if (s == "bilinear") return Interp::Bilinear;
    throw InvalidInput("unknown interpolation '" + std::string(s) + "'");
}

nlohmann::json to_json(const DatasetManifest& m) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : m.entries) {
        entries.push_back({
            {"path", e.path},
            {"angle_deg", e.angle_deg},
            {"scale_label", e.scale_label ? nlohmann::json(*e.scale_label) : nlohmann::json()},
            {"condition", to_string(e.condition)},
            {"bg_kind", to_string(e.bg_kind)},
        });
    }
    return {{"set_id", m.set_id}, {"entries", std::move(entries)}};
}

DatasetManifest manifest_from_json(const nlohmann::json& j) {
    try {
        DatasetManifest m;
        m.set_id = j.at("set_id").get<std::string>();
        for (const auto& e : j.at("entries")) {
            ManifestEntry entry;
            entry.path = e.at("path").get<std::string>();
            entry.angle_deg = e.at("angle_deg").get<double>();
            if (e.contains("scale_label") && !e.at("scale_label").is_null()) {
                entry.scale_label = e.at("scale_label").get<int>();
            }
            entry.condition = parse_condition(e.at("condition").get<std::string>());
            entry.bg_kind = parse_bg_kind(e.at("bg_kind").get<std::string>());
            m.entries.push_back(std::move(entry));
        }
        return m;
    } catch (const nlohmann::json::exception& ex) {
        throw FormatError(std::string("malformed manifest: ") + ex.what());
    }
}

Image rotate_image(const Image& img, double angle_deg, Interp interp) {
    require_image(img, "rotate_image");
    if (!std::isfinite(angle_deg)) throw InvalidInput("rotate_image: angle must be finite");

    const int w = img.width(), h = img.height();
    double s = 0.0, c = 0.0;
    exact_sincos(angle_deg, s, c);
    const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;

    Image out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            // Inverse map: an output pixel takes its value from the source
            // location rotated counter-clockwise by the same angle.
            const double dx = x - cx, dy = y - cy;
            const double sx = cx + dx * c + dy * s;
            const double sy = cy - dx * s + dy * c;
            if (sx < -0.5 || sx >= w - 0.5 || sy < -0.5 || sy >= h - 0.5) continue;

            if (interp == Interp::Nearest) {
                const int ix = static_cast<int>(std::floor(sx + 0.5));
                const int iy = static_cast<int>(std::floor(sy + 0.5));
                for (int ch = 0; ch < Image::kChannels; ++ch) out.at(x, y, ch) = img.at(ix, iy, ch);
                continue;
            }

            // The half-pixel border replicates the edge sample.
            const double px = std::clamp(sx, 0.0, static_cast<double>(w - 1));
            const double py = std::clamp(sy, 0.0, static_cast<double>(h - 1));
            const int x0 = static_cast<int>(std::floor(px));
            const int y0 = static_cast<int>(std::floor(py));
            const int x1 = std::min(x0 + 1, w - 1);
            const int y1 = std::min(y0 + 1, h - 1);
            const double fx = px - x0, fy = py - y0;
            const double w00 = (1 - fx) * (1 - fy), w10 = fx * (1 - fy);
            const double w01 = (1 - fx) * fy, w11 = fx * fy;
            for (int ch = 0; ch < Image::kChannels; ++ch) {
                const double v = w00 * img.at(x0, y0, ch) + w10 * img.at(x1, y0, ch) +
                                 w01 * img.at(x0, y1, ch) + w11 * img.at(x1, y1, ch);
                out.at(x, y, ch) = round_half_up(v);
            }
        }
    }
    return out;
}

Image center_crop(const Image& img, int crop_w, int crop_h) {
    require_image(img, "center_crop");
    if (crop_w < 1 || crop_h < 1 || crop_w > img.width() || crop_h > img.height()) {
        throw InvalidInput("center_crop: " + std::to_string(crop_w) + "x" + std::to_string(crop_h) +
                           " does not fit in " + std::to_string(img.width()) + "x" +
                           std::to_string(img.height()));
    }
    const int ox = (img.width() - crop_w) / 2;
    const int oy = (img.height() - crop_h) / 2;
    Image out(crop_w, crop_h);
    for (int y = 0; y < crop_h; ++y)
        for (int x = 0; x < crop_w; ++x)
            for (int ch = 0; ch < Image::kChannels; ++ch) out.at(x, y, ch) = img.at(ox + x, oy + y, ch);
    return out;
}

Image resize_bilinear(const Image& img, int width, int height) {
    require_image(img, "resize_bilinear");
    Image out(width, height);
    if (width == img.width() && height == img.height()) return img;
    const double sx_scale = static_cast<double>(img.width()) / width;
    const double sy_scale = static_cast<double>(img.height()) / height;
    for (int y = 0; y < height; ++y) {
        const double py = std::clamp((y + 0.5) * sy_scale - 0.5, 0.0, img.height() - 1.0);
        const int y0 = static_cast<int>(std::floor(py));
        const int y1 = std::min(y0 + 1, img.height() - 1);
        const double fy = py - y0;
        for (int x = 0; x < width; ++x) {
            const double px = std::clamp((x + 0.5) * sx_scale - 0.5, 0.0, img.width() - 1.0);
            const int x0 = static_cast<int>(std::floor(px));
            const int x1 = std::min(x0 + 1, img.width() - 1);
            const double fx = px - x0;
            for (int ch = 0; ch < Image::kChannels; ++ch) {
                const double top = (1 - fx) * img.at(x0, y0, ch) + fx * img.at(x1, y0, ch);
                const double bot = (1 - fx) * img.at(x0, y1, ch) + fx * img.at(x1, y1, ch);
                out.at(x, y, ch) = round_half_up((1 - fy) * top + fy * bot);
            }
        }
    }
    return out;
}

Image pad_to_square(const Image& img) {
    require_image(img, "pad_to_square");
    const int side = std::max(img.width(), img.height());
    if (side == img.width() && side == img.height()) return img;
    Image out(side, side);
    const int ox = (side - img.width()) / 2;
    const int oy = (side - img.height()) / 2;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int ch = 0; ch < Image::kChannels; ++ch) out.at(ox + x, oy + y, ch) = img.at(x, y, ch);
    return out;
}

AlphaMask make_radial_mask(int size, double radius, double feather) {
    if (size < 1) throw InvalidInput("make_radial_mask: size must be >= 1");
    if (!(radius > 0.0) || radius > size / 2.0) {
        throw InvalidInput("make_radial_mask: radius must lie in (0, size/2]");
    }
    if (!(feather >= 0.0) || feather > radius) {
        throw InvalidInput("make_radial_mask: feather must lie in [0, radius]");
    }

    AlphaMask mask{size, radius, feather, std::vector<double>(static_cast<std::size_t>(size) * size)};
    const double center = (size - 1) / 2.0;
    const double inner = radius - feather;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double d = std::hypot(x - center, y - center);
            double v;
            if (d >= radius) {
                v = 0.0;
            } else if (d <= inner) {
                v = 1.0;
            } else {
                v = (radius - d) / feather;
            }
            mask.values[static_cast<std::size_t>(y) * size + x] = v;
        }
    }
    return mask;
}

Image blend(const Image& fg, const Image& bg, const AlphaMask& mask, int center_x, int center_y) {
    require_image(bg, "blend");
    require_image(fg, "blend");
    const int size = mask.size;
    if (size < 1 || mask.values.size() != static_cast<std::size_t>(size) * size) {
        throw InvalidInput("blend: malformed mask");
    }
    if (fg.width() > size || fg.height() > size) {
        throw InvalidInput("blend: foreground larger than mask");
    }
    const int left = center_x - size / 2;
    const int top = center_y - size / 2;
    if (left < 0 || top < 0 || left + size > bg.width() || top + size > bg.height()) {
        throw InvalidInput("blend: mask footprint of size " + std::to_string(size) +
                           " centred at (" + std::to_string(center_x) + "," +
                           std::to_string(center_y) + ") leaves the background");
    }

    // Foreground is padded with black to the mask size, centred.
    const int fx0 = (size - fg.width()) / 2;
    const int fy0 = (size - fg.height()) / 2;

    Image out = bg;
    for (int my = 0; my < size; ++my) {
        for (int mx = 0; mx < size; ++mx) {
            const double m = mask.at(mx, my);
            const int fx = mx - fx0, fy = my - fy0;
            const bool inside_fg = fx >= 0 && fy >= 0 && fx < fg.width() && fy < fg.height();
            for (int ch = 0; ch < Image::kChannels; ++ch) {
                const double f = inside_fg ? fg.at(fx, fy, ch) : 0.0;
                const double b = bg.at(left + mx, top + my, ch);
                out.at(left + mx, top + my, ch) = round_half_up(f * m + b * (1.0 - m));
            }
        }
    }
    return out;
}

Image gen_synthetic_background(BgKind kind, int width, int height, int period) {
    if (period < 2) throw InvalidInput("gen_synthetic_background: period must be >= 2");
    if (kind == BgKind::Natural) {
        throw InvalidInput("gen_synthetic_background: natural backgrounds come from images");
    }
    Image out(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const bool col_on = (x % period) * 2 < period;
            const bool row_on = (y % period) * 2 < period;
            bool white = false;
            switch (kind) {
                case BgKind::Chessboard: white = ((x / period) + (y / period)) % 2 == 0; break;
                case BgKind::Grid: white = col_on || row_on; break;
                case BgKind::HLines: white = row_on; break;
                case BgKind::VLines: white = col_on; break;
                case BgKind::Natural: break;
            }
            const std::uint8_t v = white ? 255 : 0;
            for (int ch = 0; ch < Image::kChannels; ++ch) out.at(x, y, ch) = v;
        }
    }
    return out;
}

int rotation_safe_side(int width, int height) {
    const double limit = std::min(width, height) / std::numbers::sqrt2;
    const int side = static_cast<int>(std::floor(limit / 10.0)) * 10;
    return side > 0 ? side : std::max(1, static_cast<int>(std::floor(limit)));
}

std::vector<double> angle_sequence(const GenSpec& spec) {
    if (!(spec.angle_step > 0.0) || !std::isfinite(spec.angle_step)) {
        throw InvalidInput("angle_step must be a positive finite number");
    }
    if (spec.angle_count < 1) throw InvalidInput("angle_count must be >= 1");
    if (!std::isfinite(spec.angle_start)) throw InvalidInput("angle_start must be finite");

    std::vector<double> angles;
    angles.reserve(static_cast<std::size_t>(spec.angle_count));
    for (int i = 0; i < spec.angle_count; ++i) {
        double a = std::fmod(spec.angle_start + i * spec.angle_step, 360.0);
        if (a < 0.0) a += 360.0;
        if (a >= 360.0) a -= 360.0;
        angles.push_back(a);
    }
    auto sorted = angles;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i] - sorted[i - 1] < 1e-9) {
            throw InvalidInput("angle sequence revisits " + std::to_string(sorted[i]) + " degrees");
        }
    }
    if (sorted.size() > 1 && sorted.front() + 360.0 - sorted.back() < 1e-9) {
        throw InvalidInput("angle sequence wraps onto its start");
    }
    return angles;
}

DatasetManifest gen_whole_image_set(const Image& src, const GenSpec& spec,
                                    const std::string& set_id, const ImageSink& sink) {
    require_image(src, "gen_whole_image_set");
    const auto angles = angle_sequence(spec);
    int cw = spec.crop_w, ch = spec.crop_h;
    if (cw == 0 || ch == 0) cw = ch = rotation_safe_side(src.width(), src.height());
    if (cw > src.width() || ch > src.height()) {
        throw InvalidInput("crop larger than source image");
    }
    for (double a : angles) {
        if (!crop_covered(src.width(), src.height(), cw, ch, a)) {
            throw InvalidInput("crop " + std::to_string(cw) + "x" + std::to_string(ch) +
                               " would include blank canvas at " + std::to_string(a) + " degrees");
        }
    }

    DatasetManifest manifest{set_id, {}};
    manifest.entries.reserve(angles.size());
    for (double a : angles) {
        const Image out = center_crop(rotate_image(src, a, spec.interp), cw, ch);
        ManifestEntry e;
        e.path = set_id + "_a" + format_angle(a) + ".png";
        e.angle_deg = a;
        // The whole frame rotates, so both layers move together.
        e.condition = Condition::BgFg;
        e.bg_kind = BgKind::Natural;
        if (sink) sink(e.path, out);
        manifest.entries.push_back(std::move(e));
    }
    return manifest;
}

DatasetManifest gen_blended_set(const Image& fg_src, const Image& bg, const GenSpec& spec,
                                Condition condition, const std::string& set_id,
                                const ImageSink& sink, BgKind bg_kind) {
    require_image(fg_src, "gen_blended_set");
    require_image(bg, "gen_blended_set");
    const auto angles = angle_sequence(spec);
    if (spec.fg_diameters.empty()) throw InvalidInput("gen_blended_set: no foreground diameters");

    const bool rotates_bg = condition != Condition::FgOnly;
    const bool rotates_fg = condition != Condition::BgOnly;

    // Canvas: explicit crop for every condition, otherwise the full
    // background when it stays upright and the rotation-safe square when
    // it turns.
    int cw = spec.crop_w, ch = spec.crop_h;
    const bool explicit_crop = cw > 0 && ch > 0;
    if (!explicit_crop) {
        if (rotates_bg) {
            cw = ch = rotation_safe_side(bg.width(), bg.height());
        } else {
            cw = bg.width();
            ch = bg.height();
        }
    }
    if (cw > bg.width() || ch > bg.height()) throw InvalidInput("crop larger than background");
    if (rotates_bg) {
        for (double a : angles) {
            if (!crop_covered(bg.width(), bg.height(), cw, ch, a)) {
                throw InvalidInput("background crop would include blank canvas at " +
                                   std::to_string(a) + " degrees");
            }
        }
    }
    for (int d : spec.fg_diameters) {
        if (d < 1 || d > std::min(cw, ch)) {
            throw InvalidInput("foreground diameter " + std::to_string(d) +
                               " does not fit the " + std::to_string(cw) + "x" +
                               std::to_string(ch) + " canvas");
        }
    }
    if (!(spec.feather >= 0.0)) throw InvalidInput("feather must be >= 0");

    const Image square_fg = pad_to_square(fg_src);
    const Image upright_canvas = center_crop(bg, cw, ch);

    DatasetManifest manifest{set_id, {}};
    manifest.entries.reserve(angles.size() * spec.fg_diameters.size());
    for (std::size_t si = 0; si < spec.fg_diameters.size(); ++si) {
        const int diameter = spec.fg_diameters[si];
        const int scale_label = static_cast<int>(si) + 1;
        const Image patch = resize_bilinear(square_fg, diameter, diameter);
        const double radius = diameter / 2.0;
        for (double a : angles) {
            const Image canvas =
                rotates_bg ? center_crop(rotate_image(bg, a, spec.interp), cw, ch) : upright_canvas;
            const Image fg_rot = rotate_image(patch, rotates_fg ? a : 0.0, spec.interp);
            const AlphaMask mask = make_radial_mask(diameter, radius, std::min(spec.feather, radius));
            const Image out = blend(fg_rot, canvas, mask, cw / 2, ch / 2);

            ManifestEntry e;
            e.path = set_id + "_" + std::string(to_string(condition)) + "_s" +
                     std::to_string(scale_label) + "_a" + format_angle(a) + ".png";
            e.angle_deg = a;
            e.scale_label = scale_label;
            e.condition = condition;
            e.bg_kind = bg_kind;
            if (sink) sink(e.path, out);
            manifest.entries.push_back(std::move(e));
        }
    }
    return manifest;
}

}  // namespace orprobe
