#include "shapemap/augment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace shapemap {

void AugmentPolicy::validate() const {
    if (copies_per_original < 0) throw ConfigError("augment policy: copies_per_original < 0");
    if (max_angle_degrees < 0.0) throw ConfigError("augment policy: max_angle_degrees < 0");
    if (!(rescale_min >= 1 && rescale_min <= rescale_max && rescale_max <= canvas_size))
        throw ConfigError("augment policy: need 1 <= rescale_min <= rescale_max <= canvas_size");
}

GrayscaleImage horizontal_flip(const GrayscaleImage& img, Rng& rng, double p, TransformLog* log) {
    if (p < 0.0 || p > 1.0) throw ValidationError("horizontal_flip: probability outside [0,1]");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const bool do_flip = u(rng) < p;
    if (log) log->flipped = do_flip;
    if (!do_flip) return img;
    GrayscaleImage out = img;
    for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c) out.at(r, c) = img.at(r, img.width - 1 - c);
    return out;
}

namespace {

double sample_bilinear_white(const GrayscaleImage& img, double x, double y) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0, fy = y - y0;
    auto tap = [&](int yy, int xx) {
        if (yy < 0 || yy >= img.height || xx < 0 || xx >= img.width) return 1.0;  // white fill
        return img.at(yy, xx);
    };
    const double top = tap(y0, x0) * (1.0 - fx) + tap(y0, x0 + 1) * fx;
    const double bot = tap(y0 + 1, x0) * (1.0 - fx) + tap(y0 + 1, x0 + 1) * fx;
    return top * (1.0 - fy) + bot * fy;
}

constexpr double deg_to_rad(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace

GrayscaleImage rotate_shear(const GrayscaleImage& img, Rng& rng, double max_angle_deg,
                            TransformLog* log) {
    if (max_angle_deg < 0.0) throw ValidationError("rotate_shear: max_angle must be >= 0");
    std::uniform_real_distribution<double> u(-max_angle_deg, max_angle_deg);
    const double rot_deg = max_angle_deg == 0.0 ? 0.0 : u(rng);
    const double shear_deg = max_angle_deg == 0.0 ? 0.0 : u(rng);
    if (log) {
        log->rotation_deg = rot_deg;
        log->shear_deg = shear_deg;
    }
    if (rot_deg == 0.0 && shear_deg == 0.0) return img;

    // Forward map A = Shear * Rotation on pixel-center coordinates around the
    // image center; the shear is horizontal (x grows with y).
    const double ct = std::cos(deg_to_rad(rot_deg)), st = std::sin(deg_to_rad(rot_deg));
    const double sh = std::tan(deg_to_rad(shear_deg));
    const double a00 = ct + sh * st, a01 = -st + sh * ct;
    const double a10 = st, a11 = ct;

    const double cx = (img.width - 1) / 2.0, cy = (img.height - 1) / 2.0;
    double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
    for (int corner = 0; corner < 4; ++corner) {
        const double px = (corner & 1) ? cx : -cx;
        const double py = (corner & 2) ? cy : -cy;
        const double tx = a00 * px + a01 * py;
        const double ty = a10 * px + a11 * py;
        min_x = std::min(min_x, tx);
        max_x = std::max(max_x, tx);
        min_y = std::min(min_y, ty);
        max_y = std::max(max_y, ty);
    }
    const int out_w = static_cast<int>(std::ceil(max_x - min_x)) + 1;
    const int out_h = static_cast<int>(std::ceil(max_y - min_y)) + 1;

    // Inverse of A
    const double det = a00 * a11 - a01 * a10;
    const double i00 = a11 / det, i01 = -a01 / det, i10 = -a10 / det, i11 = a00 / det;
    const double ocx = (out_w - 1) / 2.0, ocy = (out_h - 1) / 2.0;

    GrayscaleImage out = GrayscaleImage::blank(out_w, out_h);
    for (int yo = 0; yo < out_h; ++yo) {
        for (int xo = 0; xo < out_w; ++xo) {
            const double rx = xo - ocx, ry = yo - ocy;
            const double sx = i00 * rx + i01 * ry + cx;
            const double sy = i10 * rx + i11 * ry + cy;
            out.at(yo, xo) = std::clamp(sample_bilinear_white(img, sx, sy), 0.0, 1.0);
        }
    }
    return out;
}

BoundingBox bounding_box(const GrayscaleImage& img, double ink_threshold) {
    BoundingBox box{img.height, img.width, -1, -1};
    for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c)
            if (img.at(r, c) < ink_threshold) {
                box.top = std::min(box.top, r);
                box.left = std::min(box.left, c);
                box.bottom = std::max(box.bottom, r);
                box.right = std::max(box.right, c);
            }
    if (box.bottom < 0) throw DataError("bounding_box: image has no content below threshold");
    return box;
}

GrayscaleImage crop(const GrayscaleImage& img, const BoundingBox& box) {
    if (box.top < 0 || box.left < 0 || box.bottom >= img.height || box.right >= img.width ||
        box.top > box.bottom || box.left > box.right)
        throw ValidationError("crop: box outside image");
    GrayscaleImage out = GrayscaleImage::blank(box.right - box.left + 1, box.bottom - box.top + 1);
    for (int r = 0; r < out.height; ++r)
        for (int c = 0; c < out.width; ++c) out.at(r, c) = img.at(box.top + r, box.left + c);
    return out;
}

GrayscaleImage bilinear_resize(const GrayscaleImage& img, int new_width, int new_height) {
    if (new_width < 1 || new_height < 1) throw ValidationError("bilinear_resize: bad target size");
    if (new_width == img.width && new_height == img.height) return img;
    GrayscaleImage out = GrayscaleImage::blank(new_width, new_height);
    const double sx = static_cast<double>(img.width) / new_width;
    const double sy = static_cast<double>(img.height) / new_height;
    for (int r = 0; r < new_height; ++r)
        for (int c = 0; c < new_width; ++c) {
            const double x = (c + 0.5) * sx - 0.5;
            const double y = (r + 0.5) * sy - 0.5;
            out.at(r, c) = std::clamp(sample_bilinear_white(img, x, y), 0.0, 1.0);
        }
    return out;
}

GrayscaleImage rescale_and_place(const GrayscaleImage& cropped, Rng& rng,
                                 const AugmentPolicy& policy, TransformLog* log) {
    policy.validate();
    if (cropped.width < 1 || cropped.height < 1)
        throw ValidationError("rescale_and_place: empty crop");
    const int canvas = policy.canvas_size;

    // Draw the longer-side size with weight (canvas - s + 1)^2, i.e. uniform
    // over all (size, x, y) placements of a square bound.
    std::uint64_t total = 0;
    for (int s = policy.rescale_min; s <= policy.rescale_max; ++s) {
        const std::uint64_t k = static_cast<std::uint64_t>(canvas - s + 1);
        total += k * k;
    }
    std::uniform_int_distribution<std::uint64_t> pick(0, total - 1);
    std::uint64_t r = pick(rng);
    int size = policy.rescale_max;
    for (int s = policy.rescale_min; s <= policy.rescale_max; ++s) {
        const std::uint64_t k = static_cast<std::uint64_t>(canvas - s + 1);
        if (r < k * k) {
            size = s;
            break;
        }
        r -= k * k;
    }

    const int longer = std::max(cropped.width, cropped.height);
    const double f = static_cast<double>(size) / longer;
    int new_w, new_h;
    if (cropped.width >= cropped.height) {
        new_w = size;
        new_h = std::max(1, static_cast<int>(std::lround(cropped.height * f)));
    } else {
        new_h = size;
        new_w = std::max(1, static_cast<int>(std::lround(cropped.width * f)));
    }
    GrayscaleImage scaled = bilinear_resize(cropped, new_w, new_h);

    std::uniform_int_distribution<int> ox_dist(0, canvas - new_w);
    std::uniform_int_distribution<int> oy_dist(0, canvas - new_h);
    const int ox = ox_dist(rng);
    const int oy = oy_dist(rng);
    if (log) {
        log->scaled_longer_side = size;
        log->offset_x = ox;
        log->offset_y = oy;
    }

    GrayscaleImage out = GrayscaleImage::blank(canvas, canvas);
    for (int r2 = 0; r2 < new_h; ++r2)
        for (int c = 0; c < new_w; ++c) out.at(oy + r2, ox + c) = scaled.at(r2, c);
    return out;
}

GrayscaleImage salt_pepper(const GrayscaleImage& img, Rng& rng, double noise_level) {
    if (noise_level < 0.0 || noise_level > 1.0)
        throw ValidationError("salt_pepper: noise level outside [0,1]");
    if (noise_level == 0.0) return img;
    GrayscaleImage out = img;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& p : out.pixels)
        if (u(rng) < noise_level) p = u(rng) < 0.5 ? 0.0 : 1.0;
    return out;
}

std::vector<AugmentedInstance> augment_stimulus(const StimulusRecord& record,
                                                const GrayscaleImage& image,
                                                const AugmentPolicy& policy,
                                                std::uint64_t global_seed) {
    policy.validate();
    if (record.source == Source::psych && (policy.allow_flip || policy.allow_rotate_shear))
        throw ConfigError("augment: psych stimuli must not be flipped, rotated, or sheared (id " +
                          record.id + ")");

    std::vector<AugmentedInstance> out;
    out.reserve(static_cast<size_t>(policy.copies_per_original));
    for (int copy = 0; copy < policy.copies_per_original; ++copy) {
        Rng rng = make_rng(global_seed, record.id, static_cast<std::uint64_t>(copy));
        AugmentedInstance inst;
        inst.origin_id = record.id;
        inst.fold_id = record.fold_id;
        char suffix[16];
        std::snprintf(suffix, sizeof(suffix), "_a%04d", copy);
        inst.id = record.id + suffix;

        GrayscaleImage work = image;
        if (policy.allow_flip) work = horizontal_flip(work, rng, 0.5, &inst.transform_log);
        if (policy.allow_rotate_shear)
            work = rotate_shear(work, rng, policy.max_angle_degrees, &inst.transform_log);
        work = crop(work, bounding_box(work));
        inst.image = rescale_and_place(work, rng, policy, &inst.transform_log);
        out.push_back(std::move(inst));
    }
    return out;
}

}  // namespace shapemap
