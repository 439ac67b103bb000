#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shapemap/image.hpp"
#include "shapemap/rng.hpp"
#include "shapemap/stimulus.hpp"

namespace shapemap {

struct AugmentPolicy {
    bool allow_flip = true;
    bool allow_rotate_shear = true;
    double max_angle_degrees = 15.0;
    int rescale_min = 168;
    int rescale_max = 224;
    int canvas_size = 224;
    int copies_per_original = 1;

    void validate() const;  // rescale_min <= rescale_max <= canvas_size
};

// What a single augmentation pass actually did.
struct TransformLog {
    bool flipped = false;
    double rotation_deg = 0.0;
    double shear_deg = 0.0;
    int scaled_longer_side = 0;
    int offset_x = 0;
    int offset_y = 0;
};

struct AugmentedInstance {
    std::string id;
    std::string origin_id;
    int fold_id = -1;
    GrayscaleImage image;
    TransformLog transform_log;
};

GrayscaleImage horizontal_flip(const GrayscaleImage& img, Rng& rng, double p,
                               TransformLog* log = nullptr);

// Rotation then horizontal shear, both by independent uniform angles within
// +/- max_angle. Bilinear resampling, white fill, output canvas grown so the
// transformed content fits.
GrayscaleImage rotate_shear(const GrayscaleImage& img, Rng& rng, double max_angle_deg,
                            TransformLog* log = nullptr);

struct BoundingBox {
    int top = 0, left = 0, bottom = 0, right = 0;  // inclusive
};

// Tightest box around pixels darker than ink_threshold.
BoundingBox bounding_box(const GrayscaleImage& img, double ink_threshold = 0.95);

GrayscaleImage crop(const GrayscaleImage& img, const BoundingBox& box);

// Uniformly rescales so the longer side becomes a size drawn such that every
// (size, x-offset, y-offset) placement is equally likely, then places the
// object on a white canvas. Smaller sizes are more likely because they admit
// more offsets.
GrayscaleImage rescale_and_place(const GrayscaleImage& cropped, Rng& rng,
                                 const AugmentPolicy& policy, TransformLog* log = nullptr);

GrayscaleImage bilinear_resize(const GrayscaleImage& img, int new_width, int new_height);

// Each pixel independently corrupted with probability noise_level; corrupted
// pixels become 0 or 1 with equal probability. Training-time only.
GrayscaleImage salt_pepper(const GrayscaleImage& img, Rng& rng, double noise_level);

// Full pipeline (flip -> rotate/shear -> crop -> rescale-and-place), one RNG
// stream per copy derived from (seed, stimulus id, copy index) so parallel
// augmentation is order-independent.
std::vector<AugmentedInstance> augment_stimulus(const StimulusRecord& record,
                                                const GrayscaleImage& image,
                                                const AugmentPolicy& policy,
                                                std::uint64_t global_seed);

}  // namespace shapemap
