#pragma once

#include <cstdint>
#include <vector>

#include "shapemap/image.hpp"
#include "shapemap/mds.hpp"
#include "shapemap/rng.hpp"
#include "shapemap/stimulus.hpp"

namespace shapemap {

// Latent description of one procedural line drawing. aspect, curvature and
// orientation live in [0,1] and drive both the rendering and the ground-truth
// dissimilarities; size_jitter only perturbs rendering.
struct SyntheticShapeParams {
    double aspect = 0.5;
    double curvature = 0.5;
    double orientation = 0.5;
    double size_jitter = 0.0;   // in [-1,1]
    int category = 0;
    int lobes = 0;              // category motif: radial modulation count
    double lobe_amplitude = 0.0;
};

struct SyntheticConfig {
    int categories = 12;
    int psych_per_category = 5;   // 12 x 5 = 60 stimuli
    int extra_count = 70;
    int tuberlin_per_category = 10;
    int sketchy_per_category = 10;
    int image_size = 64;

    // dissimilarity weights over (aspect, curvature, orientation)
    double aspect_weight = 1.0;
    double curvature_weight = 1.0;
    double orientation_weight = 0.5;
    double noise_sigma = 0.05;

    // latent spread around the category mean, per source kind
    double psych_jitter = 0.06;
    double sketch_jitter = 0.14;

    static SyntheticConfig desk();
    static SyntheticConfig micro();  // tiny corpus for fast tests
};

struct SyntheticCorpus {
    std::vector<StimulusRecord> records;      // fold_id/-coords unset here
    std::vector<GrayscaleImage> images;       // aligned with records
    std::vector<SyntheticShapeParams> params; // aligned with records
    DissimilarityMatrix psych_dissim;         // over records with source psych,
                                              // in record order
    std::vector<int> psych_indices;           // record index per matrix row
};

GrayscaleImage render_shape(const SyntheticShapeParams& p, int image_size);

SyntheticCorpus generate_synthetic_corpus(const SyntheticConfig& cfg, std::uint64_t seed);

// Weighted latent distance used for the ground-truth dissimilarities
// (before noise).
double latent_distance(const SyntheticShapeParams& a, const SyntheticShapeParams& b,
                       const SyntheticConfig& cfg);

}  // namespace shapemap
