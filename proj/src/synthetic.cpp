#include "shapemap/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace shapemap {

SyntheticConfig SyntheticConfig::desk() { return SyntheticConfig{}; }

SyntheticConfig SyntheticConfig::micro() {
    SyntheticConfig cfg;
    cfg.categories = 4;
    cfg.psych_per_category = 3;
    cfg.extra_count = 6;
    cfg.tuberlin_per_category = 3;
    cfg.sketchy_per_category = 3;
    return cfg;
}

double latent_distance(const SyntheticShapeParams& a, const SyntheticShapeParams& b,
                       const SyntheticConfig& cfg) {
    const double da = a.aspect - b.aspect;
    const double dc = a.curvature - b.curvature;
    const double dd = a.orientation - b.orientation;
    return std::sqrt(cfg.aspect_weight * da * da + cfg.curvature_weight * dc * dc +
                     cfg.orientation_weight * dd * dd);
}

GrayscaleImage render_shape(const SyntheticShapeParams& p, int image_size) {
    GrayscaleImage img = GrayscaleImage::blank(image_size, image_size);
    const double cx = (image_size - 1) / 2.0, cy = (image_size - 1) / 2.0;

    // Superellipse outline: exponent interpolates round (curvature=1) to
    // boxy (curvature=0); a category "lobe" modulation adds a class motif.
    const double exponent = 2.0 + (1.0 - std::clamp(p.curvature, 0.0, 1.0)) * 4.0;
    const double half_long = 0.38 * image_size * (1.0 + 0.12 * p.size_jitter);
    const double ratio = 0.35 + 0.6 * std::clamp(p.aspect, 0.0, 1.0);
    const double half_short = half_long * ratio;
    const double angle = (std::clamp(p.orientation, 0.0, 1.0) - 0.5) * std::numbers::pi / 2.0;
    const double ca = std::cos(angle), sa = std::sin(angle);
    const double thickness = std::max(1.0, image_size / 48.0);

    const int samples = 16 * image_size;
    double prev_x = 0.0, prev_y = 0.0;
    bool have_prev = false;
    auto stamp = [&](double x, double y) {
        const int r0 = std::max(0, static_cast<int>(std::floor(y - thickness - 1)));
        const int r1 = std::min(image_size - 1, static_cast<int>(std::ceil(y + thickness + 1)));
        const int c0 = std::max(0, static_cast<int>(std::floor(x - thickness - 1)));
        const int c1 = std::min(image_size - 1, static_cast<int>(std::ceil(x + thickness + 1)));
        for (int r = r0; r <= r1; ++r)
            for (int c = c0; c <= c1; ++c) {
                const double d = std::hypot(c - x, r - y);
                const double coverage = std::clamp(thickness / 2.0 + 0.5 - d, 0.0, 1.0);
                img.at(r, c) = std::min(img.at(r, c), 1.0 - coverage);
            }
    };
    for (int s = 0; s <= samples; ++s) {
        const double t = 2.0 * std::numbers::pi * s / samples;
        const double cu = std::cos(t), su = std::sin(t);
        double ex = std::copysign(std::pow(std::abs(cu), 2.0 / exponent), cu) * half_long;
        double ey = std::copysign(std::pow(std::abs(su), 2.0 / exponent), su) * half_short;
        if (p.lobes > 0) {
            const double mod = 1.0 + p.lobe_amplitude * std::cos(p.lobes * t);
            ex *= mod;
            ey *= mod;
        }
        const double x = cx + ca * ex - sa * ey;
        const double y = cy + sa * ex + ca * ey;
        if (have_prev) {
            const double seg = std::hypot(x - prev_x, y - prev_y);
            const int steps = std::max(1, static_cast<int>(std::ceil(seg / 0.5)));
            for (int k = 1; k <= steps; ++k) {
                const double f = static_cast<double>(k) / steps;
                stamp(prev_x + f * (x - prev_x), prev_y + f * (y - prev_y));
            }
        } else {
            stamp(x, y);
        }
        prev_x = x;
        prev_y = y;
        have_prev = true;
    }
    return img;
}

namespace {

SyntheticShapeParams draw_params(Rng& rng, const SyntheticShapeParams& mean, double jitter) {
    std::normal_distribution<double> n(0.0, jitter);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SyntheticShapeParams p = mean;
    p.aspect = std::clamp(mean.aspect + n(rng), 0.0, 1.0);
    p.curvature = std::clamp(mean.curvature + n(rng), 0.0, 1.0);
    p.orientation = std::clamp(mean.orientation + n(rng), 0.0, 1.0);
    p.size_jitter = u(rng);
    return p;
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const SyntheticConfig& cfg, std::uint64_t seed) {
    if (cfg.categories < 1) throw ConfigError("synthetic corpus: need at least one category");
    SyntheticCorpus corpus;

    // Category means spread over the latent cube; lobe counts give each
    // category a visual motif beyond the three similarity latents.
    std::vector<SyntheticShapeParams> means(static_cast<size_t>(cfg.categories));
    {
        Rng rng = make_rng(seed, "category-means");
        std::uniform_real_distribution<double> u(0.08, 0.92);
        for (int c = 0; c < cfg.categories; ++c) {
            auto& m = means[static_cast<size_t>(c)];
            m.aspect = u(rng);
            m.curvature = u(rng);
            m.orientation = u(rng);
            m.category = c;
            m.lobes = 2 + c % 5;
            m.lobe_amplitude = 0.05 + 0.01 * (c % 3);
        }
    }

    auto add_record = [&](Source source, const std::string& id, int category,
                          const SyntheticShapeParams& p) {
        StimulusRecord rec;
        rec.id = id;
        rec.source = source;
        rec.path = "images/" + id + ".pgm";
        rec.class_label = category;
        corpus.records.push_back(std::move(rec));
        corpus.params.push_back(p);
        corpus.images.push_back(render_shape(p, cfg.image_size));
    };

    char buf[64];
    for (int c = 0; c < cfg.categories; ++c)
        for (int i = 0; i < cfg.psych_per_category; ++i) {
            std::snprintf(buf, sizeof(buf), "psych_%03d", c * cfg.psych_per_category + i);
            Rng rng = make_rng(seed, "psych", static_cast<std::uint64_t>(c * 1000 + i));
            const auto p = draw_params(rng, means[static_cast<size_t>(c)], cfg.psych_jitter);
            corpus.psych_indices.push_back(static_cast<int>(corpus.records.size()));
            add_record(Source::psych, buf, c, p);
        }
    for (int i = 0; i < cfg.extra_count; ++i) {
        const int c = i % cfg.categories;
        std::snprintf(buf, sizeof(buf), "extra_%03d", i);
        Rng rng = make_rng(seed, "extra", static_cast<std::uint64_t>(i));
        add_record(Source::extra_linedrawing, buf, c,
                   draw_params(rng, means[static_cast<size_t>(c)], cfg.psych_jitter));
    }
    for (int c = 0; c < cfg.categories; ++c)
        for (int i = 0; i < cfg.tuberlin_per_category; ++i) {
            std::snprintf(buf, sizeof(buf), "tub_%03d", c * cfg.tuberlin_per_category + i);
            Rng rng = make_rng(seed, "tuberlin", static_cast<std::uint64_t>(c * 1000 + i));
            add_record(Source::tuberlin_like, buf, c,
                       draw_params(rng, means[static_cast<size_t>(c)], cfg.sketch_jitter));
        }
    for (int c = 0; c < cfg.categories; ++c)
        for (int i = 0; i < cfg.sketchy_per_category; ++i) {
            std::snprintf(buf, sizeof(buf), "sk_%03d", c * cfg.sketchy_per_category + i);
            Rng rng = make_rng(seed, "sketchy", static_cast<std::uint64_t>(c * 1000 + i));
            add_record(Source::sketchy_like, buf, c,
                       draw_params(rng, means[static_cast<size_t>(c)], cfg.sketch_jitter));
        }

    // Ground-truth dissimilarities over the psych subset.
    const int n = static_cast<int>(corpus.psych_indices.size());
    corpus.psych_dissim = DissimilarityMatrix(n);
    Rng noise_rng = make_rng(seed, "dissim-noise");
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double base = latent_distance(corpus.params[corpus.psych_indices[i]],
                                                corpus.params[corpus.psych_indices[j]], cfg);
            const double eps = cfg.noise_sigma > 0.0 ? cfg.noise_sigma * noise(noise_rng) : 0.0;
            corpus.psych_dissim.set(i, j, std::max(0.0, base + eps));
        }
    corpus.psych_dissim.validate();
    return corpus;
}

}  // namespace shapemap
