#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "shapemap/augment.hpp"

using namespace shapemap;

namespace {

GrayscaleImage asymmetric_image() {
    GrayscaleImage img = GrayscaleImage::blank(9, 7);
    img.at(2, 1) = 0.0;
    img.at(3, 1) = 0.2;
    img.at(4, 6) = 0.1;
    return img;
}

AugmentPolicy desk_policy() {
    AugmentPolicy p;
    p.canvas_size = 64;
    p.rescale_min = 48;
    p.rescale_max = 64;
    p.copies_per_original = 5;
    return p;
}

}  // namespace

TEST_CASE("horizontal_flip probability edge cases and involution") {
    Rng rng(1);
    GrayscaleImage img = asymmetric_image();
    for (int i = 0; i < 20; ++i) {
        GrayscaleImage out = horizontal_flip(img, rng, 0.0);
        CHECK(out.pixels == img.pixels);
    }
    TransformLog log;
    GrayscaleImage once = horizontal_flip(img, rng, 1.0, &log);
    CHECK(log.flipped);
    CHECK(once.pixels != img.pixels);
    GrayscaleImage twice = horizontal_flip(once, rng, 1.0);
    CHECK(twice.pixels == img.pixels);
}

TEST_CASE("horizontal_flip frequency near one half") {
    Rng rng(77);
    GrayscaleImage img = asymmetric_image();
    int flips = 0;
    const int trials = 10000;
    for (int i = 0; i < trials; ++i) {
        TransformLog log;
        horizontal_flip(img, rng, 0.5, &log);
        if (log.flipped) ++flips;
    }
    const double frac = static_cast<double>(flips) / trials;
    CHECK(frac > 0.48);
    CHECK(frac < 0.52);
}

TEST_CASE("rotate_shear with zero angle is pixel-identical") {
    Rng rng(2);
    GrayscaleImage img = asymmetric_image();
    GrayscaleImage out = rotate_shear(img, rng, 0.0);
    CHECK(out.pixels == img.pixels);
}

TEST_CASE("rotate_shear keeps a centered point at the output center") {
    // Rotation and shear are both linear around the center, so a centered
    // ink dot must land at the (symmetric) output canvas center.
    Rng rng(3);
    for (int trial = 0; trial < 25; ++trial) {
        GrayscaleImage img = GrayscaleImage::blank(31, 31);
        img.at(15, 15) = 0.0;
        GrayscaleImage out = rotate_shear(img, rng, 15.0);
        int best_r = -1, best_c = -1;
        double best = 2.0;
        for (int r = 0; r < out.height; ++r)
            for (int c = 0; c < out.width; ++c)
                if (out.at(r, c) < best) {
                    best = out.at(r, c);
                    best_r = r;
                    best_c = c;
                }
        const double ec = (out.width - 1) / 2.0, er = (out.height - 1) / 2.0;
        CHECK(std::hypot(best_r - er, best_c - ec) <= 1.0);
        CHECK(out.in_range());
    }
}

TEST_CASE("rotate_shear approximately preserves ink mass") {
    GrayscaleImage square = GrayscaleImage::blank(40, 40);
    for (int r = 8; r < 32; ++r)
        for (int c = 8; c < 32; ++c)
            if (r < 11 || r >= 29 || c < 11 || c >= 29) square.at(r, c) = 0.0;  // thick frame
    const double mass = square.ink_mass();
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        GrayscaleImage out = rotate_shear(square, rng, 15.0);
        CHECK(std::abs(out.ink_mass() - mass) / mass < 0.05);
    }
}

TEST_CASE("bounding_box examples and scan oracle") {
    GrayscaleImage img = GrayscaleImage::blank(10, 8);
    img.at(3, 5) = 0.0;
    auto box = bounding_box(img);
    CHECK(box.top == 3);
    CHECK(box.left == 5);
    CHECK(box.bottom == 3);
    CHECK(box.right == 5);

    GrayscaleImage black = GrayscaleImage::blank(6, 4, 0.0);
    auto full = bounding_box(black);
    CHECK(full.top == 0);
    CHECK(full.left == 0);
    CHECK(full.bottom == 3);
    CHECK(full.right == 5);

    CHECK_THROWS_AS(bounding_box(GrayscaleImage::blank(5, 5)), DataError);

    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        GrayscaleImage scatter = GrayscaleImage::blank(17, 13);
        int top = 99, left = 99, bottom = -1, right = -1;
        std::uniform_int_distribution<int> rr(0, 12), cc(0, 16);
        for (int k = 0; k < 6; ++k) {
            const int r = rr(rng), c = cc(rng);
            scatter.at(r, c) = 0.3;
            top = std::min(top, r);
            left = std::min(left, c);
            bottom = std::max(bottom, r);
            right = std::max(right, c);
        }
        auto got = bounding_box(scatter);
        CHECK(got.top == top);
        CHECK(got.left == left);
        CHECK(got.bottom == bottom);
        CHECK(got.right == right);
    }
}

TEST_CASE("rescale_and_place identity configuration") {
    AugmentPolicy p;
    p.canvas_size = 32;
    p.rescale_min = 32;
    p.rescale_max = 32;
    GrayscaleImage img = GrayscaleImage::blank(32, 32);
    img.at(5, 7) = 0.0;
    img.at(20, 13) = 0.25;
    Rng rng(12);
    TransformLog log;
    GrayscaleImage out = rescale_and_place(img, rng, p, &log);
    CHECK(out.pixels == img.pixels);
    CHECK(log.offset_x == 0);
    CHECK(log.offset_y == 0);
    CHECK(log.scaled_longer_side == 32);
}

TEST_CASE("rescale_and_place size histogram follows placement counts") {
    // weight(s) = (canvas - s + 1)^2; 3-sigma band per size on 1e5 draws
    AugmentPolicy p;
    p.canvas_size = 24;
    p.rescale_min = 18;
    p.rescale_max = 24;
    GrayscaleImage square = GrayscaleImage::blank(20, 20, 0.0);
    double total_weight = 0.0;
    for (int s = p.rescale_min; s <= p.rescale_max; ++s)
        total_weight += std::pow(p.canvas_size - s + 1.0, 2.0);

    Rng rng(13);
    const int trials = 100000;
    std::vector<int> counts(static_cast<size_t>(p.rescale_max - p.rescale_min + 1), 0);
    for (int t = 0; t < trials; ++t) {
        TransformLog log;
        GrayscaleImage out = rescale_and_place(square, rng, p, &log);
        REQUIRE(log.scaled_longer_side >= p.rescale_min);
        REQUIRE(log.scaled_longer_side <= p.rescale_max);
        ++counts[static_cast<size_t>(log.scaled_longer_side - p.rescale_min)];
        if (t == 0) CHECK(out.in_range());
    }
    for (int s = p.rescale_min; s <= p.rescale_max; ++s) {
        const double prob = std::pow(p.canvas_size - s + 1.0, 2.0) / total_weight;
        const double expected = trials * prob;
        const double sigma = std::sqrt(trials * prob * (1.0 - prob));
        CHECK(std::abs(counts[static_cast<size_t>(s - p.rescale_min)] - expected) < 3.0 * sigma);
    }
}

TEST_CASE("rescale_and_place keeps the longer object side within bounds") {
    Rng rng(14);
    AugmentPolicy p = desk_policy();
    for (int trial = 0; trial < 50; ++trial) {
        std::uniform_int_distribution<int> wd(3, 80), hd(3, 80);
        GrayscaleImage img = GrayscaleImage::blank(wd(rng), hd(rng), 0.0);
        GrayscaleImage out = rescale_and_place(img, rng, p);
        REQUIRE(out.width == p.canvas_size);
        REQUIRE(out.height == p.canvas_size);
        auto box = bounding_box(out, 0.95);
        const int longer = std::max(box.bottom - box.top, box.right - box.left) + 1;
        CHECK(longer >= p.rescale_min - 1);  // bilinear halo tolerance
        CHECK(longer <= p.rescale_max);
    }
}

TEST_CASE("salt_pepper noise levels") {
    Rng rng(15);
    GrayscaleImage gray = GrayscaleImage::blank(100, 100, 0.5);
    CHECK(salt_pepper(gray, rng, 0.0).pixels == gray.pixels);

    GrayscaleImage all = salt_pepper(gray, rng, 1.0);
    for (double v : all.pixels) CHECK((v == 0.0 || v == 1.0));

    GrayscaleImage big = GrayscaleImage::blank(400, 250, 0.5);  // 1e5 pixels
    GrayscaleImage noisy = salt_pepper(big, rng, 0.1);
    int corrupted = 0;
    for (double v : noisy.pixels)
        if (v != 0.5) ++corrupted;
    const double frac = corrupted / 100000.0;
    CHECK(frac > 0.09);
    CHECK(frac < 0.11);

    CHECK_THROWS_AS(salt_pepper(gray, rng, 1.5), ValidationError);
}

TEST_CASE("augment_stimulus respects the psych policy") {
    StimulusRecord rec;
    rec.id = "psych_007";
    rec.source = Source::psych;
    rec.fold_id = 3;
    GrayscaleImage img = GrayscaleImage::blank(40, 40);
    for (int c = 10; c < 30; ++c) img.at(20, c) = 0.0;

    AugmentPolicy p = desk_policy();
    p.allow_flip = false;
    p.allow_rotate_shear = false;
    auto instances = augment_stimulus(rec, img, p, 42);
    REQUIRE(instances.size() == 5);
    for (const auto& inst : instances) {
        CHECK(inst.fold_id == 3);
        CHECK(inst.origin_id == "psych_007");
        CHECK_FALSE(inst.transform_log.flipped);
        CHECK(inst.transform_log.rotation_deg == 0.0);
        CHECK(inst.transform_log.shear_deg == 0.0);
        CHECK(inst.image.in_range());
    }

    AugmentPolicy bad = desk_policy();  // flips enabled for a psych stimulus
    CHECK_THROWS_AS(augment_stimulus(rec, img, bad, 42), ConfigError);

    p.copies_per_original = 0;
    CHECK(augment_stimulus(rec, img, p, 42).empty());
}

TEST_CASE("augment_stimulus inherits fold ids and is seed-deterministic") {
    StimulusRecord rec;
    rec.id = "tub_001";
    rec.source = Source::tuberlin_like;
    rec.fold_id = 2;
    GrayscaleImage img = GrayscaleImage::blank(50, 50);
    for (int r = 12; r < 38; ++r) {
        img.at(r, 12) = 0.0;
        img.at(r, 37) = 0.0;
        img.at(12, r) = 0.0;
        img.at(37, r) = 0.0;
    }
    AugmentPolicy p = desk_policy();
    p.copies_per_original = 100;
    auto a = augment_stimulus(rec, img, p, 99);
    auto b = augment_stimulus(rec, img, p, 99);
    auto c = augment_stimulus(rec, img, p, 100);
    REQUIRE(a.size() == 100);
    bool any_difference_from_other_seed = false;
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].fold_id == 2);
        CHECK(a[i].image.pixels == b[i].image.pixels);  // byte-for-byte
        CHECK(a[i].image.in_range());
        if (a[i].image.pixels != c[i].image.pixels) any_difference_from_other_seed = true;
    }
    CHECK(any_difference_from_other_seed);
}

TEST_CASE("pgm round-trip") {
    GrayscaleImage img = GrayscaleImage::blank(13, 9);
    for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c) img.at(r, c) = (r * img.width + c) % 256 / 255.0;
    const auto path = std::filesystem::temp_directory_path() / "shapemap_test.pgm";
    save_pgm(path, img);
    GrayscaleImage back = load_pgm(path);
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    for (size_t i = 0; i < img.pixels.size(); ++i)
        CHECK(std::abs(back.pixels[i] - img.pixels[i]) < 1.0 / 255.0 + 1e-9);
    std::filesystem::remove(path);
}
