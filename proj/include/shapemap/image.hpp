#pragma once

#include <filesystem>
#include <vector>

#include "shapemap/tensor.hpp"

namespace shapemap {

// Single-channel raster in [0,1]; 1 is white background, 0 is black ink.
struct GrayscaleImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;  // row-major

    static GrayscaleImage blank(int width, int height, double value = 1.0);

    double& at(int row, int col) { return pixels[static_cast<size_t>(row) * width + col]; }
    double at(int row, int col) const { return pixels[static_cast<size_t>(row) * width + col]; }

    bool in_range() const;       // every pixel within [0,1]
    double ink_mass() const;     // sum of (1 - pixel)
};

// Binary 8-bit PGM (P5).
GrayscaleImage load_pgm(const std::filesystem::path& path);
void save_pgm(const std::filesystem::path& path, const GrayscaleImage& img);

Tensor image_to_tensor(const GrayscaleImage& img);                   // 1 x H x W
Tensor images_to_batch(const std::vector<const GrayscaleImage*>& imgs);  // N x 1 x H x W

}  // namespace shapemap
