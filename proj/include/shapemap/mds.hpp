#pragma once

#include <filesystem>
#include <vector>

#include "shapemap/error.hpp"

namespace shapemap {

// Symmetric nonnegative dissimilarities with a zero diagonal.
class DissimilarityMatrix {
  public:
    DissimilarityMatrix() = default;
    explicit DissimilarityMatrix(int n) : n_(n), d_(static_cast<size_t>(n) * n, 0.0) {}

    int size() const { return n_; }
    double at(int i, int j) const { return d_[static_cast<size_t>(i) * n_ + j]; }
    void set(int i, int j, double v);  // writes both (i,j) and (j,i)

    // Throws unless symmetric, nonnegative, zero-diagonal.
    void validate() const;

    // Upper-triangle entries (i<j) in row-major order.
    std::vector<double> condensed() const;

    // Submatrix over the given index subset, in order.
    DissimilarityMatrix submatrix(const std::vector<int>& indices) const;

  private:
    int n_ = 0;
    std::vector<double> d_;
};

struct TargetSpace {
    int n = 0;
    int dim = 0;
    std::vector<double> coords;  // n x dim, row-major
    double normalization_scale = 1.0;
    int clamped_axes = 0;  // negative eigenvalues clamped during embedding

    double at(int i, int k) const { return coords[static_cast<size_t>(i) * dim + k]; }
    std::vector<double> row(int i) const;
};

// Torgerson double centering + symmetric eigendecomposition. Axes ordered by
// descending eigenvalue; negative eigenvalues clamp to zero (counted).
// Deterministic sign convention: the largest-magnitude coordinate of each
// axis is positive.
TargetSpace classical_mds(const DissimilarityMatrix& d, int dim);

// Rescales so the mean per-coordinate squared value is one, making the
// zero predictor's per-coordinate MSE exactly 1. Idempotent.
TargetSpace normalize_space(const TargetSpace& space);

void write_dissimilarity_csv(const std::filesystem::path& path, const DissimilarityMatrix& d,
                             const std::vector<std::string>& ids);
DissimilarityMatrix read_dissimilarity_csv(const std::filesystem::path& path,
                                           std::vector<std::string>* ids = nullptr);

void write_target_space_csv(const std::filesystem::path& path, const TargetSpace& space,
                            const std::vector<std::string>& ids);
TargetSpace read_target_space_csv(const std::filesystem::path& path,
                                  std::vector<std::string>* ids = nullptr);

}  // namespace shapemap
