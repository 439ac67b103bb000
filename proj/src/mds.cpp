#include "shapemap/mds.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace shapemap {

void DissimilarityMatrix::set(int i, int j, double v) {
    d_[static_cast<size_t>(i) * n_ + j] = v;
    d_[static_cast<size_t>(j) * n_ + i] = v;
}

void DissimilarityMatrix::validate() const {
    for (int i = 0; i < n_; ++i) {
        if (at(i, i) != 0.0)
            throw ValidationError("dissimilarity matrix: nonzero diagonal at " + std::to_string(i));
        for (int j = 0; j < n_; ++j) {
            if (at(i, j) < 0.0)
                throw ValidationError("dissimilarity matrix: negative entry at (" +
                                      std::to_string(i) + "," + std::to_string(j) + ")");
            if (at(i, j) != at(j, i))
                throw ValidationError("dissimilarity matrix: asymmetric at (" + std::to_string(i) +
                                      "," + std::to_string(j) + ")");
        }
    }
}

std::vector<double> DissimilarityMatrix::condensed() const {
    std::vector<double> out;
    out.reserve(static_cast<size_t>(n_) * (n_ - 1) / 2);
    for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j) out.push_back(at(i, j));
    return out;
}

DissimilarityMatrix DissimilarityMatrix::submatrix(const std::vector<int>& indices) const {
    DissimilarityMatrix sub(static_cast<int>(indices.size()));
    for (size_t i = 0; i < indices.size(); ++i)
        for (size_t j = 0; j < indices.size(); ++j)
            if (i != j)
                sub.set(static_cast<int>(i), static_cast<int>(j), at(indices[i], indices[j]));
    return sub;
}

std::vector<double> TargetSpace::row(int i) const {
    return std::vector<double>(coords.begin() + static_cast<size_t>(i) * dim,
                               coords.begin() + static_cast<size_t>(i + 1) * dim);
}

TargetSpace classical_mds(const DissimilarityMatrix& d, int dim) {
    d.validate();
    const int n = d.size();
    if (n < 2) throw ValidationError("classical_mds: need at least 2 points");
    if (dim < 1 || dim > n - 1)
        throw ValidationError("classical_mds: dim must lie in [1, n-1], got " + std::to_string(dim));

    // B = -1/2 J D^2 J with J = I - 11^T/n
    Eigen::MatrixXd sq(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) sq(i, j) = d.at(i, j) * d.at(i, j);
    Eigen::VectorXd row_mean = sq.rowwise().mean();
    const double grand = sq.mean();
    Eigen::MatrixXd b(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            b(i, j) = -0.5 * (sq(i, j) - row_mean(i) - row_mean(j) + grand);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
    if (eig.info() != Eigen::Success) throw Error("classical_mds: eigendecomposition failed");

    TargetSpace space;
    space.n = n;
    space.dim = dim;
    space.coords.assign(static_cast<size_t>(n) * dim, 0.0);
    // Eigen returns ascending eigenvalues; take the top `dim`.
    for (int k = 0; k < dim; ++k) {
        const int src = n - 1 - k;
        double lambda = eig.eigenvalues()(src);
        if (lambda < 0.0) {
            lambda = 0.0;
            ++space.clamped_axes;
        }
        const double s = std::sqrt(lambda);
        Eigen::VectorXd axis = eig.eigenvectors().col(src) * s;
        // sign convention: largest-magnitude coordinate positive
        int arg = 0;
        for (int i = 1; i < n; ++i)
            if (std::abs(axis(i)) > std::abs(axis(arg))) arg = i;
        if (axis(arg) < 0.0) axis = -axis;
        for (int i = 0; i < n; ++i) space.coords[static_cast<size_t>(i) * dim + k] = axis(i);
    }
    return space;
}

TargetSpace normalize_space(const TargetSpace& space) {
    if (space.n < 1 || space.dim < 1) throw ValidationError("normalize_space: empty space");
    double sumsq = 0.0;
    for (double v : space.coords) sumsq += v * v;
    if (sumsq <= 0.0) throw ValidationError("normalize_space: degenerate all-zero coordinates");
    const double scale = std::sqrt(static_cast<double>(space.n) * space.dim / sumsq);
    TargetSpace out = space;
    for (double& v : out.coords) v *= scale;
    out.normalization_scale = space.normalization_scale * scale;
    return out;
}

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

void write_dissimilarity_csv(const std::filesystem::path& path, const DissimilarityMatrix& d,
                             const std::vector<std::string>& ids) {
    if (static_cast<int>(ids.size()) != d.size())
        throw ValidationError("dissimilarity csv: id count mismatch");
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out << "id";
    for (const auto& id : ids) out << ',' << id;
    out << '\n';
    char buf[32];
    for (int i = 0; i < d.size(); ++i) {
        out << ids[static_cast<size_t>(i)];
        for (int j = 0; j < d.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", d.at(i, j));
            out << ',' << buf;
        }
        out << '\n';
    }
}

DissimilarityMatrix read_dissimilarity_csv(const std::filesystem::path& path,
                                           std::vector<std::string>* ids) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty dissimilarity csv: " + path.string());
    auto header = split_csv_row(line);
    const int n = static_cast<int>(header.size()) - 1;
    if (n < 1) throw DataError("dissimilarity csv header too short: " + path.string());
    if (ids) ids->assign(header.begin() + 1, header.end());
    DissimilarityMatrix d(n);
    for (int i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw DataError("truncated dissimilarity csv: " + path.string());
        auto cells = split_csv_row(line);
        if (static_cast<int>(cells.size()) != n + 1)
            throw DataError("bad row width in dissimilarity csv: " + path.string());
        for (int j = 0; j < n; ++j)
            if (j >= i) d.set(i, j, std::stod(cells[static_cast<size_t>(j) + 1]));
    }
    d.validate();
    return d;
}

void write_target_space_csv(const std::filesystem::path& path, const TargetSpace& space,
                            const std::vector<std::string>& ids) {
    if (static_cast<int>(ids.size()) != space.n)
        throw ValidationError("target space csv: id count mismatch");
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out << "id";
    for (int k = 0; k < space.dim; ++k) out << ",c" << k;
    out << '\n';
    char buf[32];
    for (int i = 0; i < space.n; ++i) {
        out << ids[static_cast<size_t>(i)];
        for (int k = 0; k < space.dim; ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", space.at(i, k));
            out << ',' << buf;
        }
        out << '\n';
    }
    nlohmann::json meta;
    meta["n"] = space.n;
    meta["dim"] = space.dim;
    meta["normalization_scale"] = space.normalization_scale;
    meta["clamped_axes"] = space.clamped_axes;
    std::ofstream mout(path.string() + ".meta.json");
    mout << meta.dump(2) << '\n';
}

TargetSpace read_target_space_csv(const std::filesystem::path& path,
                                  std::vector<std::string>* ids) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty target space csv: " + path.string());
    const int dim = static_cast<int>(split_csv_row(line).size()) - 1;
    if (dim < 1) throw DataError("target space csv header too short: " + path.string());
    TargetSpace space;
    space.dim = dim;
    if (ids) ids->clear();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv_row(line);
        if (static_cast<int>(cells.size()) != dim + 1)
            throw DataError("bad row width in target space csv: " + path.string());
        if (ids) ids->push_back(cells[0]);
        for (int k = 0; k < dim; ++k)
            space.coords.push_back(std::stod(cells[static_cast<size_t>(k) + 1]));
        ++space.n;
    }
    const auto meta_path = path.string() + ".meta.json";
    if (std::filesystem::exists(meta_path)) {
        std::ifstream min(meta_path);
        nlohmann::json meta = nlohmann::json::parse(min);
        space.normalization_scale = meta.value("normalization_scale", 1.0);
        space.clamped_axes = meta.value("clamped_axes", 0);
    }
    return space;
}

}  // namespace shapemap
