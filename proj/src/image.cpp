#include "shapemap/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace shapemap {

GrayscaleImage GrayscaleImage::blank(int width, int height, double value) {
    GrayscaleImage img;
    img.width = width;
    img.height = height;
    img.pixels.assign(static_cast<size_t>(width) * height, value);
    return img;
}

bool GrayscaleImage::in_range() const {
    for (double p : pixels)
        if (!(p >= 0.0 && p <= 1.0)) return false;
    return true;
}

double GrayscaleImage::ink_mass() const {
    double m = 0.0;
    for (double p : pixels) m += 1.0 - p;
    return m;
}

GrayscaleImage load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open image: " + path.string());
    std::string magic;
    in >> magic;
    if (magic != "P5") throw DataError("unsupported image format (want binary PGM P5): " + path.string());
    auto next_int = [&in, &path]() {
        // skip whitespace and '#' comment lines
        for (;;) {
            int c = in.peek();
            if (c == '#') {
                std::string line;
                std::getline(in, line);
            } else if (std::isspace(c)) {
                in.get();
            } else {
                break;
            }
        }
        long v = -1;
        in >> v;
        if (!in || v < 0) throw DataError("malformed PGM header: " + path.string());
        return v;
    };
    const long w = next_int(), h = next_int(), maxval = next_int();
    if (maxval <= 0 || maxval > 255) throw DataError("PGM maxval out of range: " + path.string());
    in.get();  // single whitespace byte before payload
    GrayscaleImage img;
    img.width = static_cast<int>(w);
    img.height = static_cast<int>(h);
    img.pixels.resize(static_cast<size_t>(w) * h);
    std::vector<unsigned char> raw(img.pixels.size());
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!in) throw DataError("truncated PGM payload: " + path.string());
    for (size_t i = 0; i < raw.size(); ++i)
        img.pixels[i] = static_cast<double>(raw[i]) / static_cast<double>(maxval);
    return img;
}

void save_pgm(const std::filesystem::path& path, const GrayscaleImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open image for writing: " + path.string());
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.pixels.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        const double v = std::clamp(img.pixels[i], 0.0, 1.0);
        raw[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw DataError("write failed for image: " + path.string());
}

Tensor image_to_tensor(const GrayscaleImage& img) {
    return Tensor::from_data({1, img.height, img.width}, img.pixels);
}

Tensor images_to_batch(const std::vector<const GrayscaleImage*>& imgs) {
    if (imgs.empty()) throw DataError("images_to_batch: empty batch");
    const int h = imgs[0]->height, w = imgs[0]->width;
    std::vector<double> data;
    data.reserve(imgs.size() * static_cast<size_t>(h) * w);
    for (const GrayscaleImage* img : imgs) {
        if (img->height != h || img->width != w)
            throw DimensionError("images_to_batch: mixed image sizes in one batch");
        data.insert(data.end(), img->pixels.begin(), img->pixels.end());
    }
    return Tensor::from_data({static_cast<int>(imgs.size()), 1, h, w}, std::move(data));
}

}  // namespace shapemap
