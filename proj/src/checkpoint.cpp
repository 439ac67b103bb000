#include "shapemap/checkpoint.hpp"

#include <cstdint>
#include <fstream>

#include "json.hpp"

namespace shapemap {

using nlohmann::json;

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors) {
    json header;
    header["dtype"] = "f64le";
    header["tensors"] = json::array();
    for (const auto& nt : tensors)
        header["tensors"].push_back({{"name", nt.name}, {"shape", nt.tensor.shape()}});
    const std::string header_str = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open checkpoint for writing: " + path.string());
    const std::uint64_t len = header_str.size();
    char lenbuf[8];
    for (int i = 0; i < 8; ++i) lenbuf[i] = static_cast<char>((len >> (8 * i)) & 0xff);
    out.write(lenbuf, 8);
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    for (const auto& nt : tensors) {
        const auto& d = nt.tensor.data();
        out.write(reinterpret_cast<const char*>(d.data()),
                  static_cast<std::streamsize>(d.size() * sizeof(double)));
    }
    if (!out) throw DataError("write failed for checkpoint: " + path.string());
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path.string());
    char lenbuf[8];
    in.read(lenbuf, 8);
    if (!in) throw DataError("truncated checkpoint header: " + path.string());
    std::uint64_t len = 0;
    for (int i = 0; i < 8; ++i)
        len |= static_cast<std::uint64_t>(static_cast<unsigned char>(lenbuf[i])) << (8 * i);
    std::string header_str(len, '\0');
    in.read(header_str.data(), static_cast<std::streamsize>(len));
    if (!in) throw DataError("truncated checkpoint header: " + path.string());

    json header = json::parse(header_str);
    if (header.value("dtype", "") != "f64le")
        throw DataError("unsupported checkpoint dtype tag in " + path.string());

    std::vector<NamedTensor> out;
    for (const auto& entry : header.at("tensors")) {
        NamedTensor nt;
        nt.name = entry.at("name").get<std::string>();
        auto shape = entry.at("shape").get<std::vector<int>>();
        const int n = shape_numel(shape);
        std::vector<double> data(static_cast<size_t>(n));
        in.read(reinterpret_cast<char*>(data.data()),
                static_cast<std::streamsize>(data.size() * sizeof(double)));
        if (!in) throw DataError("truncated payload for tensor " + nt.name + " in " + path.string());
        nt.tensor = Tensor::from_data(std::move(shape), std::move(data));
        out.push_back(std::move(nt));
    }
    return out;
}

}  // namespace shapemap
