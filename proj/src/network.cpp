#include "shapemap/network.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace shapemap {

using nlohmann::json;

std::string to_string(Task t) {
    switch (t) {
        case Task::classify: return "classify";
        case Task::reconstruct: return "reconstruct";
        case Task::map: return "map";
    }
    throw ValidationError("unknown task enum value");
}

Task task_from_string(const std::string& s) {
    if (s == "classify") return Task::classify;
    if (s == "reconstruct") return Task::reconstruct;
    if (s == "map") return Task::map;
    throw ConfigError("unknown task '" + s + "'");
}

std::string to_string(ScalePreset s) { return s == ScalePreset::desk ? "desk" : "paper"; }

ScalePreset scale_from_string(const std::string& s) {
    if (s == "desk") return ScalePreset::desk;
    if (s == "paper") return ScalePreset::paper;
    throw ConfigError("unknown scale preset '" + s + "'");
}

ArchConfig ArchConfig::desk() {
    ArchConfig a;
    a.name = "desk";
    a.input_size = 64;
    a.encoder = {
        {EncoderLayer::Kind::conv, {32, 7, 7, 2, 3}, {}},
        {EncoderLayer::Kind::pool, {}, {2, 2}},
        {EncoderLayer::Kind::conv, {64, 5, 5, 1, 2}, {}},
        {EncoderLayer::Kind::pool, {}, {2, 2}},
        {EncoderLayer::Kind::conv, {128, 3, 3, 1, 1}, {}},
        {EncoderLayer::Kind::pool, {}, {2, 2}},
    };
    a.fc1_size = 256;
    a.decoder_fc1 = 256;
    a.decoder_channels = 32;
    a.decoder_seed_hw = 8;
    a.decoder = {
        {2, {16, 5, 5, 1, 2}},
        {2, {8, 5, 5, 1, 2}},
        {2, {1, 5, 5, 1, 2}},
    };
    return a;
}

ArchConfig ArchConfig::paper() {
    ArchConfig a;
    a.name = "paper";
    a.input_size = 224;
    // First conv layer (64 kernels 15x15, stride 3) plus the remaining
    // sketch-recognition stack, all overridable through config files.
    a.encoder = {
        {EncoderLayer::Kind::conv, {64, 15, 15, 3, 0}, {}},
        {EncoderLayer::Kind::pool, {}, {3, 2}},
        {EncoderLayer::Kind::conv, {128, 5, 5, 1, 0}, {}},
        {EncoderLayer::Kind::pool, {}, {3, 2}},
        {EncoderLayer::Kind::conv, {256, 3, 3, 1, 1}, {}},
        {EncoderLayer::Kind::conv, {256, 3, 3, 1, 1}, {}},
        {EncoderLayer::Kind::conv, {256, 3, 3, 1, 1}, {}},
        {EncoderLayer::Kind::pool, {}, {3, 2}},
    };
    a.fc1_size = 512;
    a.decoder_fc1 = 512;
    a.decoder_channels = 256;
    a.decoder_seed_hw = 7;
    a.decoder = {
        {1, {256, 3, 3, 1, 1}},
        {2, {128, 5, 5, 1, 2}},
        {2, {64, 5, 5, 1, 2}},
        {2, {32, 5, 5, 1, 2}},
        {2, {16, 5, 5, 1, 2}},
        {2, {1, 5, 5, 1, 2}},
    };
    return a;
}

ArchConfig ArchConfig::for_scale(ScalePreset scale) {
    return scale == ScalePreset::desk ? desk() : paper();
}

void ArchConfig::validate(int fc2_size, bool with_decoder) const {
    if (input_size < 1) throw ConfigError("arch: input_size must be positive");
    if (fc1_size < 1 || fc2_size < 1) throw ConfigError("arch: fully connected sizes must be positive");
    int h = input_size, c = 1;
    for (size_t i = 0; i < encoder.size(); ++i) {
        const auto& layer = encoder[i];
        if (layer.kind == EncoderLayer::Kind::conv) {
            const auto& cv = layer.conv;
            if (cv.out_channels < 1 || cv.kh < 1 || cv.kw < 1 || cv.stride < 1 || cv.padding < 0)
                throw ConfigError("arch: bad conv spec at encoder layer " + std::to_string(i));
            if (h + 2 * cv.padding < cv.kh)
                throw ConfigError("arch: conv kernel does not fit at encoder layer " +
                                  std::to_string(i));
            h = (h + 2 * cv.padding - cv.kh) / cv.stride + 1;
            c = cv.out_channels;
        } else {
            const auto& pl = layer.pool;
            if (pl.width < 1 || pl.stride < 1)
                throw ConfigError("arch: bad pool spec at encoder layer " + std::to_string(i));
            if (h < pl.width)
                throw ConfigError("arch: pool window exceeds extent at encoder layer " +
                                  std::to_string(i));
            h = (h - pl.width) / pl.stride + 1;
        }
        if (h < 1)
            throw ConfigError("arch: encoder layer " + std::to_string(i) +
                              " collapses spatial extent to " + std::to_string(h));
    }
    if (with_decoder) {
        if (decoder_fc1 < 1 || decoder_channels < 1 || decoder_seed_hw < 1 || decoder.empty())
            throw ConfigError("arch: decoder underspecified");
        int dh = decoder_seed_hw;
        for (size_t i = 0; i < decoder.size(); ++i) {
            const auto& st = decoder[i];
            if (st.unpool < 1) throw ConfigError("arch: bad unpool factor in decoder stage " + std::to_string(i));
            dh *= st.unpool;
            if (dh + 2 * st.conv.padding < st.conv.kh)
                throw ConfigError("arch: decoder conv does not fit at stage " + std::to_string(i));
            dh = (dh + 2 * st.conv.padding - st.conv.kh) / st.conv.stride + 1;
            if (dh < 1) throw ConfigError("arch: decoder stage " + std::to_string(i) + " collapses extent");
        }
        if (decoder.back().conv.out_channels != 1)
            throw ConfigError("arch: decoder must end in a single channel");
        if (dh != input_size)
            throw ConfigError("arch: decoder output extent " + std::to_string(dh) +
                              " does not match input size " + std::to_string(input_size));
    }
}

int ArchConfig::encoder_flat_size() const {
    int h = input_size, c = 1;
    for (const auto& layer : encoder) {
        if (layer.kind == EncoderLayer::Kind::conv) {
            h = (h + 2 * layer.conv.padding - layer.conv.kh) / layer.conv.stride + 1;
            c = layer.conv.out_channels;
        } else {
            h = (h - layer.pool.width) / layer.pool.stride + 1;
        }
    }
    return c * h * h;
}

namespace {

json conv_to_json(const ConvLayerSpec& c) {
    return {{"out_channels", c.out_channels}, {"kh", c.kh}, {"kw", c.kw},
            {"stride", c.stride},             {"padding", c.padding}};
}

ConvLayerSpec conv_from_json(const json& j) {
    ConvLayerSpec c;
    c.out_channels = j.at("out_channels");
    c.kh = j.at("kh");
    c.kw = j.at("kw");
    c.stride = j.at("stride");
    c.padding = j.at("padding");
    return c;
}

}  // namespace

void save_arch_config(const std::filesystem::path& path, const ArchConfig& arch) {
    json j;
    j["name"] = arch.name;
    j["input_size"] = arch.input_size;
    j["encoder"] = json::array();
    for (const auto& layer : arch.encoder) {
        if (layer.kind == EncoderLayer::Kind::conv) {
            json e = conv_to_json(layer.conv);
            e["type"] = "conv";
            j["encoder"].push_back(e);
        } else {
            j["encoder"].push_back({{"type", "pool"}, {"width", layer.pool.width},
                                    {"stride", layer.pool.stride}});
        }
    }
    j["fc1_size"] = arch.fc1_size;
    j["decoder_fc1"] = arch.decoder_fc1;
    j["decoder_channels"] = arch.decoder_channels;
    j["decoder_seed_hw"] = arch.decoder_seed_hw;
    j["decoder"] = json::array();
    for (const auto& st : arch.decoder) {
        json e = conv_to_json(st.conv);
        e["unpool"] = st.unpool;
        j["decoder"].push_back(e);
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot write arch config: " + path.string());
    out << j.dump(2) << "\n";
}

ArchConfig load_arch_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open arch config: " + path.string());
    json j = json::parse(in);
    ArchConfig a;
    a.name = j.value("name", "custom");
    a.input_size = j.at("input_size");
    a.encoder.clear();
    for (const auto& e : j.at("encoder")) {
        EncoderLayer layer;
        if (e.at("type") == "conv") {
            layer.kind = EncoderLayer::Kind::conv;
            layer.conv = conv_from_json(e);
        } else if (e.at("type") == "pool") {
            layer.kind = EncoderLayer::Kind::pool;
            layer.pool.width = e.at("width");
            layer.pool.stride = e.at("stride");
        } else {
            throw ConfigError("arch config: unknown encoder layer type in " + path.string());
        }
        a.encoder.push_back(layer);
    }
    a.fc1_size = j.at("fc1_size");
    a.decoder_fc1 = j.at("decoder_fc1");
    a.decoder_channels = j.at("decoder_channels");
    a.decoder_seed_hw = j.at("decoder_seed_hw");
    a.decoder.clear();
    for (const auto& e : j.at("decoder")) {
        ArchConfig::DecoderStage st;
        st.unpool = e.at("unpool");
        st.conv = conv_from_json(e);
        a.decoder.push_back(st);
    }
    return a;
}

NamedConfig NamedConfig::preset(const std::string& name) {
    NamedConfig c;
    c.name = name;
    if (name == "C_default") {
        c.encoder_weight_decay = 0.0005;
        c.encoder_dropout = true;
        c.noise_level = 0.10;
        c.rep_size = 512;
    } else if (name == "C_small") {
        c.encoder_weight_decay = 0.0005;
        c.encoder_dropout = true;
        c.noise_level = 0.10;
        c.rep_size = 256;
    } else if (name == "C_correlation") {
        c.encoder_weight_decay = 0.001;
        c.encoder_dropout = false;
        c.noise_level = 0.10;
        c.rep_size = 512;
    } else if (name == "R_default") {
        c.encoder_weight_decay = 0.0005;
        c.encoder_dropout = true;
        c.noise_level = 0.10;
        c.rep_size = 512;
        c.decoder_weight_decay = 0.0;
        c.decoder_dropout = false;
    } else if (name == "R_best") {
        c.encoder_weight_decay = 0.0;
        c.encoder_dropout = false;
        c.noise_level = 0.10;
        c.rep_size = 512;
        c.decoder_weight_decay = 0.0;
        c.decoder_dropout = false;
    } else {
        throw ConfigError("unknown configuration preset '" + name + "'");
    }
    return c;
}

std::vector<std::string> NamedConfig::preset_names() {
    return {"C_default", "C_small", "C_correlation", "R_default", "R_best"};
}

NamedConfig NamedConfig::scaled(ScalePreset scale) const {
    NamedConfig c = *this;
    if (scale == ScalePreset::desk) c.rep_size = std::max(1, rep_size / 8);
    return c;
}

void save_named_config(const std::filesystem::path& path, const NamedConfig& cfg) {
    json j;
    j["name"] = cfg.name;
    j["encoder"] = {{"weight_decay", cfg.encoder_weight_decay},
                    {"dropout", cfg.encoder_dropout},
                    {"noise_level", cfg.noise_level},
                    {"rep_size", cfg.rep_size}};
    j["decoder"] = {{"weight_decay", cfg.decoder_weight_decay}, {"dropout", cfg.decoder_dropout}};
    std::ofstream out(path);
    if (!out) throw DataError("cannot write config: " + path.string());
    out << j.dump(2) << "\n";
}

NamedConfig load_named_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config: " + path.string());
    json j = json::parse(in);
    NamedConfig c;
    c.name = j.at("name");
    c.encoder_weight_decay = j.at("encoder").at("weight_decay");
    c.encoder_dropout = j.at("encoder").at("dropout");
    c.noise_level = j.at("encoder").at("noise_level");
    c.rep_size = j.at("encoder").at("rep_size");
    c.decoder_weight_decay = j.at("decoder").at("weight_decay");
    c.decoder_dropout = j.at("decoder").at("dropout");
    return c;
}

namespace {

Tensor init_uniform(std::vector<int> shape, int fan_in, Rng& rng) {
    const double limit = std::sqrt(6.0 / std::max(1, fan_in));
    std::uniform_real_distribution<double> u(-limit, limit);
    std::vector<double> data(static_cast<size_t>(shape_numel(shape)));
    for (auto& v : data) v = u(rng);
    return Tensor::from_data(std::move(shape), std::move(data), /*requires_grad=*/true);
}

}  // namespace

Network build_network(const ArchConfig& arch, const NamedConfig& hyper, const TaskSet& tasks,
                      int n_classes, int map_dim, Rng& rng) {
    if (tasks.empty()) throw ConfigError("build_network: task set must not be empty");
    const bool with_decoder = tasks.count(Task::reconstruct) > 0;
    arch.validate(hyper.rep_size, with_decoder);
    if (tasks.count(Task::classify) && n_classes < 2)
        throw ConfigError("build_network: classification needs at least 2 classes");
    if (tasks.count(Task::map)) {
        if (map_dim < 1) throw ConfigError("build_network: map task needs map_dim >= 1");
        if (map_dim > hyper.rep_size)
            throw ConfigError("build_network: map_dim " + std::to_string(map_dim) +
                              " exceeds representation size " + std::to_string(hyper.rep_size));
    }

    Network net;
    net.arch = arch;
    net.hyper = hyper;
    net.tasks = tasks;
    net.n_classes = tasks.count(Task::classify) ? n_classes : 0;
    net.map_dim = tasks.count(Task::map) ? map_dim : 0;

    int in_c = 1;
    for (const auto& layer : arch.encoder) {
        if (layer.kind != EncoderLayer::Kind::conv) continue;
        const auto& cv = layer.conv;
        net.conv_kernels.push_back(
            init_uniform({cv.out_channels, in_c, cv.kh, cv.kw}, in_c * cv.kh * cv.kw, rng));
        in_c = cv.out_channels;
    }
    const int flat = arch.encoder_flat_size();
    net.fc1_w = init_uniform({arch.fc1_size, flat}, flat, rng);
    net.fc1_b = Tensor::zeros({arch.fc1_size}, true);
    net.fc2_w = init_uniform({hyper.rep_size, arch.fc1_size}, arch.fc1_size, rng);
    net.fc2_b = Tensor::zeros({hyper.rep_size}, true);
    if (tasks.count(Task::classify)) {
        net.cls_w = init_uniform({n_classes, hyper.rep_size}, hyper.rep_size, rng);
        net.cls_b = Tensor::zeros({n_classes}, true);
    }
    if (with_decoder) {
        net.dec_fc1_w = init_uniform({arch.decoder_fc1, hyper.rep_size}, hyper.rep_size, rng);
        net.dec_fc1_b = Tensor::zeros({arch.decoder_fc1}, true);
        const int seed_flat = arch.decoder_channels * arch.decoder_seed_hw * arch.decoder_seed_hw;
        net.dec_fc2_w = init_uniform({seed_flat, arch.decoder_fc1}, arch.decoder_fc1, rng);
        net.dec_fc2_b = Tensor::zeros({seed_flat}, true);
        int c = arch.decoder_channels;
        for (const auto& st : arch.decoder) {
            net.dec_kernels.push_back(
                init_uniform({st.conv.out_channels, c, st.conv.kh, st.conv.kw},
                             c * st.conv.kh * st.conv.kw, rng));
            c = st.conv.out_channels;
        }
    }
    return net;
}

Tensor Network::encoder_forward(const Tensor& images, bool training, Rng* rng) const {
    if (images.ndim() != 4 || images.dim(1) != 1 || images.dim(2) != arch.input_size ||
        images.dim(3) != arch.input_size)
        throw DimensionError("network: expected N x 1 x " + std::to_string(arch.input_size) + " x " +
                             std::to_string(arch.input_size) + " input, got " +
                             shape_to_string(images.shape()));
    Tensor x = images;
    size_t conv_idx = 0;
    for (const auto& layer : arch.encoder) {
        if (layer.kind == EncoderLayer::Kind::conv) {
            x = relu(conv2d(x, {conv_kernels[conv_idx], layer.conv.stride, layer.conv.padding}));
            ++conv_idx;
        } else {
            x = max_pool(x, {layer.pool.width, layer.pool.stride}).output;
        }
    }
    x = reshape(x, {images.dim(0), arch.encoder_flat_size()});
    x = dense(x, fc1_w, fc1_b, Activation::relu);
    if (hyper.encoder_dropout && training) {
        if (!rng) throw ValidationError("network: training forward needs an rng for dropout");
        x = dropout(x, kDropoutRate, true, *rng);
    }
    // fc2: linear activation, never dropout, so coordinates can go negative
    return dense(x, fc2_w, fc2_b, Activation::linear);
}

Tensor Network::decoder_forward(const Tensor& code, bool training, Rng* rng) const {
    if (!has(Task::reconstruct)) throw ConfigError("network: built without a decoder");
    const auto& cs = code.shape();
    if (cs.empty() || cs.back() != hyper.rep_size)
        throw DimensionError("network: code length must equal representation size " +
                             std::to_string(hyper.rep_size) + ", got " + shape_to_string(cs));
    Tensor x = code.ndim() == 1 ? reshape(code, {1, hyper.rep_size}) : code;
    const int n = x.dim(0);
    x = dense(x, dec_fc1_w, dec_fc1_b, Activation::relu);
    if (hyper.decoder_dropout && training) {
        if (!rng) throw ValidationError("network: training forward needs an rng for dropout");
        x = dropout(x, kDropoutRate, true, *rng);
    }
    x = dense(x, dec_fc2_w, dec_fc2_b, Activation::relu);
    x = reshape(x, {n, arch.decoder_channels, arch.decoder_seed_hw, arch.decoder_seed_hw});
    for (size_t i = 0; i < arch.decoder.size(); ++i) {
        const auto& st = arch.decoder[i];
        if (st.unpool > 1) x = unpool(x, st.unpool);
        x = conv2d(x, {dec_kernels[i], st.conv.stride, st.conv.padding});
        if (i + 1 < arch.decoder.size()) x = relu(x);  // last layer emits logits
    }
    return x;
}

ForwardOut Network::forward(const Tensor& images, bool training, Rng* rng) const {
    ForwardOut out;
    out.fc2 = encoder_forward(images, training, rng);
    if (has(Task::classify)) out.class_logits = dense(out.fc2, cls_w, cls_b, Activation::linear);
    if (has(Task::map)) out.mapping = slice_cols(out.fc2, 0, map_dim);
    if (has(Task::reconstruct)) out.recon_logits = decoder_forward(out.fc2, training, rng);
    return out;
}

Tensor Network::encode(const Tensor& images) const {
    NoGradGuard eval;
    return encoder_forward(images, /*training=*/false, nullptr);
}

Tensor Network::decode(const Tensor& code) const {
    return decoder_forward(code, /*training=*/false, nullptr);
}

std::vector<Tensor> Network::trainable() const {
    std::vector<Tensor> params(conv_kernels);
    params.push_back(fc1_w);
    params.push_back(fc1_b);
    params.push_back(fc2_w);
    params.push_back(fc2_b);
    if (has(Task::classify)) {
        params.push_back(cls_w);
        params.push_back(cls_b);
    }
    if (has(Task::reconstruct)) {
        params.push_back(dec_fc1_w);
        params.push_back(dec_fc1_b);
        params.push_back(dec_fc2_w);
        params.push_back(dec_fc2_b);
        for (const auto& k : dec_kernels) params.push_back(k);
    }
    return params;
}

std::vector<double> Network::weight_decays() const {
    std::vector<double> decays;
    const size_t encoder_count = conv_kernels.size() + 4 + (has(Task::classify) ? 2 : 0);
    decays.assign(encoder_count, hyper.encoder_weight_decay);
    if (has(Task::reconstruct)) {
        const size_t decoder_count = 4 + dec_kernels.size();
        decays.insert(decays.end(), decoder_count, hyper.decoder_weight_decay);
    }
    return decays;
}

std::vector<NamedTensor> Network::named_params() const {
    std::vector<NamedTensor> out;
    for (size_t i = 0; i < conv_kernels.size(); ++i)
        out.push_back({"encoder.conv" + std::to_string(i) + ".kernel", conv_kernels[i]});
    out.push_back({"encoder.fc1.weight", fc1_w});
    out.push_back({"encoder.fc1.bias", fc1_b});
    out.push_back({"encoder.fc2.weight", fc2_w});
    out.push_back({"encoder.fc2.bias", fc2_b});
    if (has(Task::classify)) {
        out.push_back({"classifier.weight", cls_w});
        out.push_back({"classifier.bias", cls_b});
    }
    if (has(Task::reconstruct)) {
        out.push_back({"decoder.fc1.weight", dec_fc1_w});
        out.push_back({"decoder.fc1.bias", dec_fc1_b});
        out.push_back({"decoder.fc2.weight", dec_fc2_w});
        out.push_back({"decoder.fc2.bias", dec_fc2_b});
        for (size_t i = 0; i < dec_kernels.size(); ++i)
            out.push_back({"decoder.conv" + std::to_string(i) + ".kernel", dec_kernels[i]});
    }
    return out;
}

void Network::load_params(const std::vector<NamedTensor>& params) {
    auto mine = named_params();
    if (mine.size() != params.size())
        throw DataError("load_params: parameter count mismatch (" + std::to_string(params.size()) +
                        " vs " + std::to_string(mine.size()) + ")");
    for (size_t i = 0; i < mine.size(); ++i) {
        if (mine[i].name != params[i].name)
            throw DataError("load_params: name mismatch at index " + std::to_string(i) + ": " +
                            params[i].name + " vs " + mine[i].name);
        if (mine[i].tensor.shape() != params[i].tensor.shape())
            throw DimensionError("load_params: shape mismatch for " + mine[i].name);
        mine[i].tensor.data() = params[i].tensor.data();
    }
}

void Network::zero_grad() {
    for (auto& p : trainable()) p.zero_grad();
}

}  // namespace shapemap
