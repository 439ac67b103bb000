#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "shapemap/checkpoint.hpp"
#include "shapemap/ops.hpp"

namespace shapemap {

enum class Task { classify, reconstruct, map };
using TaskSet = std::set<Task>;

std::string to_string(Task t);
Task task_from_string(const std::string& s);

enum class ScalePreset { desk, paper };
std::string to_string(ScalePreset s);
ScalePreset scale_from_string(const std::string& s);

struct ConvLayerSpec {
    int out_channels = 0;
    int kh = 0, kw = 0;
    int stride = 1;
    int padding = 0;
};

struct PoolLayerSpec {
    int width = 2;
    int stride = 2;
};

struct EncoderLayer {
    enum class Kind { conv, pool };
    Kind kind = Kind::conv;
    ConvLayerSpec conv{};
    PoolLayerSpec pool{};
};

// Layer geometry; representation size and regularization live in NamedConfig.
struct ArchConfig {
    std::string name = "desk";
    int input_size = 64;
    std::vector<EncoderLayer> encoder;
    int fc1_size = 256;

    struct DecoderStage {
        int unpool = 2;
        ConvLayerSpec conv{};
    };
    int decoder_fc1 = 256;
    int decoder_channels = 32;
    int decoder_seed_hw = 8;
    std::vector<DecoderStage> decoder;

    static ArchConfig desk();
    static ArchConfig paper();
    static ArchConfig for_scale(ScalePreset scale);

    // Proves every encoder layer has positive spatial extents and, when the
    // decoder is needed, that its output matches the input image shape.
    void validate(int fc2_size, bool with_decoder) const;

    // Flattened size after the conv/pool stack.
    int encoder_flat_size() const;
};

void save_arch_config(const std::filesystem::path& path, const ArchConfig& arch);
ArchConfig load_arch_config(const std::filesystem::path& path);

// One row of the hyperparameter table: weight decay / dropout / input noise /
// representation size for the encoder, weight decay / dropout for the decoder.
struct NamedConfig {
    std::string name = "custom";
    double encoder_weight_decay = 0.0005;
    bool encoder_dropout = true;
    double noise_level = 0.10;
    int rep_size = 512;
    double decoder_weight_decay = 0.0;
    bool decoder_dropout = false;

    static NamedConfig preset(const std::string& name);
    static std::vector<std::string> preset_names();

    // Desk scale shrinks the representation by 8x (512 -> 64, 256 -> 32);
    // everything else carries over unchanged.
    NamedConfig scaled(ScalePreset scale) const;
};

void save_named_config(const std::filesystem::path& path, const NamedConfig& cfg);
NamedConfig load_named_config(const std::filesystem::path& path);

inline constexpr double kDropoutRate = 0.5;

struct ForwardOut {
    Tensor fc2;           // N x rep
    Tensor class_logits;  // N x n_classes, when classify
    Tensor recon_logits;  // N x 1 x H x W, when reconstruct
    Tensor mapping;       // N x map_dim, when map: first map_dim units of fc2
};

struct Network {
    ArchConfig arch;
    NamedConfig hyper;
    TaskSet tasks;
    int n_classes = 0;
    int map_dim = 0;

    std::vector<Tensor> conv_kernels;
    Tensor fc1_w, fc1_b, fc2_w, fc2_b;
    Tensor cls_w, cls_b;
    Tensor dec_fc1_w, dec_fc1_b, dec_fc2_w, dec_fc2_b;
    std::vector<Tensor> dec_kernels;

    int fc2_size() const { return hyper.rep_size; }
    bool has(Task t) const { return tasks.count(t) > 0; }

    ForwardOut forward(const Tensor& images, bool training, Rng* rng) const;
    Tensor encoder_forward(const Tensor& images, bool training, Rng* rng) const;
    Tensor decoder_forward(const Tensor& code, bool training, Rng* rng) const;

    // Evaluation-mode fc2 activations, no graph.
    Tensor encode(const Tensor& images) const;
    // Reconstruction logits from a code; builds a graph when the code
    // requires gradients.
    Tensor decode(const Tensor& code) const;

    std::vector<Tensor> trainable() const;
    std::vector<double> weight_decays() const;  // aligned with trainable()
    std::vector<NamedTensor> named_params() const;
    void load_params(const std::vector<NamedTensor>& params);
    void zero_grad();
};

Network build_network(const ArchConfig& arch, const NamedConfig& hyper, const TaskSet& tasks,
                      int n_classes, int map_dim, Rng& rng);

}  // namespace shapemap
