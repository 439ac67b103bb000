#pragma once

#include <vector>

#include "shapemap/rng.hpp"
#include "shapemap/tensor.hpp"

namespace shapemap {

// Convolution parameters. kernel is out_channels x in_channels x kh x kw;
// padding is symmetric zero padding on both spatial sides.
struct ConvSpec {
    Tensor kernel;
    int stride = 1;
    int padding = 0;
};

struct PoolSpec {
    int pool_width = 2;
    int stride = 2;
};

enum class Activation { relu, linear };

// input: C x H x W or N x C x H x W. Out-of-range taps read as zero.
Tensor conv2d(const Tensor& input, const ConvSpec& spec);

struct PoolResult {
    Tensor output;
    // Flat index into the input data per output element; ties resolve to the
    // first window cell in row-major order. Gradient flows only to these.
    std::vector<int> argmax;
};
PoolResult max_pool(const Tensor& input, const PoolSpec& spec);

// Each value lands in the top-left corner of an s x s block, rest zeros.
Tensor unpool(const Tensor& input, int s);

// input: D or N x D; weight: out x D; bias: out.
Tensor dense(const Tensor& input, const Tensor& weight, const Tensor& bias, Activation act);

// logits: 1-D of length k >= 2.
Tensor softmax_cross_entropy(const Tensor& logits, int label);
// logits: N x k; rows with label < 0 carry no classification target and are
// excluded from the mean.
Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels);

// Mean over elements of the stable form max(z,0) - z*t + log(1+exp(-|z|)).
Tensor sigmoid_cross_entropy(const Tensor& logits, const Tensor& target);

Tensor mse_loss(const Tensor& pred, const Tensor& target);

Tensor dropout(const Tensor& input, double rate, bool training, Rng& rng);

Tensor relu(const Tensor& x);
Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
Tensor sum(const Tensor& x);
Tensor reshape(const Tensor& x, std::vector<int> new_shape);

// x: D or N x D; keeps columns [begin, end).
Tensor slice_cols(const Tensor& x, int begin, int end);
// x: N x D; gathers the given rows in order.
Tensor select_rows(const Tensor& x, const std::vector<int>& rows);

}  // namespace shapemap
