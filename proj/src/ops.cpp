#include "shapemap/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>

namespace shapemap {

namespace {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ColMat = Eigen::MatrixXd;

Tensor make_op(std::vector<int> shape, std::vector<double> data,
               std::vector<NodePtr> parents, std::function<void(Node&)> backward_fn) {
    bool track = detail::grad_enabled();
    if (track) {
        track = false;
        for (const auto& p : parents)
            if (p->requires_grad) track = true;
    }
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->data = std::move(data);
    if (track) {
        node->requires_grad = true;
        node->grad.assign(node->data.size(), 0.0);
        node->parents = std::move(parents);
        node->backward_fn = std::move(backward_fn);
    }
    return Tensor::wrap(std::move(node));
}

struct ConvDims {
    int n, c, h, w;        // input
    int oc, kh, kw;        // kernel
    int stride, pad;
    int oh, ow;
    bool batched_input;    // false when the caller passed C x H x W
};

ConvDims conv_dims(const Tensor& input, const ConvSpec& spec) {
    const auto& ks = spec.kernel.shape();
    if (ks.size() != 4)
        throw DimensionError("conv2d: kernel must be 4-D (out x in x kh x kw), got " +
                             shape_to_string(ks));
    const auto& is = input.shape();
    ConvDims d{};
    d.batched_input = is.size() == 4;
    if (is.size() == 3) {
        d.n = 1; d.c = is[0]; d.h = is[1]; d.w = is[2];
    } else if (is.size() == 4) {
        d.n = is[0]; d.c = is[1]; d.h = is[2]; d.w = is[3];
    } else {
        throw DimensionError("conv2d: input must be 3-D or 4-D, got " + shape_to_string(is));
    }
    d.oc = ks[0]; d.kh = ks[2]; d.kw = ks[3];
    if (ks[1] != d.c)
        throw DimensionError("conv2d: channel axis mismatch, input C=" + std::to_string(d.c) +
                             " vs kernel in_channels=" + std::to_string(ks[1]));
    if (d.kh < 1 || d.kw < 1) throw DimensionError("conv2d: kernel extents must be >= 1");
    if (spec.stride < 1) throw DimensionError("conv2d: stride must be >= 1");
    if (spec.padding < 0) throw DimensionError("conv2d: padding must be >= 0");
    d.stride = spec.stride;
    d.pad = spec.padding;
    d.oh = (d.h + 2 * d.pad - d.kh) / d.stride + 1;
    d.ow = (d.w + 2 * d.pad - d.kw) / d.stride + 1;
    if (d.h + 2 * d.pad - d.kh < 0 || d.w + 2 * d.pad - d.kw < 0 || d.oh < 1 || d.ow < 1)
        throw DimensionError("conv2d: kernel " + std::to_string(d.kh) + "x" + std::to_string(d.kw) +
                             " does not fit input " + std::to_string(d.h) + "x" + std::to_string(d.w) +
                             " with padding " + std::to_string(d.pad));
    return d;
}

// Receptive-field matrix: (c*kh*kw) rows, (n*oh*ow) columns, column-major.
ColMat im2col(const std::vector<double>& in, const ConvDims& d) {
    const int rows = d.c * d.kh * d.kw;
    const long cols = static_cast<long>(d.n) * d.oh * d.ow;
    ColMat col(rows, cols);
    const int hw = d.h * d.w;
    for (int n = 0; n < d.n; ++n) {
        const double* img = in.data() + static_cast<size_t>(n) * d.c * hw;
        for (int oy = 0; oy < d.oh; ++oy) {
            for (int ox = 0; ox < d.ow; ++ox) {
                const long q = (static_cast<long>(n) * d.oh + oy) * d.ow + ox;
                double* dst = col.data() + q * rows;
                for (int c = 0; c < d.c; ++c) {
                    const double* plane = img + c * hw;
                    for (int i = 0; i < d.kh; ++i) {
                        const int y = oy * d.stride + i - d.pad;
                        if (y < 0 || y >= d.h) {
                            for (int j = 0; j < d.kw; ++j) *dst++ = 0.0;
                            continue;
                        }
                        const double* row = plane + y * d.w;
                        for (int j = 0; j < d.kw; ++j) {
                            const int x = ox * d.stride + j - d.pad;
                            *dst++ = (x < 0 || x >= d.w) ? 0.0 : row[x];
                        }
                    }
                }
            }
        }
    }
    return col;
}

void col2im_add(const ColMat& col, const ConvDims& d, std::vector<double>& out) {
    const int rows = d.c * d.kh * d.kw;
    const int hw = d.h * d.w;
    for (int n = 0; n < d.n; ++n) {
        double* img = out.data() + static_cast<size_t>(n) * d.c * hw;
        for (int oy = 0; oy < d.oh; ++oy) {
            for (int ox = 0; ox < d.ow; ++ox) {
                const long q = (static_cast<long>(n) * d.oh + oy) * d.ow + ox;
                const double* src = col.data() + q * rows;
                for (int c = 0; c < d.c; ++c) {
                    double* plane = img + c * hw;
                    for (int i = 0; i < d.kh; ++i) {
                        const int y = oy * d.stride + i - d.pad;
                        if (y < 0 || y >= d.h) {
                            src += d.kw;
                            continue;
                        }
                        double* row = plane + y * d.w;
                        for (int j = 0; j < d.kw; ++j) {
                            const int x = ox * d.stride + j - d.pad;
                            if (x >= 0 && x < d.w) row[x] += src[j];
                        }
                        src += d.kw;
                    }
                }
            }
        }
    }
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) +
                             " vs " + shape_to_string(b.shape()));
}

}  // namespace

Tensor conv2d(const Tensor& input, const ConvSpec& spec) {
    const ConvDims d = conv_dims(input, spec);
    const int rows = d.c * d.kh * d.kw;
    const long cols = static_cast<long>(d.n) * d.oh * d.ow;

    ColMat col = im2col(input.data(), d);
    Eigen::Map<const RowMat> kmat(spec.kernel.data().data(), d.oc, rows);
    ColMat out_mat = kmat * col;  // oc x (n*oh*ow)

    std::vector<int> out_shape = d.batched_input ? std::vector<int>{d.n, d.oc, d.oh, d.ow}
                                                 : std::vector<int>{d.oc, d.oh, d.ow};
    std::vector<double> out(static_cast<size_t>(d.oc) * cols);
    const int ohw = d.oh * d.ow;
    for (int n = 0; n < d.n; ++n)
        for (int o = 0; o < d.oc; ++o)
            for (int p = 0; p < ohw; ++p)
                out[(static_cast<size_t>(n) * d.oc + o) * ohw + p] =
                    out_mat(o, static_cast<long>(n) * ohw + p);

    NodePtr in_node = input.node();
    NodePtr k_node = spec.kernel.node();
    auto backward = [in_node, k_node, d, rows, ohw](Node& self) {
        // Rebuild the receptive-field matrix instead of retaining it; the
        // graph already keeps the input alive and this halves peak memory.
        ColMat gout(d.oc, static_cast<long>(d.n) * ohw);
        for (int n = 0; n < d.n; ++n)
            for (int o = 0; o < d.oc; ++o)
                for (int p = 0; p < ohw; ++p)
                    gout(o, static_cast<long>(n) * ohw + p) =
                        self.grad[(static_cast<size_t>(n) * d.oc + o) * ohw + p];
        if (k_node->requires_grad) {
            ColMat col = im2col(in_node->data, d);
            Eigen::Map<RowMat> kgrad(k_node->grad.data(), d.oc, rows);
            kgrad.noalias() += gout * col.transpose();
        }
        if (in_node->requires_grad) {
            Eigen::Map<const RowMat> kmat(k_node->data.data(), d.oc, rows);
            ColMat gcol = kmat.transpose() * gout;
            col2im_add(gcol, d, in_node->grad);
        }
    };
    return make_op(std::move(out_shape), std::move(out), {in_node, k_node}, std::move(backward));
}

PoolResult max_pool(const Tensor& input, const PoolSpec& spec) {
    if (spec.pool_width < 1 || spec.stride < 1)
        throw DimensionError("max_pool: pool_width and stride must be >= 1");
    const auto& is = input.shape();
    bool batched = is.size() == 4;
    if (is.size() != 3 && is.size() != 4)
        throw DimensionError("max_pool: input must be 3-D or 4-D, got " + shape_to_string(is));
    const int n = batched ? is[0] : 1;
    const int c = batched ? is[1] : is[0];
    const int h = batched ? is[2] : is[1];
    const int w = batched ? is[3] : is[2];
    if (h < spec.pool_width || w < spec.pool_width)
        throw DimensionError("max_pool: window " + std::to_string(spec.pool_width) +
                             " larger than spatial axes " + std::to_string(h) + "x" + std::to_string(w));
    const int oh = (h - spec.pool_width) / spec.stride + 1;
    const int ow = (w - spec.pool_width) / spec.stride + 1;

    const auto& in = input.data();
    std::vector<double> out(static_cast<size_t>(n) * c * oh * ow);
    std::vector<int> argmax(out.size());
    size_t idx = 0;
    for (int nc = 0; nc < n * c; ++nc) {
        const double* plane = in.data() + static_cast<size_t>(nc) * h * w;
        const int base = nc * h * w;
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                int best = base + (oy * spec.stride) * w + ox * spec.stride;
                double best_v = plane[(oy * spec.stride) * w + ox * spec.stride];
                for (int i = 0; i < spec.pool_width; ++i) {
                    const int y = oy * spec.stride + i;
                    for (int j = 0; j < spec.pool_width; ++j) {
                        const int x = ox * spec.stride + j;
                        const double v = plane[y * w + x];
                        if (v > best_v) {
                            best_v = v;
                            best = base + y * w + x;
                        }
                    }
                }
                out[idx] = best_v;
                argmax[idx] = best;
                ++idx;
            }
        }
    }

    std::vector<int> out_shape = batched ? std::vector<int>{n, c, oh, ow}
                                         : std::vector<int>{c, oh, ow};
    NodePtr in_node = input.node();
    auto arg_copy = std::make_shared<std::vector<int>>(argmax);
    auto backward = [in_node, arg_copy](Node& self) {
        if (!in_node->requires_grad) return;
        for (size_t i = 0; i < self.grad.size(); ++i)
            in_node->grad[(*arg_copy)[i]] += self.grad[i];
    };
    PoolResult res;
    res.output = make_op(std::move(out_shape), std::move(out), {in_node}, std::move(backward));
    res.argmax = std::move(argmax);
    return res;
}

Tensor unpool(const Tensor& input, int s) {
    if (s < 1) throw DimensionError("unpool: factor must be >= 1");
    const auto& is = input.shape();
    bool batched = is.size() == 4;
    if (is.size() != 3 && is.size() != 4)
        throw DimensionError("unpool: input must be 3-D or 4-D, got " + shape_to_string(is));
    const int n = batched ? is[0] : 1;
    const int c = batched ? is[1] : is[0];
    const int h = batched ? is[2] : is[1];
    const int w = batched ? is[3] : is[2];
    const int oh = h * s, ow = w * s;

    const auto& in = input.data();
    std::vector<double> out(static_cast<size_t>(n) * c * oh * ow, 0.0);
    for (int nc = 0; nc < n * c; ++nc)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out[(static_cast<size_t>(nc) * oh + y * s) * ow + x * s] =
                    in[(static_cast<size_t>(nc) * h + y) * w + x];

    std::vector<int> out_shape = batched ? std::vector<int>{n, c, oh, ow}
                                         : std::vector<int>{c, oh, ow};
    NodePtr in_node = input.node();
    auto backward = [in_node, n, c, h, w, s, oh, ow](Node& self) {
        if (!in_node->requires_grad) return;
        for (int nc = 0; nc < n * c; ++nc)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    in_node->grad[(static_cast<size_t>(nc) * h + y) * w + x] +=
                        self.grad[(static_cast<size_t>(nc) * oh + y * s) * ow + x * s];
    };
    return make_op(std::move(out_shape), std::move(out), {in_node}, std::move(backward));
}

Tensor dense(const Tensor& input, const Tensor& weight, const Tensor& bias, Activation act) {
    const auto& ws = weight.shape();
    if (ws.size() != 2)
        throw DimensionError("dense: weight must be 2-D (out x in), got " + shape_to_string(ws));
    const int out_dim = ws[0], in_dim = ws[1];
    if (bias.shape() != std::vector<int>{out_dim})
        throw DimensionError("dense: bias axis 0 must equal weight out=" + std::to_string(out_dim) +
                             ", got " + shape_to_string(bias.shape()));
    const auto& is = input.shape();
    const bool batched = is.size() != 1;
    int n = 1, d = 0;
    if (is.size() == 1) {
        d = is[0];
    } else if (is.size() == 2) {
        n = is[0];
        d = is[1];
    } else {
        throw DimensionError("dense: input must be 1-D or 2-D, got " + shape_to_string(is));
    }
    if (d != in_dim)
        throw DimensionError("dense: input feature axis " + std::to_string(d) +
                             " != weight in=" + std::to_string(in_dim));

    Eigen::Map<const RowMat> x(input.data().data(), n, d);
    Eigen::Map<const RowMat> wm(weight.data().data(), out_dim, in_dim);
    RowMat y = x * wm.transpose();
    for (int r = 0; r < n; ++r)
        for (int o = 0; o < out_dim; ++o) y(r, o) += bias.data()[o];

    std::vector<char> mask;
    if (act == Activation::relu) {
        mask.resize(static_cast<size_t>(n) * out_dim);
        for (int r = 0; r < n; ++r)
            for (int o = 0; o < out_dim; ++o) {
                mask[static_cast<size_t>(r) * out_dim + o] = y(r, o) > 0.0;
                if (y(r, o) <= 0.0) y(r, o) = 0.0;
            }
    }
    std::vector<double> out(y.data(), y.data() + static_cast<size_t>(n) * out_dim);

    NodePtr in_node = input.node(), w_node = weight.node(), b_node = bias.node();
    auto mask_ptr = std::make_shared<std::vector<char>>(std::move(mask));
    auto backward = [in_node, w_node, b_node, mask_ptr, n, d, out_dim](Node& self) {
        RowMat gpre(n, out_dim);
        std::copy(self.grad.begin(), self.grad.end(), gpre.data());
        if (!mask_ptr->empty())
            for (long i = 0; i < gpre.size(); ++i)
                if (!(*mask_ptr)[static_cast<size_t>(i)]) gpre.data()[i] = 0.0;
        if (w_node->requires_grad) {
            Eigen::Map<const RowMat> x(in_node->data.data(), n, d);
            Eigen::Map<RowMat> gw(w_node->grad.data(), out_dim, d);
            gw.noalias() += gpre.transpose() * x;
        }
        if (b_node->requires_grad) {
            for (int r = 0; r < n; ++r)
                for (int o = 0; o < out_dim; ++o) b_node->grad[o] += gpre(r, o);
        }
        if (in_node->requires_grad) {
            Eigen::Map<const RowMat> wm(w_node->data.data(), out_dim, d);
            Eigen::Map<RowMat> gx(in_node->grad.data(), n, d);
            gx.noalias() += gpre * wm;
        }
    };
    std::vector<int> out_shape = batched ? std::vector<int>{n, out_dim} : std::vector<int>{out_dim};
    return make_op(std::move(out_shape), std::move(out), {in_node, w_node, b_node},
                   std::move(backward));
}

Tensor softmax_cross_entropy(const Tensor& logits, int label) {
    if (logits.ndim() != 1)
        throw DimensionError("softmax_cross_entropy: logits must be 1-D, got " +
                             shape_to_string(logits.shape()));
    const int k = logits.dim(0);
    if (k < 2) throw DimensionError("softmax_cross_entropy: need at least 2 classes");
    if (label < 0 || label >= k)
        throw std::out_of_range("softmax_cross_entropy: label " + std::to_string(label) +
                                " out of range [0," + std::to_string(k) + ")");
    Tensor wide = reshape(logits, {1, k});
    Tensor loss = softmax_cross_entropy(wide, std::vector<int>{label});
    return loss;
}

Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
    if (logits.ndim() != 2)
        throw DimensionError("softmax_cross_entropy: logits must be N x k, got " +
                             shape_to_string(logits.shape()));
    const int n = logits.dim(0), k = logits.dim(1);
    if (k < 2) throw DimensionError("softmax_cross_entropy: need at least 2 classes");
    if (static_cast<int>(labels.size()) != n)
        throw DimensionError("softmax_cross_entropy: label count " + std::to_string(labels.size()) +
                             " != batch axis " + std::to_string(n));
    int labeled = 0;
    for (int lb : labels) {
        if (lb >= k)
            throw std::out_of_range("softmax_cross_entropy: label " + std::to_string(lb) +
                                    " out of range [0," + std::to_string(k) + ")");
        if (lb >= 0) ++labeled;
    }
    if (labeled == 0)
        throw ValidationError("softmax_cross_entropy: no labeled rows in batch");

    const auto& z = logits.data();
    auto probs = std::make_shared<std::vector<double>>(z.size());
    double loss = 0.0;
    for (int r = 0; r < n; ++r) {
        const double* row = z.data() + static_cast<size_t>(r) * k;
        double* prow = probs->data() + static_cast<size_t>(r) * k;
        double m = row[0];
        for (int j = 1; j < k; ++j) m = std::max(m, row[j]);
        double denom = 0.0;
        for (int j = 0; j < k; ++j) denom += std::exp(row[j] - m);
        const double log_denom = std::log(denom);
        for (int j = 0; j < k; ++j) prow[j] = std::exp(row[j] - m) / denom;
        if (labels[r] >= 0) loss += log_denom - (row[labels[r]] - m);
    }
    loss /= labeled;

    NodePtr z_node = logits.node();
    auto labels_copy = std::make_shared<std::vector<int>>(labels);
    auto backward = [z_node, probs, labels_copy, n, k, labeled](Node& self) {
        if (!z_node->requires_grad) return;
        const double g = self.grad[0] / labeled;
        for (int r = 0; r < n; ++r) {
            const int lb = (*labels_copy)[r];
            if (lb < 0) continue;
            double* grow = z_node->grad.data() + static_cast<size_t>(r) * k;
            const double* prow = probs->data() + static_cast<size_t>(r) * k;
            for (int j = 0; j < k; ++j) grow[j] += g * (prow[j] - (j == lb ? 1.0 : 0.0));
        }
    };
    return make_op({1}, {loss}, {z_node}, std::move(backward));
}

Tensor sigmoid_cross_entropy(const Tensor& logits, const Tensor& target) {
    check_same_shape(logits, target, "sigmoid_cross_entropy");
    const auto& z = logits.data();
    const auto& t = target.data();
    for (double v : t)
        if (v < 0.0 || v > 1.0)
            throw ValidationError("sigmoid_cross_entropy: target outside [0,1]: " + std::to_string(v));
    const size_t n = z.size();
    double loss = 0.0;
    for (size_t i = 0; i < n; ++i)
        loss += std::max(z[i], 0.0) - z[i] * t[i] + std::log1p(std::exp(-std::abs(z[i])));
    loss /= static_cast<double>(n);

    NodePtr z_node = logits.node(), t_node = target.node();
    auto backward = [z_node, t_node, n](Node& self) {
        const double g = self.grad[0] / static_cast<double>(n);
        for (size_t i = 0; i < n; ++i) {
            const double zi = z_node->data[i];
            const double sig = 1.0 / (1.0 + std::exp(-zi));
            const double ti = t_node->data[i];
            if (z_node->requires_grad) z_node->grad[i] += g * (sig - ti);
            if (t_node->requires_grad) t_node->grad[i] += g * (-zi);
        }
    };
    return make_op({1}, {loss}, {z_node, t_node}, std::move(backward));
}

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
    check_same_shape(pred, target, "mse_loss");
    const auto& p = pred.data();
    const auto& t = target.data();
    const size_t n = p.size();
    double loss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = p[i] - t[i];
        loss += d * d;
    }
    loss /= static_cast<double>(n);

    NodePtr p_node = pred.node(), t_node = target.node();
    auto backward = [p_node, t_node, n](Node& self) {
        const double g = 2.0 * self.grad[0] / static_cast<double>(n);
        for (size_t i = 0; i < n; ++i) {
            const double d = p_node->data[i] - t_node->data[i];
            if (p_node->requires_grad) p_node->grad[i] += g * d;
            if (t_node->requires_grad) t_node->grad[i] -= g * d;
        }
    };
    return make_op({1}, {loss}, {p_node, t_node}, std::move(backward));
}

Tensor dropout(const Tensor& input, double rate, bool training, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0)
        throw ValidationError("dropout: rate must lie in [0,1), got " + std::to_string(rate));
    if (!training || rate == 0.0) return input;

    const auto& in = input.data();
    const double keep_scale = 1.0 / (1.0 - rate);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto mask = std::make_shared<std::vector<double>>(in.size());
    std::vector<double> out(in.size());
    for (size_t i = 0; i < in.size(); ++i) {
        (*mask)[i] = u(rng) < rate ? 0.0 : keep_scale;
        out[i] = in[i] * (*mask)[i];
    }
    NodePtr in_node = input.node();
    auto backward = [in_node, mask](Node& self) {
        if (!in_node->requires_grad) return;
        for (size_t i = 0; i < self.grad.size(); ++i)
            in_node->grad[i] += self.grad[i] * (*mask)[i];
    };
    return make_op(input.shape(), std::move(out), {in_node}, std::move(backward));
}

Tensor relu(const Tensor& x) {
    const auto& in = x.data();
    std::vector<double> out(in.size());
    for (size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
    NodePtr in_node = x.node();
    auto backward = [in_node](Node& self) {
        if (!in_node->requires_grad) return;
        for (size_t i = 0; i < self.grad.size(); ++i)
            if (in_node->data[i] > 0.0) in_node->grad[i] += self.grad[i];
    };
    return make_op(x.shape(), std::move(out), {in_node}, std::move(backward));
}

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    const auto& av = a.data();
    const auto& bv = b.data();
    std::vector<double> out(av.size());
    for (size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
    NodePtr a_node = a.node(), b_node = b.node();
    auto backward = [a_node, b_node](Node& self) {
        for (size_t i = 0; i < self.grad.size(); ++i) {
            if (a_node->requires_grad) a_node->grad[i] += self.grad[i];
            if (b_node->requires_grad) b_node->grad[i] += self.grad[i];
        }
    };
    return make_op(a.shape(), std::move(out), {a_node, b_node}, std::move(backward));
}

Tensor scale(const Tensor& x, double factor) {
    const auto& in = x.data();
    std::vector<double> out(in.size());
    for (size_t i = 0; i < in.size(); ++i) out[i] = in[i] * factor;
    NodePtr in_node = x.node();
    auto backward = [in_node, factor](Node& self) {
        if (!in_node->requires_grad) return;
        for (size_t i = 0; i < self.grad.size(); ++i) in_node->grad[i] += self.grad[i] * factor;
    };
    return make_op(x.shape(), std::move(out), {in_node}, std::move(backward));
}

Tensor sum(const Tensor& x) {
    double s = 0.0;
    for (double v : x.data()) s += v;
    NodePtr in_node = x.node();
    auto backward = [in_node](Node& self) {
        if (!in_node->requires_grad) return;
        for (double& g : in_node->grad) g += self.grad[0];
    };
    return make_op({1}, {s}, {in_node}, std::move(backward));
}

Tensor reshape(const Tensor& x, std::vector<int> new_shape) {
    if (shape_numel(new_shape) != x.numel())
        throw DimensionError("reshape: element count mismatch " + shape_to_string(x.shape()) +
                             " -> " + shape_to_string(new_shape));
    NodePtr in_node = x.node();
    auto backward = [in_node](Node& self) {
        if (!in_node->requires_grad) return;
        for (size_t i = 0; i < self.grad.size(); ++i) in_node->grad[i] += self.grad[i];
    };
    return make_op(std::move(new_shape), x.data(), {in_node}, std::move(backward));
}

Tensor slice_cols(const Tensor& x, int begin, int end) {
    const auto& is = x.shape();
    const bool batched = is.size() == 2;
    if (is.size() != 1 && is.size() != 2)
        throw DimensionError("slice_cols: input must be 1-D or 2-D, got " + shape_to_string(is));
    const int n = batched ? is[0] : 1;
    const int d = batched ? is[1] : is[0];
    if (begin < 0 || end > d || begin >= end)
        throw DimensionError("slice_cols: range [" + std::to_string(begin) + "," +
                             std::to_string(end) + ") invalid for axis of extent " + std::to_string(d));
    const int width = end - begin;
    const auto& in = x.data();
    std::vector<double> out(static_cast<size_t>(n) * width);
    for (int r = 0; r < n; ++r)
        for (int j = 0; j < width; ++j)
            out[static_cast<size_t>(r) * width + j] = in[static_cast<size_t>(r) * d + begin + j];
    NodePtr in_node = x.node();
    auto backward = [in_node, n, d, begin, width](Node& self) {
        if (!in_node->requires_grad) return;
        for (int r = 0; r < n; ++r)
            for (int j = 0; j < width; ++j)
                in_node->grad[static_cast<size_t>(r) * d + begin + j] +=
                    self.grad[static_cast<size_t>(r) * width + j];
    };
    std::vector<int> out_shape = batched ? std::vector<int>{n, width} : std::vector<int>{width};
    return make_op(std::move(out_shape), std::move(out), {in_node}, std::move(backward));
}

Tensor select_rows(const Tensor& x, const std::vector<int>& rows) {
    if (x.ndim() != 2)
        throw DimensionError("select_rows: input must be 2-D, got " + shape_to_string(x.shape()));
    const int n = x.dim(0), d = x.dim(1);
    for (int r : rows)
        if (r < 0 || r >= n)
            throw std::out_of_range("select_rows: row " + std::to_string(r) + " out of range [0," +
                                    std::to_string(n) + ")");
    const auto& in = x.data();
    std::vector<double> out(rows.size() * static_cast<size_t>(d));
    for (size_t i = 0; i < rows.size(); ++i)
        std::copy_n(in.begin() + static_cast<size_t>(rows[i]) * d, d,
                    out.begin() + i * static_cast<size_t>(d));
    NodePtr in_node = x.node();
    auto rows_copy = std::make_shared<std::vector<int>>(rows);
    auto backward = [in_node, rows_copy, d](Node& self) {
        if (!in_node->requires_grad) return;
        for (size_t i = 0; i < rows_copy->size(); ++i)
            for (int j = 0; j < d; ++j)
                in_node->grad[static_cast<size_t>((*rows_copy)[i]) * d + j] +=
                    self.grad[i * static_cast<size_t>(d) + j];
    };
    return make_op({static_cast<int>(rows.size()), d}, std::move(out), {in_node}, std::move(backward));
}

}  // namespace shapemap
