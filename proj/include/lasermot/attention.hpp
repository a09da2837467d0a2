#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "lasermot/error.hpp"

namespace lasermot::attention {

// Dense channels x height x width tensor, [c][h][w] row-major.
struct FeatureMap {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> values;

    FeatureMap() = default;

    FeatureMap(int c, int h, int w, double fill = 0.0)
        : channels(c), height(h), width(w),
          values(static_cast<size_t>(c) * static_cast<size_t>(h) * static_cast<size_t>(w), fill) {
        if (c < 1 || h < 1 || w < 1) throw contract_error("feature map dims must be >= 1");
    }

    double at(int c, int h, int w) const { return values[index(c, h, w)]; }
    double& at(int c, int h, int w) { return values[index(c, h, w)]; }

    size_t index(int c, int h, int w) const {
        return (static_cast<size_t>(c) * static_cast<size_t>(height) + static_cast<size_t>(h)) *
                   static_cast<size_t>(width) +
               static_cast<size_t>(w);
    }

    bool same_shape(const FeatureMap& o) const {
        return channels == o.channels && height == o.height && width == o.width;
    }
};

// 1x1 convolution: an out_ch x in_ch mixing matrix plus bias.
struct ConvWeights {
    int out_ch = 0;
    int in_ch = 0;
    std::vector<double> kernel;  // [out][in]
    std::vector<double> bias;    // [out]

    ConvWeights() = default;

    ConvWeights(int out, int in)
        : out_ch(out), in_ch(in),
          kernel(static_cast<size_t>(out) * static_cast<size_t>(in), 0.0),
          bias(static_cast<size_t>(out), 0.0) {
        if (out < 1 || in < 1) throw contract_error("conv channel counts must be >= 1");
    }

    static ConvWeights identity(int n) {
        ConvWeights w(n, n);
        for (int i = 0; i < n; ++i) w.k(i, i) = 1.0;
        return w;
    }

    double k(int o, int i) const {
        return kernel[static_cast<size_t>(o) * static_cast<size_t>(in_ch) + static_cast<size_t>(i)];
    }
    double& k(int o, int i) {
        return kernel[static_cast<size_t>(o) * static_cast<size_t>(in_ch) + static_cast<size_t>(i)];
    }
};

// The shared reduction transform plus the two directional expansions.
struct CoordAttnWeights {
    ConvWeights reduce;    // channels -> mid
    ConvWeights expand_h;  // mid -> channels, row branch
    ConvWeights expand_w;  // mid -> channels, column branch

    void validate() const {
        if (reduce.out_ch != expand_h.in_ch || reduce.out_ch != expand_w.in_ch)
            throw contract_error("reduce output must feed both expansions");
        if (expand_h.out_ch != reduce.in_ch || expand_w.out_ch != reduce.in_ch)
            throw contract_error("expansion outputs must match the input channel count");
    }

    // Zero-initialized weight set at the default reduction ratio
    // mid = max(1, channels / 2).
    static CoordAttnWeights zeros(int channels, int mid = 0) {
        if (mid <= 0) mid = std::max(1, channels / 2);
        CoordAttnWeights w;
        w.reduce = ConvWeights(mid, channels);
        w.expand_h = ConvWeights(channels, mid);
        w.expand_w = ConvWeights(channels, mid);
        return w;
    }
};

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }
inline double relu(double v) { return v > 0.0 ? v : 0.0; }

inline FeatureMap conv1x1_forward(const FeatureMap& x, const ConvWeights& w) {
    if (x.channels != w.in_ch)
        throw contract_error("conv1x1: input has " + std::to_string(x.channels) +
                             " channels, kernel expects " + std::to_string(w.in_ch));
    FeatureMap out(w.out_ch, x.height, x.width);
    for (int o = 0; o < w.out_ch; ++o)
        for (int h = 0; h < x.height; ++h)
            for (int u = 0; u < x.width; ++u) {
                double s = w.bias[static_cast<size_t>(o)];
                for (int i = 0; i < x.channels; ++i) s += w.k(o, i) * x.at(i, h, u);
                out.at(o, h, u) = s;
            }
    return out;
}

// Directional average pooling: per-channel row means (length H) and
// column means (length W).
struct PooledVectors {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> h_vec;  // [c][h]
    std::vector<double> w_vec;  // [c][w]

    double h_at(int c, int h) const {
        return h_vec[static_cast<size_t>(c) * static_cast<size_t>(height) + static_cast<size_t>(h)];
    }
    double w_at(int c, int w) const {
        return w_vec[static_cast<size_t>(c) * static_cast<size_t>(width) + static_cast<size_t>(w)];
    }
};

inline PooledVectors coord_pool(const FeatureMap& x) {
    PooledVectors p;
    p.channels = x.channels;
    p.height = x.height;
    p.width = x.width;
    p.h_vec.assign(static_cast<size_t>(x.channels) * static_cast<size_t>(x.height), 0.0);
    p.w_vec.assign(static_cast<size_t>(x.channels) * static_cast<size_t>(x.width), 0.0);
    for (int c = 0; c < x.channels; ++c) {
        for (int h = 0; h < x.height; ++h) {
            double s = 0.0;
            for (int u = 0; u < x.width; ++u) s += x.at(c, h, u);
            p.h_vec[static_cast<size_t>(c) * static_cast<size_t>(x.height) +
                    static_cast<size_t>(h)] = s / x.width;
        }
        for (int u = 0; u < x.width; ++u) {
            double s = 0.0;
            for (int h = 0; h < x.height; ++h) s += x.at(c, h, u);
            p.w_vec[static_cast<size_t>(c) * static_cast<size_t>(x.width) +
                    static_cast<size_t>(u)] = s / x.height;
        }
    }
    return p;
}

namespace detail {

// Channel mixing on a [c][s] strip: out[o][s] = sum_i k[o][i] in[i][s] + b[o].
inline std::vector<double> mix_strip(const ConvWeights& w, const std::vector<double>& in,
                                     int in_ch, int strip_len) {
    std::vector<double> out(static_cast<size_t>(w.out_ch) * static_cast<size_t>(strip_len));
    for (int o = 0; o < w.out_ch; ++o)
        for (int s = 0; s < strip_len; ++s) {
            double acc = w.bias[static_cast<size_t>(o)];
            for (int i = 0; i < in_ch; ++i)
                acc += w.k(o, i) *
                       in[static_cast<size_t>(i) * static_cast<size_t>(strip_len) +
                          static_cast<size_t>(s)];
            out[static_cast<size_t>(o) * static_cast<size_t>(strip_len) +
                static_cast<size_t>(s)] = acc;
        }
    return out;
}

// Every intermediate of the forward pass, kept for the backward pass.
struct ForwardTrace {
    PooledVectors pooled;
    std::vector<double> strip;  // [c][H+W]
    std::vector<double> z;      // [mid][H+W], pre-activation
    std::vector<double> mid;    // relu(z)
    std::vector<double> a1;     // [c][H], pre-sigmoid
    std::vector<double> a2;     // [c][W], pre-sigmoid
    std::vector<double> phi1;   // sigmoid(a1)
    std::vector<double> phi2;   // sigmoid(a2)
    FeatureMap out;
};

inline ForwardTrace coord_attention_trace(const FeatureMap& x, const CoordAttnWeights& w) {
    w.validate();
    if (x.channels != w.reduce.in_ch)
        throw contract_error("coordinate attention: channel count mismatch");

    const int C = x.channels, H = x.height, W = x.width, S = H + W;
    const int M = w.reduce.out_ch;

    ForwardTrace t;
    t.pooled = coord_pool(x);

    // Concatenate the two pooled vectors along the spatial axis.
    t.strip.assign(static_cast<size_t>(C) * static_cast<size_t>(S), 0.0);
    for (int c = 0; c < C; ++c) {
        for (int h = 0; h < H; ++h)
            t.strip[static_cast<size_t>(c) * S + static_cast<size_t>(h)] = t.pooled.h_at(c, h);
        for (int u = 0; u < W; ++u)
            t.strip[static_cast<size_t>(c) * S + static_cast<size_t>(H + u)] = t.pooled.w_at(c, u);
    }

    t.z = mix_strip(w.reduce, t.strip, C, S);
    t.mid = t.z;
    for (double& v : t.mid) v = relu(v);

    // Split the mid strip back into row and column parts, then expand.
    std::vector<double> mid_h(static_cast<size_t>(M) * static_cast<size_t>(H));
    std::vector<double> mid_w(static_cast<size_t>(M) * static_cast<size_t>(W));
    for (int m = 0; m < M; ++m) {
        for (int h = 0; h < H; ++h)
            mid_h[static_cast<size_t>(m) * H + static_cast<size_t>(h)] =
                t.mid[static_cast<size_t>(m) * S + static_cast<size_t>(h)];
        for (int u = 0; u < W; ++u)
            mid_w[static_cast<size_t>(m) * W + static_cast<size_t>(u)] =
                t.mid[static_cast<size_t>(m) * S + static_cast<size_t>(H + u)];
    }

    t.a1 = mix_strip(w.expand_h, mid_h, M, H);
    t.a2 = mix_strip(w.expand_w, mid_w, M, W);
    t.phi1 = t.a1;
    for (double& v : t.phi1) v = sigmoid(v);
    t.phi2 = t.a2;
    for (double& v : t.phi2) v = sigmoid(v);

    t.out = FeatureMap(C, H, W);
    for (int c = 0; c < C; ++c)
        for (int p = 0; p < H; ++p)
            for (int u = 0; u < W; ++u)
                t.out.at(c, p, u) = x.at(c, p, u) *
                                    t.phi1[static_cast<size_t>(c) * H + static_cast<size_t>(p)] *
                                    t.phi2[static_cast<size_t>(c) * W + static_cast<size_t>(u)];
    return t;
}

} // namespace detail

// Pool, reduce through ReLU, split, expand through sigmoids, and
// re-weight the input by the per-row and per-column attention vectors.
inline FeatureMap coord_attention_forward(const FeatureMap& x, const CoordAttnWeights& w) {
    return detail::coord_attention_trace(x, w).out;
}

// Channel split: the first half passes through untouched, the second half
// goes through the branch convolution and ReLU, then coordinate attention
// re-weights the concatenation.
inline FeatureMap c2f_forward(const FeatureMap& x, const ConvWeights& branch,
                              const CoordAttnWeights& attn) {
    if (x.channels % 2 != 0) throw contract_error("c2f requires an even channel count");
    const int half = x.channels / 2;
    if (branch.in_ch != half || branch.out_ch != half)
        throw contract_error("c2f branch must map half channels to half channels");

    FeatureMap tail(half, x.height, x.width);
    for (int c = 0; c < half; ++c)
        for (int h = 0; h < x.height; ++h)
            for (int u = 0; u < x.width; ++u) tail.at(c, h, u) = x.at(half + c, h, u);

    const FeatureMap branched = conv1x1_forward(tail, branch);

    FeatureMap merged(x.channels, x.height, x.width);
    for (int c = 0; c < half; ++c)
        for (int h = 0; h < x.height; ++h)
            for (int u = 0; u < x.width; ++u) {
                merged.at(c, h, u) = x.at(c, h, u);
                merged.at(half + c, h, u) = relu(branched.at(c, h, u));
            }
    return coord_attention_forward(merged, attn);
}

struct CoordAttnGradients {
    FeatureMap grad_x;
    CoordAttnWeights grad_w;  // same shapes as the weights
};

// Exact reverse-mode gradients of coord_attention_forward. ReLU uses the
// zero subgradient at the kink.
inline CoordAttnGradients coord_attention_backward(const FeatureMap& x, const CoordAttnWeights& w,
                                                   const FeatureMap& upstream) {
    const auto t = detail::coord_attention_trace(x, w);
    if (!upstream.same_shape(t.out))
        throw contract_error("upstream gradient shape must match the forward output");

    const int C = x.channels, H = x.height, W = x.width, S = H + W;
    const int M = w.reduce.out_ch;

    CoordAttnGradients g;
    g.grad_x = FeatureMap(C, H, W);
    g.grad_w = CoordAttnWeights::zeros(C, M);

    std::vector<double> dphi1(static_cast<size_t>(C) * H, 0.0);
    std::vector<double> dphi2(static_cast<size_t>(C) * W, 0.0);

    for (int c = 0; c < C; ++c)
        for (int p = 0; p < H; ++p)
            for (int u = 0; u < W; ++u) {
                const double go = upstream.at(c, p, u);
                const double xv = x.at(c, p, u);
                const double f1 = t.phi1[static_cast<size_t>(c) * H + static_cast<size_t>(p)];
                const double f2 = t.phi2[static_cast<size_t>(c) * W + static_cast<size_t>(u)];
                g.grad_x.at(c, p, u) += go * f1 * f2;
                dphi1[static_cast<size_t>(c) * H + static_cast<size_t>(p)] += go * xv * f2;
                dphi2[static_cast<size_t>(c) * W + static_cast<size_t>(u)] += go * xv * f1;
            }

    // Through the sigmoids.
    std::vector<double> da1(dphi1.size()), da2(dphi2.size());
    for (size_t i = 0; i < da1.size(); ++i) da1[i] = dphi1[i] * t.phi1[i] * (1.0 - t.phi1[i]);
    for (size_t i = 0; i < da2.size(); ++i) da2[i] = dphi2[i] * t.phi2[i] * (1.0 - t.phi2[i]);

    // Expansion weights and the gradient flowing back into the mid strip.
    std::vector<double> dmid(static_cast<size_t>(M) * S, 0.0);
    for (int c = 0; c < C; ++c) {
        for (int h = 0; h < H; ++h) {
            const double d = da1[static_cast<size_t>(c) * H + static_cast<size_t>(h)];
            g.grad_w.expand_h.bias[static_cast<size_t>(c)] += d;
            for (int m = 0; m < M; ++m) {
                const double mid_v = t.mid[static_cast<size_t>(m) * S + static_cast<size_t>(h)];
                g.grad_w.expand_h.k(c, m) += d * mid_v;
                dmid[static_cast<size_t>(m) * S + static_cast<size_t>(h)] += w.expand_h.k(c, m) * d;
            }
        }
        for (int u = 0; u < W; ++u) {
            const double d = da2[static_cast<size_t>(c) * W + static_cast<size_t>(u)];
            g.grad_w.expand_w.bias[static_cast<size_t>(c)] += d;
            for (int m = 0; m < M; ++m) {
                const double mid_v = t.mid[static_cast<size_t>(m) * S + static_cast<size_t>(H + u)];
                g.grad_w.expand_w.k(c, m) += d * mid_v;
                dmid[static_cast<size_t>(m) * S + static_cast<size_t>(H + u)] +=
                    w.expand_w.k(c, m) * d;
            }
        }
    }

    // Through the ReLU and the reduction.
    std::vector<double> dstrip(static_cast<size_t>(C) * S, 0.0);
    for (int m = 0; m < M; ++m)
        for (int s = 0; s < S; ++s) {
            const size_t i = static_cast<size_t>(m) * S + static_cast<size_t>(s);
            const double dz = t.z[i] > 0.0 ? dmid[i] : 0.0;
            if (dz == 0.0) continue;
            g.grad_w.reduce.bias[static_cast<size_t>(m)] += dz;
            for (int c = 0; c < C; ++c) {
                g.grad_w.reduce.k(m, c) +=
                    dz * t.strip[static_cast<size_t>(c) * S + static_cast<size_t>(s)];
                dstrip[static_cast<size_t>(c) * S + static_cast<size_t>(s)] +=
                    w.reduce.k(m, c) * dz;
            }
        }

    // Through the pooling back onto the input.
    for (int c = 0; c < C; ++c)
        for (int p = 0; p < H; ++p)
            for (int u = 0; u < W; ++u)
                g.grad_x.at(c, p, u) +=
                    dstrip[static_cast<size_t>(c) * S + static_cast<size_t>(p)] / W +
                    dstrip[static_cast<size_t>(c) * S + static_cast<size_t>(H + u)] / H;

    return g;
}

// ---------------------------------------------------------------------------
// Weight serialization: nested numeric arrays.
//   ConvWeights      {"kernel": [[...out_ch rows of in_ch...]], "bias": [...]}
//   CoordAttnWeights {"reduce": {...}, "expand_h": {...}, "expand_w": {...}}
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const ConvWeights& w) {
    nlohmann::json kernel = nlohmann::json::array();
    for (int o = 0; o < w.out_ch; ++o) {
        nlohmann::json row = nlohmann::json::array();
        for (int i = 0; i < w.in_ch; ++i) row.push_back(w.k(o, i));
        kernel.push_back(std::move(row));
    }
    return {{"kernel", kernel}, {"bias", w.bias}};
}

inline ConvWeights conv_weights_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kernel") || !j.contains("bias"))
        throw format_error("conv weights need 'kernel' and 'bias'");
    const auto& kernel = j.at("kernel");
    if (!kernel.is_array() || kernel.empty() || !kernel.at(0).is_array() || kernel.at(0).empty())
        throw format_error("conv kernel must be a nonempty 2D array");
    const int out_ch = static_cast<int>(kernel.size());
    const int in_ch = static_cast<int>(kernel.at(0).size());
    ConvWeights w(out_ch, in_ch);
    for (int o = 0; o < out_ch; ++o) {
        const auto& row = kernel.at(static_cast<size_t>(o));
        if (!row.is_array() || static_cast<int>(row.size()) != in_ch)
            throw format_error("conv kernel rows must have equal length");
        for (int i = 0; i < in_ch; ++i) w.k(o, i) = row.at(static_cast<size_t>(i)).get<double>();
    }
    const auto& bias = j.at("bias");
    if (!bias.is_array() || static_cast<int>(bias.size()) != out_ch)
        throw format_error("conv bias length must match kernel rows");
    for (int o = 0; o < out_ch; ++o) w.bias[static_cast<size_t>(o)] = bias.at(static_cast<size_t>(o)).get<double>();
    return w;
}

inline nlohmann::json to_json(const CoordAttnWeights& w) {
    return {{"reduce", to_json(w.reduce)},
            {"expand_h", to_json(w.expand_h)},
            {"expand_w", to_json(w.expand_w)}};
}

inline CoordAttnWeights coord_attn_weights_from_json(const nlohmann::json& j) {
    for (const char* key : {"reduce", "expand_h", "expand_w"})
        if (!j.contains(key)) throw format_error(std::string("attention weights need '") + key + "'");
    CoordAttnWeights w;
    w.reduce = conv_weights_from_json(j.at("reduce"));
    w.expand_h = conv_weights_from_json(j.at("expand_h"));
    w.expand_w = conv_weights_from_json(j.at("expand_w"));
    w.validate();
    return w;
}

} // namespace lasermot::attention
