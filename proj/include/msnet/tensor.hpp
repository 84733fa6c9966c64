#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace msnet {

/// Dense batch x channel x height x width feature map, double precision,
/// row-major with w fastest.
struct Tensor4 {
    int n = 0;
    int c = 0;
    int h = 0;
    int w = 0;
    std::vector<double> data;

    Tensor4() = default;
    Tensor4(int n_, int c_, int h_, int w_)
        : n(n_), c(c_), h(h_), w(w_),
          data(static_cast<std::size_t>(n_) * c_ * h_ * w_, 0.0) {}

    static Tensor4 zeros_like(const Tensor4& other) {
        return Tensor4(other.n, other.c, other.h, other.w);
    }

    std::size_t size() const { return data.size(); }

    std::size_t index(int i, int j, int y, int x) const {
        return ((static_cast<std::size_t>(i) * c + j) * h + y) * w + x;
    }

    double& at(int i, int j, int y, int x) { return data[index(i, j, y, x)]; }
    double at(int i, int j, int y, int x) const { return data[index(i, j, y, x)]; }

    bool same_extents(const Tensor4& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }

    bool all_finite() const;
};

/// Convolution / transposed-convolution parameters. When per_channel is set the
/// kernel mixes no channels (out_channels == in_channels, weights hold
/// out*kh*kw entries); otherwise weights hold out*in*kh*kw entries. Bias always
/// has out_channels entries.
struct ConvParams {
    int out_channels = 0;
    int in_channels = 0;
    int kernel_h = 0;
    int kernel_w = 0;
    int stride = 1;
    int padding = 0;
    bool per_channel = false;
    std::vector<double> weights;
    std::vector<double> bias;

    std::size_t expected_weight_count() const {
        const std::size_t per_out =
            static_cast<std::size_t>(per_channel ? 1 : in_channels) * kernel_h * kernel_w;
        return static_cast<std::size_t>(out_channels) * per_out;
    }

    std::size_t weight_index(int oc, int ic, int ky, int kx) const {
        const std::size_t chan = per_channel ? 0 : static_cast<std::size_t>(ic);
        const std::size_t per_in = per_channel ? 1 : static_cast<std::size_t>(in_channels);
        return ((static_cast<std::size_t>(oc) * per_in + chan) * kernel_h + ky) * kernel_w + kx;
    }

    std::size_t param_count() const { return weights.size() + bias.size(); }

    void validate() const;

    /// Zero-filled copy with the same extents; gradient and momentum buffers.
    ConvParams shaped_zeros() const;
};

constexpr std::uint8_t kIgnoreLabel = 255;

/// Per-pixel integer labels; each entry is a class index in [0, num_classes)
/// or the ignore sentinel 255.
struct LabelMap {
    int n = 0;
    int h = 0;
    int w = 0;
    std::vector<std::uint8_t> labels;

    LabelMap() = default;
    LabelMap(int n_, int h_, int w_)
        : n(n_), h(h_), w(w_),
          labels(static_cast<std::size_t>(n_) * h_ * w_, 0) {}

    std::size_t index(int i, int y, int x) const {
        return (static_cast<std::size_t>(i) * h + y) * w + x;
    }

    std::uint8_t& at(int i, int y, int x) { return labels[index(i, y, x)]; }
    std::uint8_t at(int i, int y, int x) const { return labels[index(i, y, x)]; }

    bool same_extents(const LabelMap& o) const { return n == o.n && h == o.h && w == o.w; }
    void validate(int num_classes) const;
};

}  // namespace msnet
