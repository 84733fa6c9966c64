#include "msnet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "msnet/errors.hpp"

namespace msnet {

namespace {

struct ConvGeometry {
    int out_h = 0;
    int out_w = 0;
};

ConvGeometry conv_output_extents(const Tensor4& input, const ConvParams& p) {
    p.validate();
    if (input.c != p.in_channels)
        throw ShapeMismatch("conv2d: input has " + std::to_string(input.c) +
                            " channels, params expect " + std::to_string(p.in_channels));
    const int num_h = input.h + 2 * p.padding - p.kernel_h;
    const int num_w = input.w + 2 * p.padding - p.kernel_w;
    if (num_h < 0 || num_w < 0 || num_h % p.stride != 0 || num_w % p.stride != 0)
        throw ShapeMismatch("conv2d: extents " + std::to_string(input.h) + "x" +
                            std::to_string(input.w) + " incompatible with kernel/stride/padding");
    return {num_h / p.stride + 1, num_w / p.stride + 1};
}

}  // namespace

Tensor4 conv2d(const Tensor4& input, const ConvParams& p) {
    const auto [out_h, out_w] = conv_output_extents(input, p);
    Tensor4 out(input.n, p.out_channels, out_h, out_w);

    for (int i = 0; i < input.n; ++i) {
        for (int oc = 0; oc < p.out_channels; ++oc) {
            double* out_plane = &out.data[out.index(i, oc, 0, 0)];
            const double b = p.bias[oc];
            for (int e = 0; e < out_h * out_w; ++e) out_plane[e] = b;

            const int ic_begin = p.per_channel ? oc : 0;
            const int ic_end = p.per_channel ? oc + 1 : p.in_channels;
            for (int ic = ic_begin; ic < ic_end; ++ic) {
                const double* in_plane = &input.data[input.index(i, ic, 0, 0)];
                for (int ky = 0; ky < p.kernel_h; ++ky) {
                    for (int kx = 0; kx < p.kernel_w; ++kx) {
                        const double wv = p.weights[p.weight_index(oc, ic, ky, kx)];
                        if (wv == 0.0) continue;
                        for (int oy = 0; oy < out_h; ++oy) {
                            const int iy = oy * p.stride + ky - p.padding;
                            if (iy < 0 || iy >= input.h) continue;
                            const double* in_row = in_plane + static_cast<std::size_t>(iy) * input.w;
                            double* out_row = out_plane + static_cast<std::size_t>(oy) * out_w;
                            for (int ox = 0; ox < out_w; ++ox) {
                                const int ix = ox * p.stride + kx - p.padding;
                                if (ix < 0 || ix >= input.w) continue;
                                out_row[ox] += wv * in_row[ix];
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

Conv2dGrads conv2d_grad(const Tensor4& input, const ConvParams& p, const Tensor4& grad_out) {
    const auto [out_h, out_w] = conv_output_extents(input, p);
    if (grad_out.n != input.n || grad_out.c != p.out_channels ||
        grad_out.h != out_h || grad_out.w != out_w)
        throw ShapeMismatch("conv2d_grad: grad_out extents do not match forward output");

    Conv2dGrads g;
    g.input = Tensor4::zeros_like(input);
    g.weights.assign(p.weights.size(), 0.0);
    g.bias.assign(p.bias.size(), 0.0);

    for (int i = 0; i < input.n; ++i) {
        for (int oc = 0; oc < p.out_channels; ++oc) {
            const double* go_plane = &grad_out.data[grad_out.index(i, oc, 0, 0)];
            double bias_acc = 0.0;
            for (int e = 0; e < out_h * out_w; ++e) bias_acc += go_plane[e];
            g.bias[oc] += bias_acc;

            const int ic_begin = p.per_channel ? oc : 0;
            const int ic_end = p.per_channel ? oc + 1 : p.in_channels;
            for (int ic = ic_begin; ic < ic_end; ++ic) {
                const double* in_plane = &input.data[input.index(i, ic, 0, 0)];
                double* gin_plane = &g.input.data[g.input.index(i, ic, 0, 0)];
                for (int ky = 0; ky < p.kernel_h; ++ky) {
                    for (int kx = 0; kx < p.kernel_w; ++kx) {
                        const double wv = p.weights[p.weight_index(oc, ic, ky, kx)];
                        double w_acc = 0.0;
                        for (int oy = 0; oy < out_h; ++oy) {
                            const int iy = oy * p.stride + ky - p.padding;
                            if (iy < 0 || iy >= input.h) continue;
                            const double* in_row = in_plane + static_cast<std::size_t>(iy) * input.w;
                            double* gin_row = gin_plane + static_cast<std::size_t>(iy) * input.w;
                            const double* go_row = go_plane + static_cast<std::size_t>(oy) * out_w;
                            for (int ox = 0; ox < out_w; ++ox) {
                                const int ix = ox * p.stride + kx - p.padding;
                                if (ix < 0 || ix >= input.w) continue;
                                const double go = go_row[ox];
                                w_acc += go * in_row[ix];
                                gin_row[ix] += go * wv;
                            }
                        }
                        g.weights[p.weight_index(oc, ic, ky, kx)] += w_acc;
                    }
                }
            }
        }
    }
    return g;
}

namespace {

ConvGeometry transpose_output_extents(const Tensor4& input, const ConvParams& p) {
    p.validate();
    if (input.c != p.in_channels)
        throw ShapeMismatch("conv_transpose2d: input has " + std::to_string(input.c) +
                            " channels, params expect " + std::to_string(p.in_channels));
    const int out_h = (input.h - 1) * p.stride - 2 * p.padding + p.kernel_h;
    const int out_w = (input.w - 1) * p.stride - 2 * p.padding + p.kernel_w;
    if (out_h < 1 || out_w < 1)
        throw ShapeMismatch("conv_transpose2d: derived output extents are not positive");
    return {out_h, out_w};
}

inline int clamp_index(int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); }

}  // namespace

// The input is read through a one-pixel replicate margin; border outputs then
// see the kernel's full mass and the bilinear stencil stays a partition of
// unity everywhere, not just in the interior.
Tensor4 conv_transpose2d(const Tensor4& input, const ConvParams& p) {
    const auto [out_h, out_w] = transpose_output_extents(input, p);
    Tensor4 out(input.n, p.out_channels, out_h, out_w);

    for (int i = 0; i < input.n; ++i) {
        for (int oc = 0; oc < p.out_channels; ++oc) {
            double* out_plane = &out.data[out.index(i, oc, 0, 0)];
            const double b = p.bias[oc];
            for (int e = 0; e < out_h * out_w; ++e) out_plane[e] = b;

            const int ic_begin = p.per_channel ? oc : 0;
            const int ic_end = p.per_channel ? oc + 1 : p.in_channels;
            for (int ic = ic_begin; ic < ic_end; ++ic) {
                const double* in_plane = &input.data[input.index(i, ic, 0, 0)];
                for (int iy = -1; iy <= input.h; ++iy) {
                    const double* in_row =
                        in_plane + static_cast<std::size_t>(clamp_index(iy, input.h - 1)) * input.w;
                    for (int ky = 0; ky < p.kernel_h; ++ky) {
                        const int oy = iy * p.stride + ky - p.padding;
                        if (oy < 0 || oy >= out_h) continue;
                        double* out_row = out_plane + static_cast<std::size_t>(oy) * out_w;
                        for (int kx = 0; kx < p.kernel_w; ++kx) {
                            const double wv = p.weights[p.weight_index(oc, ic, ky, kx)];
                            if (wv == 0.0) continue;
                            for (int ix = -1; ix <= input.w; ++ix) {
                                const int ox = ix * p.stride + kx - p.padding;
                                if (ox < 0 || ox >= out_w) continue;
                                out_row[ox] += wv * in_row[clamp_index(ix, input.w - 1)];
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

Conv2dGrads conv_transpose2d_grad(const Tensor4& input, const ConvParams& p,
                                  const Tensor4& grad_out) {
    const auto [out_h, out_w] = transpose_output_extents(input, p);
    if (grad_out.n != input.n || grad_out.c != p.out_channels ||
        grad_out.h != out_h || grad_out.w != out_w)
        throw ShapeMismatch("conv_transpose2d_grad: grad_out extents do not match forward output");

    Conv2dGrads g;
    g.input = Tensor4::zeros_like(input);
    g.weights.assign(p.weights.size(), 0.0);
    g.bias.assign(p.bias.size(), 0.0);

    for (int i = 0; i < input.n; ++i) {
        for (int oc = 0; oc < p.out_channels; ++oc) {
            const double* go_plane = &grad_out.data[grad_out.index(i, oc, 0, 0)];
            double bias_acc = 0.0;
            for (int e = 0; e < out_h * out_w; ++e) bias_acc += go_plane[e];
            g.bias[oc] += bias_acc;

            const int ic_begin = p.per_channel ? oc : 0;
            const int ic_end = p.per_channel ? oc + 1 : p.in_channels;
            for (int ic = ic_begin; ic < ic_end; ++ic) {
                const double* in_plane = &input.data[input.index(i, ic, 0, 0)];
                double* gin_plane = &g.input.data[g.input.index(i, ic, 0, 0)];
                for (int iy = -1; iy <= input.h; ++iy) {
                    const int cy = clamp_index(iy, input.h - 1);
                    const double* in_row = in_plane + static_cast<std::size_t>(cy) * input.w;
                    double* gin_row = gin_plane + static_cast<std::size_t>(cy) * input.w;
                    for (int ky = 0; ky < p.kernel_h; ++ky) {
                        const int oy = iy * p.stride + ky - p.padding;
                        if (oy < 0 || oy >= out_h) continue;
                        const double* go_row = go_plane + static_cast<std::size_t>(oy) * out_w;
                        for (int kx = 0; kx < p.kernel_w; ++kx) {
                            const double wv = p.weights[p.weight_index(oc, ic, ky, kx)];
                            double w_acc = 0.0;
                            for (int ix = -1; ix <= input.w; ++ix) {
                                const int ox = ix * p.stride + kx - p.padding;
                                if (ox < 0 || ox >= out_w) continue;
                                const int cx = clamp_index(ix, input.w - 1);
                                const double go = go_row[ox];
                                w_acc += go * in_row[cx];
                                gin_row[cx] += go * wv;
                            }
                            g.weights[p.weight_index(oc, ic, ky, kx)] += w_acc;
                        }
                    }
                }
            }
        }
    }
    return g;
}

ConvParams bilinear_upsample_params(int channels, int factor) {
    if (channels < 1) throw InvalidSpec("bilinear_upsample_params: channels must be >= 1");
    if (factor < 2) throw InvalidSpec("bilinear_upsample_params: factor must be >= 2");
    ConvParams p;
    p.out_channels = channels;
    p.in_channels = channels;
    p.kernel_h = p.kernel_w = 2 * factor - factor % 2;
    p.stride = factor;
    p.padding = (factor - factor % 2) / 2;
    p.per_channel = true;
    p.weights.assign(p.expected_weight_count(), 0.0);
    p.bias.assign(channels, 0.0);

    const double center = (2.0 * factor - 1.0 - factor % 2) / 2.0;
    for (int oc = 0; oc < channels; ++oc) {
        for (int ky = 0; ky < p.kernel_h; ++ky) {
            const double fy = 1.0 - std::abs(ky - center) / factor;
            for (int kx = 0; kx < p.kernel_w; ++kx) {
                const double fx = 1.0 - std::abs(kx - center) / factor;
                p.weights[p.weight_index(oc, oc, ky, kx)] = fy * fx;
            }
        }
    }
    return p;
}

MaxpoolResult maxpool2d(const Tensor4& input) {
    if (input.h % 2 != 0 || input.w % 2 != 0)
        throw ShapeMismatch("maxpool2d: h and w must be divisible by 2, got " +
                            std::to_string(input.h) + "x" + std::to_string(input.w));
    MaxpoolResult r;
    r.output = Tensor4(input.n, input.c, input.h / 2, input.w / 2);
    r.argmax.resize(r.output.size());

    std::size_t out_pos = 0;
    for (int i = 0; i < input.n; ++i) {
        for (int j = 0; j < input.c; ++j) {
            for (int oy = 0; oy < r.output.h; ++oy) {
                for (int ox = 0; ox < r.output.w; ++ox) {
                    std::size_t best = input.index(i, j, 2 * oy, 2 * ox);
                    double best_v = input.data[best];
                    // first position wins ties (row-major window order)
                    const std::size_t cand[3] = {
                        input.index(i, j, 2 * oy, 2 * ox + 1),
                        input.index(i, j, 2 * oy + 1, 2 * ox),
                        input.index(i, j, 2 * oy + 1, 2 * ox + 1)};
                    for (std::size_t k : cand) {
                        if (input.data[k] > best_v) {
                            best_v = input.data[k];
                            best = k;
                        }
                    }
                    r.output.data[out_pos] = best_v;
                    r.argmax[out_pos] = best;
                    ++out_pos;
                }
            }
        }
    }
    return r;
}

Tensor4 maxpool2d_grad(const MaxpoolResult& fwd, const Tensor4& grad_out,
                       int in_n, int in_c, int in_h, int in_w) {
    if (!grad_out.same_extents(fwd.output))
        throw ShapeMismatch("maxpool2d_grad: grad_out extents do not match forward output");
    Tensor4 g(in_n, in_c, in_h, in_w);
    for (std::size_t e = 0; e < fwd.argmax.size(); ++e)
        g.data[fwd.argmax[e]] += grad_out.data[e];
    return g;
}

Tensor4 relu(const Tensor4& input) {
    Tensor4 out = input;
    for (double& v : out.data)
        if (v < 0.0) v = 0.0;
    return out;
}

Tensor4 relu_grad(const Tensor4& input, const Tensor4& grad_out) {
    if (!grad_out.same_extents(input))
        throw ShapeMismatch("relu_grad: extents mismatch");
    Tensor4 g = grad_out;
    for (std::size_t e = 0; e < g.data.size(); ++e)
        if (input.data[e] <= 0.0) g.data[e] = 0.0;
    return g;
}

Tensor4 add(const Tensor4& a, const Tensor4& b) {
    if (!a.same_extents(b))
        throw ShapeMismatch("add: extents mismatch (" + std::to_string(a.c) + "x" +
                            std::to_string(a.h) + "x" + std::to_string(a.w) + " vs " +
                            std::to_string(b.c) + "x" + std::to_string(b.h) + "x" +
                            std::to_string(b.w) + ")");
    Tensor4 out = a;
    for (std::size_t e = 0; e < out.data.size(); ++e) out.data[e] += b.data[e];
    return out;
}

DropoutResult dropout(const Tensor4& input, double rate, RngStream& rng, Mode mode) {
    if (rate < 0.0 || rate >= 1.0)
        throw InvalidArgument("dropout: rate must be in [0,1)");
    DropoutResult r;
    r.output = input;
    if (mode == Mode::Eval || rate == 0.0) return r;

    const double scale = 1.0 / (1.0 - rate);
    r.kept.resize(input.size());
    for (std::size_t e = 0; e < input.size(); ++e) {
        if (rng.next_double() < rate) {
            r.kept[e] = 0;
            r.output.data[e] = 0.0;
        } else {
            r.kept[e] = 1;
            r.output.data[e] *= scale;
        }
    }
    return r;
}

Tensor4 dropout_grad(const DropoutResult& fwd, double rate, const Tensor4& grad_out) {
    if (!grad_out.same_extents(fwd.output))
        throw ShapeMismatch("dropout_grad: extents mismatch");
    if (fwd.kept.empty()) return grad_out;  // eval or rate 0: identity
    const double scale = 1.0 / (1.0 - rate);
    Tensor4 g = grad_out;
    for (std::size_t e = 0; e < g.data.size(); ++e)
        g.data[e] = fwd.kept[e] ? g.data[e] * scale : 0.0;
    return g;
}

}  // namespace msnet
