#pragma once

#include <cstdint>
#include <vector>

#include "msnet/rng.hpp"
#include "msnet/tensor.hpp"

namespace msnet {

enum class Mode { Train, Eval };

struct Conv2dGrads {
    Tensor4 input;
    std::vector<double> weights;
    std::vector<double> bias;
};

/// Cross-correlation plus bias. Output extents must come out as positive
/// integers: (h + 2*padding - kernel_h) must be divisible by stride.
Tensor4 conv2d(const Tensor4& input, const ConvParams& params);
Conv2dGrads conv2d_grad(const Tensor4& input, const ConvParams& params,
                        const Tensor4& grad_out);

/// Transposed convolution reading the input through a one-pixel replicate
/// margin, so a partition-of-unity kernel preserves constants at the borders
/// too. Output h,w = input h,w * stride when kernel and padding follow
/// bilinear_upsample_params.
Tensor4 conv_transpose2d(const Tensor4& input, const ConvParams& params);
Conv2dGrads conv_transpose2d_grad(const Tensor4& input, const ConvParams& params,
                                  const Tensor4& grad_out);

/// Per-channel transposed-conv params for an integer upsampling factor,
/// initialized to the bilinear interpolation stencil (kernel 2f - f%2,
/// stride f, padding (f - f%2)/2). Maps constant fields to the same constant.
ConvParams bilinear_upsample_params(int channels, int factor);

struct MaxpoolResult {
    Tensor4 output;
    // One winning input position (flat data index) per output element; ties
    // break to the first position in row-major window order.
    std::vector<std::size_t> argmax;
};

/// 2x2 window, stride 2. Requires even h and w.
MaxpoolResult maxpool2d(const Tensor4& input);
Tensor4 maxpool2d_grad(const MaxpoolResult& fwd, const Tensor4& grad_out,
                       int in_n, int in_c, int in_h, int in_w);

Tensor4 relu(const Tensor4& input);
Tensor4 relu_grad(const Tensor4& input, const Tensor4& grad_out);

Tensor4 add(const Tensor4& a, const Tensor4& b);

struct DropoutResult {
    Tensor4 output;
    std::vector<std::uint8_t> kept;  // empty in eval mode or at rate 0
};

/// Inverted dropout: each element zeroed with probability rate, survivors
/// scaled by 1/(1-rate). Eval mode is bitwise identity. rate must be in [0,1).
DropoutResult dropout(const Tensor4& input, double rate, RngStream& rng, Mode mode);
Tensor4 dropout_grad(const DropoutResult& fwd, double rate, const Tensor4& grad_out);

}  // namespace msnet
