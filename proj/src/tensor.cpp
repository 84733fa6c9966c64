#include "msnet/tensor.hpp"

#include <cmath>
#include <string>

#include "msnet/errors.hpp"

namespace msnet {

bool Tensor4::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void ConvParams::validate() const {
    if (out_channels < 1 || in_channels < 1 || kernel_h < 1 || kernel_w < 1)
        throw InvalidSpec("ConvParams: extents must be >= 1");
    if (stride < 1) throw InvalidSpec("ConvParams: stride must be >= 1");
    if (padding < 0) throw InvalidSpec("ConvParams: padding must be >= 0");
    if (per_channel && out_channels != in_channels)
        throw InvalidSpec("ConvParams: per-channel kernels need out_channels == in_channels");
    if (weights.size() != expected_weight_count())
        throw ShapeMismatch("ConvParams: weight count " + std::to_string(weights.size()) +
                            " does not match declared extents (" +
                            std::to_string(expected_weight_count()) + ")");
    if (bias.size() != static_cast<std::size_t>(out_channels))
        throw ShapeMismatch("ConvParams: bias length does not match out_channels");
}

ConvParams ConvParams::shaped_zeros() const {
    ConvParams z = *this;
    z.weights.assign(weights.size(), 0.0);
    z.bias.assign(bias.size(), 0.0);
    return z;
}

void LabelMap::validate(int num_classes) const {
    for (std::uint8_t v : labels) {
        if (v != kIgnoreLabel && v >= num_classes)
            throw InvalidSpec("LabelMap: label " + std::to_string(int(v)) +
                              " outside [0," + std::to_string(num_classes) + ") and not ignore");
    }
}

}  // namespace msnet
