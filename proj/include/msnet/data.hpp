#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msnet/tensor.hpp"

namespace msnet {

struct Sample {
    Tensor4 image;   // n == 1
    LabelMap labels; // n == 1
};

struct DatasetMetadata {
    std::string generator;
    std::uint64_t seed = 0;
    int resolution = 0;
};

struct Dataset {
    std::vector<Sample> samples;
    int num_classes = 0;
    DatasetMetadata metadata;
};

/// Synthetic context-dependent labeling task. Each image carries a global
/// background theme (dark or bright) and 1-3 foreground squares whose local
/// appearance is identical under both themes; the squares' class (1 or 2) is
/// decided by the theme alone, so per-pixel classification cannot resolve it.
/// Square borders (1 px) are labeled ignore. Background is class 0.
/// resolution must be divisible by 32.
Dataset gen_context_shapes(int resolution, int num_samples, std::uint64_t seed);

/// MSDS binary container, little-endian: magic "MSDS", u16 version=1,
/// u32 num_samples, u16 num_classes, u16 channels, u16 h, u16 w; then per
/// sample the image as float32 (c*h*w row-major) and labels as u8 (h*w).
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

/// Serialized byte size of a dataset with the given geometry.
std::size_t msds_file_size(std::size_t num_samples, int channels, int h, int w);

/// Binary PGM (P5, maxval 255) with pixel value = class index, 255 = ignore.
/// Canonical bytes: "P5\n<w> <h>\n255\n" + raster. Class count must be <= 254.
void export_label_map(const LabelMap& labels, int sample_index, int num_classes,
                      const std::string& path);
std::vector<std::uint8_t> render_pgm(const LabelMap& labels, int sample_index, int num_classes);
LabelMap parse_pgm(const std::vector<std::uint8_t>& bytes);

}  // namespace msnet
