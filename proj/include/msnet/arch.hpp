#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msnet/graph.hpp"

namespace msnet {

enum class Variant { FCN8s, FCN8sF1, FCN8sF2, MSNetB1, MSNetB2, MSNetFB1, MSNetFB2 };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);
const std::vector<Variant>& all_variants();

struct ArchConfig {
    Variant variant = Variant::FCN8s;
    int num_blocks = 7;
    int pool_stages = 5;
    std::vector<int> channel_widths = {4, 8, 16, 16, 16, 32, 32};
    int num_classes = 3;
    int input_channels = 1;
    int input_h = 64;
    int input_w = 64;
    double dropout_rate = 0.0;
    SkipGradGate backward_skip_grad_gate = SkipGradGate::Open;
    LossWeights loss_weights;
    bool freeze_upsample = false;

    void validate() const;
    int forward_skip_count() const;   // N of the variant
    int backward_skip_count() const;  // P of the variant
    bool is_master_slave() const { return backward_skip_count() > 0; }

    bool operator==(const ArchConfig&) const = default;
};

struct BuiltModel {
    Graph graph;
    ParamStore params;  // descriptor: shapes, roles and init kinds; values zero
};

/// Assembles the variant's graph: a 7-block downsampling path with pools
/// after blocks 1..pool_stages and dropout in the last two blocks, the
/// two-stage score fusion head with a final 8x upsample, and for the
/// Master-Slave variants a second plain network feeding backward skips.
BuiltModel build(const ArchConfig& config);

/// Exact number of scalar parameters (weights + biases over all slots).
std::size_t param_count(const ArchConfig& config);

enum class SkipInit { Zero, Random };

/// He-style conv weights, zero biases, bilinear upsample kernels and (by
/// default) zeroed skip transforms. Each slot draws from its own named
/// stream, so slots that exist in several variants receive identical values
/// for the same seed.
ParamStore init_params(const ArchConfig& config, std::uint64_t seed,
                       SkipInit skip_init = SkipInit::Zero);

/// In-place variant of init_params for an already-built store.
void fill_params(ParamStore& store, std::uint64_t seed, SkipInit skip_init = SkipInit::Zero);

}  // namespace msnet
