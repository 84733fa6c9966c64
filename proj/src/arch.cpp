#include "msnet/arch.hpp"

#include <algorithm>
#include <cmath>

#include "msnet/blocks.hpp"
#include "msnet/errors.hpp"
#include "msnet/rng.hpp"

namespace msnet {

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::FCN8s: return "FCN8s";
        case Variant::FCN8sF1: return "FCN8sF1";
        case Variant::FCN8sF2: return "FCN8sF2";
        case Variant::MSNetB1: return "MSNetB1";
        case Variant::MSNetB2: return "MSNetB2";
        case Variant::MSNetFB1: return "MSNetFB1";
        case Variant::MSNetFB2: return "MSNetFB2";
    }
    return "?";
}

Variant variant_from_name(const std::string& name) {
    for (Variant v : all_variants())
        if (name == variant_name(v)) return v;
    throw InvalidSpec("unknown variant '" + name + "'");
}

const std::vector<Variant>& all_variants() {
    static const std::vector<Variant> v = {Variant::FCN8s,    Variant::FCN8sF1, Variant::FCN8sF2,
                                           Variant::MSNetB1,  Variant::MSNetB2, Variant::MSNetFB1,
                                           Variant::MSNetFB2};
    return v;
}

int ArchConfig::forward_skip_count() const {
    switch (variant) {
        case Variant::FCN8sF1:
        case Variant::MSNetFB1: return 1;
        case Variant::FCN8sF2:
        case Variant::MSNetFB2: return 3;
        default: return 0;
    }
}

int ArchConfig::backward_skip_count() const {
    switch (variant) {
        case Variant::MSNetB1:
        case Variant::MSNetFB1: return 1;
        case Variant::MSNetB2:
        case Variant::MSNetFB2: return 3;
        default: return 0;
    }
}

void ArchConfig::validate() const {
    if (num_blocks < 3) throw InvalidSpec("ArchConfig: need at least 3 blocks");
    if (pool_stages < 3 || pool_stages > num_blocks)
        throw InvalidSpec("ArchConfig: pool_stages must be in [3, num_blocks]");
    if (static_cast<int>(channel_widths.size()) != num_blocks)
        throw InvalidSpec("ArchConfig: channel_widths length must equal num_blocks");
    for (int w : channel_widths)
        if (w < 1) throw InvalidSpec("ArchConfig: widths must be >= 1");
    if (num_classes < 2) throw InvalidSpec("ArchConfig: need at least 2 classes");
    if (input_channels < 1) throw InvalidSpec("ArchConfig: input channels must be >= 1");
    const int div = 1 << pool_stages;
    if (input_h < div || input_w < div || input_h % div || input_w % div)
        throw InvalidSpec("ArchConfig: input extents must be positive multiples of 2^pool_stages");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw InvalidSpec("ArchConfig: dropout rate must be in [0,1)");
}

namespace {

BlockSpec block_spec(const ArchConfig& cfg, int L) {
    BlockSpec s;
    s.block_index = L;
    const bool tail = L > cfg.num_blocks - 2;  // the fully-connected analogs
    s.conv_count = tail ? 2 : (L <= 2 ? 2 : 3);
    s.kernel_size = tail ? 1 : 3;
    s.has_dropout = tail;
    s.dropout_rate = cfg.dropout_rate;
    s.in_channels = L == 1 ? cfg.input_channels : cfg.channel_widths[L - 2];
    s.out_channels = cfg.channel_widths[L - 1];
    return s;
}

/// Downsampling path + score head for one role. For the Master of a
/// Master-Slave pair each block input is first fused with the backward
/// skips, and forward skips are attached when the variant has them.
void assemble_network(NetBuilder& b, const ArchConfig& cfg, NetworkRole role) {
    const std::string r = role == NetworkRole::Slave ? "s/" : "m/";
    const bool master_of_pair = role == NetworkRole::Master && cfg.is_master_slave();
    const int n_fwd = role == NetworkRole::Slave ? 0 : cfg.forward_skip_count();

    int cur = b.input_node();
    for (int L = 1; L <= cfg.num_blocks; ++L) {
        const BlockSpec spec = block_spec(cfg, L);
        int chain_in = -1;
        if (master_of_pair)
            chain_in = b.attach_backward_skips(L, cfg.backward_skip_count(), cur, spec.in_channels);
        b.build_conv_block(role, spec, cur, chain_in);
        if (n_fwd > 0) b.attach_forward_skips(role, L, std::min(n_fwd, L));
        cur = b.block_output(role, L);
        if (L <= b.pool_stages())
            cur = b.add_maxpool(r + "b" + std::to_string(L) + "/pool", role, L, cur);
        if (L < cfg.num_blocks) b.set_block_input(role, L + 1, cur);
    }

    // FCN-8s head: score the deepest features, then twice fuse with scored
    // pool taps while doubling resolution, then one jump back to full size.
    const int k = cfg.num_classes;
    const int ps = b.pool_stages();
    int score = b.add_conv(r + "head/score", role, 0, cur, cfg.channel_widths[cfg.num_blocks - 1],
                           k, 1, InitKind::HeNormal);
    int up = b.add_upsample(r + "head/up2a", role, 0, score, k, 2, cfg.freeze_upsample);
    const int tap4 = b.block_input(role, ps);  // output of the next-to-last pool
    int tap4_score = b.add_conv(r + "head/pool" + std::to_string(ps - 1) + "score", role, 0, tap4,
                                cfg.channel_widths[ps - 2], k, 1, InitKind::Zero,
                                /*skip_transform=*/true);
    int fuse4 = b.add_add(r + "head/fuse4", role, 0, up, tap4_score);
    up = b.add_upsample(r + "head/up2b", role, 0, fuse4, k, 2, cfg.freeze_upsample);
    const int tap3 = b.block_input(role, ps - 1);
    int tap3_score = b.add_conv(r + "head/pool" + std::to_string(ps - 2) + "score", role, 0, tap3,
                                cfg.channel_widths[ps - 3], k, 1, InitKind::Zero,
                                /*skip_transform=*/true);
    int fuse3 = b.add_add(r + "head/fuse3", role, 0, up, tap3_score);
    const int final_factor = 1 << (ps - 2);
    int full = b.add_upsample(r + "head/up" + std::to_string(final_factor), role, 0, fuse3, k,
                              final_factor, cfg.freeze_upsample);

    if (role == NetworkRole::Master) {
        const int score_out = b.add_score("m/score", full);
        b.add_loss("m/loss", NetworkRole::Master, score_out);
    } else {
        b.add_loss("s/loss", NetworkRole::Slave, full);
    }
}

}  // namespace

BuiltModel build(const ArchConfig& cfg) {
    cfg.validate();
    NetBuilder b(cfg.num_blocks, cfg.pool_stages, cfg.num_classes, cfg.input_channels, cfg.input_h,
                 cfg.input_w);
    if (cfg.is_master_slave()) assemble_network(b, cfg, NetworkRole::Slave);
    assemble_network(b, cfg, NetworkRole::Master);
    auto [graph, store] = b.finish();
    return {std::move(graph), std::move(store)};
}

std::size_t param_count(const ArchConfig& cfg) {
    return build(cfg).params.total_param_count();
}

namespace {

// "m/b3/conv1" -> "b3/conv1": Master, Slave and standalone copies of the same
// layer share one init stream, so a seed fixes their draws jointly.
std::string init_label(const std::string& slot_name) {
    const auto slash = slot_name.find('/');
    return "init/" + (slash == std::string::npos ? slot_name : slot_name.substr(slash + 1));
}

}  // namespace

void fill_params(ParamStore& store, std::uint64_t seed, SkipInit skip_init) {
    for (auto& slot : store.slots) {
        ConvParams& p = slot.params;
        std::fill(p.bias.begin(), p.bias.end(), 0.0);
        switch (slot.init) {
            case InitKind::Bilinear:
                p = bilinear_upsample_params(p.out_channels, p.stride);
                break;
            case InitKind::Zero:
                if (slot.is_skip_transform && skip_init == SkipInit::Random) {
                    RngStream rng(seed, init_label(slot.name));
                    const int fan_in =
                        (p.per_channel ? 1 : p.in_channels) * p.kernel_h * p.kernel_w;
                    const double scale = std::sqrt(2.0 / fan_in);
                    for (double& wv : p.weights) wv = scale * rng.next_normal();
                } else {
                    std::fill(p.weights.begin(), p.weights.end(), 0.0);
                }
                break;
            case InitKind::HeNormal: {
                RngStream rng(seed, init_label(slot.name));
                const int fan_in = (p.per_channel ? 1 : p.in_channels) * p.kernel_h * p.kernel_w;
                const double scale = std::sqrt(2.0 / fan_in);
                for (double& wv : p.weights) wv = scale * rng.next_normal();
                break;
            }
        }
    }
    store.reset_momentum();
}

ParamStore init_params(const ArchConfig& cfg, std::uint64_t seed, SkipInit skip_init) {
    ParamStore store = build(cfg).params;
    fill_params(store, seed, skip_init);
    return store;
}

}  // namespace msnet
