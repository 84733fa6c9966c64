#include "msnet/blocks.hpp"

#include <algorithm>

#include "msnet/errors.hpp"

namespace msnet {

void BlockSpec::validate() const {
    if (conv_count != 2 && conv_count != 3)
        throw InvalidSpec("BlockSpec: conv_count must be 2 or 3");
    if (in_channels < 1 || out_channels < 1)
        throw InvalidSpec("BlockSpec: channel counts must be >= 1");
    if (kernel_size < 1 || kernel_size % 2 == 0)
        throw InvalidSpec("BlockSpec: kernel size must be odd and >= 1");
    if (block_index < 1) throw InvalidSpec("BlockSpec: block index must be >= 1");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw InvalidSpec("BlockSpec: dropout rate must be in [0,1)");
}

NetBuilder::NetBuilder(int num_blocks, int pool_stages, int num_classes, int in_c, int in_h,
                       int in_w)
    : num_blocks_(num_blocks), pool_stages_(pool_stages) {
    if (num_blocks < 1) throw InvalidSpec("NetBuilder: need at least one block");
    if (pool_stages < 0 || pool_stages > num_blocks)
        throw InvalidSpec("NetBuilder: pool stages must fit the block count");
    graph_.num_blocks = num_blocks;
    graph_.num_classes = num_classes;
    graph_.input_channels = in_c;
    graph_.input_h = in_h;
    graph_.input_w = in_w;
    graph_.master_block_output.assign(num_blocks, -1);
    graph_.slave_block_output.assign(num_blocks, -1);
    for (int r = 0; r < 2; ++r) {
        x_node_[r].assign(num_blocks + 2, -1);
        y_node_[r].assign(num_blocks + 2, -1);
        in_ch_[r].assign(num_blocks + 2, 0);
        out_ch_[r].assign(num_blocks + 2, 0);
    }
    input_ = add_node(OpKind::Input, "input", NetworkRole::Shared, 0, {});
}

std::string NetBuilder::role_prefix(NetworkRole role) const {
    return role == NetworkRole::Slave ? "s/" : "m/";
}

int NetBuilder::add_node(OpKind op, const std::string& name, NetworkRole role, int block,
                         std::vector<int> inputs) {
    Node n;
    n.id = static_cast<int>(graph_.nodes.size());
    n.op = op;
    n.name = name;
    n.role = role;
    n.block_index = block;
    n.inputs = std::move(inputs);
    for (int in : n.inputs)
        if (in < 0 || in >= n.id) throw InvalidSpec("node " + name + " references an unbuilt input");
    graph_.nodes.push_back(std::move(n));
    return graph_.nodes.back().id;
}

int NetBuilder::add_conv(const std::string& name, NetworkRole role, int block, int input, int in_c,
                         int out_c, int kernel, InitKind init, bool skip_transform,
                         bool backward_boundary) {
    ParamSlot slot;
    slot.name = name;
    slot.role = role;
    slot.init = init;
    slot.is_skip_transform = skip_transform;
    slot.params.out_channels = out_c;
    slot.params.in_channels = in_c;
    slot.params.kernel_h = slot.params.kernel_w = kernel;
    slot.params.stride = 1;
    slot.params.padding = kernel / 2;
    slot.params.weights.assign(slot.params.expected_weight_count(), 0.0);
    slot.params.bias.assign(out_c, 0.0);
    store_.slots.push_back(std::move(slot));

    const int id = add_node(OpKind::Conv2d, name, role, block, {input});
    graph_.nodes[id].param_slot = static_cast<int>(store_.slots.size()) - 1;
    graph_.nodes[id].backward_skip_boundary = backward_boundary;
    return id;
}

int NetBuilder::add_upsample(const std::string& name, NetworkRole role, int block, int input,
                             int channels, int factor, bool frozen) {
    ParamSlot slot;
    slot.name = name;
    slot.role = role;
    slot.init = InitKind::Bilinear;
    slot.frozen = frozen;
    slot.params = bilinear_upsample_params(channels, factor);
    store_.slots.push_back(std::move(slot));

    const int id = add_node(OpKind::Upsample, name, role, block, {input});
    graph_.nodes[id].param_slot = static_cast<int>(store_.slots.size()) - 1;
    return id;
}

int NetBuilder::add_relu(const std::string& name, NetworkRole role, int block, int input) {
    return add_node(OpKind::Relu, name, role, block, {input});
}

int NetBuilder::add_maxpool(const std::string& name, NetworkRole role, int block, int input) {
    return add_node(OpKind::Maxpool, name, role, block, {input});
}

int NetBuilder::add_add(const std::string& name, NetworkRole role, int block, int a, int b) {
    return add_node(OpKind::Add, name, role, block, {a, b});
}

int NetBuilder::add_dropout(const std::string& name, NetworkRole role, int block, int input,
                            double rate) {
    const int id = add_node(OpKind::Dropout, name, role, block, {input});
    graph_.nodes[id].dropout_rate = rate;
    return id;
}

int NetBuilder::add_score(const std::string& name, int input) {
    const int id = add_node(OpKind::Score, name, NetworkRole::Master, 0, {input});
    if (graph_.master_score != -1) throw InvalidSpec("graph already has a Master score output");
    graph_.master_score = id;
    return id;
}

int NetBuilder::add_loss(const std::string& name, NetworkRole role, int input) {
    const int id = add_node(OpKind::Loss, name, role, 0, {input});
    if (role == NetworkRole::Master) {
        if (graph_.master_loss != -1) throw InvalidSpec("graph already has a Master loss");
        graph_.master_loss = id;
    } else {
        if (graph_.slave_loss != -1) throw InvalidSpec("graph already has a Slave loss");
        graph_.slave_loss = id;
    }
    return id;
}

int NetBuilder::block_input(NetworkRole role, int L) const {
    return x_node_[role == NetworkRole::Slave][L];
}

int NetBuilder::block_output(NetworkRole role, int L) const {
    return y_node_[role == NetworkRole::Slave][L];
}

void NetBuilder::set_block_input(NetworkRole role, int L, int node) {
    x_node_[role == NetworkRole::Slave][L] = node;
}

int NetBuilder::block_channels_in(NetworkRole role, int L) const {
    return in_ch_[role == NetworkRole::Slave][L];
}

int NetBuilder::block_channels_out(NetworkRole role, int L) const {
    return out_ch_[role == NetworkRole::Slave][L];
}

int NetBuilder::pools_between(int from, int to) const {
    // pooling layers sit after blocks 1..pool_stages_
    int k = 0;
    for (int b = from; b < to; ++b)
        if (b >= 1 && b <= pool_stages_) ++k;
    return k;
}

int NetBuilder::build_conv_block(NetworkRole role, const BlockSpec& spec, int x_node,
                                 int chain_input) {
    spec.validate();
    const int L = spec.block_index;
    if (L > num_blocks_) throw InvalidSpec("build_conv_block: block index beyond num_blocks");
    const int r = role == NetworkRole::Slave;
    const std::string base = role_prefix(role) + "b" + std::to_string(L) + "/";

    x_node_[r][L] = x_node;
    in_ch_[r][L] = spec.in_channels;
    out_ch_[r][L] = spec.out_channels;

    int cur = chain_input < 0 ? x_node : chain_input;
    int cur_c = spec.in_channels;
    for (int i = 1; i <= spec.conv_count; ++i) {
        cur = add_conv(base + "conv" + std::to_string(i), role, L, cur, cur_c, spec.out_channels,
                       spec.kernel_size, InitKind::HeNormal);
        cur_c = spec.out_channels;
        cur = add_relu(base + "relu" + std::to_string(i), role, L, cur);
        if (spec.has_dropout && i > spec.conv_count - 2)
            cur = add_dropout(base + "drop" + std::to_string(i), role, L, cur, spec.dropout_rate);
    }
    y_node_[r][L] = cur;
    return cur;
}

void NetBuilder::attach_forward_skips(NetworkRole role, int L, int N) {
    if (N < 1 || N > L)
        throw InvalidSpec("attach_forward_skips: need 1 <= N <= L, got N=" + std::to_string(N) +
                          " at block " + std::to_string(L));
    const int r = role == NetworkRole::Slave;
    if (y_node_[r][L] < 0) throw InvalidSpec("attach_forward_skips: block not built");

    int y = y_node_[r][L];
    const int out_c = out_ch_[r][L];
    for (int l = L - (N - 1); l <= L; ++l) {
        if (x_node_[r][l] < 0) throw InvalidSpec("attach_forward_skips: source block not built");
        const std::string base =
            role_prefix(role) + "b" + std::to_string(L) + "/fskip" + std::to_string(l) + "/";
        const int transform = add_conv(base + "transform", role, L, x_node_[r][l], in_ch_[r][l],
                                       out_c, 1, InitKind::Zero, /*skip_transform=*/true);
        int t = transform;
        const int depth = pools_between(l, L);
        for (int d = 1; d <= depth; ++d)
            t = add_maxpool(base + "pool" + std::to_string(d), role, L, t);
        y = add_add(base + "add", role, L, y, t);

        skips_.push_back(
            {l, L, SkipDirection::Forward, graph_.nodes[transform].param_slot, depth});
    }
    y_node_[r][L] = y;
}

int NetBuilder::fuse_backward_sources(int L, const std::vector<BackwardSource>& sources,
                                      int x_master, int dest_channels) {
    if (L < 1 || L > num_blocks_) throw InvalidSpec("fuse_backward_sources: bad destination block");
    int fused = x_master;
    for (const auto& src : sources) {
        if (src.node < 0 || src.node >= static_cast<int>(graph_.nodes.size()))
            throw InvalidSpec("fuse_backward_sources: unknown source node");
        if (graph_.nodes[src.node].role == NetworkRole::Master)
            throw InvalidSpec("fuse_backward_sources: source " + graph_.nodes[src.node].name +
                              " is a Master node; a backward skip inside one network is cyclic");
        const std::string base = "m/b" + std::to_string(L) + "/bskip" + std::to_string(src.block) + "/";
        const int transform =
            add_conv(base + "transform", NetworkRole::Master, L, src.node, src.channels,
                     dest_channels, 1, InitKind::Zero, /*skip_transform=*/true,
                     /*backward_boundary=*/true);
        int t = transform;
        const int depth = pools_between(L, src.block);
        for (int d = 1; d <= depth; ++d)
            t = add_upsample(base + "up" + std::to_string(d), NetworkRole::Master, L, t,
                             dest_channels, 2, /*frozen=*/false);
        fused = add_add(base + "add", NetworkRole::Master, L, fused, t);

        skips_.push_back(
            {src.block, L, SkipDirection::Backward, graph_.nodes[transform].param_slot, depth});
    }
    return fused;
}

int NetBuilder::attach_backward_skips(int L, int P, int x_master, int dest_channels) {
    if (P < 1) throw InvalidSpec("attach_backward_skips: P must be >= 1");
    // clip to existing blocks rather than wrap
    const int last = std::min(L + P - 1, num_blocks_);
    std::vector<BackwardSource> sources;
    for (int l = L; l <= last; ++l) {
        if (y_node_[1][l] < 0)
            throw InvalidSpec("attach_backward_skips: Slave block " + std::to_string(l) +
                              " not built");
        sources.push_back({l, y_node_[1][l], out_ch_[1][l]});
    }
    return fuse_backward_sources(L, sources, x_master, dest_channels);
}

int NetBuilder::attach_combined(const BlockSpec& spec, int x_master, int N, int P) {
    const int fused = attach_backward_skips(spec.block_index, P, x_master, spec.in_channels);
    build_conv_block(NetworkRole::Master, spec, x_master, fused);
    attach_forward_skips(NetworkRole::Master, spec.block_index, N);
    return block_output(NetworkRole::Master, spec.block_index);
}

std::pair<Graph, ParamStore> NetBuilder::finish() {
    for (int L = 1; L <= num_blocks_; ++L) {
        graph_.master_block_output[L - 1] = y_node_[0][L];
        graph_.slave_block_output[L - 1] = y_node_[1][L];
    }
    validate_acyclic(graph_);
    infer_shapes(graph_, store_);
    return {std::move(graph_), std::move(store_)};
}

}  // namespace msnet
