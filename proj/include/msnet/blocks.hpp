#pragma once

#include <string>
#include <vector>

#include "msnet/graph.hpp"

namespace msnet {

struct BlockSpec {
    int block_index = 1;
    int conv_count = 2;  // 2 or 3
    int in_channels = 1;
    int out_channels = 1;
    int kernel_size = 3;
    bool has_dropout = false;
    double dropout_rate = 0.0;

    void validate() const;
};

enum class SkipDirection { Forward, Backward };

/// Bookkeeping for one attached skip: the 1x1 transform slot plus the
/// resampler chain that rematches spatial extents before the fusing add.
struct SkipSpec {
    int source_block = 0;
    int dest_block = 0;
    SkipDirection direction = SkipDirection::Forward;
    int transform_slot = -1;
    int resampler_depth = 0;  // 2x pool (forward) or 2x upsample (backward) stages
};

/// Incremental constructor for the two-network graphs. Tracks the block input
/// (x_L) and output (y_L) nodes per role so skip attachments can reference
/// block boundaries, and creates one fresh parameter slot per conv/upsample
/// node.
class NetBuilder {
public:
    NetBuilder(int num_blocks, int pool_stages, int num_classes, int in_c, int in_h, int in_w);

    int input_node() const { return input_; }

    // Raw node constructors.
    int add_conv(const std::string& name, NetworkRole role, int block, int input, int in_c,
                 int out_c, int kernel, InitKind init, bool skip_transform = false,
                 bool backward_boundary = false);
    int add_upsample(const std::string& name, NetworkRole role, int block, int input, int channels,
                     int factor, bool frozen);
    int add_relu(const std::string& name, NetworkRole role, int block, int input);
    int add_maxpool(const std::string& name, NetworkRole role, int block, int input);
    int add_add(const std::string& name, NetworkRole role, int block, int a, int b);
    int add_dropout(const std::string& name, NetworkRole role, int block, int input, double rate);
    int add_score(const std::string& name, int input);
    int add_loss(const std::string& name, NetworkRole role, int input);

    /// conv_count x (conv -> relu) chain; when has_dropout each of the last
    /// two convs is followed by a dropout node. Registers x_node as the block
    /// input port x_L; the chain consumes chain_input when given (backward
    /// fusion feeds F's argument), x_node otherwise. Returns y_L.
    int build_conv_block(NetworkRole role, const BlockSpec& spec, int x_node, int chain_input = -1);

    /// Rewrites y_L to F(...) + sum over the last N block inputs of a 1x1
    /// transform plus a 2x-pool chain per pooling stage crossed. Requires
    /// 1 <= N <= L and an already-built block L.
    void attach_forward_skips(NetworkRole role, int L, int N);

    struct BackwardSource {
        int block = 0;
        int node = -1;
        int channels = 0;
    };

    /// Returns the fused Master block input x_L + sum of transformed Slave
    /// outputs y_l for l in [L, min(L+P-1, num_blocks)], upsampled across
    /// crossed pooling stages. Call before building Master block L.
    int attach_backward_skips(int L, int P, int x_master, int dest_channels);

    /// Low-level form of attach_backward_skips with explicit sources.
    /// Rejects Master-role sources (they would close a cycle).
    int fuse_backward_sources(int L, const std::vector<BackwardSource>& sources, int x_master,
                              int dest_channels);

    /// Combined attachment for one Master block: backward fusion inside F's
    /// argument, then N forward skips on its output. All slots independent.
    int attach_combined(const BlockSpec& spec, int x_master, int N, int P);

    // x_L / y_L node ids per role (1-based block index).
    int block_input(NetworkRole role, int L) const;
    int block_output(NetworkRole role, int L) const;
    void set_block_input(NetworkRole role, int L, int node);
    int block_channels_in(NetworkRole role, int L) const;
    int block_channels_out(NetworkRole role, int L) const;

    const std::vector<SkipSpec>& skips() const { return skips_; }
    int pool_stages() const { return pool_stages_; }
    int num_blocks() const { return num_blocks_; }

    /// Pooling stages crossed between block boundaries [from, to).
    int pools_between(int from, int to) const;

    Graph& graph() { return graph_; }
    ParamStore& store() { return store_; }

    /// Runs build-time shape validation and moves the result out.
    std::pair<Graph, ParamStore> finish();

private:
    int add_node(OpKind op, const std::string& name, NetworkRole role, int block,
                 std::vector<int> inputs);
    std::string role_prefix(NetworkRole role) const;

    Graph graph_;
    ParamStore store_;
    int input_ = -1;
    int num_blocks_ = 0;
    int pool_stages_ = 0;
    std::vector<SkipSpec> skips_;
    // per role (0 = Master, 1 = Slave), 1-based block index
    std::vector<int> x_node_[2], y_node_[2];
    std::vector<int> in_ch_[2], out_ch_[2];
};

}  // namespace msnet
