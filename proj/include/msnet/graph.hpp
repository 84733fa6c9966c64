#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msnet/ops.hpp"
#include "msnet/tensor.hpp"

namespace msnet {

enum class OpKind { Input, Conv2d, Maxpool, Upsample, Relu, Add, Dropout, Loss, Score };
enum class NetworkRole { Master, Slave, Shared };

const char* op_kind_name(OpKind k);
char role_letter(NetworkRole r);

enum class InitKind { HeNormal, Zero, Bilinear };

struct Node {
    int id = -1;
    OpKind op = OpKind::Input;
    std::string name;
    std::vector<int> inputs;  // ordered node ids, all smaller than id
    int param_slot = -1;
    NetworkRole role = NetworkRole::Shared;
    int block_index = 0;  // 0 = outside the downsampling blocks
    double dropout_rate = 0.0;
    // true on the backward-skip transform convs; the grad gate cuts the
    // gradient flowing through them into the Slave activations
    bool backward_skip_boundary = false;
    // filled by infer_shapes
    int out_c = 0, out_h = 0, out_w = 0;
};

struct ParamSlot {
    std::string name;  // matches the owning node's name
    NetworkRole role = NetworkRole::Shared;
    InitKind init = InitKind::HeNormal;
    bool frozen = false;
    bool is_skip_transform = false;  // W_l / U_l
    ConvParams params;
};

struct ParamStore {
    std::vector<ParamSlot> slots;
    std::vector<ConvParams> momentum;  // velocity buffers, shaped like slots

    void reset_momentum();
    std::size_t total_param_count() const;
};

struct Graph {
    std::vector<Node> nodes;
    int input_node = -1;
    int master_loss = -1;
    int slave_loss = -1;  // -1 for single-network variants
    int master_score = -1;
    int num_blocks = 0;
    int num_classes = 0;
    int input_channels = 0, input_h = 0, input_w = 0;
    // block output (y_L) node ids, index L-1; empty entries are -1
    std::vector<int> master_block_output;
    std::vector<int> slave_block_output;

    std::size_t edge_count() const;
    int find_node(const std::string& name) const;  // -1 when absent
};

struct ExecutionPlan {
    std::vector<int> order;  // node ids, a permutation of 0..n-1
    std::vector<int> rank;   // rank[id] = position in order
};

/// Returns the node ids of one cycle, or nullopt when the graph is acyclic.
std::optional<std::vector<int>> find_cycle(const Graph& g);

/// Throws CyclicGraph (carrying the cycle) when the graph has one.
void validate_acyclic(const Graph& g);

/// Deterministic dependency schedule. Among ready nodes the next one is the
/// minimum of (block index with head/input nodes last, Slave before Master,
/// node id), which interleaves the two networks block by block: each Master
/// block runs as soon as the Slave outputs its backward skips consume exist.
ExecutionPlan topo_schedule(const Graph& g);

/// Validates extents node by node at build time and records them on the
/// nodes. Add fusions with mismatched inputs are rejected here, not at run
/// time.
void infer_shapes(Graph& g, const ParamStore& store);

struct NodeRecord {
    Tensor4 value;
    std::vector<std::size_t> argmax;      // maxpool winners
    std::vector<std::uint8_t> drop_kept;  // dropout survivors
    Tensor4 xent_grad;                    // loss nodes: d(node loss)/d(logits)
    double scalar = 0.0;                  // loss nodes
};

struct ActivationTape {
    std::vector<NodeRecord> records;  // indexed by node id
    Mode mode = Mode::Eval;
    double master_loss = 0.0;
    double slave_loss = 0.0;
    bool all_pixels_ignored = false;
};

/// Evaluates every node in plan order. Dropout draws come from per-node
/// streams derived from (seed, node name, step), so a (graph, inputs, params,
/// seed, step, mode) tuple fully determines the tape.
ActivationTape forward(const Graph& g, const ExecutionPlan& plan, const Tensor4& image,
                       const LabelMap& labels, const ParamStore& store, Mode mode,
                       std::uint64_t seed, std::uint64_t step = 0);

struct LossWeights {
    double master = 1.0;
    double slave = 1.0;

    bool operator==(const LossWeights&) const = default;
};

enum class SkipGradGate { Open, Closed };

struct GradStore {
    std::vector<ConvParams> slots;  // shaped like the ParamStore, values are gradients
};

/// Reverse-mode sweep over the tape in reverse plan order. Gradients are of
/// loss_weights.master * master_loss + loss_weights.slave * slave_loss.
GradStore backward(const Graph& g, const ExecutionPlan& plan, const ActivationTape& tape,
                   const ParamStore& store, LossWeights weights,
                   SkipGradGate gate = SkipGradGate::Open);

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_slot;
    std::size_t worst_coord = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    std::size_t coords_checked = 0;
};

/// Central-difference verification of backward over a random subset of
/// parameter coordinates. Runs in eval mode (dropout off). eps must be > 0.
GradCheckReport grad_check(const Graph& g, const ExecutionPlan& plan, ParamStore& store,
                           const Tensor4& image, const LabelMap& labels, double eps,
                           std::size_t num_coords, std::uint64_t seed,
                           LossWeights weights = {}, SkipGradGate gate = SkipGradGate::Open);

}  // namespace msnet
