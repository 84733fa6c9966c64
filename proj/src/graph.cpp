#include "msnet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

#include "msnet/errors.hpp"
#include "msnet/train.hpp"

namespace msnet {

const char* op_kind_name(OpKind k) {
    switch (k) {
        case OpKind::Input: return "input";
        case OpKind::Conv2d: return "conv2d";
        case OpKind::Maxpool: return "maxpool";
        case OpKind::Upsample: return "upsample";
        case OpKind::Relu: return "relu";
        case OpKind::Add: return "add";
        case OpKind::Dropout: return "dropout";
        case OpKind::Loss: return "loss";
        case OpKind::Score: return "score";
    }
    return "?";
}

char role_letter(NetworkRole r) {
    switch (r) {
        case NetworkRole::Master: return 'M';
        case NetworkRole::Slave: return 'S';
        case NetworkRole::Shared: return 'X';
    }
    return '?';
}

void ParamStore::reset_momentum() {
    momentum.clear();
    momentum.reserve(slots.size());
    for (const auto& s : slots) momentum.push_back(s.params.shaped_zeros());
}

std::size_t ParamStore::total_param_count() const {
    std::size_t total = 0;
    for (const auto& s : slots) total += s.params.param_count();
    return total;
}

std::size_t Graph::edge_count() const {
    std::size_t e = 0;
    for (const auto& n : nodes) e += n.inputs.size();
    return e;
}

int Graph::find_node(const std::string& name) const {
    for (const auto& n : nodes)
        if (n.name == name) return n.id;
    return -1;
}

std::optional<std::vector<int>> find_cycle(const Graph& g) {
    // iterative DFS, colors: 0 unvisited, 1 on stack, 2 done
    const int n = static_cast<int>(g.nodes.size());
    std::vector<int> color(n, 0), parent(n, -1);
    std::vector<std::vector<int>> consumers(n);
    for (const auto& node : g.nodes)
        for (int in : node.inputs) consumers[in].push_back(node.id);

    for (int start = 0; start < n; ++start) {
        if (color[start] != 0) continue;
        std::vector<std::pair<int, std::size_t>> stack{{start, 0}};
        color[start] = 1;
        while (!stack.empty()) {
            auto& [u, next] = stack.back();
            if (next < consumers[u].size()) {
                const int v = consumers[u][next++];
                if (color[v] == 0) {
                    color[v] = 1;
                    parent[v] = u;
                    stack.emplace_back(v, 0);
                } else if (color[v] == 1) {
                    std::vector<int> cycle{v};
                    for (int w = u; w != v && w != -1; w = parent[w]) cycle.push_back(w);
                    std::reverse(cycle.begin(), cycle.end());
                    return cycle;
                }
            } else {
                color[u] = 2;
                stack.pop_back();
            }
        }
    }
    return std::nullopt;
}

void validate_acyclic(const Graph& g) {
    if (auto cycle = find_cycle(g))
        throw CyclicGraph("graph contains a cycle of " + std::to_string(cycle->size()) + " nodes",
                          *cycle);
}

ExecutionPlan topo_schedule(const Graph& g) {
    validate_acyclic(g);
    const int n = static_cast<int>(g.nodes.size());
    std::vector<int> indegree(n, 0);
    std::vector<std::vector<int>> consumers(n);
    for (const auto& node : g.nodes) {
        indegree[node.id] = static_cast<int>(node.inputs.size());
        for (int in : node.inputs) consumers[in].push_back(node.id);
    }

    auto role_rank = [](NetworkRole r) {
        switch (r) {
            case NetworkRole::Slave: return 0;
            case NetworkRole::Shared: return 1;
            case NetworkRole::Master: return 2;
        }
        return 3;
    };
    auto key = [&](int id) {
        const Node& node = g.nodes[id];
        const int block = node.block_index >= 1 ? node.block_index : g.num_blocks + 1;
        return std::tuple<int, int, int>(block, role_rank(node.role), id);
    };

    using Entry = std::tuple<int, int, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> ready;
    for (int id = 0; id < n; ++id)
        if (indegree[id] == 0) ready.push(key(id));

    ExecutionPlan plan;
    plan.order.reserve(n);
    plan.rank.assign(n, -1);
    while (!ready.empty()) {
        const int id = std::get<2>(ready.top());
        ready.pop();
        plan.rank[id] = static_cast<int>(plan.order.size());
        plan.order.push_back(id);
        for (int v : consumers[id])
            if (--indegree[v] == 0) ready.push(key(v));
    }
    return plan;
}

namespace {

const ConvParams& slot_params(const ParamStore& store, const Node& node) {
    if (node.param_slot < 0 || node.param_slot >= static_cast<int>(store.slots.size()))
        throw InvalidSpec("node " + node.name + " references missing param slot");
    return store.slots[node.param_slot].params;
}

[[noreturn]] void shape_error(const Node& node, const std::string& what) {
    throw ShapeMismatch("node " + std::to_string(node.id) + " (" + node.name + "): " + what);
}

}  // namespace

void infer_shapes(Graph& g, const ParamStore& store) {
    for (auto& node : g.nodes) {
        for (int in : node.inputs) {
            if (in < 0 || in >= node.id)
                throw InvalidSpec("node " + node.name + " has input id out of build order");
        }
        switch (node.op) {
            case OpKind::Input:
                node.out_c = g.input_channels;
                node.out_h = g.input_h;
                node.out_w = g.input_w;
                break;
            case OpKind::Conv2d: {
                const auto& p = slot_params(store, node);
                const Node& in = g.nodes[node.inputs.at(0)];
                if (in.out_c != p.in_channels) shape_error(node, "channel count mismatch");
                const int num_h = in.out_h + 2 * p.padding - p.kernel_h;
                const int num_w = in.out_w + 2 * p.padding - p.kernel_w;
                if (num_h < 0 || num_w < 0 || num_h % p.stride || num_w % p.stride)
                    shape_error(node, "conv extents do not divide");
                node.out_c = p.out_channels;
                node.out_h = num_h / p.stride + 1;
                node.out_w = num_w / p.stride + 1;
                break;
            }
            case OpKind::Upsample: {
                const auto& p = slot_params(store, node);
                const Node& in = g.nodes[node.inputs.at(0)];
                if (in.out_c != p.in_channels) shape_error(node, "channel count mismatch");
                node.out_c = p.out_channels;
                node.out_h = (in.out_h - 1) * p.stride - 2 * p.padding + p.kernel_h;
                node.out_w = (in.out_w - 1) * p.stride - 2 * p.padding + p.kernel_w;
                if (node.out_h < 1 || node.out_w < 1) shape_error(node, "upsample extents not positive");
                break;
            }
            case OpKind::Maxpool: {
                const Node& in = g.nodes[node.inputs.at(0)];
                if (in.out_h % 2 || in.out_w % 2) shape_error(node, "odd extents into maxpool");
                node.out_c = in.out_c;
                node.out_h = in.out_h / 2;
                node.out_w = in.out_w / 2;
                break;
            }
            case OpKind::Add: {
                const Node& a = g.nodes[node.inputs.at(0)];
                const Node& b = g.nodes[node.inputs.at(1)];
                if (a.out_c != b.out_c || a.out_h != b.out_h || a.out_w != b.out_w)
                    shape_error(node, "fused inputs have different extents");
                node.out_c = a.out_c;
                node.out_h = a.out_h;
                node.out_w = a.out_w;
                break;
            }
            case OpKind::Relu:
            case OpKind::Dropout:
            case OpKind::Score: {
                const Node& in = g.nodes[node.inputs.at(0)];
                node.out_c = in.out_c;
                node.out_h = in.out_h;
                node.out_w = in.out_w;
                break;
            }
            case OpKind::Loss: {
                const Node& in = g.nodes[node.inputs.at(0)];
                if (in.out_c != g.num_classes) shape_error(node, "loss input channels != num_classes");
                node.out_c = node.out_h = node.out_w = 1;
                break;
            }
        }
    }
}

ActivationTape forward(const Graph& g, const ExecutionPlan& plan, const Tensor4& image,
                       const LabelMap& labels, const ParamStore& store, Mode mode,
                       std::uint64_t seed, std::uint64_t step) {
    if (plan.order.size() != g.nodes.size())
        throw InvalidSpec("forward: plan does not cover the graph");
    if (image.c != g.input_channels || image.h != g.input_h || image.w != g.input_w)
        throw ShapeMismatch("forward: input image extents do not match the graph");

    ActivationTape tape;
    tape.mode = mode;
    tape.records.resize(g.nodes.size());

    for (int id : plan.order) {
        const Node& node = g.nodes[id];
        NodeRecord& rec = tape.records[id];
        try {
            switch (node.op) {
                case OpKind::Input:
                    rec.value = image;
                    break;
                case OpKind::Conv2d:
                    rec.value = conv2d(tape.records[node.inputs[0]].value, slot_params(store, node));
                    break;
                case OpKind::Upsample:
                    rec.value =
                        conv_transpose2d(tape.records[node.inputs[0]].value, slot_params(store, node));
                    break;
                case OpKind::Maxpool: {
                    auto r = maxpool2d(tape.records[node.inputs[0]].value);
                    rec.value = std::move(r.output);
                    rec.argmax = std::move(r.argmax);
                    break;
                }
                case OpKind::Relu:
                    rec.value = relu(tape.records[node.inputs[0]].value);
                    break;
                case OpKind::Add:
                    rec.value =
                        add(tape.records[node.inputs[0]].value, tape.records[node.inputs[1]].value);
                    break;
                case OpKind::Dropout: {
                    RngStream rng(seed, node.name + "#" + std::to_string(step));
                    auto r = dropout(tape.records[node.inputs[0]].value, node.dropout_rate, rng, mode);
                    rec.value = std::move(r.output);
                    rec.drop_kept = std::move(r.kept);
                    break;
                }
                case OpKind::Score:
                    rec.value = tape.records[node.inputs[0]].value;
                    break;
                case OpKind::Loss: {
                    auto r = masked_xent(tape.records[node.inputs[0]].value, labels);
                    rec.scalar = r.loss;
                    rec.xent_grad = std::move(r.grad_logits);
                    rec.value = Tensor4(1, 1, 1, 1);
                    rec.value.data[0] = r.loss;
                    if (r.all_ignored) tape.all_pixels_ignored = true;
                    if (id == g.master_loss) tape.master_loss = r.loss;
                    if (id == g.slave_loss) tape.slave_loss = r.loss;
                    break;
                }
            }
        } catch (const ShapeMismatch& e) {
            throw ShapeMismatch("at node " + std::to_string(id) + " (" + node.name + "): " + e.what());
        }
    }
    return tape;
}

GradStore backward(const Graph& g, const ExecutionPlan& plan, const ActivationTape& tape,
                   const ParamStore& store, LossWeights weights, SkipGradGate gate) {
    if (tape.records.size() != g.nodes.size())
        throw InvalidSpec("backward: tape does not cover the graph");

    GradStore grads;
    grads.slots.reserve(store.slots.size());
    for (const auto& s : store.slots) grads.slots.push_back(s.params.shaped_zeros());

    std::vector<Tensor4> node_grad(g.nodes.size());
    for (const auto& node : g.nodes)
        node_grad[node.id] = Tensor4::zeros_like(tape.records[node.id].value);

    for (auto it = plan.order.rbegin(); it != plan.order.rend(); ++it) {
        const Node& node = g.nodes[*it];
        const NodeRecord& rec = tape.records[node.id];
        switch (node.op) {
            case OpKind::Loss: {
                double w = 0.0;
                if (node.id == g.master_loss) w = weights.master;
                if (node.id == g.slave_loss) w = weights.slave;
                if (w == 0.0) break;
                Tensor4& gin = node_grad[node.inputs[0]];
                for (std::size_t e = 0; e < gin.data.size(); ++e)
                    gin.data[e] += w * rec.xent_grad.data[e];
                break;
            }
            case OpKind::Score: {
                Tensor4& gin = node_grad[node.inputs[0]];
                const Tensor4& go = node_grad[node.id];
                for (std::size_t e = 0; e < gin.data.size(); ++e) gin.data[e] += go.data[e];
                break;
            }
            case OpKind::Conv2d: {
                const auto& p = slot_params(store, node);
                auto gr = conv2d_grad(tape.records[node.inputs[0]].value, p, node_grad[node.id]);
                auto& slot_grad = grads.slots[node.param_slot];
                for (std::size_t k = 0; k < gr.weights.size(); ++k) slot_grad.weights[k] += gr.weights[k];
                for (std::size_t k = 0; k < gr.bias.size(); ++k) slot_grad.bias[k] += gr.bias[k];
                const bool cut = node.backward_skip_boundary && gate == SkipGradGate::Closed;
                if (!cut) {
                    Tensor4& gin = node_grad[node.inputs[0]];
                    for (std::size_t e = 0; e < gin.data.size(); ++e) gin.data[e] += gr.input.data[e];
                }
                break;
            }
            case OpKind::Upsample: {
                const auto& p = slot_params(store, node);
                auto gr = conv_transpose2d_grad(tape.records[node.inputs[0]].value, p,
                                                node_grad[node.id]);
                auto& slot_grad = grads.slots[node.param_slot];
                for (std::size_t k = 0; k < gr.weights.size(); ++k) slot_grad.weights[k] += gr.weights[k];
                for (std::size_t k = 0; k < gr.bias.size(); ++k) slot_grad.bias[k] += gr.bias[k];
                Tensor4& gin = node_grad[node.inputs[0]];
                for (std::size_t e = 0; e < gin.data.size(); ++e) gin.data[e] += gr.input.data[e];
                break;
            }
            case OpKind::Maxpool: {
                const Tensor4& in_value = tape.records[node.inputs[0]].value;
                MaxpoolResult fwd;
                fwd.output = rec.value;  // extents only; values unused by the adjoint
                fwd.argmax = rec.argmax;
                Tensor4 gr = maxpool2d_grad(fwd, node_grad[node.id], in_value.n, in_value.c,
                                            in_value.h, in_value.w);
                Tensor4& gin = node_grad[node.inputs[0]];
                for (std::size_t e = 0; e < gin.data.size(); ++e) gin.data[e] += gr.data[e];
                break;
            }
            case OpKind::Relu: {
                Tensor4 gr = relu_grad(tape.records[node.inputs[0]].value, node_grad[node.id]);
                Tensor4& gin = node_grad[node.inputs[0]];
                for (std::size_t e = 0; e < gin.data.size(); ++e) gin.data[e] += gr.data[e];
                break;
            }
            case OpKind::Add: {
                const Tensor4& go = node_grad[node.id];
                for (int port = 0; port < 2; ++port) {
                    Tensor4& gin = node_grad[node.inputs[port]];
                    for (std::size_t e = 0; e < gin.data.size(); ++e) gin.data[e] += go.data[e];
                }
                break;
            }
            case OpKind::Dropout: {
                DropoutResult fwd;
                fwd.output = rec.value;
                fwd.kept = rec.drop_kept;
                Tensor4 gr = dropout_grad(fwd, node.dropout_rate, node_grad[node.id]);
                Tensor4& gin = node_grad[node.inputs[0]];
                for (std::size_t e = 0; e < gin.data.size(); ++e) gin.data[e] += gr.data[e];
                break;
            }
            case OpKind::Input:
                break;
        }
    }
    return grads;
}

GradCheckReport grad_check(const Graph& g, const ExecutionPlan& plan, ParamStore& store,
                           const Tensor4& image, const LabelMap& labels, double eps,
                           std::size_t num_coords, std::uint64_t seed, LossWeights weights,
                           SkipGradGate gate) {
    if (eps <= 0.0) throw InvalidArgument("grad_check: eps must be > 0");
    if (num_coords == 0) throw InvalidArgument("grad_check: need at least one coordinate");

    auto total_loss = [&]() {
        const ActivationTape t = forward(g, plan, image, labels, store, Mode::Eval, seed);
        const double loss = weights.master * t.master_loss + weights.slave * t.slave_loss;
        if (!std::isfinite(loss)) throw NonFinite("grad_check: perturbed loss is not finite");
        return loss;
    };

    const ActivationTape tape = forward(g, plan, image, labels, store, Mode::Eval, seed);
    const GradStore analytic = backward(g, plan, tape, store, weights, gate);

    const std::size_t total = store.total_param_count();
    if (total == 0) throw InvalidSpec("grad_check: model has no parameters");

    RngStream rng(seed, "gradcheck");
    GradCheckReport report;
    report.coords_checked = num_coords;
    for (std::size_t i = 0; i < num_coords; ++i) {
        std::size_t flat = rng.next_below(total);
        std::size_t slot_idx = 0;
        while (flat >= store.slots[slot_idx].params.param_count()) {
            flat -= store.slots[slot_idx].params.param_count();
            ++slot_idx;
        }
        ConvParams& p = store.slots[slot_idx].params;
        const bool is_weight = flat < p.weights.size();
        double& coord = is_weight ? p.weights[flat] : p.bias[flat - p.weights.size()];
        const ConvParams& ag = analytic.slots[slot_idx];
        const double a = is_weight ? ag.weights[flat] : ag.bias[flat - ag.weights.size()];

        const double saved = coord;
        auto central_diff = [&](double step) {
            coord = saved + step;
            const double loss_plus = total_loss();
            coord = saved - step;
            const double loss_minus = total_loss();
            coord = saved;
            return (loss_plus - loss_minus) / (2.0 * step);
        };
        auto rel_error = [&](double fd) {
            return std::abs(fd - a) / std::max({std::abs(fd), std::abs(a), 1e-3});
        };

        double fd = central_diff(eps);
        double rel = rel_error(fd);
        // A ReLU or maxpool kink inside [coord-eps, coord+eps] invalidates the
        // coarse estimate; shrinking the interval removes it, while a wrong
        // adjoint disagrees at every scale.
        for (double shrink : {8.0, 64.0}) {
            if (rel <= 1e-5) break;
            const double fd_fine = central_diff(eps / shrink);
            if (rel_error(fd_fine) < rel) {
                fd = fd_fine;
                rel = rel_error(fd_fine);
            }
        }
        if (rel > report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_slot = store.slots[slot_idx].name;
            report.worst_coord = flat;
            report.worst_analytic = a;
            report.worst_numeric = fd;
        }
    }
    return report;
}

}  // namespace msnet
