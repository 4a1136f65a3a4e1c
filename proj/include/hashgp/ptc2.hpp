#ifndef HASHGP_PTC2_HPP
#define HASHGP_PTC2_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "hashgp/expr.hpp"

namespace hashgp {

using Rng = std::mt19937_64;

/// Symbol set with per-symbol selection weights, plus terminal parameters:
/// how many input variables exist and the range constants are drawn from.
struct Grammar {
    struct WeightedKind {
        NodeKind kind;
        double weight{1.0};
    };

    std::vector<WeightedKind> functions;
    std::vector<WeightedKind> terminals;
    std::size_t variable_count{1};
    double constant_min{-5.0};
    double constant_max{5.0};

    [[nodiscard]] int max_function_arity() const noexcept
    {
        int best = 0;
        for (const auto& f : functions) {
            best = std::max(best, kind_arity(f.kind));
        }
        return best;
    }

    /// The full operator set with uniform weights over `variable_count` inputs.
    static Grammar standard(std::size_t variable_count)
    {
        Grammar g;
        g.variable_count = variable_count;
        g.functions = {{NodeKind::Add, 1.0},    {NodeKind::Sub, 1.0}, {NodeKind::Mul, 1.0},
                       {NodeKind::Div, 1.0},    {NodeKind::Exp, 1.0}, {NodeKind::Log, 1.0},
                       {NodeKind::Sin, 1.0},    {NodeKind::Cos, 1.0}, {NodeKind::Square, 1.0}};
        g.terminals = {{NodeKind::Variable, 1.0}, {NodeKind::Constant, 1.0}};
        return g;
    }
};

namespace detail {

inline NodeKind pick_weighted(Rng& rng, const std::vector<Grammar::WeightedKind>& items)
{
    double total = 0.0;
    for (const auto& item : items) {
        total += item.weight;
    }
    double draw = std::uniform_real_distribution<double>(0.0, total)(rng);
    for (const auto& item : items) {
        draw -= item.weight;
        if (draw <= 0.0) {
            return item.kind;
        }
    }
    return items.back().kind;
}

inline Node draw_terminal(Rng& rng, const Grammar& grammar)
{
    const NodeKind kind = pick_weighted(rng, grammar.terminals);
    if (kind == NodeKind::Variable && grammar.variable_count > 0) {
        std::uniform_int_distribution<std::size_t> pick(0, grammar.variable_count - 1);
        return Node::variable(static_cast<std::uint16_t>(pick(rng)));
    }
    std::uniform_real_distribution<double> value(grammar.constant_min, grammar.constant_max);
    return Node::constant(value(rng));
}

/// Largest tree reachable within `max_depth` levels for the grammar's arities.
inline std::size_t max_tree_size(const Grammar& grammar, std::size_t max_depth)
{
    const int arity = grammar.max_function_arity();
    if (arity <= 0) {
        return max_depth >= 1 ? 1 : 0;
    }
    if (arity == 1) {
        return max_depth;
    }
    std::size_t size = 0;
    std::size_t level_nodes = 1;
    for (std::size_t level = 0; level < max_depth; ++level) {
        if (size > (1u << 30)) {
            return size; // saturates; any practical target fits
        }
        size += level_nodes;
        level_nodes *= static_cast<std::size_t>(arity);
    }
    return size;
}

struct BuilderNode {
    Node node;
    std::vector<std::uint32_t> children; // pool indices, left to right
};

inline void emit_postorder(const std::vector<BuilderNode>& pool, std::uint32_t index,
                           std::vector<Node>& out)
{
    const BuilderNode& bn = pool[index];
    std::uint32_t length = 1;
    for (std::uint32_t child : bn.children) {
        const std::size_t before = out.size();
        emit_postorder(pool, child, out);
        length += static_cast<std::uint32_t>(out.size() - before);
    }
    Node node = bn.node;
    node.length = length;
    out.push_back(node);
}

} // namespace detail

/// Probabilistic tree creation: grows a tree by expanding random open slots
/// until the node count reaches `target_length`, then closes the remaining
/// slots with terminals. The result has between target_length and
/// target_length + max_arity - 1 nodes and at most `max_depth` levels.
inline ExpressionTree ptc2(Rng& rng, const Grammar& grammar, std::size_t target_length,
                           std::size_t max_depth)
{
    if (target_length < 1) {
        throw std::invalid_argument("ptc2: target_length must be at least 1");
    }
    if (max_depth < 1) {
        throw std::invalid_argument("ptc2: max_depth must be at least 1");
    }
    if (grammar.terminals.empty()) {
        throw std::invalid_argument("ptc2: grammar has no terminal symbols");
    }
    if (target_length == 1) {
        return ExpressionTree::leaf(detail::draw_terminal(rng, grammar));
    }
    if (grammar.functions.empty()) {
        throw std::invalid_argument("ptc2: target_length > 1 needs function symbols");
    }
    if (target_length > detail::max_tree_size(grammar, max_depth)) {
        throw std::invalid_argument("ptc2: target_length " + std::to_string(target_length) +
                                    " unreachable within depth " + std::to_string(max_depth));
    }

    struct Slot {
        std::uint32_t parent;
        std::uint32_t position;
        std::uint32_t level;
    };

    // Depth limits and mixed arities can starve an attempt; retry a few times.
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<detail::BuilderNode> pool;
        std::vector<Slot> open;
        const NodeKind root_kind = detail::pick_weighted(rng, grammar.functions);
        pool.push_back({Node::function(root_kind, 1), {}});
        pool[0].children.resize(static_cast<std::size_t>(kind_arity(root_kind)), 0);
        for (std::uint32_t p = 0; p < pool[0].children.size(); ++p) {
            open.push_back({0, p, 2});
        }
        std::size_t size = 1;
        while (!open.empty() && size + open.size() < target_length) {
            std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
            const std::size_t chosen = pick(rng);
            const Slot slot = open[chosen];
            open[chosen] = open.back();
            open.pop_back();
            if (slot.level >= max_depth) {
                const auto index = static_cast<std::uint32_t>(pool.size());
                pool.push_back({detail::draw_terminal(rng, grammar), {}});
                pool[slot.parent].children[slot.position] = index;
                ++size;
                continue;
            }
            const NodeKind kind = detail::pick_weighted(rng, grammar.functions);
            const auto index = static_cast<std::uint32_t>(pool.size());
            pool.push_back({Node::function(kind, 1), {}});
            pool[index].children.resize(static_cast<std::size_t>(kind_arity(kind)), 0);
            pool[slot.parent].children[slot.position] = index;
            for (std::uint32_t p = 0; p < pool[index].children.size(); ++p) {
                open.push_back({index, p, slot.level + 1});
            }
            ++size;
        }
        for (const Slot& slot : open) {
            const auto index = static_cast<std::uint32_t>(pool.size());
            pool.push_back({detail::draw_terminal(rng, grammar), {}});
            pool[slot.parent].children[slot.position] = index;
            ++size;
        }
        if (size < target_length) {
            continue; // starved by the depth limit; try again
        }
        std::vector<Node> nodes;
        nodes.reserve(size);
        detail::emit_postorder(pool, 0, nodes);
        return ExpressionTree{std::move(nodes)};
    }
    throw std::runtime_error("ptc2: could not reach target_length " +
                             std::to_string(target_length) + " within depth " +
                             std::to_string(max_depth));
}

} // namespace hashgp

#endif // HASHGP_PTC2_HPP
