#ifndef HASHGP_EXPR_HPP
#define HASHGP_EXPR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hashgp {

/// Symbol set: four binary operators, five unary functions, two leaf kinds.
enum class NodeKind : std::uint8_t {
    Add,
    Sub,
    Mul,
    Div,
    Exp,
    Log,
    Sin,
    Cos,
    Square,
    Variable,
    Constant,
};

inline constexpr int kKindCount = 11;

constexpr int kind_arity(NodeKind k) noexcept
{
    switch (k) {
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div:
        return 2;
    case NodeKind::Exp:
    case NodeKind::Log:
    case NodeKind::Sin:
    case NodeKind::Cos:
    case NodeKind::Square:
        return 1;
    case NodeKind::Variable:
    case NodeKind::Constant:
        return 0;
    }
    return 0;
}

constexpr bool is_commutative(NodeKind k) noexcept
{
    return k == NodeKind::Add || k == NodeKind::Mul;
}

constexpr bool is_function(NodeKind k) noexcept { return kind_arity(k) > 0; }

constexpr std::string_view kind_token(NodeKind k) noexcept
{
    switch (k) {
    case NodeKind::Add: return "+";
    case NodeKind::Sub: return "-";
    case NodeKind::Mul: return "*";
    case NodeKind::Div: return "/";
    case NodeKind::Exp: return "exp";
    case NodeKind::Log: return "log";
    case NodeKind::Sin: return "sin";
    case NodeKind::Cos: return "cos";
    case NodeKind::Square: return "square";
    case NodeKind::Variable: return "var";
    case NodeKind::Constant: return "const";
    }
    return "?";
}

/// One tree node. `length` is the node count of the subtree rooted here,
/// itself included, so a leaf always has length 1.
struct Node {
    NodeKind kind{NodeKind::Constant};
    std::uint16_t variable_index{0};
    std::uint32_t length{1};
    double constant_value{0.0};

    [[nodiscard]] int arity() const noexcept { return kind_arity(kind); }
    [[nodiscard]] bool is_leaf() const noexcept { return arity() == 0; }

    static Node variable(std::uint16_t index) noexcept
    {
        Node n;
        n.kind = NodeKind::Variable;
        n.variable_index = index;
        return n;
    }

    static Node constant(double value) noexcept
    {
        Node n;
        n.kind = NodeKind::Constant;
        n.constant_value = value;
        return n;
    }

    static Node function(NodeKind kind, std::uint32_t length) noexcept
    {
        Node n;
        n.kind = kind;
        n.length = length;
        return n;
    }
};

/// Expression tree stored as a postorder node array. Children of a node
/// precede it; the subtree of the node at index i is the contiguous range
/// [i - length(i) + 1, i]; the last node is the root.
struct ExpressionTree {
    std::vector<Node> nodes;

    ExpressionTree() = default;
    explicit ExpressionTree(std::vector<Node> n) : nodes(std::move(n)) {}

    [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }
    [[nodiscard]] bool empty() const noexcept { return nodes.empty(); }
    [[nodiscard]] const Node& root() const { return nodes.back(); }
    [[nodiscard]] const Node& operator[](std::size_t i) const { return nodes[i]; }
    [[nodiscard]] Node& operator[](std::size_t i) { return nodes[i]; }

    static ExpressionTree leaf(Node n)
    {
        return ExpressionTree{std::vector<Node>{n}};
    }
};

/// Row-major view over a real matrix; does not own the data.
struct MatrixView {
    const double* data{nullptr};
    std::size_t rows{0};
    std::size_t cols{0};

    [[nodiscard]] double at(std::size_t r, std::size_t c) const
    {
        return data[r * cols + c];
    }
};

/// Owning row-major matrix.
struct Matrix {
    std::size_t rows{0};
    std::size_t cols{0};
    std::vector<double> values;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

    [[nodiscard]] double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    [[nodiscard]] double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    [[nodiscard]] MatrixView view() const { return MatrixView{values.data(), rows, cols}; }
};

/// First structural violation found in a tree, if any.
struct TreeDefect {
    std::size_t node_index{0};
    std::string message;
};

/// Checks every Node/ExpressionTree invariant in one linear pass.
/// Returns the first violation found, or nullopt when the tree is valid.
inline std::optional<TreeDefect> validate(const ExpressionTree& tree)
{
    if (tree.empty()) {
        return TreeDefect{0, "tree has no nodes"};
    }
    std::vector<std::uint64_t> stack;
    stack.reserve(16);
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const Node& node = tree.nodes[i];
        const int arity = node.arity();
        if (static_cast<std::size_t>(arity) > stack.size()) {
            return TreeDefect{i, "arity " + std::to_string(arity) + " but " +
                                     std::to_string(stack.size()) + " child" +
                                     (stack.size() == 1 ? "" : "ren") + " available"};
        }
        std::uint64_t children = 0;
        for (int a = 0; a < arity; ++a) {
            children += stack.back();
            stack.pop_back();
        }
        if (node.length != children + 1) {
            return TreeDefect{i, "length " + std::to_string(node.length) +
                                     " but children sum to " + std::to_string(children)};
        }
        stack.push_back(children + 1);
    }
    if (stack.size() != 1) {
        return TreeDefect{tree.size() - 1,
                          std::to_string(stack.size()) + " disconnected roots"};
    }
    if (tree.root().length != tree.size()) {
        return TreeDefect{tree.size() - 1, "root length does not cover the tree"};
    }
    return std::nullopt;
}

inline void require_valid(const ExpressionTree& tree, const char* who)
{
    if (auto defect = validate(tree)) {
        throw std::invalid_argument(std::string(who) + ": invalid tree at node " +
                                    std::to_string(defect->node_index) + ": " +
                                    defect->message);
    }
}

/// Subtree range of the node at `index`: [start, end] inclusive, end == index.
inline std::pair<std::size_t, std::size_t> subtree_bounds(const ExpressionTree& tree,
                                                          std::size_t index)
{
    if (index >= tree.size()) {
        throw std::out_of_range("subtree_bounds: node index " + std::to_string(index) +
                                " out of range for tree of size " +
                                std::to_string(tree.size()));
    }
    const std::size_t len = tree.nodes[index].length;
    return {index + 1 - len, index};
}

/// Indices of the children of the node at `index`, left to right.
inline void child_indices(const ExpressionTree& tree, std::size_t index,
                          std::size_t* out, int arity)
{
    std::size_t c = index - 1;
    for (int a = arity - 1; a >= 0; --a) {
        out[a] = c;
        c -= tree.nodes[c].length;
    }
}

/// Copy of the subtree rooted at `index` as a standalone tree.
inline ExpressionTree subtree(const ExpressionTree& tree, std::size_t index)
{
    auto [start, end] = subtree_bounds(tree, index);
    return ExpressionTree{std::vector<Node>(tree.nodes.begin() + static_cast<std::ptrdiff_t>(start),
                                            tree.nodes.begin() + static_cast<std::ptrdiff_t>(end) + 1)};
}

/// New tree with the subtree at `index` replaced by `replacement`.
/// Lengths of the enclosing ancestors are adjusted.
inline ExpressionTree replace_subtree(const ExpressionTree& tree, std::size_t index,
                                      const ExpressionTree& replacement)
{
    auto [start, end] = subtree_bounds(tree, index);
    const std::int64_t delta = static_cast<std::int64_t>(replacement.size()) -
                               static_cast<std::int64_t>(end - start + 1);
    std::vector<Node> out;
    out.reserve(tree.size() + static_cast<std::size_t>(std::max<std::int64_t>(delta, 0)));
    out.insert(out.end(), tree.nodes.begin(), tree.nodes.begin() + static_cast<std::ptrdiff_t>(start));
    out.insert(out.end(), replacement.nodes.begin(), replacement.nodes.end());
    for (std::size_t k = end + 1; k < tree.size(); ++k) {
        Node node = tree.nodes[k];
        const std::size_t k_start = k + 1 - node.length;
        if (k_start <= start) { // ancestor of the replaced node
            node.length = static_cast<std::uint32_t>(static_cast<std::int64_t>(node.length) + delta);
        }
        out.push_back(node);
    }
    return ExpressionTree{std::move(out)};
}

/// Level of every node; the root has level 1, its children level 2, and so on.
inline std::vector<std::uint32_t> node_levels(const ExpressionTree& tree)
{
    std::vector<std::uint32_t> levels(tree.size(), 0);
    if (tree.empty()) {
        return levels;
    }
    levels[tree.size() - 1] = 1;
    for (std::size_t ri = tree.size(); ri-- > 0;) {
        const Node& node = tree.nodes[ri];
        const int arity = node.arity();
        if (arity == 0) {
            continue;
        }
        std::size_t child = ri - 1;
        for (int a = 0; a < arity; ++a) {
            levels[child] = levels[ri] + 1;
            child -= tree.nodes[child].length;
        }
    }
    return levels;
}

/// Depth in levels: a single-node tree has depth 1.
inline std::size_t depth(const ExpressionTree& tree)
{
    std::size_t best = 0;
    for (std::uint32_t level : node_levels(tree)) {
        best = std::max<std::size_t>(best, level);
    }
    return best;
}

/// Scalar kernels shared by evaluation and constant folding. Arithmetic is
/// unprotected: division by zero, log of a non-positive value and exp
/// overflow produce IEEE non-finite values that propagate to the output.
inline double eval_unary(NodeKind kind, double x) noexcept
{
    switch (kind) {
    case NodeKind::Exp: return std::exp(x);
    case NodeKind::Log: return std::log(x);
    case NodeKind::Sin: return std::sin(x);
    case NodeKind::Cos: return std::cos(x);
    case NodeKind::Square: return x * x;
    default: return std::numeric_limits<double>::quiet_NaN();
    }
}

inline double eval_binary(NodeKind kind, double a, double b) noexcept
{
    switch (kind) {
    case NodeKind::Add: return a + b;
    case NodeKind::Sub: return a - b;
    case NodeKind::Mul: return a * b;
    case NodeKind::Div: return a / b;
    default: return std::numeric_limits<double>::quiet_NaN();
    }
}

/// Evaluates the tree over every row of `data`, one prediction per row.
/// Throws std::out_of_range if a Variable node references a missing column.
inline std::vector<double> evaluate(const ExpressionTree& tree, MatrixView data)
{
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const Node& node = tree.nodes[i];
        if (node.kind == NodeKind::Variable && node.variable_index >= data.cols) {
            throw std::out_of_range("evaluate: variable x" +
                                    std::to_string(node.variable_index) +
                                    " out of bounds for " + std::to_string(data.cols) +
                                    " columns");
        }
    }
    const std::size_t rows = data.rows;
    std::vector<std::vector<double>> stack;
    for (const Node& node : tree.nodes) {
        switch (node.kind) {
        case NodeKind::Variable: {
            std::vector<double> column(rows);
            for (std::size_t r = 0; r < rows; ++r) {
                column[r] = data.at(r, node.variable_index);
            }
            stack.push_back(std::move(column));
            break;
        }
        case NodeKind::Constant:
            stack.emplace_back(rows, node.constant_value);
            break;
        default:
            if (node.arity() == 1) {
                std::vector<double>& top = stack.back();
                for (std::size_t r = 0; r < rows; ++r) {
                    top[r] = eval_unary(node.kind, top[r]);
                }
            } else {
                std::vector<double>& lhs = stack[stack.size() - 2];
                const std::vector<double>& rhs = stack.back();
                for (std::size_t r = 0; r < rows; ++r) {
                    lhs[r] = eval_binary(node.kind, lhs[r], rhs[r]);
                }
                stack.pop_back();
            }
            break;
        }
    }
    return std::move(stack.back());
}

/// Evaluates the tree on a single input row.
inline double evaluate_row(const ExpressionTree& tree, const double* row, std::size_t cols)
{
    MatrixView view{row, 1, cols};
    return evaluate(tree, view)[0];
}

} // namespace hashgp

#endif // HASHGP_EXPR_HPP
