#ifndef HASHGP_INFIX_HPP
#define HASHGP_INFIX_HPP

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <vector>

#include "hashgp/expr.hpp"

namespace hashgp {

struct ParseError : std::runtime_error {
    std::size_t offset;

    ParseError(std::size_t at, const std::string& what_)
        : std::runtime_error("parse error at offset " + std::to_string(at) + ": " + what_),
          offset(at)
    {
    }
};

/// Shortest decimal form that round-trips exactly through from_chars.
inline std::string format_constant(double value)
{
    char buffer[32];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    (void)ec;
    return std::string(buffer, ptr);
}

inline std::string default_variable_name(std::size_t index)
{
    return "x" + std::to_string(index);
}

/// Infix rendering. Binary operations are fully parenthesized, unary
/// functions print as name(arg), constants in round-trip-exact decimal.
inline std::string to_infix(const ExpressionTree& tree,
                            const std::vector<std::string>& variable_names = {})
{
    std::vector<std::string> stack;
    for (const Node& node : tree.nodes) {
        switch (node.kind) {
        case NodeKind::Constant:
            stack.push_back(format_constant(node.constant_value));
            break;
        case NodeKind::Variable:
            if (node.variable_index < variable_names.size()) {
                stack.push_back(variable_names[node.variable_index]);
            } else {
                stack.push_back(default_variable_name(node.variable_index));
            }
            break;
        default:
            if (node.arity() == 1) {
                std::string arg = std::move(stack.back());
                stack.pop_back();
                stack.push_back(std::string(kind_token(node.kind)) + "(" + arg + ")");
            } else {
                std::string rhs = std::move(stack.back());
                stack.pop_back();
                std::string lhs = std::move(stack.back());
                stack.pop_back();
                stack.push_back("(" + lhs + " " + std::string(kind_token(node.kind)) + " " +
                                rhs + ")");
            }
            break;
        }
    }
    if (stack.size() != 1) {
        throw std::invalid_argument("to_infix: malformed tree");
    }
    return stack.back();
}

namespace detail {

inline bool is_ident_start(char c) noexcept
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

inline bool is_ident_char(char c) noexcept
{
    return is_ident_start(c) || (c >= '0' && c <= '9');
}

inline bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

inline NodeKind unary_kind_by_name(std::string_view name)
{
    if (name == "exp") return NodeKind::Exp;
    if (name == "log") return NodeKind::Log;
    if (name == "sin") return NodeKind::Sin;
    if (name == "cos") return NodeKind::Cos;
    if (name == "square") return NodeKind::Square;
    return NodeKind::Variable; // sentinel: not a function
}

inline bool is_function_name(std::string_view name)
{
    return unary_kind_by_name(name) != NodeKind::Variable;
}

/// Recursive-descent infix parser emitting postorder directly.
class InfixParser {
public:
    InfixParser(std::string_view text, const std::vector<std::string>& names)
        : text_(text)
    {
        for (std::size_t i = 0; i < names.size(); ++i) {
            index_of_[names[i]] = static_cast<std::uint16_t>(i);
        }
    }

    ExpressionTree parse()
    {
        std::vector<Node> nodes;
        parse_sum(nodes);
        skip_space();
        if (pos_ != text_.size()) {
            throw ParseError(pos_, "unexpected trailing input");
        }
        return ExpressionTree{std::move(nodes)};
    }

private:
    void skip_space()
    {
        while (pos_ < text_.size() &&
               (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                text_[pos_] == '\r')) {
            ++pos_;
        }
    }

    [[nodiscard]] char peek()
    {
        skip_space();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    void parse_sum(std::vector<Node>& nodes)
    {
        const std::size_t before = nodes.size();
        parse_product(nodes);
        while (true) {
            const char c = peek();
            if (c != '+' && c != '-') {
                break;
            }
            ++pos_;
            parse_product(nodes);
            const std::size_t total = nodes.size() - before;
            nodes.push_back(Node::function(c == '+' ? NodeKind::Add : NodeKind::Sub,
                                           static_cast<std::uint32_t>(total) + 1));
        }
    }

    void parse_product(std::vector<Node>& nodes)
    {
        const std::size_t before = nodes.size();
        parse_power(nodes);
        while (true) {
            const char c = peek();
            if (c != '*' && c != '/') {
                break;
            }
            ++pos_;
            parse_power(nodes);
            const std::size_t total = nodes.size() - before;
            nodes.push_back(Node::function(c == '*' ? NodeKind::Mul : NodeKind::Div,
                                           static_cast<std::uint32_t>(total) + 1));
        }
    }

    // '^' with a literal integer exponent is accepted as input sugar and
    // expanded into square/multiply chains; the printer never emits it.
    void parse_power(std::vector<Node>& nodes)
    {
        const std::size_t before = nodes.size();
        parse_unary(nodes);
        if (peek() != '^') {
            return;
        }
        ++pos_;
        skip_space();
        bool negative = false;
        if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
            negative = text_[pos_] == '-';
            ++pos_;
        }
        const std::size_t digits_at = pos_;
        long exponent = 0;
        while (pos_ < text_.size() && is_digit(text_[pos_])) {
            exponent = exponent * 10 + (text_[pos_] - '0');
            ++pos_;
            if (exponent > 64) {
                throw ParseError(digits_at, "exponent too large");
            }
        }
        if (pos_ == digits_at) {
            throw ParseError(pos_, "expected integer exponent after '^'");
        }
        if (exponent == 0) {
            throw ParseError(digits_at, "zero exponent is not supported");
        }
        ExpressionTree base{std::vector<Node>(nodes.begin() + static_cast<std::ptrdiff_t>(before),
                                              nodes.end())};
        nodes.resize(before);
        ExpressionTree powered = integer_power(base, exponent);
        if (negative) {
            nodes.push_back(Node::constant(1.0));
            nodes.insert(nodes.end(), powered.nodes.begin(), powered.nodes.end());
            nodes.push_back(Node::function(NodeKind::Div,
                                           static_cast<std::uint32_t>(powered.size()) + 2));
        } else {
            nodes.insert(nodes.end(), powered.nodes.begin(), powered.nodes.end());
        }
    }

    static ExpressionTree integer_power(const ExpressionTree& base, long exponent)
    {
        if (exponent == 1) {
            return base;
        }
        if (exponent % 2 == 0) {
            ExpressionTree half = integer_power(base, exponent / 2);
            half.nodes.push_back(Node::function(NodeKind::Square,
                                                static_cast<std::uint32_t>(half.size()) + 1));
            return half;
        }
        ExpressionTree rest = integer_power(base, exponent - 1);
        ExpressionTree out = base;
        out.nodes.insert(out.nodes.end(), rest.nodes.begin(), rest.nodes.end());
        out.nodes.push_back(Node::function(NodeKind::Mul,
                                           static_cast<std::uint32_t>(out.size()) + 1));
        return out;
    }

    void parse_unary(std::vector<Node>& nodes)
    {
        if (peek() == '-') {
            ++pos_;
            const std::size_t before = nodes.size();
            parse_unary(nodes);
            if (nodes.size() == before + 1 && nodes.back().kind == NodeKind::Constant) {
                nodes.back().constant_value = -nodes.back().constant_value;
            } else {
                // no dedicated negation node: -e is (0 - e)
                const std::size_t operand_len = nodes.size() - before;
                nodes.insert(nodes.begin() + static_cast<std::ptrdiff_t>(before),
                             Node::constant(0.0));
                nodes.push_back(Node::function(NodeKind::Sub,
                                               static_cast<std::uint32_t>(operand_len) + 2));
            }
            return;
        }
        parse_primary(nodes);
    }

    void parse_primary(std::vector<Node>& nodes)
    {
        const char c = peek();
        if (c == '\0') {
            throw ParseError(pos_, "expected expression");
        }
        if (c == '(') {
            ++pos_;
            parse_sum(nodes);
            expect(')');
            return;
        }
        if (is_digit(c) || c == '.') {
            parse_number(nodes);
            return;
        }
        if (is_ident_start(c)) {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && is_ident_char(text_[pos_])) {
                ++pos_;
            }
            const std::string_view name = text_.substr(start, pos_ - start);
            if (is_function_name(name)) {
                expect('(');
                const std::size_t before = nodes.size();
                parse_sum(nodes);
                expect(')');
                nodes.push_back(Node::function(
                    unary_kind_by_name(name),
                    static_cast<std::uint32_t>(nodes.size() - before) + 1));
                return;
            }
            auto it = index_of_.find(std::string(name));
            if (it == index_of_.end()) {
                throw ParseError(start, "unknown variable '" + std::string(name) + "'");
            }
            nodes.push_back(Node::variable(it->second));
            return;
        }
        throw ParseError(pos_, std::string("unexpected character '") + c + "'");
    }

    void parse_number(std::vector<Node>& nodes)
    {
        double value = 0.0;
        const char* begin = text_.data() + pos_;
        const char* end = text_.data() + text_.size();
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc{} || ptr == begin) {
            throw ParseError(pos_, "malformed number");
        }
        pos_ += static_cast<std::size_t>(ptr - begin);
        nodes.push_back(Node::constant(value));
    }

    void expect(char c)
    {
        if (peek() != c) {
            throw ParseError(pos_, std::string("expected '") + c + "'");
        }
        ++pos_;
    }

    std::string_view text_;
    std::size_t pos_{0};
    std::unordered_map<std::string, std::uint16_t> index_of_;
};

} // namespace detail

/// Parses an infix expression over the given variable names (name at index i
/// maps to column i). Throws ParseError with the failing offset.
inline ExpressionTree parse_infix(std::string_view text,
                                  const std::vector<std::string>& variable_names)
{
    detail::InfixParser parser(text, variable_names);
    ExpressionTree tree = parser.parse();
    require_valid(tree, "parse_infix");
    return tree;
}

/// Collects variable names from an expression text: every identifier that is
/// not a function name. If all identifiers look like x<k>, names are laid out
/// so that x<k> maps to column k; otherwise first-appearance order is used.
inline std::vector<std::string> scan_variable_names(std::string_view text)
{
    std::vector<std::string> seen;
    for (std::size_t i = 0; i < text.size();) {
        if (detail::is_ident_start(text[i])) {
            std::size_t start = i;
            while (i < text.size() && detail::is_ident_char(text[i])) {
                ++i;
            }
            std::string name(text.substr(start, i - start));
            if (!detail::is_function_name(name) &&
                std::find(seen.begin(), seen.end(), name) == seen.end()) {
                seen.push_back(std::move(name));
            }
        } else {
            ++i;
        }
    }
    bool all_canonical = !seen.empty();
    std::size_t max_index = 0;
    for (const std::string& name : seen) {
        if (name.size() < 2 || name[0] != 'x') {
            all_canonical = false;
            break;
        }
        std::size_t index = 0;
        auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
        if (ec != std::errc{} || ptr != name.data() + name.size()) {
            all_canonical = false;
            break;
        }
        max_index = std::max(max_index, index);
    }
    if (all_canonical) {
        std::vector<std::string> names;
        names.reserve(max_index + 1);
        for (std::size_t i = 0; i <= max_index; ++i) {
            names.push_back(default_variable_name(i));
        }
        return names;
    }
    return seen;
}

} // namespace hashgp

#endif // HASHGP_INFIX_HPP
