#ifndef HASHGP_HASH_HPP
#define HASHGP_HASH_HPP

#include <atomic>
#include <cstdint>
#include <cstring>
#include <vector>

#include "hashgp/expr.hpp"

namespace hashgp {

using Hash = std::uint64_t;

/// Seed for the node hash function. Changing it changes every hash value but
/// none of the isomorphism semantics.
inline constexpr Hash kDefaultHashSeed = 0x9e3779b97f4a7c15ULL;

namespace detail {

// XXH64, used as the non-cryptographic aggregation hash.
inline constexpr std::uint64_t kXxPrime1 = 0x9E3779B185EBCA87ULL;
inline constexpr std::uint64_t kXxPrime2 = 0xC2B2AE3D27D4EB4FULL;
inline constexpr std::uint64_t kXxPrime3 = 0x165667B19E3779F9ULL;
inline constexpr std::uint64_t kXxPrime4 = 0x85EBCA77C2B2AE63ULL;
inline constexpr std::uint64_t kXxPrime5 = 0x27D4EB2F165667C5ULL;

inline std::uint64_t rotl64(std::uint64_t x, int r) noexcept
{
    return (x << r) | (x >> (64 - r));
}

inline std::uint64_t read64(const unsigned char* p) noexcept
{
    std::uint64_t v;
    std::memcpy(&v, p, sizeof(v));
    return v;
}

inline std::uint32_t read32(const unsigned char* p) noexcept
{
    std::uint32_t v;
    std::memcpy(&v, p, sizeof(v));
    return v;
}

inline std::uint64_t xx_round(std::uint64_t acc, std::uint64_t input) noexcept
{
    acc += input * kXxPrime2;
    acc = rotl64(acc, 31);
    return acc * kXxPrime1;
}

inline std::uint64_t xx_merge_round(std::uint64_t acc, std::uint64_t val) noexcept
{
    acc ^= xx_round(0, val);
    return acc * kXxPrime1 + kXxPrime4;
}

} // namespace detail

inline Hash xxh64(const void* data, std::size_t len, Hash seed) noexcept
{
    using namespace detail;
    const auto* p = static_cast<const unsigned char*>(data);
    const unsigned char* end = p + len;
    std::uint64_t h;
    if (len >= 32) {
        std::uint64_t v1 = seed + kXxPrime1 + kXxPrime2;
        std::uint64_t v2 = seed + kXxPrime2;
        std::uint64_t v3 = seed;
        std::uint64_t v4 = seed - kXxPrime1;
        const unsigned char* limit = end - 32;
        do {
            v1 = xx_round(v1, read64(p));
            v2 = xx_round(v2, read64(p + 8));
            v3 = xx_round(v3, read64(p + 16));
            v4 = xx_round(v4, read64(p + 24));
            p += 32;
        } while (p <= limit);
        h = rotl64(v1, 1) + rotl64(v2, 7) + rotl64(v3, 12) + rotl64(v4, 18);
        h = xx_merge_round(h, v1);
        h = xx_merge_round(h, v2);
        h = xx_merge_round(h, v3);
        h = xx_merge_round(h, v4);
    } else {
        h = seed + kXxPrime5;
    }
    h += static_cast<std::uint64_t>(len);
    while (p + 8 <= end) {
        h ^= xx_round(0, read64(p));
        h = rotl64(h, 27) * kXxPrime1 + kXxPrime4;
        p += 8;
    }
    if (p + 4 <= end) {
        h ^= static_cast<std::uint64_t>(read32(p)) * kXxPrime1;
        h = rotl64(h, 23) * kXxPrime2 + kXxPrime3;
        p += 4;
    }
    while (p < end) {
        h ^= static_cast<std::uint64_t>(*p) * kXxPrime5;
        h = rotl64(h, 11) * kXxPrime1;
        ++p;
    }
    h ^= h >> 33;
    h *= kXxPrime2;
    h ^= h >> 29;
    h *= kXxPrime3;
    h ^= h >> 32;
    return h;
}

/// Strict hashing distinguishes constants by their exact bit pattern, so
/// structurally equal trees with different coefficients hash apart.
/// Structural hashing collapses every constant onto one value, so hashes
/// capture shape only.
enum class HashMode : std::uint8_t { Strict, Structural };

/// Per-node hash values aligned with the postorder positions of the
/// canonical tree they were computed from.
using HashSequence = std::vector<Hash>;

struct HashedTree {
    ExpressionTree tree;
    HashSequence hashes;
};

namespace detail {

inline std::atomic<std::uint64_t> g_hash_tree_calls{0};

inline Hash initial_node_hash(const Node& node, HashMode mode, Hash seed) noexcept
{
    unsigned char buffer[9];
    buffer[0] = static_cast<unsigned char>(node.kind);
    std::size_t len = 1;
    if (node.kind == NodeKind::Variable) {
        std::memcpy(buffer + 1, &node.variable_index, sizeof(node.variable_index));
        len += sizeof(node.variable_index);
    } else if (node.kind == NodeKind::Constant && mode == HashMode::Strict) {
        std::memcpy(buffer + 1, &node.constant_value, sizeof(node.constant_value));
        len += sizeof(node.constant_value);
    }
    return xxh64(buffer, len, seed);
}

} // namespace detail

/// Number of hash_tree invocations so far; used by tests and benchmarks to
/// confirm that population-wide operations hash each tree exactly once.
inline std::uint64_t hash_tree_invocations() noexcept
{
    return detail::g_hash_tree_calls.load(std::memory_order_relaxed);
}

inline void reset_hash_tree_invocations() noexcept
{
    detail::g_hash_tree_calls.store(0, std::memory_order_relaxed);
}

/// Bottom-up tree hashing. Children of commutative nodes are reordered into
/// ascending hash order (stable on ties), physically moving their subarrays;
/// each internal hash aggregates the sorted child hashes followed by the
/// node's own initial hash. Returns the canonical tree and the per-node hash
/// sequence aligned with it. The input tree is not modified.
inline HashedTree hash_tree(const ExpressionTree& input, HashMode mode,
                            Hash seed = kDefaultHashSeed)
{
    detail::g_hash_tree_calls.fetch_add(1, std::memory_order_relaxed);
    require_valid(input, "hash_tree");

    std::vector<Node> nodes = input.nodes;
    const std::size_t n = nodes.size();
    HashSequence hashes(n, 0);

    struct ChildRef {
        std::size_t start;
        std::size_t root;
        Hash hash;
    };
    std::vector<ChildRef> children;
    std::vector<Node> tmp_nodes;
    std::vector<Hash> tmp_hashes;

    for (std::size_t i = 0; i < n; ++i) {
        const Node& node = nodes[i];
        const Hash own = detail::initial_node_hash(node, mode, seed);
        const int arity = node.arity();
        if (arity == 0) {
            hashes[i] = own;
            continue;
        }

        children.clear();
        {
            std::size_t c = i - 1;
            for (int a = 0; a < arity; ++a) {
                const std::size_t len = nodes[c].length;
                children.push_back({c + 1 - len, c, hashes[c]});
                c -= len;
            }
        }
        std::reverse(children.begin(), children.end()); // left to right

        if (is_commutative(node.kind) && arity > 1) {
            bool sorted = true;
            for (std::size_t a = 1; a < children.size(); ++a) {
                if (children[a - 1].hash > children[a].hash) {
                    sorted = false;
                    break;
                }
            }
            if (!sorted) {
                std::stable_sort(children.begin(), children.end(),
                                 [](const ChildRef& a, const ChildRef& b) {
                                     return a.hash < b.hash;
                                 });
                const std::size_t region_start = i + 1 - nodes[i].length;
                // leaf-only children permute in place, larger subtrees move
                // through a temporary buffer
                bool all_leaves = true;
                for (const ChildRef& c : children) {
                    if (c.root != c.start) {
                        all_leaves = false;
                        break;
                    }
                }
                if (all_leaves) {
                    std::size_t at = region_start;
                    tmp_nodes.clear();
                    tmp_hashes.clear();
                    for (const ChildRef& c : children) {
                        tmp_nodes.push_back(nodes[c.root]);
                        tmp_hashes.push_back(hashes[c.root]);
                    }
                    for (std::size_t a = 0; a < children.size(); ++a, ++at) {
                        nodes[at] = tmp_nodes[a];
                        hashes[at] = tmp_hashes[a];
                    }
                } else {
                    tmp_nodes.clear();
                    tmp_hashes.clear();
                    for (const ChildRef& c : children) {
                        for (std::size_t k = c.start; k <= c.root; ++k) {
                            tmp_nodes.push_back(nodes[k]);
                            tmp_hashes.push_back(hashes[k]);
                        }
                    }
                    std::copy(tmp_nodes.begin(), tmp_nodes.end(),
                              nodes.begin() + static_cast<std::ptrdiff_t>(region_start));
                    std::copy(tmp_hashes.begin(), tmp_hashes.end(),
                              hashes.begin() + static_cast<std::ptrdiff_t>(region_start));
                }
            }
        }

        // aggregate sorted child hashes followed by the node's initial hash
        Hash buffer[8];
        std::size_t count = 0;
        {
            std::size_t c = i - 1;
            for (int a = 0; a < arity; ++a) {
                const std::size_t len = nodes[c].length;
                buffer[static_cast<std::size_t>(arity - 1 - a)] = hashes[c];
                c -= len;
                ++count;
            }
        }
        buffer[count++] = own;
        hashes[i] = xxh64(buffer, count * sizeof(Hash), seed);
    }

    return HashedTree{ExpressionTree{std::move(nodes)}, std::move(hashes)};
}

/// Hash of the whole expression: the root entry of hash_tree's sequence.
inline Hash root_hash(const ExpressionTree& tree, HashMode mode, Hash seed = kDefaultHashSeed)
{
    return hash_tree(tree, mode, seed).hashes.back();
}

} // namespace hashgp

#endif // HASHGP_HASH_HPP
