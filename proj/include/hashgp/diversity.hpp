#ifndef HASHGP_DIVERSITY_HPP
#define HASHGP_DIVERSITY_HPP

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hashgp/expr.hpp"
#include "hashgp/hash.hpp"
#include "hashgp/parallel.hpp"

namespace hashgp {

/// Ascending-sorted copy of a hash sequence, duplicates preserved.
struct SortedHashes {
    std::vector<Hash> values;

    static SortedHashes of(HashSequence sequence)
    {
        std::sort(sequence.begin(), sequence.end());
        return SortedHashes{std::move(sequence)};
    }

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

namespace detail {

/// Multiset intersection size of two sorted ranges, linear two-pointer merge.
inline std::size_t count_intersect(std::span<const Hash> a, std::span<const Hash> b) noexcept
{
    std::size_t i = 0;
    std::size_t j = 0;
    std::size_t count = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (b[j] < a[i]) {
            ++j;
        } else {
            ++count;
            ++i;
            ++j;
        }
    }
    return count;
}

} // namespace detail

/// Sørensen-Dice similarity 2|A∩B| / (|A|+|B|) over hash multisets.
/// Two empty sequences are identical (1); one empty sequence shares nothing (0).
inline double dice_similarity(const SortedHashes& a, const SortedHashes& b) noexcept
{
    const std::size_t total = a.size() + b.size();
    if (total == 0) {
        return 1.0;
    }
    const std::size_t common = detail::count_intersect(a.values, b.values);
    return 2.0 * static_cast<double>(common) / static_cast<double>(total);
}

/// Structural distance between two trees: 1 - Dice similarity of their
/// sorted node hash sequences. 0 means isomorphic (up to hash collisions).
inline double tree_distance(const ExpressionTree& a, const ExpressionTree& b, HashMode mode,
                            Hash seed = kDefaultHashSeed)
{
    const SortedHashes ha = SortedHashes::of(hash_tree(a, mode, seed).hashes);
    const SortedHashes hb = SortedHashes::of(hash_tree(b, mode, seed).hashes);
    return 1.0 - dice_similarity(ha, hb);
}

/// Hashes each tree once and returns the per-tree sorted hash sequences.
inline std::vector<SortedHashes> sorted_hashes_of(std::span<const ExpressionTree> trees,
                                                  HashMode mode, Hash seed = kDefaultHashSeed,
                                                  unsigned threads = 1)
{
    std::vector<SortedHashes> out(trees.size());
    parallel_for(trees.size(), threads, [&](std::size_t i) {
        out[i] = SortedHashes::of(hash_tree(trees[i], mode, seed).hashes);
    });
    return out;
}

/// Symmetric pairwise distances over a population plus the per-individual
/// diversity score: the average distance to the rest of the population.
struct DistanceMatrix {
    std::size_t n{0};
    std::vector<double> entries;   // dense n*n, row-major
    std::vector<double> diversity; // length n

    [[nodiscard]] double at(std::size_t i, std::size_t j) const { return entries[i * n + j]; }

    [[nodiscard]] double average_diversity() const noexcept
    {
        if (diversity.empty()) {
            return 0.0;
        }
        double sum = 0.0;
        for (double d : diversity) {
            sum += d;
        }
        return sum / static_cast<double>(diversity.size());
    }

    /// Row-major CSV with a header row of individual indices.
    void to_csv(std::ostream& os) const
    {
        for (std::size_t j = 0; j < n; ++j) {
            os << (j ? "," : "") << j;
        }
        os << '\n';
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                os << (j ? "," : "") << format_double(at(i, j));
            }
            os << '\n';
        }
    }

    static std::string format_double(double v);
};

/// Pairwise step only: distances from precomputed sorted hash sequences.
inline DistanceMatrix distance_matrix(std::span<const SortedHashes> hashes,
                                      unsigned threads = 1)
{
    DistanceMatrix m;
    m.n = hashes.size();
    m.entries.assign(m.n * m.n, 0.0);
    m.diversity.assign(m.n, 0.0);
    parallel_for(m.n, threads, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < m.n; ++j) {
            const double d = 1.0 - dice_similarity(hashes[i], hashes[j]);
            m.entries[i * m.n + j] = d;
            m.entries[j * m.n + i] = d;
        }
    });
    if (m.n > 1) {
        for (std::size_t i = 0; i < m.n; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < m.n; ++j) {
                if (j != i) {
                    sum += m.entries[i * m.n + j];
                }
            }
            m.diversity[i] = sum / static_cast<double>(m.n - 1);
        }
    }
    return m;
}

/// Full three-step procedure: hash every tree exactly once, sort each
/// sequence, then fill all pairwise distances and the diversity vector.
inline DistanceMatrix distance_matrix(std::span<const ExpressionTree> trees, HashMode mode,
                                      Hash seed = kDefaultHashSeed, unsigned threads = 1)
{
    const std::vector<SortedHashes> hashes = sorted_hashes_of(trees, mode, seed, threads);
    return distance_matrix(std::span<const SortedHashes>(hashes), threads);
}

namespace detail {

/// Canonical s-expression of the subtree rooted at each node, commutative
/// children ordered lexicographically. Hash-free by construction.
inline void canonical_subtree_keys(const ExpressionTree& tree, HashMode mode,
                                   std::vector<std::string>& out)
{
    out.clear();
    out.reserve(tree.size());
    std::vector<std::string> stack;
    for (const Node& node : tree.nodes) {
        std::string key;
        switch (node.kind) {
        case NodeKind::Variable:
            key = "x" + std::to_string(node.variable_index);
            break;
        case NodeKind::Constant:
            if (mode == HashMode::Strict) {
                std::uint64_t bits;
                std::memcpy(&bits, &node.constant_value, sizeof(bits));
                key = "c" + std::to_string(bits);
            } else {
                key = "c";
            }
            break;
        default: {
            const int arity = node.arity();
            std::vector<std::string> args(static_cast<std::size_t>(arity));
            for (int a = arity - 1; a >= 0; --a) {
                args[static_cast<std::size_t>(a)] = std::move(stack.back());
                stack.pop_back();
            }
            if (is_commutative(node.kind)) {
                std::stable_sort(args.begin(), args.end());
            }
            key = "(" + std::string(kind_token(node.kind));
            for (const std::string& arg : args) {
                key += ' ';
                key += arg;
            }
            key += ')';
            break;
        }
        }
        out.push_back(key);
        stack.push_back(out.back());
    }
}

} // namespace detail

/// Reference distance that never touches hash values: canonicalizes both
/// trees by explicit recursive structural comparison, then computes the Dice
/// distance over the multisets of canonical subtree shapes. Quadratic-ish and
/// intended for tests and benchmarks only.
inline double bottom_up_distance_oracle(const ExpressionTree& a, const ExpressionTree& b,
                                        HashMode mode = HashMode::Strict)
{
    std::vector<std::string> ka;
    std::vector<std::string> kb;
    detail::canonical_subtree_keys(a, mode, ka);
    detail::canonical_subtree_keys(b, mode, kb);
    std::sort(ka.begin(), ka.end());
    std::sort(kb.begin(), kb.end());
    std::size_t i = 0;
    std::size_t j = 0;
    std::size_t common = 0;
    while (i < ka.size() && j < kb.size()) {
        const int cmp = ka[i].compare(kb[j]);
        if (cmp < 0) {
            ++i;
        } else if (cmp > 0) {
            ++j;
        } else {
            ++common;
            ++i;
            ++j;
        }
    }
    const std::size_t total = ka.size() + kb.size();
    if (total == 0) {
        return 0.0;
    }
    return 1.0 - 2.0 * static_cast<double>(common) / static_cast<double>(total);
}

} // namespace hashgp

#endif // HASHGP_DIVERSITY_HPP
