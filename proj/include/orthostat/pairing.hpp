#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace orthostat {

/// Perfect matching of {1,...,2m}, stored canonically: the smaller index first
/// within each pair, pairs sorted by first element. Canonical form makes
/// equality structural and the enumeration order reproducible.
class Pairing {
public:
    using Pair = std::pair<int, int>;

    explicit Pairing(std::vector<Pair> pairs);

    int m() const { return static_cast<int>(pairs_.size()); }
    const std::vector<Pair>& pairs() const { return pairs_; }

    /// Image of index i (1-based) under the pairing viewed as a fixed-point-free
    /// involution.
    int partner(int i) const;

    bool operator==(const Pairing& other) const { return pairs_ == other.pairs_; }
    bool operator!=(const Pairing& other) const { return !(*this == other); }
    bool operator<(const Pairing& other) const { return pairs_ < other.pairs_; }

private:
    std::vector<Pair> pairs_;
};

/// Weakly decreasing partition of m, as produced by composing two pairings.
struct CycleType {
    std::vector<int> parts;

    explicit CycleType(std::vector<int> p);

    int m() const;
    bool operator==(const CycleType& other) const { return parts == other.parts; }
    bool operator!=(const CycleType& other) const { return !(*this == other); }
};

/// All (2m-1)!! pairings of {1,...,2m} in lexicographic order of their
/// canonical pair lists. Supported for 1 <= m <= 6.
std::vector<Pairing> enumerate_pairings(int m);

/// Cycle type of the composition of two pairings on the same ground set.
/// Viewed as involutions, tau o pi decomposes into cycles of even total count;
/// the cycles come in twins of equal length, and the multiset of lengths of
/// one twin from each pair forms a partition of m.
CycleType coset_cycle_type(const Pairing& pi, const Pairing& tau);

}  // namespace orthostat
