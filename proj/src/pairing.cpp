#include "orthostat/pairing.hpp"

#include <algorithm>
#include <map>

namespace orthostat {

Pairing::Pairing(std::vector<Pair> pairs) : pairs_(std::move(pairs)) {
    const int two_m = 2 * static_cast<int>(pairs_.size());
    std::vector<char> seen(two_m + 1, 0);
    for (auto& [a, b] : pairs_) {
        if (a > b) std::swap(a, b);
        if (a < 1 || b > two_m || a == b) throw std::domain_error("Pairing: indices out of range");
        if (seen[a] || seen[b]) throw std::domain_error("Pairing: repeated index");
        seen[a] = seen[b] = 1;
    }
    std::sort(pairs_.begin(), pairs_.end());
}

int Pairing::partner(int i) const {
    for (const auto& [a, b] : pairs_) {
        if (a == i) return b;
        if (b == i) return a;
    }
    throw std::domain_error("Pairing: index not covered");
}

CycleType::CycleType(std::vector<int> p) : parts(std::move(p)) {
    std::sort(parts.begin(), parts.end(), std::greater<int>());
    for (int x : parts)
        if (x < 1) throw std::domain_error("CycleType: parts must be positive");
}

int CycleType::m() const {
    int s = 0;
    for (int x : parts) s += x;
    return s;
}

namespace {

void enumerate_rec(std::vector<char>& used, int two_m, std::vector<Pairing::Pair>& acc,
                   std::vector<Pairing>& out) {
    int first = 0;
    for (int i = 1; i <= two_m; ++i) {
        if (!used[i]) { first = i; break; }
    }
    if (first == 0) {
        out.emplace_back(acc);
        return;
    }
    used[first] = 1;
    for (int j = first + 1; j <= two_m; ++j) {
        if (used[j]) continue;
        used[j] = 1;
        acc.emplace_back(first, j);
        enumerate_rec(used, two_m, acc, out);
        acc.pop_back();
        used[j] = 0;
    }
    used[first] = 0;
}

}  // namespace

std::vector<Pairing> enumerate_pairings(int m) {
    if (m < 1 || m > 6) throw std::domain_error("enumerate_pairings: m must be in [1,6]");
    std::vector<Pairing> out;
    std::vector<char> used(2 * m + 1, 0);
    std::vector<Pairing::Pair> acc;
    acc.reserve(m);
    enumerate_rec(used, 2 * m, acc, out);
    // matching the first free index keeps the recursion lexicographic already,
    // but sort anyway so the order is an explicit contract
    std::sort(out.begin(), out.end());
    return out;
}

CycleType coset_cycle_type(const Pairing& pi, const Pairing& tau) {
    if (pi.m() != tau.m()) throw std::domain_error("coset_cycle_type: mismatched sizes");
    const int two_m = 2 * pi.m();

    std::vector<int> perm(two_m + 1);
    for (int i = 1; i <= two_m; ++i) perm[i] = tau.partner(pi.partner(i));

    // cycles of tau o pi come in twins of equal length; one representative of
    // each twin contributes its length to the partition
    std::map<int, int> length_counts;
    std::vector<char> visited(two_m + 1, 0);
    for (int i = 1; i <= two_m; ++i) {
        if (visited[i]) continue;
        int len = 0;
        int j = i;
        do {
            visited[j] = 1;
            j = perm[j];
            ++len;
        } while (j != i);
        ++length_counts[len];
    }

    std::vector<int> parts;
    for (auto [len, count] : length_counts) {
        if (count % 2 != 0) throw std::logic_error("coset_cycle_type: cycles did not twin up");
        for (int c = 0; c < count / 2; ++c) parts.push_back(len);
    }
    return CycleType(std::move(parts));
}

}  // namespace orthostat
