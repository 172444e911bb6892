#include "pbox/matroid.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pbox {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

std::vector<int> mask_to_set(std::uint64_t mask, int n) {
    std::vector<int> out;
    for (int i = 0; i < n; ++i)
        if (mask >> i & 1U) out.push_back(i);
    return out;
}

// Indices of `members` sorted by weight, heaviest first (ties by id).
std::vector<int> by_weight_desc(std::vector<int> members, std::span<const double> w) {
    std::stable_sort(members.begin(), members.end(),
                     [&](int a, int b) { return w[a] > w[b]; });
    return members;
}

// argmax_A  w(A) - lambda * r(A)  for uniform and partition matroids.
std::pair<std::vector<int>, double> best_weighted_set(const MatroidOracle& m,
                                                      std::span<const double> w, double lambda) {
    const int n = m.ground_size();
    if (static_cast<int>(w.size()) != n) throw std::invalid_argument("weight vector has wrong length");

    auto scan = [&](const std::vector<int>& members, int cap) {
        const auto order = by_weight_desc(members, w);
        double acc = 0.0, best = 0.0;
        std::size_t best_len = 0;
        for (std::size_t a = 1; a <= order.size(); ++a) {
            acc += w[order[a - 1]];
            const double val = acc - lambda * std::min<double>(static_cast<double>(a), cap);
            if (val > best) {
                best = val;
                best_len = a;
            }
        }
        return std::make_pair(std::vector<int>(order.begin(), order.begin() + best_len), best);
    };

    switch (m.kind()) {
        case MatroidOracle::Kind::Uniform: {
            std::vector<int> all(static_cast<std::size_t>(n));
            std::iota(all.begin(), all.end(), 0);
            return scan(all, m.uniform_k());
        }
        case MatroidOracle::Kind::Partition: {
            std::vector<int> chosen;
            double total = 0.0;
            for (std::size_t p = 0; p < m.parts().size(); ++p) {
                auto [set, val] = scan(m.parts()[p], m.capacities()[p]);
                chosen.insert(chosen.end(), set.begin(), set.end());
                total += val;
            }
            std::sort(chosen.begin(), chosen.end());
            return {chosen, total};
        }
        case MatroidOracle::Kind::Graphic:
            break;
    }
    throw std::logic_error(
        "LP separation is not supported for graphic matroids (needs submodular minimization)");
}

}  // namespace

MatroidOracle MatroidOracle::uniform(int n, int k) {
    if (n < 0 || k < 0 || k > n) throw std::invalid_argument("uniform matroid needs 0 <= k <= n");
    MatroidOracle m;
    m.kind_ = Kind::Uniform;
    m.n_ = n;
    m.k_ = k;
    m.full_rank_ = k;
    return m;
}

MatroidOracle MatroidOracle::partition(int n, std::vector<std::vector<int>> parts,
                                       std::vector<int> capacities) {
    if (parts.size() != capacities.size())
        throw std::invalid_argument("partition matroid: one capacity per part");
    MatroidOracle m;
    m.kind_ = Kind::Partition;
    m.n_ = n;
    m.part_of_.assign(static_cast<std::size_t>(n), -1);
    for (std::size_t p = 0; p < parts.size(); ++p) {
        if (capacities[p] < 0) throw std::invalid_argument("partition matroid: negative capacity");
        for (int b : parts[p]) {
            if (b < 0 || b >= n) throw std::invalid_argument("partition matroid: box out of range");
            if (m.part_of_[b] != -1) throw std::invalid_argument("partition matroid: parts overlap");
            m.part_of_[b] = static_cast<int>(p);
        }
        std::sort(parts[p].begin(), parts[p].end());
        m.full_rank_ += std::min<int>(capacities[p], static_cast<int>(parts[p].size()));
    }
    if (std::find(m.part_of_.begin(), m.part_of_.end(), -1) != m.part_of_.end())
        throw std::invalid_argument("partition matroid: parts must cover every box");
    m.parts_ = std::move(parts);
    m.capacities_ = std::move(capacities);
    return m;
}

MatroidOracle MatroidOracle::graphic(int num_vertices, std::vector<std::pair<int, int>> edges) {
    MatroidOracle m;
    m.kind_ = Kind::Graphic;
    m.n_ = static_cast<int>(edges.size());
    m.num_vertices_ = num_vertices;
    for (auto [a, b] : edges)
        if (a < 0 || b < 0 || a >= num_vertices || b >= num_vertices)
            throw std::invalid_argument("graphic matroid: vertex out of range");
    m.edges_ = std::move(edges);
    std::vector<int> all(static_cast<std::size_t>(m.n_));
    std::iota(all.begin(), all.end(), 0);
    m.full_rank_ = m.rank(all);
    return m;
}

int MatroidOracle::rank(std::span<const int> boxes) const {
    for (int b : boxes)
        if (b < 0 || b >= n_) throw std::out_of_range("matroid rank: box out of range");
    switch (kind_) {
        case Kind::Uniform: {
            std::vector<int> s(boxes.begin(), boxes.end());
            std::sort(s.begin(), s.end());
            const auto distinct = std::unique(s.begin(), s.end()) - s.begin();
            return std::min<int>(static_cast<int>(distinct), k_);
        }
        case Kind::Partition: {
            std::vector<int> count(parts_.size(), 0);
            std::vector<bool> seen(static_cast<std::size_t>(n_), false);
            for (int b : boxes) {
                if (seen[b]) continue;
                seen[b] = true;
                ++count[part_of_[b]];
            }
            int r = 0;
            for (std::size_t p = 0; p < parts_.size(); ++p) r += std::min(count[p], capacities_[p]);
            return r;
        }
        case Kind::Graphic: {
            UnionFind uf(num_vertices_);
            int r = 0;
            for (int b : boxes)
                if (uf.unite(edges_[b].first, edges_[b].second)) ++r;
            return r;
        }
    }
    return 0;
}

int MatroidOracle::rank_mask(std::uint64_t mask) const {
    const auto set = mask_to_set(mask, n_);
    return rank(set);
}

bool MatroidOracle::independent(std::span<const int> boxes) const {
    std::vector<int> s(boxes.begin(), boxes.end());
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) return false;
    return rank(s) == static_cast<int>(s.size());
}

std::string MatroidOracle::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Uniform:
            os << "uniform(n=" << n_ << ", k=" << k_ << ")";
            break;
        case Kind::Partition:
            os << "partition(n=" << n_ << ", parts=" << parts_.size() << ", rank=" << full_rank_ << ")";
            break;
        case Kind::Graphic:
            os << "graphic(vertices=" << num_vertices_ << ", edges=" << n_ << ")";
            break;
    }
    return os.str();
}

std::optional<RankCut> separate_rank_upper(const MatroidOracle& m, std::span<const double> w,
                                           double tol) {
    auto [set, val] = best_weighted_set(m, w, 1.0);
    if (val <= tol) return std::nullopt;
    return RankCut{std::move(set), val};
}

std::optional<RankCut> separate_coverage(const MatroidOracle& m, std::span<const double> prefix,
                                         double y, double tol) {
    if (y <= 0.0) return std::nullopt;
    auto [set, gain] = best_weighted_set(m, prefix, y);
    const double total = std::accumulate(prefix.begin(), prefix.end(), 0.0);
    const double violation = m.full_rank() * y - total + gain;
    if (violation <= tol) return std::nullopt;
    return RankCut{std::move(set), violation};
}

std::optional<RankCut> separate_rank_upper_exhaustive(const MatroidOracle& m,
                                                      std::span<const double> w, double tol) {
    const int n = m.ground_size();
    if (n > 20) throw std::invalid_argument("exhaustive separation limited to n <= 20");
    std::optional<RankCut> best;
    for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
        double wa = 0.0;
        for (int i = 0; i < n; ++i)
            if (mask >> i & 1U) wa += w[i];
        const double v = wa - m.rank_mask(mask);
        if (v > tol && (!best || v > best->violation)) best = RankCut{mask_to_set(mask, n), v};
    }
    return best;
}

std::optional<RankCut> separate_coverage_exhaustive(const MatroidOracle& m,
                                                    std::span<const double> prefix, double y,
                                                    double tol) {
    const int n = m.ground_size();
    if (n > 20) throw std::invalid_argument("exhaustive separation limited to n <= 20");
    std::optional<RankCut> best;
    for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
        double outside = 0.0;
        for (int i = 0; i < n; ++i)
            if (!(mask >> i & 1U)) outside += prefix[i];
        const double v = (m.full_rank() - m.rank_mask(mask)) * y - outside;
        if (v > tol && (!best || v > best->violation)) best = RankCut{mask_to_set(mask, n), v};
    }
    return best;
}

}  // namespace pbox
