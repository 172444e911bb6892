#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pbox {

/// Rank oracle over the boxes 0..n-1.
///
/// Uniform and partition matroids support exact LP separation; graphic
/// matroids (boxes are edges) support rank and independence only.
class MatroidOracle {
public:
    enum class Kind { Uniform, Partition, Graphic };

    static MatroidOracle uniform(int n, int k);
    /// parts must be a disjoint cover of 0..n-1; capacities[p] >= 0.
    static MatroidOracle partition(int n, std::vector<std::vector<int>> parts,
                                   std::vector<int> capacities);
    /// Box i is the edge edges[i] on vertices 0..num_vertices-1.
    static MatroidOracle graphic(int num_vertices, std::vector<std::pair<int, int>> edges);

    Kind kind() const { return kind_; }
    int ground_size() const { return n_; }

    int rank(std::span<const int> boxes) const;
    int rank_mask(std::uint64_t mask) const;
    int full_rank() const { return full_rank_; }
    bool independent(std::span<const int> boxes) const;
    bool supports_separation() const { return kind_ != Kind::Graphic; }

    int uniform_k() const { return k_; }
    const std::vector<std::vector<int>>& parts() const { return parts_; }
    const std::vector<int>& capacities() const { return capacities_; }
    int num_vertices() const { return num_vertices_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

    std::string describe() const;

private:
    MatroidOracle() = default;

    Kind kind_ = Kind::Uniform;
    int n_ = 0;
    int k_ = 0;
    int full_rank_ = 0;
    std::vector<std::vector<int>> parts_;
    std::vector<int> capacities_;
    std::vector<int> part_of_;
    int num_vertices_ = 0;
    std::vector<std::pair<int, int>> edges_;
};

/// A subset A of boxes together with how much a cut indexed by A is violated.
struct RankCut {
    std::vector<int> set;
    double violation = 0.0;
};

/// Most violated upper-rank cut  w(A) <= r(A).  Returns nullopt when
/// max_A w(A) - r(A) <= tol.  Throws for graphic matroids.
std::optional<RankCut> separate_rank_upper(const MatroidOracle& m, std::span<const double> w,
                                           double tol = 1e-9);

/// Most violated coverage cut  sum_{i not in A} prefix_i >= (r(N) - r(A)) * y.
std::optional<RankCut> separate_coverage(const MatroidOracle& m, std::span<const double> prefix,
                                         double y, double tol = 1e-9);

/// Brute-force versions over all 2^n subsets; any matroid kind, n <= 20.
std::optional<RankCut> separate_rank_upper_exhaustive(const MatroidOracle& m,
                                                      std::span<const double> w,
                                                      double tol = 1e-9);
std::optional<RankCut> separate_coverage_exhaustive(const MatroidOracle& m,
                                                    std::span<const double> prefix, double y,
                                                    double tol = 1e-9);

}  // namespace pbox
