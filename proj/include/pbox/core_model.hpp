#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pbox/cost.hpp"
#include "pbox/matroid.hpp"

namespace pbox {

/// Boxes are numbered 0..n-1 throughout the library.
using BoxId = int;

/// One round's hidden cost vector. Entries are nonnegative or Infinite;
/// normalize_costs additionally caps finite entries at n.
class Scenario {
public:
    Scenario() = default;
    /// Validates length >= 1 and no negative entries.
    explicit Scenario(std::vector<Cost> costs);

    int size() const { return static_cast<int>(costs_.size()); }
    Cost operator[](BoxId i) const { return costs_[static_cast<std::size_t>(i)]; }
    const std::vector<Cost>& costs() const { return costs_; }

    std::vector<BoxId> finite_boxes() const;
    bool is_mssc() const;  // every entry is 0 or Infinite
    bool is_normalized() const;  // every finite entry is <= n

    friend bool operator==(const Scenario&, const Scenario&) = default;
    friend bool operator<(const Scenario& a, const Scenario& b);

    std::string to_string() const;

private:
    std::vector<Cost> costs_;
};

struct ScenarioHash {
    std::size_t operator()(const Scenario& s) const;
};

/// Replaces finite costs above n with Infinite; such boxes never beat
/// opening everything.
Scenario normalize_costs(std::span<const Cost> raw, int n);

/// Which selections are feasible: one box, exactly k boxes, or a matroid basis.
class ConstraintFamily {
public:
    enum class Kind { Select1, SelectK, Matroid };

    static ConstraintFamily select1() { return ConstraintFamily(Kind::Select1, 1, nullptr); }
    static ConstraintFamily select_k(int k);
    static ConstraintFamily matroid_basis(MatroidOracle oracle);

    Kind kind() const { return kind_; }
    /// Number of boxes a feasible selection contains (1, k, or r(N)).
    int required() const { return k_; }
    const MatroidOracle& matroid() const;
    bool has_matroid() const { return matroid_ != nullptr; }

    std::string name() const;

private:
    ConstraintFamily(Kind kind, int k, std::shared_ptr<const MatroidOracle> m)
        : kind_(kind), k_(k), matroid_(std::move(m)) {}

    Kind kind_;
    int k_;
    std::shared_ptr<const MatroidOracle> matroid_;
};

/// Selection feasibility under the family (size/independence only).
bool is_complete_selection(const ConstraintFamily& family, std::span<const BoxId> selected);
/// True when `selected` can still be extended to a feasible selection.
bool is_partial_selection(const ConstraintFamily& family, std::span<const BoxId> selected);

/// Cheapest feasible selection among `candidates` under scenario s.
/// Returns Infinite cost and an empty set when none exists.
struct Selection {
    std::vector<BoxId> boxes;
    Cost cost;
};
Selection best_selection(const ConstraintFamily& family, const Scenario& s,
                         std::span<const BoxId> candidates);

struct InspectionTranscript {
    std::vector<std::pair<BoxId, Cost>> opened;
    std::vector<BoxId> selected;
    int round = 0;

    bool was_opened(BoxId b) const;
    /// Throws std::logic_error when an invariant is broken.
    void validate(const ConstraintFamily& family) const;
};

/// |opened| + sum of selected costs; Infinite if the selection is incomplete
/// or contains an Infinite cost.
Cost transcript_cost(const InspectionTranscript& t, const ConstraintFamily& family);

/// Transcript for opening every box and taking the cheapest feasible selection.
InspectionTranscript open_all_transcript(const ConstraintFamily& family, const Scenario& s);

struct GeneratorMetadata {
    std::string generator;
    std::uint64_t seed = 0;
    std::map<std::string, double> params;
};

struct ScenarioSequence {
    int n = 0;
    std::vector<Scenario> scenarios;
    GeneratorMetadata metadata;

    int horizon() const { return static_cast<int>(scenarios.size()); }
    void validate() const;
};

/// Instance generators.
///
/// kind: "mssc" (entries 0 w.p. `density`, else Infinite), "uniform-costs"
/// (entries uniform on [0, n]), "clustered" (`clusters` centers plus uniform
/// noise of half-width `noise`), "adversarial-alternating" (round t has its
/// only zero at box t mod n). Random kinds accept `pool` > 0: draw that many
/// scenarios once and replay them uniformly at random. An mssc scenario with
/// no zero is redrawn unless `strict` is nonzero, in which case it throws.
ScenarioSequence generate_instance(const std::string& kind, int n, int T,
                                   const std::map<std::string, double>& params,
                                   std::uint64_t seed);

}  // namespace pbox
