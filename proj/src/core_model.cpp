#include "pbox/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pbox/rng.hpp"

namespace pbox {

std::string Cost::to_string() const {
    if (infinite_) return "inf";
    std::ostringstream os;
    os << std::setprecision(17) << value_;
    return os.str();
}

std::ostream& operator<<(std::ostream& os, Cost c) {
    if (c.is_infinite()) return os << "inf";
    return os << c.value();
}

Scenario::Scenario(std::vector<Cost> costs) : costs_(std::move(costs)) {
    if (costs_.empty()) throw std::invalid_argument("scenario must contain at least one box");
    for (std::size_t i = 0; i < costs_.size(); ++i)
        if (costs_[i].is_finite() && !(costs_[i].value() >= 0.0))
            throw std::invalid_argument("negative cost at box " + std::to_string(i));
}

bool Scenario::is_normalized() const {
    const double n = static_cast<double>(costs_.size());
    return std::all_of(costs_.begin(), costs_.end(),
                       [n](Cost c) { return c.is_infinite() || c.value() <= n; });
}

std::vector<BoxId> Scenario::finite_boxes() const {
    std::vector<BoxId> out;
    for (int i = 0; i < size(); ++i)
        if (costs_[i].is_finite()) out.push_back(i);
    return out;
}

bool Scenario::is_mssc() const {
    return std::all_of(costs_.begin(), costs_.end(),
                       [](Cost c) { return c.is_infinite() || c.value() == 0.0; });
}

bool operator<(const Scenario& a, const Scenario& b) {
    return std::lexicographical_compare(a.costs_.begin(), a.costs_.end(), b.costs_.begin(),
                                        b.costs_.end(),
                                        [](Cost x, Cost y) { return x < y; });
}

std::string Scenario::to_string() const {
    std::string out = "(";
    for (std::size_t i = 0; i < costs_.size(); ++i) {
        if (i) out += ", ";
        out += costs_[i].to_string();
    }
    return out + ")";
}

std::size_t ScenarioHash::operator()(const Scenario& s) const {
    std::uint64_t h = 0x12345678ULL;
    for (Cost c : s.costs()) {
        std::uint64_t bits = 0xFFFFFFFFFFFFFFFFULL;
        if (c.is_finite()) {
            double v = c.value() == 0.0 ? 0.0 : c.value();  // fold -0.0
            std::memcpy(&bits, &v, sizeof bits);
        }
        h = CounterRng::mix(h ^ bits);
    }
    return static_cast<std::size_t>(h);
}

Scenario normalize_costs(std::span<const Cost> raw, int n) {
    if (static_cast<int>(raw.size()) != n)
        throw std::invalid_argument("normalize_costs: expected " + std::to_string(n) + " entries, got " +
                                    std::to_string(raw.size()));
    std::vector<Cost> out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const Cost c = raw[i];
        if (c.is_infinite()) {
            out.push_back(c);
            continue;
        }
        if (!(c.value() >= 0.0))
            throw std::invalid_argument("invalid instance: negative cost at box " + std::to_string(i));
        out.push_back(c.value() > n ? Cost::infinite() : c);
    }
    return Scenario(std::move(out));
}

ConstraintFamily ConstraintFamily::select_k(int k) {
    if (k < 1) throw std::invalid_argument("select-k needs k >= 1");
    return ConstraintFamily(Kind::SelectK, k, nullptr);
}

ConstraintFamily ConstraintFamily::matroid_basis(MatroidOracle oracle) {
    const int r = oracle.full_rank();
    return ConstraintFamily(Kind::Matroid, r, std::make_shared<const MatroidOracle>(std::move(oracle)));
}

const MatroidOracle& ConstraintFamily::matroid() const {
    if (!matroid_) throw std::logic_error("constraint family has no matroid");
    return *matroid_;
}

std::string ConstraintFamily::name() const {
    switch (kind_) {
        case Kind::Select1:
            return "select1";
        case Kind::SelectK:
            return "select-k(" + std::to_string(k_) + ")";
        case Kind::Matroid:
            return "matroid(" + matroid_->describe() + ")";
    }
    return "?";
}

namespace {

bool has_duplicates(std::span<const BoxId> boxes) {
    std::vector<BoxId> s(boxes.begin(), boxes.end());
    std::sort(s.begin(), s.end());
    return std::adjacent_find(s.begin(), s.end()) != s.end();
}

}  // namespace

bool is_partial_selection(const ConstraintFamily& family, std::span<const BoxId> selected) {
    if (has_duplicates(selected)) return false;
    switch (family.kind()) {
        case ConstraintFamily::Kind::Select1:
        case ConstraintFamily::Kind::SelectK:
            return static_cast<int>(selected.size()) <= family.required();
        case ConstraintFamily::Kind::Matroid:
            return family.matroid().independent(selected);
    }
    return false;
}

bool is_complete_selection(const ConstraintFamily& family, std::span<const BoxId> selected) {
    return is_partial_selection(family, selected) &&
           static_cast<int>(selected.size()) == family.required();
}

Selection best_selection(const ConstraintFamily& family, const Scenario& s,
                         std::span<const BoxId> candidates) {
    std::vector<BoxId> finite;
    for (BoxId b : candidates)
        if (s[b].is_finite()) finite.push_back(b);
    std::sort(finite.begin(), finite.end());
    finite.erase(std::unique(finite.begin(), finite.end()), finite.end());
    std::stable_sort(finite.begin(), finite.end(),
                     [&](BoxId a, BoxId b) { return s[a].value() < s[b].value(); });

    Selection out;
    out.cost = Cost(0.0);
    if (family.kind() == ConstraintFamily::Kind::Matroid) {
        // Greedy is optimal for min-weight bases.
        const auto& m = family.matroid();
        for (BoxId b : finite) {
            out.boxes.push_back(b);
            if (!m.independent(out.boxes)) out.boxes.pop_back();
        }
    } else {
        const auto k = static_cast<std::size_t>(family.required());
        out.boxes.assign(finite.begin(), finite.begin() + static_cast<std::ptrdiff_t>(std::min(k, finite.size())));
    }
    if (static_cast<int>(out.boxes.size()) != family.required()) return {{}, Cost::infinite()};
    for (BoxId b : out.boxes) out.cost += s[b];
    return out;
}

bool InspectionTranscript::was_opened(BoxId b) const {
    return std::any_of(opened.begin(), opened.end(), [b](const auto& p) { return p.first == b; });
}

void InspectionTranscript::validate(const ConstraintFamily& family) const {
    std::vector<BoxId> ids;
    for (const auto& [b, c] : opened) ids.push_back(b);
    if (has_duplicates(ids)) throw std::logic_error("transcript opens a box twice");
    for (BoxId b : selected)
        if (!was_opened(b)) throw std::logic_error("transcript selects an unopened box");
    if (!is_partial_selection(family, selected))
        throw std::logic_error("transcript selection violates the constraint family");
}

Cost transcript_cost(const InspectionTranscript& t, const ConstraintFamily& family) {
    if (!is_complete_selection(family, t.selected)) return Cost::infinite();
    Cost total(static_cast<double>(t.opened.size()));
    for (BoxId b : t.selected) {
        auto it = std::find_if(t.opened.begin(), t.opened.end(),
                               [b](const auto& p) { return p.first == b; });
        if (it == t.opened.end()) return Cost::infinite();
        total += it->second;
    }
    return total;
}

InspectionTranscript open_all_transcript(const ConstraintFamily& family, const Scenario& s) {
    InspectionTranscript t;
    std::vector<BoxId> all;
    for (BoxId b = 0; b < s.size(); ++b) {
        t.opened.emplace_back(b, s[b]);
        all.push_back(b);
    }
    t.selected = best_selection(family, s, all).boxes;
    return t;
}

void ScenarioSequence::validate() const {
    if (n < 1) throw std::invalid_argument("sequence needs n >= 1");
    for (std::size_t t = 0; t < scenarios.size(); ++t)
        if (scenarios[t].size() != n)
            throw std::invalid_argument("scenario " + std::to_string(t) + " has " +
                                        std::to_string(scenarios[t].size()) + " boxes, expected " +
                                        std::to_string(n));
}

namespace {

double param_or(const std::map<std::string, double>& p, const std::string& key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

Scenario draw_mssc(int n, double density, bool strict, CounterRng& rng) {
    for (int attempt = 0; attempt < 100000; ++attempt) {
        std::vector<Cost> costs;
        bool covered = false;
        for (int i = 0; i < n; ++i) {
            const bool zero = rng.bernoulli(density);
            covered |= zero;
            costs.push_back(zero ? Cost(0.0) : Cost::infinite());
        }
        if (covered) return Scenario(std::move(costs));
        if (strict) throw std::runtime_error("mssc generator drew a scenario with no zero-cost box");
    }
    throw std::runtime_error("mssc generator: density too low to cover a scenario");
}

}  // namespace

ScenarioSequence generate_instance(const std::string& kind, int n, int T,
                                   const std::map<std::string, double>& params,
                                   std::uint64_t seed) {
    if (n < 1 || T < 1) throw std::invalid_argument("generate_instance needs n >= 1 and T >= 1");
    ScenarioSequence seq;
    seq.n = n;
    seq.metadata = {kind, seed, params};
    CounterRng rng(seed, 0x9e4e);

    std::function<Scenario(CounterRng&)> draw;
    if (kind == "mssc") {
        const double density = param_or(params, "density", 0.5);
        if (!(density > 0.0 && density <= 1.0)) throw std::invalid_argument("mssc density must be in (0, 1]");
        const bool strict = param_or(params, "strict", 0.0) != 0.0;
        draw = [=](CounterRng& r) { return draw_mssc(n, density, strict, r); };
    } else if (kind == "uniform-costs") {
        draw = [=](CounterRng& r) {
            std::vector<Cost> c;
            for (int i = 0; i < n; ++i) c.emplace_back(r.uniform() * n);
            return Scenario(std::move(c));
        };
    } else if (kind == "clustered") {
        const int clusters = static_cast<int>(param_or(params, "clusters", 3));
        const double noise = param_or(params, "noise", 0.1 * n);
        if (clusters < 1) throw std::invalid_argument("clustered generator needs clusters >= 1");
        std::vector<std::vector<double>> centers(static_cast<std::size_t>(clusters));
        for (auto& c : centers)
            for (int i = 0; i < n; ++i) c.push_back(rng.uniform() * n);
        draw = [=](CounterRng& r) {
            const auto& c = centers[static_cast<std::size_t>(r.uniform_int(0, clusters - 1))];
            std::vector<Cost> out;
            for (int i = 0; i < n; ++i)
                out.emplace_back(std::clamp(c[i] + (2.0 * r.uniform() - 1.0) * noise, 0.0,
                                            static_cast<double>(n)));
            return Scenario(std::move(out));
        };
    } else if (kind == "adversarial-alternating") {
        for (int t = 0; t < T; ++t) {
            std::vector<Cost> c(static_cast<std::size_t>(n), Cost::infinite());
            c[static_cast<std::size_t>(t % n)] = Cost(0.0);
            seq.scenarios.emplace_back(std::move(c));
        }
        return seq;
    } else {
        throw std::invalid_argument("unknown generator kind '" + kind + "'");
    }

    const int pool = static_cast<int>(param_or(params, "pool", 0));
    if (pool > 0) {
        std::vector<Scenario> drawn;
        for (int j = 0; j < pool; ++j) drawn.push_back(draw(rng));
        for (int t = 0; t < T; ++t)
            seq.scenarios.push_back(drawn[static_cast<std::size_t>(rng.uniform_int(0, pool - 1))]);
    } else {
        for (int t = 0; t < T; ++t) seq.scenarios.push_back(draw(rng));
    }
    return seq;
}

}  // namespace pbox
