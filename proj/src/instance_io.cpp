#include "pbox/instance_io.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace pbox {

using nlohmann::json;

namespace {

void require_keys(const json& j, const std::string& where, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional = {}) {
    if (!j.is_object()) throw FormatError(where + ": expected an object");
    std::set<std::string> known;
    for (const char* k : required) {
        if (!j.contains(k)) throw FormatError(where + ": missing key '" + k + "'");
        known.insert(k);
    }
    for (const char* k : optional) known.insert(k);
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) throw FormatError(where + ": unknown key '" + k + "'");
}

int get_int(const json& j, const char* key, const std::string& where) {
    const auto& v = j.at(key);
    if (!v.is_number_integer()) throw FormatError(where + ": '" + key + "' must be an integer");
    return v.get<int>();
}

}  // namespace

json cost_to_json(Cost c) {
    if (c.is_infinite()) return "inf";
    return c.value();
}

Cost cost_from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return Cost::infinite();
        throw FormatError("cost: the only string value allowed is \"inf\"");
    }
    if (!j.is_number()) throw FormatError("cost: expected a number or \"inf\"");
    const double v = j.get<double>();
    if (!(v >= 0.0) || !std::isfinite(v)) throw FormatError("cost: negative or non-finite value");
    return Cost(v);
}

json matroid_to_json(const MatroidOracle& m) {
    switch (m.kind()) {
        case MatroidOracle::Kind::Uniform:
            return {{"kind", "uniform"}, {"n", m.ground_size()}, {"k", m.uniform_k()}};
        case MatroidOracle::Kind::Partition:
            return {{"kind", "partition"}, {"n", m.ground_size()}, {"parts", m.parts()}, {"capacities", m.capacities()}};
        case MatroidOracle::Kind::Graphic: {
            json edges = json::array();
            for (auto [a, b] : m.edges()) edges.push_back({a, b});
            return {{"kind", "graphic"}, {"vertices", m.num_vertices()}, {"edges", edges}};
        }
    }
    return {};
}

MatroidOracle matroid_from_json(const json& j, int n) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw FormatError("matroid: expected an object with a string 'kind'");
    const auto kind = j["kind"].get<std::string>();
    try {
        if (kind == "uniform") {
            require_keys(j, "matroid", {"kind", "k"}, {"n"});
            if (j.contains("n") && get_int(j, "n", "matroid") != n) throw FormatError("matroid: n does not match the instance");
            return MatroidOracle::uniform(n, get_int(j, "k", "matroid"));
        }
        if (kind == "partition") {
            require_keys(j, "matroid", {"kind", "parts", "capacities"}, {"n"});
            if (j.contains("n") && get_int(j, "n", "matroid") != n) throw FormatError("matroid: n does not match the instance");
            return MatroidOracle::partition(n, j["parts"].get<std::vector<std::vector<int>>>(),
                                            j["capacities"].get<std::vector<int>>());
        }
        if (kind == "graphic") {
            require_keys(j, "matroid", {"kind", "vertices", "edges"});
            std::vector<std::pair<int, int>> edges;
            for (const auto& e : j["edges"]) {
                if (!e.is_array() || e.size() != 2) throw FormatError("matroid: each edge is a pair [a, b]");
                edges.emplace_back(e[0].get<int>(), e[1].get<int>());
            }
            auto m = MatroidOracle::graphic(get_int(j, "vertices", "matroid"), std::move(edges));
            if (m.ground_size() != n) throw FormatError("matroid: edge count must equal n");
            return m;
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("matroid: ") + e.what());
    } catch (const FormatError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("matroid: ") + e.what());
    }
    throw FormatError("matroid: unknown kind '" + kind + "'");
}

json family_to_json(const ConstraintFamily& f) {
    switch (f.kind()) {
        case ConstraintFamily::Kind::Select1:
            return {{"kind", "select1"}};
        case ConstraintFamily::Kind::SelectK:
            return {{"kind", "select-k"}, {"k", f.required()}};
        case ConstraintFamily::Kind::Matroid:
            return {{"kind", "matroid"}, {"matroid", matroid_to_json(f.matroid())}};
    }
    return {};
}

ConstraintFamily family_from_json(const json& j, int n) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw FormatError("family: expected an object with a string 'kind'");
    const auto kind = j["kind"].get<std::string>();
    if (kind == "select1") {
        require_keys(j, "family", {"kind"});
        return ConstraintFamily::select1();
    }
    if (kind == "select-k") {
        require_keys(j, "family", {"kind", "k"});
        const int k = get_int(j, "k", "family");
        if (k < 1 || k > n) throw FormatError("family: k must lie in [1, n]");
        return ConstraintFamily::select_k(k);
    }
    if (kind == "matroid") {
        require_keys(j, "family", {"kind", "matroid"});
        return ConstraintFamily::matroid_basis(matroid_from_json(j["matroid"], n));
    }
    throw FormatError("family: unknown kind '" + kind + "'");
}

json instance_to_json(const ScenarioSequence& seq, const ConstraintFamily* family) {
    json scen = json::array();
    for (const auto& s : seq.scenarios) {
        json row = json::array();
        for (Cost c : s.costs()) row.push_back(cost_to_json(c));
        scen.push_back(std::move(row));
    }
    json params = json::object();
    for (const auto& [k, v] : seq.metadata.params) params[k] = v;
    json j = {{"n", seq.n},
              {"T", seq.horizon()},
              {"scenarios", std::move(scen)},
              {"metadata", {{"generator", seq.metadata.generator}, {"seed", seq.metadata.seed}, {"params", params}}}};
    if (family) j["family"] = family_to_json(*family);
    return j;
}

ScenarioSequence instance_from_json(const json& j) {
    require_keys(j, "instance", {"n", "scenarios"}, {"T", "metadata", "family"});
    ScenarioSequence seq;
    seq.n = get_int(j, "n", "instance");
    if (seq.n < 1) throw FormatError("instance: n must be >= 1");
    if (!j["scenarios"].is_array()) throw FormatError("instance: 'scenarios' must be an array");
    std::size_t t = 0;
    for (const auto& row : j["scenarios"]) {
        ++t;
        if (!row.is_array() || static_cast<int>(row.size()) != seq.n)
            throw FormatError("instance: scenario " + std::to_string(t) + " must list exactly n costs");
        std::vector<Cost> raw;
        try {
            for (const auto& c : row) raw.push_back(cost_from_json(c));
        } catch (const FormatError& e) {
            throw FormatError("instance: scenario " + std::to_string(t) + ": " + e.what());
        }
        seq.scenarios.push_back(normalize_costs(raw, seq.n));
    }
    if (j.contains("T") && get_int(j, "T", "instance") != seq.horizon())
        throw FormatError("instance: T does not match the number of scenarios");
    if (j.contains("metadata")) {
        const auto& m = j["metadata"];
        require_keys(m, "instance.metadata", {}, {"generator", "seed", "params"});
        if (m.contains("generator")) seq.metadata.generator = m["generator"].get<std::string>();
        if (m.contains("seed")) seq.metadata.seed = m["seed"].get<std::uint64_t>();
        if (m.contains("params"))
            for (const auto& [k, v] : m["params"].items()) seq.metadata.params[k] = v.get<double>();
    }
    return seq;
}

std::optional<ConstraintFamily> instance_family(const json& j) {
    if (!j.contains("family")) return std::nullopt;
    return family_from_json(j["family"], j.at("n").get<int>());
}

json read_json_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw FormatError("cannot open " + p.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(p.string() + ": " + e.what());
    }
}

void write_instance_file(const std::filesystem::path& p, const ScenarioSequence& seq, const ConstraintFamily* family) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << instance_to_json(seq, family).dump(2) << '\n';
}

}  // namespace pbox
