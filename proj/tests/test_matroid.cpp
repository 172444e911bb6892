#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>

#include "pbox/matroid.hpp"
#include "pbox/rng.hpp"

using namespace pbox;

namespace {

std::vector<MatroidOracle> sample_matroids() {
    return {MatroidOracle::uniform(5, 2), MatroidOracle::uniform(4, 0), MatroidOracle::uniform(6, 6),
            MatroidOracle::partition(6, {{0, 1, 2}, {3}, {4, 5}}, {2, 1, 1}),
            MatroidOracle::partition(4, {{0, 1}, {2, 3}}, {0, 2}),
            MatroidOracle::graphic(4, {{0, 1}, {1, 2}, {2, 0}, {2, 3}, {3, 1}, {0, 3}})};
}

}  // namespace

TEST_CASE("rank examples") {
    const auto u = MatroidOracle::uniform(4, 2);
    CHECK(u.rank(std::vector<int>{0, 1, 2}) == 2);
    const auto p = MatroidOracle::partition(3, {{0, 1}, {2}}, {1, 1});
    CHECK(p.rank(std::vector<int>{0, 1}) == 1);
    CHECK(p.full_rank() == 2);
    const auto g = MatroidOracle::graphic(3, {{0, 1}, {1, 2}, {2, 0}});
    CHECK(g.rank(std::vector<int>{0, 1, 2}) == 2);
    CHECK(g.full_rank() == 2);
}

TEST_CASE("constructor validation") {
    CHECK_THROWS_AS(MatroidOracle::uniform(2, 3), std::invalid_argument);
    CHECK_THROWS_AS(MatroidOracle::partition(3, {{0, 1}}, {1}), std::invalid_argument);
    CHECK_THROWS_AS(MatroidOracle::partition(3, {{0, 1}, {1, 2}}, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(MatroidOracle::partition(2, {{0}, {1}}, {1}), std::invalid_argument);
    CHECK_THROWS_AS(MatroidOracle::graphic(2, {{0, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(MatroidOracle::uniform(3, 1).rank(std::vector<int>{3}), std::out_of_range);
}

TEST_CASE("rank axioms on every subset") {
    for (const auto& m : sample_matroids()) {
        const int n = m.ground_size();
        const std::uint64_t full = (1ULL << n) - 1;
        CHECK(m.rank_mask(0) == 0);
        for (std::uint64_t a = 0; a <= full; ++a) {
            const int ra = m.rank_mask(a);
            CHECK(ra <= __builtin_popcountll(a));
            for (int i = 0; i < n; ++i) {
                const std::uint64_t ai = a | (1ULL << i);
                CHECK(m.rank_mask(ai) >= ra);  // monotone
                CHECK(m.rank_mask(ai) <= ra + 1);
            }
            // Submodularity against a sample of partners.
            for (std::uint64_t b = a % 7; b <= full; b += 7)
                CHECK(m.rank_mask(a | b) + m.rank_mask(a & b) <= ra + m.rank_mask(b));
        }
    }
}

TEST_CASE("independence agrees with rank") {
    for (const auto& m : sample_matroids()) {
        const int n = m.ground_size();
        for (std::uint64_t a = 0; a < (1ULL << n); ++a) {
            std::vector<int> set;
            for (int i = 0; i < n; ++i)
                if (a >> i & 1U) set.push_back(i);
            CHECK(m.independent(set) == (m.rank(set) == static_cast<int>(set.size())));
        }
        CHECK_FALSE(m.independent(std::vector<int>{0, 0}));
    }
}

TEST_CASE("rank-upper separation examples") {
    const auto u1 = MatroidOracle::uniform(2, 1);
    std::vector<double> w{0.8, 0.8};
    auto cut = separate_rank_upper(u1, w);
    REQUIRE(cut);
    CHECK(cut->set == std::vector<int>{0, 1});
    CHECK(cut->violation == doctest::Approx(0.6));
    std::vector<double> zero{0.0, 0.0};
    CHECK_FALSE(separate_rank_upper(u1, zero));
    const auto p = MatroidOracle::partition(3, {{0, 1}, {2}}, {1, 1});
    std::vector<double> tight{0.5, 0.5, 1.0};
    CHECK_FALSE(separate_rank_upper(p, tight, 1e-9));
    const auto g = MatroidOracle::graphic(2, {{0, 1}});
    std::vector<double> one{1.0};
    CHECK_THROWS_AS(separate_rank_upper(g, one), std::logic_error);
}

TEST_CASE("coverage separation examples") {
    const auto u = MatroidOracle::uniform(3, 2);
    std::vector<double> full{1.0, 1.0, 0.0};
    CHECK_FALSE(separate_coverage(u, full, 1.0));
    CHECK_FALSE(separate_coverage(u, std::vector<double>{0, 0, 0}, 0.0));
    auto cut = separate_coverage(u, std::vector<double>{0.0, 0.0, 0.0}, 1.0);
    REQUIRE(cut);
    CHECK(cut->set.empty());
    CHECK(cut->violation == doctest::Approx(2.0));
}

TEST_CASE("separation agrees with exhaustive enumeration") {
    CounterRng rng(5);
    std::vector<MatroidOracle> ms;
    for (const auto& m : sample_matroids())
        if (m.supports_separation()) ms.push_back(m);
    for (const auto& m : ms)
        for (int trial = 0; trial < 200; ++trial) {
            const int n = m.ground_size();
            std::vector<double> w(static_cast<std::size_t>(n));
            for (auto& v : w) v = rng.uniform() * 1.2;
            const auto fast = separate_rank_upper(m, w);
            const auto slow = separate_rank_upper_exhaustive(m, w);
            REQUIRE(fast.has_value() == slow.has_value());
            if (fast) {
                CHECK(fast->violation == doctest::Approx(slow->violation).epsilon(1e-12));
                double wa = 0.0;
                for (int i : fast->set) wa += w[i];
                CHECK(wa - m.rank(fast->set) == doctest::Approx(fast->violation));
            }
            const double y = rng.uniform();
            const auto fc = separate_coverage(m, w, y);
            const auto sc = separate_coverage_exhaustive(m, w, y);
            REQUIRE(fc.has_value() == sc.has_value());
            if (fc) {
                CHECK(fc->violation == doctest::Approx(sc->violation).epsilon(1e-12));
                double outside = 0.0;
                std::vector<bool> in(static_cast<std::size_t>(n), false);
                for (int i : fc->set) in[i] = true;
                for (int i = 0; i < n; ++i)
                    if (!in[i]) outside += w[i];
                CHECK((m.full_rank() - m.rank(fc->set)) * y - outside == doctest::Approx(fc->violation));
            }
        }
}
