#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pbox/lp.hpp"
#include "pbox/rng.hpp"

using namespace pbox;
using Sense = LinearProgram::Sense;

TEST_CASE("two-variable covering LP") {
    // min x0 + z0 s.t. z0 <= x0, z0 >= 1, all <= 1.
    LinearProgram lp;
    const int x = lp.add_var("x0", 1.0);
    const int z = lp.add_var("z0", 0.0);
    lp.add_row({{z, 1.0}, {x, -1.0}}, Sense::LessEq, 0.0);
    lp.add_row({{z, 1.0}}, Sense::GreaterEq, 1.0);
    lp.add_row({{x, 1.0}}, Sense::LessEq, 1.0);
    for (auto* solve : {&solve_lp, &solve_lp_exact}) {
        const auto r = (*solve)(lp, 200000);
        REQUIRE(r.status == LpStatus::Optimal);
        CHECK(r.objective == doctest::Approx(1.0));
        CHECK(r.primal[x] == doctest::Approx(1.0));
    }
    CHECK(solve_lp_exact(lp).exact_objective == "1");
}

TEST_CASE("zero objective and verdicts") {
    LinearProgram lp;
    lp.add_var("a", 0.0);
    lp.add_row({{0, 1.0}}, Sense::LessEq, 3.0);
    CHECK(solve_lp(lp).objective == 0.0);

    LinearProgram inf;
    inf.add_var("a", 1.0);
    inf.add_row({{0, 1.0}}, Sense::GreaterEq, 2.0);
    inf.add_row({{0, 1.0}}, Sense::LessEq, 1.0);
    CHECK(solve_lp(inf).status == LpStatus::Infeasible);
    CHECK(solve_lp_exact(inf).status == LpStatus::Infeasible);

    LinearProgram unb;
    unb.add_var("a", -1.0);
    unb.add_row({{0, 1.0}}, Sense::GreaterEq, 0.0);
    CHECK(solve_lp(unb).status == LpStatus::Unbounded);
    CHECK(solve_lp_exact(unb).status == LpStatus::Unbounded);
}

TEST_CASE("exact rational optimum") {
    // min -x - y s.t. 3x + y <= 1, x + 3y <= 1  => x = y = 1/4, value -1/2.
    LinearProgram lp;
    lp.add_var("x", -1.0);
    lp.add_var("y", -1.0);
    lp.add_row({{0, 3.0}, {1, 1.0}}, Sense::LessEq, 1.0);
    lp.add_row({{0, 1.0}, {1, 3.0}}, Sense::LessEq, 1.0);
    const auto r = solve_lp_exact(lp);
    CHECK(r.exact_objective == "-1/2");
    CHECK(r.duals[0] == doctest::Approx(-0.25));
    CHECK(r.duals[1] == doctest::Approx(-0.25));
}

TEST_CASE("equality rows and dual sensitivity") {
    LinearProgram lp;
    lp.add_var("a", 2.0);
    lp.add_var("b", 3.0);
    lp.add_row({{0, 1.0}, {1, 1.0}}, Sense::Equal, 4.0);
    lp.add_row({{0, 1.0}}, Sense::LessEq, 1.5);
    const auto r = solve_lp(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(1.5 * 2 + 2.5 * 3));
    // Raising a rhs by d moves the optimum by dual * d.
    auto bumped = lp;
    bumped.rows[1].rhs += 0.25;
    CHECK(solve_lp(bumped).objective == doctest::Approx(r.objective + 0.25 * r.duals[1]));
}

TEST_CASE("double and rational solvers agree on random feasible LPs") {
    CounterRng rng(17);
    for (int trial = 0; trial < 60; ++trial) {
        const int nv = 2 + static_cast<int>(rng.uniform_int(0, 4));
        const int nr = 1 + static_cast<int>(rng.uniform_int(0, 4));
        LinearProgram lp;
        for (int j = 0; j < nv; ++j) lp.add_var("v" + std::to_string(j), std::round(rng.uniform() * 8) / 4 - 0.5);
        for (int j = 0; j < nv; ++j) lp.add_row({{j, 1.0}}, Sense::LessEq, 1.0);
        for (int r = 0; r < nr; ++r) {
            std::vector<std::pair<int, double>> row;
            double total = 0.0;
            for (int j = 0; j < nv; ++j) {
                const double a = std::round(rng.uniform() * 4) / 2;
                row.emplace_back(j, a);
                total += a;
            }
            lp.add_row(row, Sense::GreaterEq, std::round(total * rng.uniform() * 4) / 8);
        }
        const auto a = solve_lp(lp);
        const auto b = solve_lp_exact(lp);
        REQUIRE(a.status == b.status);
        if (a.status != LpStatus::Optimal) continue;
        CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-9));
        CHECK(a.primal_residual < 1e-9);
        CHECK(a.dual_residual < 1e-9);
        CHECK(std::abs(a.duality_gap) < 1e-8);
    }
}

TEST_CASE("lp text dump") {
    LinearProgram lp;
    lp.add_var("x", 0.1);
    lp.add_row({{0, 1.0}}, Sense::GreaterEq, 0.5, "r");
    const auto txt = lp.to_lp_text();
    CHECK(txt.find("Minimize") != std::string::npos);
    // Coefficients round-trip: 17 significant digits.
    CHECK(txt.find("0.10000000000000001 x") != std::string::npos);
    CHECK(std::stod("0.10000000000000001") == 0.1);
    CHECK(txt.find("r:") != std::string::npos);
    CHECK(to_string(LpStatus::Optimal) == "optimal");
}
