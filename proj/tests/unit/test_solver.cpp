#include <doctest.h>

#include <random>

#include "ltr/core/errors.hpp"
#include "ltr/solver/solver.hpp"
#include "simplex.hpp"
#include "support/oracles.hpp"

using namespace ltr::milp;

TEST_CASE("bound contradiction is infeasible") {
    MilpModel m;
    auto x = m.add_continuous("x", 0.0, 1.0);
    m.add_constraint(LinearExpr().add(1.0, x), Sense::GreaterEqual, 2.0, "T");
    CHECK(solve(m).status == SolveStatus::Infeasible);
    CHECK(solve_lp_relaxation(m).status == LpRelaxationStatus::Infeasible);
}

TEST_CASE("binary sum") {
    MilpModel m;
    auto a = m.add_binary("a");
    auto b = m.add_binary("b");
    SUBCASE("half is infeasible over binaries but not the relaxation") {
        m.add_constraint(LinearExpr().add(1.0, a).add(1.0, b), Sense::Equal, 1.0, "T");
        m.add_constraint(LinearExpr().add(1.0, a).add(-1.0, b), Sense::Equal, 0.0, "T");
        CHECK(solve_lp_relaxation(m).status == LpRelaxationStatus::Feasible);
        CHECK(solve(m).status == SolveStatus::Infeasible);
    }
    SUBCASE("one of two") {
        m.add_constraint(LinearExpr().add(1.0, a).add(1.0, b), Sense::Equal, 1.0, "T");
        auto r = solve(m);
        REQUIRE(r.status == SolveStatus::Feasible);
        CHECK(r.assignment[a] + r.assignment[b] == doctest::Approx(1.0));
        CHECK(check_assignment(m, r.assignment).empty());
    }
}

TEST_CASE("empty model is feasible") {
    MilpModel m;
    auto r = solve(m);
    CHECK(r.status == SolveStatus::Feasible);
    CHECK(r.assignment.values.empty());
}

TEST_CASE("check_assignment reports each kind") {
    MilpModel m;
    auto x = m.add_continuous("x", 0.0, 1.0);
    auto b = m.add_binary("b");
    m.add_constraint(LinearExpr().add(1.0, x).add(1.0, b), Sense::LessEqual, 1.0, "ROW");
    Assignment good{{0.5, 0.0}};
    CHECK(check_assignment(m, good).empty());
    Assignment bad{{1.5, 0.5}};
    auto v = check_assignment(m, bad);
    REQUIRE(v.size() == 3);
    CHECK(v[0].kind == Violation::Kind::Bound);
    CHECK(v[1].kind == Violation::Kind::Integrality);
    CHECK(v[2].kind == Violation::Kind::Constraint);
    CHECK(v[2].tag == "ROW");
    CHECK_THROWS_AS(check_assignment(m, Assignment{{0.0}}), ltr::ModelError);
}

TEST_CASE("config validation") {
    SolverConfig c;
    c.timeout_seconds = 0.0;
    CHECK_THROWS_AS(c.validate(), ltr::DomainError);
    c.timeout_seconds = 1.0;
    c.feasibility_tolerance = -1.0;
    CHECK_THROWS_AS(c.validate(), ltr::DomainError);
}

TEST_CASE("node limit reports timeout") {
    std::mt19937_64 rng(5);
    // Parity constraint: many binaries, LP relaxation feasible at every node.
    MilpModel m;
    LinearExpr sum;
    for (int k = 0; k < 16; ++k) {
        sum.add(2.0, m.add_binary("b" + std::to_string(k)));
    }
    m.add_constraint(sum, Sense::Equal, 15.0, "ODD");
    SolverConfig cfg;
    cfg.node_limit = 5;
    cfg.probing_group_bits = 0;
    auto r = solve(m, cfg);
    CHECK(r.status == SolveStatus::TimedOut);
    CHECK(r.stats.nodes == 5);
}

TEST_CASE("simplex agrees with Fourier-Motzkin on random LPs") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int feasible = 0;
    for (int trial = 0; trial < 300; ++trial) {
        auto m = oracle::random_milp(rng, 0, 3, 2 + trial % 7);
        const bool expected = oracle::milp_feasible_by_enumeration(m);
        auto lp = solve_lp_relaxation(m);
        REQUIRE(lp.status != LpRelaxationStatus::NumericalFailure);
        CHECK((lp.status == LpRelaxationStatus::Feasible) == expected);
        if (lp.status == LpRelaxationStatus::Feasible) {
            ++feasible;
            CHECK(check_assignment(m, lp.assignment).empty());
        }
    }
    CHECK(feasible > 50);
    CHECK(feasible < 280);
}

TEST_CASE("branch and bound agrees with enumeration") {
    std::mt19937_64 rng(99);
    int feasible = 0;
    for (int trial = 0; trial < 120; ++trial) {
        const std::size_t bins = 1 + trial % 10;
        auto m = oracle::random_milp(rng, bins, 2, 3 + trial % 6);
        const bool expected = oracle::milp_feasible_by_enumeration(m);
        for (auto rule : {BranchingRule::MostFractional, BranchingRule::FirstFractional}) {
            SolverConfig cfg;
            cfg.branching_rule = rule;
            auto r = solve(m, cfg);
            REQUIRE(r.status != SolveStatus::TimedOut);
            REQUIRE(r.status != SolveStatus::NumericalFailure);
            CHECK((r.status == SolveStatus::Feasible) == expected);
            if (r.status == SolveStatus::Feasible) {
                CHECK(check_assignment(m, r.assignment).empty());
            }
        }
        feasible += expected;
    }
    CHECK(feasible > 20);
    CHECK(feasible < 110);
}

TEST_CASE("propagation is sound on random models") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        auto m = oracle::random_milp(rng, 4, 2, 4);
        auto r = solve(m);
        auto t = tighten_bounds(m);
        if (r.status == SolveStatus::Feasible) {
            REQUIRE_FALSE(t.infeasible);
            for (std::size_t k = 0; k < m.variable_count(); ++k) {
                CHECK(r.assignment.values[k] >= t.lo[k] - 1e-6);
                CHECK(r.assignment.values[k] <= t.hi[k] + 1e-6);
            }
        }
        if (t.infeasible) {
            CHECK(r.status == SolveStatus::Infeasible);
        }
    }
}

TEST_CASE("dense LP size cap") {
    ltr::milp::detail::LpProblem p;
    p.col_lo.assign(10, 0.0);
    p.col_hi.assign(10, 1.0);
    for (int r = 0; r < 10; ++r) {
        p.rows.push_back({{0u, 1u}, {1.0, 1.0}, -1.0, 1.0});
    }
    ltr::milp::detail::LpOptions o;
    o.max_dense_entries = 10;
    CHECK(ltr::milp::detail::solve_feasibility(p, o).status == ltr::milp::detail::LpStatus::TooLarge);
}

TEST_CASE("solution file parsing") {
    MilpModel m;
    m.add_continuous("x", -1.0, 1.0);
    m.add_binary("b");
    auto r = parse_solution_file(m, "optimal\nx 0.25\nb 1\n");
    REQUIRE(r.status == SolveStatus::Feasible);
    CHECK(r.assignment.values == std::vector<double>{0.25, 1.0});
    CHECK(parse_solution_file(m, "infeasible\n").status == SolveStatus::Infeasible);
    CHECK(parse_solution_file(m, "").status == SolveStatus::NumericalFailure);
    CHECK(parse_solution_file(m, "garbage").status == SolveStatus::NumericalFailure);
    CHECK_THROWS_AS(parse_solution_file(m, "optimal\ny 1\n"), ltr::ParseError);
    CHECK_THROWS_AS(parse_solution_file(m, "optimal\nx\n"), ltr::ParseError);
}
