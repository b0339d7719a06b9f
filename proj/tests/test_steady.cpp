#include <doctest.h>

#include <cmath>
#include <random>

#include "emtk/dc.hpp"
#include "emtk/error.hpp"
#include "emtk/steady.hpp"
#include "emtk/transient.hpp"
#include "support.hpp"

using namespace emtk;
using namespace emtk::testing;

namespace {

SteadyStressProfile solve(const InterconnectGraph& g, const MaterialParams& p)
{
    return steady_state(g, solve_dc(g, p), p);
}

}  // namespace

TEST_CASE("single segment steady profile is linear and centred on sigma_T")
{
    auto p = reference_material();
    p.sigma_T = 1.5e7;
    const double beta = derived_params(p).beta;
    const double L = 3e-5, j = 2e9;
    const auto g = single_segment(L, j);
    const auto prof = solve(g, p);
    CHECK(prof.node_stress[0] == doctest::Approx(p.sigma_T + beta * j * L / 2).epsilon(1e-12));
    CHECK(prof.node_stress[1] == doctest::Approx(p.sigma_T - beta * j * L / 2).epsilon(1e-12));
    CHECK(prof.segment_slope[0] == doctest::Approx(-beta * j).epsilon(1e-12));
    CHECK(prof.stress_along(g, 0, 0.5) == doctest::Approx(p.sigma_T).epsilon(1e-9));
    CHECK(prof.max_tensile.node == 0);
    CHECK(prof.min_compressive.node == 1);
}

TEST_CASE("zero current leaves sigma_T everywhere")
{
    auto p = reference_material();
    p.sigma_T = -2e6;
    const auto g = line({1e-5, 2e-5, 4e-5}, {0.0, 0.0, 0.0});
    const auto prof = solve(g, p);
    for (double s : prof.node_stress) CHECK(s == doctest::Approx(p.sigma_T).epsilon(1e-15));
}

TEST_CASE("two segments carrying j then 2j")
{
    const auto p = reference_material();
    const double beta = derived_params(p).beta;
    const double L = 2e-5, j = 1e9;
    const auto g = line({L, L}, {j, 2 * j});
    const auto prof = solve(g, p);
    // relative: s1 = s0 - beta j L, s2 = s1 - 2 beta j L; equal areas so the
    // mean is (s0 + 2 s1 + s2) / 4 = 0.
    const double s0 = beta * j * L * 5.0 / 4.0;
    CHECK(prof.node_stress[0] == doctest::Approx(s0).epsilon(1e-12));
    CHECK(prof.node_stress[1] == doctest::Approx(s0 - beta * j * L).epsilon(1e-12));
    CHECK(prof.node_stress[2] == doctest::Approx(s0 - 3 * beta * j * L).epsilon(1e-12));
}

TEST_CASE("immortality and Blech agree on single segments")
{
    const auto p = reference_material();
    const double beta = derived_params(p).beta;
    const double jLc = critical_jl(p);
    CHECK(jLc == doctest::Approx(2 * p.sigma_crit / beta).epsilon(1e-15));
    for (double f : {0.5, 0.99, 1.01, 2.0}) {
        const double L = 2e-5;
        const double j = f * jLc / L;
        const auto r = immortality_check(solve(single_segment(L, j), p), p);
        CHECK(r.immortal == blech_check(j * L, p));
        CHECK(r.immortal == (f < 1.0));
        CHECK(r.margin == doctest::Approx(p.sigma_crit - r.max_tensile));
        CHECK(r.steady_state_only);
    }
    CHECK(blech_check(jLc, p));
    CHECK_THROWS_AS(blech_check(-1.0, p), InputError);
}

TEST_CASE("sigma_T does not move the Blech limit")
{
    auto p = reference_material();
    const double a = critical_jl(p);
    p.sigma_T = 2e7;
    CHECK(critical_jl(p) == a);
}

TEST_CASE("steady state conserves volume-weighted stress and ignores the tree choice")
{
    auto p = reference_material();
    p.sigma_T = 3e6;
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        GraphGenOptions o;
        o.max_segments = 20;
        o.extra_chords = trial % 3;
        const auto g = random_graph(rng, o);
        const auto dc = solve_dc(g, p);
        const auto base = steady_state(g, dc, p);
        const double scale = std::max(1.0, max_abs(base.node_stress));
        CHECK(volume_weighted_mean(g, base.node_stress) == doctest::Approx(p.sigma_T).scale(scale).epsilon(1e-10));
        const auto alt = steady_state(g, dc, p, spanning_tree(g, random_priority(rng, g.segment_count())));
        for (std::size_t n = 0; n < g.node_count(); ++n)
            CHECK(alt.node_stress[n] == doctest::Approx(base.node_stress[n]).scale(scale).epsilon(1e-9));
        // Each segment drops by beta j L between its ends.
        const double beta = derived_params(p).beta;
        for (std::size_t s = 0; s < g.segment_count(); ++s) {
            const double drop = base.node_stress[g.index_a(s)] - base.node_stress[g.index_b(s)];
            CHECK(drop == doctest::Approx(beta * dc.segment_densities[s] * g.segments()[s].length)
                               .scale(scale)
                               .epsilon(1e-9));
        }
    }
}

TEST_CASE("steady stress is linear in the densities on trees")
{
    const auto p = reference_material();
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-2e9, 2e9);
    for (int trial = 0; trial < 20; ++trial) {
        GraphGenOptions o;
        o.max_segments = 12;
        const auto g = random_graph(rng, o);
        std::vector<double> j1(g.segment_count()), j2(g.segment_count()), j12(g.segment_count());
        for (std::size_t s = 0; s < j1.size(); ++s) {
            j1[s] = u(rng);
            j2[s] = u(rng);
            j12[s] = j1[s] + j2[s];
        }
        const auto a = solve(g.with_densities(j1), p);
        const auto b = solve(g.with_densities(j2), p);
        const auto c = solve(g.with_densities(j12), p);
        const double scale = max_abs(c.node_stress) + max_abs(a.node_stress) + max_abs(b.node_stress);
        for (std::size_t n = 0; n < g.node_count(); ++n)
            CHECK(c.node_stress[n] == doctest::Approx(a.node_stress[n] + b.node_stress[n]).scale(scale).epsilon(1e-12));
    }
}

TEST_CASE("a multisegment net can be mortal with every segment under the Blech limit")
{
    const auto p = reference_material();
    const double jLc = critical_jl(p);
    const double L = 2e-5;
    const double j = 0.9 * jLc / L;
    const auto g = line({L, L, L}, {j, j, j});
    for (const auto& s : g.segments()) CHECK(blech_check(j * s.length, p));
    CHECK_FALSE(immortality_check(solve(g, p), p).immortal);
}

TEST_CASE("worst-case bounds")
{
    const auto p = reference_material();
    const double beta = derived_params(p).beta;
    SUBCASE("degenerate ranges reproduce the exact profile")
    {
        std::mt19937_64 rng(41);
        for (int trial = 0; trial < 10; ++trial) {
            GraphGenOptions o;
            o.max_segments = 15;
            o.extra_chords = trial % 2 ? 2 : 0;
            const auto g = random_graph(rng, o);
            const auto dc = solve_dc(g, p);
            const auto exact = steady_state(g, dc, p);
            std::vector<DensityRange> r;
            for (double j : dc.segment_densities) r.push_back({j, j});
            const auto wb = worst_case_bounds(g, r, p);
            const double scale = max_abs(exact.node_stress);
            for (std::size_t n = 0; n < g.node_count(); ++n) {
                CHECK(wb.upper[n] == doctest::Approx(exact.node_stress[n]).scale(scale).epsilon(1e-9));
                const double rel = exact.node_stress[n] - exact.node_stress[0];
                CHECK(wb.relative_upper[n] == doctest::Approx(rel).scale(scale).epsilon(1e-9));
                CHECK(wb.relative_lower[n] == doctest::Approx(rel).scale(scale).epsilon(1e-9));
            }
        }
    }
    SUBCASE("bounds cover every snapshot of a two-phase current")
    {
        // Parallel pair fed from either end in alternate phases.
        std::vector<Node> a_nodes{{0, true, 2e-4}, {1, true, -2e-4}};
        std::vector<Node> b_nodes{{0, true, -1e-4}, {1, true, 1e-4}};
        const std::vector<Segment> segs{make_segment(0, 0, 1, 1e-5), make_segment(1, 0, 1, 3e-5)};
        const InterconnectGraph ga(a_nodes, segs), gb(b_nodes, segs);
        const auto da = solve_dc(ga, p), db = solve_dc(gb, p);
        std::vector<DensityRange> r(2);
        for (std::size_t s = 0; s < 2; ++s)
            r[s] = {std::min(da.segment_densities[s], db.segment_densities[s]),
                    std::max(da.segment_densities[s], db.segment_densities[s])};
        const auto wb = worst_case_bounds(ga, r, p);
        for (const auto* prof : {&da, &db}) {
            const auto sp = steady_state(ga, *prof, p);
            for (std::size_t n = 0; n < 2; ++n) CHECK(sp.node_stress[n] <= wb.upper[n] * (1 + 1e-12));
        }
    }
    SUBCASE("zero currents give sigma_T")
    {
        const auto g = line({1e-5, 1e-5}, {0.0, 0.0});
        const auto wb = worst_case_bounds(g, std::vector<double>{0.0, 0.0}, p);
        for (double u : wb.upper) CHECK(u == doctest::Approx(p.sigma_T));
    }
    SUBCASE("magnitude form on a single segment")
    {
        const double L = 1e-5, jm = 1e9;
        const auto g = single_segment(L, jm);
        const auto wb = worst_case_bounds(g, std::vector<double>{jm}, p);
        // Either direction can put beta jm L / 2 on either end.
        for (double u : wb.upper) CHECK(u >= beta * jm * L / 2 * (1 - 1e-12));
        CHECK(wb.relative_upper[1] == doctest::Approx(beta * jm * L).epsilon(1e-12));
        CHECK(wb.relative_lower[1] == doctest::Approx(-beta * jm * L).epsilon(1e-12));
    }
    SUBCASE("bad ranges")
    {
        const auto g = single_segment(1e-5, 1e9);
        CHECK_THROWS_AS(worst_case_bounds(g, std::vector<DensityRange>{{1.0, 0.0}}, p), InputError);
        CHECK_THROWS_AS(worst_case_bounds(g, std::vector<DensityRange>{}, p), InputError);
    }
}

TEST_CASE("PDN constraints")
{
    auto p = reference_material();
    const double beta = derived_params(p).beta;
    SUBCASE("single segment")
    {
        const double L = 1e-5;
        const auto g = single_segment(L, 1e9);
        const auto cons = emit_pdn_constraints(g, p);
        REQUIRE(cons.size() == 2);
        CHECK(cons[0].coeff[0] == doctest::Approx(beta * L / 2).epsilon(1e-12));
        CHECK(cons[1].coeff[0] == doctest::Approx(-beta * L / 2).epsilon(1e-12));
        CHECK(cons[0].rhs == p.sigma_crit - p.sigma_T);
        CHECK(satisfies(cons, {0.0}));
        CHECK(satisfies(cons, {critical_jl(p) / L}));
        CHECK_FALSE(satisfies(cons, {1.01 * critical_jl(p) / L}));
        CHECK_THROWS_AS(satisfies(cons, {1.0, 2.0}), InputError);
        const auto lp = format_lp(g, cons);
        CHECK(lp.find("Subject To") != std::string::npos);
        CHECK(lp.find("node_0:") != std::string::npos);
        CHECK(lp.find(" j_0 free") != std::string::npos);
        CHECK(lp.rfind("End\n") == lp.size() - 4);
    }
    SUBCASE("constraints agree with the steady check on random scalings")
    {
        std::mt19937_64 rng(53);
        std::uniform_real_distribution<double> scale(0.0, 4.0);
        int mortal = 0, immortal = 0;
        for (int trial = 0; trial < 100; ++trial) {
            GraphGenOptions o;
            o.max_segments = 10;
            const auto g = random_graph(rng, o);
            const auto dc = solve_dc(g, p);
            const double k = scale(rng) * 2e9 / std::max(1.0, max_abs(dc.segment_densities));
            std::vector<double> j = dc.segment_densities;
            for (double& x : j) x *= k;
            const auto cons = emit_pdn_constraints(g, p);
            const auto r = immortality_check(steady_state(g.with_densities(j), solve_dc(g.with_densities(j), p), p), p);
            CHECK(satisfies(cons, j) == r.immortal);
            (r.immortal ? immortal : mortal)++;
        }
        CHECK(mortal > 5);
        CHECK(immortal > 5);
    }
}
