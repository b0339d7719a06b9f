#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "emtk/dc.hpp"
#include "emtk/error.hpp"
#include "emtk/steady.hpp"
#include "emtk/transient.hpp"
#include "emtk/variation.hpp"
#include "support.hpp"

using namespace emtk;
using namespace emtk::testing;

namespace {

DiscretizedSystem build(const InterconnectGraph& g, const MaterialParams& p, double dx)
{
    return discretize(g, solve_dc(g, p), p, dx);
}

// Modal expansion of (G + sC)^-1 J from a dense generalized eigensolve.
struct Modes {
    Eigen::VectorXd mu;
    Eigen::MatrixXd V;
    Eigen::VectorXd weight;  // v^T J per mode
};

Modes modes(const DiscretizedSystem& sys)
{
    const Eigen::MatrixXd G(sys.G());
    const Eigen::MatrixXd C = sys.C.asDiagonal();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(G, C);
    Modes m;
    m.mu = es.eigenvalues();
    m.V = es.eigenvectors();
    m.weight = m.V.transpose() * sys.J();
    return m;
}

double modal_moment(const Modes& m, Eigen::Index node, std::size_t k, double tau)
{
    double v = 0.0;
    const double mu_floor = 1e-9 * m.mu.maxCoeff();
    for (Eigen::Index i = 0; i < m.mu.size(); ++i) {
        if (m.mu(i) <= mu_floor) continue;
        v += m.V(node, i) * m.weight(i) * std::pow(-1.0, static_cast<double>(k)) /
             std::pow(m.mu(i), static_cast<double>(k + 1)) / std::pow(tau, static_cast<double>(k));
    }
    return v;
}

double modal_step(const Modes& m, Eigen::Index node, double t)
{
    double v = 0.0;
    const double mu_floor = 1e-9 * m.mu.maxCoeff();
    for (Eigen::Index i = 0; i < m.mu.size(); ++i) {
        if (m.mu(i) <= mu_floor) continue;
        v += m.V(node, i) * m.weight(i) * -std::expm1(-m.mu(i) * t) / m.mu(i);
    }
    return v;
}

}  // namespace

TEST_CASE("lambda from the activation-energy variance")
{
    auto p = reference_material();
    p.var_Ea = 0.0;
    CHECK(compute_lambda(p) == 0.0);
    p.var_Ea = 0.05 * 0.05;
    const double kT_ev = p.kT() / constants::ev_to_joule;
    CHECK(compute_lambda(p) == doctest::Approx(std::exp(p.var_Ea / (2 * kT_ev * kT_ev)) - 1.0).epsilon(1e-12));
    p.var_Ea = 1e-12;
    CHECK(compute_lambda(p) == doctest::Approx(p.var_Ea / (2 * kT_ev * kT_ev)).epsilon(1e-6));
    p.var_Ea = -1.0;
    CHECK_THROWS_AS(compute_lambda(p), InputError);
}

TEST_CASE("nominal moments")
{
    auto p = reference_material();
    p.sigma_T = 2e6;
    SUBCASE("zero sources give zero moments")
    {
        const auto g = line({1e-5, 2e-5}, {0.0, 0.0});
        const auto sys = build(g, p, 1e-6);
        for (const auto& M : nominal_moments(sys, 4)) CHECK(M.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("M0 is the steady state minus sigma_T")
    {
        const auto g = line({1e-5, 2e-5, 1.5e-5}, {1e9, -2e9, 5e8});
        const auto dc = solve_dc(g, p);
        const auto sys = discretize(g, dc, p, 1e-6);
        const auto M = nominal_moments(sys, 3);
        const auto ss = network_steady_state(sys, p.sigma_T);
        const double scale = (ss.array() - p.sigma_T).abs().maxCoeff();
        for (Eigen::Index i = 0; i < ss.size(); ++i)
            CHECK(M[0](i) == doctest::Approx(ss(i) - p.sigma_T).scale(scale).epsilon(1e-10));
        for (const auto& Mk : M) CHECK(std::abs(sys.C.dot(Mk)) <= 1e-10 * sys.C.sum() * scale);
    }
    SUBCASE("moments match a dense modal expansion")
    {
        std::mt19937_64 rng(101);
        for (int trial = 0; trial < 5; ++trial) {
            GraphGenOptions o;
            o.max_segments = 5;
            o.extra_chords = trial % 2;
            const auto g = random_graph(rng, o);
            const auto sys = build(g, p, g.min_length() / 4);
            const double tau = default_time_scale(sys);
            const auto M = nominal_moments(sys, 5, tau);
            const auto md = modes(sys);
            for (std::size_t k = 0; k <= 5; ++k) {
                const double scale = M[k].cwiseAbs().maxCoeff();
                for (Eigen::Index n = 0; n < static_cast<Eigen::Index>(sys.graph_nodes); ++n)
                    CHECK(M[k](n) == doctest::Approx(modal_moment(md, n, k, tau)).scale(scale).epsilon(1e-7));
            }
        }
    }
}

TEST_CASE("reduced model step response follows the modal step response")
{
    const auto p = reference_material();
    const double L = 1e-5, j = 2e9;
    const auto g = single_segment(L, j);
    const auto sys = build(g, p, L / 4);
    const double tau = default_time_scale(sys);
    const auto M = nominal_moments(sys, 8, tau);
    const auto md = modes(sys);
    std::vector<double> mu;
    for (const auto& Mk : M) mu.push_back(Mk(0));
    const auto rm = fit_reduced_model(mu);
    for (double pole : rm.poles) CHECK(pole < 0.0);
    const double scale = derived_params(p).beta * j * L;
    for (double ts : {0.001, 0.01, 0.1, 0.5, 2.0, 10.0})
        CHECK(step_response(rm, ts) == doctest::Approx(modal_step(md, 0, ts * tau)).scale(scale).epsilon(1e-6));
}

TEST_CASE("perturbation moments")
{
    auto p = reference_material();
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        GraphGenOptions o;
        o.max_segments = 6;
        const auto g = random_graph(rng, o);
        const auto sys = build(g, p, default_dx(g));
        const double tau = default_time_scale(sys);
        const std::size_t K = 1 + trial % 6;
        const auto M = nominal_moments(sys, K, tau);

        const auto zero = perturbation_moments(sys, M, 0.0, tau);
        for (const auto& m : zero.recursion) CHECK(m.cwiseAbs().maxCoeff() <= 1e-12 * M[0].cwiseAbs().maxCoeff());

        const double lambda = 0.01 * (trial + 1);
        const auto pm = perturbation_moments(sys, M, lambda, tau);
        CHECK(pm.max_relative_gap <= 1e-8);
        CHECK(pm.recursion[0].cwiseAbs().maxCoeff() <= 1e-12 * M[0].cwiseAbs().maxCoeff());
        if (K >= 1) {
            const Eigen::VectorXd expect = -lambda * M[1];
            CHECK((pm.recursion[1] - expect).cwiseAbs().maxCoeff() <= 1e-8 * expect.cwiseAbs().maxCoeff());
        }
        const auto ms = build_moment_set(sys, K, lambda);
        CHECK(ms.consistent());
        CHECK(ms.lambda == lambda);
        CHECK(ms.M.size() == K + 1);
    }
}

TEST_CASE("mean stress shift")
{
    auto p = reference_material();
    const double L = 2e-5, j = 1e9;
    const auto g = line({L, L / 2}, {j, 2 * j});
    const auto sys = build(g, p, 1e-6);
    const double tau = default_time_scale(sys);
    const std::vector<double> times{0.01 * tau, 0.1 * tau, tau, 100 * tau};

    p.var_Ea = 0.0;
    const auto none = mean_stress_shift(sys, p, times);
    for (const auto& row : none.shift)
        for (double v : row) CHECK(v == 0.0);

    p.var_Ea = 1e-4;
    const auto a = mean_stress_shift(sys, p, times);
    const double la = compute_lambda(p);
    p.var_Ea = 4e-4;
    const auto b = mean_stress_shift(sys, p, times);
    const double lb = compute_lambda(p);
    const double scale = derived_params(p).beta * j * L;
    double largest = 0.0;
    for (std::size_t t = 0; t < times.size(); ++t)
        for (std::size_t n = 0; n < a.nodes.size(); ++n) {
            CHECK(b.shift[t][n] == doctest::Approx(a.shift[t][n] * lb / la).scale(scale).epsilon(1e-9));
            largest = std::max(largest, std::abs(a.shift[t][n]));
        }
    CHECK(largest > 0.0);
    // The steady state does not depend on kappa, so the shift dies out.
    for (double v : a.shift.back()) CHECK(std::abs(v) <= 1e-6 * largest);
    CHECK_THROWS_AS(mean_stress_shift(sys, p, times, 1), InputError);
}

TEST_CASE("Monte Carlo oracle")
{
    auto p = reference_material();
    const double L = 1e-5, j = 2e9;
    const auto g = single_segment(L, j);
    const auto sys = build(g, p, L / 10);
    const double tau = default_time_scale(sys);
    const std::vector<double> times{0.05 * tau, 0.3 * tau};
    MonteCarloOptions mo;
    mo.samples = 200;
    mo.transient.dt = 1e-3 * tau;
    mo.transient.ramp = 1.05;
    mo.transient.dt_max = 0.01 * tau;

    SUBCASE("no variance, no spread")
    {
        p.var_Ea = 0.0;
        const auto r = monte_carlo_oracle(sys, p, times, mo);
        for (const auto& row : r.stderr_)
            for (double v : row) CHECK(v == 0.0);
        auto topt = mo.transient;
        topt.sample_times = times;
        const auto tr = step_transient(sys, p, topt);
        for (std::size_t t = 0; t < times.size(); ++t) CHECK(r.mean[t][0] == tr.stress[t](0));
    }
    SUBCASE("thread count does not change the result")
    {
        p.var_Ea = 4e-4;
        mo.threads = 1;
        const auto a = monte_carlo_oracle(sys, p, times, mo);
        mo.threads = 4;
        const auto b = monte_carlo_oracle(sys, p, times, mo);
        CHECK(a.mean == b.mean);
        CHECK(a.stderr_ == b.stderr_);
        CHECK(a.kappa_samples == b.kappa_samples);
    }
    SUBCASE("standard error shrinks as one over root n")
    {
        p.var_Ea = 4e-4;
        mo.samples = 400;
        const auto a = monte_carlo_oracle(sys, p, times, mo);
        mo.samples = 1600;
        const auto b = monte_carlo_oracle(sys, p, times, mo);
        const double ratio = a.stderr_[0][0] / b.stderr_[0][0];
        CHECK(ratio > 1.6);
        CHECK(ratio < 2.5);
    }
    SUBCASE("small variance: the shift model sits inside the sampling noise")
    {
        p.var_Ea = 1e-8;
        mo.samples = 2000;
        mo.threads = 4;
        const auto mc = monte_carlo_oracle(sys, p, times, mo);
        auto nominal = p;
        nominal.var_Ea = 0.0;
        auto topt = mo.transient;
        topt.sample_times = times;
        const auto tr = step_transient(sys, nominal, topt);
        const auto sh = mean_stress_shift(sys, p, times);
        for (std::size_t t = 0; t < times.size(); ++t) {
            const double predicted = tr.stress[t](0) + sh.shift[t][0];
            CHECK(std::abs(predicted - mc.mean[t][0]) <= 3.0 * mc.stderr_[t][0]);
        }
    }
    SUBCASE("too few samples")
    {
        mo.samples = 99;
        CHECK_THROWS_AS(monte_carlo_oracle(sys, p, times, mo), InputError);
    }
}
