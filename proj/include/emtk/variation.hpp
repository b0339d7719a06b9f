// Mean stress under activation-energy variation.
//
// With Ea ~ N(Ea0, var_Ea), kappa is lognormal and its mean is
// (1 + lambda) times nominal, lambda = exp(var_Ea / 2(kT)^2) - 1. Both the
// stress conductances and the flux sources scale with kappa, so to first
// order the moments of the mean perturbation follow from the nominal ones:
// m_k = -k * lambda * M_k.
//
// Moments are of the transfer H(s) = (G + sC)^{-1} J whose step response is
// sigma(t) - sigma_T. They are stored in a scaled frequency s' = s * tau, so
// scaled moment k equals M_k / tau^k (units of Pa).
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "emtk/model.hpp"
#include "emtk/transient.hpp"

namespace emtk {

double compute_lambda(const MaterialParams& p);

struct MomentSet {
    std::size_t order = 0;
    double time_scale = 1.0;  // tau, s
    double lambda = 0.0;
    std::vector<Eigen::VectorXd> M;  // nominal, scaled, k = 0..order
    std::vector<Eigen::VectorXd> m;  // perturbation, scaled

    /// Checks m_0 = 0 and m_k = -k lambda M_k to `tol` relative.
    bool consistent(double tol = 1e-8) const;
};

/// Characteristic time L_max^2 / kappa of the discretized system.
double default_time_scale(const DiscretizedSystem& sys);

/// M_0..M_K (scaled). Every solve pins the C-weighted sum of the moment to
/// zero; throws AnalysisError if J is not balanced.
std::vector<Eigen::VectorXd> nominal_moments(const DiscretizedSystem& sys, std::size_t K, double time_scale);
std::vector<Eigen::VectorXd> nominal_moments(const DiscretizedSystem& sys, std::size_t K);

struct PerturbationMoments {
    std::vector<Eigen::VectorXd> recursion;    // G m_k = lambda C M_{k-1} - C m_{k-1}
    std::vector<Eigen::VectorXd> closed_form;  // -k lambda M_k
    double max_relative_gap = 0.0;
};

/// Computes both routes and throws AnalysisError if they differ by more
/// than 1e-8 relative.
PerturbationMoments perturbation_moments(const DiscretizedSystem& sys, const std::vector<Eigen::VectorXd>& M,
                                         double lambda, double time_scale);

MomentSet build_moment_set(const DiscretizedSystem& sys, std::size_t K, double lambda);

/// Pole/residue model of one node's transfer, in scaled time.
struct ReducedModel {
    std::vector<double> poles;     // scaled, all < 0
    std::vector<double> residues;  // for H(s) = sum r / (s - p)
    bool reduced_order = false;    // fell back below ceil(K/2)
};

/// Moment-matched rational approximation (AWE) of order ceil(K/2) from
/// moments 0..K, dropping any right-half-plane or complex poles and
/// falling back to lower orders when the Hankel system is singular.
ReducedModel fit_reduced_model(const std::vector<double>& moments);

/// Step response of the reduced model at scaled time t'.
double step_response(const ReducedModel& rm, double t_scaled);

/// Mean-shift model sum_i a_i/(s - p_i) + b_i/(s - p_i)^2 on the nominal
/// poles, fitted to the perturbation moments.
struct ShiftModel {
    std::vector<double> poles;
    std::vector<double> a;
    std::vector<double> b;
};

ShiftModel fit_shift_model(const ReducedModel& nominal, const std::vector<double>& perturbation_moments);
double step_response(const ShiftModel& sm, double t_scaled);

struct MeanShift {
    std::vector<double> times;
    std::vector<std::size_t> nodes;               // matrix indices reported
    std::vector<std::vector<double>> shift;       // [time][node], Pa
    std::vector<std::vector<double>> nominal_awe; // [time][node], sigma_T included
    std::vector<std::string> warnings;
};

/// E[delta sigma](t) at the graph nodes (or the given matrix indices).
MeanShift mean_stress_shift(const DiscretizedSystem& sys, const MaterialParams& p, const std::vector<double>& times,
                            std::size_t K = 8, std::vector<std::size_t> nodes = {});

struct MonteCarloOptions {
    std::size_t samples = 1000;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    TransientOptions transient;  // sample_times are overwritten with `times`
};

struct MonteCarloResult {
    std::vector<double> times;
    std::vector<std::size_t> nodes;
    std::vector<std::vector<double>> mean;    // [time][node]
    std::vector<std::vector<double>> stderr_; // [time][node]
    std::vector<double> kappa_samples;
};

/// Ea ~ Normal(Ea, sqrt(var_Ea)); each sample reruns the transient solver
/// with kappa recomputed. Samples are drawn up front and reduced in index
/// order, so results do not depend on the thread count.
MonteCarloResult monte_carlo_oracle(const DiscretizedSystem& sys, const MaterialParams& p,
                                    const std::vector<double>& times, const MonteCarloOptions& opt,
                                    std::vector<std::size_t> nodes = {});

}  // namespace emtk
