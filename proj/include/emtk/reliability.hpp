// Lifetime statistics: Black's equation, lognormal fail fractions,
// accelerated-test translation, weakest-link composition and calibration
// of (sigma_crit / beta, kappa) from single-segment jL-lifetime data.
#pragma once

#include <cstddef>
#include <vector>

#include "emtk/model.hpp"

namespace emtk {

/// t50 = A j^-n exp(Ea / kT). Throws InputError for j <= 0.
double black_mttf(double j, const MaterialParams& p);

double normal_cdf(double z);
/// Inverse of normal_cdf on (0, 1): rational initial guess plus one Halley
/// correction against erfc, accurate to ~1e-15.
double normal_quantile(double ff);

/// z = Phi^-1(ff). Throws InputError unless 0 < ff < 1.
double ff_to_z(double ff);
/// t_f = t50 exp(sigma_ln z).
double z_to_tf(double z, double t50, double sigma_ln);
/// ff = Phi((ln t_f - ln t50) / sigma_ln).
double tf_to_ff(double t_f, double t50, double sigma_ln);

/// Failure time under condition b for the same fail fraction as t_f_a under
/// condition a (same A, n, Ea).
double translate_condition(double t_f_a, double j_a, double T_a, double j_b, double T_b, const MaterialParams& p);

/// 1 - prod(1 - F_i), accumulated as compensated log1p terms.
double weakest_link(const std::vector<double>& failure_probs);

struct JlPoint {
    double jL = 0.0;             // A/m
    double t_life_over_L2 = 0.0; // s/m^2
};

struct JlFit {
    double sigma_crit_over_beta = 0.0;  // A/m
    double kappa = 0.0;                 // m^2/s
    double residual = 0.0;              // sum of squared ln(jL) residuals
    std::size_t iterations = 0;
    double initial_sigma_crit_over_beta = 0.0;
    double initial_kappa = 0.0;
};

/// jL predicted for a lifetime: (sigma_crit/beta) / bracket(kappa t / L^2).
double jl_model(double sigma_crit_over_beta, double kappa, double t_life_over_L2);

/// Inverse of jl_model: t_life / L^2 at which a segment with this jL
/// nucleates; +inf at or below the asymptote 2 sigma_crit / beta.
double life_over_L2(double sigma_crit_over_beta, double kappa, double jL);

/// Levenberg-Marquardt fit in ln(jL). Throws InputError for fewer than
/// three points or non-positive data, AnalysisError when the iteration
/// budget runs out or a point lies below the fitted asymptote.
JlFit fit_jl_curve(const std::vector<JlPoint>& data, std::size_t max_evaluations = 2000);

}  // namespace emtk
