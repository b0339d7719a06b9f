#include "emtk/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Core>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "emtk/transient.hpp"

namespace emtk {

namespace {

constexpr double kPi = std::numbers::pi;

// d bracket / d tau = 4 sum_m exp(-a_m^2 tau)
double bracket_slope(double tau)
{
    double sum = 0.0;
    for (std::size_t m = 0; m < 10'000'000; ++m) {
        const double a = (2.0 * static_cast<double>(m) + 1.0) * kPi;
        const double t = 4.0 * std::exp(-a * a * tau);
        sum += t;
        if (t < 1e-16 * sum) break;
    }
    return sum;
}

struct JlResidual : Eigen::DenseFunctor<double> {
    const std::vector<JlPoint>* data;

    explicit JlResidual(const std::vector<JlPoint>& d)
        : Eigen::DenseFunctor<double>(2, static_cast<int>(d.size())), data(&d)
    {
    }

    // x = (ln sigma_crit/beta, ln kappa)
    int operator()(const InputType& x, ValueType& f) const
    {
        const double s = std::exp(x(0));
        const double k = std::exp(x(1));
        for (std::size_t i = 0; i < data->size(); ++i) {
            const double b = korhonen_bracket(k * (*data)[i].t_life_over_L2);
            f(static_cast<Eigen::Index>(i)) = std::log(s) - std::log(b) - std::log((*data)[i].jL);
        }
        return 0;
    }

    int df(const InputType& x, JacobianType& J) const
    {
        const double k = std::exp(x(1));
        for (std::size_t i = 0; i < data->size(); ++i) {
            const double tau = k * (*data)[i].t_life_over_L2;
            const auto r = static_cast<Eigen::Index>(i);
            J(r, 0) = 1.0;
            J(r, 1) = -tau * bracket_slope(tau) / korhonen_bracket(tau);
        }
        return 0;
    }
};

}  // namespace

double black_mttf(double j, const MaterialParams& p)
{
    if (!(j > 0.0)) throw InputError("black_mttf: current density must be > 0");
    return p.black_A * std::pow(j, -p.black_n) * std::exp(p.Ea_joule() / p.kT());
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double ff)
{
    if (!(ff > 0.0 && ff < 1.0)) throw InputError("fail fraction must lie strictly between 0 and 1");
    // Acklam's rational approximation.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double low = 0.02425;
    double x;
    if (ff < low) {
        const double q = std::sqrt(-2.0 * std::log(ff));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (ff <= 1.0 - low) {
        const double q = ff - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-ff));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley steps; work in the smaller tail to keep the residual relative.
    for (int it = 0; it < 2; ++it) {
        const double e = x < 0.0 ? normal_cdf(x) - ff : (1.0 - ff) - normal_cdf(-x);
        const double u = e * std::sqrt(2.0 * kPi) * std::exp(0.5 * x * x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

double ff_to_z(double ff) { return normal_quantile(ff); }

double z_to_tf(double z, double t50, double sigma_ln)
{
    if (!(t50 > 0.0) || !(sigma_ln > 0.0)) throw InputError("z_to_tf: t50 and sigma_ln must be > 0");
    return t50 * std::exp(sigma_ln * z);
}

double tf_to_ff(double t_f, double t50, double sigma_ln)
{
    if (!(t_f > 0.0) || !(t50 > 0.0) || !(sigma_ln > 0.0))
        throw InputError("tf_to_ff: t_f, t50 and sigma_ln must be > 0");
    return normal_cdf((std::log(t_f) - std::log(t50)) / sigma_ln);
}

double translate_condition(double t_f_a, double j_a, double T_a, double j_b, double T_b, const MaterialParams& p)
{
    if (!(t_f_a > 0.0 && j_a > 0.0 && T_a > 0.0 && j_b > 0.0 && T_b > 0.0))
        throw InputError("translate_condition: all inputs must be > 0");
    const double ea_over_k = p.Ea_joule() / constants::boltzmann;
    return std::exp(std::log(t_f_a) + p.black_n * std::log(j_a / j_b) - ea_over_k * (1.0 / T_a - 1.0 / T_b));
}

double weakest_link(const std::vector<double>& failure_probs)
{
    // Neumaier-compensated sum; K can be in the millions.
    double log_survive = 0.0;
    double carry = 0.0;
    bool certain = false;
    for (double f : failure_probs) {
        if (!(f >= 0.0 && f <= 1.0)) throw InputError("weakest_link: probabilities must lie in [0, 1]");
        if (f == 1.0) certain = true;
        if (certain) continue;
        const double term = std::log1p(-f);
        const double sum = log_survive + term;
        if (std::abs(log_survive) >= std::abs(term)) carry += (log_survive - sum) + term;
        else carry += (term - sum) + log_survive;
        log_survive = sum;
    }
    if (certain) return 1.0;
    return -std::expm1(log_survive + carry);
}

double jl_model(double sigma_crit_over_beta, double kappa, double t_life_over_L2)
{
    const double b = korhonen_bracket(kappa * t_life_over_L2);
    if (b <= 0.0) return std::numeric_limits<double>::infinity();
    return sigma_crit_over_beta / b;
}

double life_over_L2(double sigma_crit_over_beta, double kappa, double jL)
{
    const double r = sigma_crit_over_beta / jL;
    if (r >= 0.5) return std::numeric_limits<double>::infinity();
    double lo = 0.0;
    double hi = 1e-6;
    while (korhonen_bracket(hi) < r) hi *= 2.0;
    for (int it = 0; it < 300 && hi - lo > 1e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (korhonen_bracket(mid) < r ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi) / kappa;
}

JlFit fit_jl_curve(const std::vector<JlPoint>& data, std::size_t max_evaluations)
{
    if (data.size() < 3) throw InputError("fit_jl_curve: at least three data points required");
    for (const auto& d : data)
        if (!(d.jL > 0.0) || !(d.t_life_over_L2 > 0.0) || !std::isfinite(d.jL) || !std::isfinite(d.t_life_over_L2))
            throw InputError("fit_jl_curve: jL and t_life/L^2 must be positive and finite");

    // Longest life sits nearest the asymptote (bracket -> 0.5).
    const auto longest = std::max_element(data.begin(), data.end(), [](const JlPoint& a, const JlPoint& b) {
        return a.t_life_over_L2 < b.t_life_over_L2;
    });
    const auto shortest = std::min_element(data.begin(), data.end(), [](const JlPoint& a, const JlPoint& b) {
        return a.t_life_over_L2 < b.t_life_over_L2;
    });
    JlFit fit;
    fit.initial_sigma_crit_over_beta = 0.5 * longest->jL;
    // One-term inversion: bracket ~ 0.5 - (4/pi^2) exp(-pi^2 tau).
    const double target = fit.initial_sigma_crit_over_beta / shortest->jL;
    const double arg = std::max((0.5 - target) * kPi * kPi / 4.0, 1e-12);
    fit.initial_kappa = std::max(-std::log(std::min(arg, 0.999)), 1e-6) / (kPi * kPi * shortest->t_life_over_L2);

    JlResidual functor(data);
    Eigen::LevenbergMarquardt<JlResidual> lm(functor);
    lm.setMaxfev(static_cast<Eigen::Index>(max_evaluations));
    lm.setXtol(1e-14);
    lm.setFtol(1e-14);
    Eigen::VectorXd x(2);
    x << std::log(fit.initial_sigma_crit_over_beta), std::log(fit.initial_kappa);
    const auto status = lm.minimize(x);
    if (status == Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation ||
        status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters || !x.allFinite())
        throw AnalysisError("fit_jl_curve: no convergence within the evaluation budget");

    fit.sigma_crit_over_beta = std::exp(x(0));
    fit.kappa = std::exp(x(1));
    fit.iterations = static_cast<std::size_t>(lm.iterations());
    Eigen::VectorXd f(static_cast<Eigen::Index>(data.size()));
    functor(x, f);
    fit.residual = f.squaredNorm();
    for (const auto& d : data)
        if (d.jL <= 2.0 * fit.sigma_crit_over_beta)
            throw AnalysisError("fit_jl_curve: data point jL = " + std::to_string(d.jL) +
                                " A/m lies at or below the fitted immortality asymptote");
    return fit;
}

}  // namespace emtk
