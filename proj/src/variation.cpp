#include "emtk/variation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

namespace emtk {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Solves G x = rhs subject to C . x = 0 for the zero-row-sum G of `sys`.
class PinnedSolver {
public:
    explicit PinnedSolver(const DiscretizedSystem& sys) : C_(sys.C)
    {
        const auto n = static_cast<Eigen::Index>(sys.size());
        if (n > 1) {
            const SpMat G = sys.G();
            solver_.compute(SpMat(G.bottomRightCorner(n - 1, n - 1)));
            if (solver_.info() != Eigen::Success) throw AnalysisError("moment solve: factorization failed");
        }
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const
    {
        const double total = rhs.sum();
        const double mag = rhs.cwiseAbs().sum();
        if (std::abs(total) > 1e-9 * mag)
            throw AnalysisError("moment solve: right-hand side is not balanced (sources not in range of G)");
        const auto n = rhs.size();
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        if (n > 1) x.tail(n - 1) = solver_.solve(rhs.tail(n - 1));
        x.array() -= C_.dot(x) / C_.sum();
        return x;
    }

private:
    Eigen::VectorXd C_;
    Eigen::SimplicialLDLT<SpMat> solver_;
};

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

double compute_lambda(const MaterialParams& p)
{
    if (!(p.var_Ea >= 0.0)) throw InputError("compute_lambda: var_Ea must be >= 0");
    const double var_j = p.var_Ea * constants::ev_to_joule * constants::ev_to_joule;
    const double kT = p.kT();
    return std::expm1(var_j / (2.0 * kT * kT));
}

bool MomentSet::consistent(double tol) const
{
    if (m.size() != M.size() || m.empty()) return false;
    if (inf_norm(m[0]) > tol * inf_norm(M[0])) return false;
    for (std::size_t k = 1; k < m.size(); ++k) {
        const Eigen::VectorXd expect = -static_cast<double>(k) * lambda * M[k];
        const double scale = inf_norm(expect);
        if (inf_norm(m[k] - expect) > tol * std::max(scale, 1e-300)) return false;
    }
    return true;
}

double default_time_scale(const DiscretizedSystem& sys)
{
    double L = 0.0;
    for (std::size_t s = 0; s < sys.elements.size(); ++s)
        L = std::max(L, sys.dx[s] * static_cast<double>(sys.elements[s]));
    return L * L / sys.kappa;
}

std::vector<Eigen::VectorXd> nominal_moments(const DiscretizedSystem& sys, std::size_t K, double time_scale)
{
    const PinnedSolver solver(sys);
    const Eigen::VectorXd c_scaled = sys.C / time_scale;
    std::vector<Eigen::VectorXd> M;
    M.reserve(K + 1);
    M.push_back(solver.solve(sys.J()));
    for (std::size_t k = 1; k <= K; ++k) M.push_back(solver.solve(-c_scaled.cwiseProduct(M.back())));
    return M;
}

std::vector<Eigen::VectorXd> nominal_moments(const DiscretizedSystem& sys, std::size_t K)
{
    return nominal_moments(sys, K, default_time_scale(sys));
}

PerturbationMoments perturbation_moments(const DiscretizedSystem& sys, const std::vector<Eigen::VectorXd>& M,
                                         double lambda, double time_scale)
{
    PerturbationMoments out;
    if (M.empty()) return out;
    const PinnedSolver solver(sys);
    const Eigen::VectorXd c_scaled = sys.C / time_scale;
    const auto n = M[0].size();

    out.recursion.push_back(solver.solve(Eigen::VectorXd::Zero(n)));
    out.closed_form.push_back(Eigen::VectorXd::Zero(n));
    for (std::size_t k = 1; k < M.size(); ++k) {
        const Eigen::VectorXd rhs = c_scaled.cwiseProduct(lambda * M[k - 1] - out.recursion.back());
        out.recursion.push_back(solver.solve(rhs));
        out.closed_form.push_back(-static_cast<double>(k) * lambda * M[k]);
    }

    for (std::size_t k = 0; k < M.size(); ++k) {
        const double scale = std::max({inf_norm(out.closed_form[k]), lambda * static_cast<double>(k) * inf_norm(M[k])});
        const double gap = inf_norm(out.recursion[k] - out.closed_form[k]);
        if (scale > 0.0) out.max_relative_gap = std::max(out.max_relative_gap, gap / scale);
        else if (gap > 0.0) out.max_relative_gap = std::max(out.max_relative_gap, gap / std::max(inf_norm(M[k]), 1e-300));
    }
    if (out.max_relative_gap > 1e-8)
        throw AnalysisError("perturbation moments: recursion and closed form disagree (relative gap " +
                            std::to_string(out.max_relative_gap) + ")");
    return out;
}

MomentSet build_moment_set(const DiscretizedSystem& sys, std::size_t K, double lambda)
{
    MomentSet ms;
    ms.order = K;
    ms.lambda = lambda;
    ms.time_scale = default_time_scale(sys);
    ms.M = nominal_moments(sys, K, ms.time_scale);
    ms.m = perturbation_moments(sys, ms.M, lambda, ms.time_scale).recursion;
    return ms;
}

ReducedModel fit_reduced_model(const std::vector<double>& mu)
{
    ReducedModel rm;
    const std::size_t K = mu.empty() ? 0 : mu.size() - 1;
    double scale = 0.0;
    for (double v : mu) scale = std::max(scale, std::abs(v));
    if (scale == 0.0 || K == 0) return rm;

    // mu_k = sum_i c_i x_i^k with x_i = 1/p_i and c_i = -r_i x_i.
    const std::size_t q_max = (K + 1) / 2;
    for (std::size_t q = q_max; q >= 1; --q) {
        Eigen::MatrixXd H(q, q);
        Eigen::VectorXd rhs(q);
        for (std::size_t r = 0; r < q; ++r) {
            for (std::size_t c = 0; c < q; ++c) H(r, c) = mu[r + c] / scale;
            rhs(r) = -mu[r + q] / scale;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(H);
        lu.setThreshold(1e-13);
        if (lu.rank() < static_cast<Eigen::Index>(q)) continue;
        const Eigen::VectorXd a = lu.solve(rhs);

        // Roots of x^q + a_{q-1} x^{q-1} + ... + a_0 via the companion matrix.
        std::vector<double> xs;
        bool dropped = false;
        if (q == 1) {
            xs.push_back(-a(0));
        } else {
            Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(q, q);
            for (std::size_t i = 1; i < q; ++i) comp(i, i - 1) = 1.0;
            for (std::size_t i = 0; i < q; ++i) comp(i, q - 1) = -a(i);
            Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
            for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
                const auto z = es.eigenvalues()(i);
                if (std::abs(z.imag()) > 1e-7 * std::abs(z)) {
                    dropped = true;
                    continue;
                }
                xs.push_back(z.real());
            }
        }
        std::vector<double> kept;
        for (double x : xs) {
            if (std::isfinite(x) && x < 0.0) kept.push_back(x);
            else dropped = true;
        }
        if (kept.empty()) continue;

        // Residues by least squares over all moments, columns normalised.
        const auto rows = static_cast<Eigen::Index>(K + 1);
        const auto cols = static_cast<Eigen::Index>(kept.size());
        Eigen::MatrixXd V(rows, cols);
        Eigen::VectorXd y(rows);
        for (Eigen::Index k = 0; k < rows; ++k) {
            y(k) = mu[static_cast<std::size_t>(k)] / scale;
            for (Eigen::Index i = 0; i < cols; ++i) V(k, i) = std::pow(kept[static_cast<std::size_t>(i)], static_cast<double>(k));
        }
        const Eigen::VectorXd norms = V.colwise().norm();
        for (Eigen::Index i = 0; i < cols; ++i) V.col(i) /= norms(i);
        const Eigen::VectorXd c = V.colPivHouseholderQr().solve(y).cwiseQuotient(norms) * scale;
        if (!c.allFinite()) continue;

        rm.poles.clear();
        rm.residues.clear();
        for (Eigen::Index i = 0; i < cols; ++i) {
            const double x = kept[static_cast<std::size_t>(i)];
            rm.poles.push_back(1.0 / x);
            rm.residues.push_back(-c(i) / x);
        }
        rm.reduced_order = dropped || q < q_max;
        return rm;
    }
    rm.reduced_order = true;
    return rm;
}

double step_response(const ReducedModel& rm, double t)
{
    double v = 0.0;
    for (std::size_t i = 0; i < rm.poles.size(); ++i) {
        const double p = rm.poles[i];
        v += rm.residues[i] * std::expm1(p * t) / p;
    }
    return v;
}

ShiftModel fit_shift_model(const ReducedModel& nominal, const std::vector<double>& m)
{
    ShiftModel sm;
    sm.poles = nominal.poles;
    const std::size_t q = nominal.poles.size();
    sm.a.assign(q, 0.0);
    sm.b.assign(q, 0.0);
    double scale = 0.0;
    for (double v : m) scale = std::max(scale, std::abs(v));
    if (q == 0 || scale == 0.0) return sm;

    // m_k = sum_i -a_i x_i^{k+1} + b_i (k+1) x_i^{k+2}
    const auto rows = static_cast<Eigen::Index>(m.size());
    const auto cols = static_cast<Eigen::Index>(2 * q);
    Eigen::MatrixXd A(rows, cols);
    Eigen::VectorXd y(rows);
    for (Eigen::Index k = 0; k < rows; ++k) {
        const double kk = static_cast<double>(k);
        y(k) = m[static_cast<std::size_t>(k)] / scale;
        for (std::size_t i = 0; i < q; ++i) {
            const double x = 1.0 / nominal.poles[i];
            A(k, static_cast<Eigen::Index>(i)) = -std::pow(x, kk + 1.0);
            A(k, static_cast<Eigen::Index>(q + i)) = (kk + 1.0) * std::pow(x, kk + 2.0);
        }
    }
    const Eigen::VectorXd norms = A.colwise().norm();
    for (Eigen::Index i = 0; i < cols; ++i) A.col(i) /= norms(i);
    const Eigen::VectorXd sol = A.colPivHouseholderQr().solve(y).cwiseQuotient(norms) * scale;
    for (std::size_t i = 0; i < q; ++i) {
        sm.a[i] = sol(static_cast<Eigen::Index>(i));
        sm.b[i] = sol(static_cast<Eigen::Index>(q + i));
    }
    return sm;
}

double step_response(const ShiftModel& sm, double t)
{
    // L^-1[a / (s (s-p))] = a (e^{pt} - 1) / p
    // L^-1[b / (s (s-p)^2)] = b (1 - e^{pt} + p t e^{pt}) / p^2
    double v = 0.0;
    for (std::size_t i = 0; i < sm.poles.size(); ++i) {
        const double p = sm.poles[i];
        const double e = std::exp(p * t);
        v += sm.a[i] * std::expm1(p * t) / p;
        v += sm.b[i] * (-std::expm1(p * t) + p * t * e) / (p * p);
    }
    return v;
}

MeanShift mean_stress_shift(const DiscretizedSystem& sys, const MaterialParams& p, const std::vector<double>& times,
                            std::size_t K, std::vector<std::size_t> nodes)
{
    if (K < 2) throw InputError("mean_stress_shift: order must be >= 2");
    if (nodes.empty())
        for (std::size_t i = 0; i < sys.graph_nodes; ++i) nodes.push_back(i);

    const MomentSet ms = build_moment_set(sys, K, compute_lambda(p));
    MeanShift out;
    out.times = times;
    out.nodes = nodes;
    out.shift.assign(times.size(), std::vector<double>(nodes.size(), 0.0));
    out.nominal_awe.assign(times.size(), std::vector<double>(nodes.size(), 0.0));

    for (std::size_t c = 0; c < nodes.size(); ++c) {
        const auto idx = static_cast<Eigen::Index>(nodes[c]);
        std::vector<double> mu, dm;
        for (std::size_t k = 0; k <= K; ++k) {
            mu.push_back(ms.M[k](idx));
            dm.push_back(ms.m[k](idx));
        }
        const ReducedModel rm = fit_reduced_model(mu);
        if (rm.reduced_order)
            out.warnings.push_back("node " + sys.label(nodes[c]) + ": reduced-order fit fell back to " +
                                   std::to_string(rm.poles.size()) + " poles");
        const ShiftModel sm = fit_shift_model(rm, dm);
        for (std::size_t t = 0; t < times.size(); ++t) {
            const double ts = times[t] / ms.time_scale;
            out.nominal_awe[t][c] = p.sigma_T + step_response(rm, ts);
            out.shift[t][c] = step_response(sm, ts);
        }
    }
    return out;
}

MonteCarloResult monte_carlo_oracle(const DiscretizedSystem& sys, const MaterialParams& p,
                                    const std::vector<double>& times, const MonteCarloOptions& opt,
                                    std::vector<std::size_t> nodes)
{
    if (opt.samples < 100) throw InputError("monte_carlo_oracle: at least 100 samples required");
    if (nodes.empty())
        for (std::size_t i = 0; i < sys.graph_nodes; ++i) nodes.push_back(i);

    MonteCarloResult out;
    out.times = times;
    out.nodes = nodes;

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> ea(p.Ea, std::sqrt(p.var_Ea));
    out.kappa_samples.resize(opt.samples);
    for (auto& k : out.kappa_samples) k = kappa_for_activation(p, p.var_Ea > 0.0 ? ea(rng) : p.Ea);

    const std::size_t nt = times.size();
    const std::size_t nn = nodes.size();
    std::vector<double> values(opt.samples * nt * nn, 0.0);
    TransientOptions topt = opt.transient;
    topt.sample_times = times;
    topt.detect_nucleation = false;
    topt.postvoid = false;

    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            const StressTrace tr = step_transient(sys.with_kappa(out.kappa_samples[s]), p, topt);
            for (std::size_t t = 0; t < nt; ++t)
                for (std::size_t c = 0; c < nn; ++c)
                    values[(s * nt + t) * nn + c] = tr.stress[t](static_cast<Eigen::Index>(nodes[c]));
        }
    };

    const std::size_t threads = std::max<std::size_t>(1, std::min(opt.threads, opt.samples));
    if (threads == 1) {
        run_range(0, opt.samples);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (opt.samples + threads - 1) / threads;
        for (std::size_t w = 0; w < threads; ++w) {
            const std::size_t b = w * chunk;
            const std::size_t e = std::min(opt.samples, b + chunk);
            if (b < e) pool.emplace_back(run_range, b, e);
        }
        for (auto& th : pool) th.join();
    }

    out.mean.assign(nt, std::vector<double>(nn, 0.0));
    out.stderr_.assign(nt, std::vector<double>(nn, 0.0));
    const double n = static_cast<double>(opt.samples);
    for (std::size_t t = 0; t < nt; ++t) {
        for (std::size_t c = 0; c < nn; ++c) {
            // Shifted by the first sample so identical samples reduce exactly.
            const double ref = values[t * nn + c];
            double sum = 0.0;
            for (std::size_t s = 0; s < opt.samples; ++s) sum += values[(s * nt + t) * nn + c] - ref;
            const double shift = sum / n;
            double ss = 0.0;
            for (std::size_t s = 0; s < opt.samples; ++s) {
                const double d = values[(s * nt + t) * nn + c] - ref - shift;
                ss += d * d;
            }
            out.mean[t][c] = ref + shift;
            out.stderr_[t][c] = std::sqrt(ss / (n - 1.0) / n);
        }
    }
    return out;
}

}  // namespace emtk
