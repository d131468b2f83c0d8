#pragma once

// Convex tonic/phasic decomposition of electrodermal activity.
//
// Model:  y = M q + T c + e
//   driver  p = A q >= 0       (sudomotor nerve activity, sparse)
//   phasic  r = M q            (driver smoothed by the discretized Bateman
//                               biexponential, ARMA with AR part A, MA part M)
//   tonic   t = T c            (cubic B-spline + offset + linear drift)
// minimize   1/2 ||e||^2 + alpha * sum(p) + 1/2 gamma ||spline coefs||^2
//
// A and M are lower-triangular bands (zero initial state), so the Hessian
// block in q is pentadiagonal. The problem is solved with a log-barrier
// interior-point method on s = A q; each Newton system is reduced to a
// small dense Schur complement over the tonic coefficients.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "biocomp/error.hpp"
#include "biocomp/signal.hpp"

namespace biocomp {

struct CvxEdaParams {
    double tau0 = 2.0;     ///< slow time constant of the SCR kernel (s)
    double tau1 = 0.7;     ///< fast time constant (s)
    double knot_s = 10.0;  ///< tonic spline knot spacing (s)
    double alpha = 8e-4;   ///< l1 weight on the driver
    double gamma = 1e-2;   ///< ridge weight on spline coefficients
    int max_iter = 500;    ///< Newton step budget
    double kkt_tol = 1e-6;

    void validate() const {
        if (!(tau1 > 0.0 && tau0 > tau1)) throw InputError("cvxeda: require tau0 > tau1 > 0");
        if (!(knot_s > 0.0)) throw InputError("cvxeda: knot spacing must be positive");
        if (!(alpha >= 0.0) || !(gamma >= 0.0)) throw InputError("cvxeda: alpha and gamma must be >= 0");
        if (max_iter < 1 || !(kkt_tol > 0.0)) throw InputError("cvxeda: invalid solver limits");
    }
};

struct EdaDecomposition {
    SampledSignal tonic;
    SampledSignal phasic;
    SampledSignal residual;
    std::vector<double> driver;
    double objective = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
    /// Objective value at the end of each barrier stage.
    std::vector<double> objective_history;
};

namespace detail {

/// Lower-triangular 3-tap band operator with zero initial state.
struct Band3 {
    std::array<double, 3> c{};

    void apply(std::span<const double> x, std::span<double> out) const {
        for (std::size_t i = 0; i < x.size(); ++i) {
            double v = c[0] * x[i];
            if (i >= 1) v += c[1] * x[i - 1];
            if (i >= 2) v += c[2] * x[i - 2];
            out[i] = v;
        }
    }
    void apply_t(std::span<const double> x, std::span<double> out) const {
        const std::size_t n = x.size();
        for (std::size_t i = 0; i < n; ++i) {
            double v = c[0] * x[i];
            if (i + 1 < n) v += c[1] * x[i + 1];
            if (i + 2 < n) v += c[2] * x[i + 2];
            out[i] = v;
        }
    }
    void solve(std::span<const double> b, std::span<double> x) const {
        for (std::size_t i = 0; i < b.size(); ++i) {
            double v = b[i];
            if (i >= 1) v -= c[1] * x[i - 1];
            if (i >= 2) v -= c[2] * x[i - 2];
            x[i] = v / c[0];
        }
    }
};

/// Cholesky factor of a symmetric positive definite pentadiagonal matrix.
struct PentaCholesky {
    std::vector<double> inv_d, l1, l2;  // 1/L(i,i), L(i,i-1), L(i,i-2)

    bool factor(const std::vector<double>& k0, const std::vector<double>& k1, const std::vector<double>& k2) {
        const std::size_t n = k0.size();
        inv_d.assign(n, 0.0);
        l1.assign(n, 0.0);
        l2.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (i >= 2) l2[i] = k2[i] * inv_d[i - 2];
            if (i >= 1) l1[i] = (k1[i] - (i >= 2 ? l2[i] * l1[i - 1] : 0.0)) * inv_d[i - 1];
            const double diag = k0[i] - l1[i] * l1[i] - l2[i] * l2[i];
            if (!(diag > 0.0)) return false;
            inv_d[i] = 1.0 / std::sqrt(diag);
        }
        return true;
    }

    /// Solves K x = b in place, skipping the leading zeros of b.
    void solve(double* x, std::size_t n, std::size_t first_nonzero = 0) const {
        if (n < 3) {
            for (std::size_t i = 0; i < n; ++i) {
                double v = x[i];
                if (i >= 1) v -= l1[i] * x[i - 1];
                x[i] = v * inv_d[i];
            }
            for (std::size_t i = n; i-- > 0;) {
                double v = x[i];
                if (i + 1 < n) v -= l1[i + 1] * x[i + 1];
                x[i] = v * inv_d[i];
            }
            return;
        }
        std::size_t i = first_nonzero;
        for (; i < 2 && i < n; ++i) x[i] = (x[i] - (i >= 1 ? l1[i] * x[i - 1] : 0.0)) * inv_d[i];
        for (; i < n; ++i) x[i] = (x[i] - l1[i] * x[i - 1] - l2[i] * x[i - 2]) * inv_d[i];
        x[n - 1] *= inv_d[n - 1];
        x[n - 2] = (x[n - 2] - l1[n - 1] * x[n - 1]) * inv_d[n - 2];
        for (std::size_t j = n - 2; j-- > 0;) x[j] = (x[j] - l1[j + 1] * x[j + 1] - l2[j + 2] * x[j + 2]) * inv_d[j];
    }

    /// Solves K X = B for all columns of a row-major B at once.
    template <typename RowMajor>
    void solve_rows(RowMajor& X) const {
        const auto n = static_cast<std::size_t>(X.rows());
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            if (i >= 2)
                X.row(r) = (X.row(r) - l1[i] * X.row(r - 1) - l2[i] * X.row(r - 2)) * inv_d[i];
            else if (i == 1)
                X.row(r) = (X.row(r) - l1[i] * X.row(r - 1)) * inv_d[i];
            else
                X.row(r) *= inv_d[i];
        }
        for (std::size_t i = n; i-- > 0;) {
            const auto r = static_cast<Eigen::Index>(i);
            if (i + 2 < n)
                X.row(r) = (X.row(r) - l1[i + 1] * X.row(r + 1) - l2[i + 2] * X.row(r + 2)) * inv_d[i];
            else if (i + 1 < n)
                X.row(r) = (X.row(r) - l1[i + 1] * X.row(r + 1)) * inv_d[i];
            else
                X.row(r) *= inv_d[i];
        }
    }
};

}  // namespace detail

/// Samples of the cubic B-spline basis function used for the tonic
/// component: a triangle of half-width `k` convolved with itself, peak 1.
inline std::vector<double> tonic_spline_kernel(std::size_t k) {
    std::vector<double> tri;
    for (std::size_t i = 1; i < k; ++i) tri.push_back(static_cast<double>(i));
    for (std::size_t i = k; i >= 1; --i) tri.push_back(static_cast<double>(i));
    std::vector<double> spl(2 * tri.size() - 1, 0.0);
    for (std::size_t i = 0; i < tri.size(); ++i)
        for (std::size_t j = 0; j < tri.size(); ++j) spl[i + j] += tri[i] * tri[j];
    const double peak = *std::max_element(spl.begin(), spl.end());
    for (auto& v : spl) v /= peak;
    return spl;
}

/// AR coefficients of the Bateman kernel discretized by the bilinear
/// transform; the MA part is (1, 2, 1).
inline std::array<double, 3> bateman_ar(double tau0, double tau1, double fs) {
    const double delta = 1.0 / fs;
    const double a1 = 1.0 / std::min(tau0, tau1);
    const double a0 = 1.0 / std::max(tau0, tau1);
    const double den = (a1 - a0) * delta * delta;
    return {(a1 * delta + 2.0) * (a0 * delta + 2.0) / den, (2.0 * a1 * a0 * delta * delta - 8.0) / den,
            (a1 * delta - 2.0) * (a0 * delta - 2.0) / den};
}

inline EdaDecomposition decompose_eda(const SampledSignal& eda, const CvxEdaParams& params = {}) {
    params.validate();
    if (eda.kind != ChannelKind::EDA) throw InputError("decompose_eda: expected an EDA channel");
    const std::size_t n = eda.size();
    if (n < 8) throw InputError("decompose_eda: need at least 8 samples");

    const double fs = eda.sample_rate;
    const detail::Band3 A{bateman_ar(params.tau0, params.tau1, fs)};
    const detail::Band3 M{{1.0, 2.0, 1.0}};
    const double alpha = params.alpha;
    const Eigen::Map<const Eigen::VectorXd> y(eda.values.data(), static_cast<Eigen::Index>(n));

    // Tonic design matrix T = [1, ramp, B-spline columns].
    const auto knot = static_cast<std::size_t>(std::max<long>(1, std::lround(params.knot_s * fs)));
    const auto spl = tonic_spline_kernel(knot);
    const auto half = static_cast<long>(spl.size() / 2);
    std::vector<std::size_t> knots;
    for (std::size_t i = 0; i < n; i += knot) knots.push_back(i);
    const auto nb = static_cast<Eigen::Index>(knots.size());
    const Eigen::Index m = 2 + nb;
    const auto ni = static_cast<Eigen::Index>(n);

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(ni, m);
    // Row ranges [lo, hi) holding the nonzeros of each column of T and of M^T T.
    std::vector<std::pair<std::size_t, std::size_t>> t_support(static_cast<std::size_t>(m), {0, n});
    auto support = t_support;
    for (Eigen::Index i = 0; i < ni; ++i) {
        T(i, 0) = 1.0;
        T(i, 1) = static_cast<double>(i + 1) / static_cast<double>(n);
    }
    for (Eigen::Index j = 0; j < nb; ++j) {
        const long center = static_cast<long>(knots[static_cast<std::size_t>(j)]);
        long lo = std::numeric_limits<long>::max(), hi = -1;
        for (std::size_t r = 0; r < spl.size(); ++r) {
            const long row = center - half + static_cast<long>(r);
            if (row < 0 || row >= static_cast<long>(n)) continue;
            T(row, 2 + j) = spl[r];
            lo = std::min(lo, row);
            hi = std::max(hi, row);
        }
        t_support[static_cast<std::size_t>(2 + j)] = {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi + 1)};
        // M^T widens the support by two rows upward.
        support[static_cast<std::size_t>(2 + j)] = {static_cast<std::size_t>(std::max(0L, lo - 2)),
                                                     static_cast<std::size_t>(hi + 1)};
    }

    // Constant blocks: H_qc = M^T T, H_cc = T^T T + Gamma.
    Eigen::MatrixXd Hqc(ni, m);
    for (Eigen::Index j = 0; j < m; ++j)
        M.apply_t(std::span<const double>(T.col(j).data(), n), std::span<double>(Hqc.col(j).data(), n));
    Eigen::MatrixXd Hcc = T.transpose() * T;
    for (Eigen::Index j = 2; j < m; ++j) Hcc(j, j) += params.gamma;
    for (Eigen::Index j = 0; j < m; ++j) Hcc(j, j) += 1e-10;

    auto sparse_mul = [&](const Eigen::MatrixXd& X, const std::vector<std::pair<std::size_t, std::size_t>>& sup,
                          const Eigen::VectorXd& v) {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(ni);
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto [lo, hi] = sup[static_cast<std::size_t>(j)];
            const auto start = static_cast<Eigen::Index>(lo), len = static_cast<Eigen::Index>(hi - lo);
            out.segment(start, len) += v[j] * X.col(j).segment(start, len);
        }
        return out;
    };
    auto sparse_mul_t = [&](const Eigen::MatrixXd& X, const std::vector<std::pair<std::size_t, std::size_t>>& sup,
                            const Eigen::VectorXd& v) {
        Eigen::VectorXd out(m);
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto [lo, hi] = sup[static_cast<std::size_t>(j)];
            const auto start = static_cast<Eigen::Index>(lo), len = static_cast<Eigen::Index>(hi - lo);
            out[j] = X.col(j).segment(start, len).dot(v.segment(start, len));
        }
        return out;
    };

    Eigen::VectorXd ones_At(ni);
    {
        std::vector<double> one(n, 1.0);
        A.apply_t(one, std::span<double>(ones_At.data(), n));
    }

    // Iterate on the driver p directly (s = p, no cancellation); Newton
    // systems are formed in q = A^{-1} p where the Hessian is banded.
    Eigen::VectorXd p = Eigen::VectorXd::Constant(ni, 0.1), c(m);
    Eigen::VectorXd q(ni), Mq(ni);
    auto phasic_of = [&](const Eigen::VectorXd& pp, Eigen::VectorXd& qq, Eigen::VectorXd& mq) {
        A.solve(std::span<const double>(pp.data(), n), std::span<double>(qq.data(), n));
        M.apply(std::span<const double>(qq.data(), n), std::span<double>(mq.data(), n));
    };
    phasic_of(p, q, Mq);
    c = Hcc.ldlt().solve(sparse_mul_t(T, t_support, y - Mq));

    auto objective = [&](const Eigen::VectorXd& pp, const Eigen::VectorXd& cc, const Eigen::VectorXd& mq) {
        const Eigen::VectorXd r = mq + sparse_mul(T, t_support, cc) - y;
        return 0.5 * r.squaredNorm() + alpha * pp.sum() + 0.5 * params.gamma * cc.tail(nb).squaredNorm();
    };
    auto barrier = [&](const Eigen::VectorXd& pp) {
        double b = 0.0;
        for (Eigen::Index i = 0; i < ni; ++i) b -= std::log(pp[i]);
        return b;
    };

    EdaDecomposition out;
    double mu = 0.1;
    const double mu_final = 1e-3 * params.kkt_tol;
    int steps = 0;
    double kkt = std::numeric_limits<double>::infinity();

    Eigen::VectorXd gq(ni), gc(m), tmp(ni), inv_p(ni), dq(ni), dc(m), dp(ni);
    Eigen::VectorXd p_new(ni), c_new(m), q_new(ni), Mq_new(ni);
    std::vector<double> k0(n), k1(n), k2(n);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> W(ni, m);
    detail::PentaCholesky chol;

    double f = objective(p, c, Mq);
    while (true) {
        // Damped Newton on f - mu * sum(log p).
        while (true) {
            if (steps >= params.max_iter) throw DecompositionError("cvxeda: iteration cap reached", kkt);
            ++steps;

            const Eigen::VectorXd r = Mq + sparse_mul(T, t_support, c) - y;
            inv_p = p.cwiseInverse();
            M.apply_t(std::span<const double>(r.data(), n), std::span<double>(gq.data(), n));
            A.apply_t(std::span<const double>(inv_p.data(), n), std::span<double>(tmp.data(), n));
            gq += alpha * ones_At - mu * tmp;
            gc = sparse_mul_t(T, t_support, r);
            gc.tail(nb) += params.gamma * c.tail(nb);

            // K = M^T M + mu A^T diag(1/p^2) A, pentadiagonal.
            std::fill(k0.begin(), k0.end(), 0.0);
            std::fill(k1.begin(), k1.end(), 0.0);
            std::fill(k2.begin(), k2.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double ip = inv_p[static_cast<Eigen::Index>(i)];
                const double w = mu * ip * ip;
                for (std::size_t a = 0; a < 3 && a <= i; ++a)
                    for (std::size_t b = a; b < 3 && b <= i; ++b) {
                        const double v = M.c[a] * M.c[b] + w * A.c[a] * A.c[b];
                        const std::size_t row = i - a, off = b - a;
                        (off == 0 ? k0 : off == 1 ? k1 : k2)[row] += v;
                    }
            }
            if (!chol.factor(k0, k1, k2)) throw DecompositionError("cvxeda: Newton system not positive definite", kkt);

            W = Hqc;
            chol.solve_rows(W);
            Eigen::MatrixXd S = Hcc;
            for (Eigen::Index a = 0; a < m; ++a) {
                const auto [lo, hi] = support[static_cast<std::size_t>(a)];
                Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(m);
                for (std::size_t i = lo; i < hi; ++i) {
                    const auto r = static_cast<Eigen::Index>(i);
                    acc += Hqc(r, a) * W.row(r);
                }
                S.row(a) -= acc;
            }
            S = 0.5 * (S + S.transpose()).eval();
            const auto S_fact = S.ldlt();
            // Block elimination; the q-block is ill-conditioned near the
            // Nyquist mode, so the solve is followed by iterative refinement.
            auto block_solve = [&](const Eigen::VectorXd& rq, const Eigen::VectorXd& rc, Eigen::VectorXd& xq,
                                   Eigen::VectorXd& xc) {
                Eigen::VectorXd u = rq;
                chol.solve(u.data(), n);
                xc = S_fact.solve(rc - sparse_mul_t(Hqc, support, u));
                xq = u - W * xc;
            };
            auto apply_K = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out_v) {
                Eigen::VectorXd a(ni), b(ni);
                M.apply(std::span<const double>(v.data(), n), std::span<double>(a.data(), n));
                M.apply_t(std::span<const double>(a.data(), n), std::span<double>(out_v.data(), n));
                A.apply(std::span<const double>(v.data(), n), std::span<double>(a.data(), n));
                for (Eigen::Index i = 0; i < ni; ++i) a[i] *= mu * inv_p[i] * inv_p[i];
                A.apply_t(std::span<const double>(a.data(), n), std::span<double>(b.data(), n));
                out_v += b;
            };
            block_solve(-gq, -gc, dq, dc);
            for (int refine = 0; refine < 2; ++refine) {
                Eigen::VectorXd kq(ni);
                apply_K(dq, kq);
                const Eigen::VectorXd res_q = -gq - kq - sparse_mul(Hqc, support, dc);
                const Eigen::VectorXd res_c = -gc - sparse_mul_t(Hqc, support, dq) - Hcc * dc;
                Eigen::VectorXd eq(ni), ec(m);
                block_solve(res_q, res_c, eq, ec);
                dq += eq;
                dc += ec;
            }

            const double decrement = -(gq.dot(dq) + gc.dot(dc));
            if (!(decrement >= 0.0) || !std::isfinite(decrement))
                throw DecompositionError("cvxeda: invalid Newton direction", kkt);
            // Stationarity in the local inverse-Hessian norm; the
            // complementarity gap of a barrier iterate is exactly mu.
            kkt = std::max(std::sqrt(decrement), mu);
            const double scale = std::max(1.0, std::abs(f));
            const bool final_stage = mu <= mu_final;
            if (final_stage ? std::sqrt(decrement) <= 0.1 * params.kkt_tol || decrement / 2.0 <= 1e-14 * scale
                            : decrement / 2.0 <= 1e-10 * scale)
                break;

            A.apply(std::span<const double>(dq.data(), n), std::span<double>(dp.data(), n));
            double t = 1.0;
            for (Eigen::Index i = 0; i < ni; ++i)
                if (dp[i] < 0.0) t = std::min(t, -0.99 * p[i] / dp[i]);
            const double phi = f + mu * barrier(p);
            bool accepted = false;
            for (int bt = 0; bt < 60 && !accepted; ++bt, t *= 0.5) {
                p_new = p + t * dp;
                if (!(p_new.array() > 0.0).all()) continue;
                c_new = c + t * dc;
                phasic_of(p_new, q_new, Mq_new);
                const double f_new = objective(p_new, c_new, Mq_new);
                if (f_new + mu * barrier(p_new) <= phi - 0.25 * t * decrement) {
                    p.swap(p_new);
                    c.swap(c_new);
                    q.swap(q_new);
                    Mq.swap(Mq_new);
                    f = f_new;
                    accepted = true;
                }
            }
            if (!accepted) break;
        }
        out.objective_history.push_back(f);
        if (mu <= mu_final) {
            if (kkt <= params.kkt_tol || (std::isfinite(kkt) && kkt * kkt / 2.0 <= 1e-14 * std::max(1.0, std::abs(f)))) break;
            throw DecompositionError("cvxeda: stalled above the KKT tolerance", kkt);
        }
        mu = std::max(mu * 0.1, mu_final);
    }

    out.iterations = steps;
    out.kkt_residual = kkt;
    out.objective = f;

    std::vector<double> tonic(n), phasic(n), residual(n), driver(n);
    const Eigen::VectorXd tc = sparse_mul(T, t_support, c);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        tonic[i] = tc[ii];
        phasic[i] = Mq[ii];
        driver[i] = p[ii];
        residual[i] = eda.values[i] - tonic[i] - phasic[i];
    }
    out.tonic = eda.with_values(std::move(tonic));
    out.phasic = eda.with_values(std::move(phasic));
    out.residual = eda.with_values(std::move(residual));
    out.driver = std::move(driver);
    return out;
}

}  // namespace biocomp
