#pragma once

#include "tvnav/common.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <functional>
#include <optional>
#include <vector>

namespace tvnav {

struct GaussianBelief {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

inline GaussianBelief make_belief(const Vec2& mean, const Mat2& covariance) {
    GaussianBelief b;
    b.mean = mean;
    b.covariance = covariance;
    return b;
}

inline Vec2 mean2(const GaussianBelief& b) { return Vec2(b.mean[0], b.mean[1]); }
inline Mat2 cov2(const GaussianBelief& b) { return Mat2(b.covariance); }

/// Scaled unscented-transform tuning. kappa defaults to 3 - n when unset,
/// which together with alpha = 1 gives the classical third-moment match for
/// Gaussian inputs.
struct UtParams {
    double alpha = 1.0;
    double beta = 2.0;
    std::optional<double> kappa;

    [[nodiscard]] double kappa_for(int n) const { return kappa ? *kappa : 3.0 - n; }
};

struct SigmaSet {
    Eigen::MatrixXd points;        // n x (2n+1), column i is point i
    Eigen::VectorXd mean_weights;  // W^m, size 2n+1
    Eigen::VectorXd cov_weights;   // W^c, size 2n+1
};

/// Deterministic sigma points of the scaled unscented transform:
/// point 0 = mu, points i and i+n = mu +/- column i of sqrt((n+lambda) Sigma).
/// The square root is the Cholesky factor; for singular but PSD covariances
/// an eigendecomposition factor is used instead. Eigenvalues within -1e-12
/// of zero are clamped to zero; anything lower is an error.
inline SigmaSet sigma_points(const GaussianBelief& b, const UtParams& params = {}) {
    const int n = static_cast<int>(b.mean.size());
    if (b.covariance.rows() != n || b.covariance.cols() != n) {
        throw std::invalid_argument("sigma_points: covariance dimension mismatch");
    }
    const double lambda = params.alpha * params.alpha * (n + params.kappa_for(n)) - n;
    const double scale = n + lambda;
    if (!(scale > 0.0)) throw ConfigError("sigma_points: alpha/kappa give n + lambda <= 0");

    const Eigen::MatrixXd sym = 0.5 * (b.covariance + b.covariance.transpose());
    Eigen::MatrixXd root;                     // root * root^T = scale * sym
    Eigen::LLT<Eigen::MatrixXd> llt(scale * sym);
    if (llt.info() == Eigen::Success) {
        root = llt.matrixL();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
        Eigen::VectorXd ev = es.eigenvalues();
        const double tol = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
        for (int i = 0; i < n; ++i) {
            if (ev[i] < -tol) {
                throw std::runtime_error("sigma_points: covariance not PSD (eigenvalue " +
                                         format_double(ev[i]) + ")");
            }
            ev[i] = std::max(ev[i], 0.0) * scale;
        }
        root = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
    }

    SigmaSet s;
    s.points.resize(n, 2 * n + 1);
    s.points.col(0) = b.mean;
    for (int i = 0; i < n; ++i) {
        s.points.col(1 + i) = b.mean + root.col(i);
        s.points.col(1 + n + i) = b.mean - root.col(i);
    }
    s.mean_weights.resize(2 * n + 1);
    s.cov_weights.resize(2 * n + 1);
    s.mean_weights[0] = lambda / scale;
    s.cov_weights[0] = s.mean_weights[0] + (1.0 - params.alpha * params.alpha + params.beta);
    for (int i = 1; i <= 2 * n; ++i) {
        s.mean_weights[i] = 0.5 / scale;
        s.cov_weights[i] = 0.5 / scale;
    }
    return s;
}

using Transform = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// One unscented prediction step through the transform z, with additive
/// process noise Q: mu' = sum W^m z(x_i), Sigma' = sum W^c dz dz^T + Q.
inline GaussianBelief ut_predict(const GaussianBelief& b, const Transform& z,
                                 const Eigen::MatrixXd& process_noise,
                                 const UtParams& params = {}) {
    const SigmaSet s = sigma_points(b, params);
    const int count = static_cast<int>(s.points.cols());

    std::vector<Eigen::VectorXd> mapped(count);
    for (int i = 0; i < count; ++i) mapped[i] = z(s.points.col(i));

    const int m = static_cast<int>(mapped[0].size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < count; ++i) mean += s.mean_weights[i] * mapped[i];

    Eigen::MatrixXd cov = process_noise;
    for (int i = 0; i < count; ++i) {
        const Eigen::VectorXd d = mapped[i] - mean;
        cov += s.cov_weights[i] * d * d.transpose();
    }
    cov = 0.5 * (cov + cov.transpose());
    return GaussianBelief{std::move(mean), std::move(cov)};
}

/// Transform of one chain step; receives the step index k.
using StepTransform = std::function<Eigen::VectorXd(int, const Eigen::VectorXd&)>;

/// Iterated prediction b_0 -> b_1 -> ... -> b_T; the result includes b_0 and
/// therefore has length T + 1.
inline std::vector<GaussianBelief> predict_chain(const GaussianBelief& b0, int steps,
                                                 const StepTransform& z,
                                                 const Eigen::MatrixXd& process_noise,
                                                 const UtParams& params = {}) {
    std::vector<GaussianBelief> chain;
    chain.reserve(steps + 1);
    chain.push_back(b0);
    for (int k = 0; k < steps; ++k) {
        const auto step = [&](const Eigen::VectorXd& x) { return z(k, x); };
        chain.push_back(ut_predict(chain.back(), step, process_noise, params));
    }
    return chain;
}

}  // namespace tvnav
