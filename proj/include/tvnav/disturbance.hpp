#pragma once

#include "tvnav/common.hpp"
#include "tvnav/rng.hpp"

#include <cmath>

namespace tvnav {

/// Additive process noise e ~ N(0, Q). The factor L (L * L^T = Q) is
/// computed once at construction so sampling is a matrix-vector product.
class NoiseModel {
public:
    NoiseModel() : NoiseModel(Mat2::Identity()) {}

    explicit NoiseModel(const Mat2& covariance) : q_(covariance) {
        const double scale = std::max(1.0, q_.cwiseAbs().maxCoeff());
        if (std::abs(q_(0, 1) - q_(1, 0)) > 1e-9 * scale) {
            throw ConfigError("noise: covariance must be symmetric");
        }
        q_ = 0.5 * (q_ + q_.transpose());
        Eigen::SelfAdjointEigenSolver<Mat2> es(q_);
        Vec2 ev = es.eigenvalues();
        for (int i = 0; i < 2; ++i) {
            if (ev[i] < -1e-12 * scale) {
                throw ConfigError("noise: covariance is not positive semidefinite (eigenvalue " +
                                  format_double(ev[i]) + ")");
            }
            ev[i] = std::max(ev[i], 0.0);
        }
        factor_ = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
    }

    [[nodiscard]] const Mat2& covariance() const { return q_; }
    [[nodiscard]] const Mat2& factor() const { return factor_; }
    [[nodiscard]] bool is_diagonal() const {
        return std::abs(q_(0, 1)) <= 1e-12 * std::max(1.0, q_.diagonal().cwiseAbs().maxCoeff());
    }

private:
    Mat2 q_;
    Mat2 factor_;
};

/// Draw from N(0, Q). A zero covariance yields an exact zero vector; the
/// underlying stream always advances by one normal pair either way.
inline Vec2 sample_noise(const NoiseModel& model, Rng& rng) {
    return model.factor() * rng.normal2();
}

enum class FieldKind { None, Gyre, DynamicVortex };

struct GyreParams {
    double amplitude = 0.5;  // A
    double size = 15.0;      // s, meters per gyre half-period
};

struct VortexParams {
    double radius = 5.0;  // r, meters
    double omega = 0.1;   // rad/s
    Vec2 center = Vec2(15.0, 15.0);
};

/// Deterministic time-varying displacement field g(x, t); the returned
/// vector is the displacement accumulated over one step of length dt.
struct DisturbanceField {
    FieldKind kind = FieldKind::None;
    GyreParams gyre;
    VortexParams vortex;
};

inline Vec2 eval_gyre(const Vec2& x, const GyreParams& p, double dt) {
    if (!(p.size > 0.0)) throw ConfigError("gyre: size must be positive");
    const double kx = M_PI * x.x() / p.size;
    const double ky = M_PI * x.y() / p.size;
    return Vec2(-M_PI * p.amplitude * std::sin(kx) * std::cos(ky) * dt,
                M_PI * p.amplitude * std::cos(kx) * std::sin(ky) * dt);
}

/// Center of the rotating vortex at time t.
inline Vec2 vortex_center_at(const VortexParams& p, double t) {
    return Vec2(p.radius * std::cos(p.omega * t) + p.center.x(),
                p.radius * std::sin(p.omega * t) + p.center.y());
}

inline Vec2 eval_vortex(const Vec2& x, double t, const VortexParams& p, double dt) {
    const Vec2 c = vortex_center_at(p, t);
    return Vec2(-dt * x.x() + dt * c.x(), dt * x.y() - dt * c.y());
}

inline Vec2 eval_field(const DisturbanceField& field, const Vec2& x, double t, double dt) {
    switch (field.kind) {
        case FieldKind::None: return Vec2::Zero();
        case FieldKind::Gyre: return eval_gyre(x, field.gyre, dt);
        case FieldKind::DynamicVortex: return eval_vortex(x, t, field.vortex, dt);
    }
    return Vec2::Zero();
}

}  // namespace tvnav
