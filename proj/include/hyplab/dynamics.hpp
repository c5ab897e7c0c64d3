// dynamics.hpp — flows, composition and iteration of one-periodic Hamiltonians
// equal to a multiple of a hyperbolic quadratic form outside a compact set,
// together with the loop action and the ball-restricted Hofer-type norm.
//
// Conventions (fixed project-wide):
//   omega = sum dp_i ^ dq_i,  i_X omega = -dH,  so X_H = (-H_q, H_p).
//   The loop action is A_H(gamma) = -loop integral of p dq + int H dt; a
//   positively oriented circle of radius rho with H = 0 has action -pi rho^2.

#pragma once

#include "hyplab/quadform.hpp"
#include "hyplab/sympath.hpp"

#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hyplab {

struct IntegrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- evaluators

// Type-erased time-periodic Hamiltonian. `hess` may be empty; flows then fall
// back to a finite-difference Jacobian of the gradient.
struct TimeHamiltonian {
    int dim = 0;
    std::function<double(double, const Vec&)> value;
    std::function<Vec(double, const Vec&)> grad;
    std::function<Mat(double, const Vec&)> hess;
};

// X_H = R grad H with R = [[0,-I],[I,0]].
inline Vec rotate_gradient(const Vec& g) {
    const int n = static_cast<int>(g.size()) / 2;
    Vec x(2 * n);
    x.head(n) = -g.tail(n);
    x.tail(n) = g.head(n);
    return x;
}

inline Mat rotate_hessian(const Mat& h) {
    const int n = static_cast<int>(h.rows()) / 2;
    Mat x(2 * n, 2 * n);
    x.topRows(n) = -h.bottomRows(n);
    x.bottomRows(n) = h.topRows(n);
    return x;
}

// ------------------------------------------------------------------- systems

// Compactly supported smooth bump amp * w(t) * (1 - |z-c|^2/rad^2)^3.
struct Bump {
    Vec center;
    double radius = 1.0;
    double amplitude = 0.0;
    double time_const = 1.0;
    double time_cos = 0.0;
    double time_sin = 0.0;

    double weight(double t) const {
        return time_const + time_cos * std::cos(2.0 * kPi * t) +
               time_sin * std::sin(2.0 * kPi * t);
    }
    double value(double t, const Vec& z) const {
        const double s = (z - center).squaredNorm() / (radius * radius);
        if (s >= 1.0) return 0.0;
        const double u = 1.0 - s;
        return amplitude * weight(t) * u * u * u;
    }
    Vec grad(double t, const Vec& z) const {
        const Vec d = z - center;
        const double s = d.squaredNorm() / (radius * radius);
        if (s >= 1.0) return Vec::Zero(z.size());
        const double u = 1.0 - s;
        return amplitude * weight(t) * (-3.0 * u * u) * (2.0 / (radius * radius)) * d;
    }
    Mat hess(double t, const Vec& z) const {
        const int m = static_cast<int>(z.size());
        const Vec d = z - center;
        const double r2 = radius * radius;
        const double s = d.squaredNorm() / r2;
        if (s >= 1.0) return Mat::Zero(m, m);
        const double u = 1.0 - s;
        const double gp = -3.0 * u * u;
        const double gpp = 6.0 * u;
        return amplitude * weight(t) *
               (gpp * (4.0 / (r2 * r2)) * (d * d.transpose()) +
                gp * (2.0 / r2) * Mat::Identity(m, m));
    }
};

// H(t,z) = kappa Q(z) + sum of bumps; equals kappa Q outside the support ball.
struct HamiltonianSystem {
    NormalFrame frame;
    double kappa = 1.0;
    std::vector<Bump> bumps;
    double support_radius = 0.0;

    int dim() const { return frame.dim(); }

    void validate() const {
        if (kappa <= 0.0) throw std::invalid_argument("system: kappa must be positive");
        for (const auto& b : bumps) {
            if (b.radius <= 0.0) throw std::invalid_argument("system: bump radius must be positive");
            if (b.center.size() != dim())
                throw std::invalid_argument("system: bump center has wrong dimension");
            if (b.center.norm() + b.radius > support_radius + 1e-12)
                throw std::invalid_argument("system: bump support escapes the support ball");
        }
    }

    double value(double t, const Vec& z) const {
        double v = kappa * frame.q_value(z);
        for (const auto& b : bumps) v += b.value(t, z);
        return v;
    }
    Vec grad(double t, const Vec& z) const {
        Vec g = kappa * frame.q_grad(z);
        for (const auto& b : bumps) g += b.grad(t, z);
        return g;
    }
    Mat hess(double t, const Vec& z) const {
        Mat h = kappa * frame.hessian();
        for (const auto& b : bumps) h += b.hess(t, z);
        return h;
    }

    TimeHamiltonian evaluator() const {
        TimeHamiltonian H;
        H.dim = dim();
        H.value = [*this](double t, const Vec& z) { return value(t, z); };
        H.grad = [*this](double t, const Vec& z) { return grad(t, z); };
        H.hess = [*this](double t, const Vec& z) { return hess(t, z); };
        return H;
    }
};

inline Vec vector_field(const HamiltonianSystem& H, double t, const Vec& z) {
    return rotate_gradient(H.grad(t, z));
}

inline Vec vector_field(const TimeHamiltonian& H, double t, const Vec& z) {
    return rotate_gradient(H.grad(t, z));
}

inline Mat field_jacobian(const TimeHamiltonian& H, double t, const Vec& z) {
    if (H.hess) return rotate_hessian(H.hess(t, z));
    // finite-difference Jacobian of the gradient
    const int d = H.dim;
    Mat hess(d, d);
    const double base = 1e-6;
    for (int j = 0; j < d; ++j) {
        const double dj = base * (1.0 + std::abs(z(j)));
        Vec zp = z, zm = z;
        zp(j) += dj;
        zm(j) -= dj;
        hess.col(j) = (H.grad(t, zp) - H.grad(t, zm)) / (2.0 * dj);
    }
    return rotate_hessian(0.5 * (hess + hess.transpose()));
}

// ---------------------------------------------------------------------- flow

namespace detail {

// One implicit midpoint step from (t, z) with increment h. Returns the new
// point and, when requested, the field Jacobian at the converged midpoint.
// Newton when a Hessian is available, damped fixed-point iteration otherwise.
inline Vec midpoint_step(const TimeHamiltonian& H, double t, double h, const Vec& z,
                         Mat* jac_out) {
    const int d = H.dim;
    const double tm = t + 0.5 * h;
    Vec m = z + 0.5 * h * vector_field(H, tm, z);  // explicit predictor
    const double tol = 1e-13 * (1.0 + z.norm());
    const bool newton = static_cast<bool>(H.hess) || jac_out != nullptr;
    Mat DX;
    bool have_dx = false;
    double last = std::numeric_limits<double>::infinity();
    for (int it = 0; it < (newton ? 30 : 80); ++it) {
        const Vec g = m - z - 0.5 * h * vector_field(H, tm, m);
        const double gn = g.norm();
        if (gn <= tol) {
            if (jac_out) {
                if (!have_dx) DX = field_jacobian(H, tm, m);
                *jac_out = DX;
            }
            return 2.0 * m - z;
        }
        if (newton) {
            DX = field_jacobian(H, tm, m);
            have_dx = true;
            const Mat J = Mat::Identity(d, d) - 0.5 * h * DX;
            m -= J.partialPivLu().solve(g);
        } else {
            if (it > 4 && gn > 0.9 * last) break;  // not contracting
            last = gn;
            m -= g;
        }
    }
    throw IntegrationError("implicit midpoint did not converge; retry with step <= " +
                           std::to_string(std::abs(h) / 2.0));
}

}  // namespace detail

// Implicit midpoint integration (symplectic, second order) from t0 to t1.
inline Vec flow(const TimeHamiltonian& H, double t0, double t1, Vec z, double step) {
    if (step <= 0.0) throw std::invalid_argument("flow: step must be positive");
    if (t1 == t0) return z;
    const int nsteps = std::max<int>(1, static_cast<int>(std::ceil(std::abs(t1 - t0) / step)));
    const double h = (t1 - t0) / nsteps;
    for (int i = 0; i < nsteps; ++i)
        z = detail::midpoint_step(H, t0 + i * h, h, z, nullptr);
    return z;
}

inline Vec flow(const HamiltonianSystem& H, double t0, double t1, const Vec& z,
                double step) {
    return flow(H.evaluator(), t0, t1, z, step);
}

// Time-t map of the linear field of kappa Q as a matrix exponential.
inline Mat exact_linear_flow(const NormalFrame& frame, double kappa, double t) {
    return expm(t * kappa * vector_field_matrix(frame));
}

struct FlowWithTangent {
    std::vector<double> t;
    std::vector<Vec> z;
    std::vector<Mat> M;  // tangent maps from t0, M[0] = identity

    SymplecticPath path() const {
        SymplecticPath p;
        p.t.reserve(t.size());
        for (double ti : t) p.t.push_back(ti - t.front());
        p.M = M;
        return p;
    }
};

// Flow plus the variational equation. The tangent update is the exact
// derivative of the implicit midpoint map, hence symplectic up to Newton
// tolerance.
inline FlowWithTangent linearized_flow(const TimeHamiltonian& H, double t0, double t1,
                                       const Vec& z0, double step) {
    if (step <= 0.0) throw std::invalid_argument("linearized_flow: step must be positive");
    const int d = H.dim;
    FlowWithTangent out;
    const int nsteps =
        (t1 == t0) ? 0 : std::max<int>(1, static_cast<int>(std::ceil(std::abs(t1 - t0) / step)));
    const double h = nsteps ? (t1 - t0) / nsteps : 0.0;
    out.t.push_back(t0);
    out.z.push_back(z0);
    out.M.push_back(Mat::Identity(d, d));
    Vec z = z0;
    Mat M = Mat::Identity(d, d);
    for (int i = 0; i < nsteps; ++i) {
        Mat DX(d, d);
        z = detail::midpoint_step(H, t0 + i * h, h, z, &DX);
        const Mat A = Mat::Identity(d, d) - 0.5 * h * DX;
        const Mat B = Mat::Identity(d, d) + 0.5 * h * DX;
        M = A.partialPivLu().solve(B * M);
        out.t.push_back(t0 + (i + 1) * h);
        out.z.push_back(z);
        out.M.push_back(M);
    }
    return out;
}

inline FlowWithTangent linearized_flow(const HamiltonianSystem& H, double t0, double t1,
                                       const Vec& z0, double step) {
    return linearized_flow(H.evaluator(), t0, t1, z0, step);
}

// ------------------------------------------------- composition and iteration

// Hamiltonian generating phi_K . phi_H: (K # H)_t = K_t + H_t o (phi_K^t)^{-1}.
inline TimeHamiltonian compose_natural(const TimeHamiltonian& K, const TimeHamiltonian& H,
                                       double step = 1e-3) {
    if (K.dim != H.dim) throw std::invalid_argument("compose_natural: dimension mismatch");
    TimeHamiltonian G;
    G.dim = K.dim;
    G.value = [K, H, step](double t, const Vec& z) {
        const Vec y = flow(K, t, 0.0, z, step);
        return K.value(t, z) + H.value(t, y);
    };
    G.grad = [K, H, step](double t, const Vec& z) -> Vec {
        const auto back = linearized_flow(K, t, 0.0, z, step);
        return K.grad(t, z) + back.M.back().transpose() * H.grad(t, back.z.back());
    };
    return G;
}

// k-th iterate H^{#k}: value sum_{j<k} H_t o (phi_H^t)^{-j}; its time-one flow
// is the k-th power of the time-one map of H.
inline TimeHamiltonian iterate(const TimeHamiltonian& H, int k, double step = 1e-3) {
    if (k < 1) throw std::invalid_argument("iterate: k must be >= 1");
    TimeHamiltonian G;
    G.dim = H.dim;
    G.value = [H, k, step](double t, const Vec& z) {
        double v = H.value(t, z);
        Vec y = z;
        for (int j = 1; j < k; ++j) {
            y = flow(H, t, 0.0, y, step);
            v += H.value(t, y);
        }
        return v;
    };
    G.grad = [H, k, step](double t, const Vec& z) -> Vec {
        Vec g = H.grad(t, z);
        Vec y = z;
        Mat B = Mat::Identity(H.dim, H.dim);
        for (int j = 1; j < k; ++j) {
            const auto back = linearized_flow(H, t, 0.0, y, step);
            y = back.z.back();
            B = back.M.back() * B;
            g += B.transpose() * H.grad(t, y);
        }
        return g;
    };
    return G;
}

// --------------------------------------------------------------------- loops

struct LoopSample {
    std::vector<Vec> points;  // includes the closing point, size N + 1
    int period = 1;

    int segments() const { return static_cast<int>(points.size()) - 1; }
    double dt() const { return static_cast<double>(period) / segments(); }

    void validate(double close_tol = 1e-6) const {
        if (points.size() < 2) throw std::invalid_argument("loop: too few samples");
        if (period < 1) throw std::invalid_argument("loop: period must be >= 1");
        if (segments() < 16 * period)
            throw std::invalid_argument("loop: need at least 16 samples per unit period");
        double scale = 1.0;
        for (const auto& z : points) scale = std::max(scale, z.norm());
        if ((points.front() - points.back()).norm() > close_tol * scale)
            throw std::invalid_argument("loop: not closed");
    }
};

// Symplectic area term computed with the symmetrized primitive
// -1/2 * sum (p dq - q dp) over the polygon; exact for polygons.
inline double loop_area_term(const LoopSample& loop) {
    const int n = static_cast<int>(loop.points.front().size()) / 2;
    double acc = 0.0;
    for (int i = 0; i + 1 < static_cast<int>(loop.points.size()); ++i) {
        const Vec& a = loop.points[i];
        const Vec& b = loop.points[i + 1];
        const Vec pm = 0.5 * (a.head(n) + b.head(n));
        const Vec qm = 0.5 * (a.tail(n) + b.tail(n));
        const Vec dp = b.head(n) - a.head(n);
        const Vec dq = b.tail(n) - a.tail(n);
        acc += qm.dot(dp) - pm.dot(dq);
    }
    return 0.5 * acc;
}

inline double action(const TimeHamiltonian& H, const LoopSample& loop,
                     double close_tol = 1e-6) {
    loop.validate(close_tol);
    const double dt = loop.dt();
    double ham = 0.0;  // trapezoid; endpoints coincide so weights are uniform
    for (int i = 0; i + 1 < static_cast<int>(loop.points.size()); ++i)
        ham += H.value(i * dt, loop.points[i]);
    ham *= dt;
    return loop_area_term(loop) + ham;
}

inline double action(const HamiltonianSystem& H, const LoopSample& loop,
                     double close_tol = 1e-6) {
    return action(H.evaluator(), loop, close_tol);
}

// Integrates a closed orbit of H through z0 over [0, period] into a loop.
inline LoopSample trace_loop(const TimeHamiltonian& H, const Vec& z0, int period,
                             double step) {
    LoopSample loop;
    loop.period = period;
    const int nper = std::max(64, static_cast<int>(std::ceil(1.0 / step)));
    loop.points.push_back(z0);
    Vec z = z0;
    for (int j = 0; j < period; ++j)
        for (int i = 0; i < nper; ++i) {
            z = flow(H, j + static_cast<double>(i) / nper,
                     j + static_cast<double>(i + 1) / nper, z, step);
            loop.points.push_back(z);
        }
    return loop;
}

// ---------------------------------------------------------------- Hofer norm

struct HoferNorm {
    double value = 0.0;
    double grid_resolution = 0.0;  // spacing of the final refinement
    int time_nodes = 0;
};

// ||F||_B = int_{S^1} sup_B |F_t| dt, sup over a grid of the ball with local
// pattern-search refinement; quadrature by the periodic rectangle rule.
inline HoferNorm hofer_norm(const std::function<double(double, const Vec&)>& F, int dim,
                            double ball_radius, int grid_density, int time_nodes = 32,
                            int refine_iters = 60) {
    if (grid_density < 2) throw std::invalid_argument("hofer_norm: grid density too small");
    HoferNorm out;
    out.time_nodes = time_nodes;
    const double spacing = 2.0 * ball_radius / (grid_density - 1);
    double total = 0.0;
    double final_res = spacing;
    for (int it = 0; it < time_nodes; ++it) {
        const double t = static_cast<double>(it) / time_nodes;
        Vec best = Vec::Zero(dim);
        double best_val = std::abs(F(t, best));
        // full tensor grid while affordable, random ball samples otherwise
        std::vector<int> idx(dim, 0);
        const long long cells = static_cast<long long>(std::pow(grid_density, dim));
        if (cells <= 1 << 22) {
            bool done = false;
            while (!done) {
                Vec pt(dim);
                for (int d = 0; d < dim; ++d) pt(d) = -ball_radius + idx[d] * spacing;
                if (pt.norm() <= ball_radius) {
                    const double v = std::abs(F(t, pt));
                    if (v > best_val) {
                        best_val = v;
                        best = pt;
                    }
                }
                int d = 0;
                while (d < dim && ++idx[d] == grid_density) idx[d++] = 0;
                done = (d == dim);
            }
        } else {
            std::mt19937_64 rng(12345 + it);
            std::normal_distribution<double> g;
            std::uniform_real_distribution<double> u01(0.0, 1.0);
            const int samples = 1 << 16;
            for (int s = 0; s < samples; ++s) {
                Vec pt(dim);
                for (int d = 0; d < dim; ++d) pt(d) = g(rng);
                pt *= ball_radius * std::pow(u01(rng), 1.0 / dim) / pt.norm();
                const double v = std::abs(F(t, pt));
                if (v > best_val) {
                    best_val = v;
                    best = pt;
                }
            }
        }
        // pattern search around the best grid point
        double h = spacing;
        for (int r = 0; r < refine_iters && h > 1e-12 * ball_radius; ++r) {
            bool improved = false;
            for (int d = 0; d < dim; ++d)
                for (double s : {-1.0, 1.0}) {
                    Vec pt = best;
                    pt(d) += s * h;
                    if (pt.norm() > ball_radius) pt *= ball_radius / pt.norm();
                    const double v = std::abs(F(t, pt));
                    if (v > best_val) {
                        best_val = v;
                        best = pt;
                        improved = true;
                    }
                }
            if (!improved) h *= 0.5;
            final_res = std::min(final_res, h);
        }
        total += best_val;
    }
    out.value = total / time_nodes;
    out.grid_resolution = final_res;
    return out;
}

inline HoferNorm hofer_norm(const TimeHamiltonian& F, double ball_radius,
                            int grid_density, int time_nodes = 32) {
    return hofer_norm([&F](double t, const Vec& z) { return F.value(t, z); }, F.dim,
                      ball_radius, grid_density, time_nodes);
}

// --------------------------------------------------------------- periodizing

// Monotone time ramp, flat near 0 and 1 (integrated quintic smoothstep).
struct TimeRamp {
    std::function<double(double)> lambda;
    std::function<double(double)> dlambda;

    static TimeRamp smoothstep() {
        TimeRamp r;
        r.lambda = [](double t) {
            t = std::clamp(t, 0.0, 1.0);
            return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
        };
        r.dlambda = [](double t) {
            t = std::clamp(t, 0.0, 1.0);
            return 30.0 * t * t * (1.0 - t) * (1.0 - t);
        };
        return r;
    }

    void validate() const {
        if (std::abs(lambda(0.0)) > 1e-12 || std::abs(lambda(1.0) - 1.0) > 1e-12)
            throw std::invalid_argument("ramp: must run from 0 to 1");
        for (int i = 0; i <= 256; ++i)
            if (dlambda(i / 256.0) < -1e-12)
                throw std::invalid_argument("ramp: must be monotone increasing");
    }
};

// One-periodic Hamiltonian K + l'(t) g_{l(t)} o phi_K^{l(t)-t} with the same
// time-one map as K + g; K must be autonomous.
inline TimeHamiltonian periodize(const TimeHamiltonian& K, const TimeHamiltonian& g,
                                 const TimeRamp& ramp, double step = 1e-3) {
    ramp.validate();
    TimeHamiltonian G;
    G.dim = K.dim;
    G.value = [K, g, ramp, step](double t, const Vec& z) {
        const double lam = ramp.lambda(t);
        const double dl = ramp.dlambda(t);
        double v = K.value(0.0, z);
        if (dl != 0.0) {
            const Vec w = flow(K, 0.0, lam - t, z, step);
            v += dl * g.value(lam, w);
        }
        return v;
    };
    G.grad = [K, g, ramp, step](double t, const Vec& z) -> Vec {
        const double lam = ramp.lambda(t);
        const double dl = ramp.dlambda(t);
        Vec grad = K.grad(0.0, z);
        if (dl != 0.0) {
            const auto fl = linearized_flow(K, 0.0, lam - t, z, step);
            grad += dl * fl.M.back().transpose() * g.grad(lam, fl.z.back());
        }
        return grad;
    };
    return G;
}

}  // namespace hyplab
