// quadform.hpp — hyperbolic quadratic forms with real spectrum: block normal
// forms Q(p,q) = <A p, q>, the D + E splitting, symplectic rescaling until
// the off-diagonal part is small, and the adapted complex structure/metric.

#pragma once

#include "hyplab/linalg.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyplab {

// One normal block: positive eigenvalue sigma with multiplicity m.
struct BlockSpec {
    struct Block {
        double sigma = 1.0;
        int m = 1;
    };
    std::vector<Block> blocks;

    int half_dim() const {
        int n = 0;
        for (const auto& b : blocks) n += b.m;
        return n;
    }

    void validate() const {
        if (blocks.empty()) throw std::invalid_argument("block spec: dimension zero");
        for (const auto& b : blocks) {
            if (!(b.sigma > 0.0)) throw std::invalid_argument("block spec: sigma must be positive");
            if (b.m < 1) throw std::invalid_argument("block spec: multiplicity must be >= 1");
        }
    }
};

// Error code for forms outside the real-spectrum class.
struct ComplexSpectrumError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Q(p,q) = <A p, q> with A lower triangular, A = D + E, plus the symplectic
// per-coordinate scaling that produced it from the unit normal form.
struct NormalFrame {
    Mat A;       // n x n, lower triangular, positive diagonal
    Mat D;       // diagonal part
    Mat E;       // strictly lower part
    Vec scale;   // s_i: p_i -> p_i / s_i, q_i -> s_i q_i from normal coords
    double lambda = 0.0;      // min diagonal entry
    double lambda_max = 0.0;  // max |eigenvalue| of A (= max diagonal)
    std::vector<int> block_of; // block index per coordinate

    int n() const { return static_cast<int>(A.rows()); }
    int dim() const { return 2 * n(); }

    double q_value(const Vec& z) const {
        const int m = n();
        return (A * z.head(m)).dot(z.tail(m));
    }

    // Hessian of Q as a quadratic function on R^{2n}: Q(z) = <S z, z>/2.
    Mat hessian() const {
        const int m = n();
        Mat S = Mat::Zero(2 * m, 2 * m);
        S.topRightCorner(m, m) = A.transpose();
        S.bottomLeftCorner(m, m) = A;
        return S;
    }

    // gradient of Q: (A^T q, A p)
    Vec q_grad(const Vec& z) const {
        const int m = n();
        Vec g(2 * m);
        g.head(m) = A.transpose() * z.tail(m);
        g.tail(m) = A * z.head(m);
        return g;
    }

    // sup of |Q| over the unit ball = half the top singular value of A
    double unit_ball_sup() const { return 0.5 * opnorm(A); }

    // Carries a point given in unit normal-form coordinates into the frame's
    // scaled coordinates.
    Vec transport_point(const Vec& z_normal) const {
        const int m = n();
        Vec z(2 * m);
        z.head(m) = z_normal.head(m).cwiseQuotient(scale);
        z.tail(m) = z_normal.tail(m).cwiseProduct(scale);
        return z;
    }
};

struct SmallnessReport {
    double norm_E2 = 0.0;    // |sym(E^2)|
    double norm_DE = 0.0;    // |sym(DE)|
    double norm_ED = 0.0;    // |sym(ED)|
    double norm_skew = 0.0;  // |E - E^T|
    double bound_i = 0.0;    // lambda^2 / 10
    double bound_ii = 0.0;   // lambda^2 / 20
    double bound_iii = 0.0;  // lambda / 8
    bool cond_i = false;
    bool cond_ii = false;
    bool cond_iii = false;
    // min eigenvalue of A + A^T minus lambda; nonnegative makes |p|^2 strictly
    // decrease and |q|^2 strictly increase along the flow at rate lambda.
    double lyapunov_margin = 0.0;
    bool lyapunov = false;

    bool all() const { return cond_i && cond_ii && cond_iii; }
    bool all_with_lyapunov() const { return all() && lyapunov; }
};

inline NormalFrame build_normal_form(const BlockSpec& spec) {
    spec.validate();
    const int n = spec.half_dim();
    NormalFrame f;
    f.A = Mat::Zero(n, n);
    f.block_of.assign(n, 0);
    int at = 0, bi = 0;
    for (const auto& b : spec.blocks) {
        for (int i = 0; i < b.m; ++i) {
            f.A(at + i, at + i) = b.sigma;
            if (i + 1 < b.m) f.A(at + i + 1, at + i) = -1.0;
            f.block_of[at + i] = bi;
        }
        at += b.m;
        ++bi;
    }
    f.D = f.A.diagonal().asDiagonal();
    f.E = f.A - f.D;
    f.scale = Vec::Ones(n);
    f.lambda = f.A.diagonal().minCoeff();
    f.lambda_max = f.A.diagonal().maxCoeff();
    return f;
}

// Linear Hamiltonian field of Q on R^{2n}: (p', q') = (-A p, A^T q).
inline Mat vector_field_matrix(const NormalFrame& f) {
    const int n = f.n();
    Mat L = Mat::Zero(2 * n, 2 * n);
    L.topLeftCorner(n, n) = -f.A;
    L.bottomRightCorner(n, n) = f.A.transpose();
    return L;
}

inline SmallnessReport check_smallness(const NormalFrame& f) {
    SmallnessReport r;
    r.norm_E2 = sym_opnorm(f.E * f.E);
    r.norm_DE = sym_opnorm(f.D * f.E);
    r.norm_ED = sym_opnorm(f.E * f.D);
    r.norm_skew = opnorm(f.E - f.E.transpose());
    r.bound_i = f.lambda * f.lambda / 10.0;
    r.bound_ii = f.lambda * f.lambda / 20.0;
    r.bound_iii = f.lambda / 8.0;
    r.cond_i = r.norm_E2 <= r.bound_i;
    r.cond_ii = r.norm_DE <= r.bound_ii && r.norm_ED <= r.bound_ii;
    r.cond_iii = r.norm_skew <= r.bound_iii;
    r.lyapunov_margin = min_sym_eig(f.A + f.A.transpose()) - f.lambda;
    r.lyapunov = r.lyapunov_margin >= 0.0;
    return r;
}

// Applies the geometric ladder s_i = t^i within each block (symplectic, keeps
// D fixed, multiplies the j-th subdiagonal by t^-j) and doubles t until the
// smallness conditions and the Lyapunov margin hold.
inline NormalFrame rescale_to_small(const NormalFrame& f) {
    for (double t = 1.0; t <= 1.1e12; t *= 2.0) {
        NormalFrame g = f;
        const int n = f.n();
        Vec s(n);
        int pos_in_block = 0;
        for (int i = 0; i < n; ++i) {
            if (i > 0 && f.block_of[i] != f.block_of[i - 1]) pos_in_block = 0;
            s(i) = std::pow(t, pos_in_block);
            ++pos_in_block;
        }
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < j; ++i)
                g.A(j, i) = f.A(j, i) * s(i) / s(j);
        g.D = g.A.diagonal().asDiagonal();
        g.E = g.A - g.D;
        g.scale = f.scale.cwiseProduct(s);
        if (check_smallness(g).all_with_lyapunov()) return g;
    }
    throw std::runtime_error("rescale_to_small: ladder cap reached");
}

// Right-hand side of the slow-homotopy rate condition, 3 lambda^2 / (20 lambda_max).
inline double slow_bound(const NormalFrame& f) {
    return 3.0 * f.lambda * f.lambda / (20.0 * f.lambda_max);
}

struct AdaptedStructure {
    Mat JQ;  // complex structure, J dp = -dq
    Mat G;   // Gram matrix of omega(., J .); identity in adapted coordinates
};

inline AdaptedStructure adapted_structure(const NormalFrame& f) {
    AdaptedStructure s;
    s.JQ = jq_matrix(f.n());
    s.G = omega_gram(f.n()) * s.JQ;
    return s;
}

}  // namespace hyplab
