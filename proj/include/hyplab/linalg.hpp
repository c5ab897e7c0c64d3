// linalg.hpp — small dense helpers shared across the library: symplectic
// Gram matrix, complex structure, polar factors, windings, matrix exponential.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace hyplab {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

// Complex structure J(a,b) = (b,-a) in (p,q) blocks, i.e. J dp = -dq.
inline Mat jq_matrix(int n) {
    Mat J = Mat::Zero(2 * n, 2 * n);
    J.topRightCorner(n, n) = Mat::Identity(n, n);
    J.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
    return J;
}

// Gram matrix of the symplectic form in the adapted basis, chosen so that
// omega(u, J v) = <u, v> holds with the standard inner product.
inline Mat omega_gram(int n) {
    Mat W = Mat::Zero(2 * n, 2 * n);
    W.topRightCorner(n, n) = -Mat::Identity(n, n);
    W.bottomLeftCorner(n, n) = Mat::Identity(n, n);
    return W;
}

inline Mat sym(const Mat& M) { return 0.5 * (M + M.transpose()); }

// Largest singular value.
inline double opnorm(const Mat& M) {
    return Eigen::JacobiSVD<Mat>(M).singularValues()(0);
}

// Largest |eigenvalue| of the symmetrized matrix; realizes
// sup_{|x|=1} |<M x, x>| exactly.
inline double sym_opnorm(const Mat& M) {
    Eigen::SelfAdjointEigenSolver<Mat> es(sym(M));
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline double min_sym_eig(const Mat& M) {
    Eigen::SelfAdjointEigenSolver<Mat> es(sym(M));
    return es.eigenvalues().minCoeff();
}

inline Mat expm(const Mat& M) { return M.exp(); }

inline double symplectic_defect(const Mat& M) {
    const int n = static_cast<int>(M.rows()) / 2;
    const Mat W = omega_gram(n);
    return (M.transpose() * W * M - W).cwiseAbs().maxCoeff();
}

// Orthogonal polar factor U of M = U P with P symmetric positive definite.
inline Mat polar_unitary(const Mat& M) {
    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

// A real 2n x 2n matrix commuting with J has block form [[X, Y], [-Y, X]];
// the corresponding complex matrix is X + iY.
inline CMat to_complex_linear(const Mat& U) {
    const int n = static_cast<int>(U.rows()) / 2;
    const Mat X = 0.5 * (U.topLeftCorner(n, n) + U.bottomRightCorner(n, n));
    const Mat Y = 0.5 * (U.topRightCorner(n, n) - U.bottomLeftCorner(n, n));
    return X.cast<std::complex<double>>() +
           std::complex<double>(0, 1) * Y.cast<std::complex<double>>();
}

// arg det of the complexified unitary polar factor of a symplectic matrix,
// in (-pi, pi].
inline double polar_angle(const Mat& M) {
    const CMat Uc = to_complex_linear(polar_unitary(M));
    const std::complex<double> d = Eigen::FullPivLU<CMat>(Uc).determinant();
    return std::arg(d);
}

// Same, also reporting the singular-value condition number of M.
inline double polar_angle_and_cond(const Mat& M, double& cond) {
    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    cond = sv(0) / std::max(sv(sv.size() - 1), 1e-300);
    const CMat Uc = to_complex_linear(svd.matrixU() * svd.matrixV().transpose());
    const std::complex<double> d = Eigen::FullPivLU<CMat>(Uc).determinant();
    return std::arg(d);
}

// Accumulates a continuous angle from sampled values; consecutive increments
// must stay below the cap or the track is reported as too coarse.
class AngleTracker {
public:
    explicit AngleTracker(double cap = kPi / 4.0) : cap_(cap) {}

    void push(double angle) {
        if (!started_) {
            started_ = true;
            last_ = angle;
            total_ = 0.0;
            return;
        }
        double d = angle - last_;
        while (d > kPi) d -= 2.0 * kPi;
        while (d <= -kPi) d += 2.0 * kPi;
        if (std::abs(d) > cap_) ok_ = false;
        total_ += d;
        last_ = angle;
    }

    double total() const { return total_; }
    bool within_cap() const { return ok_; }

private:
    double cap_;
    double last_ = 0.0;
    double total_ = 0.0;
    bool started_ = false;
    bool ok_ = true;
};

}  // namespace hyplab
