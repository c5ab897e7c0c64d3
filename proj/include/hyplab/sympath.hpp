// sympath.hpp — sampled paths of symplectic matrices starting at the identity.

#pragma once

#include "hyplab/linalg.hpp"

#include <stdexcept>
#include <vector>

namespace hyplab {

struct SymplecticPath {
    std::vector<double> t;  // increasing, t.front() == 0
    std::vector<Mat> M;     // M.front() == identity

    double T() const { return t.back(); }
    int dim() const { return static_cast<int>(M.front().rows()); }
    const Mat& end() const { return M.back(); }

    void validate(double tol = 1e-8) const {
        if (t.size() != M.size() || t.size() < 2)
            throw std::invalid_argument("symplectic path: bad sampling");
        if (t.front() != 0.0)
            throw std::invalid_argument("symplectic path: must start at t = 0");
        if ((M.front() - Mat::Identity(dim(), dim())).cwiseAbs().maxCoeff() > tol)
            throw std::invalid_argument("symplectic path: must start at identity");
        for (const auto& m : M)
            if (symplectic_defect(m) > tol)
                throw std::invalid_argument("symplectic path: sample not symplectic");
    }
};

// Extends a path to [0, k T] by gluing conjugates with powers of the endpoint,
// i.e. the path of the k-fold iterate.
inline SymplecticPath path_power(const SymplecticPath& path, int k) {
    if (k < 1) throw std::invalid_argument("path_power: k must be >= 1");
    SymplecticPath out;
    const Mat Mend = path.end();
    Mat P = Mat::Identity(path.dim(), path.dim());
    double off = 0.0;
    for (int j = 0; j < k; ++j) {
        const size_t begin = (j == 0) ? 0 : 1;
        for (size_t i = begin; i < path.t.size(); ++i) {
            out.t.push_back(off + path.t[i]);
            out.M.push_back(path.M[i] * P);
        }
        off += path.T();
        P = Mend * P;
    }
    return out;
}

}  // namespace hyplab
