// indices.hpp — Conley–Zehnder index and mean index of symplectic paths.
//
// Normalization anchors, fixed project-wide and locked by tests:
//   * a path staying hyperbolic (no unit-circle eigenvalues) has index 0;
//   * the unit-time flow of a non-degenerate maximum with small Hessian on
//     R^{2n} has index n and small positive mean index.
// Windings are measured through arg det_C of the unitary polar factor in the
// adapted coordinates; a maximum winds positively.

#pragma once

#include "hyplab/sympath.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace hyplab {

struct DegenerateEndpoint : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised for endpoint types outside the implemented classification
// (non-semisimple elliptic monodromy).
struct IndexUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IndexReport {
    std::optional<int> cz;  // empty when the endpoint is degenerate
    double mean = 0.0;
    bool nondegenerate = false;
    bool gap_ok = false;
};

namespace detail_idx {

// Continuous winding (radians) of arg det_C of the polar factors along the
// stored samples.
inline double domain_winding(const SymplecticPath& path) {
    AngleTracker tr(kPi / 4.0);
    for (const auto& m : path.M) tr.push(polar_angle(m));
    if (!tr.within_cap())
        throw std::runtime_error("winding increment too large: refine path");
    return tr.total();
}

struct EllipticCluster {
    double theta = 0.0;  // angle in (0, pi)
    int krein_pos = 0;
    int krein_neg = 0;
};

struct EndpointSpectrum {
    std::vector<EllipticCluster> elliptic;
    bool degenerate = false;
};

// Classifies the endpoint spectrum. Unit-circle pairs carry Krein signs read
// off the form Im(conj(v)^T K v) on the eigenspace; everything off the unit
// circle contributes nothing.
inline EndpointSpectrum classify_endpoint(const Mat& M, double deg_tol = 1e-7) {
    EndpointSpectrum out;
    const int d = static_cast<int>(M.rows());
    Eigen::EigenSolver<Mat> es(M);
    const CVec lam = es.eigenvalues();
    const CMat V = es.eigenvectors();
    for (int i = 0; i < d; ++i)
        if (std::abs(lam(i) - std::complex<double>(1.0, 0.0)) < deg_tol) {
            out.degenerate = true;
            return out;
        }
    const Mat K = jq_matrix(d / 2);
    const CMat Kc = K.cast<std::complex<double>>();
    std::vector<bool> used(d, false);
    for (int i = 0; i < d; ++i) {
        if (used[i]) continue;
        const std::complex<double> l = lam(i);
        if (std::abs(std::abs(l) - 1.0) > 1e-7 || l.imag() <= 1e-9) continue;
        // cluster all eigenvalues equal to l
        std::vector<int> cols;
        for (int j = i; j < d; ++j)
            if (!used[j] && std::abs(lam(j) - l) < 1e-6) {
                cols.push_back(j);
                used[j] = true;
            }
        const int m = static_cast<int>(cols.size());
        CMat Vc(d, m);
        for (int j = 0; j < m; ++j) Vc.col(j) = V.col(cols[j]);
        // geometric multiplicity check
        Eigen::CompleteOrthogonalDecomposition<CMat> cod(
            M.cast<std::complex<double>>() - l * CMat::Identity(d, d));
        cod.setThreshold(1e-8);
        const int geo = d - static_cast<int>(cod.rank());
        if (geo < m)
            throw IndexUnavailable(
                "non-semisimple elliptic monodromy: index method unavailable");
        CMat form = std::complex<double>(0.0, -1.0) * (Vc.adjoint() * Kc * Vc);
        form = 0.5 * (form + form.adjoint());
        Eigen::SelfAdjointEigenSolver<CMat> fe(form);
        EllipticCluster cl;
        cl.theta = std::arg(l);
        for (int j = 0; j < m; ++j) {
            if (fe.eigenvalues()(j) > 0)
                ++cl.krein_pos;
            else
                ++cl.krein_neg;
        }
        out.elliptic.push_back(cl);
    }
    return out;
}

}  // namespace detail_idx

// Mean index over the path's own domain [0, T]: (1/pi) times the asymptotic
// winding rate of the iterated path. The walk stops at a fixed absolute
// horizon or as soon as the running product becomes too ill-conditioned for
// the polar factor to be trustworthy. Both rules depend only on the extended
// matrix family, which a path shares with all of its iterates, so iterating
// a path scales the result exactly by k.
inline double mean_index(const SymplecticPath& path, double horizon = 128.0,
                         double cond_cap = 1e12) {
    const double T = path.T();
    const Mat Mend = path.end();
    const int d = path.dim();

    struct Record {
        double t;
        double w;
    };
    std::vector<Record> rec;
    AngleTracker tr(kPi / 4.0);
    Mat P = Mat::Identity(d, d);
    bool stop = false;
    for (int j = 0; !stop; ++j) {
        const size_t begin = (j == 0) ? 0 : 1;
        for (size_t i = begin; i < path.t.size(); ++i) {
            const double t_abs = j * T + path.t[i];
            double cond = 1.0;
            const double ang = polar_angle_and_cond(path.M[i] * P, cond);
            if (t_abs > 0.0 && cond > cond_cap) {
                stop = true;
                break;
            }
            tr.push(ang);
            rec.push_back({t_abs, tr.total()});
            if (t_abs >= horizon) {
                stop = true;
                break;
            }
        }
        if (!tr.within_cap())
            throw std::runtime_error("winding increment too large: refine path");
        P = Mend * P;
        P /= P.cwiseAbs().maxCoeff();
        if (j > 100000) throw std::runtime_error("mean index: horizon walk stuck");
    }
    if (rec.size() < 2) throw std::runtime_error("mean index: path too short");
    const Record r2 = rec.back();
    size_t i1 = 0;
    while (i1 + 1 < rec.size() && rec[i1].t < 0.25 * r2.t) ++i1;
    if (i1 + 1 >= rec.size()) i1 = rec.size() - 2;
    const Record r1 = rec[i1];
    return T * (r2.w - r1.w) / ((r2.t - r1.t) * kPi);
}

// Closed-form mean index for the time-T flow of a constant linear Hamiltonian
// field L: (T/pi) times the Krein-signed sum of the elliptic rotation rates.
inline double mean_index_linear(const Mat& L, double T) {
    const int d = static_cast<int>(L.rows());
    Eigen::EigenSolver<Mat> es(L);
    const Mat K = jq_matrix(d / 2);
    const CMat Kc = K.cast<std::complex<double>>();
    double sum = 0.0;
    for (int i = 0; i < d; ++i) {
        const std::complex<double> mu = es.eigenvalues()(i);
        if (std::abs(mu.real()) > 1e-9 || mu.imag() <= 1e-9) continue;
        const CVec v = es.eigenvectors().col(i);
        const double krein = (std::complex<double>(0.0, -1.0) * (v.adjoint() * Kc * v)(0)).real();
        sum += (krein > 0 ? 1.0 : -1.0) * mu.imag();
    }
    return T * sum / kPi;
}

// Conley–Zehnder index of a non-degenerate path. Exact in dimension two via
// the branch of the polar winding selected by the endpoint type; in higher
// dimensions the endpoint correction is assembled from the semisimple
// spectral decomposition.
inline int cz_index(const SymplecticPath& path) {
    const Mat Mend = path.end();
    const int d = path.dim();
    const double w = detail_idx::domain_winding(path);

    auto spect = detail_idx::classify_endpoint(Mend);
    if (spect.degenerate) throw DegenerateEndpoint("endpoint has eigenvalue one");

    if (d == 2) {
        const double tr = Mend.trace();
        if (tr > 2.0) return 2 * static_cast<int>(std::llround(w / (2.0 * kPi)));
        if (tr < -2.0)
            return 2 * static_cast<int>(std::llround((w - kPi) / (2.0 * kPi))) + 1;
        return 2 * static_cast<int>(std::floor(w / (2.0 * kPi))) + 1;
    }

    double corr = 0.0;
    for (const auto& cl : spect.elliptic)
        corr += cl.krein_pos * (kPi - cl.theta) + cl.krein_neg * (-kPi + cl.theta);
    const double raw = (w + corr) / kPi;
    return static_cast<int>(std::llround(raw));
}

inline bool check_gap(const IndexReport& r, int n) {
    if (!r.nondegenerate || !r.cz) return false;
    const double gap = std::abs(r.mean - static_cast<double>(*r.cz));
    return gap >= 0.0 && gap < static_cast<double>(n);
}

inline IndexReport make_index_report(const SymplecticPath& path) {
    IndexReport r;
    r.mean = mean_index(path);
    try {
        r.cz = cz_index(path);
        r.nondegenerate = true;
    } catch (const DegenerateEndpoint&) {
        r.cz.reset();
        r.nondegenerate = false;
    }
    r.gap_ok = check_gap(r, path.dim() / 2);
    return r;
}

// Dichotomy test for 4-dimensional monodromies: zero asymptotic mean index
// happens exactly when the spectrum is off the unit circle entirely or forms
// two elliptic pairs with opposite signed angles, and in both cases the index
// of the unwound path vanishes.
inline bool zero_mean_implies_zero_cz_4d(const Mat& monodromy) {
    if (monodromy.rows() != 4 || monodromy.cols() != 4)
        throw std::invalid_argument("dichotomy test needs a 4x4 monodromy");
    auto spect = detail_idx::classify_endpoint(monodromy);
    if (spect.degenerate)
        throw std::invalid_argument("dichotomy test needs a non-degenerate monodromy");
    double asym = 0.0;
    double corr = 0.0;
    for (const auto& cl : spect.elliptic) {
        asym += (cl.krein_pos - cl.krein_neg) * cl.theta;
        corr += cl.krein_pos * (kPi - cl.theta) + cl.krein_neg * (-kPi + cl.theta);
    }
    if (std::abs(asym) > 1e-9) return false;  // non-zero mean: not applicable
    const int cz_unwound = static_cast<int>(std::llround(corr / kPi));
    return cz_unwound == 0;
}

}  // namespace hyplab
