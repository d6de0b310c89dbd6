#include "ucadoa/subspace.hpp"

#include <cmath>
#include <limits>

namespace ucadoa {

namespace {

// Rotate column i of u and v by the unit phase that makes the
// largest-magnitude entry of the reference column real positive.
void fix_phase(MatC& ref, MatC* partner, int i) {
    int arg = 0;
    ref.col(i).cwiseAbs().maxCoeff(&arg);
    const cxd pivot = ref(arg, i);
    const double mag = std::abs(pivot);
    if (mag == 0.0) return;
    const cxd omega = std::conj(pivot) / mag;
    ref.col(i) *= omega;
    if (partner) partner->col(i) *= omega;
}

} // namespace

SubspaceData reduce(const SnapshotMatrix& x, int k) {
    const int n = static_cast<int>(x.data.rows());
    const int t = static_cast<int>(x.data.cols());
    if (n < 1 || t < 1) throw std::invalid_argument("reduce: empty snapshot matrix");
    if (k < 1 || k >= n || k > t)
        throw std::invalid_argument("reduce: k must satisfy 1 <= k < N and k <= T");

    Eigen::JacobiSVD<MatC> svd(x.data, Eigen::ComputeFullU | Eigen::ComputeThinV);
    MatC u = svd.matrixU(); // N x N
    MatC v = svd.matrixV(); // T x min(N,T)

    // Joint phase per signal pair keeps U S V^H intact; the V entry is the anchor.
    for (int i = 0; i < k; ++i) fix_phase(v, &u, i);
    for (int i = k; i < n; ++i) fix_phase(u, nullptr, i);

    SubspaceData out;
    out.k = k;
    out.signal_basis = u.leftCols(k);
    out.noise_basis = u.rightCols(n - k);
    out.singular_values = svd.singularValues();
    out.reduced = x.data * v.leftCols(k);
    return out;
}

MatC sample_covariance(const SnapshotMatrix& x) {
    const int t = static_cast<int>(x.data.cols());
    if (x.data.rows() < 1 || t < 1)
        throw std::invalid_argument("sample_covariance: empty snapshot matrix");
    MatC r = MatC::Zero(x.data.rows(), x.data.rows());
    r.selfadjointView<Eigen::Lower>().rankUpdate(x.data, 1.0 / t);
    r.triangularView<Eigen::StrictlyUpper>() = r.adjoint();
    return r;
}

int select_model_order(const SnapshotMatrix& x, int k_max) {
    const int n = static_cast<int>(x.data.rows());
    const int t = static_cast<int>(x.data.cols());
    if (k_max < 1 || k_max >= std::min(n, t))
        throw std::invalid_argument("select_model_order: k_max must satisfy 1 <= k_max < min(N, T)");

    Eigen::SelfAdjointEigenSolver<MatC> eig(sample_covariance(x));
    VecR lambda = eig.eigenvalues().reverse(); // descending
    const double lambda_max = lambda(0);
    if (!(lambda_max > 0.0)) return 1; // all-zero data; any order fits equally
    const double floor_val = lambda_max * 1e-12;
    for (int i = 0; i < n; ++i) lambda(i) = std::max(lambda(i), floor_val);

    const int k_hi = std::min(k_max, n - 2);
    int best_k = 1;
    double best_bic = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= k_hi; ++k) {
        const int m = n - k;
        double log_sum = 0.0, sum = 0.0;
        for (int i = k; i < n; ++i) {
            log_sum += std::log(lambda(i));
            sum += lambda(i);
        }
        const double log_gm = log_sum / m;
        const double log_am = std::log(sum / m);
        const double bic = -2.0 * t * m * (log_gm - log_am) + k * (2.0 * n - k) * std::log(t);
        if (bic < best_bic) {
            best_bic = bic;
            best_k = k;
        }
    }
    return best_k;
}

} // namespace ucadoa
