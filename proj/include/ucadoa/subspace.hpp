#pragma once

#include "ucadoa/array.hpp"
#include "ucadoa/types.hpp"

namespace ucadoa {

struct SubspaceData {
    MatC reduced;         // N x k, snapshot matrix compressed onto the signal space
    MatC signal_basis;    // N x k, orthonormal
    MatC noise_basis;     // N x (N-k), orthonormal, orthogonal to signal_basis
    VecR singular_values; // min(N, T), descending
    int k = 0;
};

// SVD reduction X = U S V^H; reduced = X * V_k. Left/right singular pairs are
// phase-normalized jointly (largest-magnitude entry of each V column made real
// positive) so the output is deterministic; noise-side U columns are
// normalized against their own largest entry.
SubspaceData reduce(const SnapshotMatrix& x, int k);

// (1/T) X X^H, exactly Hermitian.
MatC sample_covariance(const SnapshotMatrix& x);

// Model order by the sphericity-test information criterion over the sample
// covariance spectrum: the k minimizing
//   -2 T (N-k) log(gm_k / am_k) + k (2N - k) log(T),
// gm/am the geometric/arithmetic means of the N-k smallest eigenvalues.
// Eigenvalues are floored at lambda_max * 1e-12 so a rank-deficient (noiseless)
// spectrum is handled; k is searched in [1, min(k_max, N-2)].
int select_model_order(const SnapshotMatrix& x, int k_max);

} // namespace ucadoa
