#pragma once

#include "streamrec/types.hpp"

#include <vector>

namespace streamrec {

// Unfoldings follow the convention X_[1](i, j + k*n2), X_[2](j, i + k*n1),
// X_[3](k, i + j*n1): the column index runs over the complementary indices
// with the lower mode fastest, so X_[m] = U_m C_[m] kron(U_b, U_a)^T for
// non-target modes a < b. mode arguments are 1-based.
Matrix unfold(const Tensor3& t, int mode);
SparseCoo unfold(const SparseCoo& t, int mode);
Tensor3 fold(const Matrix& m, int mode, std::array<Index, 3> dims);

// t x_mode m with m's columns contracted against the mode extent
// (m.cols() == dim(mode), new extent = m.rows()).
Tensor3 mode_product(const Tensor3& t, const Matrix& m, int mode);

struct TuckerFactors {
  Matrix u1, u2, u3;
  Tensor3 core;
};

// Validates 1 <= r_m <= n_m and r_m <= r_a * r_b (keeps core unfoldings at
// least as wide as tall); throws std::invalid_argument otherwise.
void check_tucker_ranks(std::array<Index, 3> dims, std::array<Index, 3> ranks);

TuckerFactors hosvd(const Tensor3& t, std::array<Index, 3> ranks);
// Sparse variant never materializes an unfolding densely: small modes use an
// exact streamed gram eigendecomposition, large modes a seeded randomized
// range finder driven by streamed gram-times-block products.
TuckerFactors hosvd(const SparseCoo& t, std::array<Index, 3> ranks, std::uint64_t seed);

struct HooiOptions {
  int max_sweeps = 50;
  double tol = 1e-6;  // on per-sweep improvement of relative fit error
};

struct HooiResult {
  TuckerFactors factors;
  int sweeps = 0;
  // relative fit errors: entry 0 is the init's, then one per sweep
  std::vector<double> fit_errors;
};

// Alternating least squares refinement. init == nullptr starts from HOSVD.
HooiResult hooi(const SparseCoo& t, std::array<Index, 3> ranks,
                const TuckerFactors* init, HooiOptions opts, std::uint64_t seed);
HooiResult hooi(const Tensor3& t, std::array<Index, 3> ranks,
                const TuckerFactors* init, HooiOptions opts, std::uint64_t seed);

struct Tucker2Result {
  Matrix u, v;   // modes 1 and 2
  Tensor3 core;  // r1 x r2 x n3, mode 3 left uncompressed
};

Tucker2Result tucker2(const Tensor3& t, Index r1, Index r2, HooiOptions opts);

}  // namespace streamrec
