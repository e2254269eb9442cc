#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <unordered_map>
#include <vector>

namespace streamrec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Order-3 dense tensor, first index fastest: (i,j,k) lives at i + n1*(j + n2*k).
// Mode-1 unfolding is therefore a free reshape of the buffer.
class Tensor3 {
 public:
  Tensor3() : n_{0, 0, 0} {}
  Tensor3(Index n1, Index n2, Index n3)
      : n_{n1, n2, n3}, v_(Vector::Zero(n1 * n2 * n3)) {}

  double& operator()(Index i, Index j, Index k) {
    return v_[i + n_[0] * (j + n_[1] * k)];
  }
  double operator()(Index i, Index j, Index k) const {
    return v_[i + n_[0] * (j + n_[1] * k)];
  }

  Index dim(int m) const { return n_[m]; }  // m in {0,1,2}
  std::array<Index, 3> dims() const { return n_; }
  Index size() const { return v_.size(); }
  Vector& raw() { return v_; }
  const Vector& raw() const { return v_; }
  double norm() const { return v_.norm(); }
  void setZero() { v_.setZero(); }

 private:
  std::array<Index, 3> n_;
  Vector v_;
};

// Sparse COO container shared by the matrix and tensor paths. Order 2 entries
// keep k == 0. Producers call compress() before handing one to a model op.
struct SparseCoo {
  struct Entry {
    Index i, j, k;
    double v;
  };

  std::vector<Index> shape;  // 2 or 3 extents
  std::vector<Entry> entries;

  static SparseCoo matrix(Index rows, Index cols) {
    SparseCoo s;
    s.shape = {rows, cols};
    return s;
  }
  static SparseCoo tensor(Index n1, Index n2, Index n3) {
    SparseCoo s;
    s.shape = {n1, n2, n3};
    return s;
  }

  int order() const { return static_cast<int>(shape.size()); }
  Index nnz() const { return static_cast<Index>(entries.size()); }

  void add(Index i, Index j, double v) { entries.push_back({i, j, 0, v}); }
  void add(Index i, Index j, Index k, double v) { entries.push_back({i, j, k, v}); }

  // Sort by (k,j,i), sum duplicates, drop exact zeros.
  void compress();
  // Throws std::invalid_argument on out-of-range indices, non-finite or zero
  // values, or duplicate index tuples.
  void validate() const;

  double frob_norm() const;
  Matrix dense_matrix() const;   // order 2
  Tensor3 dense_tensor() const;  // order 3
};

struct CsrMatrix {
  Index rows = 0, cols = 0;
  std::vector<Index> row_ptr;  // rows + 1
  std::vector<Index> col;
  std::vector<double> val;
};

CsrMatrix to_csr(const SparseCoo& m);        // order 2
CsrMatrix csr_transpose(const CsrMatrix& m);

// Dense external id <-> contiguous internal index map, append only.
class IdMap {
 public:
  Index size() const { return static_cast<Index>(ids_.size()); }
  bool contains(std::int64_t id) const { return idx_.count(id) != 0; }
  std::optional<Index> find(std::int64_t id) const {
    auto it = idx_.find(id);
    if (it == idx_.end()) return std::nullopt;
    return it->second;
  }
  Index at(std::int64_t id) const;        // throws if absent
  Index add(std::int64_t id);             // throws if present
  std::int64_t id_of(Index idx) const;    // throws if out of range
  const std::vector<std::int64_t>& ids() const { return ids_; }

 private:
  std::unordered_map<std::int64_t, Index> idx_;
  std::vector<std::int64_t> ids_;
};

// Deterministic RNG: mt19937_64 stream with hand-rolled Box-Muller so that a
// seed produces the same draws on every platform (std::normal_distribution is
// implementation defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}

  std::uint64_t next_u64() { return g_(); }
  double uniform() {  // [0, 1)
    return static_cast<double>(g_() >> 11) * 0x1.0p-53;
  }
  double gaussian();
  Matrix gaussian_matrix(Index rows, Index cols);  // filled row by row

  // splitmix64 style mix for per-purpose seed streams
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 g_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace streamrec
