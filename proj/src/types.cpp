#include "streamrec/types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace streamrec {

void SparseCoo::compress() {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.k != b.k) return a.k < b.k;
    if (a.j != b.j) return a.j < b.j;
    return a.i < b.i;
  });
  std::vector<Entry> out;
  out.reserve(entries.size());
  for (const Entry& e : entries) {
    if (!out.empty() && out.back().i == e.i && out.back().j == e.j &&
        out.back().k == e.k) {
      out.back().v += e.v;
    } else {
      out.push_back(e);
    }
  }
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const Entry& e) { return e.v == 0.0; }),
            out.end());
  entries = std::move(out);
}

void SparseCoo::validate() const {
  if (shape.size() != 2 && shape.size() != 3)
    throw std::invalid_argument("SparseCoo: shape must have 2 or 3 extents");
  for (Index ext : shape)
    if (ext < 0) throw std::invalid_argument("SparseCoo: negative extent");
  const Index n1 = shape[0], n2 = shape[1];
  const Index n3 = shape.size() == 3 ? shape[2] : 1;
  std::unordered_map<std::uint64_t, int> seen;
  seen.reserve(entries.size() * 2);
  for (const Entry& e : entries) {
    if (e.i < 0 || e.i >= n1 || e.j < 0 || e.j >= n2 || e.k < 0 || e.k >= n3)
      throw std::invalid_argument("SparseCoo: index out of range");
    if (!std::isfinite(e.v) || e.v == 0.0)
      throw std::invalid_argument("SparseCoo: entries must be finite and nonzero");
    std::uint64_t key =
        (static_cast<std::uint64_t>(e.i) * static_cast<std::uint64_t>(n2) +
         static_cast<std::uint64_t>(e.j)) *
            static_cast<std::uint64_t>(n3) +
        static_cast<std::uint64_t>(e.k);
    if (!seen.emplace(key, 1).second)
      throw std::invalid_argument("SparseCoo: duplicate index tuple");
  }
}

double SparseCoo::frob_norm() const {
  double s = 0.0;
  for (const Entry& e : entries) s += e.v * e.v;
  return std::sqrt(s);
}

Matrix SparseCoo::dense_matrix() const {
  if (order() != 2) throw std::invalid_argument("dense_matrix: order 2 required");
  Matrix m = Matrix::Zero(shape[0], shape[1]);
  for (const Entry& e : entries) m(e.i, e.j) += e.v;
  return m;
}

Tensor3 SparseCoo::dense_tensor() const {
  if (order() != 3) throw std::invalid_argument("dense_tensor: order 3 required");
  Tensor3 t(shape[0], shape[1], shape[2]);
  for (const Entry& e : entries) t(e.i, e.j, e.k) += e.v;
  return t;
}

CsrMatrix to_csr(const SparseCoo& m) {
  if (m.order() != 2) throw std::invalid_argument("to_csr: order 2 required");
  CsrMatrix c;
  c.rows = m.shape[0];
  c.cols = m.shape[1];
  c.row_ptr.assign(c.rows + 1, 0);
  for (const auto& e : m.entries) c.row_ptr[e.i + 1]++;
  for (Index r = 0; r < c.rows; ++r) c.row_ptr[r + 1] += c.row_ptr[r];
  c.col.resize(m.entries.size());
  c.val.resize(m.entries.size());
  std::vector<Index> cursor(c.row_ptr.begin(), c.row_ptr.end() - 1);
  for (const auto& e : m.entries) {
    Index p = cursor[e.i]++;
    c.col[p] = e.j;
    c.val[p] = e.v;
  }
  // keep columns ordered within each row so accumulation order is fixed
  for (Index r = 0; r < c.rows; ++r) {
    Index b = c.row_ptr[r], e = c.row_ptr[r + 1];
    std::vector<std::pair<Index, double>> tmp;
    tmp.reserve(e - b);
    for (Index p = b; p < e; ++p) tmp.emplace_back(c.col[p], c.val[p]);
    std::sort(tmp.begin(), tmp.end(),
              [](const auto& a, const auto& b2) { return a.first < b2.first; });
    for (Index p = b; p < e; ++p) {
      c.col[p] = tmp[p - b].first;
      c.val[p] = tmp[p - b].second;
    }
  }
  return c;
}

CsrMatrix csr_transpose(const CsrMatrix& m) {
  CsrMatrix t;
  t.rows = m.cols;
  t.cols = m.rows;
  t.row_ptr.assign(t.rows + 1, 0);
  for (Index c : m.col) t.row_ptr[c + 1]++;
  for (Index r = 0; r < t.rows; ++r) t.row_ptr[r + 1] += t.row_ptr[r];
  t.col.resize(m.col.size());
  t.val.resize(m.val.size());
  std::vector<Index> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (Index r = 0; r < m.rows; ++r) {
    for (Index p = m.row_ptr[r]; p < m.row_ptr[r + 1]; ++p) {
      Index q = cursor[m.col[p]]++;
      t.col[q] = r;  // ascending because outer loop visits rows in order
      t.val[q] = m.val[p];
    }
  }
  return t;
}

Index IdMap::at(std::int64_t id) const {
  auto it = idx_.find(id);
  if (it == idx_.end())
    throw std::invalid_argument("IdMap: unknown id " + std::to_string(id));
  return it->second;
}

Index IdMap::add(std::int64_t id) {
  auto [it, inserted] = idx_.emplace(id, static_cast<Index>(ids_.size()));
  if (!inserted)
    throw std::invalid_argument("IdMap: id already present " + std::to_string(id));
  ids_.push_back(id);
  return it->second;
}

std::int64_t IdMap::id_of(Index idx) const {
  if (idx < 0 || idx >= static_cast<Index>(ids_.size()))
    throw std::invalid_argument("IdMap: index out of range");
  return ids_[static_cast<size_t>(idx)];
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

Matrix Rng::gaussian_matrix(Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = gaussian();
  return m;
}

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace streamrec
