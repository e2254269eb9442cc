#include "streamrec/metrics.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace streamrec {

std::vector<Index> top_indices(const Vector& scores, int n,
                               const std::vector<char>* excluded) {
  if (n < 0) throw std::invalid_argument("top_indices: n must be >= 0");
  std::vector<Index> idx;
  idx.reserve(scores.size());
  for (Index i = 0; i < scores.size(); ++i)
    if (!excluded || !(*excluded)[i]) idx.push_back(i);
  const size_t keep = std::min<size_t>(n, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + keep, idx.end(),
                    [&](Index a, Index b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  idx.resize(keep);
  return idx;
}

double reciprocal_rank(const std::vector<Index>& ranked, Index target) {
  for (size_t p = 0; p < ranked.size(); ++p)
    if (ranked[p] == target) return 1.0 / static_cast<double>(p + 1);
  return 0.0;
}

double weighted_jaccard(const std::vector<Index>& a, const std::vector<Index>& b,
                        int n) {
  std::unordered_map<Index, std::pair<double, double>> w;
  for (size_t p = 0; p < a.size() && p < static_cast<size_t>(n); ++p)
    w[a[p]].first = 1.0 / static_cast<double>(p + 1);
  for (size_t p = 0; p < b.size() && p < static_cast<size_t>(n); ++p)
    w[b[p]].second = 1.0 / static_cast<double>(p + 1);
  double num = 0.0, den = 0.0;
  for (const auto& [item, ww] : w) {
    num += std::min(ww.first, ww.second);
    den += std::max(ww.first, ww.second);
  }
  if (den == 0.0) return 1.0;
  return num / den;
}

}  // namespace streamrec
