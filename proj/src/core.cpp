#include "wifsmc/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wifsmc {

bool WeightVector::nearly_uniform_partitioned() const {
  const std::size_t n = size();
  double abs_sum = 0.0;
  for (double e : eps) abs_sum += std::abs(e);
  if (abs_sum >= 2.0) return false;
  // eps[0..m-1] <= 0 < eps[m..N-1] for some m in [1, N]
  std::size_t m = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (eps[i] > 0.0) {
      m = i;
      break;
    }
  }
  if (m == 0) return false;  // need at least one non-positive entry
  for (std::size_t i = m; i < n; ++i)
    if (eps[i] <= 0.0) return false;
  return true;
}

WeightVector normalize(const std::vector<double>& g) {
  WeightVector out;
  normalize_into(g, out);
  return out;
}

void normalize_into(const std::vector<double>& g, WeightVector& out) {
  const std::size_t n = g.size();
  if (n == 0) throw AllZeroWeights("empty weight vector");
  double sum = 0.0;
  for (double gi : g) {
    if (gi < 0.0) throw NegativeWeight();
    if (std::isnan(gi)) throw NegativeWeight("NaN weight");
    sum += gi;
  }
  if (sum <= 0.0) throw AllZeroWeights();

  out.g.assign(g.begin(), g.end());
  out.w.resize(n);
  out.eps.resize(n);
  out.cum.assign(n + 1, 0.0);
  out.csum.assign(n + 1, 0.0);

  const bool uniform = std::all_of(g.begin(), g.end(), [&](double gi) { return gi == g[0]; });
  const double nn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (uniform) {
      out.w[i] = 1.0 / nn;
      out.eps[i] = 0.0;
    } else {
      out.w[i] = g[i] / sum;
      // computed as (N g_i - sum)/sum rather than N*w_i - 1: keeps the tiny
      // excesses accurate when the weights are nearly uniform
      out.eps[i] = (nn * g[i] - sum) / sum;
    }
  }
  double c = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    c -= out.eps[i];
    out.csum[i + 1] = c;
    out.cum[i + 1] = (static_cast<double>(i + 1) - c) / nn;
  }
  out.csum[n] = uniform ? 0.0 : out.csum[n];
  out.cum[n] = 1.0;
}

Permutation Permutation::identity(std::size_t n) {
  Permutation p;
  p.perm.resize(n);
  std::iota(p.perm.begin(), p.perm.end(), std::size_t{0});
  p.boundary = n;
  return p;
}

Permutation Permutation::inverse() const {
  Permutation inv;
  inv.perm.resize(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv.perm[perm[i]] = i;
  inv.boundary = boundary;
  return inv;
}

Permutation mean_partition(const std::vector<double>& u) {
  const std::size_t n = u.size();
  Permutation p = Permutation::identity(n);
  if (n == 0) return p;
  double mean = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(n);
  // Hoare two-pointer sweep on the predicate u <= mean; ties go left
  std::size_t lo = 0, hi = n;
  while (true) {
    while (lo < hi && u[p.perm[lo]] <= mean) ++lo;
    while (lo < hi && u[p.perm[hi - 1]] > mean) --hi;
    if (lo + 1 >= hi) break;
    std::swap(p.perm[lo], p.perm[hi - 1]);
    ++lo;
    --hi;
  }
  p.boundary = lo;
  return p;
}

bool is_mean_partition(const Permutation& p, const std::vector<double>& u) {
  const std::size_t n = u.size();
  if (p.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (std::size_t i : p.perm) {
    if (i >= n || seen[i]) return false;
    seen[i] = true;
  }
  double mean = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(n);
  // must be <= mean on a prefix and > mean on the suffix
  std::size_t m = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (u[p.perm[i]] > mean) {
      m = i;
      break;
    }
  }
  for (std::size_t i = m; i < n; ++i)
    if (u[p.perm[i]] <= mean) return false;
  return true;
}

bool AncestorVector::is_identity() const {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != i) return false;
  return true;
}

std::vector<std::size_t> AncestorVector::offspring() const {
  std::vector<std::size_t> c(a.size(), 0);
  for (std::size_t ai : a) {
    if (ai >= a.size()) throw IndexOutOfRange("ancestor index out of range");
    ++c[ai];
  }
  return c;
}

AncestorVector AncestorVector::identity(std::size_t n) {
  AncestorVector v;
  v.a.resize(n);
  std::iota(v.a.begin(), v.a.end(), std::size_t{0});
  return v;
}

AncestorVector AncestorVector::single_event(std::size_t n, std::size_t k, std::size_t l) {
  if (k >= n || l >= n) throw IndexOutOfRange("single_event index out of range");
  AncestorVector v;
  v.a.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (i != k) v.a.push_back(i);
  v.a.insert(std::lower_bound(v.a.begin(), v.a.end(), l), l);
  return v;
}

bool single_event_signature(const AncestorVector& a, EventSignature& sig) {
  auto counts = a.offspring();
  std::size_t zero = a.size(), two = a.size();
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 1) continue;
    if (counts[i] == 0 && zero == a.size())
      zero = i;
    else if (counts[i] == 2 && two == a.size())
      two = i;
    else
      return false;
  }
  if (zero == a.size() || two == a.size()) return false;
  sig = EventSignature{zero, two};
  return true;
}

}  // namespace wifsmc
