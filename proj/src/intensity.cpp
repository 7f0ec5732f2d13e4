#include "wifsmc/intensity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wifsmc {

PotentialValues PotentialValues::from(std::vector<double> v) {
  PotentialValues out;
  out.v = std::move(v);
  if (out.v.empty()) return out;
  out.vbar = std::accumulate(out.v.begin(), out.v.end(), 0.0) / static_cast<double>(out.v.size());
  out.vmin = *std::min_element(out.v.begin(), out.v.end());
  return out;
}

double IntensityTable::entry_sum() const {
  double s = 0.0;
  for (const auto& [sig, e] : entries) s += e.rate;
  return s;
}

double IntensityTable::rate(const EventSignature& sig) const {
  auto it = entries.find(sig);
  return it == entries.end() ? 0.0 : it->second.rate;
}

std::vector<double> IntensityTable::elimination_marginals(std::size_t n) const {
  std::vector<double> m(n, 0.0);
  for (const auto& [sig, e] : entries) m[sig.eliminated] += e.rate;
  return m;
}

std::vector<double> IntensityTable::duplication_marginals(std::size_t n) const {
  std::vector<double> m(n, 0.0);
  for (const auto& [sig, e] : entries) m[sig.duplicated] += e.rate;
  return m;
}

namespace {

std::vector<double> negated(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = -v[i];
  return out;
}

void require_mean_partition_of_neg_v(const Permutation& order, const PotentialValues& v) {
  if (!is_mean_partition(order, negated(v.v)))
    throw InvalidOrder("order is not a mean partition of -v");
}

void add_entry(IntensityTable& t, std::size_t k, std::size_t l, AncestorVector layout,
               double rate) {
  if (rate <= 0.0) return;
  auto [it, fresh] = t.entries.try_emplace(EventSignature{k, l});
  it->second.sig = EventSignature{k, l};
  if (fresh || it->second.layout.size() == 0) it->second.layout = std::move(layout);
  it->second.rate += rate;
}

IntensityTable killing_table(const PotentialValues& v) {
  const std::size_t n = v.size();
  IntensityTable t;
  for (std::size_t i = 0; i < n; ++i) {
    const double rate = (v.v[i] - v.vmin) / static_cast<double>(n);
    if (rate <= 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      AncestorVector a = AncestorVector::identity(n);
      a.a[i] = j;
      add_entry(t, i, j, std::move(a), rate);
    }
  }
  t.total = static_cast<double>(n - 1) * (v.vbar - v.vmin);
  return t;
}

// partial sums s[i] = sum_{j<=i} (v_perm(j) - vbar), s[0] = 0
std::vector<double> partial_sums(const PotentialValues& v, const Permutation& order) {
  std::vector<double> s(v.size() + 1, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i)
    s[i + 1] = s[i] + (v.v[order.perm[i]] - v.vbar);
  return s;
}

IntensityTable stratified_table(const PotentialValues& v, const Permutation& order) {
  const std::size_t n = v.size();
  IntensityTable t;
  auto s = partial_sums(v, order);
  for (std::size_t i = 1; i < n; ++i) {  // event: slot i hands its position to slot i+1
    const double rate = s[i];
    AncestorVector a = AncestorVector::identity(n);
    a.a[order.perm[i - 1]] = order.perm[i];
    add_entry(t, order.perm[i - 1], order.perm[i], std::move(a), rate);
  }
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    total += static_cast<double>(j + 1) * (v.vbar - v.v[order.perm[j]]);
  t.total = total;
  return t;
}

IntensityTable systematic_table(const PotentialValues& v, const Permutation& order) {
  const std::size_t n = v.size();
  IntensityTable t;
  auto s = partial_sums(v, order);
  // block boundary: slots 1..m hold v >= vbar under a mean partition of -v
  std::size_t m = 0;
  while (m < n && v.v[order.perm[m]] >= v.vbar) ++m;
  for (std::size_t k = 1; k <= m; ++k) {
    for (std::size_t l = m + 1; l <= n; ++l) {
      const double rate = std::min(s[k], s[l - 1]) - std::max(s[k - 1], s[l]);
      if (rate <= 0.0) continue;
      // slot layout [k -> l]_N, mapped back through the order
      AncestorVector a;
      a.a.resize(n);
      for (std::size_t i = 1; i <= n; ++i) {
        const std::size_t src = (i >= k && i < l) ? i + 1 : i;
        a.a[order.perm[i - 1]] = order.perm[src - 1];
      }
      add_entry(t, order.perm[k - 1], order.perm[l - 1], std::move(a), rate);
    }
  }
  double total = 0.0;
  for (double vi : v.v) total += std::max(0.0, v.vbar - vi);
  t.total = total;
  return t;
}

IntensityTable ssp_table(const PotentialValues& v) {
  const std::size_t n = v.size();
  IntensityTable t;
  double total = 0.0;
  for (double vi : v.v) total += std::max(0.0, vi - v.vbar);
  t.total = total;
  if (total <= 0.0) return t;
  for (std::size_t k = 0; k < n; ++k) {
    const double up = std::max(0.0, v.v[k] - v.vbar);
    if (up == 0.0) continue;
    for (std::size_t l = 0; l < n; ++l) {
      const double down = std::max(0.0, v.vbar - v.v[l]);
      if (down == 0.0) continue;
      add_entry(t, k, l, AncestorVector::single_event(n, k, l), up * down / total);
    }
  }
  return t;
}

}  // namespace

IntensityTable intensity_table(const SchemeId& scheme, const PotentialValues& v,
                               const Permutation& order) {
  if (!scheme.has_intensity_limit())
    throw NoIntensityLimit(scheme.name() + " has no continuous-time intensity limit");
  switch (scheme.kind) {
    case SchemeKind::killing:
      return killing_table(v);
    case SchemeKind::stratified:
      require_mean_partition_of_neg_v(order, v);
      return stratified_table(v, order);
    case SchemeKind::systematic:
      require_mean_partition_of_neg_v(order, v);
      return systematic_table(v, order);
    case SchemeKind::ssp:
    case SchemeKind::symmetrised_systematic:
      return ssp_table(v);
    default:
      throw NoIntensityLimit();
  }
}

double overall_rate(const SchemeId& scheme, const PotentialValues& v, const Permutation& order) {
  if (!scheme.has_intensity_limit()) throw NoIntensityLimit();
  const std::size_t n = v.size();
  switch (scheme.kind) {
    case SchemeKind::killing:
      return static_cast<double>(n - 1) * (v.vbar - v.vmin);
    case SchemeKind::stratified: {
      require_mean_partition_of_neg_v(order, v);
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        total += static_cast<double>(j + 1) * (v.vbar - v.v[order.perm[j]]);
      return total;
    }
    case SchemeKind::systematic: {
      require_mean_partition_of_neg_v(order, v);
      double total = 0.0;
      for (double vi : v.v) total += std::max(0.0, v.vbar - vi);
      return total;
    }
    case SchemeKind::ssp:
    case SchemeKind::symmetrised_systematic: {
      double total = 0.0;
      for (double vi : v.v) total += std::max(0.0, vi - v.vbar);
      return total;
    }
    default:
      throw NoIntensityLimit();
  }
}

IntensityTable numeric_intensity(const SchemeId& scheme, const PotentialValues& v, double delta) {
  if (v.size() > kMaxEnumerationN) throw TooLargeForEnumeration();
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  std::vector<double> g(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) g[i] = std::exp(-delta * v.v[i]);
  IntensityTable t;
  for (const auto& [a, prob] : exact_distribution(scheme, g)) {
    if (a.is_identity() || prob == 0.0) continue;
    EventSignature sig;
    if (single_event_signature(a, sig))
      add_entry(t, sig.eliminated, sig.duplicated, a, prob / delta);
    else
      t.other += prob / delta;
  }
  t.total = t.entry_sum() + t.other;
  return t;
}

IntensityTable richardson(const IntensityTable& coarse, const IntensityTable& fine) {
  IntensityTable out;
  auto visit = [&](const IntensityTable& t) {
    for (const auto& [sig, e] : t.entries)
      if (!out.entries.count(sig)) {
        out.entries[sig] = e;
        out.entries[sig].rate = 2.0 * fine.rate(sig) - coarse.rate(sig);
      }
  };
  visit(fine);
  visit(coarse);
  out.other = 2.0 * fine.other - coarse.other;
  out.total = 2.0 * fine.total - coarse.total;
  return out;
}

std::vector<double> check_unbiased_identity(const IntensityTable& table,
                                            const PotentialValues& v) {
  const std::size_t n = v.size();
  std::vector<double> res(n, 0.0);
  for (const auto& [sig, e] : table.entries) {
    auto counts = e.layout.offspring();
    for (std::size_t i = 0; i < n; ++i)
      res[i] += e.rate * (static_cast<double>(counts[i]) - 1.0);
  }
  for (std::size_t i = 0; i < n; ++i) res[i] -= v.vbar - v.v[i];
  return res;
}

RateOrdering rate_ordering(const PotentialValues& v, const Permutation& order) {
  require_mean_partition_of_neg_v(order, v);
  RateOrdering out;
  out.killing = overall_rate(SchemeId{SchemeKind::killing}, v, order);
  out.stratified = overall_rate(SchemeId{SchemeKind::stratified}, v, order);
  out.systematic_ssp = overall_rate(SchemeId{SchemeKind::systematic}, v, order);
  out.killing_ge_systematic = out.killing >= out.systematic_ssp - 1e-12;
  out.stratified_ge_systematic = out.stratified >= out.systematic_ssp - 1e-12;
  const double diff = out.killing - out.stratified;
  out.killing_vs_stratified = diff > 1e-12 ? 1 : (diff < -1e-12 ? -1 : 0);
  return out;
}

}  // namespace wifsmc
