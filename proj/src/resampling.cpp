#include "wifsmc/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace wifsmc {

namespace {

// F^{-1}(u): the unique i with F(i-1) < u <= F(i), 0-based result
std::size_t lookup(const WeightVector& wv, double u) {
  const auto& F = wv.cum;
  auto it = std::lower_bound(F.begin() + 1, F.end(), u);
  if (it == F.end()) --it;
  return static_cast<std::size_t>(it - F.begin()) - 1;
}

Permutation scheme_order(const SchemeId& scheme, const std::vector<double>& g) {
  if (scheme.ordering == Ordering::mean_partition && scheme.supports_ordering())
    return mean_partition(g);
  return Permutation::identity(g.size());
}

std::vector<double> reorder(const std::vector<double>& g, const Permutation& p) {
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[p.perm[i]];
  return out;
}

AncestorVector inverse_systematic_like(const Permutation& p, const WeightVector& wp,
                                       const std::vector<double>& u_slots) {
  // A^{perm(i)} = perm(F_perm^{-1}(u_i))
  const std::size_t n = wp.size();
  AncestorVector a;
  a.a.resize(n);
  for (std::size_t i = 0; i < n; ++i) a.a[p.perm[i]] = p.perm[lookup(wp, u_slots[i])];
  return a;
}

AncestorVector repeat_indices(const std::vector<long>& counts) {
  AncestorVector a;
  long total = 0;
  for (long c : counts) total += c;
  a.a.reserve(static_cast<std::size_t>(total));
  for (std::size_t i = 0; i < counts.size(); ++i)
    for (long c = 0; c < counts[i]; ++c) a.a.push_back(i);
  return a;
}

// --- SSP (Algorithm of Gerber, Chopin & Whiteley, with processing order) ---
//
// Shared between the sampler and the exact-law enumeration: `coin` receives
// the interchange probability and returns true to interchange. The sampler
// flips a real coin; the enumeration branches on both outcomes.
AncestorVector ssp_core(const WeightVector& wv, const Permutation& order,
                        const std::function<bool(double)>& coin) {
  const std::size_t n = wv.size();
  thread_local std::vector<long> r;
  thread_local std::vector<double> p;
  r.assign(n, 0);
  p.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double nw = 1.0 + wv.eps[i];
    r[i] = static_cast<long>(std::floor(nw));
    p[i] = nw - static_cast<double>(r[i]);
  }
  if (n == 1) return AncestorVector::identity(1);

  std::size_t a = order.perm[0], b = order.perm[1];
  for (std::size_t k = 2; k <= n; ++k) {
    double da = std::max(0.0, std::min(p[b], 1.0 - p[a]));
    double db = std::max(0.0, std::min(p[a], 1.0 - p[b]));
    if (da > 0.0 && coin(da / (da + db))) {
      std::swap(a, b);
      std::swap(da, db);
    }
    const std::size_t next = order.perm[std::min(k, n - 1)];
    if (p[a] + p[b] < 1.0 - 1e-12) {
      p[a] += da;
      b = next;
    } else {
      r[a] += 1;
      p[b] -= da;
      a = next;
    }
  }
  long total = std::accumulate(r.begin(), r.end(), 0L);
  if (total == static_cast<long>(n) - 1) {
    // leftover fractional mass numerically zero; round the open slot
    std::size_t open = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i)
      if (p[i] > best) best = p[i], open = i;
    r[open] += 1;
  } else if (total != static_cast<long>(n)) {
    throw std::logic_error("ssp: offspring counts do not sum to N");
  }
  return repeat_indices(r);
}

double positive_excess(const WeightVector& wv) {
  double p = 0.0;
  for (double e : wv.eps) p += std::max(0.0, e);
  return p;
}

}  // namespace

std::string SchemeId::name() const {
  std::string base;
  switch (kind) {
    case SchemeKind::multinomial: base = "multinomial"; break;
    case SchemeKind::residual: base = "residual"; break;
    case SchemeKind::killing: base = "killing"; break;
    case SchemeKind::stratified: base = "stratified"; break;
    case SchemeKind::systematic: base = "systematic"; break;
    case SchemeKind::ssp: base = "ssp"; break;
    case SchemeKind::symmetrised_systematic: base = "symmetrised-systematic"; break;
  }
  if (ordering == Ordering::mean_partition) base += "+partition";
  return base;
}

SchemeId SchemeId::parse(const std::string& name) {
  SchemeId id;
  std::string base = name;
  if (auto pos = name.find("+partition"); pos != std::string::npos) {
    id.ordering = Ordering::mean_partition;
    base = name.substr(0, pos);
  }
  if (base == "multinomial")
    id.kind = SchemeKind::multinomial;
  else if (base == "residual")
    id.kind = SchemeKind::residual;
  else if (base == "killing")
    id.kind = SchemeKind::killing;
  else if (base == "stratified")
    id.kind = SchemeKind::stratified;
  else if (base == "systematic")
    id.kind = SchemeKind::systematic;
  else if (base == "ssp")
    id.kind = SchemeKind::ssp;
  else if (base == "symmetrised-systematic")
    id.kind = SchemeKind::symmetrised_systematic;
  else
    throw std::invalid_argument("unknown resampling scheme: " + name);
  if (id.ordering == Ordering::mean_partition && !id.supports_ordering())
    throw std::invalid_argument("mean-partition ordering not valid for " + base);
  return id;
}

std::vector<SchemeId> all_schemes() {
  std::vector<SchemeId> out;
  for (const char* n :
       {"multinomial", "residual", "killing", "stratified", "stratified+partition", "systematic",
        "systematic+partition", "ssp", "ssp+partition", "symmetrised-systematic"})
    out.push_back(SchemeId::parse(n));
  return out;
}

AncestorVector resample(const SchemeId& scheme, const std::vector<double>& g, Rng& rng) {
  // scratch buffers: resample sits inside the per-step filter loop, and the
  // WeightVector allocations dominate its cost when reallocated every call
  thread_local WeightVector wv;
  normalize_into(g, wv);
  const std::size_t n = wv.size();

  switch (scheme.kind) {
    case SchemeKind::multinomial: {
      AncestorVector a;
      a.a.resize(n);
      for (std::size_t i = 0; i < n; ++i) a.a[i] = lookup(wv, uniform01(rng));
      return a;
    }
    case SchemeKind::residual: {
      thread_local std::vector<long> r;
      thread_local std::vector<double> res;
      r.assign(n, 0);
      res.assign(n, 0.0);
      long taken = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double nw = 1.0 + wv.eps[i];
        r[i] = static_cast<long>(std::floor(nw));
        res[i] = nw - static_cast<double>(r[i]);
        taken += r[i];
      }
      AncestorVector a = repeat_indices(r);
      const long rem = static_cast<long>(n) - taken;
      if (rem > 0) {
        thread_local WeightVector rv;
        normalize_into(res, rv);
        for (long k = 0; k < rem; ++k) a.a.push_back(lookup(rv, uniform01(rng)));
      }
      return a;
    }
    case SchemeKind::killing: {
      const double gmax = *std::max_element(wv.g.begin(), wv.g.end());
      AncestorVector a;
      a.a.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (uniform01(rng) <= wv.g[i] / gmax)
          a.a[i] = i;
        else
          a.a[i] = lookup(wv, uniform01(rng));
      }
      return a;
    }
    case SchemeKind::stratified:
    case SchemeKind::systematic: {
      Permutation p = scheme_order(scheme, g);
      thread_local std::vector<double> reordered;
      reordered.resize(n);
      for (std::size_t i = 0; i < n; ++i) reordered[i] = g[p.perm[i]];
      thread_local WeightVector wp;
      normalize_into(reordered, wp);
      std::vector<double> slots(n);
      const double nn = static_cast<double>(n);
      if (scheme.kind == SchemeKind::systematic) {
        const double u = uniform01(rng);
        for (std::size_t i = 0; i < n; ++i) slots[i] = (static_cast<double>(i) + u) / nn;
      } else {
        for (std::size_t i = 0; i < n; ++i)
          slots[i] = (static_cast<double>(i) + uniform01(rng)) / nn;
      }
      return inverse_systematic_like(p, wp, slots);
    }
    case SchemeKind::ssp: {
      Permutation p = scheme_order(scheme, g);
      return ssp_core(wv, p, [&rng](double q) { return uniform01(rng) <= q; });
    }
    case SchemeKind::symmetrised_systematic: {
      const double p = positive_excess(wv);
      if (p > 1.0) {
        if (!scheme.fallback) throw SymmetrisedConditionViolated();
        SchemeId fb;
        fb.kind = SchemeKind::ssp;
        fb.ordering = Ordering::mean_partition;
        return resample(fb, g, rng);
      }
      const double u = uniform01(rng);
      if (u > p) return AncestorVector::identity(n);
      // reuse u for the elimination pick, one more uniform for duplication
      std::size_t k = n, l = n;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double m = std::max(0.0, -wv.eps[i]);
        if (m == 0.0) continue;
        acc += m;
        k = i;
        if (u <= acc) break;
      }
      const double u2 = uniform01(rng) * p;
      acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double m = std::max(0.0, wv.eps[i]);
        if (m == 0.0) continue;
        acc += m;
        l = i;
        if (u2 <= acc) break;
      }
      if (k == n || l == n) return AncestorVector::identity(n);
      return AncestorVector::single_event(n, k, l);
    }
  }
  throw std::logic_error("unreachable");
}

namespace {

// Enumerates product laws: position i takes value j with probability marg[i][j].
void product_dfs(const std::vector<std::vector<double>>& marg, std::size_t pos,
                 AncestorVector& partial, double prob, ResamplingDistribution& out) {
  if (prob == 0.0) return;
  if (pos == marg.size()) {
    out[partial] += prob;
    return;
  }
  for (std::size_t j = 0; j < marg[pos].size(); ++j) {
    if (marg[pos][j] == 0.0) continue;
    partial.a[pos] = j;
    product_dfs(marg, pos + 1, partial, prob * marg[pos][j], out);
  }
}

ResamplingDistribution product_law(const std::vector<std::vector<double>>& marg) {
  ResamplingDistribution out;
  AncestorVector partial;
  partial.a.assign(marg.size(), 0);
  product_dfs(marg, 0, partial, 1.0, out);
  return out;
}

// stratified marginal: P(A_i = j) = N |(F(j-1), F(j)] \cap ((i-1)/N, i/N]|
std::vector<std::vector<double>> stratified_marginals(const WeightVector& wv) {
  const std::size_t n = wv.size();
  const double nn = static_cast<double>(n);
  std::vector<std::vector<double>> marg(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = static_cast<double>(i) / nn, hi = static_cast<double>(i + 1) / nn;
    for (std::size_t j = 0; j < n; ++j) {
      const double len = std::min(wv.cum[j + 1], hi) - std::max(wv.cum[j], lo);
      if (len > 0.0) marg[i][j] = nn * len;
    }
  }
  return marg;
}

void ssp_exact_dfs(const WeightVector& wv, const Permutation& order,
                   std::vector<bool>& coins, ResamplingDistribution& out) {
  // Replays the algorithm once per coin pattern, recording the probability of
  // that pattern; patterns are extended lazily as coins are consumed.
  struct Replay {
    const std::vector<bool>& coins;
    std::size_t used = 0;
    double prob = 1.0;
    bool need_more = false;
    bool operator()(double q) {
      if (q >= 1.0) {
        prob *= q > 1.0 ? 0.0 : 1.0;  // certain interchange, no branching
        return true;
      }
      if (used == coins.size()) {
        need_more = true;
        return false;
      }
      const bool flip = coins[used++];
      prob *= flip ? q : (1.0 - q);
      return flip;
    }
  };

  Replay rp{coins};
  AncestorVector a = ssp_core(wv, order, std::ref(rp));
  if (rp.need_more) {
    coins.push_back(false);
    ssp_exact_dfs(wv, order, coins, out);
    coins.back() = true;
    ssp_exact_dfs(wv, order, coins, out);
    coins.pop_back();
    return;
  }
  if (rp.prob > 0.0) out[a] += rp.prob;
}

}  // namespace

ResamplingDistribution exact_distribution(const SchemeId& scheme, const std::vector<double>& g) {
  const std::size_t n = g.size();
  if (n > kMaxEnumerationN) throw TooLargeForEnumeration();
  WeightVector wv = normalize(g);

  switch (scheme.kind) {
    case SchemeKind::multinomial: {
      std::vector<std::vector<double>> marg(n, wv.w);
      return product_law(marg);
    }
    case SchemeKind::killing: {
      const double gmax = *std::max_element(wv.g.begin(), wv.g.end());
      std::vector<std::vector<double>> marg(n, std::vector<double>(n, 0.0));
      for (std::size_t i = 0; i < n; ++i) {
        const double surv = wv.g[i] / gmax;
        for (std::size_t j = 0; j < n; ++j) marg[i][j] = (1.0 - surv) * wv.w[j];
        marg[i][i] += surv;
      }
      return product_law(marg);
    }
    case SchemeKind::residual: {
      std::vector<long> r(n);
      std::vector<double> res(n);
      long taken = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double nw = 1.0 + wv.eps[i];
        r[i] = static_cast<long>(std::floor(nw));
        res[i] = nw - static_cast<double>(r[i]);
        taken += r[i];
      }
      AncestorVector prefix = repeat_indices(r);
      const long rem = static_cast<long>(n) - taken;
      ResamplingDistribution out;
      if (rem == 0) {
        out[prefix] = 1.0;
        return out;
      }
      WeightVector rv = normalize(res);
      std::vector<std::vector<double>> marg(static_cast<std::size_t>(rem), rv.w);
      for (auto& [tail, prob] : product_law(marg)) {
        AncestorVector a = prefix;
        a.a.insert(a.a.end(), tail.a.begin(), tail.a.end());
        out[a] += prob;
      }
      return out;
    }
    case SchemeKind::stratified: {
      Permutation p = scheme_order(scheme, g);
      WeightVector wp = normalize(reorder(g, p));
      auto marg = stratified_marginals(wp);
      ResamplingDistribution out;
      for (auto& [ap, prob] : product_law(marg)) {
        AncestorVector a;
        a.a.resize(n);
        for (std::size_t i = 0; i < n; ++i) a.a[p.perm[i]] = p.perm[ap.a[i]];
        out[a] += prob;
      }
      return out;
    }
    case SchemeKind::systematic: {
      Permutation p = scheme_order(scheme, g);
      WeightVector wp = normalize(reorder(g, p));
      // the outcome is piecewise constant in U with breakpoints frac(N F(j))
      std::vector<double> cuts{0.0, 1.0};
      const double nn = static_cast<double>(n);
      for (std::size_t j = 1; j < n; ++j) {
        double b = nn * wp.cum[j];
        b -= std::floor(b);
        if (b > 0.0 && b < 1.0) cuts.push_back(b);
      }
      std::sort(cuts.begin(), cuts.end());
      cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
      ResamplingDistribution out;
      std::vector<double> slots(n);
      for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double len = cuts[s + 1] - cuts[s];
        if (len <= 0.0) continue;
        const double u = 0.5 * (cuts[s] + cuts[s + 1]);
        for (std::size_t i = 0; i < n; ++i) slots[i] = (static_cast<double>(i) + u) / nn;
        out[inverse_systematic_like(p, wp, slots)] += len;
      }
      return out;
    }
    case SchemeKind::ssp: {
      Permutation p = scheme_order(scheme, g);
      std::vector<bool> coins;
      ResamplingDistribution out;
      ssp_exact_dfs(wv, p, coins, out);
      return out;
    }
    case SchemeKind::symmetrised_systematic: {
      const double p = positive_excess(wv);
      if (p > 1.0) {
        if (!scheme.fallback) throw SymmetrisedConditionViolated();
        SchemeId fb;
        fb.kind = SchemeKind::ssp;
        fb.ordering = Ordering::mean_partition;
        return exact_distribution(fb, g);
      }
      ResamplingDistribution out;
      if (p < 1.0) out[AncestorVector::identity(n)] = 1.0 - p;
      for (std::size_t k = 0; k < n; ++k) {
        const double pk = std::max(0.0, -wv.eps[k]);
        if (pk == 0.0) continue;
        for (std::size_t l = 0; l < n; ++l) {
          const double pl = std::max(0.0, wv.eps[l]);
          if (pl == 0.0) continue;
          out[AncestorVector::single_event(n, k, l)] += pk * pl / p;
        }
      }
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

std::vector<double> expected_offspring(const ResamplingDistribution& dist) {
  if (dist.empty()) return {};
  std::vector<double> acc(dist.begin()->first.size(), 0.0);
  for (const auto& [a, prob] : dist) {
    auto counts = a.offspring();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += prob * static_cast<double>(counts[i]);
  }
  return acc;
}

}  // namespace wifsmc
