#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "wifsmc/errors.hpp"

namespace wifsmc {

/// Normalised weights together with the derived quantities used throughout the
/// resampling analysis:
///   w[i]    = g[i] / sum(g)
///   eps[i]  = N*w[i] - 1
///   csum[i] = -sum_{j<=i} eps[j]              (csum[0] = csum[N] = 0)
///   cum[i]  = F(i) = sum_{j<=i} w[j] = (i - csum[i]) / N
/// F and csum are indexed 0..N.
struct WeightVector {
  std::vector<double> g;     // unnormalised, as given
  std::vector<double> w;     // normalised
  std::vector<double> eps;   // N*w - 1
  std::vector<double> cum;   // F(0..N)
  std::vector<double> csum;  // c(0..N)

  std::size_t size() const { return w.size(); }

  /// Assumption A.1 predicate: sum |eps| < 2 and there is m with
  /// eps[0..m-1] <= 0 < eps[m..N-1].
  bool nearly_uniform_partitioned() const;
};

/// Builds all derived fields from unnormalised weights.
/// Throws AllZeroWeights / NegativeWeight on degenerate input.
WeightVector normalize(const std::vector<double>& g);

/// Same, reusing out's buffers (the per-step filter path).
void normalize_into(const std::vector<double>& g, WeightVector& out);

/// A bijection of {0..N-1}. `perm[i]` is the original index placed at slot i.
struct Permutation {
  std::vector<std::size_t> perm;
  std::size_t boundary = 0;  // block size m when built by mean_partition

  std::size_t size() const { return perm.size(); }
  static Permutation identity(std::size_t n);
  Permutation inverse() const;
};

/// Partitions indices of u about the mean: slots 0..m-1 hold indices with
/// u <= mean, slots m.. hold indices with u > mean. Single Hoare sweep, O(N);
/// within-block order is implementation-defined but deterministic, and depends
/// only on the boolean pattern (u[i] <= mean).
Permutation mean_partition(const std::vector<double>& u);

/// Checks the two-block property of p for the value vector u.
bool is_mean_partition(const Permutation& p, const std::vector<double>& u);

/// Ancestor assignment a[0..N-1] (0-based indices into the parent cloud).
struct AncestorVector {
  std::vector<std::size_t> a;

  std::size_t size() const { return a.size(); }
  bool is_identity() const;
  std::vector<std::size_t> offspring() const;

  static AncestorVector identity(std::size_t n);
  /// The sequence 1:N with k omitted and l duplicated (0-based k, l).
  static AncestorVector single_event(std::size_t n, std::size_t k, std::size_t l);

  auto operator<=>(const AncestorVector&) const = default;
};

/// Canonical summary of a single-death resampling outcome: particle
/// `eliminated` leaves no offspring, particle `duplicated` leaves two.
struct EventSignature {
  std::size_t eliminated = 0;
  std::size_t duplicated = 0;

  auto operator<=>(const EventSignature&) const = default;
};

/// Classifies an ancestor vector by its offspring profile; returns true and
/// fills `sig` iff the profile is 1 everywhere except one 0 and one 2.
bool single_event_signature(const AncestorVector& a, EventSignature& sig);

/// Reindexes a particle cloud: output[i] = x[a[i]].
template <typename State>
std::vector<State> apply_ancestors(const std::vector<State>& x, const AncestorVector& anc) {
  if (x.size() != anc.size()) throw IndexOutOfRange("cloud/ancestor size mismatch");
  std::vector<State> out;
  out.reserve(x.size());
  for (std::size_t i = 0; i < anc.size(); ++i) {
    if (anc.a[i] >= x.size()) throw IndexOutOfRange("ancestor index out of range");
    out.push_back(x[anc.a[i]]);
  }
  return out;
}

}  // namespace wifsmc
