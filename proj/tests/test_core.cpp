#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "wifsmc/core.hpp"
#include "wifsmc/rng.hpp"

using namespace wifsmc;

TEST_CASE("normalize uniform weights is exact") {
  auto wv = normalize({2.0, 2.0, 2.0, 2.0});
  for (double w : wv.w) CHECK(w == 0.25);
  for (double e : wv.eps) CHECK(e == 0.0);
  for (double c : wv.csum) CHECK(c == 0.0);
  CHECK(wv.cum[0] == 0.0);
  CHECK(wv.cum[4] == 1.0);
  CHECK(wv.cum[2] == 0.5);
}

TEST_CASE("normalize two-point weights") {
  auto wv = normalize({0.4, 0.6});
  CHECK(wv.w[0] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(wv.w[1] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(wv.eps[0] == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(wv.eps[1] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(wv.csum[0] == 0.0);
  CHECK(wv.csum[1] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(std::abs(wv.csum[2]) < 1e-12);
}

TEST_CASE("normalize rejects degenerate input") {
  CHECK_THROWS_AS(normalize({0.0, 0.0, 0.0}), AllZeroWeights);
  CHECK_THROWS_AS(normalize({1.0, -0.5}), NegativeWeight);
  CHECK_THROWS_AS(normalize({}), AllZeroWeights);
}

TEST_CASE("weight vector invariants on random input") {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 1 + static_cast<std::size_t>(rng() % 10);
    std::vector<double> g(n);
    for (auto& v : g) v = uniform01(rng) * 3.0;
    auto wv = normalize(g);
    double sw = 0.0, se = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(wv.w[i] >= 0.0);
      sw += wv.w[i];
      se += wv.eps[i];
    }
    CHECK(sw == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(se) < 1e-9);
    CHECK(wv.cum[0] == 0.0);
    CHECK(wv.cum[n] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(wv.csum[0]) < 1e-12);
    CHECK(std::abs(wv.csum[n]) < 1e-9);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(wv.cum[i + 1] >= wv.cum[i]);
      // differencing F recovers w
      CHECK(wv.cum[i + 1] - wv.cum[i] == doctest::Approx(wv.w[i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("mean partition of constant vector is identity") {
  auto p = mean_partition({5.0, 5.0, 5.0});
  CHECK(p.boundary == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(p.perm[i] == i);
  CHECK(is_mean_partition(p, {5.0, 5.0, 5.0}));
}

TEST_CASE("mean partition satisfies the two-block predicate") {
  std::vector<double> u1{-1.0, -2.0, -3.0};
  auto p1 = mean_partition(u1);
  CHECK(is_mean_partition(p1, u1));
  CHECK(p1.boundary == 2);  // values <= -2: indices 1 and 2
  CHECK(((p1.perm[0] == 1 && p1.perm[1] == 2) || (p1.perm[0] == 2 && p1.perm[1] == 1)));
  CHECK(p1.perm[2] == 0);

  std::vector<double> u2{3.0, 1.0, 2.0, 5.0, 1.0};
  auto p2 = mean_partition(u2);
  CHECK(is_mean_partition(p2, u2));
  CHECK(p2.boundary == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(u2[p2.perm[i]] <= 2.4);
  for (std::size_t i = 3; i < 5; ++i) CHECK(u2[p2.perm[i]] > 2.4);
}

TEST_CASE("mean partition is deterministic and a bijection") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 1 + static_cast<std::size_t>(rng() % 12);
    std::vector<double> u(n);
    for (auto& v : u) v = normal01(rng);
    auto p = mean_partition(u);
    auto q = mean_partition(u);
    CHECK(p.perm == q.perm);
    CHECK(is_mean_partition(p, u));
    std::vector<bool> seen(n, false);
    for (auto i : p.perm) {
      CHECK(i < n);
      CHECK(!seen[i]);
      seen[i] = true;
    }
  }
}

TEST_CASE("single_event builds 1:N with k omitted, l duplicated") {
  auto a = AncestorVector::single_event(3, 2, 0);  // eliminate index 2, duplicate index 0
  CHECK(a.a == std::vector<std::size_t>{0, 0, 1});
  auto off = a.offspring();
  CHECK(off == std::vector<std::size_t>{2, 1, 0});
  EventSignature sig;
  CHECK(single_event_signature(a, sig));
  CHECK(sig.eliminated == 2);
  CHECK(sig.duplicated == 0);

  auto b = AncestorVector::single_event(4, 1, 3);
  CHECK(b.a == std::vector<std::size_t>{0, 2, 3, 3});
}

TEST_CASE("apply_ancestors reindexes the cloud") {
  std::vector<std::string> x{"a", "b", "c"};
  CHECK(apply_ancestors(x, AncestorVector::identity(3)) == x);
  auto y = apply_ancestors(x, AncestorVector::single_event(3, 2, 0));
  CHECK(y == std::vector<std::string>{"a", "a", "b"});
  std::vector<std::string> z{"a", "b"};
  AncestorVector dup;
  dup.a = {1, 1};
  CHECK(apply_ancestors(z, dup) == std::vector<std::string>{"b", "b"});

  AncestorVector bad;
  bad.a = {0, 5};
  CHECK_THROWS_AS(apply_ancestors(z, bad), IndexOutOfRange);
}

TEST_CASE("identity detection and offspring accounting") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 1 + static_cast<std::size_t>(rng() % 8);
    AncestorVector a;
    a.a.resize(n);
    for (auto& i : a.a) i = rng() % n;
    auto off = a.offspring();
    std::size_t total = 0;
    for (auto c : off) total += c;
    CHECK(total == n);
    bool ident = true;
    for (std::size_t i = 0; i < n; ++i) ident = ident && a.a[i] == i;
    CHECK(a.is_identity() == ident);
  }
}

TEST_CASE("nearly uniform partitioned predicate") {
  // eps = (-0.1, -0.05, 0.15): negatives first, sum |eps| < 2
  auto wv = normalize({0.9 / 3, 0.95 / 3, 1.15 / 3});
  CHECK(wv.nearly_uniform_partitioned());
  // positive excess before a negative one breaks the pattern
  auto wv2 = normalize({1.15 / 3, 0.9 / 3, 0.95 / 3});
  CHECK(!wv2.nearly_uniform_partitioned());
}
