#include <cmath>
#include <vector>

#include "dai/rng.hpp"
#include "doctest.h"

using dai::RngStream;

TEST_CASE("identical seeds give identical draws") {
  RngStream a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("derive is pure and keyed") {
  const RngStream root(7);
  CHECK(root.derive(3).state() == root.derive(3).state());
  CHECK(root.derive(3).state() != root.derive(4).state());
  CHECK(root.derive(3).derive(0).state() != root.derive(0).derive(3).state());
}

TEST_CASE("derived streams look independent") {
  RngStream root(123);
  // Correlation between sibling streams should be at noise level.
  const int n = 4096;
  double sum_xy = 0.0, sum_x = 0.0, sum_y = 0.0;
  RngStream a = root.derive(1), b = root.derive(2);
  for (int i = 0; i < n; ++i) {
    double x = a.next_double(), y = b.next_double();
    sum_x += x;
    sum_y += y;
    sum_xy += x * y;
  }
  double corr = (sum_xy / n - sum_x / n * sum_y / n) * 12.0;  // scaled by 1/var
  CHECK(std::abs(corr) < 0.1);
}

TEST_CASE("next_double is uniform in [0,1)") {
  RngStream rng(99);
  const int n = 100000;
  double sum = 0.0;
  int buckets[10] = {0};
  for (int i = 0; i < n; ++i) {
    double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    ++buckets[static_cast<int>(u * 10.0)];
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  for (int count : buckets) CHECK(std::abs(count - n / 10) < 5 * std::sqrt(n / 10.0));
}
