#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "srd/tensors.hpp"

using namespace srd;
using std::numbers::pi;

namespace {

// Independent oracle: brute-force trapezoid integral of a product of four
// torus basis members with a fine grid.
double brute_quartic(const SpectralModel& m, std::array<std::size_t, 4> idx, int nodes = 512) {
  const double h = 2 * pi * m.L() / nodes;
  double s = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double x = i * h;
    double p = 1.0;
    for (auto j : idx) p *= m.basis()[j].evaluate(x).value;
    s += h * p;
  }
  return s;
}

}  // namespace

TEST_SUITE("tensors") {

TEST_CASE("single-pair entries") {
  for (double L : {1.0, 2.5}) {
    const auto m = SpectralModel::torus(L, {1}, {1.0});
    const auto t = compute_chi(m);
    const double u = 1.0 / (4 * pi * L);
    CHECK(t.chi_at(0, 0, 0, 0) == doctest::Approx(3 * u).epsilon(1e-12));
    CHECK(t.chi_at(1, 1, 1, 1) == doctest::Approx(3 * u).epsilon(1e-12));
    CHECK(t.chi_at(0, 0, 1, 1) == doctest::Approx(u).epsilon(1e-12));
    CHECK(t.chi_at(0, 1, 0, 1) == doctest::Approx(u).epsilon(1e-12));
    CHECK(std::abs(t.chi_at(0, 0, 0, 1)) < 1e-14);
    CHECK(std::abs(t.chi_at(1, 1, 1, 0)) < 1e-14);
    CHECK(t.chi_tilde_at(0, 0, 0, 0) == doctest::Approx(3 * u).epsilon(1e-12));
    // Frobenius reductions are consistent with the entries.
    double ss = 0.0;
    for (double v : t.chi_entries) ss += v * v;
    CHECK(t.chi == doctest::Approx(std::sqrt(ss)).epsilon(1e-14));
    CHECK(t.chi == doctest::Approx(std::sqrt(24.0) * u).epsilon(1e-12));
  }
}

TEST_CASE("two-frequency entry against brute force") {
  const double L = 1.7;
  const auto m = SpectralModel::torus(L, {1, 2}, {1.0, 1.0});
  const auto t = compute_chi(m);
  // cos^2(x/L) cos^2(2x/L) averages to 1/4 over the period.
  CHECK(t.chi_at(0, 0, 2, 2) == doctest::Approx(1.0 / (2 * pi * L)).epsilon(1e-12));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t l = 0; l < 4; ++l)
          CHECK(std::abs(t.chi_at(i, j, k, l) - brute_quartic(m, {i, j, k, l})) < 1e-12);
}

TEST_CASE("full permutation symmetry of chi") {
  const auto m = SpectralModel::torus(1.0, {1, 2, 3}, {1.0, 1.0, 1.0});
  const auto t = compute_chi(m);
  const std::size_t d = t.d;
  double worst = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = 0; k < d; ++k)
        for (std::size_t l = 0; l < d; ++l) {
          std::array<std::size_t, 4> p{i, j, k, l};
          std::sort(p.begin(), p.end());
          do {
            worst = std::max(worst, std::abs(t.chi_at(i, j, k, l) - t.chi_at(p[0], p[1], p[2], p[3])));
          } while (std::next_permutation(p.begin(), p.end()));
          if (i / 2 == j / 2)  // the weight |lambda_i|^-1 is shared within a frequency
            worst = std::max(worst, std::abs(t.chi_tilde_at(i, j, k, l) - t.chi_tilde_at(j, i, k, l)));
          worst = std::max(worst, std::abs(t.chi_tilde_at(i, j, k, l) - t.chi_tilde_at(k, l, i, j)));
        }
  CHECK(worst < 1e-14);
}

TEST_CASE("partition condition examples") {
  CHECK(admits_equal_sum_partition({1, 1, 2, 4}));
  CHECK_FALSE(admits_equal_sum_partition({1, 2, 4, 8}));
  CHECK(admits_equal_sum_partition({1, 1, 1, 1}));
  using K = TrigKind;
  CHECK(selection_rule_nonzero({1, 1, 2, 4}, {K::cosine, K::cosine, K::cosine, K::cosine}));
  CHECK_FALSE(selection_rule_nonzero({1, 2, 4, 8}, {K::cosine, K::cosine, K::cosine, K::cosine}));
  CHECK(selection_rule_nonzero({1, 1, 1, 1}, {K::cosine, K::cosine, K::sine, K::sine}));
  CHECK_FALSE(selection_rule_nonzero({1, 1, 1, 1}, {K::cosine, K::cosine, K::cosine, K::sine}));
  // Partition and even sine count hold, yet sin x sin 2x cos x cos 2x integrates to 0.
  CHECK(admits_equal_sum_partition({1, 2, 1, 2}));
  CHECK_FALSE(selection_rule_nonzero({1, 2, 1, 2}, {K::sine, K::sine, K::cosine, K::cosine}));
  CHECK(gradient_kinds({K::cosine, K::sine, K::cosine, K::sine}) ==
        std::array<K, 4>{K::sine, K::cosine, K::sine, K::cosine});
}

TEST_CASE("selection rule agrees with quadrature entry by entry") {
  for (int n = 1; n <= 4; ++n) {
    std::vector<int> ks;
    for (int k = 1; k <= n; ++k) ks.push_back(k);
    const auto m = SpectralModel::torus(1.0, ks, std::vector<double>(n, 1.0));
    const auto t = compute_chi(m);
    const auto a = check_selection_rule(m, t);
    CHECK(a.mismatches == 0);
    CHECK(a.rule_nonzero == a.quadrature_nonzero);
    CHECK(a.partition_nonzero >= a.rule_nonzero);
    CHECK(a.max_abs_ruled_zero < 1e-12);
  }
}

TEST_CASE("L scaling and quadrature exactness") {
  const std::vector<int> ks{1, 3};
  const std::vector<double> as{1.0, 0.5};
  const auto ref = compute_chi(SpectralModel::torus(1.0, ks, as));
  for (double L : {0.5, 2.0}) {
    const auto t = compute_chi(SpectralModel::torus(L, ks, as));
    for (std::size_t i = 0; i < t.chi_entries.size(); ++i) {
      CHECK(std::abs(t.chi_entries[i] * L - ref.chi_entries[i]) <= 1e-10 * std::max(1e-3, std::abs(ref.chi_entries[i])));
      CHECK(std::abs(t.chi_tilde_entries[i] * L - ref.chi_tilde_entries[i]) <=
            1e-10 * std::max(1e-3, std::abs(ref.chi_tilde_entries[i])));
    }
  }
  const auto m = SpectralModel::torus(1.0, ks, as);
  const auto fine = compute_chi(m, 2);
  for (std::size_t i = 0; i < fine.chi_entries.size(); ++i) {
    CHECK(std::abs(fine.chi_entries[i] - ref.chi_entries[i]) < 1e-13);
    CHECK(std::abs(fine.chi_tilde_entries[i] - ref.chi_tilde_entries[i]) < 1e-13);
  }
}

TEST_CASE("scaling probe") {
  const auto rows = scaling_probe(5, 1.0);
  REQUIRE(rows.size() == 5);
  const auto single = compute_chi(SpectralModel::torus(1.0, {1}, {1.0}));
  CHECK(rows[0].chi == doctest::Approx(single.chi).epsilon(1e-14));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].chi >= rows[i - 1].chi);
    CHECK(rows[i].chi_tilde >= rows[i - 1].chi_tilde);
    CHECK(rows[i].running_max_chi_scaled >= rows[i - 1].running_max_chi_scaled);
  }
  for (const auto& r : rows) {
    CHECK(r.chi_scaled <= rows.front().running_max_chi_scaled * 3.0);
    CHECK(r.chi_tilde_scaled <= rows.front().running_max_chi_tilde_scaled * 3.0);
  }
  const auto rows2 = scaling_probe(3, 2.0);
  for (std::size_t i = 0; i < rows2.size(); ++i)
    CHECK(rows2[i].chi * 2.0 == doctest::Approx(rows[i].chi).epsilon(1e-12));
  CHECK_THROWS(scaling_probe(9, 1.0));
}

TEST_CASE("single-frequency aggregate adjudication") {
  const auto m = SpectralModel::torus(3.0, {2}, {0.7});
  const auto t = compute_chi(m);
  const auto a = adjudicate_single_frequency(m, t);
  const double u = 1.0 / (4 * pi * 3.0);
  CHECK(a.pure_count == 2);
  CHECK(a.mixed_count == 6);
  CHECK(a.quadrature_matches_6);
  CHECK_FALSE(a.quadrature_matches_8);
  CHECK(a.aggregate_with_8 == doctest::Approx(std::sqrt(26.0) * u));
  CHECK(a.quadrature_chi == doctest::Approx(std::sqrt(24.0) * u).epsilon(1e-12));
}

TEST_CASE("csv dump") {
  const auto t = compute_chi(SpectralModel::torus(1.0, {1}, {1.0}));
  std::ostringstream os;
  write_chi_csv(os, t);
  const std::string s = os.str();
  CHECK(s.rfind("i,j,k,l,kind,value\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 8 + 8);
}

}  // TEST_SUITE
