#include "srd/tensors.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "srd/csv.hpp"

namespace srd {

ChiTensors compute_chi(const SpectralModel& model) { return compute_chi(model, 0); }

ChiTensors compute_chi(const SpectralModel& model, int extra_doublings) {
  const std::size_t d = model.dim();
  auto rule = make_quadrature(4 * model.max_frequency() << extra_doublings, model.L());
  const std::size_t n = rule.size();

  // Pair products sampled at the nodes: P(ij, node) = e_i e_j, Q(ij, node) = e_i' e_j' / |lambda_i|.
  Eigen::MatrixXd P(d * d, n), Q(d * d, n);
  std::vector<double> e(d), de(d);
  for (std::size_t q = 0; q < n; ++q) {
    model.evaluate(rule.nodes[q], e, de);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        P(i * d + j, q) = e[i] * e[j];
        Q(i * d + j, q) = de[i] * de[j] / std::abs(model.eigenvalues()[i]);
      }
  }
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), static_cast<Eigen::Index>(n));
  const Eigen::MatrixXd chi = P * w.asDiagonal() * P.transpose();
  const Eigen::MatrixXd chit = Q * w.asDiagonal() * Q.transpose();

  ChiTensors t;
  t.d = d;
  t.chi_entries.resize(d * d * d * d);
  t.chi_tilde_entries.resize(d * d * d * d);
  for (std::size_t ij = 0; ij < d * d; ++ij)
    for (std::size_t kl = 0; kl < d * d; ++kl) {
      t.chi_entries[ij * d * d + kl] = chi(ij, kl);
      t.chi_tilde_entries[ij * d * d + kl] = chit(ij, kl);
    }
  t.chi = chi.norm();
  t.chi_tilde = chit.norm();
  return t;
}

bool admits_equal_sum_partition(const std::array<int, 4>& f) {
  const int total = f[0] + f[1] + f[2] + f[3];
  if (total % 2 != 0) return false;
  for (int mask = 1; mask < 16; ++mask) {
    int s = 0;
    for (int i = 0; i < 4; ++i)
      if (mask >> i & 1) s += f[i];
    if (2 * s == total) return true;
  }
  return false;
}

bool selection_rule_nonzero(const std::array<int, 4>& f, const std::array<TrigKind, 4>& kinds) {
  // cos(a) = (z^a + z^-a) / 2, sin(a) = (z^a - z^-a) / (2i); only the
  // zero-frequency terms survive integration.
  long signed_sum = 0;
  for (int mask = 0; mask < 16; ++mask) {
    int freq = 0;
    int sign = 1;
    for (int i = 0; i < 4; ++i) {
      const int eps = (mask >> i & 1) ? -1 : 1;
      freq += eps * f[i];
      if (kinds[i] == TrigKind::sine) sign *= eps;
    }
    if (freq == 0) signed_sum += sign;
  }
  return signed_sum != 0;
}

std::array<TrigKind, 4> gradient_kinds(const std::array<TrigKind, 4>& kinds) {
  std::array<TrigKind, 4> out{};
  for (int i = 0; i < 4; ++i) out[i] = kinds[i] == TrigKind::cosine ? TrigKind::sine : TrigKind::cosine;
  return out;
}

SelectionAgreement check_selection_rule(const SpectralModel& model, const ChiTensors& t, double threshold) {
  SelectionAgreement r;
  const auto& b = model.basis();
  const std::size_t d = t.d;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = 0; k < d; ++k)
        for (std::size_t l = 0; l < d; ++l) {
          const std::array<int, 4> f{b[i].frequency, b[j].frequency, b[k].frequency, b[l].frequency};
          const std::array<TrigKind, 4> kinds{b[i].kind, b[j].kind, b[k].kind, b[l].kind};
          int sines = 0;
          for (auto kd : kinds) sines += kd == TrigKind::sine;
          const bool partition = admits_equal_sum_partition(f) && sines % 2 == 0;

          const std::array<std::pair<double, std::array<TrigKind, 4>>, 2> entries{
              std::pair{t.chi_at(i, j, k, l), kinds}, std::pair{t.chi_tilde_at(i, j, k, l), gradient_kinds(kinds)}};
          for (const auto& [value, kd] : entries) {
            const bool rule = selection_rule_nonzero(f, kd);
            const bool quad = std::abs(value) >= threshold;
            r.rule_nonzero += rule;
            r.partition_nonzero += partition;
            r.quadrature_nonzero += quad;
            if (rule != quad) ++r.mismatches;
            if (!rule) r.max_abs_ruled_zero = std::max(r.max_abs_ruled_zero, std::abs(value));
          }
        }
  return r;
}

std::vector<ScalingRow> scaling_probe(int n_max, double L) {
  if (n_max < 1 || n_max > 8) throw std::invalid_argument("scaling_probe: n_max must be in [1, 8]");
  std::vector<ScalingRow> rows;
  double max_chi = 0.0, max_chit = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    std::vector<int> ks(n);
    for (int k = 0; k < n; ++k) ks[k] = k + 1;
    const auto model = SpectralModel::torus(L, ks, std::vector<double>(n, 1.0));
    const auto t = compute_chi(model);
    ScalingRow row;
    row.n = n;
    row.chi = t.chi;
    row.chi_tilde = t.chi_tilde;
    row.chi_scaled = t.chi * L / std::pow(n, 1.5);
    row.chi_tilde_scaled = t.chi_tilde * L / std::pow(n, 3.0);
    max_chi = std::max(max_chi, row.chi_scaled);
    max_chit = std::max(max_chit, row.chi_tilde_scaled);
    row.running_max_chi_scaled = max_chi;
    row.running_max_chi_tilde_scaled = max_chit;
    rows.push_back(row);
  }
  return rows;
}

SingleFrequencyAggregate adjudicate_single_frequency(const SpectralModel& model, const ChiTensors& t) {
  if (model.n_frequencies() != 1) throw std::invalid_argument("adjudicate_single_frequency: need one frequency");
  SingleFrequencyAggregate a;
  const double unit = 1.0 / (4.0 * std::numbers::pi * model.L());
  a.quadrature_chi = t.chi;
  a.quadrature_chi_tilde = t.chi_tilde;
  a.pure_entry = t.chi_at(0, 0, 0, 0);
  a.mixed_entry = t.chi_at(0, 0, 1, 1);
  for (double v : t.chi_entries) {
    if (std::abs(v - 3.0 * unit) < 1e-12) ++a.pure_count;
    if (std::abs(v - unit) < 1e-12) ++a.mixed_count;
  }
  a.aggregate_with_6 = std::sqrt(24.0) * unit;
  a.aggregate_with_8 = std::sqrt(26.0) * unit;
  a.quadrature_matches_6 = std::abs(t.chi - a.aggregate_with_6) < 1e-12 * a.aggregate_with_6 + 1e-14;
  a.quadrature_matches_8 = std::abs(t.chi - a.aggregate_with_8) < 1e-12 * a.aggregate_with_8 + 1e-14;
  return a;
}

void write_chi_csv(std::ostream& os, const ChiTensors& t, double threshold) {
  os << "i,j,k,l,kind,value\n";
  const std::size_t d = t.d;
  for (const auto& [name, entries] : {std::pair{"chi", &t.chi_entries}, std::pair{"chi_tilde", &t.chi_tilde_entries}})
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = 0; k < d; ++k)
          for (std::size_t l = 0; l < d; ++l) {
            const double v = (*entries)[t.index(i, j, k, l)];
            if (std::abs(v) < threshold) continue;
            os << i << ',' << j << ',' << k << ',' << l << ',' << name << ',' << format_double(v) << '\n';
          }
}

}  // namespace srd
