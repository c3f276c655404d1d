#include "srd/galerkin.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <string>

#include "srd/csv.hpp"
#include "srd/errors.hpp"
#include "srd/polynomial.hpp"
#include "srd/torus_basis.hpp"

namespace srd {

namespace {

using Triplet = Eigen::Triplet<double>;
using SparseMatrix = GalerkinOperator::SparseMatrix;

const double kInvE = std::exp(-1.0);

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

int total_degree(const MultiIndex& a) {
  int s = 0;
  for (int v : a) s += v;
  return s;
}

struct FourierJet {
  double value, derivative, second;
};

FourierJet fourier_jet(FourierLabel f, double x, double L) {
  if (f == 0) return {1.0, 0.0, 0.0};
  const double w = std::abs(f) / L;
  const double c = std::numbers::sqrt2 * std::cos(w * x);
  const double s = std::numbers::sqrt2 * std::sin(w * x);
  if (f > 0) return {c, -w * s, -w * w * c};
  return {s, w * c, -w * w * s};
}

// Matrix of d/du_j in the scaled Hermite basis: lowers alpha_j by one with
// factor sqrt(alpha_j / v_j).
std::vector<Triplet> ladder(const std::vector<MultiIndex>& H, const std::map<MultiIndex, std::size_t>& pos,
                            std::size_t j, double variance) {
  std::vector<Triplet> t;
  for (std::size_t c = 0; c < H.size(); ++c) {
    if (H[c][j] == 0) continue;
    MultiIndex lower = H[c];
    --lower[j];
    t.emplace_back(static_cast<int>(pos.at(lower)), static_cast<int>(c), std::sqrt(H[c][j] / variance));
  }
  return t;
}

SparseMatrix from_triplets(std::size_t rows, std::size_t cols, const std::vector<Triplet>& t) {
  SparseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

double max_abs(const SparseMatrix& m) {
  double r = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) r = std::max(r, std::abs(it.value()));
  return r;
}

// All basis values at one point: Hermite products times Fourier values.
class BasisEvaluator {
 public:
  explicit BasisEvaluator(const GalerkinOperator& op)
      : op_(op), D_(op.truncation().max_hermite_degree), h_(op.model().dim() * (D_ + 1)) {
    const auto law = invariant_law(op.model());
    inv_sd_.reserve(law.gaussian_variances.size());
    for (double v : law.gaussian_variances) inv_sd_.push_back(1.0 / std::sqrt(v));
  }

  void values(std::span<const double> u, double x, std::span<double> out) {
    const std::size_t d = op_.model().dim();
    for (std::size_t j = 0; j < d; ++j)
      hermite_values(D_, u[j] * inv_sd_[j], std::span<double>(h_.data() + j * (D_ + 1), D_ + 1));
    const auto& H = op_.hermite_indices();
    const auto& F = op_.fourier_labels();
    hv_.resize(H.size());
    for (std::size_t p = 0; p < H.size(); ++p) {
      double v = 1.0;
      for (std::size_t j = 0; j < d; ++j) v *= h_[j * (D_ + 1) + H[p][j]];
      hv_[p] = v;
    }
    for (std::size_t f = 0; f < F.size(); ++f) {
      const double fv = fourier_jet(F[f], x, op_.model().L()).value;
      for (std::size_t p = 0; p < H.size(); ++p) out[op_.row(p, f)] = hv_[p] * fv;
    }
  }

 private:
  const GalerkinOperator& op_;
  int D_;
  std::vector<double> inv_sd_;
  std::vector<double> h_;
  std::vector<double> hv_;
};

// Gaussian tensor rule x trapezoid rule, both with normalized weights.
struct ProductRule {
  GaussianTensorRule u;
  QuadratureRule x;
  double x_norm = 1.0;
};

ProductRule product_rule(const SpectralModel& model, int gh_points, int max_fourier) {
  const auto law = invariant_law(model);
  ProductRule r{gaussian_tensor_rule(law.gaussian_variances, gh_points), make_quadrature(max_fourier, model.L()),
                1.0 / circumference(model.L())};
  return r;
}

struct PolyJet {
  Polynomial g;
  std::vector<Polynomial> grad;
  std::vector<std::vector<Polynomial>> hess;
};

PolyJet poly_jet(const Polynomial& g) {
  PolyJet j{g, {}, {}};
  const std::size_t d = g.dims();
  for (std::size_t a = 0; a < d; ++a) j.grad.push_back(g.derivative(a));
  j.hess.resize(d);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) j.hess[a].push_back(j.grad[a].derivative(b));
  return j;
}

std::vector<Polynomial> test_polynomials(std::size_t d, int max_degree, int n_random, std::uint64_t seed) {
  std::vector<Polynomial> out;
  out.push_back(Polynomial::coordinate(d, 0));
  if (max_degree >= 2) {
    out.push_back(Polynomial::coordinate(d, 0) * Polynomial::coordinate(d, 0));
    if (d > 1) out.push_back(Polynomial::coordinate(d, 0) * Polynomial::coordinate(d, d - 1));
  }
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n_random; ++i) out.push_back(Polynomial::random(d, max_degree, rng));
  return out;
}

// Doubling then bisection; `lo` must satisfy norm(lo) > e^-1 (or be 0).
double bisect_trel(const Eigen::MatrixXd& B, double lo, double hi, double tolerance, double t_max) {
  while (exp_norm(B, hi) > kInvE) {
    lo = hi;
    hi *= 2.0;
    if (hi > t_max)
      throw ConvergenceError("relaxation time bracket exceeded t_max = " + std::to_string(t_max) +
                             " (semigroup not contracting)");
  }
  while (hi - lo > tolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    (exp_norm(B, mid) > kInvE ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace

std::size_t Truncation::basis_size(std::size_t d) const {
  return static_cast<std::size_t>(std::llround(binomial(max_hermite_degree + static_cast<int>(d), static_cast<int>(d)))) *
         static_cast<std::size_t>(2 * max_fourier_frequency + 1);
}

std::optional<std::size_t> GalerkinOperator::hermite_position(const MultiIndex& alpha) const {
  const auto it = std::find(hermite_.begin(), hermite_.end(), alpha);
  if (it == hermite_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - hermite_.begin());
}

double GalerkinOperator::basis_value(std::size_t r, std::span<const double> u, double x) const {
  return basis_jet(r, u, x).value;
}

LiftedJet GalerkinOperator::basis_jet(std::size_t r, std::span<const double> u, double x) const {
  const auto& alpha = hermite_[hermite_position(r)];
  const FourierJet fj = fourier_jet(fourier_[fourier_position(r)], x, model_.L());
  const std::size_t d = alpha.size();
  std::vector<double> hv(d), dh(d), buf(truncation_.max_hermite_degree + 1);
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(variances_[j]);
    hermite_values(truncation_.max_hermite_degree, u[j] / sd, buf);
    const int n = alpha[j];
    hv[j] = buf[n];
    dh[j] = n > 0 ? std::sqrt(static_cast<double>(n)) * buf[n - 1] / sd : 0.0;
  }
  LiftedJet jet;
  double h = 1.0;
  for (double v : hv) h *= v;
  jet.value = h * fj.value;
  jet.dx = h * fj.derivative;
  jet.dxx = h * fj.second;
  jet.grad_u.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    double g = dh[j];
    for (std::size_t i = 0; i < d; ++i)
      if (i != j) g *= hv[i];
    jet.grad_u[j] = g * fj.value;
  }
  return jet;
}

Eigen::MatrixXd GalerkinOperator::mean_zero_dense() const {
  const Eigen::MatrixXd full(a_sigma_);
  const Eigen::Index n = full.rows() - 1;
  return full.bottomRightCorner(n, n);
}

GalerkinOperator build_operator(const SpectralModel& model, const Truncation& truncation, double sigma) {
  if (truncation.max_hermite_degree < 1) throw ValidationError("truncation.D must be >= 1");
  if (truncation.max_fourier_frequency < model.max_frequency())
    throw ValidationError("truncation.J = " + std::to_string(truncation.max_fourier_frequency) +
                          " must be >= the largest model frequency " + std::to_string(model.max_frequency()));
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be finite and >= 0");

  GalerkinOperator op;
  op.model_ = model;
  op.truncation_ = truncation;
  op.sigma_ = sigma;
  op.variances_ = invariant_law(model).gaussian_variances;

  const std::size_t d = model.dim();
  const int J = truncation.max_fourier_frequency;
  const double L = model.L();
  op.hermite_ = total_degree_indices(d, truncation.max_hermite_degree);
  op.fourier_.push_back(0);
  for (int j = 1; j <= J; ++j) {
    op.fourier_.push_back(j);
    op.fourier_.push_back(-j);
  }
  const std::size_t nh = op.hermite_.size();
  const std::size_t nf = op.fourier_.size();
  const std::size_t N = nh * nf;
  std::map<MultiIndex, std::size_t> hpos;
  for (std::size_t p = 0; p < nh; ++p) hpos.emplace(op.hermite_[p], p);

  // Fourier couplings <phi_p, e_j phi_q>_kappa and <phi_p, e_j' phi_q'>_kappa.
  const auto rule = make_quadrature(2 * J + model.max_frequency(), L);
  const double norm = 1.0 / circumference(L);
  std::vector<Eigen::MatrixXd> F(d, Eigen::MatrixXd::Zero(nf, nf)), G(d, Eigen::MatrixXd::Zero(nf, nf));
  std::vector<FourierJet> phi(nf);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double x = rule.nodes[i];
    const double w = rule.weights[i] * norm;
    for (std::size_t f = 0; f < nf; ++f) phi[f] = fourier_jet(op.fourier_[f], x, L);
    for (std::size_t j = 0; j < d; ++j) {
      const auto e = model.basis()[j].evaluate(x);
      for (std::size_t p = 0; p < nf; ++p)
        for (std::size_t q = 0; q < nf; ++q) {
          F[j](p, q) += w * phi[p].value * e.value * phi[q].value;
          G[j](p, q) += w * phi[p].value * e.derivative * phi[q].derivative;
        }
    }
  }
  auto chop = [](Eigen::MatrixXd& m) {
    const double tol = 1e-13 * std::max(1.0, m.cwiseAbs().maxCoeff());
    m = m.unaryExpr([tol](double v) { return std::abs(v) < tol ? 0.0 : v; });
  };

  // A0 = sum_j F_j (x) D_j - |lambda_j|^-1 G_j (x) (D_j + D_j^T).
  std::vector<Triplet> a0;
  for (std::size_t j = 0; j < d; ++j) {
    chop(F[j]);
    chop(G[j]);
    const auto dj = ladder(op.hermite_, hpos, j, op.variances_[j]);
    const double inv_lam = 1.0 / std::abs(model.eigenvalues()[j]);
    for (std::size_t p = 0; p < nf; ++p)
      for (std::size_t q = 0; q < nf; ++q) {
        const double f = F[j](p, q), g = G[j](p, q);
        if (f == 0.0 && g == 0.0) continue;
        for (const auto& t : dj) {
          const auto r = static_cast<std::size_t>(t.row()), c = static_cast<std::size_t>(t.col());
          const double v = t.value();
          if (f != 0.0) a0.emplace_back(op.row(r, p), op.row(c, q), f * v);
          if (g != 0.0) {
            a0.emplace_back(op.row(r, p), op.row(c, q), -inv_lam * g * v);
            a0.emplace_back(op.row(c, p), op.row(r, q), -inv_lam * g * v);
          }
        }
      }
  }
  op.a0_ = from_triplets(N, N, a0);

  std::vector<Triplet> lap;
  for (std::size_t f = 0; f < nf; ++f) {
    const double w = op.fourier_[f] / L;
    if (w == 0.0) continue;
    for (std::size_t p = 0; p < nh; ++p) lap.emplace_back(op.row(p, f), op.row(p, f), -0.5 * w * w);
  }
  op.delta_part_ = from_triplets(N, N, lap);
  op.a_sigma_ = op.a0_ + (sigma * sigma) * op.delta_part_;
  op.a_sigma_.prune(0.0);

  // Rotation generator d_x + sum_pairs (k/L)(u_c d_s - u_s d_c).
  std::vector<Triplet> rot;
  for (std::size_t f = 1; f < nf; f += 2) {
    const double w = op.fourier_[f] / L;  // f = cos_j, f + 1 = sin_j
    for (std::size_t p = 0; p < nh; ++p) {
      rot.emplace_back(op.row(p, f + 1), op.row(p, f), -w);
      rot.emplace_back(op.row(p, f), op.row(p, f + 1), w);
    }
  }
  std::vector<Triplet> hrot;
  for (std::size_t c = 0; c + 1 < d; c += 2) {
    const std::size_t s = c + 1;
    const SparseMatrix Dc = from_triplets(nh, nh, ladder(op.hermite_, hpos, c, op.variances_[c]));
    const SparseMatrix Ds = from_triplets(nh, nh, ladder(op.hermite_, hpos, s, op.variances_[s]));
    const SparseMatrix Uc = op.variances_[c] * SparseMatrix(Dc + SparseMatrix(Dc.transpose()));
    const SparseMatrix Us = op.variances_[s] * SparseMatrix(Ds + SparseMatrix(Ds.transpose()));
    const SparseMatrix gen = (model.frequencies()[c / 2] / L) * SparseMatrix(Uc * Ds - Us * Dc);
    for (int k = 0; k < gen.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(gen, k); it; ++it)
        if (std::abs(it.value()) > 1e-14) hrot.emplace_back(it.row(), it.col(), it.value());
  }
  for (std::size_t f = 0; f < nf; ++f)
    for (const auto& t : hrot)
      rot.emplace_back(op.row(static_cast<std::size_t>(t.row()), f), op.row(static_cast<std::size_t>(t.col()), f),
                       t.value());
  op.rotation_ = from_triplets(N, N, rot);
  return op;
}

double max_deviation_from_quadrature(const GalerkinOperator& op) {
  const SpectralModel& model = op.model();
  const std::size_t N = op.size();
  const auto pr = product_rule(model, op.truncation().max_hermite_degree + 2,
                               2 * op.truncation().max_fourier_frequency + model.max_frequency());
  Eigen::MatrixXd quad = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  Eigen::VectorXd psi(static_cast<Eigen::Index>(N)), lpsi(static_cast<Eigen::Index>(N));
  for (std::size_t iu = 0; iu < pr.u.size(); ++iu) {
    const auto u = pr.u.point(iu);
    for (std::size_t ix = 0; ix < pr.x.size(); ++ix) {
      SystemState s{std::vector<double>(u.begin(), u.end()), pr.x.nodes[ix]};
      for (std::size_t r = 0; r < N; ++r) {
        LiftedTestFunction f = [&op, r](std::span<const double> uu, double xx) { return op.basis_jet(r, uu, xx); };
        psi[static_cast<Eigen::Index>(r)] = op.basis_value(r, u, s.x);
        lpsi[static_cast<Eigen::Index>(r)] = apply_lifted_generator(model, f, op.sigma(), s);
      }
      quad.noalias() += (pr.u.weights[iu] * pr.x.weights[ix] * pr.x_norm) * psi * lpsi.transpose();
    }
  }
  return (quad - Eigen::MatrixXd(op.a_sigma())).cwiseAbs().maxCoeff();
}

StructureReport check_structure(const GalerkinOperator& op) {
  StructureReport r;
  r.antisymmetry = max_abs(SparseMatrix(op.a0() + SparseMatrix(op.a0().transpose())));
  const Eigen::MatrixXd A(op.a_sigma());
  r.constant_row_col = std::max(A.row(0).cwiseAbs().maxCoeff(), A.col(0).cwiseAbs().maxCoeff());
  r.delta_asymmetry = max_abs(SparseMatrix(op.delta_part() - SparseMatrix(op.delta_part().transpose())));
  r.delta_max_eigen = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < op.delta_part().rows(); ++i) r.delta_max_eigen = std::max(r.delta_max_eigen, op.delta_part().coeff(i, i));
  r.rotation_commutator =
      max_abs(SparseMatrix(op.rotation() * op.a_sigma() - op.a_sigma() * op.rotation()));
  return r;
}

std::size_t SymmetryBlocks::largest() const {
  std::size_t m = 0;
  for (const auto& b : blocks) m = std::max(m, static_cast<std::size_t>(b.rows()));
  return m;
}

SymmetryBlocks symmetry_blocks(const GalerkinOperator& op) {
  const auto& H = op.hermite_indices();
  const auto& F = op.fourier_labels();
  const std::size_t N = op.size();
  const std::size_t pairs = op.model().dim() / 2;
  const double L = op.model().L();

  // Cells: rows with equal |Fourier label| and equal per-pair Hermite degree.
  std::map<std::vector<int>, std::vector<std::size_t>> cells;
  for (std::size_t r = 1; r < N; ++r) {
    std::vector<int> key{std::abs(F[op.fourier_position(r)])};
    const auto& a = H[op.hermite_position(r)];
    for (std::size_t p = 0; p < pairs; ++p) key.push_back(a[2 * p] + a[2 * p + 1]);
    cells[key].push_back(r);
  }

  const SparseMatrix& R = op.rotation();
  std::map<int, std::vector<Triplet>> columns;  // |m| -> entries of Q_m
  std::map<int, int> widths;
  std::vector<int> local(N, -1);
  for (const auto& [key, rows] : cells) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    for (Eigen::Index i = 0; i < n; ++i) local[rows[i]] = static_cast<int>(i);
    Eigen::MatrixXd Rc = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index c = 0; c < n; ++c)
      for (SparseMatrix::InnerIterator it(R, static_cast<Eigen::Index>(rows[c])); it; ++it) {
        const int lr = local[static_cast<std::size_t>(it.row())];
        if (lr < 0) throw std::logic_error("symmetry cell is not invariant under the rotation generator");
        Rc(lr, c) = it.value();
      }
    const Eigen::MatrixXd S = -(L * L) * (Rc * Rc);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()));
    for (Eigen::Index k = 0; k < n; ++k) {
      const double lam = es.eigenvalues()[k];
      const auto m = static_cast<int>(std::lround(std::sqrt(std::max(0.0, lam))));
      if (std::abs(lam - double(m) * m) > 1e-6 * std::max(1.0, lam))
        throw std::logic_error("rotation spectrum is not integral: " + std::to_string(lam));
      const int col = widths[m]++;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double v = es.eigenvectors()(i, k);
        if (std::abs(v) > 1e-15) columns[m].emplace_back(static_cast<int>(rows[i]), col, v);
      }
    }
    for (std::size_t r : rows) local[r] = -1;
  }

  SymmetryBlocks out;
  for (const auto& [m, trip] : columns) {
    const SparseMatrix Q = from_triplets(N, static_cast<std::size_t>(widths[m]), trip);
    const Eigen::MatrixXd AQ = Eigen::MatrixXd(op.a_sigma() * Q);
    Eigen::MatrixXd B = Q.transpose() * AQ;
    out.leakage = std::max(out.leakage, (AQ - Q * B).cwiseAbs().maxCoeff());
    out.momentum.push_back(m);
    out.blocks.push_back(std::move(B));
  }
  return out;
}

double exp_norm(const Eigen::MatrixXd& B, double t) {
  const Eigen::MatrixXd E = (t * B).exp();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(E.transpose() * E, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double relaxation_time_dense(const Eigen::MatrixXd& B, double tolerance, double t_max) {
  if (B.rows() == 0) return 0.0;
  return bisect_trel(B, 0.0, 1.0, tolerance, t_max);
}

namespace {

double block_abscissa(const Eigen::MatrixXd& B) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(B, false);
  return es.eigenvalues().real().maxCoeff();
}

}  // namespace

TrelMeasurement measure_trel_at(const GalerkinOperator& op, double tolerance) {
  if (op.size() > kMaxMeasuredBasisSize)
    throw ConvergenceError("basis size " + std::to_string(op.size()) + " exceeds the dense-solver limit " +
                           std::to_string(kMaxMeasuredBasisSize) + "; lower truncation.D or truncation.J");
  const auto sb = symmetry_blocks(op);
  TrelMeasurement m;
  m.blocks = sb.blocks.size();
  m.largest_block = sb.largest();
  m.leakage = sb.leakage;
  m.abscissa = -std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t i = 0; i < sb.blocks.size(); ++i) {
    const double a = block_abscissa(sb.blocks[i]);
    m.abscissa = std::max(m.abscissa, a);
    order.emplace_back(a, i);
  }
  // Slowest blocks first; a block whose norm already dropped below e^-1 at
  // the current maximum cannot raise it (the norm is non-increasing in t).
  std::sort(order.rbegin(), order.rend());
  for (const auto& [a, i] : order) {
    const auto& B = sb.blocks[i];
    if (m.t_rel > 0.0 && exp_norm(B, m.t_rel) <= kInvE) continue;
    m.t_rel = bisect_trel(B, m.t_rel, std::max(1.0, 2.0 * m.t_rel), tolerance, 1e7);
  }
  return m;
}

TrelReport measure_trel(const GalerkinOperator& op, double threshold, double tolerance) {
  TrelReport r;
  r.truncation = op.truncation();
  r.refined = op.truncation().refined();
  const auto base = measure_trel_at(op, tolerance);
  const auto fine_op = build_operator(op.model(), r.refined, op.sigma());
  const auto fine = measure_trel_at(fine_op, tolerance);
  r.t_rel = base.t_rel;
  r.t_rel_refined = fine.t_rel;
  r.relative_change = std::abs(base.t_rel - fine.t_rel) / fine.t_rel;
  r.converged = r.relative_change < threshold;
  r.abscissa = fine.abscissa;
  r.basis_size = op.size();
  r.refined_basis_size = fine_op.size();
  r.largest_block = fine.largest_block;
  return r;
}

TrelReport measure_trel_adaptive(const SpectralModel& model, const Truncation& start, double sigma,
                                 int max_refinements, double threshold) {
  Truncation t = start;
  t.max_fourier_frequency = std::max(t.max_fourier_frequency, model.max_frequency());
  TrelReport r;
  for (int step = 0;; ++step) {
    const auto op = build_operator(model, t, sigma);
    r = measure_trel(op, threshold);
    if (r.converged || step >= max_refinements) return r;
    t = t.refined();
  }
}

double spectral_abscissa(const GalerkinOperator& op) {
  const auto sb = symmetry_blocks(op);
  double a = -std::numeric_limits<double>::infinity();
  for (const auto& B : sb.blocks) a = std::max(a, block_abscissa(B));
  return a;
}

CollapsedBlock collapsed_ou_block(const GalerkinOperator& op) {
  CollapsedBlock cb;
  std::vector<std::size_t> rows;
  for (std::size_t p = 0; p < op.hermite_indices().size(); ++p)
    if (total_degree(op.hermite_indices()[p]) <= op.truncation().max_hermite_degree - 1) {
      cb.indices.push_back(op.hermite_indices()[p]);
      rows.push_back(op.row(p, 0));
    }
  const Eigen::MatrixXd A(op.a0());
  Eigen::MatrixXd X(A.rows(), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) X.col(static_cast<Eigen::Index>(i)) = A.col(static_cast<Eigen::Index>(rows[i]));
  cb.matrix = -0.5 * X.transpose() * X;
  return cb;
}

Polynomial hermite_polynomial(const MultiIndex& alpha, std::span<const double> variances) {
  const std::size_t d = alpha.size();
  Polynomial out = Polynomial::constant(d, 1.0);
  for (std::size_t j = 0; j < d; ++j) {
    const Polynomial z = (1.0 / std::sqrt(variances[j])) * Polynomial::coordinate(d, j);
    Polynomial prev = Polynomial::constant(d, 1.0), cur = z;
    if (alpha[j] == 0) cur = prev;
    for (int n = 1; n < alpha[j]; ++n) {
      Polynomial next = (1.0 / std::sqrt(n + 1.0)) * (z * cur - std::sqrt(static_cast<double>(n)) * prev);
      prev = std::move(cur);
      cur = std::move(next);
    }
    out = out * cur;
  }
  return out;
}

LiftReport verify_lift_conditions(const GalerkinOperator& op) {
  const SpectralModel& model = op.model();
  const std::size_t d = model.dim();
  const int D = op.truncation().max_hermite_degree;
  const auto law = invariant_law(model);
  LiftReport rep;
  rep.max_hermite_degree = D - 1;

  std::vector<std::size_t> pos;
  for (std::size_t p = 0; p < op.hermite_indices().size(); ++p)
    if (total_degree(op.hermite_indices()[p]) <= D - 1) pos.push_back(p);
  const auto n = static_cast<Eigen::Index>(pos.size());

  const Eigen::MatrixXd A(op.a_sigma());
  Eigen::MatrixXd X(A.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) X.col(i) = A.col(static_cast<Eigen::Index>(op.row(pos[i], 0)));
  const Eigen::MatrixXd energy_matrix = 0.5 * X.transpose() * X;

  // Independent right side: Gradients of the Hermite polynomials in monomial
  // form, integrated by tensor Gauss-Hermite quadrature.
  const auto rule = gaussian_tensor_rule(law.gaussian_variances, D + 1);
  Eigen::MatrixXd Y(static_cast<Eigen::Index>(rule.size() * d), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto g = hermite_polynomial(op.hermite_indices()[pos[i]], law.gaussian_variances);
    for (std::size_t j = 0; j < d; ++j) {
      const auto dg = g.derivative(j);
      for (std::size_t q = 0; q < rule.size(); ++q)
        Y(static_cast<Eigen::Index>(q * d + j), i) = std::sqrt(rule.weights[q]) * dg(rule.point(q));
    }
  }
  const Eigen::MatrixXd dirichlet = (1.0 / (2.0 * model.volume())) * (Y.transpose() * Y);

  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) {
      rep.orthogonality = std::max(rep.orthogonality, std::abs(A(static_cast<Eigen::Index>(op.row(pos[k], 0)),
                                                                  static_cast<Eigen::Index>(op.row(pos[i], 0)))));
      rep.energy = std::max(rep.energy, std::abs(energy_matrix(i, k) - dirichlet(i, k)));
      ++rep.pairs;
    }
  return rep;
}

namespace {

struct GaussianIntegrals {
  double laplace_sq = 0.0;   // int (grad* grad g)^2
  double hess_sq = 0.0;      // int ||Hess g||_F^2
  double weighted_grad = 0.0;  // sum_j s_j int (d_j g)^2
  double grad_sq = 0.0;      // int |grad g|^2
  double drift_grad = 0.0;   // int |grad Phi|^2 |grad g|^2
};

GaussianIntegrals gaussian_integrals(const SpectralModel& model, const Polynomial& g, int points) {
  const std::size_t d = model.dim();
  const auto law = invariant_law(model);
  const auto rule = gaussian_tensor_rule(law.gaussian_variances, points);
  const PolyJet jet = poly_jet(g);
  GaussianIntegrals out;
  std::vector<double> grad(d);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto u = rule.point(q);
    const double w = rule.weights[q];
    double lap = 0.0, hess = 0.0, dphi_grad = 0.0, weighted = 0.0, gsq = 0.0, phisq = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      grad[a] = jet.grad[a](u);
      const double s = model.stiffness(a);
      dphi_grad += s * u[a] * grad[a];
      weighted += s * grad[a] * grad[a];
      gsq += grad[a] * grad[a];
      phisq += s * s * u[a] * u[a];
      for (std::size_t b = 0; b < d; ++b) {
        const double h = jet.hess[a][b](u);
        hess += h * h;
        if (a == b) lap += h;
      }
    }
    const double op = -lap + dphi_grad;
    out.laplace_sq += w * op * op;
    out.hess_sq += w * hess;
    out.weighted_grad += w * weighted;
    out.grad_sq += w * gsq;
    out.drift_grad += w * phisq * gsq;
  }
  return out;
}

}  // namespace

IdentityReport verify_bochner(const SpectralModel& model, int max_degree, int n_random, std::uint64_t seed) {
  IdentityReport rep;
  for (const auto& g : test_polynomials(model.dim(), max_degree, n_random, seed)) {
    const auto I = gaussian_integrals(model, g, max_degree + 2);
    const double lhs = I.laplace_sq, rhs = I.hess_sq + I.weighted_grad;
    rep.max_residual = std::max(rep.max_residual, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
    ++rep.cases;
  }
  return rep;
}

IdentityReport verify_drift_inequality(const SpectralModel& model, int max_degree, int n_random, std::uint64_t seed) {
  IdentityReport rep;
  rep.min_slack = std::numeric_limits<double>::infinity();
  double total_s = 0.0;
  for (std::size_t j = 0; j < model.dim(); ++j) total_s += model.stiffness(j);
  for (const auto& g : test_polynomials(model.dim(), max_degree, n_random, seed)) {
    const auto I = gaussian_integrals(model, g, max_degree + 2);
    const double rhs = 2.0 * total_s * I.grad_sq + 4.0 * I.hess_sq;
    const double slack = (rhs - I.drift_grad) / std::max(1.0, rhs);
    rep.min_slack = std::min(rep.min_slack, slack);
    if (slack < -1e-12) ++rep.violations;
    ++rep.cases;
  }
  return rep;
}

namespace {

ProductRule lstar_l_rule(const GalerkinOperator& op) {
  return product_rule(op.model(), op.truncation().max_hermite_degree + 1,
                      op.truncation().max_fourier_frequency + 2 * op.model().max_frequency());
}

}  // namespace

std::size_t lstar_l_work(const GalerkinOperator& op) {
  // Node counts only; the tensor rule is cheap next to the basis sweeps.
  const std::size_t gh = static_cast<std::size_t>(op.truncation().max_hermite_degree + 1);
  std::size_t u_nodes = 1;
  for (std::size_t j = 0; j < op.model().dim(); ++j) u_nodes *= gh;
  const auto x = make_quadrature(op.truncation().max_fourier_frequency + 2 * op.model().max_frequency(),
                                 op.model().L());
  return u_nodes * x.nodes.size() * op.size();
}

LStarLReport verify_lstar_l(const GalerkinOperator& op, double c1_squared, int n_random, std::uint64_t seed) {
  const SpectralModel& model = op.model();
  const std::size_t d = model.dim();
  const int D = op.truncation().max_hermite_degree;
  const int J = op.truncation().max_fourier_frequency;
  if (J < 2 * model.max_frequency())
    throw ValidationError("verify_lstar_l needs truncation.J >= 2 * max frequency");
  if (D < 3) throw ValidationError("verify_lstar_l needs truncation.D >= 3");
  if (lstar_l_work(op) > kMaxLStarLWork)
    throw ValidationError("verify_lstar_l: quadrature work " + std::to_string(lstar_l_work(op)) + " exceeds " +
                          std::to_string(static_cast<std::size_t>(kMaxLStarLWork)));

  const auto law = invariant_law(model);
  const auto pr = lstar_l_rule(op);
  const auto& H = op.hermite_indices();
  const std::size_t N = op.size();
  BasisEvaluator eval(op);
  std::vector<double> psi(N), e(d), de(d);

  LStarLReport rep;
  rep.c1 = std::sqrt(c1_squared);
  for (const auto& g : test_polynomials(d, D - 2, n_random, seed)) {
    const PolyJet jet = poly_jet(g);

    // Hermite coefficients of g (Fourier label 0).
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
    double lg_sq = 0.0;
    for (std::size_t q = 0; q < pr.u.size(); ++q) {
      const auto u = pr.u.point(q);
      eval.values(u, 0.0, psi);
      const double gv = g(u);
      for (std::size_t p = 0; p < H.size(); ++p) c[static_cast<Eigen::Index>(op.row(p, 0))] += pr.u.weights[q] * gv * psi[op.row(p, 0)];
      double lap = 0.0, dphi = 0.0;
      for (std::size_t a = 0; a < d; ++a) {
        lap += jet.hess[a][a](u);
        dphi += model.stiffness(a) * u[a] * jet.grad[a](u);
      }
      const double lg = (lap - dphi) / (2.0 * model.volume());
      lg_sq += pr.u.weights[q] * lg * lg;
    }
    const Eigen::VectorXd y = op.a0().transpose() * (op.a0() * c);

    // Pointwise closed form on the product grid, projected onto the basis;
    // the part outside the truncated space is measured by a second pass.
    // Both passes stream over the nodes so memory stays O(N).
    std::vector<double> grad(d), hess(d * d);
    auto sweep = [&](const auto& visit) {
      for (std::size_t q = 0; q < pr.u.size(); ++q) {
        const auto u = pr.u.point(q);
        for (std::size_t a = 0; a < d; ++a) grad[a] = jet.grad[a](u);
        for (std::size_t a = 0; a < d; ++a)
          for (std::size_t b = 0; b < d; ++b) hess[a * d + b] = jet.hess[a][b](u);
        for (std::size_t ix = 0; ix < pr.x.size(); ++ix) {
          const double x = pr.x.nodes[ix];
          model.evaluate(x, e, de);
          double ehe = 0.0, drift = 0.0, de_grad = 0.0;
          for (std::size_t a = 0; a < d; ++a) {
            de_grad += de[a] * grad[a];
            drift += model.stiffness(a) * u[a] / std::abs(model.eigenvalues()[a]) * de[a];
            for (std::size_t b = 0; b < d; ++b) ehe += e[a] * hess[a * d + b] * e[b];
          }
          eval.values(u, x, psi);
          visit(-ehe + drift * de_grad, pr.u.weights[q] * pr.x.weights[ix] * pr.x_norm);
        }
      }
    };
    Eigen::VectorXd proj = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
    sweep([&](double f, double w) {
      for (std::size_t r = 0; r < N; ++r) proj[static_cast<Eigen::Index>(r)] += w * f * psi[r];
    });
    double outside_sq = 0.0;
    sweep([&](double f, double w) {
      double fit = 0.0;
      for (std::size_t r = 0; r < N; ++r) fit += proj[static_cast<Eigen::Index>(r)] * psi[r];
      outside_sq += w * (f - fit) * (f - fit);
    });
    const double outside = std::sqrt(outside_sq);
    rep.max_residual = std::max({rep.max_residual, (proj - y).cwiseAbs().maxCoeff(), outside});
    if (lg_sq > 0.0) rep.max_norm_ratio = std::max(rep.max_norm_ratio, y.norm() / std::sqrt(lg_sq));
    ++rep.cases;
  }
  rep.within_c1 = rep.max_norm_ratio <= rep.c1;
  return rep;
}

void write_operator_triplets(std::ostream& os, const GalerkinOperator::SparseMatrix& m) {
  os << "# rows " << m.rows() << " cols " << m.cols() << " nnz " << m.nonZeros() << '\n';
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
}

void write_index_map(std::ostream& os, const GalerkinOperator& op) {
  const std::size_t d = op.model().dim();
  os << "row,fourier";
  for (std::size_t j = 0; j < d; ++j) os << ",alpha_" << j + 1;
  os << '\n';
  for (std::size_t r = 0; r < op.size(); ++r) {
    os << r << ',' << op.fourier_labels()[op.fourier_position(r)];
    for (int a : op.hermite_indices()[op.hermite_position(r)]) os << ',' << a;
    os << '\n';
  }
}

}  // namespace srd
