#include "ruelle/extremality.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "ruelle/error.hpp"

namespace ruelle {
namespace {

constexpr double kRelativeNullThreshold = 1e-10;

}  // namespace

CylinderFunction conditional_expectation(const Measure& mu0, const CylinderFunction& weight,
                                         const CylinderFunction& g) {
  require_nonnegative(weight, "weight");
  const auto vg = multiply(weight, g);
  const int depth = vg.depth();
  const auto fine = to_raw(mu0, depth + 1);
  const auto layout = fine.shift().layout(depth);
  std::vector<double> num(layout->size(), 0.0);
  std::vector<double> den(layout->size(), 0.0);
  Word y(static_cast<std::size_t>(depth) + 1);
  for (std::size_t i = 0; i < fine.layout().size(); ++i) {
    fine.layout().decode(i, y);
    const std::size_t j = layout->index_of(std::span<const Symbol>(y).subspan(1));
    num[j] += vg(y) * fine.masses()[i];
    den[j] += fine.masses()[i];
  }
  for (std::size_t j = 0; j < num.size(); ++j) num[j] = den[j] > 0.0 ? num[j] / den[j] : 0.0;
  return CylinderFunction(layout, std::move(num));
}

double ergodicity_residual(const Measure& mu0, const CylinderFunction& weight,
                           const CylinderFunction& f) {
  const auto lhs = conditional_expectation(mu0, weight, f);
  const auto ev = conditional_expectation(mu0, weight,
                                          CylinderFunction::constant(f.shift(), 1, 1.0));
  return sup_distance(lhs, multiply(ev, f));
}

ErgodicityReport relative_ergodicity_dimension(const Measure& mu0, const CylinderFunction& weight,
                                               int depth, double tol) {
  if (depth < 1) throw Error(ErrorCode::kInvalidArgument, "depth must be >= 1");
  const double fixed = check_fixed_point(weight, mu0, depth);
  if (!(fixed <= tol)) {
    throw Error(ErrorCode::kNotFixedPoint,
                "T_V(mu0) differs from mu0 by " + std::to_string(fixed));
  }
  const Subshift& shift = weight.shift();
  const auto columns = shift.layout(depth);
  const int work = std::max(weight.depth(), depth);
  const auto fine = to_raw(mu0, work + 1);

  // Unknowns: depth-d cylinders charged by mu0 or by mu0∘r^{-1}.
  const auto direct = fine.coarsen(depth);
  std::vector<double> pulled(columns->size(), 0.0);
  {
    const auto next = fine.coarsen(depth + 1);
    Word y(static_cast<std::size_t>(depth) + 1);
    for (std::size_t i = 0; i < next.layout().size(); ++i) {
      next.layout().decode(i, y);
      pulled[columns->index_of(std::span<const Symbol>(y).subspan(1))] += next.masses()[i];
    }
  }
  std::vector<int> unknown(columns->size(), -1);
  std::vector<std::size_t> unknown_words;
  for (std::size_t j = 0; j < columns->size(); ++j) {
    if (direct.masses()[j] > 0.0 || pulled[j] > 0.0) {
      unknown[j] = static_cast<int>(unknown_words.size());
      unknown_words.push_back(j);
    }
  }
  const auto n_unknown = static_cast<Eigen::Index>(unknown_words.size());

  // One row per depth-`work` word w:
  //   sum_a V(a w) mu0([a w]) (f((a w)|d) - f(w|d)) = 0.
  const auto rows_layout = shift.layout(work);
  std::vector<Eigen::VectorXd> rows;
  Word w(static_cast<std::size_t>(work));
  Word aw(static_cast<std::size_t>(work) + 1);
  for (std::size_t i = 0; i < rows_layout->size(); ++i) {
    rows_layout->decode(i, w);
    std::copy(w.begin(), w.end(), aw.begin() + 1);
    Eigen::VectorXd row = Eigen::VectorXd::Zero(n_unknown);
    bool nonzero = false;
    for (Symbol a : shift.preimage_symbols(w[0])) {
      aw[0] = a;
      const double c = weight(aw) * fine.mass(aw);
      if (c == 0.0) continue;
      row(unknown[columns->index_of(aw)]) += c;
      row(unknown[columns->index_of(w)]) -= c;
      nonzero = true;
    }
    if (nonzero && row.cwiseAbs().maxCoeff() > 0.0) rows.push_back(std::move(row));
  }

  ErgodicityReport report;
  report.depth = depth;
  Eigen::MatrixXd null_basis;
  if (rows.empty()) {
    null_basis = Eigen::MatrixXd::Identity(n_unknown, n_unknown);
  } else {
    Eigen::MatrixXd system(static_cast<Eigen::Index>(rows.size()), n_unknown);
    for (std::size_t r = 0; r < rows.size(); ++r) system.row(static_cast<Eigen::Index>(r)) = rows[r];
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(system, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    report.singular_values.assign(sv.data(), sv.data() + sv.size());
    const double cutoff = kRelativeNullThreshold * (sv.size() > 0 ? sv(0) : 0.0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > cutoff) ++rank;
    null_basis = svd.matrixV().rightCols(n_unknown - rank);
  }

  report.solution_dim = static_cast<int>(null_basis.cols());
  report.extremal_certificate = report.solution_dim == 1;
  for (Eigen::Index c = 0; c < null_basis.cols(); ++c) {
    std::vector<double> values(columns->size(), 0.0);
    for (Eigen::Index u = 0; u < n_unknown; ++u)
      values[unknown_words[static_cast<std::size_t>(u)]] = null_basis(u, c);
    report.basis.emplace_back(columns, std::move(values));
    report.max_basis_residual =
        std::max(report.max_basis_residual, ergodicity_residual(mu0, weight, report.basis.back()));
  }
  return report;
}

std::optional<Decomposition> decompose(const Measure& mu0, const CylinderFunction& weight,
                                       int depth, double tol) {
  auto report = relative_ergodicity_dimension(mu0, weight, depth, tol);
  if (report.solution_dim <= 1) return std::nullopt;

  const auto masses = to_raw(mu0, depth);
  const double total = masses.total();
  // Cylinders where f matters at all: those with nonzero basis entries
  // or positive mass.
  std::vector<bool> support(masses.layout().size(), false);
  for (std::size_t j = 0; j < support.size(); ++j) {
    support[j] = masses.masses()[j] > 0.0;
    for (const auto& b : report.basis) support[j] = support[j] || b.at(j) != 0.0;
  }

  const CylinderFunction* chosen = nullptr;
  double best = 0.0;
  for (const auto& b : report.basis) {
    double mean = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) mean += b.at(j) * masses.masses()[j];
    mean /= total;
    double spread = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j)
      if (support[j]) spread = std::max(spread, std::abs(b.at(j) - mean));
    if (spread > best) {
      best = spread;
      chosen = &b;
    }
  }
  if (chosen == nullptr) return std::nullopt;

  std::vector<double> v(chosen->values().begin(), chosen->values().end());
  double mean = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) mean += v[j] * masses.masses()[j];
  mean /= total;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (!support[j] || std::abs(v[j] - mean) <= 1e-12 * best) continue;
    if (v[j] < mean) std::transform(v.begin(), v.end(), v.begin(), [](double x) { return -x; });
    break;
  }
  double low = 0.0;
  bool first = true;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (!support[j]) continue;
    low = first ? v[j] : std::min(low, v[j]);
    first = false;
  }
  std::vector<double> f1(v.size(), 0.0);
  double integral = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (support[j]) f1[j] = v[j] - low;
    integral += f1[j] * masses.masses()[j];
  }
  if (!(integral > 0.0)) return std::nullopt;
  double top = 0.0;
  for (auto& x : f1) {
    x /= integral;
    top = std::max(top, x);
  }
  const double lambda = 1.0 / (2.0 * top);
  std::vector<double> f2(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) f2[j] = (1.0 - lambda * f1[j]) / (1.0 - lambda);

  CylinderFunction g1(masses.layout_ptr(), std::move(f1));
  CylinderFunction g2(masses.layout_ptr(), std::move(f2));
  Measure mu1 = weighted(g1, mu0);
  Measure mu2 = weighted(g2, mu0);
  return Decomposition{lambda, std::move(g1), std::move(g2), std::move(mu1), std::move(mu2),
                       std::move(report)};
}

}  // namespace ruelle
