#include "ruelle/reference_measure.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "detail.hpp"
#include "ruelle/error.hpp"

namespace ruelle {
namespace {

constexpr double kNullSingularValue = 1e-10;

// M(i, j) = A(i, j) / c(j); column-stochastic.
Eigen::MatrixXd transition_matrix(const Subshift& shift) {
  const int k = shift.alphabet_size();
  Eigen::MatrixXd m(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      m(i, j) = shift.allowed(i, j) ? 1.0 / shift.column_sum(j) : 0.0;
  return m;
}

// Stationary vector of the chain restricted to `states` (a closed class),
// by least squares on [M - I; 1^T] q = [0; 1].
std::vector<double> solve_fixed_vector(const Eigen::MatrixXd& m, const std::vector<int>& states,
                                       int k) {
  const auto n = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(n + 1, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      system(r, c) = m(states[static_cast<std::size_t>(r)], states[static_cast<std::size_t>(c)]) -
                     (r == c ? 1.0 : 0.0);
  system.row(n).setOnes();
  rhs(n) = 1.0;
  Eigen::VectorXd sol = system.colPivHouseholderQr().solve(rhs).cwiseMax(0.0);
  // Two steps of q <- M q clean up QR round-off (exact for averaging chains).
  const Eigen::MatrixXd sub = system.topRows(n) + Eigen::MatrixXd::Identity(n, n);
  for (int step = 0; step < 2; ++step) {
    sol = sub * sol;
    sol /= sol.sum();
  }
  std::vector<double> q(static_cast<std::size_t>(k), 0.0);
  for (Eigen::Index i = 0; i < n; ++i)
    q[static_cast<std::size_t>(states[static_cast<std::size_t>(i)])] = sol(i);
  const double total = std::accumulate(q.begin(), q.end(), 0.0);
  for (auto& v : q) v /= total;
  return q;
}

// Closed communicating classes of the chain j -> i (allowed when A(i, j) = 1).
std::vector<std::vector<int>> closed_classes(const Subshift& shift) {
  const int k = shift.alphabet_size();
  const auto idx = [k](int i, int j) { return static_cast<std::size_t>(i * k + j); };
  std::vector<char> reach(static_cast<std::size_t>(k * k), 0);
  for (int j = 0; j < k; ++j) {
    reach[idx(j, j)] = 1;
    for (int i = 0; i < k; ++i)
      if (shift.allowed(i, j)) reach[idx(j, i)] = 1;
  }
  for (int m = 0; m < k; ++m)
    for (int i = 0; i < k; ++i)
      if (reach[idx(i, m)])
        for (int j = 0; j < k; ++j)
          if (reach[idx(m, j)]) reach[idx(i, j)] = 1;

  std::vector<std::vector<int>> classes;
  std::vector<char> assigned(static_cast<std::size_t>(k), 0);
  for (int s = 0; s < k; ++s) {
    if (assigned[static_cast<std::size_t>(s)]) continue;
    std::vector<int> cls;
    for (int t = 0; t < k; ++t)
      if (reach[idx(s, t)] && reach[idx(t, s)]) cls.push_back(t);
    for (int t : cls) assigned[static_cast<std::size_t>(t)] = 1;
    bool closed = true;
    for (int t : cls)
      for (int u = 0; u < k; ++u)
        if (reach[idx(t, u)] && std::find(cls.begin(), cls.end(), u) == cls.end()) closed = false;
    if (closed) classes.push_back(std::move(cls));
  }
  return classes;
}

}  // namespace

MarkovMeasure::MarkovMeasure(Subshift shift, std::vector<double> symbol_masses,
                             int eigenspace_dimension)
    : shift_(std::move(shift)), q_(std::move(symbol_masses)),
      eigenspace_dimension_(eigenspace_dimension) {
  if (q_.size() != static_cast<std::size_t>(shift_.alphabet_size())) {
    throw Error(ErrorCode::kInvalidArgument, "need one mass per symbol");
  }
  for (double v : q_) {
    if (!(v >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "symbol masses must be nonnegative");
  }
}

double MarkovMeasure::cylinder_mass(std::span<const Symbol> word) const {
  if (!shift_.admissible(word)) {
    throw Error(ErrorCode::kInadmissibleWord, format_word(word, shift_.alphabet_size()));
  }
  double mass = q_[static_cast<std::size_t>(word.back())];
  for (std::size_t i = 0; i + 1 < word.size(); ++i) mass /= shift_.column_sum(word[i + 1]);
  return mass;
}

std::vector<double> MarkovMeasure::masses(const WordLayout& layout) const {
  std::vector<double> out(layout.size());
  Word buffer(static_cast<std::size_t>(layout.depth()));
  for (std::size_t i = 0; i < out.size(); ++i) {
    layout.decode(i, buffer);
    out[i] = cylinder_mass(buffer);
  }
  return out;
}

double MarkovMeasure::integrate(const CylinderFunction& f) const {
  const auto m = masses(f.layout());
  double total = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) total += f.at(i) * m[i];
  return total;
}

MarkovMeasure strongly_invariant_measure(const Subshift& shift) {
  const int k = shift.alphabet_size();
  const Eigen::MatrixXd m = transition_matrix(shift);
  const Eigen::MatrixXd defect = m - Eigen::MatrixXd::Identity(k, k);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(defect);
  const auto& sv = svd.singularValues();
  int null_dim = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) < kNullSingularValue) ++null_dim;
  null_dim = std::max(null_dim, 1);

  if (null_dim == 1) {
    std::vector<int> all(static_cast<std::size_t>(k));
    std::iota(all.begin(), all.end(), 0);
    return MarkovMeasure(shift, solve_fixed_vector(m, all, k), 1);
  }

  const auto classes = closed_classes(shift);
  std::vector<double> q(static_cast<std::size_t>(k), 0.0);
  for (const auto& cls : classes) {
    const auto part = solve_fixed_vector(m, cls, k);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += part[i] / static_cast<double>(classes.size());
  }
  return MarkovMeasure(shift, std::move(q), null_dim);
}

std::vector<double> power_iteration_fixed_vector(const Subshift& shift, double tol, int max_iter) {
  const int k = shift.alphabet_size();
  const Eigen::MatrixXd lazy = 0.5 * (transition_matrix(shift) + Eigen::MatrixXd::Identity(k, k));
  Eigen::VectorXd q = Eigen::VectorXd::Constant(k, 1.0 / k);
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd next = lazy * q;
    next /= next.sum();
    const double change = (next - q).lpNorm<Eigen::Infinity>();
    q = std::move(next);
    if (change < tol) break;
  }
  return {q.data(), q.data() + q.size()};
}

double verify_strong_invariance(const MarkovMeasure& rho, int depth) {
  if (depth < 1) throw Error(ErrorCode::kInvalidArgument, "depth must be >= 1");
  const Subshift& shift = rho.shift();
  const auto words = shift.layout(depth);
  // The averaged indicator x -> (1/c(x_1)) sum_a chi_[w](a x) is constant on
  // cylinders of depth max(d-1, 1); integrate it by summing over those.
  const auto base = shift.layout(std::max(depth - 1, 1));
  std::vector<double> rhs(words->size(), 0.0);
  Word x(static_cast<std::size_t>(base->depth()));
  Word y(static_cast<std::size_t>(base->depth()) + 1);
  for (std::size_t i = 0; i < base->size(); ++i) {
    base->decode(i, x);
    const double weight = rho.cylinder_mass(x) / shift.column_sum(x[0]);
    std::copy(x.begin(), x.end(), y.begin() + 1);
    for (Symbol a : shift.preimage_symbols(x[0])) {
      y[0] = a;
      rhs[words->index_of(y)] += weight;
    }
  }
  auto diff = rho.masses(*words);
  for (std::size_t j = 0; j < diff.size(); ++j) diff[j] -= rhs[j];
  return detail::max_cylinder_deviation(*words, diff);
}

}  // namespace ruelle
