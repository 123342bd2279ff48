#include "ruelle/path_space.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <string>
#include <thread>

#include "detail.hpp"
#include "ruelle/error.hpp"

namespace ruelle {
namespace {

constexpr std::size_t kSampleBlock = 1024;

// Depth at which the conditional prepend law is a function of the word:
// V and a density base are both constant on these cylinders.
int natural_depth(const PathMeasure& pm) {
  int depth = pm.weight().depth();
  if (const auto* density = std::get_if<DensityMeasure>(&pm.base())) {
    depth = std::max(depth, density->density().depth());
  }
  return depth;
}

std::mt19937_64 block_stream(std::uint64_t seed, std::uint64_t block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
  return std::mt19937_64(seq);
}

double unit_interval(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

std::vector<double> diff_of(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.begin(), a.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

}  // namespace

PathMeasure::PathMeasure(CylinderFunction weight, Measure base)
    : weight_(std::move(weight)), base_(std::move(base)) {
  require_nonnegative(weight_, "weight");
  if (!(shift_of(base_) == weight_.shift())) {
    throw Error(ErrorCode::kInvalidArgument, "weight and base measure live on different subshifts");
  }
}

Measure PathMeasure::marginal(int n) const {
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "marginal index must be >= 0");
  if (auto it = overrides_.find(n); it != overrides_.end()) return it->second;
  if (n == 0) return base_;
  return weighted(weight_product(weight_, n), base_);
}

PathMeasure PathMeasure::with_marginal_override(int n, Measure mu) const {
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "marginal index must be >= 0");
  if (!(shift_of(mu) == shift())) {
    throw Error(ErrorCode::kInvalidArgument, "override lives on a different subshift");
  }
  PathMeasure out = *this;
  out.overrides_.insert_or_assign(n, std::move(mu));
  return out;
}

PathMeasure build_path_measure(const CylinderFunction& weight, const Measure& mu0, double tol,
                               int check_depth) {
  const double residual = check_fixed_point(weight, mu0, check_depth);
  if (!(residual <= tol)) {
    throw Error(ErrorCode::kNotFixedPoint,
                "T_V(mu0) differs from mu0 by " + std::to_string(residual) + " at depth " +
                    std::to_string(check_depth));
  }
  return PathMeasure(weight, mu0);
}

double check_consistency(const PathMeasure& pm, int n, int depth) {
  if (n < 0 || depth < 1) throw Error(ErrorCode::kInvalidArgument, "need n >= 0 and depth >= 1");
  const auto next = to_raw(pm.marginal(n + 1), depth + 1);
  const auto current = to_raw(pm.marginal(n), depth);
  std::vector<double> pulled(current.layout().size(), 0.0);
  Word y(static_cast<std::size_t>(depth) + 1);
  for (std::size_t i = 0; i < next.layout().size(); ++i) {
    next.layout().decode(i, y);
    pulled[current.layout().index_of(std::span<const Symbol>(y).subspan(1))] += next.masses()[i];
  }
  return detail::max_cylinder_deviation(current.layout(), diff_of(current.masses(), pulled));
}

double check_quasi_invariance(const PathMeasure& pm, int depth, int n_max) {
  if (depth < 1 || n_max < 0) {
    throw Error(ErrorCode::kInvalidArgument, "need depth >= 1 and n_max >= 0");
  }
  double worst = check_fixed_point(pm.weight(), pm.marginal(0), depth);
  const auto target = pm.shift().layout(depth);
  CylinderFunction shifted = pm.weight();  // V∘r^n
  for (int n = 0; n <= n_max; ++n) {
    if (n > 0) shifted = compose_with_shift(shifted);
    const int fine = std::max(depth, shifted.depth());
    const auto lhs = to_raw(pm.marginal(n + 1), fine);
    const auto base = to_raw(pm.marginal(n), fine);
    const auto v = promote_depth(shifted, fine);
    std::vector<double> diff(lhs.masses().begin(), lhs.masses().end());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= v.at(i) * base.masses()[i];
    const auto coarse = detail::coarsen(lhs.layout(), diff, *target);
    worst = std::max(worst, detail::max_cylinder_deviation(*target, coarse));
  }
  return worst;
}

Word PathSample::coordinate(int n) const {
  if (n < 0 || n > static_cast<int>(prepends.size())) {
    throw Error(ErrorCode::kInvalidArgument, "path has no coordinate " + std::to_string(n));
  }
  Word out(prepends.rend() - n, prepends.rend());
  out.insert(out.end(), base.begin(), base.end());
  return out;
}

PathSampler::PathSampler(const PathMeasure& pm, int steps, int base_depth)
    : steps_(steps), k_(pm.shift().alphabet_size()) {
  if (steps < 0 || base_depth < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need steps >= 0 and base depth >= 1");
  }
  const int depth = std::max(base_depth, natural_depth(pm));
  layout_ = pm.shift().layout(depth);
  const Subshift& shift = pm.shift();

  const auto base = to_raw(pm.marginal(0), depth);
  base_cdf_.resize(layout_->size());
  std::partial_sum(base.masses().begin(), base.masses().end(), base_cdf_.begin());
  const double total = base_cdf_.empty() ? 0.0 : base_cdf_.back();
  if (!(total > 0.0)) throw Error(ErrorCode::kZeroMassConditioning, "base measure has zero mass");
  for (auto& c : base_cdf_) c /= total;

  const auto ku = static_cast<std::size_t>(k_);
  Word w(static_cast<std::size_t>(depth));
  Word aw(static_cast<std::size_t>(depth) + 1);
  for (int step = 0; step < steps; ++step) {
    const auto current = to_raw(pm.marginal(step), depth);
    const auto next = to_raw(pm.marginal(step + 1), depth + 1);
    std::vector<double> table(layout_->size() * ku, 0.0);
    for (std::size_t i = 0; i < layout_->size(); ++i) {
      const auto row = std::span<double>(table).subspan(i * ku, ku);
      const double denom = current.masses()[i];
      layout_->decode(i, w);
      std::copy(w.begin(), w.end(), aw.begin() + 1);
      double row_sum = 0.0;
      if (denom > 0.0) {
        for (Symbol a : shift.preimage_symbols(w[0])) {
          aw[0] = a;
          row[static_cast<std::size_t>(a)] = next.mass(aw) / denom;
          row_sum += row[static_cast<std::size_t>(a)];
        }
      }
      if (row_sum > 0.0) {
        for (auto& p : row) p /= row_sum;
      } else {
        std::fill(row.begin(), row.end(), -1.0);
      }
    }
    kernels_.push_back(std::move(table));
  }
}

std::span<const double> PathSampler::kernel(int step, std::size_t word_index) const {
  const auto ku = static_cast<std::size_t>(k_);
  const auto row = std::span<const double>(kernels_.at(static_cast<std::size_t>(step)))
                       .subspan(word_index * ku, ku);
  if (row[0] < 0.0) return {};
  return row;
}

std::size_t PathSampler::pick_base(double u) const {
  // The first cumulative value above u sits on a word of positive mass.
  auto it = std::upper_bound(base_cdf_.begin(), base_cdf_.end(), u);
  if (it == base_cdf_.end()) {
    it = std::lower_bound(base_cdf_.begin(), base_cdf_.end(), base_cdf_.back());
  }
  return static_cast<std::size_t>(it - base_cdf_.begin());
}

Symbol PathSampler::pick_prepend(int step, std::size_t word_index, double u,
                                 std::span<const Symbol> w) const {
  const auto row = kernel(step, word_index);
  if (row.empty()) {
    throw Error(ErrorCode::kZeroMassConditioning,
                "step " + std::to_string(step) + " conditions on [" +
                    format_word(w, k_) + "], which has zero mass");
  }
  double cumulative = 0.0;
  Symbol last_positive = -1;
  for (std::size_t a = 0; a < row.size(); ++a) {
    if (row[a] <= 0.0) continue;
    cumulative += row[a];
    last_positive = static_cast<Symbol>(a);
    if (u < cumulative) return last_positive;
  }
  return last_positive;
}

PathSample sample_path(const PathMeasure& pm, int steps, int base_depth, std::uint64_t seed) {
  return sample_paths(pm, steps, base_depth, 1, seed, 1).front();
}

std::vector<PathSample> sample_paths(const PathMeasure& pm, int steps, int base_depth,
                                     std::size_t count, std::uint64_t seed, int workers) {
  const PathSampler sampler(pm, steps, base_depth);
  std::vector<PathSample> out(count);
  const std::size_t blocks = (count + kSampleBlock - 1) / kSampleBlock;

  std::atomic<std::size_t> next_block{0};
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(std::max(workers, 1)));
  auto worker = [&](std::size_t slot) {
    try {
      for (std::size_t b = next_block++; b < blocks; b = next_block++) {
        auto gen = block_stream(seed, b);
        auto uniform = [&gen] { return unit_interval(gen); };
        const std::size_t end = std::min(count, (b + 1) * kSampleBlock);
        for (std::size_t i = b * kSampleBlock; i < end; ++i) out[i] = sampler.draw(uniform);
      }
    } catch (...) {
      failures[slot] = std::current_exception();
    }
  };

  if (workers <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker, static_cast<std::size_t>(t));
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  return out;
}

EmpiricalReport empirical_check(const PathMeasure& pm, const std::vector<PathSample>& samples,
                                int n, int depth) {
  if (samples.empty()) throw Error(ErrorCode::kInvalidArgument, "no samples");
  if (depth < 1) throw Error(ErrorCode::kInvalidArgument, "depth must be >= 1");
  const auto layout = pm.shift().layout(depth);
  std::vector<double> counts(layout->size(), 0.0);
  for (const auto& s : samples) counts[layout->index_of(s.coordinate(n))] += 1.0;

  auto exact = to_raw(pm.marginal(n), depth);
  const double total = exact.total();
  if (!(total > 0.0)) throw Error(ErrorCode::kZeroMassConditioning, "marginal has zero mass");

  EmpiricalReport report;
  report.n = n;
  report.samples = samples.size();
  report.depth = depth;
  const auto big_n = static_cast<double>(samples.size());
  for (int d = 1; d <= depth; ++d) {
    const auto coarse = pm.shift().layout(d);
    const auto c = detail::coarsen(*layout, counts, *coarse);
    const auto p = detail::coarsen(exact.layout(), exact.masses(), *coarse);
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double prob = p[i] / total;
      const double deviation = std::abs(c[i] / big_n - prob);
      const double bound = 3.0 * std::sqrt(std::max(prob * (1.0 - prob), 0.0) / big_n);
      if (deviation > report.max_deviation) {
        report.max_deviation = deviation;
        report.sigma_bound = bound;
      }
      // Slack absorbs rounding when prob is 0 or 1.
      const double ratio = deviation <= 1e-12 ? 0.0 : deviation / std::max(bound, 1e-300);
      report.worst_ratio = std::max(report.worst_ratio, ratio);
      if (deviation > bound + 1e-12) report.pass = false;
    }
  }
  return report;
}

EmpiricalReport empirical_check(const PathMeasure& pm, int n, std::size_t samples, int depth,
                                std::uint64_t seed, int workers) {
  return empirical_check(pm, sample_paths(pm, n, depth, samples, seed, workers), n, depth);
}

MartingaleCoordinates martingale_coordinates(const PathMeasure& pm, const CylinderFunction& xi,
                                             int level) {
  if (level < 0) throw Error(ErrorCode::kInvalidArgument, "level must be >= 0");
  const int depth = std::max(xi.depth(), natural_depth(pm));
  const auto layout = pm.shift().layout(depth);
  const auto top = to_raw(pm.marginal(level), depth + level);

  MartingaleCoordinates out;
  for (int n = 0; n <= level; ++n) {
    const int s = level - n;
    const auto fine = top.coarsen(depth + s);
    const auto below = to_raw(pm.marginal(n), depth);
    std::vector<double> values(layout->size(), 0.0);
    Word u(static_cast<std::size_t>(depth + s));
    for (std::size_t i = 0; i < fine.layout().size(); ++i) {
      fine.layout().decode(i, u);
      values[layout->index_of(std::span<const Symbol>(u).subspan(static_cast<std::size_t>(s)))] +=
          xi(u) * fine.masses()[i];
    }
    double norm2 = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double m = below.masses()[j];
      values[j] = m > 0.0 ? values[j] / m : 0.0;
      norm2 += values[j] * values[j] * m;
    }
    out.levels.emplace_back(layout, std::move(values));
    out.norms.push_back(std::sqrt(norm2));
  }
  return out;
}

CylinderFunction conditional_step(const PathMeasure& pm, const CylinderFunction& g, int n) {
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "level must be >= 0");
  const int depth = g.depth();
  const auto next = to_raw(pm.marginal(n + 1), depth + 1);
  const auto current = to_raw(pm.marginal(n), depth);
  std::vector<double> values(current.layout().size(), 0.0);
  Word y(static_cast<std::size_t>(depth) + 1);
  for (std::size_t i = 0; i < next.layout().size(); ++i) {
    next.layout().decode(i, y);
    values[current.layout().index_of(std::span<const Symbol>(y).subspan(1))] +=
        g(y) * next.masses()[i];
  }
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double m = current.masses()[j];
    values[j] = m > 0.0 ? values[j] / m : 0.0;
  }
  return CylinderFunction(current.layout_ptr(), std::move(values));
}

double check_isometry(const PathMeasure& pm, const ComplexCylinderFunction& filter, int depth,
                      double tol, int max_level) {
  if (depth < 1 || max_level < 0) {
    throw Error(ErrorCode::kInvalidArgument, "need depth >= 1 and max_level >= 0");
  }
  if (!(filter.shift() == pm.shift())) {
    throw Error(ErrorCode::kInvalidArgument, "filter lives on a different subshift");
  }
  std::vector<double> power(filter.size());
  for (std::size_t i = 0; i < power.size(); ++i) power[i] = std::norm(filter.at(i));
  const CylinderFunction abs2(filter.layout_ptr(), std::move(power));
  const double mismatch = sup_distance(abs2, pm.weight());
  if (mismatch > tol) {
    throw Error(ErrorCode::kFilterMismatch,
                "sup ||m|^2 - V| = " + std::to_string(mismatch) + " exceeds " +
                    std::to_string(tol));
  }

  double worst = 0.0;
  for (int n = 0; n <= max_level; ++n) {
    const int fine = std::max(depth + 1, abs2.depth() + n);
    const auto mu = to_raw(pm.marginal(n), fine);
    const auto target = to_raw(pm.marginal(n), depth);
    std::vector<double> lhs(target.layout().size(), 0.0);
    Word y(static_cast<std::size_t>(fine));
    for (std::size_t i = 0; i < mu.layout().size(); ++i) {
      mu.layout().decode(i, y);
      const std::span<const Symbol> ys(y);
      lhs[target.layout().index_of(ys.subspan(1))] +=
          abs2(ys.subspan(static_cast<std::size_t>(n))) * mu.masses()[i];
    }
    worst = std::max(worst, detail::max_cylinder_deviation(target.layout(),
                                                           diff_of(lhs, target.masses())));
  }
  return worst;
}

}  // namespace ruelle
