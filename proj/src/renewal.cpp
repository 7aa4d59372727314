#include "walklab/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <boost/math/special_functions/gamma.hpp>

namespace walklab::renewal {

namespace {

// Per-block sufficient statistics: visit counts per grid point (suffix
// histogram), their squares, late-step counts for the truncation bound,
// and the censoring tally. Merging is elementwise addition.
struct TableAcc {
  std::vector<double> sum;
  std::vector<double> sum_sq;
  std::vector<double> late_sum;
  uint64_t censored = 0;
  uint64_t replicas = 0;

  void init(size_t m) {
    sum.assign(m, 0.0);
    sum_sq.assign(m, 0.0);
    late_sum.assign(m, 0.0);
  }

  void merge(const TableAcc& o) {
    if (sum.empty()) {
      *this = o;
      return;
    }
    if (o.sum.empty()) return;
    for (size_t i = 0; i < sum.size(); ++i) {
      sum[i] += o.sum[i];
      sum_sq[i] += o.sum_sq[i];
      late_sum[i] += o.late_sum[i];
    }
    censored += o.censored;
    replicas += o.replicas;
  }
};

struct KernelSpec {
  Which which;
  const walk::IncrementModel* model;
  const std::vector<double>* grid;  // magnitudes, increasing
  uint64_t n_max;
  rng::StreamFamily streams;
};

// One stopped path. For U the walk runs until its first nonnegative point,
// and a step S_k in [-x, 0) contributes to every grid x' >= x; the grid is
// filled as a first-index histogram and suffix-summed per replica, keeping
// the per-step cost at one binary search.
void run_replica(const KernelSpec& k, uint64_t r, TableAcc& acc,
                 std::vector<uint64_t>& hist, std::vector<uint64_t>& late) {
  const auto& grid = *k.grid;
  const size_t m = grid.size();
  std::fill(hist.begin(), hist.end(), 0);
  std::fill(late.begin(), late.end(), 0);
  rng::RandomStream stream = k.streams.replica(r);
  walk::PathTracker path;
  const uint64_t late_from = k.n_max / 10;  // last decade, log scale
  bool censored = true;
  for (uint64_t step = 1; step <= k.n_max; ++step) {
    path.step(k.model->sample(stream));
    const double s = path.sum();
    const bool exited = k.which == Which::U ? (s >= 0.0) : (s < 0.0);
    if (exited) {
      censored = false;
      break;
    }
    size_t idx = m;
    switch (k.which) {
      case Which::U:
        idx = std::lower_bound(grid.begin(), grid.end(), -s) - grid.begin();
        break;
      case Which::V:
        idx = std::upper_bound(grid.begin(), grid.end(), s) - grid.begin();
        break;
      case Which::V0:
        idx = std::lower_bound(grid.begin(), grid.end(), s) - grid.begin();
        break;
    }
    if (idx < m) {
      ++hist[idx];
      if (step > late_from) ++late[idx];
    }
  }
  uint64_t run = 0, run_late = 0;
  for (size_t i = 0; i < m; ++i) {
    run += hist[i];
    run_late += late[i];
    const double c = static_cast<double>(run);
    acc.sum[i] += c;
    acc.sum_sq[i] += c * c;
    acc.late_sum[i] += static_cast<double>(run_late);
  }
  if (censored) ++acc.censored;
  ++acc.replicas;
}

void fit_tail(RenewalTable& t) {
  const double top = t.grid.back();
  if (!(top > 0.0)) return;
  const double lo = top / 10.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  double max_rel_se = 0.0;
  for (size_t i = 0; i < t.grid.size(); ++i) {
    if (t.grid[i] < lo || !(t.values[i] > 0.0)) continue;
    const double x = std::log(t.grid[i]);
    const double y = std::log(t.values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
    max_rel_se = std::max(max_rel_se, t.stderrs[i] / t.values[i]);
  }
  if (n < 4) return;
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return;
  t.tail.exponent = (n * sxy - sx * sy) / denom;
  t.tail.coef = std::exp((sy - t.tail.exponent * sx) / n);
  t.tail.max_rel_stderr = max_rel_se;
  t.tail.expected_index =
      t.which == Which::U ? t.alpha * t.rho : t.alpha * (1.0 - t.rho);
  t.tail.valid = std::fabs(t.tail.exponent - t.tail.expected_index) <= 0.15;
}

// Pool-adjacent-violators, equal weights; raw values kept separately.
std::vector<double> isotonic(const std::vector<double>& raw) {
  std::vector<double> level;
  std::vector<double> count;
  for (double v : raw) {
    level.push_back(v);
    count.push_back(1.0);
    while (level.size() > 1 && level[level.size() - 2] > level.back()) {
      const double c = count.back() + count[count.size() - 2];
      const double merged = (level.back() * count.back() +
                             level[level.size() - 2] * count[count.size() - 2]) / c;
      level.pop_back();
      count.pop_back();
      level.back() = merged;
      count.back() = c;
    }
  }
  std::vector<double> out;
  out.reserve(raw.size());
  for (size_t i = 0; i < level.size(); ++i)
    out.insert(out.end(), static_cast<size_t>(count[i]), level[i]);
  return out;
}

RenewalTable estimate_impl(Which which, const walk::IncrementModel& model,
                           std::vector<double> grid, uint64_t replicas,
                           uint64_t n_max, const rng::StreamFamily& streams,
                           const par::ExecPolicy& exec, bool enforce_bias_gate) {
  if (replicas == 0) throw std::invalid_argument("renewal: replicas must be >= 1");
  if (n_max < 100) throw std::invalid_argument("renewal: n_max too small");
  if (grid.empty() || grid.front() < 0.0 ||
      !std::is_sorted(grid.begin(), grid.end()) ||
      std::adjacent_find(grid.begin(), grid.end()) != grid.end())
    throw std::invalid_argument("renewal: grid must be sorted, distinct, nonnegative");

  KernelSpec spec{which, &model, &grid, n_max, streams};
  struct BlockAcc {
    TableAcc acc;
    std::vector<uint64_t> hist, late;  // per-block scratch
    void merge(const BlockAcc& o) { acc.merge(o.acc); }
  };
  // kernel closure: scratch vectors live in the block accumulator.
  auto kernel = [&spec, m = grid.size()](uint64_t r, BlockAcc& b) {
    if (b.acc.sum.empty()) {
      b.acc.init(m);
      b.hist.assign(m, 0);
      b.late.assign(m, 0);
    }
    run_replica(spec, r, b.acc, b.hist, b.late);
  };
  BlockAcc total = par::replica_reduce<BlockAcc>(replicas, kernel, exec);
  const TableAcc& acc = total.acc;

  RenewalTable t;
  t.which = which;
  t.alpha = model.attraction().alpha;
  t.rho = model.rho();
  t.grid = std::move(grid);
  t.replicas = replicas;
  t.n_max = n_max;
  t.censor_frac = static_cast<double>(acc.censored) / static_cast<double>(replicas);
  const double R = static_cast<double>(replicas);
  const size_t m = t.grid.size();
  t.raw_values.resize(m);
  t.stderrs.resize(m);
  t.trunc_bound.resize(m);
  // Residual past n_max: per-step contributions decay like n^{-(1+1/alpha)},
  // so the tail sum is the last-decade accrual divided by 10^{1/alpha} - 1.
  const double decade_factor = std::pow(10.0, 1.0 / t.alpha) - 1.0;
  for (size_t i = 0; i < m; ++i) {
    const double mean = acc.sum[i] / R;
    t.raw_values[i] = 1.0 + mean;
    const double var =
        replicas > 1
            ? std::max(0.0, (acc.sum_sq[i] - R * mean * mean) / (R - 1.0))
            : 0.0;
    t.stderrs[i] = std::sqrt(var / R);
    t.trunc_bound[i] = acc.late_sum[i] / R / decade_factor;
  }
  t.values = isotonic(t.raw_values);
  fit_tail(t);

  if (enforce_bias_gate) {
    for (size_t i = 0; i < m; ++i) {
      if (t.trunc_bound[i] > t.stderrs[i] && t.trunc_bound[i] > 1e-12) {
        throw table_error(
            which_name(which) + "-table censoring bias bound " +
            std::to_string(t.trunc_bound[i]) + " exceeds stderr " +
            std::to_string(t.stderrs[i]) + " at grid point " +
            std::to_string(t.grid[i]) + "; raise n_max");
      }
    }
  }
  return t;
}

std::vector<double> negate_and_check(const std::vector<double>& grid_negatives,
                                     const char* who) {
  std::vector<double> mag;
  mag.reserve(grid_negatives.size());
  for (double x : grid_negatives) {
    if (x > 0.0)
      throw std::invalid_argument(std::string(who) + ": arguments must be <= 0");
    mag.push_back(-x);
  }
  return mag;
}

}  // namespace

std::string which_name(Which w) {
  switch (w) {
    case Which::U: return "U";
    case Which::V: return "V";
    case Which::V0: return "V0";
  }
  return "?";
}

RenewalTable estimate_U(const walk::IncrementModel& model,
                        const std::vector<double>& grid, uint64_t replicas,
                        uint64_t n_max, const rng::StreamFamily& streams,
                        const par::ExecPolicy& exec, bool enforce_bias_gate) {
  return estimate_impl(Which::U, model, grid, replicas, n_max, streams, exec,
                       enforce_bias_gate);
}

RenewalTable estimate_V(const walk::IncrementModel& model,
                        const std::vector<double>& grid_negatives,
                        uint64_t replicas, uint64_t n_max,
                        const rng::StreamFamily& streams,
                        const par::ExecPolicy& exec, bool enforce_bias_gate) {
  return estimate_impl(Which::V, model, negate_and_check(grid_negatives, "estimate_V"),
                       replicas, n_max, streams, exec, enforce_bias_gate);
}

RenewalTable estimate_V0(const walk::IncrementModel& model,
                         const std::vector<double>& grid_negatives,
                         uint64_t replicas, uint64_t n_max,
                         const rng::StreamFamily& streams,
                         const par::ExecPolicy& exec, bool enforce_bias_gate) {
  return estimate_impl(Which::V0, model,
                       negate_and_check(grid_negatives, "estimate_V0"), replicas,
                       n_max, streams, exec, enforce_bias_gate);
}

double RenewalTable::value_at(double u) const {
  if (u < 0.0) throw table_error("value_at: negative argument magnitude");
  if (u <= grid.front()) return values.front();
  if (u <= grid.back()) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), u);
    const size_t j = it - grid.begin();
    const double x0 = grid[j - 1], x1 = grid[j];
    const double t = (u - x0) / (x1 - x0);
    return values[j - 1] + t * (values[j] - values[j - 1]);
  }
  if (!tail.valid)
    throw table_error(which_name(which) +
                      "-table queried beyond grid without a usable tail fit");
  return tail.coef * std::pow(u, tail.exponent);
}

double RenewalTable::stderr_at(double u) const {
  if (u <= grid.front()) return stderrs.front();
  if (u <= grid.back()) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), u);
    const size_t j = it - grid.begin();
    const double x0 = grid[j - 1], x1 = grid[j];
    const double t = (u - x0) / (x1 - x0);
    return stderrs[j - 1] + t * (stderrs[j] - stderrs[j - 1]);
  }
  return stderrs.back() * (tail.valid ? value_at(u) / values.back() : 1.0);
}

void RenewalTable::write_csv(std::ostream& os) const {
  os << "which,x,value,stderr,replicas,n_max,censor_frac,tail_exp,tail_coef\n";
  char buf[512];
  for (size_t i = 0; i < grid.size(); ++i) {
    std::snprintf(buf, sizeof buf,
                  "%s,%.17g,%.17g,%.17g,%llu,%llu,%.17g,%.17g,%.17g\n",
                  which_name(which).c_str(), grid[i], values[i], stderrs[i],
                  static_cast<unsigned long long>(replicas),
                  static_cast<unsigned long long>(n_max), censor_frac,
                  tail.valid ? tail.exponent : 0.0,
                  tail.valid ? tail.coef : 0.0);
    os << buf;
  }
}

namespace {

// Closed forms over one linear segment v(z) = c0 + c1 z.
double segment_unit(double c0, double c1, double a, double b) {
  return c0 * (b - a) + 0.5 * c1 * (b * b - a * a);
}

double segment_exp(double c0, double c1, double theta, double a, double b) {
  auto prim = [&](double z) {
    return -std::exp(-theta * z) * ((c0 + c1 * z) / theta + c1 / (theta * theta));
  };
  return prim(b) - prim(a);
}

double upper_gamma(double s, double x) { return boost::math::tgamma(s, x); }

double quad_over_grid(const std::vector<double>& grid,
                      const std::vector<double>& vals, const Weight& w,
                      double upper) {
  double acc = 0.0;
  for (size_t j = 1; j < grid.size(); ++j) {
    const double a = grid[j - 1];
    if (a >= upper) break;
    const double b = std::min(grid[j], upper);
    const double slope = (vals[j] - vals[j - 1]) / (grid[j] - grid[j - 1]);
    const double c0 = vals[j - 1] - slope * a;
    acc += w.kind == Weight::Kind::unit ? segment_unit(c0, slope, a, b)
                                        : segment_exp(c0, slope, w.theta, a, b);
  }
  return acc;
}

}  // namespace

IntegralResult integral_against_table(const RenewalTable& table,
                                      const Weight& weight, double upper) {
  const bool infinite = std::isinf(upper);
  if (!(upper > 0.0)) throw table_error("integral upper limit must be > 0");
  if (infinite && weight.kind != Weight::Kind::exp_decay)
    throw table_error("unit-weight integral needs a finite upper limit");

  size_t below = 0;
  for (double g : table.grid)
    if (g < upper) ++below;
  if (below < 4) throw table_error("table too coarse below the upper limit");

  IntegralResult out;
  out.value = quad_over_grid(table.grid, table.values, weight, upper);
  out.err = quad_over_grid(table.grid, table.stderrs, weight, upper);

  if (upper > table.grid.back()) {
    if (!table.tail.valid)
      throw table_error(which_name(table.which) +
                        "-table tail fit unavailable for integral beyond grid");
    const double xm = table.grid.back();
    const double k = table.tail.exponent;
    const double A = table.tail.coef;
    double tail_val = 0.0;
    if (weight.kind == Weight::Kind::unit) {
      tail_val = A * (std::pow(upper, k + 1.0) - std::pow(xm, k + 1.0)) / (k + 1.0);
    } else {
      const double th = weight.theta;
      double g = upper_gamma(k + 1.0, th * xm);
      if (!infinite) g -= upper_gamma(k + 1.0, th * upper);
      tail_val = A * std::pow(th, -(k + 1.0)) * g;
    }
    out.value += tail_val;
    out.err += std::fabs(tail_val) * table.tail.max_rel_stderr;
  }
  return out;
}

}  // namespace walklab::renewal
