#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "alspg/sets.hpp"
#include "alspg/types.hpp"

namespace alspg {

/// Smooth objective with analytic gradient. Counts every value/gradient call;
/// a solve owns its oracle copy, so counters are per-solve tallies.
class ObjectiveOracle {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;

  ObjectiveOracle(ValueFn value, GradientFn gradient)
      : value_(std::move(value)), gradient_(std::move(gradient)) {}

  double value(const Vector& x) const {
    ++n_value_;
    return value_(x);
  }

  Vector gradient(const Vector& x) const {
    ++n_gradient_;
    return gradient_(x);
  }

  long num_value_calls() const { return n_value_; }
  long num_gradient_calls() const { return n_gradient_; }

 private:
  ValueFn value_;
  GradientFn gradient_;
  mutable long n_value_ = 0;
  mutable long n_gradient_ = 0;
};

struct LineSearchConfig {
  double beta = 1e-4;      // sufficient-decrease constant
  double alpha_init = 1.0;
  int memory = 10;         // non-monotone window M (M = 1 is monotone Armijo)
  double interp_lo = 0.1;  // accept interpolated step in [lo, hi] * alpha
  double interp_hi = 0.9;
  int max_backtracks = 50;
};

/// Ring buffer of the objective values of accepted iterates; the line search
/// tests decrease against the max of the last `memory` entries.
class ObjectiveHistory {
 public:
  explicit ObjectiveHistory(int memory) : memory_(memory < 1 ? 1 : memory) {}

  void push(double f) {
    values_.push_back(f);
    if (static_cast<int>(values_.size()) > memory_) values_.pop_front();
  }

  double current() const { return values_.back(); }

  double max() const {
    double m = values_.front();
    for (double v : values_) m = std::max(m, v);
    return m;
  }

  bool empty() const { return values_.empty(); }

 private:
  int memory_;
  std::deque<double> values_;
};

struct LineSearchResult {
  bool ok = false;
  double alpha = 0.0;
  Vector x_next;
  double f_next = 0.0;
  int backtracks = 0;
};

/// Backtracking line search accepting f(x + alpha*d) <= f_max + alpha*beta*c,
/// where f_max is the max of the recent accepted objective values and
/// c = grad(x)^T d. Steps shrink by safeguarded quadratic interpolation.
/// Throws std::invalid_argument if d is not a descent direction (c >= 0).
LineSearchResult nonmonotone_line_search(const ObjectiveOracle& oracle, const Vector& x,
                                         const Vector& d, double dir_deriv,
                                         const ObjectiveHistory& f_history,
                                         const LineSearchConfig& cfg);

struct SpgConfig {
  double tol = 1e-5;          // stationarity tolerance (inf-norm)
  int max_iter = 1000;
  double gamma_small = 1e-4;  // probe step for the initial spectral stepsize
  double gamma_min = 1e-10;
  double gamma_max = 1e10;
  LineSearchConfig line_search{};
  std::optional<double> initial_gamma{};  // warm start; skips the probe
  std::function<void(const Vector&)> iterate_callback{};
};

/// Barzilai-Borwein stepsize from a step s and gradient difference y:
/// gamma1 = s.s/s.y, gamma2 = s.y/y.y, taking gamma2 when gamma1 < 2*gamma2
/// and gamma1 - gamma2/2 otherwise, clamped to [gamma_min, gamma_max].
/// Returns gamma_max when s.y <= 0.
double spectral_stepsize(const Vector& s, const Vector& y, const SpgConfig& cfg);

enum class SpgStatus { converged, max_iter, line_search_failed };

const char* to_string(SpgStatus s);

struct SpgHistoryRow {
  int iter = 0;
  double f = 0.0;
  double stationarity = 0.0;
  double gamma = 0.0;
  double alpha = 0.0;      // step taken from this iterate (0 on the final row)
  double dir_deriv = 0.0;  // grad^T d of the step taken
  long n_value = 0;        // cumulative oracle tallies at this row
  long n_gradient = 0;
};

struct SpgResult {
  Vector x_star;
  double f_star = 0.0;
  SpgStatus status = SpgStatus::max_iter;
  int iterations = 0;
  std::vector<SpgHistoryRow> history;
  long n_value_calls = 0;
  long n_gradient_calls = 0;
  long n_jvp_calls = 0;  // unused by SPG; the Riccati baseline reports backward passes here
  double final_gamma = 1.0;
  double final_stationarity = 0.0;
};

/// Projected gradient descent with spectral stepsizes over a projectable
/// domain. The start point is projected onto the domain; iterates remain
/// feasible for convex domains. Stops when the inf-norm of the projected
/// gradient step residual drops below cfg.tol.
SpgResult spg_minimize(const ObjectiveOracle& oracle, const ProjectableSet& domain,
                       const Vector& x0, const SpgConfig& cfg);

/// Writes history as CSV with columns iter,f,stationarity,gamma,alpha,n_f,n_grad.
void write_history_csv(const std::vector<SpgHistoryRow>& history, const std::string& path);

}  // namespace alspg
