#include "alspg/spg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace alspg {

const char* to_string(SpgStatus s) {
  switch (s) {
    case SpgStatus::converged: return "converged";
    case SpgStatus::max_iter: return "max_iter";
    case SpgStatus::line_search_failed: return "line_search_failed";
  }
  return "unknown";
}

LineSearchResult nonmonotone_line_search(const ObjectiveOracle& oracle, const Vector& x,
                                         const Vector& d, double dir_deriv,
                                         const ObjectiveHistory& f_history,
                                         const LineSearchConfig& cfg) {
  if (!(dir_deriv < 0.0)) {
    throw std::invalid_argument("nonmonotone_line_search: not a descent direction (c >= 0)");
  }
  if (f_history.empty()) {
    throw std::invalid_argument("nonmonotone_line_search: empty objective history");
  }
  const double f_x = f_history.current();
  const double f_max = f_history.max();

  LineSearchResult out;
  double alpha = cfg.alpha_init;
  for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
    out.x_next = x + alpha * d;
    out.f_next = oracle.value(out.x_next);
    out.backtracks = bt;
    if (out.f_next <= f_max + alpha * cfg.beta * dir_deriv) {
      out.ok = true;
      out.alpha = alpha;
      return out;
    }
    // Safeguarded quadratic interpolation; fall back to halving when the
    // minimizer leaves the trust window relative to the current step.
    const double denom = out.f_next - f_x - alpha * dir_deriv;
    const double alpha_bar = -0.5 * alpha * alpha * dir_deriv / denom;
    if (std::isfinite(alpha_bar) && alpha_bar >= cfg.interp_lo * alpha &&
        alpha_bar <= cfg.interp_hi * alpha) {
      alpha = alpha_bar;
    } else {
      alpha *= 0.5;
    }
  }
  out.ok = false;
  out.alpha = alpha;
  return out;
}

double spectral_stepsize(const Vector& s, const Vector& y, const SpgConfig& cfg) {
  if (s.size() != y.size()) {
    throw std::invalid_argument("spectral_stepsize: dimension mismatch");
  }
  const double sy = s.dot(y);
  if (!(sy > 0.0)) return cfg.gamma_max;
  const double gamma1 = s.dot(s) / sy;
  const double gamma2 = sy / y.dot(y);
  const double gamma = gamma1 < 2.0 * gamma2 ? gamma2 : gamma1 - 0.5 * gamma2;
  return std::clamp(gamma, cfg.gamma_min, cfg.gamma_max);
}

SpgResult spg_minimize(const ObjectiveOracle& oracle, const ProjectableSet& domain,
                       const Vector& x0, const SpgConfig& cfg) {
  const long n_value0 = oracle.num_value_calls();
  const long n_grad0 = oracle.num_gradient_calls();

  SpgResult res;
  Vector x = domain.project(x0);
  double f_x = oracle.value(x);
  Vector g_x = oracle.gradient(x);
  if (cfg.iterate_callback) cfg.iterate_callback(x);

  double gamma;
  if (cfg.initial_gamma) {
    gamma = std::clamp(*cfg.initial_gamma, cfg.gamma_min, cfg.gamma_max);
  } else {
    // Probe step: one extra gradient buys a curvature estimate at x0.
    const Vector s_bar = -cfg.gamma_small * g_x;
    const Vector y_bar = oracle.gradient(x + s_bar) - g_x;
    gamma = y_bar.isZero(0.0) ? 1.0 : spectral_stepsize(s_bar, y_bar, cfg);
  }

  ObjectiveHistory f_history(cfg.line_search.memory);
  f_history.push(f_x);

  Vector x_best = x;
  double f_best = f_x;

  const auto snapshot = [&](int iter, double station, double alpha, double dderiv) {
    res.history.push_back({iter, f_x, station, gamma, alpha, dderiv,
                           oracle.num_value_calls() - n_value0,
                           oracle.num_gradient_calls() - n_grad0});
  };

  res.status = SpgStatus::max_iter;
  int k = 0;
  for (; k < cfg.max_iter; ++k) {
    const double stationarity = (domain.project(x - g_x) - x).lpNorm<Eigen::Infinity>();
    res.final_stationarity = stationarity;
    if (stationarity <= cfg.tol) {
      res.status = SpgStatus::converged;
      snapshot(k, stationarity, 0.0, 0.0);
      break;
    }

    const Vector d = domain.project(x - gamma * g_x) - x;
    const double dir_deriv = g_x.dot(d);
    if (!(dir_deriv < 0.0)) {
      res.status = SpgStatus::line_search_failed;
      snapshot(k, stationarity, 0.0, dir_deriv);
      break;
    }

    const LineSearchResult ls =
        nonmonotone_line_search(oracle, x, d, dir_deriv, f_history, cfg.line_search);
    if (!ls.ok) {
      res.status = SpgStatus::line_search_failed;
      snapshot(k, stationarity, ls.alpha, dir_deriv);
      break;
    }
    snapshot(k, stationarity, ls.alpha, dir_deriv);

    const Vector s = ls.x_next - x;
    const Vector g_next = oracle.gradient(ls.x_next);
    const Vector y = g_next - g_x;
    gamma = spectral_stepsize(s, y, cfg);

    x = ls.x_next;
    f_x = ls.f_next;
    g_x = g_next;
    f_history.push(f_x);
    if (cfg.iterate_callback) cfg.iterate_callback(x);
    if (f_x < f_best) {
      f_best = f_x;
      x_best = x;
    }
  }

  res.iterations = k;
  if (res.status == SpgStatus::max_iter) {
    res.final_stationarity = (domain.project(x - g_x) - x).lpNorm<Eigen::Infinity>();
    snapshot(k, res.final_stationarity, 0.0, 0.0);
  }

  if (res.status == SpgStatus::line_search_failed && f_best < f_x) {
    res.x_star = x_best;
    res.f_star = f_best;
  } else {
    res.x_star = x;
    res.f_star = f_x;
  }
  res.final_gamma = gamma;
  res.n_value_calls = oracle.num_value_calls() - n_value0;
  res.n_gradient_calls = oracle.num_gradient_calls() - n_grad0;
  return res;
}

void write_history_csv(const std::vector<SpgHistoryRow>& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_history_csv: cannot open " + path);
  out << "iter,f,stationarity,gamma,alpha,n_f,n_grad\n";
  out.precision(17);
  for (const auto& row : history) {
    out << row.iter << ',' << row.f << ',' << row.stationarity << ',' << row.gamma << ','
        << row.alpha << ',' << row.n_value << ',' << row.n_gradient << '\n';
  }
}

}  // namespace alspg
