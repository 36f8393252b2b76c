#include "alspg/alspg.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace alspg {

namespace {

Vector shifted_argument(const Vector& gx, const ConstraintBlock& b) {
  if (b.rho <= 0.0) throw std::invalid_argument("ConstraintBlock: rho must be positive");
  if (b.lambda.size() == 0) return gx;
  if (b.lambda.size() != gx.size()) {
    throw std::invalid_argument("ConstraintBlock: lambda dimension differs from g(x)");
  }
  return gx + b.lambda / b.rho;
}

double aux_V(const Vector& gx, const Vector& lambda, double rho, const ProjectableSet& set) {
  const Vector z = lambda.size() ? Vector(gx + lambda / rho) : gx;
  return (gx - set.project(z)).norm();
}

}  // namespace

const char* to_string(AlspgStatus s) {
  switch (s) {
    case AlspgStatus::converged: return "converged";
    case AlspgStatus::max_outer: return "max_outer";
    case AlspgStatus::inner_failed: return "inner_failed";
  }
  return "unknown";
}

double al_value(const Vector& x, const std::vector<ConstraintBlock>& blocks,
                const ObjectiveOracle& f) {
  double v = f.value(x);
  for (const auto& b : blocks) {
    const Vector z = shifted_argument(b.eval_g(x), b);
    const Vector r = z - b.set->project(z);
    v += 0.5 * b.rho * r.squaredNorm();
  }
  return v;
}

Vector al_gradient(const Vector& x, const std::vector<ConstraintBlock>& blocks,
                   const ObjectiveOracle& f) {
  Vector grad = f.gradient(x);
  for (const auto& b : blocks) {
    const Vector z = shifted_argument(b.eval_g(x), b);
    const Vector r = z - b.set->project(z);
    grad += b.rho * b.eval_jvp_t(x, r);
  }
  return grad;
}

double constraint_auxiliary(const Vector& gx, const ConstraintBlock& block) {
  return aux_V(gx, block.lambda, block.rho, *block.set);
}

AlspgResult alspg_solve(const ObjectiveOracle& f, const ProjectableSet& domain,
                        std::vector<ConstraintBlock> blocks, const Vector& x0,
                        const AlspgConfig& cfg) {
  const long nf0 = f.num_value_calls();
  const long ng0 = f.num_gradient_calls();
  for (auto& b : blocks) {
    if (b.rho <= 0.0) b.rho = cfg.rho0;
    b.n_g_calls = 0;
    b.n_jvp_calls = 0;
  }

  AlspgResult res;
  Vector x = domain.project(x0);

  const size_t p = blocks.size();
  std::vector<Vector> g_prev(p);
  for (size_t i = 0; i < p; ++i) {
    g_prev[i] = blocks[i].eval_g(x);
    if (blocks[i].lambda.size() == 0) blocks[i].lambda = Vector::Zero(g_prev[i].size());
  }

  const auto jvp_total = [&] {
    long n = 0;
    for (const auto& b : blocks) n += b.n_jvp_calls;
    return n;
  };

  double inner_tol =
      cfg.inner_tol_schedule ? std::max(cfg.inner_tol_start, cfg.inner.tol) : cfg.inner.tol;
  std::optional<double> warm_gamma = cfg.inner.initial_gamma;

  bool terminated = false;
  int outer = 0;
  for (; outer < cfg.max_outer && !terminated; ++outer) {
    // Reference value of V at the incoming iterate, used by the penalty rule.
    std::vector<double> V_ref(p);
    for (size_t i = 0; i < p; ++i) V_ref[i] = constraint_auxiliary(g_prev[i], blocks[i]);

    ObjectiveOracle inner_oracle([&](const Vector& z) { return al_value(z, blocks, f); },
                                 [&](const Vector& z) { return al_gradient(z, blocks, f); });
    SpgConfig icfg = cfg.inner;
    icfg.tol = inner_tol;
    icfg.initial_gamma = warm_gamma;

    const long nf_before = f.num_value_calls() - nf0;
    const long ng_before = f.num_gradient_calls() - ng0;
    const SpgResult sub = spg_minimize(inner_oracle, domain, x, icfg);
    x = sub.x_star;
    warm_gamma = sub.final_gamma;
    res.final_gamma = sub.final_gamma;
    res.last_inner_status = sub.status;
    res.total_inner_iterations += sub.iterations;

    const int iter_offset =
        res.inner_history.empty() ? 0 : res.inner_history.back().iter + 1;
    for (SpgHistoryRow row : sub.history) {
      row.iter += iter_offset;
      row.n_value += nf_before;
      row.n_gradient += ng_before;
      res.inner_history.push_back(row);
    }

    AlspgOuterRow trace;
    trace.outer = outer;
    trace.inner_iterations = sub.iterations;
    trace.inner_status = sub.status;

    double max_V = 0.0;
    for (size_t i = 0; i < p; ++i) {
      auto& b = blocks[i];
      const Vector gx = b.eval_g(x);
      const Vector z = shifted_argument(gx, b);
      const Vector r = z - b.set->project(z);
      Vector lambda_new = b.rho * r;
      lambda_new = lambda_new.cwiseMax(-cfg.lambda_clip).cwiseMin(cfg.lambda_clip);
      const double V_new = aux_V(gx, lambda_new, b.rho, *b.set);

      trace.block_V.push_back(V_new);
      trace.block_lambda_norm.push_back(lambda_new.norm());
      if (V_new > cfg.sufficient_decrease * V_ref[i]) b.rho *= cfg.penalty_growth;
      trace.block_rho.push_back(b.rho);

      b.lambda = std::move(lambda_new);
      g_prev[i] = gx;
      max_V = std::max(max_V, V_new);
    }

    trace.max_V = max_V;
    trace.n_value = f.num_value_calls() - nf0;
    trace.n_gradient = f.num_gradient_calls() - ng0;
    trace.n_jvp = jvp_total();
    res.outer_trace.push_back(trace);
    res.max_V = max_V;

    if (cfg.inner_tol_schedule) {
      inner_tol = std::max(inner_tol * cfg.inner_tol_shrink, cfg.inner.tol);
    }
    if (max_V < cfg.outer_tol) terminated = true;
  }

  res.outer_iterations = outer;
  if (terminated) {
    res.status = res.last_inner_status == SpgStatus::converged ? AlspgStatus::converged
                                                               : AlspgStatus::inner_failed;
  } else {
    res.status = AlspgStatus::max_outer;
  }

  res.x_star = x;
  res.f_star = f.value(x);
  res.blocks.reserve(p);
  for (size_t i = 0; i < p; ++i) {
    res.blocks.push_back({blocks[i].name, blocks[i].lambda, blocks[i].rho,
                          res.outer_trace.empty() ? 0.0 : res.outer_trace.back().block_V[i]});
  }
  res.n_value_calls = f.num_value_calls() - nf0;
  res.n_gradient_calls = f.num_gradient_calls() - ng0;
  res.n_jvp_calls = jvp_total();
  return res;
}

void write_outer_trace_csv(const std::vector<AlspgOuterRow>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_outer_trace_csv: cannot open " + path);
  const size_t p = trace.empty() ? 0 : trace.front().block_V.size();
  out << "outer,max_V,inner_iters,inner_status,n_f,n_grad,n_jvp";
  for (size_t i = 0; i < p; ++i) {
    out << ",V_" << i << ",rho_" << i << ",lambda_norm_" << i;
  }
  out << '\n';
  out.precision(17);
  for (const auto& row : trace) {
    out << row.outer << ',' << row.max_V << ',' << row.inner_iterations << ','
        << to_string(row.inner_status) << ',' << row.n_value << ',' << row.n_gradient << ','
        << row.n_jvp;
    for (size_t i = 0; i < p; ++i) {
      out << ',' << row.block_V[i] << ',' << row.block_rho[i] << ','
          << row.block_lambda_norm[i];
    }
    out << '\n';
  }
}

}  // namespace alspg
