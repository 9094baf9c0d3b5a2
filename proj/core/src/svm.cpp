#include "osval/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "osval/error.hpp"

namespace osval {

namespace {

// Four partial sums so the loop vectorises without -ffast-math.
template <typename A, typename B>
double squared_distance(const A* a, const B* b, std::size_t n) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    for (std::size_t l = 0; l < 4; ++l) {
      const double d = static_cast<double>(a[k + l]) - static_cast<double>(b[k + l]);
      s[l] += d * d;
    }
  }
  for (; k < n; ++k) {
    const double d = static_cast<double>(a[k]) - static_cast<double>(b[k]);
    s[0] += d * d;
  }
  return (s[0] + s[1]) + (s[2] + s[3]);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

constexpr double kTau = 1e-12;

}  // namespace

double KernelSpec::operator()(std::span<const double> a, std::span<const double> b) const {
  if (kind == KernelKind::Linear) return dot(a, b);
  return std::exp(-gamma * squared_distance(a.data(), b.data(), a.size()));
}

TrainingSet make_training_set(const Dataset& ds, std::span<const SampleId> positives,
                              std::span<const SampleId> negatives) {
  TrainingSet t;
  t.dim = ds.dim();
  t.ids.reserve(positives.size() + negatives.size());
  t.x.reserve((positives.size() + negatives.size()) * t.dim);
  auto append = [&](SampleId id, int label) {
    const auto f = ds.features(id);
    t.ids.push_back(id);
    t.y.push_back(label);
    t.x.insert(t.x.end(), f.begin(), f.end());
  };
  for (SampleId id : positives) append(id, +1);
  for (SampleId id : negatives) append(id, -1);
  return t;
}

double default_gamma(const TrainingSet& data) {
  const std::size_t m = data.x.size();
  if (m == 0 || data.dim == 0) return 1.0;
  double mean = 0.0;
  for (double v : data.x) mean += v;
  mean /= static_cast<double>(m);
  double var = 0.0;
  for (double v : data.x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(m);
  if (!(var > 0.0)) return 1.0;
  return 1.0 / (static_cast<double>(data.dim) * var);
}

double SvmModel::decision(std::span<const double> x) const {
  if (x.size() != dim) {
    throw Error(Errc::DimensionMismatch,
                "input has dimension " + std::to_string(x.size()) + ", model expects " +
                    std::to_string(dim));
  }
  double f = bias;
  for (std::size_t i = 0; i < support_ids.size(); ++i) {
    f += dual_coeffs[i] * kernel(support_vector(i), x);
  }
  return f;
}

double SvmModel::decision(std::span<const float> x) const {
  if (x.size() != dim) {
    throw Error(Errc::DimensionMismatch,
                "input has dimension " + std::to_string(x.size()) + ", model expects " +
                    std::to_string(dim));
  }
  double f = bias;
  if (kernel.kind == KernelKind::Linear) {
    for (std::size_t i = 0; i < support_ids.size(); ++i) {
      const double* sv = support_vectors.data() + i * dim;
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) s += sv[k] * static_cast<double>(x[k]);
      f += dual_coeffs[i] * s;
    }
    return f;
  }
  for (std::size_t i = 0; i < support_ids.size(); ++i) {
    const double* sv = support_vectors.data() + i * dim;
    f += dual_coeffs[i] * std::exp(-kernel.gamma * squared_distance(sv, x.data(), dim));
  }
  return f;
}

SvmModel train(const TrainingSet& data, const SvmConfig& cfg, DualSolution* dual) {
  const std::size_t n = data.size();
  if (!(cfg.c > 0.0) || !(cfg.tol > 0.0) || cfg.max_passes == 0) {
    throw Error(Errc::InvalidArgument, "svm config needs c > 0, tol > 0, max_passes > 0");
  }
  if (cfg.gamma && !(*cfg.gamma > 0.0)) {
    throw Error(Errc::InvalidArgument, "rbf gamma must be positive");
  }
  if (data.x.size() != n * data.dim || data.ids.size() != n || data.dim == 0) {
    throw Error(Errc::DimensionMismatch, "training set shape is inconsistent");
  }
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (data.y[i] == 1) {
      ++n_pos;
    } else if (data.y[i] != -1) {
      throw Error(Errc::InvalidArgument, "label at row " + std::to_string(i) + " is not +1/-1");
    }
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw Error(Errc::SingleClass, "training set has " + std::to_string(n_pos) + " positives and " +
                                       std::to_string(n_neg) + " negatives");
  }
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    if (!std::isfinite(data.x[i])) {
      throw Error(Errc::NonFinite, "non-finite feature in training row " +
                                       std::to_string(i / data.dim));
    }
  }

  KernelSpec kernel{cfg.kernel, 1.0};
  if (cfg.kernel == KernelKind::Rbf) kernel.gamma = cfg.gamma ? *cfg.gamma : default_gamma(data);

  double c_pos = cfg.c;
  double c_neg = cfg.c;
  if (cfg.class_balance) {
    c_pos = cfg.c * static_cast<double>(n) / (2.0 * static_cast<double>(n_pos));
    c_neg = cfg.c * static_cast<double>(n) / (2.0 * static_cast<double>(n_neg));
  }

  // Q_ij = y_i y_j K(x_i, x_j), full matrix.
  std::vector<double> q(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = data.y[i] * data.y[j] * kernel(data.row(i), data.row(j));
      q[i * n + j] = v;
      q[j * n + i] = v;
    }
  }

  std::vector<double> upper(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = data.y[i];
    upper[i] = data.y[i] > 0 ? c_pos : c_neg;
  }
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // G = Q alpha - e

  auto in_up = [&](std::size_t t) {
    return (y[t] > 0 && alpha[t] < upper[t]) || (y[t] < 0 && alpha[t] > 0.0);
  };
  auto in_low = [&](std::size_t t) {
    return (y[t] > 0 && alpha[t] > 0.0) || (y[t] < 0 && alpha[t] < upper[t]);
  };

  const std::size_t max_iter = cfg.max_passes * n;
  TrainStats stats;
  for (;;) {
    // Maximal violating pair: i maximizes -y G over I_up, j minimizes over I_low.
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    std::size_t i = n;
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > g_max) {
        g_max = v;
        i = t;
      }
      if (in_low(t) && v < g_min) {
        g_min = v;
        j = t;
      }
    }
    stats.max_violation = (i < n && j < n) ? g_max - g_min : 0.0;
    if (i == n || j == n || stats.max_violation < cfg.tol) {
      stats.converged = true;
      break;
    }
    if (stats.iterations >= max_iter) break;
    ++stats.iterations;

    const double* qi = &q[i * n];
    const double* qj = &q[j * n];
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    const double ci = upper[i];
    const double cj = upper[j];

    if (y[i] != y[j]) {
      double quad = qi[i] + qj[j] + 2.0 * qi[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > ci - cj) {
        if (alpha[i] > ci) {
          alpha[i] = ci;
          alpha[j] = ci - diff;
        }
      } else if (alpha[j] > cj) {
        alpha[j] = cj;
        alpha[i] = cj + diff;
      }
    } else {
      double quad = qi[i] + qj[j] - 2.0 * qi[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > ci) {
        if (alpha[i] > ci) {
          alpha[i] = ci;
          alpha[j] = sum - ci;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > cj) {
        if (alpha[j] > cj) {
          alpha[j] = cj;
          alpha[i] = sum - cj;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double dai = alpha[i] - old_ai;
    const double daj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) grad[t] += qi[t] * dai + qj[t] * daj;
  }

  // Bias from free multipliers, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= upper[t]) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);

  double quad_term = 0.0;
  double linear_term = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    quad_term += alpha[t] * (grad[t] + 1.0);
    linear_term += alpha[t];
  }
  stats.dual_objective = linear_term - 0.5 * quad_term;

  SvmModel model;
  model.kernel = kernel;
  model.dim = data.dim;
  model.bias = -rho;
  model.c_pos = c_pos;
  model.c_neg = c_neg;
  model.stats = stats;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      model.support_ids.push_back(data.ids[t]);
      model.dual_coeffs.push_back(alpha[t] * y[t]);
      const auto r = data.row(t);
      model.support_vectors.insert(model.support_vectors.end(), r.begin(), r.end());
    }
  }
  if (dual != nullptr) {
    dual->alpha = std::move(alpha);
    dual->upper = std::move(upper);
    dual->bias = model.bias;
  }
  return model;
}

}  // namespace osval
