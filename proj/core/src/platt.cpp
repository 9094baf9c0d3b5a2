#include <algorithm>
#include <cmath>
#include <string>

#include "osval/error.hpp"
#include "osval/svm.hpp"

namespace osval {

namespace {

constexpr int kMaxNewtonIterations = 100;
constexpr double kMinStep = 1e-10;
constexpr double kHessianRidge = 1e-12;
constexpr double kGradientTol = 1e-5;

// log(1 + exp(a f + b)) minus the target term, evaluated without overflow.
double negative_log_likelihood(std::span<const double> f, std::span<const double> t, double a,
                               double b) {
  double nll = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double z = a * f[i] + b;
    if (z >= 0.0) nll += t[i] * z + std::log1p(std::exp(-z));
    else nll += (t[i] - 1.0) * z + std::log1p(std::exp(z));
  }
  return nll;
}

}  // namespace

double sigmoid_probability(const PlattParams& p, double decision) noexcept {
  const double z = p.a * decision + p.b;
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

// Newton's method with backtracking on Platt's regularized likelihood
// (Lin, Lin & Weng's robust variant).
PlattParams fit_sigmoid(std::span<const double> decisions, std::span<const int> labels) {
  if (decisions.size() != labels.size()) {
    throw Error(Errc::InvalidArgument, "decision and label counts differ");
  }
  double n_pos = 0.0;
  double n_neg = 0.0;
  for (int y : labels) (y > 0 ? n_pos : n_neg) += 1.0;
  if (n_pos == 0.0 || n_neg == 0.0) {
    throw Error(Errc::SingleClass, "platt calibration needs both classes");
  }

  const auto [lo, hi] = std::minmax_element(decisions.begin(), decisions.end());
  if (*hi - *lo <= 1e-12 * std::max(1.0, std::abs(*hi))) {
    return PlattParams{0.0, std::log(n_neg / n_pos), true};
  }

  const double hi_target = (n_pos + 1.0) / (n_pos + 2.0);
  const double lo_target = 1.0 / (n_neg + 2.0);
  std::vector<double> t(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) t[i] = labels[i] > 0 ? hi_target : lo_target;

  double a = 0.0;
  double b = std::log((n_neg + 1.0) / (n_pos + 1.0));
  double fval = negative_log_likelihood(decisions, t, a, b);

  for (int iter = 0; iter < kMaxNewtonIterations; ++iter) {
    double h11 = kHessianRidge;
    double h22 = kHessianRidge;
    double h21 = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
    for (std::size_t i = 0; i < decisions.size(); ++i) {
      const double z = decisions[i] * a + b;
      double p;
      double q;
      if (z >= 0.0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += decisions[i] * decisions[i] * d2;
      h22 += d2;
      h21 += decisions[i] * d2;
      const double d1 = t[i] - p;
      g1 += decisions[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < kGradientTol && std::abs(g2) < kGradientTol) break;

    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;

    double step = 1.0;
    while (step >= kMinStep) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double nf = negative_log_likelihood(decisions, t, na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step *= 0.5;
    }
    if (step < kMinStep) break;  // line search failed; keep the best iterate
  }
  return PlattParams{a, b, false};
}

SvmModel fit_platt(SvmModel model, const TrainingSet& labeled) {
  std::vector<double> f(labeled.size());
  for (std::size_t i = 0; i < labeled.size(); ++i) f[i] = model.decision(labeled.row(i));
  model.platt = fit_sigmoid(f, labeled.y);
  return model;
}

double predict_proba(const SvmModel& model, std::span<const double> x) {
  if (!model.platt) throw Error(Errc::Uncalibrated, "model has no platt sigmoid");
  return sigmoid_probability(*model.platt, model.decision(x));
}

double predict_proba(const SvmModel& model, std::span<const float> x) {
  if (!model.platt) throw Error(Errc::Uncalibrated, "model has no platt sigmoid");
  return sigmoid_probability(*model.platt, model.decision(x));
}

}  // namespace osval
