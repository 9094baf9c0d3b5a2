#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "osval/dataset.hpp"

namespace osval {

enum class KernelKind : std::uint8_t { Linear, Rbf };

struct KernelSpec {
  KernelKind kind = KernelKind::Rbf;
  double gamma = 1.0;  // used only by Rbf; must be > 0

  double operator()(std::span<const double> a, std::span<const double> b) const;
};

struct SvmConfig {
  double c = 1000.0;
  KernelKind kernel = KernelKind::Rbf;
  // Rbf width. When unset, 1 / (dim * var) over every feature value of the
  // training set.
  std::optional<double> gamma;
  // Per-class penalty C_y = C * n / (2 * n_y).
  bool class_balance = true;
  // Stop once the maximal KKT violation m(a) - M(a) drops below tol.
  double tol = 1e-3;
  // Iteration cap is max_passes * n pair updates.
  std::size_t max_passes = 100000;
};

// Labeled training data, dense row-major doubles. Labels are +1 (target
// user's genuine) or -1 (random forgery).
struct TrainingSet {
  std::vector<SampleId> ids;
  std::vector<double> x;
  std::vector<int> y;
  std::size_t dim = 0;

  std::size_t size() const noexcept { return y.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(x).subspan(i * dim, dim);
  }
};

TrainingSet make_training_set(const Dataset& ds, std::span<const SampleId> positives,
                              std::span<const SampleId> negatives);

// Sigmoid P(y = +1 | f) = 1 / (1 + exp(a * f + b)).
struct PlattParams {
  double a = 0.0;
  double b = 0.0;
  // Set when every decision value was equal; a = 0 and b reproduces the
  // class prior.
  bool degenerate = false;
};

struct TrainStats {
  std::size_t iterations = 0;
  bool converged = false;
  double max_violation = 0.0;
  double dual_objective = 0.0;  // sum(alpha) - 1/2 alpha' Q alpha
};

struct SvmModel {
  std::vector<SampleId> support_ids;
  std::vector<double> support_vectors;  // row-major, support_ids.size() x dim
  std::vector<double> dual_coeffs;      // alpha_i * y_i
  double bias = 0.0;
  KernelSpec kernel;
  std::size_t dim = 0;
  double c_pos = 0.0;  // effective penalty of the +1 class
  double c_neg = 0.0;
  std::optional<PlattParams> platt;
  TrainStats stats;

  std::size_t n_support() const noexcept { return support_ids.size(); }
  std::span<const double> support_vector(std::size_t i) const {
    return std::span<const double>(support_vectors).subspan(i * dim, dim);
  }

  // f(x) = sum_i dual_coeff_i * K(sv_i, x) + bias. Throws DimensionMismatch.
  double decision(std::span<const double> x) const;
  double decision(std::span<const float> x) const;
  double decision(const Dataset& ds, SampleId id) const { return decision(ds.features(id)); }
};

// Full dual solution, including zero multipliers, for diagnostics and tests.
struct DualSolution {
  std::vector<double> alpha;
  std::vector<double> upper;  // C_i per sample
  double bias = 0.0;
};

// Gamma rule used when SvmConfig::gamma is unset.
double default_gamma(const TrainingSet& data);

// Soft-margin C-SVM by SMO with maximal-violating-pair working-set selection.
// Throws SingleClass, NonFinite, InvalidArgument.
SvmModel train(const TrainingSet& data, const SvmConfig& cfg, DualSolution* dual = nullptr);

// Platt sigmoid fitted on the model's decision values over `labeled`, with
// smoothed targets (N+ + 1)/(N+ + 2) and 1/(N- + 2). Throws SingleClass.
SvmModel fit_platt(SvmModel model, const TrainingSet& labeled);
PlattParams fit_sigmoid(std::span<const double> decisions, std::span<const int> labels);

// Probability of the positive class. Throws Uncalibrated.
double predict_proba(const SvmModel& model, std::span<const double> x);
double predict_proba(const SvmModel& model, std::span<const float> x);
double sigmoid_probability(const PlattParams& p, double decision) noexcept;

}  // namespace osval
