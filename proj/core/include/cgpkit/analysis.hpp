#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cgpkit/gp.hpp"

namespace cgpkit {

/// Monte-Carlo mean with its standard error.
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t draws = 0;

  /// |mean - target| <= k * std_error (or exact equality when std_error is 0).
  bool within(double target, double k = 3.0) const;
};

/// I(z; y) = 1/2 (logdet S_z - logdet S_{z|y}) in nats, clamped at 0 for
/// values in (-1e-10, 0). S_z is the prior over test_X with the same jitter
/// treatment CgpState applies. Empty train_X gives 0.
double mutual_information(const GpModel& model, const Inputs& train_X, const Inputs& test_X);

/// Gaussian-case MSE bound prior_var * exp(-2 mi).
double mse_lower_bound(double prior_var, double mi);

struct ExcessMseReport {
  double closed_form = 0.0;
  std::optional<McEstimate> monte_carlo;
  Vector alpha1;
  Vector alpha2;
  /// Inverse of the joint data covariance, assembled from its 2x2 blocks.
  Matrix gp_coeffs;
  /// [A' B'; C' D'] for the two-segment composite predictor.
  Matrix cgp_coeffs;
  double prior_var = 0.0;
  double posterior_var = 0.0;
  double posterior_var_seg1 = 0.0;
};

/// Closed-form data-averaged squared gap between exact-GP and two-segment
/// CGP posterior means at a single test point, for a zero-mean model.
ExcessMseReport excess_mse_closed_form(const GpModel& model, const Inputs& seg1_X,
                                       const Inputs& seg2_X, const Inputs& test_x);

/// Point predictor used by the Monte-Carlo comparison in place of the CGP.
using PointPredictor = std::function<double(const GpModel&, std::span<const DataSegment>,
                                            const Inputs& test_x)>;

struct ExcessMseMc {
  /// E[(mu_GP - mu_CGP)^2]
  McEstimate excess;
  /// E[(z - mu_CGP)^2]
  McEstimate cgp_mse;
  /// E[(z - mu_GP)^2]
  McEstimate gp_mse;
  /// Per-draw (z - mu_CGP)^2 - (mu_GP - mu_CGP)^2; its mean is the exact
  /// posterior variance when the MSE decomposition holds.
  McEstimate decomposition;
  double gp_posterior_var = 0.0;
};

/// Simulates joint (z, y) draws, splits y by segment, and compares the exact
/// GP mean with the composite mean (or `alternative` when given). Draws are
/// generated in fixed chunks keyed by (seed, chunk), so the result does not
/// depend on the worker count. Requires n_draws >= 1000.
ExcessMseMc excess_mse_monte_carlo(const GpModel& model, std::span<const Inputs> segments_X,
                                   const Inputs& test_x, std::size_t n_draws,
                                   std::uint64_t seed, const PointPredictor& alternative = {});

enum class Verdict { Redundant, Synergistic, Balanced };

std::string_view to_string(Verdict v);

struct InfoReport {
  double mi_full = 0.0;
  std::vector<double> mi_segments;
  /// mi_full - sum(mi_segments)
  double gap = 0.0;
  Verdict verdict = Verdict::Balanced;
};

inline constexpr double kInfoGapTolerance = 1e-9;

/// Needs at least two segments.
InfoReport info_gap(const GpModel& model, std::span<const Inputs> segments_X,
                    const Inputs& test_X);

/// KL(q || p) between two Gaussians of equal dimension.
double gaussian_kld(const GaussianBelief& q, const GaussianBelief& p);

struct KldCheck {
  McEstimate sampled;
  double analytic = 0.0;
};

/// Sampled E_y[KL(p(z|y) || p(z))] for the exact GP against I(z; y).
KldCheck kld_identity_check(const GpModel& model, const Inputs& train_X, const Inputs& test_X,
                            std::size_t n_draws, std::uint64_t seed);

/// Sampled E_y[KL(p_CGP(z|y_1:K) || p(z))], y drawn from the full GP model,
/// against sum_k I(z; y_k).
KldCheck cgp_kld_check(const GpModel& model, std::span<const Inputs> segments_X,
                       const Inputs& test_X, std::size_t n_draws, std::uint64_t seed);

/// Row-wise concatenation.
Inputs stack_inputs(std::span<const Inputs> blocks);

}  // namespace cgpkit
