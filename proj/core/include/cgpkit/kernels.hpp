#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cgpkit/psd.hpp"

namespace cgpkit {

/// Input locations, one row per point.
using Inputs = Eigen::MatrixXd;

enum class KernelFamily { SquaredExponential, PeriodicPlusSE, SE2DArd };

std::string_view to_string(KernelFamily family);
KernelFamily kernel_family_from_string(std::string_view name);

/// Positive kernel parameters stored as logs, plus the log noise variance.
struct Hyperparams {
  Vector values;
  std::vector<std::string> names;
  double noise_logvar = 0.0;

  /// exp of the named log-parameter.
  double natural(std::string_view name) const;
  double noise_var() const;
};

struct KernelSpec {
  KernelFamily family = KernelFamily::SquaredExponential;
  Hyperparams params;

  Index input_dim() const { return family == KernelFamily::SE2DArd ? 2 : 1; }
  Index param_count() const { return params.values.size(); }
};

/// k = amplitude^2 exp(-(x - x')^2 / lengthscale^2)
KernelSpec make_squared_exponential(double amplitude, double lengthscale,
                                    double noise_var);

/// k = alpha1^2 exp(-2 sin^2(pi |t - t'| / period) / theta1^2)
///   + alpha2^2 exp(-(t - t')^2 / theta2^2)
KernelSpec make_periodic_plus_se(double alpha1, double theta1, double alpha2,
                                 double theta2, double period, double noise_var);

/// k = alpha^2 exp(-(x1 - x1')^2 / theta1^2 - (x2 - x2')^2 / theta2^2)
KernelSpec make_se2d_ard(double alpha, double theta1, double theta2,
                         double noise_var);

/// Natural-space parameter names for a family, in storage order.
const std::vector<std::string>& kernel_param_names(KernelFamily family);

enum class MeanFamily { Zero, Linear };

/// Zero mean or mu(t) = slope * t + intercept on the first input coordinate.
struct MeanSpec {
  MeanFamily family = MeanFamily::Zero;
  double slope = 0.0;
  double intercept = 0.0;

  Index param_count() const { return family == MeanFamily::Linear ? 2 : 0; }
  Vector evaluate(const Inputs& X) const;
};

struct GpModel {
  KernelSpec kernel;
  MeanSpec mean;
};

/// Packed parameter vector: [kernel log-params..., log noise var, slope, intercept].
/// The mean coefficients are present only for a Linear mean and are not logged.
Vector parameters(const GpModel& model);
GpModel with_parameters(GpModel model, const Eigen::Ref<const Vector>& theta);
std::vector<std::string> parameter_names(const GpModel& model);
Index parameter_count(const GpModel& model);
/// Number of leading packed entries that belong to the covariance
/// (kernel params + noise).
Index covariance_parameter_count(const GpModel& model);

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                   const Eigen::Ref<const Eigen::RowVectorXd>& xp);

/// Latent cross-covariance K(X, X'), no noise.
Matrix cross_covariance(const KernelSpec& spec, const Inputs& X, const Inputs& Xp);

/// K(X, X) + noise_var I.
PsdMatrix training_covariance(const KernelSpec& spec, const Inputs& X);

struct GramBlock {
  Vector mean_x;
  Vector mean_xp;
  Matrix cov;
};

GramBlock gram(const KernelSpec& spec, const MeanSpec& mean, const Inputs& X,
               const Inputs& Xp);

/// d K(X, X') / d(log-param), one matrix per kernel parameter followed by the
/// noise entry, which is zero for a cross-covariance.
std::vector<Matrix> kernel_grad(const KernelSpec& spec, const Inputs& X,
                                const Inputs& Xp);

/// Derivatives of the training covariance K(X, X) + noise_var I; the last
/// entry is noise_var * I.
std::vector<Matrix> kernel_grad(const KernelSpec& spec, const Inputs& X);

/// d mu(X) / d(mean coefficient), one vector per mean parameter.
std::vector<Vector> mean_grad(const MeanSpec& mean, const Inputs& X);

void check_input_dim(const KernelSpec& spec, const Inputs& X, std::string_view where);

}  // namespace cgpkit
