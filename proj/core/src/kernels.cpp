#include "cgpkit/kernels.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cgpkit/errors.hpp"

namespace cgpkit {

namespace {

constexpr double kPi = std::numbers::pi;

Hyperparams make_params(KernelFamily family, std::initializer_list<double> natural,
                        double noise_var) {
  if (!(noise_var > 0.0) || !std::isfinite(noise_var)) {
    throw InvalidInput("noise variance must be finite and positive");
  }
  Hyperparams p;
  p.names = kernel_param_names(family);
  p.values.resize(static_cast<Index>(natural.size()));
  Index i = 0;
  for (const double v : natural) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidInput("kernel parameter '" + p.names[static_cast<std::size_t>(i)] +
                         "' must be finite and positive");
    }
    p.values[i++] = std::log(v);
  }
  p.noise_logvar = std::log(noise_var);
  return p;
}

// Natural-space parameters unpacked once per Gram evaluation.
struct Natural {
  KernelFamily family;
  double p[5];

  explicit Natural(const KernelSpec& spec) : family(spec.family) {
    if (spec.params.values.size() !=
        static_cast<Index>(kernel_param_names(spec.family).size())) {
      throw DimensionMismatch("kernel has " + std::to_string(spec.params.values.size()) +
                              " parameters, family " + std::string(to_string(spec.family)) +
                              " expects " +
                              std::to_string(kernel_param_names(spec.family).size()));
    }
    for (Index i = 0; i < spec.params.values.size(); ++i) p[i] = std::exp(spec.params.values[i]);
  }

  double value(const double* x, const double* xp, Index x_stride, Index xp_stride) const {
    switch (family) {
      case KernelFamily::SquaredExponential: {
        const double d = x[0] - xp[0];
        return p[0] * p[0] * std::exp(-d * d / (p[1] * p[1]));
      }
      case KernelFamily::PeriodicPlusSE: {
        const double d = x[0] - xp[0];
        const double s = std::sin(kPi * std::abs(d) / p[4]);
        return p[0] * p[0] * std::exp(-2.0 * s * s / (p[1] * p[1])) +
               p[2] * p[2] * std::exp(-d * d / (p[3] * p[3]));
      }
      case KernelFamily::SE2DArd: {
        const double d1 = x[0] - xp[0];
        const double d2 = x[x_stride] - xp[xp_stride];
        return p[0] * p[0] *
               std::exp(-d1 * d1 / (p[1] * p[1]) - d2 * d2 / (p[2] * p[2]));
      }
    }
    return 0.0;
  }

  // Writes d k / d log p_i into out[i].
  void grad(const double* x, const double* xp, Index x_stride, Index xp_stride,
            double* out) const {
    switch (family) {
      case KernelFamily::SquaredExponential: {
        const double d = x[0] - xp[0];
        const double r = d * d / (p[1] * p[1]);
        const double k = p[0] * p[0] * std::exp(-r);
        out[0] = 2.0 * k;
        out[1] = 2.0 * r * k;
        return;
      }
      case KernelFamily::PeriodicPlusSE: {
        const double d = x[0] - xp[0];
        const double a = kPi * std::abs(d) / p[4];
        const double s = std::sin(a);
        const double kp = p[0] * p[0] * std::exp(-2.0 * s * s / (p[1] * p[1]));
        const double r = d * d / (p[3] * p[3]);
        const double ks = p[2] * p[2] * std::exp(-r);
        out[0] = 2.0 * kp;
        out[1] = kp * 4.0 * s * s / (p[1] * p[1]);
        out[2] = 2.0 * ks;
        out[3] = 2.0 * r * ks;
        // d(sin^2 a)/d log T = -a sin(2a)
        out[4] = kp * 2.0 * a * std::sin(2.0 * a) / (p[1] * p[1]);
        return;
      }
      case KernelFamily::SE2DArd: {
        const double d1 = x[0] - xp[0];
        const double d2 = x[x_stride] - xp[xp_stride];
        const double r1 = d1 * d1 / (p[1] * p[1]);
        const double r2 = d2 * d2 / (p[2] * p[2]);
        const double k = p[0] * p[0] * std::exp(-r1 - r2);
        out[0] = 2.0 * k;
        out[1] = 2.0 * r1 * k;
        out[2] = 2.0 * r2 * k;
        return;
      }
    }
  }
};

}  // namespace

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::SquaredExponential: return "SquaredExponential";
    case KernelFamily::PeriodicPlusSE: return "PeriodicPlusSE";
    case KernelFamily::SE2DArd: return "SE2D-ARD";
  }
  return "?";
}

KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "SquaredExponential" || name == "SE") return KernelFamily::SquaredExponential;
  if (name == "PeriodicPlusSE") return KernelFamily::PeriodicPlusSE;
  if (name == "SE2D-ARD" || name == "SE2DArd") return KernelFamily::SE2DArd;
  throw InvalidInput("unknown kernel family '" + std::string(name) + "'");
}

const std::vector<std::string>& kernel_param_names(KernelFamily family) {
  static const std::vector<std::string> se{"amplitude", "lengthscale"};
  static const std::vector<std::string> per{"alpha1", "theta1", "alpha2", "theta2", "period"};
  static const std::vector<std::string> se2{"alpha", "theta1", "theta2"};
  switch (family) {
    case KernelFamily::SquaredExponential: return se;
    case KernelFamily::PeriodicPlusSE: return per;
    case KernelFamily::SE2DArd: return se2;
  }
  return se;
}

double Hyperparams::natural(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return std::exp(values[static_cast<Index>(i)]);
  }
  throw InvalidInput("no hyperparameter named '" + std::string(name) + "'");
}

double Hyperparams::noise_var() const { return std::exp(noise_logvar); }

KernelSpec make_squared_exponential(double amplitude, double lengthscale,
                                    double noise_var) {
  return {KernelFamily::SquaredExponential,
          make_params(KernelFamily::SquaredExponential, {amplitude, lengthscale}, noise_var)};
}

KernelSpec make_periodic_plus_se(double alpha1, double theta1, double alpha2,
                                 double theta2, double period, double noise_var) {
  return {KernelFamily::PeriodicPlusSE,
          make_params(KernelFamily::PeriodicPlusSE, {alpha1, theta1, alpha2, theta2, period},
                      noise_var)};
}

KernelSpec make_se2d_ard(double alpha, double theta1, double theta2, double noise_var) {
  return {KernelFamily::SE2DArd,
          make_params(KernelFamily::SE2DArd, {alpha, theta1, theta2}, noise_var)};
}

Vector MeanSpec::evaluate(const Inputs& X) const {
  if (family == MeanFamily::Zero) return Vector::Zero(X.rows());
  if (X.cols() != 1) {
    throw DimensionMismatch("linear mean is defined for 1-D inputs only");
  }
  return (slope * X.col(0).array() + intercept).matrix();
}

Index covariance_parameter_count(const GpModel& model) {
  return model.kernel.param_count() + 1;
}

Index parameter_count(const GpModel& model) {
  return covariance_parameter_count(model) + model.mean.param_count();
}

Vector parameters(const GpModel& model) {
  Vector theta(parameter_count(model));
  const Index nk = model.kernel.param_count();
  theta.head(nk) = model.kernel.params.values;
  theta[nk] = model.kernel.params.noise_logvar;
  if (model.mean.family == MeanFamily::Linear) {
    theta[nk + 1] = model.mean.slope;
    theta[nk + 2] = model.mean.intercept;
  }
  return theta;
}

GpModel with_parameters(GpModel model, const Eigen::Ref<const Vector>& theta) {
  if (theta.size() != parameter_count(model)) {
    throw DimensionMismatch("parameter vector has " + std::to_string(theta.size()) +
                            " entries, model expects " +
                            std::to_string(parameter_count(model)));
  }
  const Index nk = model.kernel.param_count();
  model.kernel.params.values = theta.head(nk);
  model.kernel.params.noise_logvar = theta[nk];
  if (model.mean.family == MeanFamily::Linear) {
    model.mean.slope = theta[nk + 1];
    model.mean.intercept = theta[nk + 2];
  }
  return model;
}

std::vector<std::string> parameter_names(const GpModel& model) {
  std::vector<std::string> names;
  for (const auto& n : model.kernel.params.names) names.push_back("log_" + n);
  names.emplace_back("log_noise_var");
  if (model.mean.family == MeanFamily::Linear) {
    names.emplace_back("mean_slope");
    names.emplace_back("mean_intercept");
  }
  return names;
}

void check_input_dim(const KernelSpec& spec, const Inputs& X, std::string_view where) {
  if (X.rows() > 0 && X.cols() != spec.input_dim()) {
    throw DimensionMismatch(std::string(where) + ": inputs have " +
                            std::to_string(X.cols()) + " columns, kernel " +
                            std::string(to_string(spec.family)) + " expects " +
                            std::to_string(spec.input_dim()));
  }
}

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                   const Eigen::Ref<const Eigen::RowVectorXd>& xp) {
  if (x.size() != spec.input_dim() || xp.size() != spec.input_dim()) {
    throw DimensionMismatch("kernel_eval: point dimension does not match kernel family " +
                            std::string(to_string(spec.family)));
  }
  const Natural nat(spec);
  return nat.value(x.data(), xp.data(), x.innerStride(), xp.innerStride());
}

Matrix cross_covariance(const KernelSpec& spec, const Inputs& X, const Inputs& Xp) {
  check_input_dim(spec, X, "cross_covariance");
  check_input_dim(spec, Xp, "cross_covariance");
  const Natural nat(spec);
  Matrix K(X.rows(), Xp.rows());
  // Column-major Inputs: coordinate d of row i sits at data()[i + d * rows].
  for (Index j = 0; j < Xp.rows(); ++j) {
    for (Index i = 0; i < X.rows(); ++i) {
      K(i, j) = nat.value(X.data() + i, Xp.data() + j, X.rows(), Xp.rows());
    }
  }
  return K;
}

PsdMatrix training_covariance(const KernelSpec& spec, const Inputs& X) {
  Matrix K = cross_covariance(spec, X, X);
  K.diagonal().array() += spec.params.noise_var();
  return PsdMatrix(std::move(K));
}

GramBlock gram(const KernelSpec& spec, const MeanSpec& mean, const Inputs& X,
               const Inputs& Xp) {
  if (X.rows() == 0 || Xp.rows() == 0) throw InvalidInput("gram: empty point set");
  return {mean.evaluate(X), mean.evaluate(Xp), cross_covariance(spec, X, Xp)};
}

std::vector<Matrix> kernel_grad(const KernelSpec& spec, const Inputs& X, const Inputs& Xp) {
  check_input_dim(spec, X, "kernel_grad");
  check_input_dim(spec, Xp, "kernel_grad");
  const Natural nat(spec);
  const Index np = spec.param_count();
  std::vector<Matrix> out(static_cast<std::size_t>(np) + 1, Matrix::Zero(X.rows(), Xp.rows()));
  double g[5];
  for (Index j = 0; j < Xp.rows(); ++j) {
    for (Index i = 0; i < X.rows(); ++i) {
      nat.grad(X.data() + i, Xp.data() + j, X.rows(), Xp.rows(), g);
      for (Index p = 0; p < np; ++p) out[static_cast<std::size_t>(p)](i, j) = g[p];
    }
  }
  return out;
}

std::vector<Matrix> kernel_grad(const KernelSpec& spec, const Inputs& X) {
  std::vector<Matrix> out = kernel_grad(spec, X, X);
  out.back().diagonal().setConstant(spec.params.noise_var());
  return out;
}

std::vector<Vector> mean_grad(const MeanSpec& mean, const Inputs& X) {
  if (mean.family == MeanFamily::Zero) return {};
  if (X.cols() != 1) throw DimensionMismatch("linear mean is defined for 1-D inputs only");
  return {X.col(0), Vector::Ones(X.rows())};
}

}  // namespace cgpkit
