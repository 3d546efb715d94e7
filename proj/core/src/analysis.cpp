#include "cgpkit/analysis.hpp"

#include <array>
#include <cmath>
#include <string>

#include "cgpkit/cgp.hpp"
#include "cgpkit/errors.hpp"
#include "cgpkit/parallel.hpp"
#include "cgpkit/random.hpp"

namespace cgpkit {

bool McEstimate::within(double target, double k) const {
  if (std_error == 0.0) return mean == target;
  return std::abs(mean - target) <= k * std_error;
}

Inputs stack_inputs(std::span<const Inputs> blocks) {
  Index rows = 0;
  Index cols = -1;
  for (const Inputs& b : blocks) {
    if (b.rows() == 0) continue;
    if (cols >= 0 && b.cols() != cols) throw DimensionMismatch("stack_inputs: column mismatch");
    cols = b.cols();
    rows += b.rows();
  }
  Inputs out(rows, std::max<Index>(cols, 0));
  Index r = 0;
  for (const Inputs& b : blocks) {
    if (b.rows() == 0) continue;
    out.middleRows(r, b.rows()) = b;
    r += b.rows();
  }
  return out;
}

namespace {

// Prior over the test latents exactly as the composite recursion sees it.
GaussianBelief effective_prior(const GpModel& model, const Inputs& test_X) {
  return cgp_start(model, test_X).prior();
}

struct Welford {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    n += 1.0;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }

  void merge(const Welford& o) {
    if (o.n == 0.0) return;
    const double total = n + o.n;
    const double d = o.mean - mean;
    mean += d * o.n / total;
    m2 += o.m2 + d * d * n * o.n / total;
    n = total;
  }

  McEstimate estimate() const {
    McEstimate e;
    e.mean = mean;
    e.draws = static_cast<std::size_t>(n);
    e.std_error = n > 1.0 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0;
    return e;
  }
};

constexpr std::size_t kChunk = 1000;

// Runs `draw(rng, out)` n_draws times in chunks keyed by (seed, chunk index);
// chunk results are merged in index order.
template <std::size_t S, class Draw>
std::array<McEstimate, S> monte_carlo(std::size_t n_draws, std::uint64_t seed, Draw&& draw) {
  const std::size_t chunks = (n_draws + kChunk - 1) / kChunk;
  std::vector<std::array<Welford, S>> partial(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    RandomStream rng(seed, c);
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(n_draws, begin + kChunk);
    std::array<double, S> values{};
    for (std::size_t i = begin; i < end; ++i) {
      draw(rng, values);
      for (std::size_t s = 0; s < S; ++s) partial[c][s].add(values[s]);
    }
  });
  std::array<Welford, S> total{};
  for (const auto& p : partial) {
    for (std::size_t s = 0; s < S; ++s) total[s].merge(p[s]);
  }
  std::array<McEstimate, S> out{};
  for (std::size_t s = 0; s < S; ++s) out[s] = total[s].estimate();
  return out;
}

void require_draws(std::size_t n_draws, std::string_view where) {
  if (n_draws < 1000) {
    throw InvalidInput(std::string(where) + ": at least 1000 draws are required");
  }
}

// Joint N(mean, cov) over [test_X; train_X] with noise on the training block only.
GaussianSampler joint_sampler(const GpModel& model, const Inputs& test_X, const Inputs& train_X) {
  const Inputs blocks[] = {test_X, train_X};
  const Inputs all = stack_inputs(blocks);
  Matrix cov = cross_covariance(model.kernel, all, all);
  cov.diagonal().tail(train_X.rows()).array() += model.kernel.params.noise_var();
  return GaussianSampler(model.mean.evaluate(all), PsdMatrix(std::move(cov)));
}

std::vector<DataSegment> split_segments(std::span<const Inputs> segments_X,
                                        const Eigen::Ref<const Vector>& y) {
  std::vector<DataSegment> out;
  out.reserve(segments_X.size());
  Index offset = 0;
  for (const Inputs& X : segments_X) {
    out.push_back({X, y.segment(offset, X.rows())});
    offset += X.rows();
  }
  return out;
}

}  // namespace

double mutual_information(const GpModel& model, const Inputs& train_X, const Inputs& test_X) {
  if (train_X.rows() == 0) return 0.0;
  const GaussianBelief prior = effective_prior(model, test_X);
  const Cholesky fy = cholesky_jittered(training_covariance(model.kernel, train_X));
  const Matrix whitened = fy.solve_lower(cross_covariance(model.kernel, train_X, test_X));
  const PsdMatrix post(prior.cov.matrix() - whitened.transpose() * whitened);
  double mi = 0.5 * (logdet_psd(prior.cov) - logdet_psd(post));
  if (mi < 0.0 && mi > -1e-10) mi = 0.0;
  return mi;
}

double mse_lower_bound(double prior_var, double mi) {
  if (!(prior_var > 0.0) || !(mi >= 0.0) || !std::isfinite(prior_var) || !std::isfinite(mi)) {
    throw InvalidInput("mse_lower_bound: need prior_var > 0 and mi >= 0");
  }
  return prior_var * std::exp(-2.0 * mi);
}

ExcessMseReport excess_mse_closed_form(const GpModel& model, const Inputs& seg1_X,
                                       const Inputs& seg2_X, const Inputs& test_x) {
  if (model.mean.family != MeanFamily::Zero) {
    throw InvalidInput("excess_mse_closed_form: requires a zero-mean model");
  }
  if (test_x.rows() != 1) {
    throw InvalidInput("excess_mse_closed_form: requires a single test point");
  }
  if (seg1_X.rows() == 0 || seg2_X.rows() == 0) {
    throw InvalidInput("excess_mse_closed_form: requires two nonempty segments");
  }
  const KernelSpec& k = model.kernel;
  const Index n1 = seg1_X.rows();
  const Index n2 = seg2_X.rows();

  const Matrix S11 = training_covariance(k, seg1_X).matrix();
  const Matrix S22 = training_covariance(k, seg2_X).matrix();
  const Matrix S12 = cross_covariance(k, seg1_X, seg2_X);
  const Matrix S21 = S12.transpose();
  const Vector c1 = cross_covariance(k, seg1_X, test_x).col(0);
  const Vector c2 = cross_covariance(k, seg2_X, test_x).col(0);
  const double s = cross_covariance(k, test_x, test_x)(0, 0);

  ExcessMseReport r;
  r.prior_var = s;
  r.gp_coeffs = block_inverse_2x2(S11, S12, S21, S22).assemble();

  const Cholesky f11 = cholesky_jittered(PsdMatrix(S11));
  const Matrix S11_inv = f11.solve(Matrix::Identity(n1, n1));
  r.posterior_var_seg1 = s - c1.dot(f11.solve(c1));

  // Segments connected only through the test latent.
  const Matrix T21 = c2 * c1.transpose() / s;
  const Matrix T12 = T21.transpose();
  const Cholesky ft(cholesky_jittered(PsdMatrix(S22 - T21 * S11_inv * T12)));
  const double ratio = r.posterior_var_seg1 / s;

  r.cgp_coeffs = Matrix::Zero(n1 + n2, n1 + n2);
  r.cgp_coeffs.topLeftCorner(n1, n1) = S11_inv;
  r.cgp_coeffs.bottomLeftCorner(n2, n1) = -ratio * ft.solve(T21 * S11_inv);
  r.cgp_coeffs.bottomRightCorner(n2, n2) = ratio * ft.solve(Matrix::Identity(n2, n2));

  Vector c(n1 + n2);
  c << c1, c2;
  const Vector alpha = (r.gp_coeffs - r.cgp_coeffs).transpose() * c;
  r.alpha1 = alpha.head(n1);
  r.alpha2 = alpha.tail(n2);

  Matrix Sy(n1 + n2, n1 + n2);
  Sy << S11, S12, S21, S22;
  const Cholesky fy = cholesky_jittered(PsdMatrix(Sy));
  // alpha^T Sy alpha written as a squared norm so it cannot go negative.
  const Matrix L = fy.lower();
  r.closed_form = (L.transpose() * alpha).squaredNorm();
  r.posterior_var = s - c.dot(fy.solve(c));
  return r;
}

ExcessMseMc excess_mse_monte_carlo(const GpModel& model, std::span<const Inputs> segments_X,
                                   const Inputs& test_x, std::size_t n_draws,
                                   std::uint64_t seed, const PointPredictor& alternative) {
  require_draws(n_draws, "excess_mse_monte_carlo");
  if (test_x.rows() != 1) throw InvalidInput("excess_mse_monte_carlo: single test point only");
  if (segments_X.empty()) throw InvalidInput("excess_mse_monte_carlo: no segments");

  const Inputs all_X = stack_inputs(segments_X);
  const GaussianSampler sampler = joint_sampler(model, test_x, all_X);
  const CgpState start = cgp_start(model, test_x);
  const GaussianBelief prior = start.prior();

  ExcessMseMc out;
  out.gp_posterior_var =
      gp_posterior(prior, model, {all_X, Vector::Zero(all_X.rows())}, test_x).variance()[0];

  const auto est = monte_carlo<4>(n_draws, seed, [&](RandomStream& rng, std::array<double, 4>& v) {
    const Vector draw = sampler.draw(rng);
    const double z = draw[0];
    const Vector y = draw.tail(all_X.rows());
    const std::vector<DataSegment> segs = split_segments(segments_X, y);

    const double gp = gp_posterior(prior, model, {all_X, y}, test_x).mean[0];
    const double cgp = alternative ? alternative(model, segs, test_x)
                                   : cgp_run(start, segs, model).state.current().mean[0];
    const double gap = gp - cgp;
    v[0] = gap * gap;
    v[1] = (z - cgp) * (z - cgp);
    v[2] = (z - gp) * (z - gp);
    v[3] = v[1] - v[0];
  });
  out.excess = est[0];
  out.cgp_mse = est[1];
  out.gp_mse = est[2];
  out.decomposition = est[3];
  return out;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Redundant: return "Redundant";
    case Verdict::Synergistic: return "Synergistic";
    case Verdict::Balanced: return "Balanced";
  }
  return "?";
}

InfoReport info_gap(const GpModel& model, std::span<const Inputs> segments_X,
                    const Inputs& test_X) {
  if (segments_X.size() < 2) throw InvalidInput("info_gap: needs at least two segments");
  InfoReport r;
  r.mi_full = mutual_information(model, stack_inputs(segments_X), test_X);
  double sum = 0.0;
  for (const Inputs& X : segments_X) {
    r.mi_segments.push_back(mutual_information(model, X, test_X));
    sum += r.mi_segments.back();
  }
  r.gap = r.mi_full - sum;
  if (r.gap < -kInfoGapTolerance) {
    r.verdict = Verdict::Redundant;
  } else if (r.gap > kInfoGapTolerance) {
    r.verdict = Verdict::Synergistic;
  } else {
    r.verdict = Verdict::Balanced;
  }
  return r;
}

double gaussian_kld(const GaussianBelief& q, const GaussianBelief& p) {
  if (q.dim() != p.dim() || q.cov.dim() != p.cov.dim() || q.dim() != q.cov.dim()) {
    throw DimensionMismatch("gaussian_kld: dimension mismatch");
  }
  const Cholesky fp = cholesky_jittered(p.cov);
  const Cholesky fq = cholesky_jittered(q.cov);
  const Vector d = q.mean - p.mean;
  const double trace = fp.solve(q.cov.matrix()).trace();
  return 0.5 * (trace - static_cast<double>(q.dim()) + d.dot(fp.solve(d)) + fp.logdet() -
                fq.logdet());
}

KldCheck kld_identity_check(const GpModel& model, const Inputs& train_X, const Inputs& test_X,
                            std::size_t n_draws, std::uint64_t seed) {
  require_draws(n_draws, "kld_identity_check");
  KldCheck out;
  if (train_X.rows() == 0) {
    out.sampled.draws = n_draws;
    return out;
  }
  out.analytic = mutual_information(model, train_X, test_X);
  const GaussianBelief prior = effective_prior(model, test_X);
  const GaussianSampler sampler(model.mean.evaluate(train_X),
                                training_covariance(model.kernel, train_X));
  out.sampled = monte_carlo<1>(n_draws, seed, [&](RandomStream& rng, std::array<double, 1>& v) {
    const GaussianBelief post = gp_posterior(prior, model, {train_X, sampler.draw(rng)}, test_X);
    v[0] = gaussian_kld(post, prior);
  })[0];
  return out;
}

KldCheck cgp_kld_check(const GpModel& model, std::span<const Inputs> segments_X,
                       const Inputs& test_X, std::size_t n_draws, std::uint64_t seed) {
  require_draws(n_draws, "cgp_kld_check");
  if (segments_X.empty()) throw InvalidInput("cgp_kld_check: no segments");
  KldCheck out;
  for (const Inputs& X : segments_X) out.analytic += mutual_information(model, X, test_X);

  const Inputs all_X = stack_inputs(segments_X);
  const CgpState start = cgp_start(model, test_X);
  const GaussianSampler sampler(model.mean.evaluate(all_X),
                                training_covariance(model.kernel, all_X));
  out.sampled = monte_carlo<1>(n_draws, seed, [&](RandomStream& rng, std::array<double, 1>& v) {
    const std::vector<DataSegment> segs = split_segments(segments_X, sampler.draw(rng));
    v[0] = gaussian_kld(cgp_run(start, segs, model).state.current(), start.prior());
  })[0];
  return out;
}

}  // namespace cgpkit
