#include <doctest/doctest.h>

#include <cmath>

#include "cgpkit/analysis.hpp"
#include "cgpkit/cgp.hpp"
#include "cgpkit/errors.hpp"
#include "cgpkit/random.hpp"
#include "support.hpp"

using namespace cgpkit;

namespace {

double dense_mi(const GpModel& m, const Inputs& X, const Inputs& Z) {
  const oracle::Dense post = oracle::gp_posterior(m, X, Vector::Zero(X.rows()), Z);
  return 0.5 * (oracle::logdet(oracle::gram(m.kernel, Z, Z)) - oracle::logdet(post.cov));
}

GpModel se(double amp, double ls, double noise) {
  GpModel m;
  m.kernel = make_squared_exponential(amp, ls, noise);
  return m;
}

}  // namespace

TEST_CASE("mutual information") {
  SUBCASE("independent inputs carry none") {
    Inputs X(3, 1), Z(1, 1);
    X << 500.0, 501.0, 502.0;
    Z << 0.0;
    CHECK(mutual_information(se(1.0, 1.0, 0.1), X, Z) == 0.0);
  }
  SUBCASE("scalar Gaussian channel") {
    Inputs X(1, 1);
    X << 0.0;
    const GpModel m = se(1.5, 1.0, 0.4);
    CHECK(mutual_information(m, X, X) == doctest::Approx(0.5 * std::log(1.0 + 2.25 / 0.4)));
  }
  SUBCASE("random instances against the dense formula") {
    oracle::Gen gen(61);
    for (const auto fam : oracle::kFamilies) {
      const GpModel m = gen.model(fam);
      const Inputs X = gen.inputs(6, m.kernel.input_dim(), 0.0, 5.0);
      const Inputs Z = gen.inputs(2, m.kernel.input_dim(), 0.0, 5.0);
      CHECK(std::abs(mutual_information(m, X, Z) - dense_mi(m, X, Z)) < 1e-9);
    }
  }
  SUBCASE("random instance against a Monte-Carlo entropy difference") {
    // I(z;y) = E[log p(y|z) - log p(y)] sampled over the joint.
    oracle::Gen gen(62);
    const GpModel m = gen.model(KernelFamily::SquaredExponential);
    const Inputs X = gen.inputs(6, 1, 0.0, 5.0);
    const Inputs Z = gen.inputs(2, 1, 0.0, 5.0);
    Matrix Sy = oracle::gram(m.kernel, X, X);
    Sy.diagonal().array() += m.kernel.params.noise_var();
    const Matrix Szz = oracle::gram(m.kernel, Z, Z);
    const Matrix Syz = oracle::gram(m.kernel, X, Z);
    const Matrix H = Syz * Szz.inverse();
    const Matrix R = Sy - H * Syz.transpose();
    const Matrix Ri = R.inverse(), Syi = Sy.inverse();
    const double ld = oracle::logdet(R) - oracle::logdet(Sy);
    const GaussianSampler zs(Vector::Zero(2), PsdMatrix(Szz));
    const GaussianSampler es(Vector::Zero(6), PsdMatrix(R));
    RandomStream rng(7);
    double sum = 0.0, sum2 = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const Vector z = zs.draw(rng);
      const Vector e = es.draw(rng);
      const Vector y = H * z + e;
      const double v = 0.5 * (y.dot(Syi * y) - e.dot(Ri * e) - ld);
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / n;
    const double se_mean = std::sqrt((sum2 / n - mean * mean) / n);
    CHECK(std::abs(mean - mutual_information(m, X, Z)) <= 3.0 * se_mean);
  }
}

TEST_CASE("mse_lower_bound") {
  CHECK(mse_lower_bound(2.0, 0.0) == 2.0);
  CHECK(mse_lower_bound(1.0, 0.5 * std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-15));
  // Scalar test latent: the bound is the exact posterior variance.
  oracle::Gen gen(63);
  const GpModel m = gen.model(KernelFamily::SquaredExponential);
  const Inputs X = gen.inputs(8, 1, 0.0, 4.0);
  Inputs z(1, 1);
  z << 2.0;
  const double prior = oracle::gram(m.kernel, z, z)(0, 0);
  const double post = oracle::gp_posterior(m, X, Vector::Zero(8), z).cov(0, 0);
  CHECK(std::abs(mse_lower_bound(prior, mutual_information(m, X, z)) - post) < 1e-10);
  CHECK_THROWS_AS(mse_lower_bound(0.0, 1.0), InvalidInput);
  CHECK_THROWS_AS(mse_lower_bound(1.0, -1.0), InvalidInput);
}

TEST_CASE("excess MSE closed form") {
  SUBCASE("independent second segment adds nothing") {
    const GpModel m = se(1.0, 1.0, 0.1);
    Inputs a(3, 1), b(3, 1), z(1, 1);
    a << 0.0, 0.5, 1.0;
    b << 900.0, 901.0, 902.0;
    z << 0.3;
    const ExcessMseReport r = excess_mse_closed_form(m, a, b, z);
    CHECK(r.closed_form <= 1e-10);
    CHECK(r.closed_form >= 0.0);
  }
  SUBCASE("duplicated segments are penalized") {
    const GpModel m = se(1.0, 1.5, 0.2);
    Inputs a(4, 1), z(1, 1);
    a << 0.0, 1.0, 2.0, 3.0;
    z << 1.5;
    CHECK(excess_mse_closed_form(m, a, a, z).closed_form > 1e-6);
  }
  SUBCASE("coefficient matrices are consistent with the predictors") {
    oracle::Gen gen(64);
    const GpModel m = gen.model(KernelFamily::SquaredExponential);
    const Inputs a = gen.inputs(5, 1, 0.0, 5.0);
    const Inputs b = gen.inputs(5, 1, 0.0, 5.0);
    Inputs z(1, 1);
    z << 2.5;
    const ExcessMseReport r = excess_mse_closed_form(m, a, b, z);
    const Vector y = gen.normal_vector(10);
    Vector c(10);
    c << oracle::gram(m.kernel, a, z).col(0), oracle::gram(m.kernel, b, z).col(0);
    const std::vector<DataSegment> segs{{a, y.head(5)}, {b, y.tail(5)}};
    const double cgp = cgp_run(segs, m, z).state.current().mean[0];
    const Inputs blocks[] = {a, b};
    const double gp = oracle::gp_posterior(m, stack_inputs(blocks), y, z).mean[0];
    CHECK(c.dot(r.gp_coeffs * y) == doctest::Approx(gp).epsilon(1e-9));
    CHECK(c.dot(r.cgp_coeffs * y) == doctest::Approx(cgp).epsilon(1e-9));
    // The closed form is exactly the variance of the predictor difference.
    Matrix Sy = oracle::gram(m.kernel, stack_inputs(blocks), stack_inputs(blocks));
    Sy.diagonal().array() += m.kernel.params.noise_var();
    Vector alpha(10);
    alpha << r.alpha1, r.alpha2;
    CHECK(r.closed_form == doctest::Approx(alpha.dot(Sy * alpha)).epsilon(1e-9));
  }
  SUBCASE("preconditions") {
    GpModel lin = se(1.0, 1.0, 0.1);
    lin.mean = {MeanFamily::Linear, 1.0, 0.0};
    const Inputs a = Inputs::Zero(2, 1);
    CHECK_THROWS_AS(excess_mse_closed_form(lin, a, a, Inputs::Zero(1, 1)), InvalidInput);
    CHECK_THROWS_AS(excess_mse_closed_form(se(1, 1, 0.1), a, a, Inputs::Zero(2, 1)), InvalidInput);
    CHECK_THROWS_AS(excess_mse_closed_form(se(1, 1, 0.1), a, Inputs(0, 1), Inputs::Zero(1, 1)),
                    InvalidInput);
  }
}

TEST_CASE("excess MSE Monte Carlo") {
  const GpModel m = se(1.0, 1.5, 0.2);
  Inputs a(4, 1), b(4, 1), z(1, 1);
  a << 0.0, 1.0, 2.0, 3.0;
  b << 0.5, 1.5, 2.5, 3.5;
  z << 1.7;
  const Inputs segs[] = {a, b};

  SUBCASE("self comparison is zero") {
    const PointPredictor exact = [](const GpModel& model, std::span<const DataSegment> s,
                                    const Inputs& x) {
      const Inputs X[] = {s[0].X, s[1].X};
      Vector y(s[0].size() + s[1].size());
      y << s[0].y, s[1].y;
      return gp_posterior(prior_belief(model, x), model, {stack_inputs(X), y}, x).mean[0];
    };
    const ExcessMseMc mc = excess_mse_monte_carlo(m, segs, z, 2000, 1, exact);
    CHECK(mc.excess.within(0.0));
    CHECK(mc.excess.mean < 1e-20);
  }
  SUBCASE("one segment is exactly the GP") {
    const Inputs one[] = {a};
    const ExcessMseMc mc = excess_mse_monte_carlo(m, one, z, 1000, 2);
    CHECK(mc.excess.mean < 1e-24);
  }
  SUBCASE("agrees with the closed form and is reproducible") {
    const ExcessMseReport r = excess_mse_closed_form(m, a, b, z);
    const ExcessMseMc mc = excess_mse_monte_carlo(m, segs, z, 20000, 3);
    CHECK(mc.excess.within(r.closed_form));
    CHECK(mc.decomposition.within(r.posterior_var));
    CHECK(mc.gp_mse.within(r.posterior_var));
    const ExcessMseMc again = excess_mse_monte_carlo(m, segs, z, 20000, 3);
    CHECK(again.excess.mean == mc.excess.mean);
  }
  CHECK_THROWS_AS(excess_mse_monte_carlo(m, segs, z, 999, 1), InvalidInput);
}

TEST_CASE("info gap verdicts") {
  const GpModel m = se(1.0, 1.5, 0.2);
  Inputs a(4, 1), z(2, 1);
  a << 0.0, 1.0, 2.0, 3.0;
  z << 1.2, 2.2;

  SUBCASE("duplicated segment is redundant") {
    const Inputs segs[] = {a, a};
    const InfoReport r = info_gap(m, segs, z);
    CHECK(r.verdict == Verdict::Redundant);
    CHECK(r.mi_segments[0] + r.mi_segments[1] > r.mi_full);
    CHECK(r.gap == doctest::Approx(r.mi_full - r.mi_segments[0] - r.mi_segments[1]));
  }
  SUBCASE("segment without information is balanced") {
    Inputs far(2, 1);
    far << 800.0, 801.0;
    const Inputs segs[] = {a, far};
    CHECK(info_gap(m, segs, z).verdict == Verdict::Balanced);
  }
  SUBCASE("independent channels: balanced, and the sampled gap agrees") {
    // Segment k only sees the latent at test point k and the test points are
    // mutually independent, so the segments are independent both marginally and
    // given z. The sampled data-averaged KLDs then have zero gap.
    oracle::Gen gen(65);
    int agree = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
      const GpModel mm = se(gen.uniform(0.5, 2.0), gen.uniform(0.5, 1.5), gen.uniform(0.05, 0.5));
      Inputs zz(2, 1), s1(2, 1), s2(3, 1);
      zz << 0.0, 1000.0;
      s1 << gen.uniform(-1.0, 1.0), gen.uniform(-1.0, 1.0);
      s2 << 1000.0 + gen.uniform(-1.0, 1.0), 1000.0 + gen.uniform(-1.0, 1.0),
          1000.0 + gen.uniform(-1.0, 1.0);
      const Inputs segs[] = {s1, s2};
      const InfoReport r = info_gap(mm, segs, zz);
      const KldCheck full = kld_identity_check(mm, stack_inputs(segs), zz, 2000, 100 + t);
      const KldCheck k1 = kld_identity_check(mm, s1, zz, 2000, 300 + t);
      const KldCheck k2 = kld_identity_check(mm, s2, zz, 2000, 500 + t);
      const double sampled = full.sampled.mean - k1.sampled.mean - k2.sampled.mean;
      const double se = std::sqrt(std::pow(full.sampled.std_error, 2) +
                                  std::pow(k1.sampled.std_error, 2) +
                                  std::pow(k2.sampled.std_error, 2));
      if (r.verdict == Verdict::Balanced && std::abs(sampled) <= 4.0 * se) ++agree;
    }
    CHECK(agree == trials);
  }
  SUBCASE("overlapping segments: sampled gap has the analytic sign") {
    oracle::Gen gen(66);
    for (int t = 0; t < 10; ++t) {
      const GpModel mm = se(1.0, gen.uniform(0.5, 1.5), gen.uniform(0.05, 0.5));
      Inputs zz(1, 1), s1(3, 1), s2(3, 1);
      zz << 0.0;
      for (Index i = 0; i < 3; ++i) {
        s1(i, 0) = gen.uniform(-1.0, 1.0);
        s2(i, 0) = gen.uniform(-1.0, 1.0);
      }
      const Inputs segs[] = {s1, s2};
      const InfoReport r = info_gap(mm, segs, zz);
      const KldCheck full = kld_identity_check(mm, stack_inputs(segs), zz, 4000, 700 + t);
      const KldCheck k1 = kld_identity_check(mm, s1, zz, 4000, 800 + t);
      const KldCheck k2 = kld_identity_check(mm, s2, zz, 4000, 900 + t);
      const double sampled = full.sampled.mean - k1.sampled.mean - k2.sampled.mean;
      CHECK(r.verdict == Verdict::Redundant);
      CHECK(sampled < 0.0);
    }
  }
  CHECK_THROWS_AS(info_gap(m, std::span<const Inputs>(&a, 1), z), InvalidInput);
}

TEST_CASE("KLD identity") {
  const GpModel m = se(1.0, 1.0, 0.3);
  SUBCASE("no data") {
    const KldCheck k = kld_identity_check(m, Inputs(0, 1), Inputs::Zero(1, 1), 1000, 1);
    CHECK(k.analytic == 0.0);
    CHECK(k.sampled.mean == 0.0);
  }
  SUBCASE("scalar channel") {
    Inputs x(1, 1);
    x << 0.0;
    const KldCheck k = kld_identity_check(m, x, x, 20000, 2);
    CHECK(k.analytic == doctest::Approx(0.5 * std::log(1.0 + 1.0 / 0.3)));
    CHECK(k.sampled.within(k.analytic));
  }
  SUBCASE("KLD is non-negative") {
    oracle::Gen gen(66);
    const Inputs X = gen.inputs(5, 1, 0.0, 3.0);
    const Inputs Z = gen.inputs(2, 1, 0.0, 3.0);
    const GaussianBelief prior = prior_belief(m, Z);
    for (int i = 0; i < 50; ++i) {
      const GaussianBelief post = gp_posterior(prior, m, {X, 3.0 * gen.normal_vector(5)}, Z);
      CHECK(gaussian_kld(post, prior) >= 0.0);
    }
    CHECK(gaussian_kld(prior, prior) == doctest::Approx(0.0));
  }
}
