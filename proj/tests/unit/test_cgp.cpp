#include <doctest/doctest.h>

#include <algorithm>

#include "cgpkit/cgp.hpp"
#include "cgpkit/errors.hpp"
#include "cgpkit/psd.hpp"
#include "support.hpp"

using namespace cgpkit;

namespace {

// p(z) prod_k p(y_k | z), normalized, by dense Gaussian algebra.
oracle::Dense product_form(const GpModel& m, const std::vector<DataSegment>& segs,
                           const Inputs& Z) {
  const Matrix Szz = oracle::gram(m.kernel, Z, Z);
  const Matrix Szz_inv = Szz.inverse();
  const Vector mz = oracle::mean(m.mean, Z);
  Matrix precision = Szz_inv;
  Vector info = Szz_inv * mz;
  for (const DataSegment& s : segs) {
    const Matrix Syz = oracle::gram(m.kernel, s.X, Z);
    const Matrix H = Syz * Szz_inv;
    Matrix R = oracle::gram(m.kernel, s.X, s.X) - H * Syz.transpose();
    R.diagonal().array() += m.kernel.params.noise_var();
    const Matrix Ri = R.inverse();
    precision += H.transpose() * Ri * H;
    // y_k | z ~ N(mu_y + H (z - mz), R)
    info += H.transpose() * Ri * (s.y - oracle::mean(m.mean, s.X) + H * mz);
  }
  const Matrix cov = precision.inverse();
  return {cov * info, cov};
}

std::vector<DataSegment> random_segments(oracle::Gen& gen, const GpModel& m, int k, Index n,
                                         double span) {
  std::vector<DataSegment> segs;
  for (int i = 0; i < k; ++i) {
    segs.push_back({gen.inputs(n, m.kernel.input_dim(), 0.0, span), gen.normal_vector(n)});
  }
  return segs;
}

Inputs spread_points(oracle::Gen& gen, Index m, Index dim, double span) {
  Inputs Z(m, dim);
  for (Index i = 0; i < m; ++i) {
    for (Index c = 0; c < dim; ++c) Z(i, c) = span * (static_cast<double>(i) + 0.5) / static_cast<double>(m) + gen.uniform(-0.1, 0.1);
  }
  return Z;
}

}  // namespace

TEST_CASE("a fresh state holds the prior") {
  oracle::Gen gen(41);
  const GpModel m = gen.model(KernelFamily::SquaredExponential, true);
  const Inputs Z = spread_points(gen, 4, 1, 8.0);
  const CgpState s = cgp_start(m, Z);
  CHECK(s.segments_seen() == 0);
  CHECK(s.current().mean == s.prior().mean);
  CHECK(s.current().cov.matrix() == s.prior().cov.matrix());
  CHECK(s.prior_jitter() == 0.0);
  CHECK_THROWS_AS(CgpState(prior_belief(m, Z), Inputs::Zero(3, 1)), DimensionMismatch);
}

TEST_CASE("one segment reproduces the exact posterior") {
  oracle::Gen gen(42);
  for (const auto fam : oracle::kFamilies) {
    const GpModel m = gen.model(fam, true);
    const Inputs Z = spread_points(gen, 5, m.kernel.input_dim(), 8.0);
    const DataSegment seg{gen.inputs(30, m.kernel.input_dim(), 0.0, 8.0), gen.normal_vector(30)};
    const CgpState s = cgp_update(cgp_start(m, Z), m, seg);
    const GaussianBelief gp = gp_posterior(prior_belief(m, Z), m, seg, Z);
    CHECK(s.segments_seen() == 1);
    CHECK(oracle::rel_err(s.current().mean, gp.mean) < 1e-8);
    CHECK(oracle::rel_err(s.current().cov.matrix(), gp.cov.matrix()) < 1e-8);
  }
}

TEST_CASE("a segment carrying no information leaves the prior") {
  GpModel m;
  m.kernel = make_squared_exponential(1.0, 1.0, 0.1);
  Inputs Z(2, 1);
  Z << 0.0, 1.0;
  const DataSegment far{Vector::LinSpaced(10, 1000.0, 1009.0), Vector::Ones(10)};
  const CgpState s = cgp_update(cgp_start(m, Z), m, far);
  CHECK((s.current().mean - s.prior().mean).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK((s.current().cov.matrix() - s.prior().cov.matrix()).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("two segments match the product-of-Gaussians construction") {
  oracle::Gen gen(43);
  for (const auto fam : oracle::kFamilies) {
    for (int rep = 0; rep < 3; ++rep) {
      const GpModel m = gen.model(fam, true);
      const Inputs Z = spread_points(gen, 4, m.kernel.input_dim(), 10.0);
      const auto segs = random_segments(gen, m, 2, 20, 10.0);
      const CgpRun run = cgp_run(segs, m, Z);
      const oracle::Dense ref = product_form(m, segs, Z);
      CHECK(oracle::rel_err(run.state.current().mean, ref.mean) < 1e-7);
      CHECK(oracle::rel_err(run.state.current().cov.matrix(), ref.cov) < 1e-7);
      CHECK(run.step_seconds.size() == 2);
    }
  }
}

TEST_CASE("segment order does not matter and covariance stays PSD") {
  oracle::Gen gen(44);
  const GpModel m = gen.model(KernelFamily::PeriodicPlusSE, true);
  const Inputs Z = spread_points(gen, 6, 1, 20.0);
  auto segs = random_segments(gen, m, 5, 15, 20.0);
  CgpState s = cgp_start(m, Z);
  for (const DataSegment& seg : segs) {
    s = cgp_update(s, m, seg);
    const Matrix& P = s.current().cov.matrix();
    CHECK(symmetric_eigenvalues(P).minCoeff() >= -1e-8 * P.trace() / 6.0);
  }
  std::reverse(segs.begin(), segs.end());
  std::swap(segs[0], segs[2]);
  const CgpState t = cgp_run(segs, m, Z).state;
  CHECK(oracle::rel_err(s.current().mean, t.current().mean) < 1e-6);
  CHECK(oracle::rel_err(s.current().cov.matrix(), t.current().cov.matrix()) < 1e-6);
}

TEST_CASE("splitting a segment changes the answer") {
  oracle::Gen gen(45);
  const GpModel m = gen.model(KernelFamily::SquaredExponential);
  const Inputs Z = spread_points(gen, 3, 1, 6.0);
  const DataSegment all{gen.inputs(20, 1, 0.0, 6.0), gen.normal_vector(20)};
  const std::vector<DataSegment> halves{{all.X.topRows(10), all.y.head(10)},
                                        {all.X.bottomRows(10), all.y.tail(10)}};
  const CgpState one = cgp_run(std::span(&all, 1), m, Z).state;
  const CgpState two = cgp_run(halves, m, Z).state;
  CHECK((one.current().mean - two.current().mean).norm() > 1e-6);
}

TEST_CASE("cgp_run resumes from a checkpoint") {
  oracle::Gen gen(46);
  const GpModel m = gen.model(KernelFamily::SquaredExponential);
  const Inputs Z = spread_points(gen, 3, 1, 6.0);
  const auto segs = random_segments(gen, m, 4, 10, 6.0);
  const CgpState full = cgp_run(segs, m, Z).state;
  const CgpState half = cgp_run(std::span(segs).first(2), m, Z).state;
  const CgpState restored =
      CgpState::resume(half.prior(), half.test_inputs(), half.current(), half.segments_seen());
  const CgpState rest = cgp_run(restored, std::span(segs).subspan(2), m).state;
  CHECK(rest.segments_seen() == 4);
  CHECK(oracle::rel_err(rest.current().mean, full.current().mean) < 1e-12);
}

TEST_CASE("cgp_run reports the failing segment") {
  GpModel m;
  m.kernel = make_squared_exponential(1.0, 1.0, 0.1);
  const Inputs Z = Inputs::Zero(1, 1);
  std::vector<DataSegment> segs{{Inputs::Zero(2, 1), Vector::Zero(2)},
                                {Inputs::Zero(2, 1), Vector::Zero(3)}};
  CHECK_THROWS_WITH_AS(cgp_run(segs, m, Z), doctest::Contains("segment 1"), DimensionMismatch);
  CHECK_THROWS_AS(cgp_run(std::span<const DataSegment>(), m, Z), InvalidInput);
}

TEST_CASE("fusion") {
  oracle::Gen gen(47);
  auto fim = [&](Index d) { return FisherInfo{PsdMatrix(gen.spd(d)), Vector::Zero(d)}; };

  SUBCASE("single segment returns its estimate") {
    const Vector th = gen.normal_vector(3);
    const FusionState fs = fusion_update(FusionState::empty(3), th, fim(3));
    CHECK(oracle::rel_err(fused_theta(fs), th) < 1e-12);
  }
  SUBCASE("equal weights average") {
    const FisherInfo f = fim(2);
    const Vector a = gen.normal_vector(2);
    const Vector b = gen.normal_vector(2);
    const FusionState fs = fusion_update(fusion_update(FusionState::empty(2), a, f), b, f);
    CHECK(oracle::rel_err(fused_theta(fs), Vector(0.5 * (a + b))) < 1e-12);
    CHECK(oracle::rel_err(fused_covariance(fs), Matrix((2.0 * f.matrix.matrix()).inverse())) < 1e-10);
  }
  SUBCASE("left fold equals pairwise tree") {
    std::vector<FusionState> leaves;
    FusionState left = FusionState::empty(3);
    for (int i = 0; i < 8; ++i) {
      const Vector th = gen.normal_vector(3);
      const FisherInfo f = fim(3);
      left = fusion_update(left, th, f);
      leaves.push_back(fusion_update(FusionState::empty(3), th, f));
    }
    while (leaves.size() > 1) {
      std::vector<FusionState> next;
      for (std::size_t i = 0; i < leaves.size(); i += 2) next.push_back(fusion_merge(leaves[i], leaves[i + 1]));
      leaves = std::move(next);
    }
    CHECK(leaves[0].k == 8);
    CHECK(oracle::rel_err(fused_theta(left), fused_theta(leaves[0])) < 1e-10);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(fused_theta(FusionState::empty(2)), FactorizationFailure);
    CHECK_THROWS_AS(fusion_update(FusionState::empty(2), Vector::Zero(3), fim(3)), DimensionMismatch);
  }
}
