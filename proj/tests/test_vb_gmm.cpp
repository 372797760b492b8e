#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "bce/rng.hpp"
#include "bce/vb_gmm.hpp"
#include "oracles/em_gmm.hpp"

using namespace bce;

namespace {

std::vector<Vec> scalars(const std::vector<double>& xs) {
  std::vector<Vec> out;
  out.reserve(xs.size());
  for (double x : xs) {
    Vec v(1);
    v << x;
    out.push_back(v);
  }
  return out;
}

std::vector<double> two_cluster(std::size_t n, std::uint64_t seed,
                                double mu0 = 0.0, double mu1 = 10.0, double sigma = 0.1) {
  Rng rng(seed);
  std::vector<double> xs;
  xs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mu = (i < n / 2) ? mu0 : mu1;
    xs.push_back(rng.normal(mu, sigma));
  }
  return xs;
}

bool free_energy_monotone(const std::vector<double>& h) {
  for (std::size_t i = 1; i < h.size(); ++i) {
    double slack = 1e-8 * std::max(1.0, std::abs(h[i - 1]));
    if (h[i] < h[i - 1] - slack) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("identical points reproduce the prior hyperparameter shifts") {
  VbConfig cfg;
  cfg.max_components = 1;
  cfg.m0 = Vec::Constant(1, 3.5);
  cfg.S0 = Mat::Identity(1, 1) * 2.0;
  cfg.nu0 = 4.0;
  const int n = 50;
  std::vector<Vec> data(n, Vec::Constant(1, 3.5));

  VbPosterior post = vb_fit(data, cfg);
  REQUIRE(post.alpha.size() == 1);
  CHECK(post.m[0][0] == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(post.kappa[0] == doctest::Approx(cfg.kappa0 + n).epsilon(1e-12));
  CHECK(post.nu[0] == doctest::Approx(cfg.nu0 + n).epsilon(1e-12));
  CHECK(post.S[0](0, 0) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(post.counts[0] == doctest::Approx(n).epsilon(1e-9));
}

TEST_CASE("free energy is monotone and responsibilities normalized") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    Rng rng(seed);
    std::vector<double> xs;
    int n = 60 + static_cast<int>(seed) * 17;
    for (int i = 0; i < n; ++i) {
      double mu = rng.bernoulli(0.3) ? 6.0 : -1.0;
      xs.push_back(rng.normal(mu, 0.5 + 0.1 * static_cast<double>(seed)));
    }
    VbConfig cfg;
    cfg.rng_seed = seed;
    VbPosterior post = vb_fit(scalars(xs), cfg);
    CHECK(free_energy_monotone(post.free_energy_history));
    for (int r = 0; r < post.responsibilities.rows(); ++r) {
      CHECK(post.responsibilities.row(r).sum() == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("permuting the input leaves the converged fit unchanged") {
  std::vector<double> xs = two_cluster(120, 42);
  VbConfig cfg;
  VbPosterior a = vb_fit(scalars(xs), cfg);

  std::vector<double> rev(xs.rbegin(), xs.rend());
  VbPosterior b = vb_fit(scalars(rev), cfg);

  REQUIRE(a.alpha.size() == b.alpha.size());
  CHECK(std::abs(a.free_energy_history.back() - b.free_energy_history.back()) < 1e-9);
  // Row i of the reversed fit describes point n-1-i of the original.
  const int n = static_cast<int>(xs.size());
  for (int i = 0; i < n; ++i) {
    CHECK((a.responsibilities.row(i) - b.responsibilities.row(n - 1 - i)).cwiseAbs().maxCoeff() <
          1e-6);
  }
}

TEST_CASE("two clusters recovered and matching the em oracle") {
  std::vector<double> xs = two_cluster(200, 7);
  VbPosterior post = vb_fit(scalars(xs), VbConfig{});
  REQUIRE(post.alpha.size() == 2);

  Gmm gmm = extract_point_gmm(post);
  std::vector<double> means = {gmm.components[0].mean[0], gmm.components[1].mean[0]};
  std::sort(means.begin(), means.end());
  CHECK(means[0] == doctest::Approx(0.0).epsilon(0.1).scale(1.0));
  CHECK(means[1] == doctest::Approx(10.0).epsilon(0.01));

  oracle::EmResult em = oracle::em_fit_1d(xs, 2);
  std::vector<double> em_means = em.means;
  std::sort(em_means.begin(), em_means.end());
  CHECK(std::abs(means[0] - em_means[0]) < 0.1);
  CHECK(std::abs(means[1] - em_means[1]) < 0.1);

  // MAP assignments agree up to a global label swap.
  int lo_vb = gmm.components[0].mean[0] < gmm.components[1].mean[0] ? 0 : 1;
  int lo_em = em.means[0] < em.means[1] ? 0 : 1;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    bool vb_low = hard_assign(post, i) == lo_vb;
    bool em_low = em.map_assignment[i] == lo_em;
    agree += (vb_low == em_low);
  }
  CHECK(agree >= xs.size() * 99 / 100);

  // Richer initial capacity reaches at least the forced single-cluster bound.
  VbConfig one;
  one.max_components = 1;
  VbPosterior single = vb_fit(scalars(xs), one);
  CHECK(post.free_energy_history.back() >=
        single.free_energy_history.back() - 1e-8 * std::abs(single.free_energy_history.back()));
}

TEST_CASE("unimodal data with a conservative prior keeps one component") {
  Rng rng(11);
  std::vector<double> xs;
  for (int i = 0; i < 300; ++i) xs.push_back(rng.normal(0.0, 1.0));
  VbConfig cfg;
  cfg.nu0 = 3.0;
  cfg.S0 = Mat::Identity(1, 1) * (cfg.nu0 * 4.0);  // prior sigma twice the true one
  cfg.alpha0 = 0.1;  // sparse mixing prior so redundant components empty out
  VbPosterior post = vb_fit(scalars(xs), cfg);
  REQUIRE(post.alpha.size() == 1);
  Gmm gmm = extract_point_gmm(post);
  CHECK(gmm.components[0].weight == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(gmm.components[0].mean[0] == doctest::Approx(0.0).epsilon(0.2).scale(1.0));
  CHECK(gmm.components[0].covariance(0, 0) == doctest::Approx(1.0).epsilon(0.35));
}

TEST_CASE("fit is reproducible bit for bit") {
  std::vector<double> xs = two_cluster(150, 3);
  VbConfig cfg;
  cfg.rng_seed = 99;
  VbPosterior a = vb_fit(scalars(xs), cfg);
  VbPosterior b = vb_fit(scalars(xs), cfg);
  REQUIRE(a.free_energy_history.size() == b.free_energy_history.size());
  for (std::size_t i = 0; i < a.free_energy_history.size(); ++i) {
    CHECK(a.free_energy_history[i] == b.free_energy_history[i]);
  }
  CHECK((a.responsibilities - b.responsibilities).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("input validation") {
  VbConfig cfg;
  CHECK_THROWS_AS(vb_fit({}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(vb_fit({Vec::Zero(1)}, cfg), std::invalid_argument);

  std::vector<Vec> bad = scalars({0.0, 1.0, 2.0});
  bad[1][0] = NAN;
  bool named_offender = false;
  try {
    vb_fit(bad, cfg);
  } catch (const std::invalid_argument& e) {
    named_offender = std::string(e.what()).find("residual 1") != std::string::npos;
  }
  CHECK(named_offender);

  std::vector<Vec> ragged = scalars({0.0, 1.0});
  ragged.push_back(Vec::Zero(2));
  CHECK_THROWS_AS(vb_fit(ragged, cfg), std::invalid_argument);

  VbConfig zero_m = cfg;
  zero_m.max_components = 0;
  CHECK_THROWS_AS(vb_fit(scalars({0.0, 1.0}), zero_m), std::invalid_argument);

  VbConfig bad_s0 = cfg;
  bad_s0.S0 = Mat::Identity(2, 2);
  CHECK_THROWS_AS(vb_fit(scalars({0.0, 1.0}), bad_s0), std::invalid_argument);
}

TEST_CASE("point gmm extraction and assignment") {
  std::vector<double> xs = two_cluster(200, 13);
  VbPosterior post = vb_fit(scalars(xs), VbConfig{});
  Gmm gmm = extract_point_gmm(post);
  REQUIRE(gmm.size() == post.alpha.size());

  double alpha_sum = post.alpha.sum();
  double wsum = 0.0;
  for (std::size_t m = 0; m < gmm.size(); ++m) {
    CHECK(gmm.components[m].weight == doctest::Approx(post.alpha[m] / alpha_sum));
    CHECK((gmm.components[m].mean - post.m[m]).norm() == 0.0);
    Mat expect = post.S[m] / (post.nu[m] - 2.0);  // d = 1
    CHECK((gmm.components[m].covariance - expect).cwiseAbs().maxCoeff() <
          1e-12 * expect.cwiseAbs().maxCoeff() + 1e-15);
    CHECK(gmm.components[m].covariance(0, 0) >= kCovarianceFloor);
    wsum += gmm.components[m].weight;
  }
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));

  CHECK_THROWS_AS(hard_assign(post, xs.size()), std::out_of_range);

  Vec low(1), high(1);
  low << -0.2;
  high << 10.3;
  int lo = gmm.components[0].mean[0] < gmm.components[1].mean[0] ? 0 : 1;
  CHECK(hard_assign(gmm, low) == lo);
  CHECK(hard_assign(gmm, high) == 1 - lo);
}
