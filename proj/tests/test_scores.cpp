#include <cmath>

#include "did/dgp.hpp"
#include "did/scores.hpp"
#include "doctest.h"

using namespace did;

namespace {

// one observation per cell: y(1,1)=5, y(1,0)=2, y(0,1)=3, y(0,0)=1
CrossSectionDataset four_cell_data() {
  Eigen::VectorXd y(4);
  Eigen::VectorXi d(4), t(4);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(4, 1);
  y << 5, 2, 3, 1;
  d << 1, 1, 0, 0;
  t << 1, 0, 1, 0;
  return validate_cross_section(y, d, t, x);
}

}  // namespace

TEST_CASE("difference in cell means by hand") {
  auto data = four_cell_data();
  NuisanceEstimates est;
  fill_scalars(data, est);
  auto res = estimate(data, est, Setting::CS5, Variant::DiffMeans);
  CHECK(res.theta_hat == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.mean_psi_b == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.n == 4);
}

TEST_CASE("panel difference in group means by hand") {
  Eigen::VectorXd y0(2), y1(2);
  Eigen::VectorXi d(2);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 1);
  y0 << 1, 2;
  y1 << 5, 3;  // delta_y = 4 (treated), 1 (control)
  d << 1, 0;
  auto data = validate_panel(y0, y1, d, x);
  NuisanceEstimates est;
  fill_scalars(data, est);
  auto res = estimate(data, est, Setting::PA2, Variant::DiffMeans);
  CHECK(res.theta_hat == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("efficient score is exact when outcomes equal their cell means") {
  auto data = four_cell_data();
  NuisanceEstimates est;
  fill_scalars(data, est);
  // m_Y(d,t,x) constant and equal to the observed cell values, so the
  // residual part vanishes and m_did = 5 - 2 - 3 + 1 = 1 identically
  const double cell_value[2][2] = {{1, 3}, {2, 5}};
  for (int dd = 0; dd < 2; ++dd)
    for (int tt = 0; tt < 2; ++tt)
      est.m_y[dd][tt] = Eigen::VectorXd::Constant(4, cell_value[dd][tt]);
  auto res = estimate(data, est, Setting::CS5, Variant::Efficient);
  CHECK(res.theta_hat == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.std_error == doctest::Approx(0.0));
}

TEST_CASE("difference in means equals the efficient CS-5 score under full-sample cell means") {
  DgpSpec spec = default_spec(Setting::CS5);
  spec.n = 200;
  spec.seed = 42;
  auto data = generate_cross_section(spec);
  NuisanceEstimates dm;
  fill_scalars(data, dm);
  NuisanceEstimates eff = dm;
  for (int dd = 0; dd < 2; ++dd)
    for (int tt = 0; tt < 2; ++tt) {
      double sum = 0.0;
      int count = 0;
      for (int i = 0; i < data.n(); ++i)
        if (data.d[i] == dd && data.t[i] == tt) {
          sum += data.y[i];
          ++count;
        }
      eff.m_y[dd][tt] = Eigen::VectorXd::Constant(data.n(), sum / count);
    }
  auto a = estimate(data, dm, Setting::CS5, Variant::DiffMeans);
  auto b = estimate(data, eff, Setting::CS5, Variant::Efficient);
  CHECK(a.theta_hat == doctest::Approx(b.theta_hat).epsilon(1e-12));
}

TEST_CASE("redundant regressions cancel exactly in the adjusted scores") {
  struct Case {
    Setting dgp;
    Setting setting;
    Variant variant;
  };
  for (const Case& c : {Case{Setting::CS1, Setting::CS1, Variant::Efficient},
                        Case{Setting::CS1, Setting::CS1, Variant::Star2},
                        Case{Setting::CS1, Setting::CS1, Variant::Star3},
                        Case{Setting::CS2, Setting::CS2, Variant::PrimeCS2},
                        Case{Setting::CS4, Setting::CS4, Variant::PrimeCS4}}) {
    CAPTURE(to_string(c.setting) + "/" + to_string(c.variant));
    DgpSpec spec = default_spec(c.dgp);
    spec.n = 300;
    spec.seed = 7;
    auto data = generate_cross_section(spec);
    auto oracle = oracle_nuisances(spec);
    auto est = oracle.evaluate(data, c.setting, c.variant, true);
    auto base = evaluate_scores(data, est, c.setting, c.variant);
    auto req = required_nuisances(c.setting, c.variant);
    for (int dd = 0; dd < 2; ++dd)
      for (int tt = 0; tt < 2; ++tt)
        if (req.m_y_optional[dd][tt]) est.m_y[dd][tt].array() += 11.5;
    auto perturbed = evaluate_scores(data, est, c.setting, c.variant);
    CHECK((base.psi_num - perturbed.psi_num).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK((base.psi_b - perturbed.psi_b).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("redundant treated-group trend cancels in the PA-1 score") {
  DgpSpec spec = default_spec(Setting::PA1);
  spec.n = 300;
  spec.seed = 7;
  auto data = generate_panel(spec);
  auto oracle = oracle_nuisances(spec);
  auto est = oracle.evaluate(data, Setting::PA1, Variant::Efficient, true);
  REQUIRE(est.m_dy[1].size() == data.n());
  auto base = evaluate_scores(data, est, Setting::PA1, Variant::Efficient);
  est.m_dy[1].array() += -4.25;
  auto perturbed = evaluate_scores(data, est, Setting::PA1, Variant::Efficient);
  CHECK((base.psi_num - perturbed.psi_num).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("oracle scores center at the truth with unit mean denominator") {
  for (Setting s : {Setting::CS1, Setting::CS2, Setting::CS3, Setting::CS4,
                    Setting::CS5, Setting::PA1, Setting::PA2}) {
    CAPTURE(to_string(s));
    DgpSpec spec = default_spec(s);
    spec.n = 20000;
    spec.seed = 1234;
    auto oracle = oracle_nuisances(spec);
    EstimateResult res;
    if (is_panel(s)) {
      auto data = generate_panel(spec);
      res = estimate(data, oracle.evaluate(data, s, Variant::Efficient), s,
                     Variant::Efficient);
    } else {
      auto data = generate_cross_section(spec);
      res = estimate(data, oracle.evaluate(data, s, Variant::Efficient), s,
                     Variant::Efficient);
    }
    CHECK(std::abs(res.theta_hat - oracle.theta_true) <= 4.0 * res.std_error);
    CHECK(res.mean_psi_b == doctest::Approx(1.0).epsilon(0.08));
  }
}

TEST_CASE("estimates are equivariant to shifting the outcome") {
  struct Case {
    Setting setting;
    Variant variant;
  };
  for (const Case& c :
       {Case{Setting::CS1, Variant::Efficient}, Case{Setting::CS1, Variant::Star2},
        Case{Setting::CS1, Variant::Star3}, Case{Setting::CS2, Variant::Efficient},
        Case{Setting::CS2, Variant::PrimeCS2}, Case{Setting::CS3, Variant::Efficient},
        Case{Setting::CS4, Variant::Efficient}, Case{Setting::CS5, Variant::Efficient},
        Case{Setting::CS5, Variant::DiffMeans}}) {
    CAPTURE(to_string(c.setting) + "/" + to_string(c.variant));
    DgpSpec spec = default_spec(c.setting);
    spec.n = 400;
    spec.seed = 99;
    auto data = generate_cross_section(spec);
    auto oracle = oracle_nuisances(spec);
    auto est = oracle.evaluate(data, c.setting, c.variant, true);
    // sample cell shares (exact cancellation needs the empirical weights)
    fill_scalars(data, est);
    auto res = estimate(data, est, c.setting, c.variant);

    const double shift = 100.0;
    CrossSectionDataset shifted = data;
    shifted.y.array() += shift;
    NuisanceEstimates est_shifted = est;
    for (int dd = 0; dd < 2; ++dd)
      for (int tt = 0; tt < 2; ++tt)
        if (est_shifted.m_y[dd][tt].size() > 0)
          est_shifted.m_y[dd][tt].array() += shift;
    auto res_shifted = estimate(shifted, est_shifted, c.setting, c.variant);
    CHECK(res.theta_hat == doctest::Approx(res_shifted.theta_hat).epsilon(1e-9));
  }
}

TEST_CASE("inverse probability weighting matches the hand example") {
  auto data = four_cell_data();
  NuisanceEstimates est;
  fill_scalars(data, est);
  est.p_d_x = Eigen::VectorXd::Constant(4, 0.5);
  auto res = ipw_estimate(data, est);
  CHECK(res.theta_hat == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.variant == Variant::IpwBenchmark);
}

TEST_CASE("missing nuisances are reported") {
  auto data = four_cell_data();
  NuisanceEstimates est;
  fill_scalars(data, est);
  CHECK_THROWS_WITH_AS(estimate(data, est, Setting::CS4, Variant::Efficient),
                       doctest::Contains("MissingNuisance"), DidError);
}
