#include <cmath>

#include "did/dgp.hpp"
#include "doctest.h"

using namespace did;

namespace {

LinearFunction lf(double intercept, std::initializer_list<double> slope) {
  LinearFunction f;
  f.intercept = intercept;
  f.slope = Eigen::VectorXd(static_cast<int>(slope.size()));
  int j = 0;
  for (double s : slope) f.slope[j++] = s;
  return f;
}

Eigen::VectorXd point(std::initializer_list<double> values) {
  Eigen::VectorXd x(static_cast<int>(values.size()));
  int j = 0;
  for (double v : values) x[j++] = v;
  return x;
}

}  // namespace

TEST_CASE("default specs are feasible for every setting") {
  for (Setting s : {Setting::CS1, Setting::CS2, Setting::CS3, Setting::CS4,
                    Setting::CS5, Setting::PA1, Setting::PA2}) {
    CAPTURE(to_string(s));
    CHECK_NOTHROW(validate_spec(default_spec(s)));
  }
}

TEST_CASE("structural violations are rejected") {
  SUBCASE("effect loading on the selection covariate") {
    DgpSpec spec = default_spec(Setting::CS4);
    spec.effect = lf(1.0, {0.3, 0.5});
    CHECK_THROWS_AS(validate_spec(spec), DidError);
  }
  SUBCASE("selection loading beyond the first covariate") {
    DgpSpec spec = default_spec(Setting::CS4);
    spec.pd_index = lf(0.0, {0.5, 0.4});
    CHECK_THROWS_AS(validate_spec(spec), DidError);
  }
  SUBCASE("propensity leaving the overlap band") {
    DgpSpec spec = default_spec(Setting::CS4);
    spec.pd_index = lf(0.0, {3.0});
    CHECK_THROWS_WITH_AS(validate_spec(spec),
                         doctest::Contains("InfeasibleSpec"), DidError);
  }
}

TEST_CASE("generation is deterministic in the seed") {
  DgpSpec spec = default_spec(Setting::CS2);
  spec.n = 500;
  spec.seed = 31;
  auto a = generate_cross_section(spec);
  auto b = generate_cross_section(spec);
  CHECK(a.y == b.y);
  CHECK(a.d == b.d);
  CHECK(a.t == b.t);
  CHECK(a.x == b.x);
  spec.seed = 32;
  auto c = generate_cross_section(spec);
  CHECK(a.y != c.y);
}

TEST_CASE("generated outcomes track the oracle cell means with unit slope") {
  DgpSpec spec = default_spec(Setting::CS4);
  spec.n = 100000;
  spec.seed = 77;
  auto data = generate_cross_section(spec);
  auto oracle = oracle_nuisances(spec);
  for (int dd = 0; dd < 2; ++dd)
    for (int tt = 0; tt < 2; ++tt) {
      CAPTURE(dd);
      CAPTURE(tt);
      double sy = 0, sm = 0, syy = 0, smm = 0, sym = 0;
      long count = 0;
      for (int i = 0; i < data.n(); ++i) {
        if (data.d[i] != dd || data.t[i] != tt) continue;
        const double m = oracle.m_y[dd][tt](data.x.row(i).transpose());
        sy += data.y[i];
        sm += m;
        smm += m * m;
        sym += data.y[i] * m;
        ++count;
      }
      const double slope = (sym - sy * sm / count) / (smm - sm * sm / count);
      CHECK(slope == doctest::Approx(1.0).epsilon(0.02));
    }
}

TEST_CASE("the effect is mean independent of the selection index") {
  // theta equals the q1-weighted mean of m_did because heterogeneity loads
  // only on covariates independent of selection
  DgpSpec spec = default_spec(Setting::CS4);
  spec.n = 200000;
  spec.seed = 5;
  auto data = generate_cross_section(spec);
  auto oracle = oracle_nuisances(spec);
  double num = 0, den = 0;
  for (int i = 0; i < data.n(); ++i) {
    const Eigen::VectorXd x = data.x.row(i).transpose();
    const double q1 = oracle.p_d_x(x) * oracle.p_t;
    const double m_did = oracle.m_y[1][1](x) - oracle.m_y[1][0](x) -
                         oracle.m_y[0][1](x) + oracle.m_y[0][0](x);
    num += q1 * m_did;
    den += q1;
  }
  CHECK(num / den == doctest::Approx(oracle.theta_true).epsilon(0.01));
}

TEST_CASE("panel noise structure") {
  SUBCASE("rho = 1 makes the trend deterministic") {
    DgpSpec spec = default_spec(Setting::PA1);
    spec.rho = 1.0;
    spec.n = 2000;
    spec.seed = 8;
    auto data = generate_panel(spec);
    auto oracle = oracle_nuisances(spec);
    for (int i = 0; i < data.n(); ++i) {
      const double m = oracle.m_dy[data.d[i]](data.x.row(i).transpose());
      CHECK(std::abs(data.y1[i] - data.y0[i] - m) < 1e-9);
    }
  }
  SUBCASE("rho = 0 gives Var(delta y) = 2 sigma^2") {
    DgpSpec spec = default_spec(Setting::PA2);
    spec.rho = 0.0;
    spec.sigma = 1.5;
    spec.n = 100000;
    spec.seed = 9;
    auto data = generate_panel(spec);
    auto oracle = oracle_nuisances(spec);
    double ss = 0;
    for (int i = 0; i < data.n(); ++i) {
      const double r = data.y1[i] - data.y0[i] -
                       oracle.m_dy[data.d[i]](data.x.row(i).transpose());
      ss += r * r;
    }
    CHECK(ss / data.n() == doctest::Approx(2 * 1.5 * 1.5).epsilon(0.05));
  }
}

TEST_CASE("cross-section view of a panel") {
  DgpSpec spec = default_spec(Setting::PA1);
  spec.n = 20000;
  spec.seed = 17;
  auto panel = generate_panel(spec);
  auto view = cross_section_view(panel, 99);
  REQUIRE(view.n() == panel.n());
  double t_mean = 0;
  for (int i = 0; i < view.n(); ++i) {
    CHECK(view.d[i] == panel.d[i]);
    CHECK(view.y[i] == (view.t[i] == 1 ? panel.y1[i] : panel.y0[i]));
    t_mean += view.t[i];
  }
  CHECK(t_mean / view.n() == doctest::Approx(0.5).epsilon(0.03));

  auto oracle = cross_section_view_oracle(spec);
  CHECK(oracle.p_t == doctest::Approx(0.5));
  auto x = point({0.4, -1.0, 0.2});
  auto base_oracle = oracle_nuisances(spec);
  CHECK(oracle.cell_prop[1][1](x) ==
        doctest::Approx(0.5 * base_oracle.p_d_x(x)).epsilon(1e-12));
  CHECK(oracle.cell_prop[0][0](x) ==
        doctest::Approx(0.5 * (1.0 - base_oracle.p_d_x(x))).epsilon(1e-12));
}

TEST_CASE("oracle evaluate can skip the cancelling cells") {
  DgpSpec spec = default_spec(Setting::CS1);
  spec.n = 50;
  auto data = generate_cross_section(spec);
  auto oracle = oracle_nuisances(spec);
  auto with = oracle.evaluate(data, Setting::CS1, Variant::Efficient, true);
  auto without = oracle.evaluate(data, Setting::CS1, Variant::Efficient, false);
  CHECK(with.m_y[1][1].size() == data.n());
  CHECK(without.m_y[1][1].size() == 0);
  CHECK(without.m_y[0][0].size() == data.n());
}

TEST_CASE("misspecification modes") {
  DgpSpec spec = default_spec(Setting::CS4);
  auto oracle = oracle_nuisances(spec);
  auto x1 = point({2.0, 1.0, 0.0});
  auto x2 = point({-1.0, 1.0, 0.0});

  SUBCASE("constant replaces the function by its population mean") {
    auto bad = misspecify(oracle, "m_y_0_0", MisspecMode::Constant);
    CHECK(bad.m_y[0][0](x1) == doctest::Approx(bad.m_y[0][0](x2)).epsilon(1e-12));
    CHECK(bad.m_y[0][0](x1) != doctest::Approx(oracle.m_y[0][0](x1)));
    // the other functions are untouched
    CHECK(bad.p_d_x(x1) == doctest::Approx(oracle.p_d_x(x1)).epsilon(1e-12));
  }
  SUBCASE("wrong link stays a probability but differs") {
    auto bad = misspecify(oracle, "p_d_x", MisspecMode::WrongLink);
    const double v = bad.p_d_x(x1);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    CHECK(v != doctest::Approx(oracle.p_d_x(x1)).epsilon(1e-6));
  }
  SUBCASE("omitting the first covariate") {
    auto bad = misspecify(oracle, "m_y_0_0", MisspecMode::OmitCovariate);
    CHECK(bad.m_y[0][0](x1) ==
          doctest::Approx(oracle.m_y[0][0](point({0.0, 1.0, 0.0}))).epsilon(1e-12));
  }
  SUBCASE("unknown target") {
    CHECK_THROWS_AS(misspecify(oracle, "m_y_9_9", MisspecMode::Constant), DidError);
  }
}

TEST_CASE("theta_true reads the effect intercept") {
  DgpSpec spec = default_spec(Setting::CS4);
  CHECK(spec.theta_true() == doctest::Approx(1.0));
  spec.effect.intercept = -0.25;
  CHECK(spec.theta_true() == doctest::Approx(-0.25));
}
