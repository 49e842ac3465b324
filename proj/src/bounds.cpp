#include <cmath>
#include <random>

#include "did/bounds.hpp"
#include "did/scores.hpp"

namespace did {

namespace {

constexpr long kBatch = 200000;

struct Accumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  long count = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++count;
  }
  double mean() const { return sum / count; }
  double std_error() const {
    const double var = sum_sq / count - mean() * mean();
    return std::sqrt(std::max(var, 0.0) / count);
  }
};

void accumulate_scores(const ScoreEvaluation& ev, double theta, Accumulator& acc) {
  for (int i = 0; i < ev.n(); ++i) {
    const double psi = ev.psi_num[i] - ev.psi_b[i] * theta;
    acc.add(psi * psi);
  }
}

}  // namespace

BoundReport efficiency_bound_mc(const DgpSpec& spec, Setting setting,
                                Variant variant, long n_mc, std::uint64_t seed) {
  if (n_mc < 1) fail(ErrorCode::Config, "n_mc must be positive");
  const bool via_view = is_panel(spec.setting) && !is_panel(setting);
  const OracleNuisances oracle =
      via_view ? cross_section_view_oracle(spec) : oracle_nuisances(spec);

  Accumulator acc;
  long done = 0;
  int batch_index = 0;
  while (done < n_mc) {
    const long batch = std::min(kBatch, n_mc - done);
    DgpSpec batch_spec = spec;
    batch_spec.n = static_cast<int>(batch);
    batch_spec.seed = derive_seed(seed, 0x626f756e64ULL, batch_index);
    if (is_panel(spec.setting)) {
      const PanelDataset panel = generate_panel(batch_spec);
      if (via_view) {
        const CrossSectionDataset view = cross_section_view(
            panel, derive_seed(seed, 0x76626e64ULL, batch_index));
        const NuisanceEstimates est = oracle.evaluate(view, setting, variant);
        accumulate_scores(evaluate_scores(view, est, setting, variant),
                          oracle.theta_true, acc);
      } else {
        const NuisanceEstimates est = oracle.evaluate(panel, setting, variant);
        accumulate_scores(evaluate_scores(panel, est, setting, variant),
                          oracle.theta_true, acc);
      }
    } else {
      if (is_panel(setting))
        fail(ErrorCode::UnsupportedPair,
             "panel bound requested on a cross-section spec");
      const CrossSectionDataset data = generate_cross_section(batch_spec);
      const NuisanceEstimates est = oracle.evaluate(data, setting, variant);
      accumulate_scores(evaluate_scores(data, est, setting, variant),
                        oracle.theta_true, acc);
    }
    done += batch;
    ++batch_index;
  }

  BoundReport report;
  report.setting = setting;
  report.variant = variant;
  report.bound = acc.mean();
  report.mc_std_error = acc.std_error();
  report.n_mc = n_mc;
  report.seed = seed;
  return report;
}

std::string to_string(DeltaPair pair) {
  switch (pair) {
    case DeltaPair::Cs1Cs2: return "cs1-cs2";
    case DeltaPair::Cs1Cs3: return "cs1-cs3";
    case DeltaPair::Cs1Cs4: return "cs1-cs4";
    case DeltaPair::Cs1Cs5: return "cs1-cs5";
    case DeltaPair::Pa1Pa2: return "pa1-pa2";
    case DeltaPair::Cs1Pa1: return "cs1-pa1";
    case DeltaPair::Cs5Pa1: return "cs5-pa1";
    case DeltaPair::LossPrimeCs2: return "loss-prime-cs2";
    case DeltaPair::LossPrimeCs4: return "loss-prime-cs4";
  }
  return "?";
}

DeltaPair parse_delta_pair(const std::string& text) {
  for (DeltaPair pair :
       {DeltaPair::Cs1Cs2, DeltaPair::Cs1Cs3, DeltaPair::Cs1Cs4,
        DeltaPair::Cs1Cs5, DeltaPair::Pa1Pa2, DeltaPair::Cs1Pa1,
        DeltaPair::Cs5Pa1, DeltaPair::LossPrimeCs2, DeltaPair::LossPrimeCs4})
    if (to_string(pair) == text) return pair;
  fail(ErrorCode::UnsupportedPair, "unknown delta pair " + text);
}

DeltaReport delta_closed_form(DeltaPair pair, const DgpSpec& spec, long n_mc,
                              std::uint64_t seed) {
  const bool panel_pair = pair == DeltaPair::Pa1Pa2 || pair == DeltaPair::Cs1Pa1 ||
                          pair == DeltaPair::Cs5Pa1;
  if (panel_pair != is_panel(spec.setting))
    fail(ErrorCode::UnsupportedPair,
         to_string(pair) + " needs a " + (panel_pair ? "panel" : "cross-section") +
             " spec");
  const OracleNuisances o = oracle_nuisances(spec);
  const double theta = o.theta_true;

  auto need = [&](const NuisanceFn& f, const char* name) -> const NuisanceFn& {
    if (!f)
      fail(ErrorCode::UnsupportedPair,
           std::string("spec structure lacks ") + name + " for " + to_string(pair));
    return f;
  };

  // the displayed integrand of the corollary, averaged over the law of X
  std::function<double(const Eigen::VectorXd&)> integrand;
  auto m_did = [&](const Eigen::VectorXd& x) {
    return o.m_y[1][1](x) - o.m_y[1][0](x) - o.m_y[0][1](x) + o.m_y[0][0](x);
  };
  auto m_delta = [&](const Eigen::VectorXd& x) {
    return o.m_dy[1](x) - o.m_dy[0](x);
  };
  switch (pair) {
    case DeltaPair::Cs1Cs2:
    case DeltaPair::LossPrimeCs2: {
      need(o.p_d_x, "p_D(x)");
      need(o.p_t_x, "p_T(x)");
      integrand = [&, theta](const Eigen::VectorXd& x) {
        const double pd = o.p_d_x(x), pt = o.p_t_x(x);
        const double dev = m_did(x) - theta;
        return pd * pd * pt * pt / (o.p_dt * o.p_dt) * dev * dev *
               (1.0 / (pd * pt) - 1.0 / pd - 1.0 / pt + 1.0);
      };
      break;
    }
    case DeltaPair::Cs1Cs3: {
      need(o.p_d_given_t[1], "p_D(1,x)");
      integrand = [&, theta](const Eigen::VectorXd& x) {
        const double pd1 = o.p_d_given_t[1](x);
        const double dev = m_did(x) - theta;
        return pd1 * pd1 / (o.p_d1 * o.p_d1) * dev * dev * (1.0 / o.p_t - 1.0);
      };
      break;
    }
    case DeltaPair::Cs1Cs4: {
      need(o.p_d_x, "p_D(x)");
      integrand = [&, theta](const Eigen::VectorXd& x) {
        const double pd = o.p_d_x(x);
        const double dev = m_did(x) - theta;
        return pd * pd / (o.p_d * o.p_d) * dev * dev / pd * (1.0 / o.p_t - 1.0);
      };
      break;
    }
    case DeltaPair::Cs1Cs5:
      integrand = [&, theta](const Eigen::VectorXd& x) {
        const double dev = m_did(x) - theta;
        return dev * dev * (1.0 / (o.p_d * o.p_t) - 1.0);
      };
      break;
    case DeltaPair::Pa1Pa2:
      integrand = [&, theta](const Eigen::VectorXd& x) {
        const double dev = m_delta(x) - theta;
        return dev * dev * (1.0 / o.p_d - 1.0);
      };
      break;
    case DeltaPair::Cs1Pa1: {
      need(o.p_d_x, "p_D(x)");
      need(o.var_sum[0], "Var(Y(1)+Y(0)|D,x)");
      integrand = [&, theta](const Eigen::VectorXd& x) {
        const double pd = o.p_d_x(x);
        const double dev = m_delta(x) - theta;
        return pd * pd / (o.p_d * o.p_d) *
               (o.var_sum[1](x) / pd + o.var_sum[0](x) / (1.0 - pd) +
                dev * dev / pd);
      };
      break;
    }
    case DeltaPair::Cs5Pa1: {
      need(o.var_sum[0], "Var(Y(1)+Y(0)|D,x)");
      integrand = [&, theta](const Eigen::VectorXd& x) {
        const double dev = m_delta(x) - theta;
        return o.var_sum[1](x) / o.p_d + o.var_sum[0](x) / (1.0 - o.p_d) +
               dev * dev * (1.0 - 1.0 / o.p_d);
      };
      break;
    }
    case DeltaPair::LossPrimeCs4: {
      need(o.p_d_x, "p_D(x)");
      integrand = [&](const Eigen::VectorXd& x) {
        const double pd = o.p_d_x(x);
        const double term = std::sqrt((1.0 - o.p_t) / o.p_t) * o.m_y[1][1](x) +
                            std::sqrt(o.p_t / (1.0 - o.p_t)) * o.m_y[1][0](x);
        return pd * pd / (o.p_d * o.p_d) * term * term / pd;
      };
      break;
    }
  }

  // average the integrand over X ~ N(0, I_p)
  Accumulator acc;
  std::mt19937_64 gen(derive_seed(seed, 0x64656c7461ULL));
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(spec.p);
  for (long i = 0; i < n_mc; ++i) {
    for (int j = 0; j < spec.p; ++j) x[j] = normal(gen);
    acc.add(integrand(x));
  }

  DeltaReport report;
  report.pair = pair;
  report.closed_form = acc.mean();
  report.closed_form_se = acc.std_error();
  report.n_mc = n_mc;
  report.seed = seed;

  // cross-check against the difference of the two bound estimates
  auto bound = [&](Setting s, Variant v, std::uint64_t stream) {
    return efficiency_bound_mc(spec, s, v, n_mc, derive_seed(seed, stream));
  };
  BoundReport hi, lo;
  switch (pair) {
    case DeltaPair::Cs1Cs2:
      hi = bound(Setting::CS1, Variant::Efficient, 1);
      lo = bound(Setting::CS2, Variant::Efficient, 2);
      break;
    case DeltaPair::Cs1Cs3:
      hi = bound(Setting::CS1, Variant::Efficient, 1);
      lo = bound(Setting::CS3, Variant::Efficient, 2);
      break;
    case DeltaPair::Cs1Cs4:
      hi = bound(Setting::CS1, Variant::Efficient, 1);
      lo = bound(Setting::CS4, Variant::Efficient, 2);
      break;
    case DeltaPair::Cs1Cs5:
      hi = bound(Setting::CS1, Variant::Efficient, 1);
      lo = bound(Setting::CS5, Variant::Efficient, 2);
      break;
    case DeltaPair::Pa1Pa2:
      hi = bound(Setting::PA1, Variant::Efficient, 1);
      lo = bound(Setting::PA2, Variant::Efficient, 2);
      break;
    case DeltaPair::Cs1Pa1:
      hi = bound(Setting::CS1, Variant::Efficient, 1);
      lo = bound(Setting::PA1, Variant::Efficient, 2);
      break;
    case DeltaPair::Cs5Pa1:
      hi = bound(Setting::CS5, Variant::Efficient, 1);
      lo = bound(Setting::PA1, Variant::Efficient, 2);
      break;
    case DeltaPair::LossPrimeCs2:
      hi = bound(Setting::CS2, Variant::PrimeCS2, 1);
      lo = bound(Setting::CS2, Variant::Efficient, 2);
      break;
    case DeltaPair::LossPrimeCs4:
      hi = bound(Setting::CS4, Variant::PrimeCS4, 1);
      lo = bound(Setting::CS4, Variant::Efficient, 2);
      break;
  }
  report.from_bounds = hi.bound - lo.bound;
  report.from_bounds_se =
      std::sqrt(hi.mc_std_error * hi.mc_std_error + lo.mc_std_error * lo.mc_std_error);
  return report;
}

}  // namespace did
