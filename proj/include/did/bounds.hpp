#pragma once

#include <cstdint>
#include <string>

#include "did/dgp.hpp"

namespace did {

// Monte Carlo estimate of E[psi(W; theta)^2] with oracle nuisances at the
// true theta; this is the semiparametric efficiency bound when the variant
// is Efficient, and the asymptotic variance of the variant's estimator
// otherwise.
struct BoundReport {
  Setting setting = Setting::CS1;
  Variant variant = Variant::Efficient;
  double bound = 0.0;
  double mc_std_error = 0.0;
  long n_mc = 0;
  std::uint64_t seed = 0;
};

// `setting` may differ from spec.setting when the spec's structure supports
// it (e.g. the CS-1 bound evaluated on a DGP satisfying CS-5, or a CS bound
// on the merged cross-section view of a panel spec).
BoundReport efficiency_bound_mc(const DgpSpec& spec, Setting setting,
                                Variant variant, long n_mc, std::uint64_t seed);

// Closed-form variance gaps and efficiency losses, each cross-checked
// against the difference of the corresponding bound estimates.
enum class DeltaPair {
  Cs1Cs2,
  Cs1Cs3,
  Cs1Cs4,
  Cs1Cs5,
  Pa1Pa2,
  Cs1Pa1,
  Cs5Pa1,
  LossPrimeCs2,
  LossPrimeCs4,
};

std::string to_string(DeltaPair pair);
DeltaPair parse_delta_pair(const std::string& text);

struct DeltaReport {
  DeltaPair pair = DeltaPair::Cs1Cs2;
  double closed_form = 0.0;
  double closed_form_se = 0.0;
  double from_bounds = 0.0;  // difference of the two bound estimates
  double from_bounds_se = 0.0;
  long n_mc = 0;
  std::uint64_t seed = 0;
};

DeltaReport delta_closed_form(DeltaPair pair, const DgpSpec& spec, long n_mc,
                              std::uint64_t seed);

}  // namespace did
