#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace did {

// Error categories. Each maps to a stable CLI exit code (see tools/).
enum class ErrorCode {
  Usage,
  Config,
  NonBinaryIndicator,
  NonFiniteValue,
  EmptyCell,
  EmptyGroup,
  InconsistentDimension,
  InvalidFoldCount,
  SingleClass,
  NoConvergence,
  DegeneratePath,
  DimensionOverflow,
  IncompatiblePair,
  EmptyTrainingCell,
  MissingNuisance,
  DegenerateDenominator,
  InfeasibleSpec,
  UnknownTarget,
  UnsupportedPair,
  SinglePeriod,
  Io,
};

const char* error_name(ErrorCode code);
int exit_code(ErrorCode code);

class DidError : public std::runtime_error {
 public:
  DidError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_name(code)) + ": " + message),
        code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw DidError(code, message);
}

// splitmix64; used to derive independent sub-seeds from a master seed.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return mix_seed(master ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b) {
  return derive_seed(derive_seed(master, a), b);
}

}  // namespace did
