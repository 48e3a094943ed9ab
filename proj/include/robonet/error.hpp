#pragma once

#include <stdexcept>
#include <cstdint>
#include <string>
#include <vector>

namespace robonet {

/// Base of every error raised by the library. Each subsystem throws a
/// distinct subclass so callers can dispatch on the failure kind.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ROBONET_DEFINE_ERROR(Name) \
  class Name : public Error {      \
   public:                         \
    using Error::Error;            \
  }

ROBONET_DEFINE_ERROR(InvalidAgentError);
ROBONET_DEFINE_ERROR(InvalidParameterError);
ROBONET_DEFINE_ERROR(CodecError);
ROBONET_DEFINE_ERROR(TopologyError);
ROBONET_DEFINE_ERROR(UnsupportedOperationError);
ROBONET_DEFINE_ERROR(RegistrationError);
ROBONET_DEFINE_ERROR(ModelError);
ROBONET_DEFINE_ERROR(NumericError);
ROBONET_DEFINE_ERROR(ShapeError);
ROBONET_DEFINE_ERROR(SpecError);
ROBONET_DEFINE_ERROR(ProtocolError);
ROBONET_DEFINE_ERROR(NonConvergenceError);
ROBONET_DEFINE_ERROR(CloudError);
ROBONET_DEFINE_ERROR(PlanError);
ROBONET_DEFINE_ERROR(FeasibilityError);
ROBONET_DEFINE_ERROR(BusyError);
ROBONET_DEFINE_ERROR(StaleJobError);
ROBONET_DEFINE_ERROR(ConfigError);
ROBONET_DEFINE_ERROR(TraceError);

#undef ROBONET_DEFINE_ERROR

/// A blocking receive gave up. Carries the senders that never delivered.
class TimeoutError : public Error {
 public:
  TimeoutError(const std::string& what, std::vector<int> missing, std::uint64_t round)
      : Error(what), missing_(std::move(missing)), round_(round) {}

  const std::vector<int>& missing() const { return missing_; }
  std::uint64_t round() const { return round_; }

 private:
  std::vector<int> missing_;
  std::uint64_t round_;
};

}  // namespace robonet
