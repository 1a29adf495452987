#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sisynth {

enum class ErrorCode {
  kInvalidLabel,
  kInvalidSpec,
  kInvalidExemplars,
  kInsufficientClass,
  kAuth,
  kTransport,
  kProtocol,
  kNoPayload,
  kIngest,
  kEmptyDataset,
  kSplit,
  kSchema,
  kParameter,
  kComposition,
  kInfeasibleFolds,
  kTrainer,
  kDegenerateData,
  kExport,
  kInput,
  kLeakage,
  kSession,
  kConflict,
  kAuthorization,
  kState,
  kIncompleteSession,
  kNotFound,
  kConfig,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-readable code so
/// callers (the CLI, the HTTP layer) can map it to exit codes and statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sisynth
