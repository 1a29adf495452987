#include "sisynth/error.hpp"

namespace sisynth {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidLabel: return "invalid_label";
    case ErrorCode::kInvalidSpec: return "invalid_spec";
    case ErrorCode::kInvalidExemplars: return "invalid_exemplars";
    case ErrorCode::kInsufficientClass: return "insufficient_class";
    case ErrorCode::kAuth: return "auth";
    case ErrorCode::kTransport: return "transport";
    case ErrorCode::kProtocol: return "protocol";
    case ErrorCode::kNoPayload: return "no_payload";
    case ErrorCode::kIngest: return "ingest";
    case ErrorCode::kEmptyDataset: return "empty_dataset";
    case ErrorCode::kSplit: return "split";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kParameter: return "parameter";
    case ErrorCode::kComposition: return "composition";
    case ErrorCode::kInfeasibleFolds: return "infeasible_folds";
    case ErrorCode::kTrainer: return "trainer";
    case ErrorCode::kDegenerateData: return "degenerate_data";
    case ErrorCode::kExport: return "export";
    case ErrorCode::kInput: return "input";
    case ErrorCode::kLeakage: return "leakage";
    case ErrorCode::kSession: return "session";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kAuthorization: return "authorization";
    case ErrorCode::kState: return "state";
    case ErrorCode::kIncompleteSession: return "incomplete_session";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace sisynth
