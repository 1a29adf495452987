#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sisynth/dataset.hpp"

namespace sisynth {

enum class TaskStatus : std::uint8_t { kPending, kAwaitingSecond, kAgreed, kDisagreement, kFinal };
std::string_view to_string(TaskStatus s);
TaskStatus parse_task_status(std::string_view s);

struct AnnotationTask {
  std::string task_id;
  std::string record_id;
  std::string text;
  Label model_label = Label::kNonSuicidal;
  std::map<std::string, Label> labels;  // annotator -> label
  std::vector<std::string> label_order;  // annotators in submission order
  TaskStatus status = TaskStatus::kPending;
  std::optional<Label> consensus_label;
  std::optional<std::string> note;
  /// "agreed" or "adjudicated" once Final.
  std::string resolution;
};

struct AnnotationSession {
  std::string session_id;
  std::string dataset_name;
  std::string dataset_hash;
  SchemaKind schema = SchemaKind::kBinary;
  std::array<std::string, 2> annotators;
  std::vector<AnnotationTask> tasks;
  std::string created_at;

  bool has_annotator(std::string_view id) const { return annotators[0] == id || annotators[1] == id; }
  const AnnotationTask& task(std::string_view task_id) const;
  std::map<TaskStatus, std::size_t> status_counts() const;
};

struct AgreementReport {
  std::size_t total = 0;
  std::size_t retained = 0;
  std::size_t relabeled = 0;
  std::size_t annotator_agreements = 0;
  double retention_rate = 0.0;
  double inter_annotator_agreement = 0.0;
  double kappa = 0.0;
};

nlohmann::json to_json(const AgreementReport& r);

/// retention = finalized labels equal to the model label / total;
/// agreement = tasks whose two raw labels match / total;
/// kappa = (p_o - p_e) / (1 - p_e) from the annotators' marginals, 0 when p_e = 1.
/// Throws kIncompleteSession unless every task is Final.
AgreementReport agreement_report(const AnnotationSession& session);

/// What one viewer may see of a task. Own label always; the other
/// annotator's label only after the viewer has submitted; the model label
/// only when Final. An empty viewer is an observer who sees labels only
/// when Final.
nlohmann::json redacted_view(const AnnotationSession& session, const AnnotationTask& task, std::string_view viewer);

/// Dual-annotator sessions. Every mutation is appended to a per-session
/// event log before it is applied; a service constructed on the same
/// directory replays the logs.
class AnnotationService {
 public:
  /// Without a state directory sessions live in memory only.
  explicit AnnotationService(std::optional<std::filesystem::path> state_dir = std::nullopt);

  /// One Pending task per record. Throws kSession for an empty dataset or
  /// equal or empty annotator ids.
  std::string open_session(const Dataset& dataset, const std::string& annotator_a, const std::string& annotator_b);

  /// Throws kNotFound, kAuthorization (foreign annotator), kConflict
  /// (repeat submission), kInvalidLabel (outside the schema).
  TaskStatus submit_label(const std::string& session_id, const std::string& task_id, const std::string& annotator,
                          Label label);

  /// Only Disagreement tasks can be resolved; anything else is kState.
  TaskStatus resolve(const std::string& session_id, const std::string& task_id, Label consensus,
                     const std::string& note);

  /// Tasks visible to `annotator`, optionally filtered by status. Throws
  /// kAuthorization for a non-empty foreign annotator.
  nlohmann::json task_views(const std::string& session_id, const std::string& annotator,
                            std::optional<TaskStatus> status = std::nullopt) const;

  AgreementReport report(const std::string& session_id) const;
  AnnotationSession snapshot(const std::string& session_id) const;
  std::vector<std::string> session_ids() const;
  nlohmann::json summary(const std::string& session_id) const;

 private:
  AnnotationSession& session_locked(const std::string& id);
  const AnnotationSession& session_locked(const std::string& id) const;
  void append_event(const std::string& session_id, const nlohmann::json& event);
  void apply(AnnotationSession& s, const nlohmann::json& event);
  void replay(const std::filesystem::path& log);

  std::optional<std::filesystem::path> state_dir_;
  mutable std::shared_mutex mu_;
  std::map<std::string, AnnotationSession> sessions_;
  std::size_t next_session_ = 1;
};

}  // namespace sisynth
