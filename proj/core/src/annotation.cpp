#include "sisynth/annotation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "sisynth/error.hpp"
#include "sisynth/llm_gateway.hpp"

namespace sisynth {
namespace {

constexpr std::string_view kLogSuffix = ".events.jsonl";

std::string task_id_for(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "task-%04zu", index + 1);
  return buf;
}

AnnotationTask& find_task(AnnotationSession& s, const std::string& task_id) {
  for (auto& t : s.tasks) {
    if (t.task_id == task_id) return t;
  }
  throw Error(ErrorCode::kNotFound, "no task " + task_id + " in " + s.session_id);
}

void check_submission(const AnnotationSession& s, const AnnotationTask& t, const std::string& annotator, Label label) {
  if (!s.has_annotator(annotator)) {
    throw Error(ErrorCode::kAuthorization, "annotator " + annotator + " is not part of " + s.session_id);
  }
  if (t.labels.contains(annotator)) {
    throw Error(ErrorCode::kConflict, "annotator " + annotator + " already labeled " + t.task_id);
  }
  if (!LabelSchema::of(s.schema).contains(label)) {
    throw Error(ErrorCode::kInvalidLabel, std::string(label_name(label)) + " is not a " +
                                              std::string(to_string(s.schema)) + " label");
  }
}

void check_resolution(const AnnotationSession& s, const AnnotationTask& t, Label label) {
  if (t.status != TaskStatus::kDisagreement) {
    throw Error(ErrorCode::kState, "task " + t.task_id + " is " + std::string(to_string(t.status)) +
                                       "; only Disagreement tasks can be resolved");
  }
  if (!LabelSchema::of(s.schema).contains(label)) {
    throw Error(ErrorCode::kInvalidLabel, std::string(label_name(label)) + " is not a " +
                                              std::string(to_string(s.schema)) + " label");
  }
}

nlohmann::json session_to_json(const AnnotationSession& s) {
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& t : s.tasks) {
    tasks.push_back({{"task_id", t.task_id},
                     {"record_id", t.record_id},
                     {"text", t.text},
                     {"model_label", label_name(t.model_label)}});
  }
  return {{"session_id", s.session_id}, {"dataset_name", s.dataset_name}, {"dataset_hash", s.dataset_hash},
          {"schema", to_string(s.schema)}, {"annotators", s.annotators}, {"created_at", s.created_at},
          {"tasks", tasks}};
}

AnnotationSession session_from_json(const nlohmann::json& j) {
  AnnotationSession s;
  s.session_id = j.at("session_id").get<std::string>();
  s.dataset_name = j.at("dataset_name").get<std::string>();
  s.dataset_hash = j.at("dataset_hash").get<std::string>();
  s.schema = parse_schema_kind(j.at("schema").get<std::string>());
  s.annotators = j.at("annotators").get<std::array<std::string, 2>>();
  s.created_at = j.at("created_at").get<std::string>();
  for (const auto& t : j.at("tasks")) {
    AnnotationTask task;
    task.task_id = t.at("task_id").get<std::string>();
    task.record_id = t.at("record_id").get<std::string>();
    task.text = t.at("text").get<std::string>();
    task.model_label = parse_label(t.at("model_label").get<std::string>());
    s.tasks.push_back(std::move(task));
  }
  return s;
}

std::size_t session_number(const std::string& id) {
  constexpr std::string_view prefix = "session-";
  if (id.rfind(prefix, 0) != 0) return 0;
  try {
    return std::stoul(id.substr(prefix.size()));
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

std::string_view to_string(TaskStatus s) {
  switch (s) {
    case TaskStatus::kPending: return "Pending";
    case TaskStatus::kAwaitingSecond: return "AwaitingSecond";
    case TaskStatus::kAgreed: return "Agreed";
    case TaskStatus::kDisagreement: return "Disagreement";
    case TaskStatus::kFinal: return "Final";
  }
  return "";
}

TaskStatus parse_task_status(std::string_view s) {
  for (auto st : {TaskStatus::kPending, TaskStatus::kAwaitingSecond, TaskStatus::kAgreed, TaskStatus::kDisagreement,
                  TaskStatus::kFinal}) {
    if (s == to_string(st)) return st;
  }
  throw Error(ErrorCode::kParameter, "unknown task status: " + std::string(s));
}

const AnnotationTask& AnnotationSession::task(std::string_view task_id) const {
  for (const auto& t : tasks) {
    if (t.task_id == task_id) return t;
  }
  throw Error(ErrorCode::kNotFound, "no task " + std::string(task_id) + " in " + session_id);
}

std::map<TaskStatus, std::size_t> AnnotationSession::status_counts() const {
  std::map<TaskStatus, std::size_t> counts = {{TaskStatus::kPending, 0},
                                              {TaskStatus::kAwaitingSecond, 0},
                                              {TaskStatus::kAgreed, 0},
                                              {TaskStatus::kDisagreement, 0},
                                              {TaskStatus::kFinal, 0}};
  for (const auto& t : tasks) ++counts[t.status];
  return counts;
}

nlohmann::json to_json(const AgreementReport& r) {
  return {{"total", r.total},
          {"retained", r.retained},
          {"relabeled", r.relabeled},
          {"annotator_agreements", r.annotator_agreements},
          {"retention_rate", r.retention_rate},
          {"inter_annotator_agreement", r.inter_annotator_agreement},
          {"kappa", r.kappa}};
}

AgreementReport agreement_report(const AnnotationSession& session) {
  AgreementReport r;
  r.total = session.tasks.size();
  std::size_t unfinished = 0;
  std::map<Label, std::size_t> marginal_a;
  std::map<Label, std::size_t> marginal_b;
  for (const auto& t : session.tasks) {
    if (t.status != TaskStatus::kFinal || !t.consensus_label) {
      ++unfinished;
      continue;
    }
    if (*t.consensus_label == t.model_label) ++r.retained;
    const Label a = t.labels.at(session.annotators[0]);
    const Label b = t.labels.at(session.annotators[1]);
    if (a == b) ++r.annotator_agreements;
    ++marginal_a[a];
    ++marginal_b[b];
  }
  if (unfinished > 0) {
    throw Error(ErrorCode::kIncompleteSession,
                std::to_string(unfinished) + " of " + std::to_string(r.total) + " tasks are not Final");
  }
  r.relabeled = r.total - r.retained;
  if (r.total == 0) return r;
  const double n = static_cast<double>(r.total);
  r.retention_rate = static_cast<double>(r.retained) / n;
  r.inter_annotator_agreement = static_cast<double>(r.annotator_agreements) / n;
  double p_e = 0.0;
  for (const auto& [label, count] : marginal_a) {
    auto it = marginal_b.find(label);
    if (it != marginal_b.end()) p_e += (static_cast<double>(count) / n) * (static_cast<double>(it->second) / n);
  }
  r.kappa = p_e >= 1.0 ? 0.0 : (r.inter_annotator_agreement - p_e) / (1.0 - p_e);
  return r;
}

nlohmann::json redacted_view(const AnnotationSession& session, const AnnotationTask& task, std::string_view viewer) {
  nlohmann::json v = {{"task_id", task.task_id},
                      {"record_id", task.record_id},
                      {"text", task.text},
                      {"status", to_string(task.status)},
                      {"label_count", task.labels.size()}};
  const bool final = task.status == TaskStatus::kFinal;
  const std::string me(viewer);
  const bool submitted = !me.empty() && task.labels.contains(me);
  if (submitted) v["my_label"] = label_name(task.labels.at(me));
  if (!me.empty()) v["can_submit"] = !submitted && task.labels.size() < 2;
  if (submitted || final) {
    nlohmann::json labels = nlohmann::json::object();
    for (const auto& a : session.annotators) {
      if (auto it = task.labels.find(a); it != task.labels.end()) labels[a] = label_name(it->second);
    }
    // An annotator who has submitted sees the other label only if it exists.
    v["labels"] = labels;
  }
  if (final) {
    v["model_label"] = label_name(task.model_label);
    v["consensus_label"] = label_name(*task.consensus_label);
    v["resolution"] = task.resolution;
  }
  if (task.note && (submitted || final)) v["note"] = *task.note;
  return v;
}

AnnotationService::AnnotationService(std::optional<std::filesystem::path> state_dir) : state_dir_(std::move(state_dir)) {
  if (!state_dir_) return;
  std::error_code ec;
  std::filesystem::create_directories(*state_dir_, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + state_dir_->string() + ": " + ec.message());
  std::vector<std::filesystem::path> logs;
  for (const auto& entry : std::filesystem::directory_iterator(*state_dir_)) {
    const auto name = entry.path().filename().string();
    if (name.size() > kLogSuffix.size() && name.ends_with(kLogSuffix)) logs.push_back(entry.path());
  }
  std::sort(logs.begin(), logs.end());
  for (const auto& log : logs) replay(log);
}

void AnnotationService::replay(const std::filesystem::path& log) {
  std::ifstream in(log);
  std::string line;
  std::optional<std::string> id;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto event = nlohmann::json::parse(line, nullptr, false);
    if (event.is_discarded()) {
      if (in.peek() == EOF) break;  // torn final write
      throw Error(ErrorCode::kIo, log.string() + " line " + std::to_string(n) + " is corrupt");
    }
    try {
      if (!id) {
        if (event.at("type") != "open") throw Error(ErrorCode::kIo, log.string() + " does not start with open");
        auto s = session_from_json(event.at("session"));
        id = s.session_id;
        next_session_ = std::max(next_session_, session_number(*id) + 1);
        sessions_.emplace(*id, std::move(s));
        continue;
      }
      apply(sessions_.at(*id), event);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kIo, log.string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
}

void AnnotationService::apply(AnnotationSession& s, const nlohmann::json& event) {
  const std::string type = event.at("type").get<std::string>();
  AnnotationTask& t = find_task(s, event.at("task").get<std::string>());
  const Label label = parse_label(event.at("label").get<std::string>());
  if (type == "label") {
    const std::string annotator = event.at("annotator").get<std::string>();
    check_submission(s, t, annotator, label);
    t.labels[annotator] = label;
    t.label_order.push_back(annotator);
    if (t.labels.size() == 1) {
      t.status = TaskStatus::kAwaitingSecond;
    } else if (t.labels.at(s.annotators[0]) == t.labels.at(s.annotators[1])) {
      // Agreed finalizes immediately.
      t.status = TaskStatus::kFinal;
      t.consensus_label = label;
      t.resolution = "agreed";
    } else {
      t.status = TaskStatus::kDisagreement;
    }
  } else if (type == "resolve") {
    check_resolution(s, t, label);
    t.status = TaskStatus::kFinal;
    t.consensus_label = label;
    t.note = event.value("note", std::string{});
    t.resolution = "adjudicated";
  } else {
    throw Error(ErrorCode::kIo, "unknown event type " + type);
  }
}

void AnnotationService::append_event(const std::string& session_id, const nlohmann::json& event) {
  if (!state_dir_) return;
  const auto path = *state_dir_ / (session_id + std::string(kLogSuffix));
  std::ofstream out(path, std::ios::app);
  out << event.dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "cannot append to " + path.string());
}

AnnotationSession& AnnotationService::session_locked(const std::string& id) {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "no session " + id);
  return it->second;
}

const AnnotationSession& AnnotationService::session_locked(const std::string& id) const {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "no session " + id);
  return it->second;
}

std::string AnnotationService::open_session(const Dataset& dataset, const std::string& annotator_a,
                                            const std::string& annotator_b) {
  if (dataset.empty()) throw Error(ErrorCode::kSession, "cannot annotate empty dataset " + dataset.name());
  if (annotator_a.empty() || annotator_b.empty()) throw Error(ErrorCode::kSession, "annotator ids must be non-empty");
  if (annotator_a == annotator_b) throw Error(ErrorCode::kSession, "annotator ids must differ, got " + annotator_a + " twice");

  std::unique_lock lock(mu_);
  AnnotationSession s;
  s.session_id = "session-" + std::to_string(next_session_);
  s.dataset_name = dataset.name();
  s.dataset_hash = dataset.content_hash();
  s.schema = dataset.schema();
  s.annotators = {annotator_a, annotator_b};
  s.created_at = utc_timestamp();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& r = dataset.records()[i];
    AnnotationTask t;
    t.task_id = task_id_for(i);
    t.record_id = r.id;
    t.text = r.text;
    t.model_label = r.label;
    s.tasks.push_back(std::move(t));
  }
  append_event(s.session_id, {{"type", "open"}, {"session", session_to_json(s)}});
  ++next_session_;
  const std::string id = s.session_id;
  sessions_.emplace(id, std::move(s));
  return id;
}

TaskStatus AnnotationService::submit_label(const std::string& session_id, const std::string& task_id,
                                           const std::string& annotator, Label label) {
  std::unique_lock lock(mu_);
  auto& s = session_locked(session_id);
  auto& t = find_task(s, task_id);
  check_submission(s, t, annotator, label);
  const nlohmann::json event = {{"type", "label"}, {"task", task_id}, {"annotator", annotator},
                                {"label", label_name(label)}, {"at", utc_timestamp()}};
  append_event(session_id, event);
  apply(s, event);
  return t.status;
}

TaskStatus AnnotationService::resolve(const std::string& session_id, const std::string& task_id, Label consensus,
                                      const std::string& note) {
  std::unique_lock lock(mu_);
  auto& s = session_locked(session_id);
  auto& t = find_task(s, task_id);
  check_resolution(s, t, consensus);
  const nlohmann::json event = {{"type", "resolve"}, {"task", task_id}, {"label", label_name(consensus)},
                                {"note", note}, {"at", utc_timestamp()}};
  append_event(session_id, event);
  apply(s, event);
  return t.status;
}

nlohmann::json AnnotationService::task_views(const std::string& session_id, const std::string& annotator,
                                             std::optional<TaskStatus> status) const {
  std::shared_lock lock(mu_);
  const auto& s = session_locked(session_id);
  if (!annotator.empty() && !s.has_annotator(annotator)) {
    throw Error(ErrorCode::kAuthorization, "annotator " + annotator + " is not part of " + session_id);
  }
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : s.tasks) {
    if (status && t.status != *status) continue;
    out.push_back(redacted_view(s, t, annotator));
  }
  return out;
}

AgreementReport AnnotationService::report(const std::string& session_id) const {
  std::shared_lock lock(mu_);
  return agreement_report(session_locked(session_id));
}

AnnotationSession AnnotationService::snapshot(const std::string& session_id) const {
  std::shared_lock lock(mu_);
  return session_locked(session_id);
}

std::vector<std::string> AnnotationService::session_ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> ids;
  for (const auto& [id, s] : sessions_) ids.push_back(id);
  std::sort(ids.begin(), ids.end(),
            [](const std::string& a, const std::string& b) { return session_number(a) < session_number(b); });
  return ids;
}

nlohmann::json AnnotationService::summary(const std::string& session_id) const {
  std::shared_lock lock(mu_);
  const auto& s = session_locked(session_id);
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [st, n] : s.status_counts()) counts[std::string(to_string(st))] = n;
  return {{"session_id", s.session_id}, {"dataset_name", s.dataset_name}, {"dataset_hash", s.dataset_hash},
          {"schema", to_string(s.schema)}, {"annotators", s.annotators},  {"created_at", s.created_at},
          {"tasks", s.tasks.size()},       {"status_counts", counts}};
}

}  // namespace sisynth
