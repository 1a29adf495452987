#include <gtest/gtest.h>

#include <httplib.h>

#include "annotation_harness.hpp"
#include "sisynth/annotation.hpp"
#include "sisynth/annotation_server.hpp"
#include "sisynth/error.hpp"
#include "test_support.hpp"

namespace sisynth {
namespace {

using testing::fixture;
using testing::make_dataset;
using testing::TempDir;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::kIo;
}

TEST(Annotation, HoldoutFixtureReport) {
  const auto rows = testing::load_holdout(fixture("annotation/holdout_318.jsonl"));
  ASSERT_EQ(rows.size(), 318u);
  AnnotationService service;
  const auto id = testing::play_holdout(service, rows);
  const auto r = service.report(id);
  EXPECT_EQ(r.total, 318u);
  EXPECT_EQ(r.retained, 283u);
  EXPECT_EQ(r.relabeled, 35u);
  EXPECT_EQ(r.annotator_agreements, 275u);
  EXPECT_NEAR(r.retention_rate, 0.890, 5e-4);
  EXPECT_DOUBLE_EQ(r.retention_rate, 283.0 / 318.0);
  EXPECT_DOUBLE_EQ(r.inter_annotator_agreement, 275.0 / 318.0);

  // Kappa from first principles.
  double a_pos = 0, b_pos = 0;
  for (const auto& row : rows) {
    a_pos += row.a == Label::kSuicidal;
    b_pos += row.b == Label::kSuicidal;
  }
  const double n = 318.0;
  const double pe = (a_pos / n) * (b_pos / n) + (1 - a_pos / n) * (1 - b_pos / n);
  EXPECT_NEAR(r.kappa, (275.0 / n - pe) / (1 - pe), 1e-12);
}

TEST(Annotation, ReportRequiresFinalTasks) {
  AnnotationService service;
  const auto id = service.open_session(make_dataset("d", SchemaKind::kBinary, 2), "a", "b");
  EXPECT_EQ(code_of([&] { service.report(id); }), ErrorCode::kIncompleteSession);
}

TEST(Annotation, WorkflowAndErrors) {
  AnnotationService service;
  const auto id = service.open_session(make_dataset("d", SchemaKind::kBinary, 3), "a", "b");
  EXPECT_EQ(id, "session-1");
  EXPECT_EQ(service.submit_label(id, "task-0001", "a", Label::kSuicidal), TaskStatus::kAwaitingSecond);
  EXPECT_EQ(code_of([&] { service.submit_label(id, "task-0001", "a", Label::kSuicidal); }), ErrorCode::kConflict);
  EXPECT_EQ(code_of([&] { service.submit_label(id, "task-0001", "c", Label::kSuicidal); }), ErrorCode::kAuthorization);
  EXPECT_EQ(code_of([&] { service.submit_label(id, "task-0001", "b", Label::kLowRisk); }), ErrorCode::kInvalidLabel);
  EXPECT_EQ(code_of([&] { service.submit_label(id, "task-9999", "b", Label::kSuicidal); }), ErrorCode::kNotFound);
  EXPECT_EQ(code_of([&] { service.submit_label("session-7", "task-0001", "b", Label::kSuicidal); }), ErrorCode::kNotFound);
  EXPECT_EQ(code_of([&] { service.resolve(id, "task-0001", Label::kSuicidal, ""); }), ErrorCode::kState);
  EXPECT_EQ(service.submit_label(id, "task-0001", "b", Label::kNonSuicidal), TaskStatus::kDisagreement);
  EXPECT_EQ(service.resolve(id, "task-0001", Label::kNonSuicidal, "talked"), TaskStatus::kFinal);
  EXPECT_EQ(code_of([&] { service.resolve(id, "task-0001", Label::kSuicidal, ""); }), ErrorCode::kState);

  service.submit_label(id, "task-0002", "b", Label::kSuicidal);
  EXPECT_EQ(service.submit_label(id, "task-0002", "a", Label::kSuicidal), TaskStatus::kFinal);
  const auto s = service.snapshot(id);
  EXPECT_EQ(s.task("task-0002").resolution, "agreed");
  EXPECT_EQ(s.task("task-0002").label_order, (std::vector<std::string>{"b", "a"}));
  EXPECT_EQ(s.task("task-0001").resolution, "adjudicated");
  EXPECT_EQ(s.status_counts().at(TaskStatus::kPending), 1u);
}

TEST(Annotation, OpenSessionValidation) {
  AnnotationService service;
  const auto ds = make_dataset("d", SchemaKind::kBinary, 2);
  EXPECT_EQ(code_of([&] { service.open_session(ds, "a", "a"); }), ErrorCode::kSession);
  EXPECT_EQ(code_of([&] { service.open_session(ds, "", "b"); }), ErrorCode::kSession);
  EXPECT_EQ(code_of([&] { service.open_session(Dataset("e", SchemaKind::kBinary, {}), "a", "b"); }), ErrorCode::kSession);
}

TEST(Annotation, BlindnessBeforeSubmission) {
  AnnotationService service;
  const auto id = service.open_session(make_dataset("d", SchemaKind::kBinary, 1), "a", "b");
  service.submit_label(id, "task-0001", "a", Label::kSuicidal);
  const auto bview = service.task_views(id, "b")[0];
  EXPECT_FALSE(bview.contains("labels"));
  EXPECT_FALSE(bview.contains("model_label"));
  EXPECT_FALSE(bview.contains("my_label"));
  EXPECT_TRUE(bview.at("can_submit").get<bool>());
  const auto aview = service.task_views(id, "a")[0];
  EXPECT_EQ(aview.at("my_label"), "Suicidal");
  EXPECT_EQ(aview.at("labels").size(), 1u);
  EXPECT_FALSE(aview.contains("model_label"));
  const auto observer = service.task_views(id, "")[0];
  EXPECT_FALSE(observer.contains("labels"));
  EXPECT_EQ(code_of([&] { service.task_views(id, "mallory"); }), ErrorCode::kAuthorization);

  service.submit_label(id, "task-0001", "b", Label::kSuicidal);
  const auto done = service.task_views(id, "")[0];
  EXPECT_EQ(done.at("labels").size(), 2u);
  EXPECT_EQ(done.at("model_label"), "NonSuicidal");
  EXPECT_EQ(service.task_views(id, "a", TaskStatus::kPending).size(), 0u);
  EXPECT_EQ(service.task_views(id, "a", TaskStatus::kFinal).size(), 1u);
}

TEST(Annotation, RandomOperationSequencesKeepInvariants) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto err = testing::random_state_machine(seed, 6, 80);
    ASSERT_TRUE(err.empty()) << "seed " << seed << ": " << err;
  }
}

TEST(Annotation, StateSurvivesRestart) {
  TempDir dir;
  std::string id;
  {
    AnnotationService service(dir.path());
    id = service.open_session(make_dataset("d", SchemaKind::kBinary, 2), "a", "b");
    service.submit_label(id, "task-0001", "a", Label::kSuicidal);
    service.submit_label(id, "task-0001", "b", Label::kNonSuicidal);
    service.resolve(id, "task-0001", Label::kSuicidal, "note");
  }
  {
    std::ofstream torn(dir / (id + ".events.jsonl"), std::ios::app);
    torn << "{\"type\":\"label\",\"ta";
  }
  AnnotationService again(dir.path());
  const auto s = again.snapshot(id);
  EXPECT_EQ(s.task("task-0001").status, TaskStatus::kFinal);
  EXPECT_EQ(s.task("task-0001").note, "note");
  EXPECT_EQ(s.task("task-0002").status, TaskStatus::kPending);
  EXPECT_EQ(again.open_session(make_dataset("e", SchemaKind::kBinary, 1, "e"), "a", "b"), "session-2");
}

TEST(Annotation, HttpStatusMapping) {
  EXPECT_EQ(http_status_for(ErrorCode::kConflict), 409);
  EXPECT_EQ(http_status_for(ErrorCode::kState), 409);
  EXPECT_EQ(http_status_for(ErrorCode::kAuthorization), 403);
  EXPECT_EQ(http_status_for(ErrorCode::kInvalidLabel), 422);
  EXPECT_EQ(http_status_for(ErrorCode::kNotFound), 404);
  EXPECT_EQ(http_status_for(ErrorCode::kIo), 500);
}

TEST(Annotation, HttpServerEndToEnd) {
  AnnotationService service;
  const auto id = service.open_session(make_dataset("d", SchemaKind::kBinary, 1), "a", "b");
  AnnotationServer server(service);
  const int port = server.start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", port);
  const std::string base = "/sessions/" + id;

  auto res = client.Get(base + "/tasks?annotator=b");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(nlohmann::json::parse(res->body).size(), 1u);

  const std::string label_path = base + "/tasks/task-0001/labels";
  res = client.Post(label_path, R"({"annotator":"a","label":"Suicidal"})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  res = client.Post(label_path, R"({"annotator":"a","label":"Suicidal"})", "application/json");
  EXPECT_EQ(res->status, 409);
  res = client.Post(label_path, R"({"annotator":"z","label":"Suicidal"})", "application/json");
  EXPECT_EQ(res->status, 403);
  res = client.Post(label_path, R"({"annotator":"b","label":"Medium"})", "application/json");
  EXPECT_EQ(res->status, 422);
  res = client.Post(label_path, "{not json", "application/json");
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(client.Get(base + "/report")->status, 409);
  EXPECT_EQ(client.Get("/sessions/nope")->status, 404);

  const auto view = nlohmann::json::parse(client.Get(base + "/tasks?annotator=b")->body)[0];
  EXPECT_FALSE(view.contains("labels"));

  res = client.Post(label_path, R"({"annotator":"b","label":"NonSuicidal"})", "application/json");
  EXPECT_EQ(res->status, 200);
  res = client.Post(base + "/tasks/task-0001/resolve", R"({"label":"Suicidal","note":"ok"})", "application/json");
  EXPECT_EQ(res->status, 200);
  res = client.Get(base + "/report");
  ASSERT_EQ(res->status, 200);
  const auto report = nlohmann::json::parse(res->body);
  EXPECT_EQ(report.at("total"), 1);
  EXPECT_EQ(report.at("retained"), 0);
  server.stop();
}

}  // namespace
}  // namespace sisynth
