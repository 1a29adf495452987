#pragma once

#include <memory>
#include <string>
#include <thread>

#include "sisynth/annotation.hpp"
#include "sisynth/error.hpp"

namespace sisynth {

/// HTTP front end for an AnnotationService.
///   GET  /sessions
///   GET  /sessions/{id}
///   GET  /sessions/{id}/tasks?annotator=&status=
///   POST /sessions/{id}/tasks/{tid}/labels   {annotator, label}
///   POST /sessions/{id}/tasks/{tid}/resolve  {label, note}
///   GET  /sessions/{id}/report
class AnnotationServer {
 public:
  explicit AnnotationServer(AnnotationService& service);
  ~AnnotationServer();
  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  /// Binds and returns the port; port 0 picks a free one.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  /// bind() + listen() on a background thread.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::jthread thread_;
};

/// HTTP status for a service error code.
int http_status_for(ErrorCode code);

}  // namespace sisynth
