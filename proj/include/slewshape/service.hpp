#pragma once

#include <memory>
#include <string>

namespace slewshape {

struct ServiceOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  std::string scenario_dir = "data/scenarios";
  unsigned io_threads = 2;
  unsigned analysis_workers = 1;
  double stream_rate = 30.0;  // state messages per second
};

/// HTTP + WebSocket front end for live sessions and batch analyses.
///
///   GET  /health
///   GET  /scenarios
///   POST /sessions                      {"scenario": id, "shaped": bool}
///   GET  /sessions/{id}
///   GET  /sessions/{id}/metrics         409 until the trial is over
///   GET  /sessions/{id}/artifacts/{commands.csv|states.csv|metrics.json}
///   WS   /session/{id}
///   POST /analyses                      {"kind": ..., "config": {...}}
///   GET  /analyses/{id}, /analyses/{id}/artifacts/{name}
///
/// Every JSON body carries "v": 1.
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds and listens. Returns the bound port. Throws std::runtime_error on bind failure.
  unsigned short start();
  /// Serves until stop() is called. Requires start().
  void run();
  /// Safe to call from any thread or a signal handler context via asio.
  void stop();

  unsigned short port() const;
  std::size_t scenario_count() const;

  struct Impl;

 private:
  std::shared_ptr<Impl> impl_;
};

}  // namespace slewshape
