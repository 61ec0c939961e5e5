#include "slewshape/service.hpp"

#include <chrono>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

#include "internal/util.hpp"
#include "slewshape/batch.hpp"
#include "slewshape/config.hpp"
#include "slewshape/log.hpp"
#include "slewshape/session.hpp"

namespace slewshape {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;
using Clock = std::chrono::steady_clock;
using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;
using Reply = std::function<void(Response)>;

namespace {

constexpr int kVersion = 1;

std::vector<std::string> split_path(const std::string& target) {
  std::vector<std::string> parts;
  std::string path = target.substr(0, target.find('?'));
  std::stringstream ss(path);
  std::string item;
  while (std::getline(ss, item, '/')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

Response make_response(http::status status, std::string body, const std::string& type = "application/json") {
  Response res{status, 11};
  res.set(http::field::server, "slewshape");
  res.set(http::field::content_type, type);
  res.set(http::field::access_control_allow_origin, "*");
  res.body() = std::move(body);
  res.prepare_payload();
  return res;
}

Response json_response(http::status status, json body) {
  body["v"] = kVersion;
  return make_response(status, body.dump());
}

Response error_response(http::status status, const std::string& message, const std::string& field = {}) {
  json err{{"message", message}};
  if (!field.empty()) err["field"] = field;
  return json_response(status, {{"error", err}});
}

json state_json(const SimState& s) {
  return {{"t", s.time},
          {"alpha", s.slew.alpha},
          {"alpha_dot", s.slew.rate},
          {"theta1", s.swing.theta1},
          {"theta2", s.swing.theta2},
          {"tip_margin", s.tip_margin},
          {"payload_x", s.payload_xy[0]},
          {"payload_y", s.payload_xy[1]},
          {"tipped", s.tipped}};
}

struct SessionEntry;

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket&& socket, Request req, std::shared_ptr<SessionEntry> entry,
               std::function<void(std::shared_ptr<SessionEntry>, std::shared_ptr<WsConnection>)> on_open,
               std::function<void(std::shared_ptr<SessionEntry>, std::shared_ptr<WsConnection>, std::string)> on_text,
               std::function<void(std::shared_ptr<SessionEntry>, std::shared_ptr<WsConnection>)> on_close)
      : ws_(std::move(socket)),
        req_(std::move(req)),
        entry_(std::move(entry)),
        on_open_(std::move(on_open)),
        on_text_(std::move(on_text)),
        on_close_(std::move(on_close)) {}

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req_, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->on_open_(self->entry_, self);
      self->read();
    });
  }

  /// Queues a text frame. Safe from any thread.
  void send(std::string text, bool close_after = false) {
    net::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text), close_after]() mutable {
      if (self->closing_) return;
      self->queue_.push_back(std::move(text));
      if (close_after) self->closing_ = true;
      if (self->queue_.size() == 1) self->write();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->on_close_(self->entry_, self);
        return;
      }
      std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->on_text_(self->entry_, self, std::move(text));
      self->read();
    });
  }

  void write() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->queue_.pop_front();
      if (!self->queue_.empty()) {
        self->write();
      } else if (self->closing_) {
        self->ws_.async_close(websocket::close_code::normal, [self](beast::error_code) {});
      }
    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  Request req_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool closing_ = false;
  std::shared_ptr<SessionEntry> entry_;
  std::function<void(std::shared_ptr<SessionEntry>, std::shared_ptr<WsConnection>)> on_open_;
  std::function<void(std::shared_ptr<SessionEntry>, std::shared_ptr<WsConnection>, std::string)> on_text_;
  std::function<void(std::shared_ptr<SessionEntry>, std::shared_ptr<WsConnection>)> on_close_;
};

// All members are touched only on `strand`.
struct SessionEntry {
  SessionEntry(net::io_context& ioc, std::string session_id, Scenario scenario, bool shaped)
      : strand(net::make_strand(ioc)), timer(strand), id(std::move(session_id)), live(std::move(scenario), shaped) {}

  net::strand<net::io_context::executor_type> strand;
  net::steady_timer timer;
  std::string id;
  LiveSession live;
  double joystick = 0.0;
  std::uint64_t seq = 0;
  bool started = false;
  bool closed = false;
  Clock::time_point t0;
  Clock::time_point next_tick;
  std::shared_ptr<WsConnection> viewer;

  double now() const { return std::chrono::duration<double>(Clock::now() - t0).count(); }

  json descriptor() const {
    return {{"id", id}, {"scenario", live.scenario().id}, {"shaped", live.shaped()}, {"state", to_string(live.phase())}};
  }

  json message(const std::string& type) { return {{"v", kVersion}, {"type", type}, {"seq", seq++}}; }
};

struct AnalysisJob {
  std::string id;
  AnalysisKind kind = AnalysisKind::LoadChart;
  std::string status = "queued";
  std::string fingerprint;
  std::string error;
  std::vector<Artifact> artifacts;
};

class HttpConnection;

}  // namespace

struct Service::Impl : std::enable_shared_from_this<Service::Impl> {
  explicit Impl(ServiceOptions o)
      : options(std::move(o)), acceptor(ioc), pool(std::max(1u, options.analysis_workers)) {}

  ServiceOptions options;
  net::io_context ioc;
  tcp::acceptor acceptor;
  net::thread_pool pool;
  std::map<std::string, Scenario> scenarios;

  std::mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<SessionEntry>> sessions;
  std::uint64_t next_session = 1;

  std::mutex analyses_mutex;
  std::map<std::string, std::shared_ptr<AnalysisJob>> analyses;
  std::uint64_t next_analysis = 1;

  void load_scenarios() {
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    if (fs::is_directory(options.scenario_dir)) {
      for (const auto& e : fs::directory_iterator(options.scenario_dir)) {
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
      }
    } else {
      warn("scenario directory '" + options.scenario_dir + "' not found");
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      try {
        Scenario s = load_scenario(f.string());
        scenarios.emplace(s.id, std::move(s));
      } catch (const std::exception& e) {
        warn("skipping scenario " + f.string() + ": " + e.what());
      }
    }
  }

  void accept();
  void handle(Request req, Reply reply);
  void upgrade(tcp::socket socket, Request req);

  std::shared_ptr<SessionEntry> find_session(const std::string& id) {
    std::lock_guard lock(sessions_mutex);
    const auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  std::shared_ptr<AnalysisJob> find_analysis(const std::string& id) {
    std::lock_guard lock(analyses_mutex);
    const auto it = analyses.find(id);
    return it == analyses.end() ? nullptr : it->second;
  }

  // Session handlers; each runs on the entry's strand.
  void attach(const std::shared_ptr<SessionEntry>& e, const std::shared_ptr<WsConnection>& conn);
  void on_text(const std::shared_ptr<SessionEntry>& e, const std::shared_ptr<WsConnection>& conn,
               const std::string& text);
  void detach(const std::shared_ptr<SessionEntry>& e, const std::shared_ptr<WsConnection>& conn);
  void schedule_tick(const std::shared_ptr<SessionEntry>& e);
  void tick(const std::shared_ptr<SessionEntry>& e);
  void send_state(SessionEntry& e);
  bool finish_if_terminal(SessionEntry& e);

  void sessions_route(const Request& req, const std::vector<std::string>& parts, Reply reply);
  void analyses_route(const Request& req, const std::vector<std::string>& parts, Reply reply);
};

namespace {

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket&& socket, std::shared_ptr<Service::Impl> svc)
      : stream_(std::move(socket)), svc_(std::move(svc)) {}

  void start() {
    net::dispatch(stream_.get_executor(), [self = shared_from_this()] { self->read(); });
  }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(60));
    http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec == http::error::end_of_stream) {
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
        return;
      }
      if (ec) return;
      if (websocket::is_upgrade(self->req_)) {
        self->stream_.expires_never();
        self->svc_->upgrade(self->stream_.release_socket(), std::move(self->req_));
        return;
      }
      const bool keep_alive = self->req_.keep_alive();
      const unsigned version = self->req_.version();
      self->svc_->handle(std::move(self->req_), [self, keep_alive, version](Response res) {
        res.version(version);
        res.keep_alive(keep_alive);
        net::post(self->stream_.get_executor(),
                  [self, res = std::make_shared<Response>(std::move(res))] { self->write(res); });
      });
    });
  }

  void write(const std::shared_ptr<Response>& res) {
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (res->need_eof()) {
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
        return;
      }
      self->read();
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  Request req_;
  std::shared_ptr<Service::Impl> svc_;
};

std::optional<json> parse_body(const Request& req, Reply& reply) {
  if (req.body().empty()) return json::object();
  try {
    json j = json::parse(req.body());
    if (!j.is_object()) {
      reply(error_response(http::status::bad_request, "request body must be a JSON object"));
      return std::nullopt;
    }
    return j;
  } catch (const json::parse_error& e) {
    reply(error_response(http::status::bad_request, std::string("malformed JSON: ") + e.what()));
    return std::nullopt;
  }
}

}  // namespace

void Service::Impl::accept() {
  acceptor.async_accept(net::make_strand(ioc), [self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (ec != net::error::operation_aborted) warn("accept failed: " + ec.message());
    } else {
      std::make_shared<HttpConnection>(std::move(socket), self)->start();
    }
    if (self->acceptor.is_open()) self->accept();
  });
}

void Service::Impl::handle(Request req, Reply reply) {
  const auto parts = split_path(std::string(req.target()));
  const auto method = req.method();
  try {
    if (method == http::verb::options) {
      Response res = make_response(http::status::no_content, "");
      res.set(http::field::access_control_allow_methods, "GET, POST, OPTIONS");
      res.set(http::field::access_control_allow_headers, "Content-Type");
      return reply(std::move(res));
    }
    if (parts.size() == 1 && parts[0] == "health") {
      if (method != http::verb::get) return reply(error_response(http::status::method_not_allowed, "use GET"));
      return reply(json_response(http::status::ok, {{"status", "ok"}, {"scenarios", scenarios.size()}}));
    }
    if (parts.size() == 1 && parts[0] == "scenarios") {
      if (method != http::verb::get) return reply(error_response(http::status::method_not_allowed, "use GET"));
      json list = json::array();
      for (const auto& [id, s] : scenarios) list.push_back(to_json(s));
      return reply(json_response(http::status::ok, {{"scenarios", list}}));
    }
    if (!parts.empty() && parts[0] == "sessions") return sessions_route(req, parts, std::move(reply));
    if (!parts.empty() && parts[0] == "analyses") return analyses_route(req, parts, std::move(reply));
    reply(error_response(http::status::not_found, "no route for " + std::string(req.target())));
  } catch (const std::exception& e) {
    reply(error_response(http::status::internal_server_error, e.what()));
  }
}

void Service::Impl::sessions_route(const Request& req, const std::vector<std::string>& parts, Reply reply) {
  const auto method = req.method();
  if (parts.size() == 1) {
    if (method == http::verb::post) {
      auto body = parse_body(req, reply);
      if (!body) return;
      for (const auto& [key, value] : body->items()) {
        if (key != "scenario" && key != "shaped" && key != "v") {
          return reply(error_response(http::status::bad_request, "unknown field", key));
        }
      }
      if (!body->contains("scenario") || !(*body)["scenario"].is_string()) {
        return reply(error_response(http::status::bad_request, "expected a scenario id string", "scenario"));
      }
      const bool shaped_given = body->contains("shaped");
      if (shaped_given && !(*body)["shaped"].is_boolean()) {
        return reply(error_response(http::status::bad_request, "expected a boolean", "shaped"));
      }
      const std::string sid = (*body)["scenario"].get<std::string>();
      const auto sc = scenarios.find(sid);
      if (sc == scenarios.end()) {
        return reply(error_response(http::status::not_found, "unknown scenario '" + sid + "'", "scenario"));
      }
      const bool shaped = shaped_given && (*body)["shaped"].get<bool>();
      std::shared_ptr<SessionEntry> entry;
      {
        std::lock_guard lock(sessions_mutex);
        const std::string id = "s" + std::to_string(next_session++);
        entry = std::make_shared<SessionEntry>(ioc, id, sc->second, shaped);
        sessions.emplace(id, entry);
      }
      net::dispatch(entry->strand, [entry, reply = std::move(reply)] {
        reply(json_response(http::status::created, entry->descriptor()));
      });
      return;
    }
    return reply(error_response(http::status::method_not_allowed, "use POST"));
  }

  const auto entry = find_session(parts[1]);
  if (!entry) return reply(error_response(http::status::not_found, "unknown session '" + parts[1] + "'"));
  if (method != http::verb::get) return reply(error_response(http::status::method_not_allowed, "use GET"));

  if (parts.size() == 2) {
    net::dispatch(entry->strand, [entry, reply = std::move(reply)] {
      json d = entry->descriptor();
      d["sim"] = state_json(entry->live.state());
      reply(json_response(http::status::ok, d));
    });
    return;
  }
  if (parts.size() == 3 && parts[2] == "metrics") {
    net::dispatch(entry->strand, [entry, reply = std::move(reply)] {
      if (!entry->live.terminal()) {
        return reply(error_response(http::status::conflict,
                                    "session is " + to_string(entry->live.phase()) + "; metrics are available once it ends"));
      }
      json m = to_json(entry->live.metrics());
      m["session"] = entry->id;
      m["outcome"] = to_string(entry->live.record().outcome);
      m["state"] = to_string(entry->live.phase());
      reply(json_response(http::status::ok, m));
    });
    return;
  }
  if (parts.size() == 4 && parts[2] == "artifacts") {
    const std::string name = parts[3];
    net::dispatch(entry->strand, [entry, name, reply = std::move(reply)] {
      if (!entry->live.terminal()) {
        return reply(error_response(http::status::conflict, "trial records are available once the session ends"));
      }
      std::ostringstream os;
      if (name == "commands.csv") {
        write_commands_csv(os, entry->live.record());
      } else if (name == "states.csv") {
        write_state_csv(os, entry->live.record().states);
      } else if (name == "metrics.json") {
        json m = to_json(entry->live.metrics());
        m["outcome"] = to_string(entry->live.record().outcome);
        return reply(json_response(http::status::ok, m));
      } else {
        return reply(error_response(http::status::not_found, "unknown artifact '" + name + "'"));
      }
      reply(make_response(http::status::ok, os.str(), "text/csv"));
    });
    return;
  }
  reply(error_response(http::status::not_found, "no route for " + std::string(req.target())));
}

namespace {

json job_json(const AnalysisJob& job, bool with_content) {
  json artifacts = json::array();
  for (const auto& a : job.artifacts) {
    json item{{"name", a.name}, {"rows", a.rows}, {"href", "/analyses/" + job.id + "/artifacts/" + a.name}};
    if (with_content) item["content"] = a.content;
    artifacts.push_back(item);
  }
  json j{{"id", job.id}, {"kind", to_string(job.kind)}, {"status", job.status}, {"fingerprint", job.fingerprint},
         {"artifacts", artifacts}};
  if (!job.error.empty()) j["error"] = job.error;
  return j;
}

}  // namespace

void Service::Impl::analyses_route(const Request& req, const std::vector<std::string>& parts, Reply reply) {
  const auto method = req.method();
  if (parts.size() == 1) {
    if (method != http::verb::post) return reply(error_response(http::status::method_not_allowed, "use POST"));
    auto body = parse_body(req, reply);
    if (!body) return;
    for (const auto& [key, value] : body->items()) {
      if (key != "kind" && key != "config" && key != "v") {
        return reply(error_response(http::status::bad_request, "unknown field", key));
      }
    }
    AnalysisKind kind;
    try {
      kind = parse_analysis_kind(body->value("kind", std::string{}));
    } catch (const std::invalid_argument& e) {
      return reply(error_response(http::status::bad_request, e.what(), "kind"));
    }
    AnalysisConfig cfg;
    try {
      cfg = analysis_from_json(body->value("config", json::object()));
    } catch (const ConfigError& e) {
      return reply(error_response(http::status::bad_request, e.what(), "config." + e.field()));
    }
    auto job = std::make_shared<AnalysisJob>();
    job->kind = kind;
    job->fingerprint = fingerprint(cfg);
    {
      std::lock_guard lock(analyses_mutex);
      job->id = "a" + std::to_string(next_analysis++);
      analyses.emplace(job->id, job);
    }
    const json accepted = job_json(*job, false);
    net::post(pool, [self = shared_from_this(), job, kind, cfg] {
      {
        std::lock_guard lock(self->analyses_mutex);
        job->status = "running";
      }
      std::vector<Artifact> out;
      std::string error;
      try {
        out = run_analysis(kind, cfg);
      } catch (const std::exception& e) {
        error = e.what();
      }
      std::lock_guard lock(self->analyses_mutex);
      job->artifacts = std::move(out);
      job->error = error;
      job->status = error.empty() ? "done" : "failed";
    });
    Response res = json_response(http::status::accepted, accepted);
    res.set(http::field::location, "/analyses/" + accepted["id"].get<std::string>());
    return reply(std::move(res));
  }
  if (method != http::verb::get) return reply(error_response(http::status::method_not_allowed, "use GET"));
  const auto job = find_analysis(parts[1]);
  if (!job) return reply(error_response(http::status::not_found, "unknown analysis '" + parts[1] + "'"));
  std::lock_guard lock(analyses_mutex);
  if (parts.size() == 2) return reply(json_response(http::status::ok, job_json(*job, true)));
  if (parts.size() == 4 && parts[2] == "artifacts") {
    for (const auto& a : job->artifacts) {
      if (a.name == parts[3]) return reply(make_response(http::status::ok, a.content, "text/csv"));
    }
    if (job->status != "done") {
      return reply(error_response(http::status::conflict, "analysis is " + job->status));
    }
    return reply(error_response(http::status::not_found, "unknown artifact '" + parts[3] + "'"));
  }
  reply(error_response(http::status::not_found, "no route for " + std::string(req.target())));
}

void Service::Impl::upgrade(tcp::socket socket, Request req) {
  const auto parts = split_path(std::string(req.target()));
  std::shared_ptr<SessionEntry> entry;
  if (parts.size() == 2 && parts[0] == "session") entry = find_session(parts[1]);
  if (!entry) {
    // Refuse the handshake with a plain HTTP error.
    auto stream = std::make_shared<beast::tcp_stream>(std::move(socket));
    auto res = std::make_shared<Response>(error_response(http::status::not_found, "unknown session"));
    res->keep_alive(false);
    http::async_write(*stream, *res, [stream, res](beast::error_code ec, std::size_t) {
      stream->socket().shutdown(tcp::socket::shutdown_send, ec);
    });
    return;
  }
  auto self = shared_from_this();
  std::make_shared<WsConnection>(
      std::move(socket), std::move(req), entry,
      [self](std::shared_ptr<SessionEntry> e, std::shared_ptr<WsConnection> c) {
        net::dispatch(e->strand, [self, e, c] { self->attach(e, c); });
      },
      [self](std::shared_ptr<SessionEntry> e, std::shared_ptr<WsConnection> c, std::string text) {
        net::dispatch(e->strand, [self, e, c, text = std::move(text)] { self->on_text(e, c, text); });
      },
      [self](std::shared_ptr<SessionEntry> e, std::shared_ptr<WsConnection> c) {
        net::dispatch(e->strand, [self, e, c] { self->detach(e, c); });
      })
      ->start();
}

void Service::Impl::attach(const std::shared_ptr<SessionEntry>& e, const std::shared_ptr<WsConnection>& conn) {
  if (e->viewer) {
    json err = e->message("error");
    err["message"] = "session already has a connected client";
    conn->send(err.dump(), true);
    return;
  }
  json hello = e->message("hello");
  hello["session"] = e->descriptor();
  hello["scenario"] = to_json(e->live.scenario());
  hello["sample_period"] = e->live.scenario().sample_period;
  hello["stream_rate"] = options.stream_rate;
  hello["sim"] = state_json(e->live.state());
  conn->send(hello.dump());
  e->viewer = conn;
  if (finish_if_terminal(*e)) return;
  if (!e->started) {
    e->started = true;
    e->t0 = Clock::now();
    e->next_tick = e->t0;
  }
  schedule_tick(e);
}

void Service::Impl::schedule_tick(const std::shared_ptr<SessionEntry>& e) {
  const auto period = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / options.stream_rate));
  e->next_tick += period;
  const auto now = Clock::now();
  if (e->next_tick < now - 4 * period) e->next_tick = now;
  e->timer.expires_at(e->next_tick);
  e->timer.async_wait([self = shared_from_this(), e](beast::error_code ec) {
    if (ec) return;
    self->tick(e);
  });
}

void Service::Impl::tick(const std::shared_ptr<SessionEntry>& e) {
  if (!e->viewer || e->closed) return;
  if (!e->live.terminal()) e->live.step_interactive(e->joystick, e->now());
  if (finish_if_terminal(*e)) return;
  send_state(*e);
  schedule_tick(e);
}

void Service::Impl::send_state(SessionEntry& e) {
  json msg = e.message("state");
  msg.update(state_json(e.live.state()));
  msg["commanded_rate"] = e.live.commanded_rate();
  msg["joystick"] = e.joystick;
  msg["phase"] = to_string(e.live.phase());
  if (e.viewer) e.viewer->send(msg.dump());
}

bool Service::Impl::finish_if_terminal(SessionEntry& e) {
  if (!e.live.terminal()) return false;
  e.closed = true;
  e.timer.cancel();
  if (e.viewer) {
    send_state(e);
    json msg = e.message("terminal");
    msg["t"] = e.live.state().time;
    msg["state"] = to_string(e.live.phase());
    msg["outcome"] = to_string(e.live.record().outcome);
    msg["metrics"] = to_json(e.live.metrics());
    e.viewer->send(msg.dump(), true);
    e.viewer.reset();
  }
  return true;
}

void Service::Impl::on_text(const std::shared_ptr<SessionEntry>& e, const std::shared_ptr<WsConnection>& conn,
                            const std::string& text) {
  if (e->viewer != conn) return;
  auto fail = [&](const std::string& message) {
    json err = e->message("error");
    err["message"] = message;
    conn->send(err.dump());
  };
  json msg;
  try {
    msg = json::parse(text);
  } catch (const json::parse_error& ex) {
    return fail(std::string("malformed JSON: ") + ex.what());
  }
  if (!msg.is_object()) return fail("message must be a JSON object");
  if (msg.value("v", 0) != kVersion) return fail("unsupported message version; expected \"v\": 1");
  const std::string type = msg.value("type", std::string{});
  if (type == "command") {
    if (!msg.contains("joystick") || !msg["joystick"].is_number()) return fail("command needs a numeric joystick");
    const double value = msg["joystick"].get<double>();
    if (!std::isfinite(value)) return fail("joystick must be finite");
    if (e->live.terminal()) return;
    e->live.step_interactive(e->joystick, e->now());
    e->joystick = std::clamp(value, -1.0, 1.0);
    finish_if_terminal(*e);
  } else if (type == "abort") {
    e->live.abort();
    finish_if_terminal(*e);
  } else {
    fail("unknown message type '" + type + "'");
  }
}

void Service::Impl::detach(const std::shared_ptr<SessionEntry>& e, const std::shared_ptr<WsConnection>& conn) {
  if (e->viewer != conn) return;
  e->viewer.reset();
  e->timer.cancel();
  if (!e->live.terminal()) {
    warn("session " + e->id + ": client disconnected; trial aborted");
    e->live.abort();
    e->closed = true;
  }
}

Service::Service(ServiceOptions options) : impl_(std::make_shared<Impl>(std::move(options))) {
  impl_->load_scenarios();
}

Service::~Service() {
  stop();
  impl_->pool.join();
  beast::error_code ec;
  impl_->acceptor.close(ec);
}

unsigned short Service::start() {
  beast::error_code ec;
  const auto address = net::ip::make_address(impl_->options.address, ec);
  if (ec) throw std::runtime_error("invalid address '" + impl_->options.address + "': " + ec.message());
  const tcp::endpoint ep{address, impl_->options.port};
  auto& acc = impl_->acceptor;
  acc.open(ep.protocol(), ec);
  if (!ec) acc.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) acc.bind(ep, ec);
  if (!ec) acc.listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    acc.close();
    throw std::runtime_error("cannot listen on " + impl_->options.address + ":" +
                             std::to_string(impl_->options.port) + ": " + ec.message());
  }
  impl_->accept();
  return acc.local_endpoint().port();
}

void Service::run() {
  std::vector<std::thread> extra;
  for (unsigned i = 1; i < std::max(1u, impl_->options.io_threads); ++i) {
    extra.emplace_back([this] { impl_->ioc.run(); });
  }
  impl_->ioc.run();
  for (auto& t : extra) t.join();
}

void Service::stop() { impl_->ioc.stop(); }

unsigned short Service::port() const {
  beast::error_code ec;
  const auto ep = impl_->acceptor.local_endpoint(ec);
  return ec ? 0 : ep.port();
}

std::size_t Service::scenario_count() const { return impl_->scenarios.size(); }

}  // namespace slewshape
