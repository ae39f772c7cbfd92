#include "ctbot/net/cockpit_server.hpp"

#include <atomic>
#include <deque>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "ctbot/errors.hpp"

namespace ctbot::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

std::string mime_type(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
  if (ext == ".css") return "text/css; charset=utf-8";
  if (ext == ".json" || ext == ".map") return "application/json";
  if (ext == ".csv") return "text/csv; charset=utf-8";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".wasm") return "application/wasm";
  return "application/octet-stream";
}

class WsSession;

struct CockpitServer::Impl {
  asio::io_context ioc;
  tcp::acceptor acceptor{ioc};
  CockpitServerConfig config;
  OnMessage on_message;
  OnConnect on_connect;
  std::thread thread;
  std::atomic<bool> stopped{false};
  unsigned short port = 0;

  mutable std::mutex sessions_mutex;
  std::vector<std::weak_ptr<WsSession>> sessions;

  void accept();
  void add_session(const std::shared_ptr<WsSession>& s) {
    std::lock_guard lock(sessions_mutex);
    std::erase_if(sessions, [](const auto& w) { return w.expired(); });
    sessions.push_back(s);
  }
};

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, CockpitServer::Impl* server) : ws_(std::move(socket)), server_(server) {}

  void run(http::request<http::string_body> request) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(request, [self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
  }

  // network thread only
  void send(std::string text) {
    queue_.push_back(std::move(text));
    // keep the in-flight frame, drop the oldest waiting ones
    while (queue_.size() > CockpitServer::kMaxQueuedFrames) queue_.erase(queue_.begin() + 1);
    if (queue_.size() == 1) write_front();
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    server_->add_session(shared_from_this());
    if (server_->on_connect) send(server_->on_connect());
    read_next();
  }

  void read_next() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) return;
    std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    std::weak_ptr<WsSession> weak = weak_from_this();
    auto executor = ws_.get_executor();
    server_->on_message(std::move(text), [weak, executor](std::string reply) {
      asio::post(executor, [weak, reply = std::move(reply)]() mutable {
        if (auto s = weak.lock()) s->send(std::move(reply));
      });
    });
    read_next();
  }

  void write_front() {
    ws_.text(true);
    ws_.async_write(asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->queue_.pop_front();
      if (!self->queue_.empty()) self->write_front();
    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  CockpitServer::Impl* server_;
};

namespace {

http::response<http::string_body> make_response(const http::request<http::string_body>& req, http::status status,
                                                 const std::string& content_type, std::string body) {
  http::response<http::string_body> res{status, req.version()};
  res.set(http::field::server, "ctbot");
  res.set(http::field::content_type, content_type);
  res.set(http::field::cache_control, "no-store");
  res.keep_alive(req.keep_alive());
  res.content_length(body.size());
  if (req.method() != http::verb::head) res.body() = std::move(body);
  return res;
}

http::response<http::string_body> handle_request(const http::request<http::string_body>& req,
                                                 const CockpitServerConfig& config) {
  if (req.method() != http::verb::get && req.method() != http::verb::head) {
    return make_response(req, http::status::method_not_allowed, "text/plain", "method not allowed\n");
  }
  std::string target(req.target());
  if (auto q = target.find('?'); q != std::string::npos) target.resize(q);
  if (target.empty() || target.front() != '/' || target.find("..") != std::string::npos) {
    return make_response(req, http::status::bad_request, "text/plain", "bad path\n");
  }
  if (auto it = config.routes.find(target); it != config.routes.end()) {
    return make_response(req, http::status::ok, it->second.content_type, it->second.body);
  }
  if (!config.static_root.empty()) {
    if (target == "/") target = "/index.html";
    const std::filesystem::path file = config.static_root / target.substr(1);
    std::error_code ec;
    if (std::filesystem::is_regular_file(file, ec)) {
      std::ifstream in(file, std::ios::binary);
      std::ostringstream body;
      body << in.rdbuf();
      return make_response(req, http::status::ok, mime_type(file), body.str());
    }
  }
  return make_response(req, http::status::not_found, "text/plain", "not found\n");
}

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, CockpitServer::Impl* server) : stream_(std::move(socket)), server_(server) {}

  void run() { read_next(); }

 private:
  void read_next() {
    request_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, request_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (websocket::is_upgrade(request_)) {
      if (request_.target() == "/ws") {
        stream_.expires_never();
        std::make_shared<WsSession>(stream_.release_socket(), server_)->run(std::move(request_));
        return;
      }
    }
    response_ = std::make_shared<http::response<http::string_body>>(handle_request(request_, server_->config));
    http::async_write(stream_, *response_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec || !self->response_->keep_alive()) {
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
        return;
      }
      self->read_next();
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
  std::shared_ptr<http::response<http::string_body>> response_;
  CockpitServer::Impl* server_;
};

}  // namespace

void CockpitServer::Impl::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    socket.set_option(tcp::no_delay(true));
    std::make_shared<HttpSession>(std::move(socket), this)->run();
    accept();
  });
}

CockpitServer::CockpitServer(CockpitServerConfig config, OnMessage on_message, OnConnect on_connect)
    : impl_(std::make_shared<Impl>()) {
  impl_->config = std::move(config);
  impl_->on_message = std::move(on_message);
  impl_->on_connect = std::move(on_connect);
  const auto& cfg = impl_->config;
  try {
    const tcp::endpoint endpoint(asio::ip::make_address(cfg.address), cfg.port);
    impl_->acceptor.open(endpoint.protocol());
    impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
    impl_->acceptor.bind(endpoint);
    impl_->acceptor.listen();
    impl_->port = impl_->acceptor.local_endpoint().port();
  } catch (const boost::system::system_error& e) {
    throw IoError("cockpit server cannot listen on " + cfg.address + ":" + std::to_string(cfg.port) + ": " +
                  e.what());
  }
  impl_->accept();
  impl_->thread = std::thread([impl = impl_.get()] { impl->ioc.run(); });
}

CockpitServer::~CockpitServer() { stop(); }

void CockpitServer::broadcast(std::string text) {
  auto shared = std::make_shared<const std::string>(std::move(text));
  asio::post(impl_->ioc, [impl = impl_.get(), shared] {
    std::vector<std::shared_ptr<WsSession>> live;
    {
      std::lock_guard lock(impl->sessions_mutex);
      for (const auto& w : impl->sessions) {
        if (auto s = w.lock()) live.push_back(std::move(s));
      }
    }
    for (const auto& s : live) s->send(*shared);
  });
}

std::size_t CockpitServer::client_count() const {
  std::lock_guard lock(impl_->sessions_mutex);
  std::size_t n = 0;
  for (const auto& w : impl_->sessions) n += w.expired() ? 0 : 1;
  return n;
}

unsigned short CockpitServer::port() const noexcept { return impl_->port; }

void CockpitServer::stop() {
  if (impl_->stopped.exchange(true)) return;
  impl_->ioc.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace ctbot::net
