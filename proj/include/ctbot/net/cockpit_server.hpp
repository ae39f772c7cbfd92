#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>

namespace ctbot::net {

struct StaticContent {
  std::string content_type;
  std::string body;
};

struct CockpitServerConfig {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;
  /// Directory served for plain GET requests ("/" maps to index.html). Empty: none.
  std::filesystem::path static_root;
  /// Fixed documents by exact path, e.g. "/scene.json" or "/heatmap.csv".
  std::map<std::string, StaticContent> routes;
};

/// HTTP server for the browser cockpit. GET /ws upgrades to a WebSocket
/// carrying one JSON object per text frame in each direction; everything
/// else is served from `routes` and `static_root`.
class CockpitServer {
 public:
  using Reply = std::function<void(std::string)>;
  /// Called on the network thread for every inbound text frame. `reply`
  /// sends to that client only and is safe to call from any thread.
  using OnMessage = std::function<void(std::string text, Reply reply)>;
  /// Produces the snapshot sent to a client right after it connects.
  using OnConnect = std::function<std::string()>;

  CockpitServer(CockpitServerConfig config, OnMessage on_message, OnConnect on_connect = {});
  ~CockpitServer();

  CockpitServer(const CockpitServer&) = delete;
  CockpitServer& operator=(const CockpitServer&) = delete;

  /// Queues `text` for every connected client. Clients that fall behind
  /// drop their oldest queued frames (latest wins).
  void broadcast(std::string text);
  std::size_t client_count() const;
  unsigned short port() const noexcept;
  void stop();

  static constexpr std::size_t kMaxQueuedFrames = 8;

  struct Impl;

 private:
  std::shared_ptr<Impl> impl_;
};

/// Content type for a file name by extension.
std::string mime_type(const std::filesystem::path& path);

}  // namespace ctbot::net
