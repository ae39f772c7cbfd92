#pragma once

#include <functional>
#include <memory>
#include <string>

namespace ctbot::net {

/// Line-delimited JSON over TCP in front of the controller protocol. Each
/// request line gets exactly one reply line; a connection's requests are
/// handled in order, and lines from all connections reach the controller in
/// arrival order. No authentication: bind to a trusted interface only.
class SetpointServer {
 public:
  using Reply = std::function<void(std::string)>;
  /// Queues one request line; `reply` may be called from any thread.
  using Submit = std::function<void(std::string line, Reply reply)>;

  /// Binds immediately (port 0 picks a free port); throws IoError if the
  /// address is unavailable.
  SetpointServer(Submit submit, const std::string& address, unsigned short port);
  ~SetpointServer();

  SetpointServer(const SetpointServer&) = delete;
  SetpointServer& operator=(const SetpointServer&) = delete;

  unsigned short port() const noexcept;
  void stop();

  static constexpr std::size_t kMaxLine = 64 * 1024;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ctbot::net
