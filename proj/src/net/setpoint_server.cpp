#include "ctbot/net/setpoint_server.hpp"

#include <atomic>
#include <thread>

#include <boost/asio.hpp>

#include "ctbot/controller_protocol.hpp"
#include "ctbot/errors.hpp"

namespace ctbot::net {

namespace asio = boost::asio;
using tcp = asio::ip::tcp;

namespace {

class Session : public std::enable_shared_from_this<Session> {
 public:
  Session(tcp::socket socket, SetpointServer::Submit& submit)
      : socket_(std::move(socket)), buffer_(SetpointServer::kMaxLine), submit_(submit) {}

  void start() { read_next(); }

 private:
  void read_next() {
    asio::async_read_until(socket_, buffer_, '\n', [self = shared_from_this()](auto ec, std::size_t n) {
      self->on_line(ec, n);
    });
  }

  void on_line(boost::system::error_code ec, std::size_t n) {
    if (ec == asio::error::not_found) {
      write(error_reply("malformed", "line exceeds 65536 bytes"), /*close_after=*/true);
      return;
    }
    if (ec) return;
    std::string line(asio::buffers_begin(buffer_.data()), asio::buffers_begin(buffer_.data()) + static_cast<long>(n));
    buffer_.consume(n);
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
    if (line.empty()) {
      read_next();
      return;
    }
    auto self = shared_from_this();
    auto executor = socket_.get_executor();
    submit_(std::move(line), [self, executor](std::string reply) {
      asio::post(executor, [self, reply = std::move(reply)]() mutable { self->write(std::move(reply), false); });
    });
  }

  void write(std::string reply, bool close_after) {
    out_ = std::move(reply);
    out_.push_back('\n');
    asio::async_write(socket_, asio::buffer(out_), [self = shared_from_this(), close_after](auto ec, std::size_t) {
      if (ec || close_after) {
        boost::system::error_code ignored;
        self->socket_.shutdown(tcp::socket::shutdown_both, ignored);
        return;
      }
      self->read_next();
    });
  }

  tcp::socket socket_;
  asio::streambuf buffer_;
  std::string out_;
  SetpointServer::Submit& submit_;
};

}  // namespace

struct SetpointServer::Impl {
  asio::io_context ioc;
  tcp::acceptor acceptor{ioc};
  Submit submit;
  std::thread thread;
  std::atomic<bool> stopped{false};
  unsigned short port = 0;

  void accept() {
    acceptor.async_accept([this](boost::system::error_code ec, tcp::socket socket) {
      if (ec) return;
      socket.set_option(tcp::no_delay(true));
      std::make_shared<Session>(std::move(socket), submit)->start();
      accept();
    });
  }
};

SetpointServer::SetpointServer(Submit submit, const std::string& address, unsigned short port)
    : impl_(std::make_unique<Impl>()) {
  impl_->submit = std::move(submit);
  try {
    const tcp::endpoint endpoint(asio::ip::make_address(address), port);
    impl_->acceptor.open(endpoint.protocol());
    impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
    impl_->acceptor.bind(endpoint);
    impl_->acceptor.listen();
    impl_->port = impl_->acceptor.local_endpoint().port();
  } catch (const boost::system::system_error& e) {
    throw IoError("setpoint server cannot listen on " + address + ":" + std::to_string(port) + ": " + e.what());
  }
  impl_->accept();
  impl_->thread = std::thread([this] { impl_->ioc.run(); });
}

SetpointServer::~SetpointServer() { stop(); }

unsigned short SetpointServer::port() const noexcept { return impl_->port; }

void SetpointServer::stop() {
  if (impl_->stopped.exchange(true)) return;
  impl_->ioc.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace ctbot::net
