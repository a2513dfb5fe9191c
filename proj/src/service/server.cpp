#include "trajstyle/service/server.hpp"

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <list>

namespace trajstyle::service {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

struct Server::Impl {
  StyleRegistry styles;
  std::atomic<std::uint64_t> session_ids{1};
  asio::io_context io;
  tcp::acceptor acceptor{io};
  std::atomic<bool> stopping{false};

  std::mutex mu;
  std::list<std::thread> workers;
  std::list<std::shared_ptr<tcp::socket>> live;  // for shutdown on stop()

  void serve(std::shared_ptr<tcp::socket> sock) {
    try {
      websocket::stream<tcp::socket&> ws(*sock);
      ws.accept();
      ws.text(true);
      ProtocolHandler handler(styles, session_ids);
      beast::flat_buffer buf;
      for (;;) {
        buf.clear();
        ws.read(buf);
        // Frames are handled strictly in arrival order; a fast client simply
        // queues in the socket.
        for (const std::string& reply : handler.handle(beast::buffers_to_string(buf.data())))
          ws.write(asio::buffer(reply));
      }
    } catch (const std::exception&) {
      // closed by the peer or by stop()
    }
    std::lock_guard lock(mu);
    live.remove(sock);
  }
};

Server::Server(StyleRegistry styles, const std::string& address, std::uint16_t port) : impl_(std::make_unique<Impl>()) {
  if (styles.empty()) throw ValueError("server needs at least one style");
  impl_->styles = std::move(styles);
  const tcp::endpoint ep(asio::ip::make_address(address), port);
  impl_->acceptor.open(ep.protocol());
  impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
  impl_->acceptor.bind(ep);
  impl_->acceptor.listen();
  port_ = impl_->acceptor.local_endpoint().port();
}

Server::~Server() {
  stop();
  std::list<std::thread> workers;
  {
    std::lock_guard lock(impl_->mu);
    workers.swap(impl_->workers);
  }
  for (auto& t : workers)
    if (t.joinable()) t.join();
}

void Server::run() {
  while (!impl_->stopping) {
    auto sock = std::make_shared<tcp::socket>(impl_->io);
    boost::system::error_code ec;
    impl_->acceptor.accept(*sock, ec);
    if (impl_->stopping) break;
    if (ec) continue;
    std::lock_guard lock(impl_->mu);
    impl_->live.push_back(sock);
    impl_->workers.emplace_back([this, sock] { impl_->serve(sock); });
  }
}

void Server::stop() {
  if (impl_->stopping.exchange(true)) return;
  // Wake a blocking accept() with a throwaway connection.
  try {
    asio::io_context io;
    tcp::socket s(io);
    s.connect(tcp::endpoint(impl_->acceptor.local_endpoint().address(), port_));
  } catch (const std::exception&) {
  }
  std::lock_guard lock(impl_->mu);
  for (auto& s : impl_->live) {
    boost::system::error_code ec;
    s->shutdown(tcp::socket::shutdown_both, ec);
  }
}

}  // namespace trajstyle::service
