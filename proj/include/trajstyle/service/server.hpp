#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "trajstyle/service/protocol.hpp"

namespace trajstyle::service {

// WebSocket server, one thread and one live session per connection. The
// listening socket is bound in the constructor, so port() is valid before
// run(); pass port 0 for an ephemeral port.
class Server {
 public:
  Server(StyleRegistry styles, const std::string& address, std::uint16_t port);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const noexcept { return port_; }

  // Accepts until stop() is called from another thread.
  void run();
  // Stops accepting and drops open connections.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::uint16_t port_ = 0;
};

}  // namespace trajstyle::service
