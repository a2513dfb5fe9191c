#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trajstyle/engine/engine.hpp"

namespace trajstyle::service {

using StyleRegistry = std::map<std::string, std::shared_ptr<const engine::StylePolicy>>;

// Client -> server frames:
//   {"type":"start","style":s,"point":[x,y,z]}  {"type":"point","point":[x,y,z]}  {"type":"finish"}
// Server -> client frames:
//   {"type":"ack","session":id,"styles":[...]}
//   {"type":"generated","t":i,"point":[x,y,z],"loss":{content,style,position,end_position,velocity,total}}
//   {"type":"done"}
//   {"type":"error","code":c,"msg":m}  with c one of unknown_style, bad_request,
//   out_of_bounds, no_session, session_closed.
// A start while a session is open replaces it. The 50th generated frame is
// followed by done and the session is closed.
class ProtocolHandler {
 public:
  ProtocolHandler(const StyleRegistry& styles, std::atomic<std::uint64_t>& session_ids);

  std::vector<std::string> handle(std::string_view frame);
  bool session_open() const noexcept { return session_.has_value() && !session_->closed(); }

 private:
  std::vector<std::string> start(const std::string& style, const engine::Vec3& point);

  const StyleRegistry* styles_;
  std::atomic<std::uint64_t>* session_ids_;
  std::optional<engine::Session> session_;
};

std::string generated_frame(const engine::StepOutput& out);
std::string error_frame(std::string_view code, std::string_view msg);

}  // namespace trajstyle::service
