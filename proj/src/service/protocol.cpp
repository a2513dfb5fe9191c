#include "trajstyle/service/protocol.hpp"

#include <cmath>
#include "json.hpp"

namespace trajstyle::service {

using nlohmann::json;

namespace {

struct BadRequest {
  std::string msg;
};

engine::Vec3 read_point(const json& msg) {
  const auto it = msg.find("point");
  if (it == msg.end() || !it->is_array() || it->size() != 3) throw BadRequest{"point must be [x,y,z]"};
  engine::Vec3 p{};
  for (std::size_t k = 0; k < 3; ++k) {
    if (!(*it)[k].is_number()) throw BadRequest{"point coordinates must be numbers"};
    p[k] = (*it)[k].get<double>();
    if (!std::isfinite(p[k])) throw BadRequest{"point coordinates must be finite"};
  }
  return p;
}

}  // namespace

std::string error_frame(std::string_view code, std::string_view msg) {
  return json{{"type", "error"}, {"code", code}, {"msg", msg}}.dump();
}

std::string generated_frame(const engine::StepOutput& out) {
  const auto& l = out.loss;
  return json{{"type", "generated"},
              {"t", out.t},
              {"point", {out.point[0], out.point[1], out.point[2]}},
              {"loss",
               {{"content", l.content},
                {"style", l.style},
                {"position", l.position},
                {"end_position", l.end_position},
                {"velocity", l.velocity},
                {"total", l.total}}}}
      .dump();
}

ProtocolHandler::ProtocolHandler(const StyleRegistry& styles, std::atomic<std::uint64_t>& session_ids)
    : styles_(&styles), session_ids_(&session_ids) {}

std::vector<std::string> ProtocolHandler::start(const std::string& style, const engine::Vec3& point) {
  const auto it = styles_->find(style);
  if (it == styles_->end()) return {error_frame("unknown_style", "no policy for style '" + style + "'")};
  try {
    session_.emplace(it->second, style, point);
  } catch (const engine::OutOfBoundsError& e) {
    return {error_frame("out_of_bounds", e.what())};
  }
  json names = json::array();
  for (const auto& [name, policy] : *styles_) names.push_back(name);
  const std::uint64_t id = session_ids_->fetch_add(1);
  return {json{{"type", "ack"}, {"session", id}, {"styles", names}}.dump(), generated_frame(session_->start_output())};
}

std::vector<std::string> ProtocolHandler::handle(std::string_view frame) {
  try {
    const json msg = json::parse(frame);
    if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string())
      throw BadRequest{"frame must be an object with a string type"};
    const std::string type = msg["type"];
    if (type == "start") {
      if (!msg.contains("style") || !msg["style"].is_string()) throw BadRequest{"start needs a style string"};
      return start(msg["style"].get<std::string>(), read_point(msg));
    }
    if (type == "point") {
      const engine::Vec3 p = read_point(msg);
      if (!session_) return {error_frame("no_session", "send start first")};
      if (session_->closed()) return {error_frame("session_closed", "session has finished")};
      engine::StepOutput out;
      try {
        out = session_->step(p);
      } catch (const engine::OutOfBoundsError& e) {
        return {error_frame("out_of_bounds", e.what())};
      }
      std::vector<std::string> replies{generated_frame(out)};
      if (out.terminal) replies.push_back(json{{"type", "done"}}.dump());
      return replies;
    }
    if (type == "finish") {
      if (!session_) return {error_frame("no_session", "no session to finish")};
      if (session_->closed()) return {error_frame("session_closed", "session has finished")};
      session_->close();
      return {json{{"type", "done"}}.dump()};
    }
    throw BadRequest{"unknown message type '" + type + "'"};
  } catch (const json::exception& e) {
    return {error_frame("bad_request", e.what())};
  } catch (const BadRequest& e) {
    return {error_frame("bad_request", e.msg)};
  }
}

}  // namespace trajstyle::service
