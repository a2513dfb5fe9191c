#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trajstyle/error.hpp"
#include "trajstyle/numkit/tensor.hpp"

namespace trajstyle::numkit {

class CheckpointError : public Error {
 public:
  enum class Kind { io, bad_magic, version_mismatch, truncated, shape_mismatch, missing_tensor, malformed };

  CheckpointError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Named tensor container persisted as little-endian binary:
//   magic "NPST3CKP" | version u32 | tensor count u32 |
//   per tensor: name length u16, UTF-8 name, rank u8, dims u32 x rank,
//               float64 payload.
// Entries keep insertion order, so serialization is byte-stable.
class TensorArchive {
 public:
  static constexpr char kMagic[8] = {'N', 'P', 'S', 'T', '3', 'C', 'K', 'P'};
  static constexpr std::uint32_t kVersion = 1;

  void put(std::string name, Tensor tensor);
  bool contains(const std::string& name) const;
  const Tensor& get(const std::string& name) const;
  // Also checks the stored shape; throws shape_mismatch otherwise.
  const Tensor& get(const std::string& name, const Shape& expected) const;

  const std::vector<std::pair<std::string, Tensor>>& entries() const noexcept { return entries_; }

  std::vector<std::uint8_t> serialize() const;
  static TensorArchive deserialize(std::span<const std::uint8_t> bytes);

  void save(const std::filesystem::path& path) const;
  static TensorArchive load(const std::filesystem::path& path);

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

// Scalars and short strings stored as rank-1 tensors.
Tensor scalar_tensor(double value);
Tensor vector_tensor(std::span<const double> values);
Tensor string_tensor(const std::string& text);
std::string tensor_string(const Tensor& tensor);

}  // namespace trajstyle::numkit
