#include "trajstyle/numkit/archive.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace trajstyle::numkit {

namespace {

using Kind = CheckpointError::Kind;

class Writer {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  template <typename U>
  void uint(U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
  void f64(double value) { uint(std::bit_cast<std::uint64_t>(value)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  void need(std::size_t n, const char* what) const {
    if (in_.size() - pos_ < n) {
      throw CheckpointError(Kind::truncated, std::string("checkpoint truncated while reading ") + what);
    }
  }
  template <typename U>
  U uint(const char* what) {
    need(sizeof(U), what);
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(static_cast<U>(in_[pos_ + i]) << (8 * i));
    pos_ += sizeof(U);
    return value;
  }
  double f64(const char* what) { return std::bit_cast<double>(uint<std::uint64_t>(what)); }
  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

void TensorArchive::put(std::string name, Tensor tensor) {
  if (name.empty() || name.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw CheckpointError(Kind::malformed, "tensor name must be 1..65535 bytes");
  }
  if (tensor.rank() == 0) throw CheckpointError(Kind::malformed, "cannot store empty tensor '" + name + "'");
  if (contains(name)) throw CheckpointError(Kind::malformed, "duplicate tensor name '" + name + "'");
  entries_.emplace_back(std::move(name), std::move(tensor));
}

bool TensorArchive::contains(const std::string& name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return true;
  return false;
}

const Tensor& TensorArchive::get(const std::string& name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return t;
  throw CheckpointError(Kind::missing_tensor, "checkpoint has no tensor '" + name + "'");
}

const Tensor& TensorArchive::get(const std::string& name, const Shape& expected) const {
  const Tensor& t = get(name);
  if (t.shape() != expected) {
    throw CheckpointError(Kind::shape_mismatch, "tensor '" + name + "' has shape " +
                                                    to_string(t.shape()) + ", expected " +
                                                    to_string(expected));
  }
  return t;
}

std::vector<std::uint8_t> TensorArchive::serialize() const {
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.uint<std::uint32_t>(kVersion);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(entries_.size()));
  for (const auto& [name, tensor] : entries_) {
    w.uint<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.uint<std::uint8_t>(static_cast<std::uint8_t>(tensor.rank()));
    for (std::size_t d : tensor.shape()) w.uint<std::uint32_t>(static_cast<std::uint32_t>(d));
    for (double v : tensor.values()) w.f64(v);
  }
  return w.take();
}

TensorArchive TensorArchive::deserialize(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError(Kind::bad_magic, "not a checkpoint file (bad magic)");
  }
  r.take(sizeof(kMagic), "magic");
  const auto version = r.uint<std::uint32_t>("version");
  if (version != kVersion) {
    throw CheckpointError(Kind::version_mismatch, "checkpoint version " + std::to_string(version) +
                                                      " is not supported (expected " +
                                                      std::to_string(kVersion) + ")");
  }
  const auto count = r.uint<std::uint32_t>("tensor count");
  TensorArchive archive;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.uint<std::uint16_t>("tensor name length");
    const auto name_bytes = r.take(name_len, "tensor name");
    std::string name(name_bytes.begin(), name_bytes.end());
    const auto rank = r.uint<std::uint8_t>("tensor rank");
    if (rank < 1 || rank > 3) {
      throw CheckpointError(Kind::shape_mismatch, "tensor '" + name + "' has unsupported rank " +
                                                      std::to_string(rank));
    }
    Shape shape(rank);
    for (auto& d : shape) d = r.uint<std::uint32_t>("tensor dims");
    const std::size_t n = shape_size(shape);
    r.need(n * sizeof(double), "tensor payload");
    std::vector<double> data(n);
    for (auto& v : data) v = r.f64("tensor payload");
    archive.put(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  if (!r.done()) throw CheckpointError(Kind::malformed, "trailing bytes after last tensor");
  return archive;
}

void TensorArchive::save(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(Kind::io, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(Kind::io, "failed writing '" + path.string() + "'");
}

TensorArchive TensorArchive::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(Kind::io, "cannot open checkpoint '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

Tensor scalar_tensor(double value) { return Tensor({1}, std::vector<double>{value}); }

Tensor vector_tensor(std::span<const double> values) {
  return Tensor({values.size()}, std::vector<double>(values.begin(), values.end()));
}

Tensor string_tensor(const std::string& text) {
  std::vector<double> codes;
  codes.reserve(text.size() + 1);
  codes.push_back(static_cast<double>(text.size()));
  for (unsigned char ch : text) codes.push_back(static_cast<double>(ch));
  const std::size_t n = codes.size();
  return Tensor({n}, std::move(codes));
}

std::string tensor_string(const Tensor& tensor) {
  if (tensor.rank() != 1 || tensor.size() < 1) {
    throw CheckpointError(Kind::malformed, "string tensor must be rank 1");
  }
  const double declared = tensor[0];
  if (declared != std::floor(declared) || declared < 0 ||
      static_cast<std::size_t>(declared) != tensor.size() - 1) {
    throw CheckpointError(Kind::malformed, "string tensor length prefix is inconsistent");
  }
  std::string out;
  for (std::size_t i = 1; i < tensor.size(); ++i) {
    const double c = tensor[i];
    if (c < 0 || c > 255 || c != std::floor(c)) throw CheckpointError(Kind::malformed, "bad string byte");
    out.push_back(static_cast<char>(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace trajstyle::numkit
