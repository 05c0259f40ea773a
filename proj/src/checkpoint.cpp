#include "stck/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; big-endian hosts need byte swaps");

namespace stck {

namespace {

constexpr char kMagic[4] = {'S', 'T', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(const std::string& buf, std::size_t& pos) {
  if (pos + 4 > buf.size()) throw std::runtime_error("checkpoint: truncated file");
  std::uint32_t v;
  std::memcpy(&v, buf.data() + pos, 4);
  pos += 4;
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const NamedTensors& tensors) {
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.append(name);
    put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape) put_u32(out, static_cast<std::uint32_t>(d));
    out.append(reinterpret_cast<const char*>(t.data.data()), t.data.size() * sizeof(double));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("checkpoint: write failed for " + path);
}

NamedTensors load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  std::size_t pos = 0;
  if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  pos = 4;
  const std::uint32_t version = get_u32(buf, pos);
  if (version != kVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  const std::uint32_t count = get_u32(buf, pos);

  NamedTensors out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = get_u32(buf, pos);
    if (pos + name_len > buf.size()) throw std::runtime_error("checkpoint: truncated name");
    std::string name(buf.data() + pos, name_len);
    pos += name_len;
    const std::uint32_t ndim = get_u32(buf, pos);
    Shape shape(ndim);
    for (std::uint32_t d = 0; d < ndim; ++d)
      shape[d] = static_cast<int>(get_u32(buf, pos));
    const std::size_t n = static_cast<std::size_t>(numel(shape));
    if (pos + n * sizeof(double) > buf.size())
      throw std::runtime_error("checkpoint: truncated data for tensor " + name);
    Tensor t(shape);
    std::memcpy(t.data.data(), buf.data() + pos, n * sizeof(double));
    pos += n * sizeof(double);
    out.emplace_back(std::move(name), std::move(t));
  }
  if (pos != buf.size())
    throw std::runtime_error("checkpoint: trailing bytes in " + path);
  return out;
}

}  // namespace stck
