#include "ces/store_io.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace ces {
namespace {

constexpr char kMagic[8] = {'C', 'E', 'S', 'C', 'K', 'P', 'T', '1'};

std::uint32_t crc32_ieee(const unsigned char* data, std::size_t n) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int j = 0; j < 8; ++j) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < n; ++i) {
    crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
  }
  return crc ^ 0xFFFFFFFFu;
}

void put_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
  buf.push_back(static_cast<unsigned char>(v & 0xFF));
  buf.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
  buf.push_back(static_cast<unsigned char>((v >> 16) & 0xFF));
  buf.push_back(static_cast<unsigned char>((v >> 24) & 0xFF));
}

void put_f64(std::vector<unsigned char>& buf, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) {
    buf.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xFF));
  }
}

class Reader {
 public:
  Reader(const unsigned char* data, std::size_t n) : data_(data), size_(n) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | data_[pos_ + i];
    pos_ += 4;
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | data_[pos_ + i];
    pos_ += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return size_ - pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > size_) throw std::runtime_error("load_store: truncated file");
  }
  const unsigned char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_store(const CheckpointStore& store, const std::string& path) {
  if (store.checkpoints.empty()) throw std::invalid_argument("save_store: empty store");
  const NetworkSpec& spec = store.spec();

  std::vector<unsigned char> buf;
  buf.insert(buf.end(), kMagic, kMagic + 8);
  put_u32(buf, static_cast<std::uint32_t>(spec.layer_sizes.size()));
  for (std::size_t s : spec.layer_sizes) put_u32(buf, static_cast<std::uint32_t>(s));
  put_u32(buf, static_cast<std::uint32_t>(store.loss.type));
  switch (store.loss.type) {
    case LossKind::Type::squared_error:
      break;
    case LossKind::Type::cross_entropy:
      put_u32(buf, static_cast<std::uint32_t>(store.loss.classes));
      break;
    case LossKind::Type::pinball:
      put_f64(buf, store.loss.beta_low);
      break;
    case LossKind::Type::pinball_pair:
      put_f64(buf, store.loss.beta_low);
      put_f64(buf, store.loss.beta_high);
      break;
  }
  put_u32(buf, static_cast<std::uint32_t>(store.config.tau));
  put_u32(buf, static_cast<std::uint32_t>(store.config.t_max));
  put_u32(buf, static_cast<std::uint32_t>(store.checkpoints.size()));
  for (const Checkpoint& c : store.checkpoints) {
    put_u32(buf, static_cast<std::uint32_t>(c.epoch));
    for (double w : c.weights) put_f64(buf, w);
  }
  put_u32(buf, crc32_ieee(buf.data(), buf.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_store: cannot open " + path);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("save_store: write failed for " + path);
}

CheckpointStore load_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_store: cannot open " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());

  if (buf.size() < 12 || std::memcmp(buf.data(), kMagic, 8) != 0) {
    throw std::runtime_error("load_store: bad magic (not a checkpoint store or wrong version)");
  }
  const std::size_t payload = buf.size() - 4;
  const std::uint32_t stored_crc =
      static_cast<std::uint32_t>(buf[payload]) | (static_cast<std::uint32_t>(buf[payload + 1]) << 8) |
      (static_cast<std::uint32_t>(buf[payload + 2]) << 16) |
      (static_cast<std::uint32_t>(buf[payload + 3]) << 24);
  if (crc32_ieee(buf.data(), payload) != stored_crc) {
    throw std::runtime_error("load_store: checksum failure");
  }

  Reader r(buf.data() + 8, payload - 8);
  CheckpointStore store;
  NetworkSpec spec;
  const std::uint32_t nlayers = r.u32();
  if (nlayers < 3 || nlayers > 64) throw std::runtime_error("load_store: bad layer count");
  spec.layer_sizes.resize(nlayers);
  for (auto& s : spec.layer_sizes) s = r.u32();

  const std::uint32_t tag = r.u32();
  switch (tag) {
    case 0:
      store.loss = LossKind::squared_error();
      break;
    case 1:
      store.loss = LossKind::cross_entropy(static_cast<int>(r.u32()));
      break;
    case 2:
      store.loss = LossKind::pinball(r.f64());
      break;
    case 3: {
      const double lo = r.f64();
      const double hi = r.f64();
      store.loss = LossKind::pinball_pair(lo, hi);
      break;
    }
    default:
      throw std::runtime_error("load_store: unknown loss tag");
  }
  spec.output_heads = store.loss.type == LossKind::Type::pinball_pair ? 2 : 1;

  store.config.tau = static_cast<int>(r.u32());
  store.config.t_max = static_cast<int>(r.u32());
  const std::uint32_t count = r.u32();
  const std::size_t nw = weight_count(spec);
  store.checkpoints.resize(count);
  for (std::uint32_t c = 0; c < count; ++c) {
    store.checkpoints[c].epoch = static_cast<int>(r.u32());
    store.checkpoints[c].spec = spec;
    store.checkpoints[c].weights.resize(nw);
    for (std::size_t i = 0; i < nw; ++i) store.checkpoints[c].weights[i] = r.f64();
  }
  if (r.remaining() != 0) throw std::runtime_error("load_store: trailing bytes");
  return store;
}

bool store_equal(const CheckpointStore& a, const CheckpointStore& b) {
  if (a.checkpoints.size() != b.checkpoints.size()) return false;
  if (a.loss != b.loss) return false;
  if (a.config.tau != b.config.tau || a.config.t_max != b.config.t_max) return false;
  for (std::size_t i = 0; i < a.checkpoints.size(); ++i) {
    const Checkpoint& x = a.checkpoints[i];
    const Checkpoint& y = b.checkpoints[i];
    if (x.epoch != y.epoch || x.spec.layer_sizes != y.spec.layer_sizes) return false;
    if (x.weights.size() != y.weights.size()) return false;
    if (std::memcmp(x.weights.data(), y.weights.data(), x.weights.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace ces
