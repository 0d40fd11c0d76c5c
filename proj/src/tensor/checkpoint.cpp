#include "rcsearch/tensor/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "rcsearch/error.hpp"

namespace rcs::tensor {
namespace {

static_assert(sizeof(float) == 4);
constexpr char kMagic[4] = {'R', 'C', 'S', 'Q'};

std::uint32_t fnv1a32(const std::uint8_t *data, std::size_t n) {
  std::uint32_t h = 2166136261u;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 16777619u;
  }
  return h;
}

void put_u32(std::vector<std::uint8_t> &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t> &bytes, std::size_t limit) : bytes_(bytes), limit_(limit) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char *>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > limit_) throw Error(ErrorCode::kCorruptFile, "checkpoint truncated");
  }
  const std::vector<std::uint8_t> &bytes_;
  std::size_t limit_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const ParameterStore &store) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(store.size()));
  for (const Parameter &p : store.all()) {
    put_u32(out, static_cast<std::uint32_t>(p.name.size()));
    out.insert(out.end(), p.name.begin(), p.name.end());
    put_u32(out, 2);
    put_u32(out, static_cast<std::uint32_t>(p.value.rows()));
    put_u32(out, static_cast<std::uint32_t>(p.value.cols()));
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(p.value[i])));
    }
  }
  put_u32(out, fnv1a32(out.data(), out.size()));
  return out;
}

void decode_checkpoint(const std::vector<std::uint8_t> &bytes, ParameterStore &store) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::kCorruptFile, "not a checkpoint (bad magic or too short)");
  }
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored_sum = 0;
  for (int i = 0; i < 4; ++i) stored_sum |= static_cast<std::uint32_t>(bytes[body + static_cast<std::size_t>(i)]) << (8 * i);

  Reader r(bytes, body);
  r.str(4);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kVersionMismatch, "checkpoint format version " + std::to_string(version) +
                                                 ", expected " + std::to_string(kCheckpointVersion));
  }
  if (fnv1a32(bytes.data(), body) != stored_sum) throw Error(ErrorCode::kCorruptFile, "checksum mismatch");
  const std::uint32_t count = r.u32();
  if (count != store.size()) {
    throw Error(ErrorCode::kVersionMismatch, "checkpoint has " + std::to_string(count) + " parameters, model has " +
                                                 std::to_string(store.size()));
  }
  std::vector<Matrix> values;
  values.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    const Parameter &p = store[k];
    const std::string name = r.str(r.u32());
    if (name != p.name) throw Error(ErrorCode::kVersionMismatch, "parameter '" + name + "' where '" + p.name + "' expected");
    const std::uint32_t rank = r.u32();
    if (rank != 2) throw Error(ErrorCode::kCorruptFile, "unsupported rank " + std::to_string(rank));
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    if (rows != p.value.rows() || cols != p.value.cols()) {
      throw Error(ErrorCode::kVersionMismatch, "parameter '" + name + "' has shape [" + std::to_string(rows) + "x" +
                                                   std::to_string(cols) + "], model expects " +
                                                   p.value.shape().to_string());
    }
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<double>(r.f32());
    values.push_back(std::move(m));
  }
  if (r.pos() != body) throw Error(ErrorCode::kCorruptFile, "trailing bytes after last parameter");
  for (std::uint32_t k = 0; k < count; ++k) store[k].value = std::move(values[k]);
}

void save_checkpoint(const ParameterStore &store, const std::filesystem::path &path) {
  const auto bytes = encode_checkpoint(store);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

void load_checkpoint(const std::filesystem::path &path, ParameterStore &store) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  decode_checkpoint(bytes, store);
}

}  // namespace rcs::tensor
