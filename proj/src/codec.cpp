#include "robonet/codec.hpp"

#include <bit>
#include <cstring>
#include <limits>

#include "robonet/error.hpp"

namespace robonet {

namespace {

enum Tag : std::uint8_t {
  kNull = 0x00,
  kBool = 0x01,
  kInt = 0x02,
  kReal = 0x03,
  kText = 0x04,
  kVector = 0x05,
  kMatrix = 0x06,
  kList = 0x07,
  kMap = 0x08,
};

constexpr int kMaxDepth = 64;

void put_u32(Bytes& out, std::uint32_t x) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(x >> (8 * k)));
}
void put_u64(Bytes& out, std::uint64_t x) {
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<std::uint8_t>(x >> (8 * k)));
}
void put_f64(Bytes& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

std::uint32_t checked_u32(std::size_t n) {
  if (n > std::numeric_limits<std::uint32_t>::max())
    throw CodecError("value too large for a u32 length field");
  return static_cast<std::uint32_t>(n);
}

// Writes tag + placeholder length, returns the offset of the length field.
std::size_t open(Bytes& out, Tag tag) {
  out.push_back(tag);
  std::size_t at = out.size();
  put_u32(out, 0);
  return at;
}
void close(Bytes& out, std::size_t at) {
  std::uint32_t len = checked_u32(out.size() - at - 4);
  for (int k = 0; k < 4; ++k) out[at + k] = static_cast<std::uint8_t>(len >> (8 * k));
}

void encode_into(Bytes& out, const Value& v, int depth) {
  if (depth > kMaxDepth) throw CodecError("nesting deeper than 64 levels");
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          close(out, open(out, kNull));
        } else if constexpr (std::is_same_v<T, bool>) {
          auto at = open(out, kBool);
          out.push_back(x ? 1 : 0);
          close(out, at);
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          auto at = open(out, kInt);
          put_u64(out, static_cast<std::uint64_t>(x));
          close(out, at);
        } else if constexpr (std::is_same_v<T, double>) {
          auto at = open(out, kReal);
          put_f64(out, x);
          close(out, at);
        } else if constexpr (std::is_same_v<T, std::string>) {
          auto at = open(out, kText);
          out.insert(out.end(), x.begin(), x.end());
          close(out, at);
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          auto at = open(out, kVector);
          for (double d : x) put_f64(out, d);
          close(out, at);
        } else if constexpr (std::is_same_v<T, RealMatrix>) {
          if (static_cast<std::size_t>(x.rows) * x.cols != x.data.size())
            throw CodecError("matrix data size does not match its shape");
          auto at = open(out, kMatrix);
          put_u32(out, x.rows);
          put_u32(out, x.cols);
          for (double d : x.data) put_f64(out, d);
          close(out, at);
        } else if constexpr (std::is_same_v<T, ValueList>) {
          auto at = open(out, kList);
          put_u32(out, checked_u32(x.size()));
          for (const auto& e : x) encode_into(out, e, depth + 1);
          close(out, at);
        } else if constexpr (std::is_same_v<T, ValueMap>) {
          auto at = open(out, kMap);
          put_u32(out, checked_u32(x.size()));
          for (const auto& [key, e] : x) {
            put_u32(out, checked_u32(key.size()));
            out.insert(out.end(), key.begin(), key.end());
            encode_into(out, e, depth + 1);
          }
          close(out, at);
        }
      },
      v.storage());
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  std::size_t remaining() const { return b_.size() - pos_; }
  std::size_t pos() const { return pos_; }

  void need(std::size_t n) const {
    if (remaining() < n) throw CodecError("truncated payload");
  }
  std::uint8_t u8() {
    need(1);
    return b_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t x = 0;
    for (int k = 0; k < 4; ++k) x |= static_cast<std::uint32_t>(b_[pos_ + k]) << (8 * k);
    pos_ += 4;
    return x;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t x = 0;
    for (int k = 0; k < 8; ++k) x |= static_cast<std::uint64_t>(b_[pos_ + k]) << (8 * k);
    pos_ += 8;
    return x;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string text(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

Value decode_one(Reader& r, int depth) {
  if (depth > kMaxDepth) throw CodecError("nesting deeper than 64 levels");
  const std::uint8_t tag = r.u8();
  const std::uint32_t len = r.u32();
  r.need(len);
  const std::size_t end = r.pos() + len;
  auto expect_len = [&](std::size_t want) {
    if (len != want) throw CodecError("bad length for tag " + std::to_string(tag));
  };

  Value out;
  switch (tag) {
    case kNull:
      expect_len(0);
      break;
    case kBool: {
      expect_len(1);
      std::uint8_t b = r.u8();
      if (b > 1) throw CodecError("bool byte must be 0 or 1");
      out = Value(b == 1);
      break;
    }
    case kInt:
      expect_len(8);
      out = Value(static_cast<std::int64_t>(r.u64()));
      break;
    case kReal:
      expect_len(8);
      out = Value(r.f64());
      break;
    case kText:
      out = Value(r.text(len));
      break;
    case kVector: {
      if (len % 8 != 0) throw CodecError("vector length not a multiple of 8");
      std::vector<double> v(len / 8);
      for (auto& d : v) d = r.f64();
      out = Value(std::move(v));
      break;
    }
    case kMatrix: {
      if (len < 8) throw CodecError("matrix header truncated");
      RealMatrix m;
      m.rows = r.u32();
      m.cols = r.u32();
      std::uint64_t count = static_cast<std::uint64_t>(m.rows) * m.cols;
      if (len != 8 + 8 * count) throw CodecError("matrix length mismatch");
      m.data.resize(count);
      for (auto& d : m.data) d = r.f64();
      out = Value(std::move(m));
      break;
    }
    case kList: {
      std::uint32_t count = r.u32();
      ValueList list;
      list.reserve(std::min<std::uint32_t>(count, len));
      for (std::uint32_t k = 0; k < count; ++k) {
        if (r.pos() >= end) throw CodecError("list element past declared length");
        list.push_back(decode_one(r, depth + 1));
      }
      out = Value(std::move(list));
      break;
    }
    case kMap: {
      std::uint32_t count = r.u32();
      ValueMap map;
      for (std::uint32_t k = 0; k < count; ++k) {
        if (r.pos() >= end) throw CodecError("map entry past declared length");
        std::uint32_t klen = r.u32();
        std::string key = r.text(klen);
        map.emplace_back(std::move(key), decode_one(r, depth + 1));
      }
      out = Value(std::move(map));
      break;
    }
    default:
      throw CodecError("unknown tag " + std::to_string(tag));
  }
  if (r.pos() != end) throw CodecError("length field disagrees with contents");
  return out;
}

}  // namespace

template <class T>
const T& Value::as() const {
  if (const T* p = std::get_if<T>(&v_)) return *p;
  throw CodecError("payload holds a different kind of value");
}

template const bool& Value::as<bool>() const;
template const std::int64_t& Value::as<std::int64_t>() const;
template const double& Value::as<double>() const;
template const std::string& Value::as<std::string>() const;
template const std::vector<double>& Value::as<std::vector<double>>() const;
template const RealMatrix& Value::as<RealMatrix>() const;
template const ValueList& Value::as<ValueList>() const;
template const ValueMap& Value::as<ValueMap>() const;

double Value::as_real() const {
  if (auto p = std::get_if<double>(&v_)) return *p;
  if (auto p = std::get_if<std::int64_t>(&v_)) return static_cast<double>(*p);
  throw CodecError("payload is not a real number");
}

std::int64_t Value::as_int() const {
  if (auto p = std::get_if<std::int64_t>(&v_)) return *p;
  throw CodecError("payload is not an integer");
}

const Value* Value::find(std::string_view key) const {
  auto m = std::get_if<ValueMap>(&v_);
  if (!m) return nullptr;
  for (const auto& [k, v] : *m)
    if (k == key) return &v;
  return nullptr;
}

const Value& Value::at(std::string_view key) const {
  if (auto p = find(key)) return *p;
  throw CodecError("missing key '" + std::string(key) + "'");
}

bool Value::operator==(const Value& other) const {
  // Reals compare bitwise so NaN payloads still round-trip as equal.
  if (auto a = std::get_if<double>(&v_)) {
    auto b = std::get_if<double>(&other.v_);
    return b && std::bit_cast<std::uint64_t>(*a) == std::bit_cast<std::uint64_t>(*b);
  }
  return v_ == other.v_;
}

Bytes encode(const Value& v) {
  Bytes out;
  encode_into(out, v, 0);
  return out;
}

Value decode(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw CodecError("empty byte sequence");
  Reader r(bytes);
  Value v = decode_one(r, 0);
  if (r.remaining() != 0) throw CodecError("trailing bytes after payload");
  return v;
}

Bytes encode_envelope(const Envelope& e) {
  Bytes out;
  out.reserve(24 + e.payload.size());
  put_u32(out, static_cast<std::uint32_t>(e.sender));
  put_u64(out, e.round);
  put_f64(out, e.sent_at);
  put_u32(out, checked_u32(e.payload.size()));
  out.insert(out.end(), e.payload.begin(), e.payload.end());
  return out;
}

Envelope decode_envelope(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  Envelope e;
  e.sender = static_cast<AgentId>(r.u32());
  e.round = r.u64();
  e.sent_at = r.f64();
  std::uint32_t len = r.u32();
  if (r.remaining() != len) throw CodecError("envelope payload length mismatch");
  e.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(r.pos()), bytes.end());
  return e;
}

}  // namespace robonet
