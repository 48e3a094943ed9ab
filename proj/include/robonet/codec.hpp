#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "robonet/netgraph.hpp"

namespace robonet {

/// Row-major dense real matrix as carried in messages.
struct RealMatrix {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<double> data;

  double operator()(std::uint32_t r, std::uint32_t c) const { return data[r * cols + c]; }
  bool operator==(const RealMatrix&) const = default;
};

class Value;
using ValueList = std::vector<Value>;
/// Key-value map that keeps insertion order (byte-exact re-encoding).
using ValueMap = std::vector<std::pair<std::string, Value>>;

/// Structured, self-describing message payload. Heterogeneous values may be
/// sent on the same link without declaring a type up front.
class Value {
 public:
  using Storage = std::variant<std::monostate, bool, std::int64_t, double, std::string,
                               std::vector<double>, RealMatrix, ValueList, ValueMap>;

  Value() = default;
  Value(bool b) : v_(b) {}
  Value(int i) : v_(static_cast<std::int64_t>(i)) {}
  Value(std::int64_t i) : v_(i) {}
  Value(std::uint64_t i) : v_(static_cast<std::int64_t>(i)) {}
  Value(double d) : v_(d) {}
  Value(const char* s) : v_(std::string(s)) {}
  Value(std::string s) : v_(std::move(s)) {}
  Value(std::vector<double> v) : v_(std::move(v)) {}
  Value(RealMatrix m) : v_(std::move(m)) {}
  Value(ValueList l) : v_(std::move(l)) {}
  Value(ValueMap m) : v_(std::move(m)) {}

  const Storage& storage() const { return v_; }

  bool is_null() const { return std::holds_alternative<std::monostate>(v_); }
  template <class T>
  bool is() const { return std::holds_alternative<T>(v_); }
  template <class T>
  const T& as() const;

  double as_real() const;  // accepts int64 or double
  std::int64_t as_int() const;
  /// Map lookup; nullptr when this is not a map or the key is absent.
  const Value* find(std::string_view key) const;
  const Value& at(std::string_view key) const;

  bool operator==(const Value& other) const;

 private:
  Storage v_;
};

using Bytes = std::vector<std::uint8_t>;

/// Tag-length-value encoding; layout documented in docs/wire_format.md.
Bytes encode(const Value& v);
Value decode(std::span<const std::uint8_t> bytes);

/// Message crossing agent boundaries: header plus encoded payload.
struct Envelope {
  AgentId sender = 0;
  std::uint64_t round = 0;
  double sent_at = 0.0;
  Bytes payload;
  bool operator==(const Envelope&) const = default;
};

Bytes encode_envelope(const Envelope& e);
Envelope decode_envelope(std::span<const std::uint8_t> bytes);

}  // namespace robonet
