#pragma once

// Little-endian fixed-width serialization helpers shared by the dataset,
// checkpoint and model-bundle formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "deepmusic/error.hpp"

namespace dm::io {

static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");

class Writer {
 public:
  template <typename T>
    requires std::is_arithmetic_v<T>
  void put(T value) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }

  template <typename T>
    requires std::is_arithmetic_v<T>
  void put_array(std::span<const T> values) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(values.data());
    buf_.insert(buf_.end(), p, p + values.size_bytes());
  }

  void put_bytes(std::span<const std::uint8_t> bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }
  void put_magic(std::string_view magic) { buf_.insert(buf_.end(), magic.begin(), magic.end()); }

  const std::vector<std::uint8_t>& bytes() const { return buf_; }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> data, std::string what) : data_(data), what_(std::move(what)) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  T get() {
    T value;
    std::memcpy(&value, need(sizeof(T)), sizeof(T));
    return value;
  }

  template <typename T>
    requires std::is_arithmetic_v<T>
  void get_array(std::span<T> out) {
    std::memcpy(out.data(), need(out.size_bytes()), out.size_bytes());
  }

  std::span<const std::uint8_t> get_bytes(std::size_t n) { return {need(n), n}; }

  void expect_magic(std::string_view magic) {
    if (data_.size() - pos_ < magic.size())
      fail(ErrorCode::Format, what_ + ": file too short for magic \"" + std::string(magic) + "\"");
    if (std::memcmp(data_.data() + pos_, magic.data(), magic.size()) != 0)
      fail(ErrorCode::Format, what_ + ": bad magic, expected \"" + std::string(magic) + "\"");
    pos_ += magic.size();
  }

  void expect_version(std::uint16_t supported) {
    const auto v = get<std::uint16_t>();
    if (v != supported)
      fail(ErrorCode::Version, what_ + ": unsupported format version " + std::to_string(v) + " (expected " +
                                   std::to_string(supported) + ")");
  }

  /// Sanity bound for counts read from a header.
  std::uint64_t get_count(std::uint64_t limit, const char* field) {
    const auto v = get<std::uint32_t>();
    if (v > limit) fail(ErrorCode::Format, what_ + ": implausible " + field + " = " + std::to_string(v));
    return v;
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  bool at_end() const { return pos_ == data_.size(); }
  const std::string& what() const { return what_; }

 private:
  const std::uint8_t* need(std::size_t n) {
    if (data_.size() - pos_ < n) fail(ErrorCode::Truncated, what_ + ": truncated payload");
    const std::uint8_t* p = data_.data() + pos_;
    pos_ += n;
    return p;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::string what_;
};

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace dm::io
