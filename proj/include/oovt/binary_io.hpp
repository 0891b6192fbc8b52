#pragma once

// Minimal versioned binary container used for embedding models and seq2seq
// checkpoints. Values are stored in host (little-endian) byte order.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "oovt/errors.hpp"
#include "oovt/text.hpp"

namespace oovt::binary {

static_assert(std::endian::native == std::endian::little, "model files assume a little-endian host");

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void magic(std::string_view m, std::uint32_t version) {
    out_.write(m.data(), static_cast<std::streamsize>(m.size()));
    u32(version);
  }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void i64(std::int64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(std::string_view s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  template <class T>
  void array(const std::vector<T>& v) {
    static_assert(std::is_arithmetic_v<T>);
    u64(v.size());
    raw(v.data(), v.size() * sizeof(T));
  }
  void raw(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  std::uint32_t magic(std::string_view m) {
    std::string got(m.size(), '\0');
    in_.read(got.data(), static_cast<std::streamsize>(got.size()));
    if (!in_ || got != m) throw DataError(source_ + ": not a " + std::string(m) + " file");
    return u32();
  }
  std::uint32_t u32() { return pod<std::uint32_t>(); }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  std::int64_t i64() { return pod<std::int64_t>(); }
  double f64() { return pod<double>(); }
  std::string str() {
    std::string s(checked_size(u64(), 1), '\0');
    raw(s.data(), s.size());
    return s;
  }
  template <class T>
  std::vector<T> array() {
    std::vector<T> v(checked_size(u64(), sizeof(T)));
    raw(v.data(), v.size() * sizeof(T));
    return v;
  }
  void raw(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) throw DataError(source_ + ": truncated file");
  }

 private:
  template <class T>
  T pod() {
    T v;
    raw(&v, sizeof v);
    return v;
  }
  std::size_t checked_size(std::uint64_t n, std::size_t elem) const {
    if (n > (std::uint64_t{1} << 40) / elem) throw DataError(source_ + ": corrupt length field");
    return static_cast<std::size_t>(n);
  }

  std::istream& in_;
  std::string source_;
};

}  // namespace oovt::binary
