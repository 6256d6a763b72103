// yoho/common.hpp

// Copyright 2026 The yoho-sed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <functional>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace yoho {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input data (files, annotations, audio).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Tensor or grid shapes that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A checkpoint that does not fit the requested architecture or profile.
class ModelMismatchError : public Error {
 public:
  using Error::Error;
};

/// Bad argument values (rates out of range, empty sets, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

namespace detail {
inline std::size_t& thread_override() {
  thread_local std::size_t n = 0;
  return n;
}
}  // namespace detail

/// Pins parallel_for on the calling thread to `n` workers for the lifetime of
/// the guard (0 = no pin).
class ScopedThreadCount {
 public:
  explicit ScopedThreadCount(std::size_t n) : saved_(detail::thread_override()) { detail::thread_override() = n; }
  ~ScopedThreadCount() { detail::thread_override() = saved_; }
  ScopedThreadCount(const ScopedThreadCount&) = delete;
  ScopedThreadCount& operator=(const ScopedThreadCount&) = delete;

 private:
  std::size_t saved_;
};

/// Worker count: a ScopedThreadCount pin, else YOHO_NUM_THREADS if set and
/// positive, else hardware concurrency.
inline std::size_t num_threads() {
  if (detail::thread_override() > 0) return detail::thread_override();
  if (const char* env = std::getenv("YOHO_NUM_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

/// Runs fn(i) for i in [0, n). Items are split into contiguous chunks, one per
/// worker; fn must only write state owned by index i. parallel_for calls made
/// from inside fn run serially.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = std::min(num_threads(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
    pool.emplace_back([&, w, lo, hi] {
      detail::thread_override() = 1;
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace io {

// Little-endian binary helpers shared by the feature cache and checkpoints.

inline void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw DataError("unexpected end of file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void write_f32(std::ostream& os, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32(os, bits);
}

inline float read_f32(std::istream& is) {
  std::uint32_t bits = read_u32(is);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

inline void write_string(std::ostream& os, std::string_view s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& is, std::size_t max_len = 1u << 24) {
  std::uint32_t n = read_u32(is);
  if (n > max_len) throw DataError("string length out of range");
  std::string s(n, '\0');
  if (n > 0 && !is.read(s.data(), n)) throw DataError("unexpected end of file");
  return s;
}

}  // namespace io

/// Splits "k=v\nk=v" blocks into pairs; used for config blocks in binary files.
inline std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw DataError("malformed key=value line: " + std::string(line));
    out.emplace_back(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
  }
  return out;
}

}  // namespace yoho
