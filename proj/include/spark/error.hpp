#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace spark {

enum class ErrorKind {
  kInvalidInput,
  kConfig,
  kNotFound,
  kEmptyStore,
  kCorruptStore,
  kIo,
  kNumeric,
};

// Single exception type for the library; `kind` drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class CorruptStoreError : public Error {
 public:
  CorruptStoreError(const std::string& what, std::uint64_t offset)
      : Error(ErrorKind::kCorruptStore, what + " (at byte offset " + std::to_string(offset) + ")"),
        detail_(what),
        offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }
  // The message without the offset suffix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::uint64_t offset_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const char* what) {
  if (!cond) fail(kind, what);
}

// Note the message is built even when cond holds; hot paths test first.
inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace spark
