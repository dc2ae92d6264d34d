#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>

namespace geobound {

/// A computation would exceed the configured memory cap.
class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cooperative cancellation after the deadline passed.
class Timeout : public std::runtime_error {
 public:
  Timeout() : std::runtime_error("timeout") {}
};

class Deadline {
 public:
  Deadline() = default;
  explicit Deadline(double seconds)
      : at_(std::chrono::steady_clock::now() +
            std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                std::chrono::duration<double>(seconds))) {}

  bool expired() const { return at_ && std::chrono::steady_clock::now() >= *at_; }
  void check() const {
    if (expired()) throw Timeout();
  }

 private:
  std::optional<std::chrono::steady_clock::time_point> at_;
};

}  // namespace geobound
