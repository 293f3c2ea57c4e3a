#pragma once

#include <stdexcept>
#include <string>

namespace argprobe {

enum class ErrorKind {
  load,
  integrity,
  conflict,
  invalid_token,
  bounds,
  config,
  missing_token,
  insufficient_candidates,
  selection,
  generation,
  shape,
  sampling,
  divergence,
  metric,
  coverage,
  pairing,
  parameter,
  undefined_similarity,
  correlation,
  validation,
  report,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

}  // namespace argprobe
