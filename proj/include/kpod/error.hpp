#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kpod {

/// Failure categories. The CLI maps `usage` to exit code 2 and everything
/// else to exit code 1.
enum class Errc {
  numerical,   // degenerate or ill-conditioned data, failed factorization
  usage,       // invalid configuration or missing context
  parse,       // malformed input file
  io,          // filesystem failure
  version,     // model directory written by an incompatible format
  checksum,    // blob content does not match the manifest
  dimension,   // manifest and blob shapes disagree
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Reduced solve rejected because the reduced matrix is (numerically) singular.
class IllConditioned : public Error {
 public:
  IllConditioned(double condition, const std::string& what)
      : Error(Errc::numerical, what), condition_(condition) {}

  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

inline std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::numerical: return "numerical";
    case Errc::usage: return "usage";
    case Errc::parse: return "parse";
    case Errc::io: return "io";
    case Errc::version: return "version";
    case Errc::checksum: return "checksum";
    case Errc::dimension: return "dimension";
  }
  return "unknown";
}

}  // namespace kpod
