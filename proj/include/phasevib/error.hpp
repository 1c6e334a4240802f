#pragma once

#include <stdexcept>
#include <string>

namespace phasevib {

/// Base exception for every failure raised by the library.
///
/// `stage` names the pipeline step that failed ("load", "estimate", ...) so
/// the command-line front end can emit one machine-parsable line.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message, std::string stage = "core")
      : std::runtime_error(message), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace phasevib
