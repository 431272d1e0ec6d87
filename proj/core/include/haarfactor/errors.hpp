#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace hf {

// Failure of a mathematical precondition or an exhausted search budget, as
// opposed to bad input or a programming error. Drivers map this to a
// distinct exit code and serialize the payload, so batch runs can tell
// "needs more depth" apart from bugs.
class StructuredFailure : public std::runtime_error {
public:
  StructuredFailure(std::string stage, const std::string& message,
                    std::map<std::string, double> data = {})
      : std::runtime_error(stage + ": " + message),
        stage_(std::move(stage)),
        data_(std::move(data)) {}

  const std::string& stage() const noexcept { return stage_; }
  const std::map<std::string, double>& data() const noexcept { return data_; }

private:
  std::string stage_;
  std::map<std::string, double> data_;
};

}  // namespace hf
