#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace rmt {

/// Error with a stable machine-readable kind ("MalformedRule", "NoRootVerb", ...)
/// and the pipeline stage it belongs to (tokenize/tag/ontology/inference/...).
class Error : public std::runtime_error {
  public:
    Error(std::string kind, std::string stage, const std::string& message)
        : std::runtime_error(kind + ": " + message),
          kind_(std::move(kind)),
          stage_(std::move(stage)) {}

    const std::string& kind() const { return kind_; }
    const std::string& stage() const { return stage_; }

  private:
    std::string kind_;
    std::string stage_;
};

[[noreturn]] inline void raise(const std::string& kind, const std::string& stage,
                               const std::string& message) {
    throw Error(kind, stage, message);
}

} // namespace rmt
