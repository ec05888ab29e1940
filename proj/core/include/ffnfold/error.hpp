#pragma once

#include <stdexcept>
#include <string>

namespace ffnfold {

// Error categories map 1:1 onto CLI exit codes.
enum class ErrKind {
  Validation = 1,  // bad arguments, shape mismatches, infeasible configs
  Io = 2,          // file system and format errors
  Internal = 3,    // broken invariants
};

class Error : public std::runtime_error {
 public:
  Error(ErrKind kind, std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message),
        kind_(kind),
        code_(std::move(code)) {}

  ErrKind kind() const { return kind_; }
  const std::string& code() const { return code_; }

 private:
  ErrKind kind_;
  std::string code_;
};

}  // namespace ffnfold
