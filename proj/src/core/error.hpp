#pragma once

#include <stdexcept>
#include <string>

namespace intentsim {

/// Library-wide error with a coarse category the C boundary can map to a status code.
class Error : public std::runtime_error {
 public:
  enum class Code {
    InvalidArgument,  // bad identifier, out-of-range parameter
    Validation,       // structurally invalid scenario/model input
    Parse,            // malformed file or wire payload
    Io,               // file system failure
    Runtime,          // internal invariant breach
  };

  Error(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

}  // namespace intentsim
