#ifndef RAUM_ERROR_H_
#define RAUM_ERROR_H_

#include <stdexcept>
#include <string>

namespace raum {

enum class ErrorCode {
  kInvalidArgument,   // precondition violated by the caller
  kInput,             // malformed dataset, order string, or file
  kNoRepresentation,  // the dataset admits no representation under the flags
  kNumerical,         // the solver did not produce a verifiable answer
};

class RaumError : public std::runtime_error {
 public:
  RaumError(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace raum

#endif  // RAUM_ERROR_H_
