#pragma once

#include <stdexcept>
#include <string>

namespace refspect {

enum class ErrorCode {
  kIo,
  kBadFormat,         // structurally invalid input file
  kEmptyReference,
  kInvalidArgument,
  kUnknownCluster,
  kRevisionConflict,
  kDegenerateMap,
  kMissingJournal,    // journal key absent from the map
  kNoMatchedRecords,
  kUnsupportedVersion,
  kCorrupt,
  kLocked,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace refspect
