#pragma once

#include <stdexcept>
#include <string>

namespace agentvln {

// Base of every fault raised by the library. Tagged outcomes that are
// ordinary results (Behind, OutOfFrame, Unreachable) are returned, not thrown.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define AGENTVLN_DECLARE_ERROR(Name)                 \
  class Name : public Error {                        \
   public:                                           \
    explicit Name(const std::string& what)           \
        : Error(std::string(#Name ": ") + what) {}   \
  }

AGENTVLN_DECLARE_ERROR(InvalidArgument);
AGENTVLN_DECLARE_ERROR(NonPositiveDepth);
AGENTVLN_DECLARE_ERROR(InvalidDepthPixel);
AGENTVLN_DECLARE_ERROR(PoseInCollision);
AGENTVLN_DECLARE_ERROR(NoPath);
AGENTVLN_DECLARE_ERROR(LabelNotVisible);
AGENTVLN_DECLARE_ERROR(Undecidable);
AGENTVLN_DECLARE_ERROR(BrainProtocolViolation);
AGENTVLN_DECLARE_ERROR(ScriptDivergence);
AGENTVLN_DECLARE_ERROR(ScriptExhausted);
AGENTVLN_DECLARE_ERROR(RemoteUnavailable);
AGENTVLN_DECLARE_ERROR(SchemaViolation);
AGENTVLN_DECLARE_ERROR(EmptyTrajectory);
AGENTVLN_DECLARE_ERROR(EmptyList);
AGENTVLN_DECLARE_ERROR(InconsistentLog);
AGENTVLN_DECLARE_ERROR(FormatError);

#undef AGENTVLN_DECLARE_ERROR

}  // namespace agentvln
