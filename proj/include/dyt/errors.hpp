#pragma once

#include <stdexcept>
#include <string>

namespace dyt {

// Base for all checked mathematical / input failures. `code` is the stable
// machine-readable name used in reports.
class DytError : public std::runtime_error {
public:
  DytError(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

private:
  std::string code_;
};

#define DYT_ERROR_TYPE(Name)                                              \
  class Name : public DytError {                                          \
  public:                                                                 \
    explicit Name(const std::string& what) : DytError(#Name, what) {}     \
  }

DYT_ERROR_TYPE(DegenerateDenominator);
DYT_ERROR_TYPE(IdenticallyDegenerate);
DYT_ERROR_TYPE(NotEquivariant);
DYT_ERROR_TYPE(FrameDegenerate);
DYT_ERROR_TYPE(DegenerateForm);
DYT_ERROR_TYPE(DegenerateAtBasePoint);
DYT_ERROR_TYPE(NotClosed);
DYT_ERROR_TYPE(NotStronglyInvariant);
DYT_ERROR_TYPE(ExtractionInconsistent);
DYT_ERROR_TYPE(NotCocycle);
DYT_ERROR_TYPE(InputInvalid);
DYT_ERROR_TYPE(InternalError);

#undef DYT_ERROR_TYPE

}  // namespace dyt
