#pragma once

#include <stdexcept>
#include <string>

namespace rnewton {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define RNEWTON_DEFINE_ERROR(Name)        \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  };

RNEWTON_DEFINE_ERROR(SingularMatrix)
RNEWTON_DEFINE_ERROR(ZeroMatrix)
RNEWTON_DEFINE_ERROR(ShapeMismatch)
RNEWTON_DEFINE_ERROR(ActivationDomainError)
RNEWTON_DEFINE_ERROR(Underdetermined)
RNEWTON_DEFINE_ERROR(IndexOutOfRange)
RNEWTON_DEFINE_ERROR(BadSize)
RNEWTON_DEFINE_ERROR(StructurallySingular)
RNEWTON_DEFINE_ERROR(TooLarge)
RNEWTON_DEFINE_ERROR(NoShock)
RNEWTON_DEFINE_ERROR(QuadratureFailure)
RNEWTON_DEFINE_ERROR(NoReference)
RNEWTON_DEFINE_ERROR(InsufficientTail)
RNEWTON_DEFINE_ERROR(ConfigError)

#undef RNEWTON_DEFINE_ERROR

}  // namespace rnewton
