#pragma once

#include <stdexcept>
#include <string>

namespace tessera {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

#define TESSERA_DEFINE_ERROR(Name)                                                           \
  class Name : public Error                                                                \
  {                                                                                        \
  public:                                                                                  \
    using Error::Error;                                                                    \
  }

TESSERA_DEFINE_ERROR(DomainError);
TESSERA_DEFINE_ERROR(SingularExpit);
TESSERA_DEFINE_ERROR(SingularKernel);
TESSERA_DEFINE_ERROR(InsufficientData);
TESSERA_DEFINE_ERROR(DegenerateSample);
TESSERA_DEFINE_ERROR(NoSolution);
TESSERA_DEFINE_ERROR(NoRealSolution);
TESSERA_DEFINE_ERROR(NotApplicable);
TESSERA_DEFINE_ERROR(ModelMismatch);
TESSERA_DEFINE_ERROR(SingularJacobian);
TESSERA_DEFINE_ERROR(IntegrationFailure);
TESSERA_DEFINE_ERROR(DivergentIntegrand);
TESSERA_DEFINE_ERROR(ConfigError);
TESSERA_DEFINE_ERROR(MissingColumns);
TESSERA_DEFINE_ERROR(InsufficientRows);

#undef TESSERA_DEFINE_ERROR

/// Raised by tess_reciprocal when one of the two eigenchannels vanishes.
class ZeroDivisor : public Error
{
public:
  enum class Channel
  {
    Plus,  ///< (a+c) + i(b+d)
    Minus, ///< (a-c) + i(b-d)
  };

  ZeroDivisor(Channel channel, const std::string& what)
    : Error(what)
    , channel_(channel)
  {
  }

  Channel channel() const noexcept { return channel_; }

private:
  Channel channel_;
};

} // namespace tessera
