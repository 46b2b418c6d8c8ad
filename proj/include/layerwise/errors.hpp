#pragma once

#include <stdexcept>
#include <string>

namespace layerwise {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define LAYERWISE_DEFINE_ERROR(Name)          \
    class Name : public Error {               \
    public:                                   \
        using Error::Error;                   \
    }

LAYERWISE_DEFINE_ERROR(DimensionMismatch);
LAYERWISE_DEFINE_ERROR(SingularMatrix);
LAYERWISE_DEFINE_ERROR(DegenerateInput);
LAYERWISE_DEFINE_ERROR(ZeroGradient);
LAYERWISE_DEFINE_ERROR(InsufficientProbes);
LAYERWISE_DEFINE_ERROR(NonPositiveSigma);
LAYERWISE_DEFINE_ERROR(NegativeBeta);
LAYERWISE_DEFINE_ERROR(IoError);
LAYERWISE_DEFINE_ERROR(FormatError);
LAYERWISE_DEFINE_ERROR(ParseError);
LAYERWISE_DEFINE_ERROR(ShapeError);
LAYERWISE_DEFINE_ERROR(TooFewSamples);
LAYERWISE_DEFINE_ERROR(InvalidArgument);

#undef LAYERWISE_DEFINE_ERROR

} // namespace layerwise
