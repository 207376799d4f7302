#pragma once

#include <stdexcept>
#include <string>

namespace fvenc {

// Base class for all library errors. Subclasses exist per failure kind so
// callers can catch precisely.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define FVENC_DEFINE_ERROR(Name)                                               \
    class Name : public Error {                                                \
      public:                                                                  \
        explicit Name(const std::string& msg) : Error(#Name ": " + msg) {}     \
    }

// tensor / image / manifest IO
FVENC_DEFINE_ERROR(BadMagic);
FVENC_DEFINE_ERROR(TruncatedPayload);
FVENC_DEFINE_ERROR(NonFiniteValue);
FVENC_DEFINE_ERROR(UnsupportedFormat);
FVENC_DEFINE_ERROR(CorruptHeader);
FVENC_DEFINE_ERROR(DuplicateId);
FVENC_DEFINE_ERROR(LabelOutOfRange);
FVENC_DEFINE_ERROR(MissingPath);

// entropy
FVENC_DEFINE_ERROR(EmptyImage);

// backbone
FVENC_DEFINE_ERROR(ShapeMismatch);
FVENC_DEFINE_ERROR(IndivisibleImage);
FVENC_DEFINE_ERROR(BadConfig);

// stage concatenation
FVENC_DEFINE_ERROR(PlanMismatch);
FVENC_DEFINE_ERROR(SizeMismatch);

// gmm / fisher / kl
FVENC_DEFINE_ERROR(TooFewSamples);
FVENC_DEFINE_ERROR(DegenerateData);
FVENC_DEFINE_ERROR(DimMismatch);
FVENC_DEFINE_ERROR(EmptyFeatureSet);
FVENC_DEFINE_ERROR(NotSingleComponent);

// classifier / metrics
FVENC_DEFINE_ERROR(LabelMismatch);
FVENC_DEFINE_ERROR(EmptySplit);
FVENC_DEFINE_ERROR(SingleClass);

// synth / pipeline
FVENC_DEFINE_ERROR(InvalidSpec);
FVENC_DEFINE_ERROR(ConfigError);

#undef FVENC_DEFINE_ERROR

}  // namespace fvenc
