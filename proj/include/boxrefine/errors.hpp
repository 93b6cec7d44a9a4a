#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace boxrefine {

// Base for every library error. error_class() is a stable machine-parsable
// token; what() carries the human message.
class Error : public std::runtime_error {
public:
    Error(std::string error_class, const std::string& message)
        : std::runtime_error(message), class_(std::move(error_class)) {}

    const std::string& error_class() const { return class_; }

private:
    std::string class_;
};

#define BOXREFINE_DEFINE_ERROR(NAME)                                        \
    class NAME : public Error {                                             \
    public:                                                                 \
        explicit NAME(const std::string& message) : Error(#NAME, message) {} \
    }

BOXREFINE_DEFINE_ERROR(DegenerateBox);
BOXREFINE_DEFINE_ERROR(ClassOutOfRange);
BOXREFINE_DEFINE_ERROR(UnknownEstimator);
BOXREFINE_DEFINE_ERROR(InvalidEstimator);
BOXREFINE_DEFINE_ERROR(InvalidProfile);
BOXREFINE_DEFINE_ERROR(NoOverlap);
BOXREFINE_DEFINE_ERROR(JitterFailed);
BOXREFINE_DEFINE_ERROR(ConfigError);
BOXREFINE_DEFINE_ERROR(EmptyCorpus);
BOXREFINE_DEFINE_ERROR(FormatError);
BOXREFINE_DEFINE_ERROR(VersionMismatch);
BOXREFINE_DEFINE_ERROR(ValueRangeError);
BOXREFINE_DEFINE_ERROR(MixedShapes);
BOXREFINE_DEFINE_ERROR(IoError);
BOXREFINE_DEFINE_ERROR(UsageError);

#undef BOXREFINE_DEFINE_ERROR

}  // namespace boxrefine
