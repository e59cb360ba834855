#include "errmax/error.hpp"

#include <utility>

namespace errmax {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidSpec: return "invalid-spec";
        case ErrorKind::Shape: return "shape";
        case ErrorKind::Contract: return "contract-violation";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::TrainingDiverged: return "training-diverged";
        case ErrorKind::KnockedOut: return "already-knocked-out";
        case ErrorKind::SamplingStarvation: return "sampling-starvation";
        case ErrorKind::Labeling: return "labeling";
        case ErrorKind::IncompatibleSets: return "incompatible-sets";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::GradientProbe: return "gradient-probe";
        case ErrorKind::Ascent: return "ascent";
        case ErrorKind::EmptyInput: return "empty-input";
        case ErrorKind::Io: return "io";
        case ErrorKind::ManifestValidation: return "manifest-validation";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

TrainingDivergedError::TrainingDivergedError(int epoch, const std::string& what)
    : Error(ErrorKind::TrainingDiverged, what + " (epoch " + std::to_string(epoch) + ")"),
      epoch_(epoch) {}

LabelingError::LabelingError(std::size_t index, const std::string& what)
    : Error(ErrorKind::Labeling, "sample " + std::to_string(index) + ": " + what), index_(index) {}

ParseError::ParseError(std::size_t line, const std::string& what)
    : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + what), line_(line) {}

GradientProbeError::GradientProbeError(std::size_t coordinate, const std::string& what)
    : Error(ErrorKind::GradientProbe, "coordinate " + std::to_string(coordinate) + ": " + what),
      coordinate_(coordinate) {}

AscentError::AscentError(std::string iterate, const std::string& what)
    : Error(ErrorKind::Ascent, what + " at iterate [" + iterate + "]"),
      iterate_(std::move(iterate)) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace errmax
