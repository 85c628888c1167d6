#pragma once

#include <stdexcept>
#include <string>

namespace xfid {

struct GenerationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularSystem : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TooFewValidSamples : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteValueFunction : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegeneratePD : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteContribution : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateIQR : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroVariance : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigInvalid : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace xfid
