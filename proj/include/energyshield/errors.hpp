#pragma once

#include <stdexcept>
#include <string>

namespace energyshield {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// no safe slip angle exists at a state; sigma/K miscalibrated
struct EmptySafeSet : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// h < 0 observed while the shield is active
struct InvariantBreach : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace energyshield
