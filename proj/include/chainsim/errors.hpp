#pragma once

#include <stdexcept>
#include <string>

namespace chainsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// requested time does not lie on the n*dt grid
struct GridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParameterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IndexError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// a requested experiment cannot be carried out (e.g. empty oracle window)
struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace chainsim
