#ifndef WGRES_ERRORS_HPP
#define WGRES_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wgres {

// Error families map to distinct CLI exit codes (see tools/).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct GeometryError : std::runtime_error {
    explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

// Requested computation lies outside the perturbative pole regime
// (trap too close to the strip, ||A_n G|| too large, pole escaping S_n).
struct RegimeError : std::runtime_error {
    explicit RegimeError(const std::string& what) : std::runtime_error(what) {}
};

struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

// A quadrature or series failed to reach the requested accuracy.
struct AccuracyError : std::runtime_error {
    explicit AccuracyError(const std::string& what) : std::runtime_error(what) {}
};

// Branch-point, threshold-proximity and spectral-degeneracy guards.
struct BranchError : std::runtime_error {
    explicit BranchError(const std::string& what) : std::runtime_error(what) {}
};

struct ThresholdError : std::runtime_error {
    explicit ThresholdError(const std::string& what) : std::runtime_error(what) {}
};

struct MultiplicityError : std::runtime_error {
    explicit MultiplicityError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace wgres

#endif
