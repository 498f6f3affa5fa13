#pragma once

#include <stdexcept>
#include <string>

namespace usres {

/// Raised when a numerical procedure degenerates past recovery
/// (rank collapse, coincident roots, singular normal equations).
/// Distinct from std::invalid_argument, which flags contract violations
/// detectable before any numerics run.
class degeneracy_error : public std::runtime_error {
public:
    explicit degeneracy_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace usres
