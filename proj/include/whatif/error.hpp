#pragma once

#include <stdexcept>
#include <string>

namespace whatif {

/// Bad user input: unknown columns, malformed files, out-of-range values.
/// Maps to HTTP 422 and CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A physical quantity outside the domain of the building model.
class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Knowledge constraints that cannot be satisfied (cycle, conflicting
/// orientation). `edge()` names the offending edge as "A -> B".
class ContradictionError : public std::runtime_error {
public:
    ContradictionError(const std::string& what, std::string edge)
        : std::runtime_error(what), edge_(std::move(edge)) {}

    const std::string& edge() const noexcept { return edge_; }

private:
    std::string edge_;
};

class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace whatif
