#pragma once

#include <stdexcept>
#include <string>

namespace ltr {

/// Shapes or lengths that do not line up.
class DimensionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter outside the domain an operation accepts.
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document or file.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid MILP construction (unknown variable, bad bounds, duplicate name).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ltr
