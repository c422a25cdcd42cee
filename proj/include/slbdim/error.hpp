#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace slbdim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

class InvalidDomain : public Error {
public:
    using Error::Error;
};

/// Evaluation of a singular kernel at its source point.
class SingularityError : public Error {
public:
    using Error::Error;
};

class OutOfSubdomain : public Error {
public:
    using Error::Error;
};

/// Raised by the stable basis when the node set does not span n independent
/// expansion functions (duplicate nodes, or rank lost after truncation).
class RankDeficient : public Error {
public:
    using Error::Error;
};

/// A direct Gaussian interpolation matrix whose 2-norm condition number
/// exceeds the working-precision threshold.
class IllConditionedStencil : public Error {
public:
    IllConditionedStencil(std::size_t stencil, double condition)
        : Error("ill-conditioned stencil " + std::to_string(stencil) + " (cond = " +
                format_condition(condition) + ")"),
          stencil_(stencil), condition_(condition) {}

    [[nodiscard]] std::size_t stencil() const noexcept { return stencil_; }
    [[nodiscard]] double condition() const noexcept { return condition_; }

private:
    static std::string format_condition(double c) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3e", c);
        return buf;
    }

    std::size_t stencil_;
    double condition_;
};

class NumericFailure : public Error {
public:
    NumericFailure(std::size_t stencil, const std::string& what)
        : Error("numeric failure on stencil " + std::to_string(stencil) + ": " + what),
          stencil_(stencil) {}

    [[nodiscard]] std::size_t stencil() const noexcept { return stencil_; }

private:
    std::size_t stencil_;
};

class AssemblyError : public Error {
public:
    using Error::Error;
};

class SingularSystem : public Error {
public:
    using Error::Error;
};

class UndefinedMetric : public Error {
public:
    using Error::Error;
};

} // namespace slbdim
