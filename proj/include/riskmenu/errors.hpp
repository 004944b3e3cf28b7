#ifndef RISKMENU_ERRORS_HPP
#define RISKMENU_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace riskmenu {

/// Argument outside the mathematical domain of an operation (w <= 0, m <= 0, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Base for failures of a numerical procedure on otherwise valid input.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Conditioning or restriction on an interval that carries no probability mass.
class ZeroMassError : public NumericalError {
public:
    ZeroMassError(double lo, double hi)
        : NumericalError("zero probability mass on [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]"),
          lo_(lo), hi_(hi) {}
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }

private:
    double lo_;
    double hi_;
};

/// Quadrature did not reach the requested tolerance; carries the best estimate.
class ToleranceError : public NumericalError {
public:
    ToleranceError(const std::string& what, double best_estimate)
        : NumericalError(what), best_(best_estimate) {}
    double best_estimate() const noexcept { return best_; }

private:
    double best_;
};

class ConditioningError : public NumericalError {
public:
    ConditioningError(const std::string& what, double condition_number)
        : NumericalError(what), cond_(condition_number) {}
    double condition_number() const noexcept { return cond_; }

private:
    double cond_;
};

/// Raised by the iterative indifference construction when no targeted type exists at step `step`.
class InfeasibleError : public NumericalError {
public:
    InfeasibleError(const std::string& what, std::size_t step)
        : NumericalError(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

} // namespace riskmenu

#endif // RISKMENU_ERRORS_HPP
