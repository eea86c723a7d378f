#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adaloss {

// Broken precondition on an argument: bad dimensions, out-of-range parameter,
// a base loss outside [0, 1], and so on.
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A ratio whose denominator vanishes, e.g. Dice on an all-background mask
// with no smoothing.
class DegenerateInput : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// ROC AUC requested on a pixel set containing a single class.
class UndefinedAuc : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Anything wrong with data read from disk.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PgmError : public DataError {
public:
    enum class Kind {
        io,
        unsupported_format,
        malformed_header,
        bit_depth,
        truncated,
        dimension_mismatch,
    };

    PgmError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

// The blob sampler could not hit the requested foreground fraction.
class GenerationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss or gradient.
class Divergence : public std::runtime_error {
public:
    Divergence(std::size_t epoch, std::size_t batch, const std::string& detail)
        : std::runtime_error("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch) + ": " + detail),
          epoch_(epoch),
          batch_(batch) {}

    std::size_t epoch() const noexcept { return epoch_; }
    std::size_t batch() const noexcept { return batch_; }

private:
    std::size_t epoch_;
    std::size_t batch_;
};

} // namespace adaloss
