#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace firedetect {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Input outside the physical or calibrated domain of a model.
class DomainError : public Error {
  public:
    using Error::Error;
};

// Load exceeds the transfer capability of the segment; the scenario is discarded.
class InfeasibleError : public Error {
  public:
    using Error::Error;
};

// Malformed configuration, dataset or schema; maps to exit code 2.
class ValidationError : public Error {
  public:
    using Error::Error;
};

class CalibrationError : public ValidationError {
  public:
    CalibrationError(const std::string &what, std::vector<std::string> rows)
        : ValidationError(what), offending_rows_(std::move(rows)) {}

    const std::vector<std::string> &offending_rows() const noexcept { return offending_rows_; }

  private:
    std::vector<std::string> offending_rows_;
};

class IoError : public Error {
  public:
    using Error::Error;
};

} // namespace firedetect
