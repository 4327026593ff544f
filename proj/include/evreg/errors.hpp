#pragma once

#include <stdexcept>
#include <string>

namespace evreg {

// Categories map onto CLI exit codes: Usage=1, Data=2, Numeric=3.
enum class ErrorCategory { Usage = 1, Data = 2, Numeric = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory cat, const std::string& msg)
        : std::runtime_error(msg), cat_(cat) {}
    ErrorCategory category() const { return cat_; }
    int exit_code() const { return static_cast<int>(cat_); }

private:
    ErrorCategory cat_;
};

struct InvalidParameter : Error {
    explicit InvalidParameter(const std::string& msg) : Error(ErrorCategory::Usage, msg) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& msg) : Error(ErrorCategory::Data, msg) {}
};

struct TooFewSamples : Error {
    explicit TooFewSamples(const std::string& msg) : Error(ErrorCategory::Data, msg) {}
};

struct EmptyDataset : Error {
    explicit EmptyDataset(const std::string& msg) : Error(ErrorCategory::Data, msg) {}
};

struct FileNotFound : Error {
    explicit FileNotFound(const std::string& msg) : Error(ErrorCategory::Data, msg) {}
};

struct SchemaMismatch : Error {
    explicit SchemaMismatch(const std::string& msg) : Error(ErrorCategory::Data, msg) {}
};

// row is 1-based over data rows, header excluded
struct NonPositiveDuration : Error {
    NonPositiveDuration(int row_, const std::string& msg)
        : Error(ErrorCategory::Data, msg), row(row_) {}
    int row;
};

struct NegativeTime : Error {
    explicit NegativeTime(const std::string& msg) : Error(ErrorCategory::Numeric, msg) {}
};

struct UnreachableLevel : Error {
    explicit UnreachableLevel(const std::string& msg) : Error(ErrorCategory::Numeric, msg) {}
};

struct DegenerateGrid : Error {
    explicit DegenerateGrid(const std::string& msg) : Error(ErrorCategory::Numeric, msg) {}
};

struct NoComparablePairs : Error {
    explicit NoComparablePairs(const std::string& msg) : Error(ErrorCategory::Numeric, msg) {}
};

} // namespace evreg
