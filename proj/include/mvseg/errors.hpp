#ifndef MVSEG_ERRORS_HPP
#define MVSEG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mvseg {

// Error categories map to CLI exit codes: input/validation problems exit
// with 1, runtime failures with 2.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& what)
        : std::runtime_error(what), category_(std::move(category)) {}
    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

struct NotFoundError : Error {
    explicit NotFoundError(const std::string& w) : Error("not_found", w) {}
};
struct FormatError : Error {
    explicit FormatError(const std::string& w) : Error("format", w) {}
};
struct ValidationError : Error {
    explicit ValidationError(const std::string& w) : Error("validation", w) {}
};
struct IoError : Error {
    explicit IoError(const std::string& w) : Error("io", w) {}
};
struct DegenerateInputError : Error {
    explicit DegenerateInputError(const std::string& w) : Error("degenerate_input", w) {}
};
struct NumericalError : Error {
    explicit NumericalError(const std::string& w) : Error("numerical", w) {}
};

} // namespace mvseg

#endif
