#ifndef JOINTLCA_ERRORS_HPP
#define JOINTLCA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace jointlca {

/// Raised when user-supplied data or parameters fail validation.
/// The CLI maps this to exit code 2; everything else exits 1.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace jointlca

#endif
