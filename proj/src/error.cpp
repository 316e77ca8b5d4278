#include "ncci/error.hpp"

#include <utility>

namespace ncci {

MissingInputError::MissingInputError(const std::string& what, std::string path)
    : Error(what + ": " + path), path_(std::move(path)) {}

}  // namespace ncci
