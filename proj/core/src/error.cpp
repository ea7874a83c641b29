#include "coi/error.hpp"

#include <cerrno>
#include <cstring>

namespace coi {

void throw_io(const std::string& what, const std::string& path) {
  const int err = errno;
  std::string message = what + " '" + path + "'";
  if (err != 0) {
    message += ": ";
    message += std::strerror(err);
  }
  throw IoError(message);
}

}  // namespace coi
