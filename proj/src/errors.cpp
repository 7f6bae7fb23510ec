#include "uce/errors.hpp"

#include <cstdio>

namespace uce {

IoError::IoError(const std::string& what, std::uint64_t byte_offset)
    : Error(what + " (byte offset " + std::to_string(byte_offset) + ")"), offset_(byte_offset)
{
}

namespace {
std::string with_pivot(const std::string& what, double pivot)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, " (smallest pivot %.6g)", pivot);
    return what + buf;
}
} // namespace

SingularMatrixError::SingularMatrixError(const std::string& what, double smallest_pivot)
    : Error(with_pivot(what, smallest_pivot)), pivot_(smallest_pivot)
{
}

} // namespace uce
