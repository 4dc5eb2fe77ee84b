#pragma once

#include <string>
#include <string_view>

namespace songcraft {

/// Lowercase hex SHA-256 of the bytes of `data`.
std::string Sha256Hex(std::string_view data);

}  // namespace songcraft
