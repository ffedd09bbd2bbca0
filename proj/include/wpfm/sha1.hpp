#pragma once

#include <cstdint>
#include <string>

namespace wpfm {

// SHA-1 digest of a byte string, as 40 lowercase hex characters. Used for
// content fingerprints (config identity), not for security.
std::string sha1_hex(const std::string& data);

}  // namespace wpfm
