#pragma once

#include <stdexcept>
#include <string>

namespace spinphoton {

/// Contract violations and numerical failures. The message names the
/// failing condition ("degenerate model", "empty channel", ...).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace spinphoton
