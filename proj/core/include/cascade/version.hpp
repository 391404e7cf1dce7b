#pragma once

#include <string_view>

namespace cascade {

// Project version plus `git describe` output when built from a checkout.
std::string_view version();

}  // namespace cascade
