#pragma once

#include <string_view>

namespace voxelbot::defaults {

// Contents of the data/ files compiled into the library.
std::string_view blocks_text();
std::string_view grammar_text();
std::string_view dances_text();
std::string_view profanity_text();

}  // namespace voxelbot::defaults
