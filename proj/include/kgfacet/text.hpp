#pragma once

#include <string>
#include <string_view>

namespace kgfacet {

// ASCII case folding; labels in the datasets are compared byte-wise otherwise.
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool istarts_with(std::string_view s, std::string_view prefix);

}  // namespace kgfacet
