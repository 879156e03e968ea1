#pragma once

#include <string>
#include <string_view>
#include <vector>

// Read-only copies of the files under data/, compiled into the library.
namespace trustconv::bundled {

/// Contents of a bundled file by relative path, e.g. "lexicons/automation.txt".
std::string_view file(std::string_view name);

std::vector<std::string> names();

}  // namespace trustconv::bundled
