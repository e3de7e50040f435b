#pragma once

#include <string>

#include "riskkit/table.hpp"  // json alias

namespace riskkit {

// Parses the TOML subset used by run configs -- [table] headers with dotted
// paths, dotted/bare keys, strings with the usual escapes, integers, floats,
// booleans, (multi-line) arrays, and # comments -- into a JSON object tree.
// Inline tables, table arrays, and dates are not part of the subset.
// Malformed input and duplicate keys raise config errors with line numbers.
json parse_toml(const std::string& text);

json load_toml(const std::string& path);

}  // namespace riskkit
