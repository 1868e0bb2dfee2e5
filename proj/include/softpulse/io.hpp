#pragma once

#include <string>

#include <json.hpp>

namespace softpulse {

using Json = nlohmann::ordered_json;

// Rounds to 12 significant digits so serialized output is locale-free and
// byte-identical across reruns.
double round12(double v);
std::string format12(double v);

// Writes via a temp file in the same directory, then renames into place.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace softpulse
