#pragma once

#include <simherd/engine/fire.hpp>
#include <simherd/engine/wolf_sheep.hpp>

#include <algorithm>
#include <cctype>
#include <memory>
#include <string>
#include <string_view>

namespace simherd::engine {

// Maps ".../Wolf Sheep Predation.nlogo" to "wolf-sheep-predation": basename,
// extension dropped, lowercased, runs of spaces/underscores become '-'.
inline std::string model_key_from_path(std::string_view path) {
  auto slash = path.find_last_of("/\\");
  auto base = slash == std::string_view::npos ? path : path.substr(slash + 1);
  constexpr std::string_view ext = ".nlogo";
  if (base.size() >= ext.size()) {
    std::string tail(base.substr(base.size() - ext.size()));
    std::transform(tail.begin(), tail.end(), tail.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (tail == ext) base = base.substr(0, base.size() - ext.size());
  }
  std::string key;
  bool pending_dash = false;
  for (unsigned char c : base) {
    if (c == ' ' || c == '_' || c == '-') {
      pending_dash = !key.empty();
      continue;
    }
    if (pending_dash) key.push_back('-');
    pending_dash = false;
    key.push_back(static_cast<char>(std::tolower(c)));
  }
  return key;
}

inline std::unique_ptr<Model> make_model(std::string_view path_or_key) {
  const auto key = model_key_from_path(path_or_key);
  if (key == WolfSheepModel::kKey) return std::make_unique<WolfSheepModel>();
  if (key == FireModel::kKey) return std::make_unique<FireModel>();
  throw Error(ErrorKind::not_found, "no model registered for \"" + std::string(path_or_key) + "\"");
}

}  // namespace simherd::engine
