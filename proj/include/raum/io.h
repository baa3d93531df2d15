// Dataset files, preference whitelists, and JSON encodings of rules and
// solver outputs.
//
// Dataset file:
//   {"alternatives": ["a", "b", ...],
//    "menus": [{"menu": ["a", "b"], "probs": {"a": 0.5, "b": 0.5}}, ...]}
// Alternatives missing from "probs" have probability zero.

#ifndef RAUM_IO_H_
#define RAUM_IO_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "raum/core.h"

namespace raum {

using Json = nlohmann::ordered_json;

// Throws RaumError(kInput); syntax errors carry "line L, column C".
ChoiceDataset ParseDataset(std::string_view text);
Json DatasetToJson(const ChoiceDataset& dataset);

// Whole file as bytes. Throws RaumError(kInput) when unreadable.
std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view contents);

// One order per line ("a>b>c"); blank lines and lines starting with '#'
// are skipped. Throws RaumError(kInput) naming the offending line.
std::vector<PreferenceOrder> ParseOrders(std::string_view text, const Universe& universe);

// Lowercase hex SHA-256 of the bytes.
std::string Sha256Hex(std::string_view bytes);

// Nonzero entries {"menu", "order", "set", "value"} in flat-index order.
Json RuleToJson(const RaumRule& rule, double threshold = 0.0);

}  // namespace raum

#endif  // RAUM_IO_H_
