#include "raum/io.h"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "raum/error.h"

namespace raum {
namespace {

std::string Position(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

const Json& Require(const Json& object, const char* key, const std::string& where) {
  if (!object.is_object() || !object.contains(key)) {
    throw RaumError(ErrorCode::kInput, where + ": missing \"" + key + "\"");
  }
  return object.at(key);
}

int LabelIndex(const Universe& universe, const Json& label, const std::string& where) {
  if (!label.is_string()) throw RaumError(ErrorCode::kInput, where + ": labels must be strings");
  const auto index = universe.IndexOf(label.get<std::string>());
  if (!index) {
    throw RaumError(ErrorCode::kInput,
                    where + ": unknown alternative \"" + label.get<std::string>() + "\"");
  }
  return *index;
}

}  // namespace

ChoiceDataset ParseDataset(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    // byte is one past the offending character.
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    throw RaumError(ErrorCode::kInput, "malformed JSON at " + Position(text, byte));
  }
  if (!root.is_object()) throw RaumError(ErrorCode::kInput, "dataset must be a JSON object");

  const Json& labels = Require(root, "alternatives", "dataset");
  if (!labels.is_array()) throw RaumError(ErrorCode::kInput, "\"alternatives\" must be an array");
  std::vector<std::string> names;
  for (const Json& label : labels) {
    if (!label.is_string()) throw RaumError(ErrorCode::kInput, "alternative labels must be strings");
    names.push_back(label.get<std::string>());
  }
  Universe universe = [&] {
    try {
      return Universe::FromLabels(names);
    } catch (const RaumError& e) {
      throw RaumError(ErrorCode::kInput, e.what());
    }
  }();

  const Json& entries = Require(root, "menus", "dataset");
  if (!entries.is_array()) throw RaumError(ErrorCode::kInput, "\"menus\" must be an array");
  std::vector<Subset> menus;
  std::vector<std::vector<double>> probs;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const std::string where = "menus[" + std::to_string(k) + "]";
    const Json& entry = entries[k];
    const Json& members = Require(entry, "menu", where);
    if (!members.is_array()) throw RaumError(ErrorCode::kInput, where + ": \"menu\" must be an array");
    std::uint32_t bits = 0;
    for (const Json& label : members) {
      const int index = LabelIndex(universe, label, where);
      if ((bits >> index) & 1u) {
        throw RaumError(ErrorCode::kInput, where + ": repeated alternative in menu");
      }
      bits |= std::uint32_t{1} << index;
    }
    const Json& table = Require(entry, "probs", where);
    if (!table.is_object()) throw RaumError(ErrorCode::kInput, where + ": \"probs\" must be an object");
    std::vector<double> row(universe.size(), 0.0);
    for (const auto& [label, value] : table.items()) {
      const int index = LabelIndex(universe, Json(label), where);
      if (!value.is_number()) {
        throw RaumError(ErrorCode::kInput, where + ": probability of \"" + label + "\" is not a number");
      }
      row[index] = value.get<double>();
    }
    menus.push_back(Subset(bits));
    probs.push_back(std::move(row));
  }
  return ChoiceDataset(std::move(universe), std::move(menus), std::move(probs));
}

Json DatasetToJson(const ChoiceDataset& dataset) {
  const Universe& universe = dataset.universe();
  Json labels = Json::array();
  for (int i = 0; i < universe.size(); ++i) labels.push_back(universe.label(i));
  Json menus = Json::array();
  for (std::size_t k = 0; k < dataset.num_menus(); ++k) {
    Json members = Json::array();
    Json probs = Json::object();
    for (int a : dataset.menus()[k].members()) {
      members.push_back(universe.label(a));
      probs[universe.label(a)] = dataset.prob(k, a);
    }
    menus.push_back(Json{{"menu", members}, {"probs", probs}});
  }
  return Json{{"alternatives", labels}, {"menus", menus}};
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RaumError(ErrorCode::kInput, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RaumError(ErrorCode::kInput, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw RaumError(ErrorCode::kInput, "failed writing " + path.string());
}

std::vector<PreferenceOrder> ParseOrders(std::string_view text, const Universe& universe) {
  std::vector<PreferenceOrder> orders;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      orders.push_back(PreferenceOrder::Parse(line, universe));
    } catch (const RaumError& e) {
      throw RaumError(ErrorCode::kInput, "orders line " + std::to_string(number) + ": " + e.what());
    }
  }
  if (orders.empty()) throw RaumError(ErrorCode::kInput, "orders file lists no orders");
  return orders;
}

std::string Sha256Hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw RaumError(ErrorCode::kNumerical, "sha256 failed");
  }
  std::string hex;
  hex.reserve(2 * length);
  char pair[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(pair, sizeof pair, "%02x", digest[i]);
    hex += pair;
  }
  return hex;
}

Json RuleToJson(const RaumRule& rule, double threshold) {
  const Universe& universe = rule.universe();
  const std::vector<Subset> sets = EnumerateSets(universe);
  const std::vector<PreferenceOrder> orders = EnumerateOrders(universe);
  Json entries = Json::array();
  for (Subset menu : sets) {
    for (const PreferenceOrder& order : orders) {
      for (Subset d : sets) {
        const double value = rule.at(menu, order.rank(), d);
        if (std::abs(value) <= threshold || value == 0.0) continue;
        entries.push_back(Json{{"menu", universe.Format(menu)},
                               {"order", order.Format(universe)},
                               {"set", universe.Format(d)},
                               {"value", value}});
      }
    }
  }
  return entries;
}

}  // namespace raum
