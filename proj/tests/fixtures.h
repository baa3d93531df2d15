// Shared fixtures for the test binaries.

#ifndef RAUM_TESTS_FIXTURES_H_
#define RAUM_TESTS_FIXTURES_H_

#include <string>

#include "raum/core.h"
#include "raum/io.h"

namespace raum::testing {

inline std::string DataPath(const std::string& name) {
  return std::string(RAUM_DATA_DIR) + "/" + name;
}

inline ChoiceDataset LoadFixture(const std::string& name) {
  return ParseDataset(ReadFile(DataPath(name)));
}

// Two orders on {a, b}: a>b (rank 0) and b>a (rank 1); filters {a}, {b}.
//   menu {a,b}: 1/3, 1/6, 1/6, 1/3 over (a>b,{a}), (a>b,{b}), (b>a,{a}), (b>a,{b})
//   menu {a}:   1/2 on (a>b,{a}) and (b>a,{a})
//   menu {b}:   1/2 on (a>b,{b}) and (b>a,{b})
inline RaumRule TwoOrderMixtureRule() {
  const Universe universe = Universe::Letters(2);
  const Subset a = Subset::Singleton(0);
  const Subset b = Subset::Singleton(1);
  const Subset ab = a | b;
  RaumRule rule(universe);
  rule.at(ab, 0, a) = 1.0 / 3.0;
  rule.at(ab, 0, b) = 1.0 / 6.0;
  rule.at(ab, 1, a) = 1.0 / 6.0;
  rule.at(ab, 1, b) = 1.0 / 3.0;
  rule.at(a, 0, a) = 0.5;
  rule.at(a, 1, a) = 0.5;
  rule.at(b, 0, b) = 0.5;
  rule.at(b, 1, b) = 0.5;
  return rule;
}

}  // namespace raum::testing

#endif  // RAUM_TESTS_FIXTURES_H_
