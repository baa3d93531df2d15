// Command-line front end. Every command prints a JSON report to `out` and
// optionally writes it to --report PATH.

#ifndef RAUM_CLI_H_
#define RAUM_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace raum {

inline constexpr int kExitAdmits = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitRejects = 3;
inline constexpr int kExitNumerical = 4;

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

// `args` excludes the program name.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace raum

#endif  // RAUM_CLI_H_
