#ifndef OVD_CLI_HPP
#define OVD_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "ovd/config.hpp"

namespace ovd {

// Exit-code contract: 0 full pass, 1 numerical error, 2 assumption /
// certification failure, 64 usage or config error.
enum ExitCode : int {
    kExitOk = 0,
    kExitNumerical = 1,
    kExitAssumption = 2,
    kExitUsage = 64,
};

int cmd_analyze(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sigma(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_branch(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Full front end: run_cli({"analyze", "--config", "run.cfg", ...}).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ovd

#endif
