#pragma once

namespace mobsim {

// Full command-line surface (simulate, moments, fit, regress, replicate).
// Returns the process exit code: 0 success, 2 usage error, 3 data or I/O
// error, 4 numerical infeasibility.
int run_cli(int argc, char** argv);

}  // namespace mobsim
