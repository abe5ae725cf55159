#pragma once

namespace spl {

/// Entry point of the `spl` binary. Returns 0 on success, 1 on a usage or
/// validation error and 2 on an I/O error.
int run_cli(int argc, char** argv);

}  // namespace spl
