#pragma once

namespace pspectral {

/// Entry point of the command-line tool. Returns 0 on success, 1 when a
/// verdict fails (certify, verify) or a computation fails, 2 on usage errors.
int run_cli(int argc, char** argv);

}  // namespace pspectral
