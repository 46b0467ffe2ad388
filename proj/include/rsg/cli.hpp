#pragma once

namespace rsg {

// Parses argv and runs one subcommand. Contract violations surface as
// rsg::Error; the binary's main maps them to exit codes (1 for bad input,
// 2 for internal failures).
int run_cli(int argc, char** argv);

}  // namespace rsg
