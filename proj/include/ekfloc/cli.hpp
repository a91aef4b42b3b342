#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ekfloc {

/// Command-line front end.
///
///   ekfloc sim  --config C --seed S --out DIR       truth + sensor log
///   ekfloc fuse --log FILE --config C --out FILE     fused trajectory
///   ekfloc eval --truth FILE --estimate FILE         report JSON on stdout
///   ekfloc plot --truth FILE --estimate FILE --out DIR   SVG charts
///
/// Returns 0 on success, 1 on I/O or validation failures and 2 on usage
/// errors (unknown subcommand or flag, missing arguments).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace ekfloc
