#include "ekfloc/cli.hpp"

int main(int argc, char** argv) { return ekfloc::cli_main(argc, argv); }
