#include "errmax/cli/commands.hpp"

int main(int argc, char** argv) { return errmax::cli::run_cli(argc, argv); }
