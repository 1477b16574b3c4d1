#include "relab/cli/cli.hpp"

int main(int argc, char** argv) { return relab::cli::main_entry(argc, argv); }
