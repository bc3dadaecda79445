#include "stoqlab/cli_run.hpp"

int main(int argc, char** argv) { return stoqlab::cli::main_entry(argc, argv); }
