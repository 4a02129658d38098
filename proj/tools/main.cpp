#include "cli.hpp"

int main(int argc, char** argv) { return fplab::cli::cli_main(argc, argv); }
