#include "cli.hpp"

int main(int argc, char** argv) { return magloop::cli::run_cli(argc, argv); }
