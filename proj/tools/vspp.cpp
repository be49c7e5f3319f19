#include "vspp/cli.hpp"

int main(int argc, char** argv) { return vspp::cli::run_cli(argc, argv); }
