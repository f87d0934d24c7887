#include "commands.hpp"

int main(int argc, char** argv) { return elastoplast::cli::run_command(argc, argv); }
