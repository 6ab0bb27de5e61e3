#include "certbound/cli.hpp"

int main(int argc, char** argv) { return certbound::cli::main_entry(argc, argv); }
