#include "cli.hpp"

int main(int argc, char** argv) { return cmvspec::cli::main_entry(argc, argv); }
